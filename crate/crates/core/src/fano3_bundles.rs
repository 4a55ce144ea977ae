//! Parameterized threefold component families for the maximal
//! four-component setting, with their boundary surfaces, normal-bundle
//! classes and pairwise restriction tables.
//!
//! Each family is a smooth threefold carrying exactly three boundary
//! divisors, labelled by the slots `D12`, `D13`, `D14` from the component's
//! own point of view. The data stored per slot is everything the
//! d-semistability check consumes: the abstract boundary surface, the class
//! of the normal bundle on it, and the classes cut on it by the other two
//! boundary divisors.
//!
//! Ambient divisor classes are integer vectors in a per-family Picard basis:
//! `[H]` for the projective space, `[H, M]` for the bundles over a curve or
//! the plane, `[H, M_s, M_f]` for the bundles over a Hirzebruch surface
//! (`H` the tautological divisor, `M_*` pullbacks).

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::pic_surfaces::{DivisorClass, SurfaceGeometry};

/// Discriminant of the component families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CaseTag {
    /// Projective 3-space.
    F,
    /// `P(O(-1) + O)` over the plane; same data as `C2_1` with `a = 1`.
    E2,
    /// A `P2`-bundle over a rational curve.
    D3,
    /// A `P1`-bundle over the plane.
    C2_1,
    /// A `P1`-bundle over a Hirzebruch surface.
    C2_2,
}

impl CaseTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            CaseTag::F => "F",
            CaseTag::E2 => "E2",
            CaseTag::D3 => "D3",
            CaseTag::C2_1 => "C2_1",
            CaseTag::C2_2 => "C2_2",
        }
    }

    pub fn parse(s: &str) -> Option<CaseTag> {
        match s {
            "F" => Some(CaseTag::F),
            "E2" => Some(CaseTag::E2),
            "D3" => Some(CaseTag::D3),
            "C2_1" => Some(CaseTag::C2_1),
            "C2_2" => Some(CaseTag::C2_2),
            _ => None,
        }
    }
}

impl std::fmt::Display for CaseTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Boundary slot of a component, from the component's own labelling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    D12,
    D13,
    D14,
}

impl Slot {
    pub const ALL: [Slot; 3] = [Slot::D12, Slot::D13, Slot::D14];

    pub fn index(&self) -> usize {
        match self {
            Slot::D12 => 0,
            Slot::D13 => 1,
            Slot::D14 => 2,
        }
    }

    pub fn others(&self) -> [Slot; 2] {
        match self {
            Slot::D12 => [Slot::D13, Slot::D14],
            Slot::D13 => [Slot::D12, Slot::D14],
            Slot::D14 => [Slot::D12, Slot::D13],
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Slot::D12 => "D12",
            Slot::D13 => "D13",
            Slot::D14 => "D14",
        }
    }
}

impl std::fmt::Display for Slot {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A member of one of the five component families, with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BundleComponent {
    FanoP3,
    E2,
    D3 { a1: i64, a2: i64 },
    C21 { a: i64 },
    C22 { n: i64, k: i64, m: i64 },
}

impl BundleComponent {
    pub fn case_tag(&self) -> CaseTag {
        match self {
            BundleComponent::FanoP3 => CaseTag::F,
            BundleComponent::E2 => CaseTag::E2,
            BundleComponent::D3 { .. } => CaseTag::D3,
            BundleComponent::C21 { .. } => CaseTag::C2_1,
            BundleComponent::C22 { .. } => CaseTag::C2_2,
        }
    }

    pub fn params(&self) -> Vec<i64> {
        match self {
            BundleComponent::FanoP3 | BundleComponent::E2 => vec![],
            BundleComponent::D3 { a1, a2 } => vec![*a1, *a2],
            BundleComponent::C21 { a } => vec![*a],
            BundleComponent::C22 { n, k, m } => vec![*n, *k, *m],
        }
    }

    /// Whether this component matches a filter tag. `E2` and `C2_1` with
    /// `a = 1` match each other's tags since they carry the same data.
    pub fn matches_tag(&self, tag: CaseTag) -> bool {
        if self.case_tag() == tag {
            return true;
        }
        matches!(
            (self, tag),
            (BundleComponent::E2, CaseTag::C2_1) | (BundleComponent::C21 { a: 1 }, CaseTag::E2)
        )
    }

    pub fn validate_params(&self) -> Result<()> {
        match self {
            BundleComponent::FanoP3 | BundleComponent::E2 => Ok(()),
            BundleComponent::D3 { a1, a2 } => {
                if !(0 <= *a1 && a1 <= a2) {
                    Err(Error::InvalidParams {
                        case: "D3".into(),
                        reason: format!("requires 0 <= a1 <= a2, got a1={a1}, a2={a2}"),
                    })
                } else {
                    Ok(())
                }
            }
            BundleComponent::C21 { a } => {
                if *a < 0 {
                    Err(Error::InvalidParams {
                        case: "C2_1".into(),
                        reason: format!("requires a >= 0, got a={a}"),
                    })
                } else {
                    Ok(())
                }
            }
            BundleComponent::C22 { n, k, m } => {
                if *n < 0 || *k < 0 || *m < 0 {
                    Err(Error::InvalidParams {
                        case: "C2_2".into(),
                        reason: format!("requires n, k, m >= 0, got n={n}, k={k}, m={m}"),
                    })
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Length of the ambient Picard basis (also the Picard rank).
    pub fn ambient_rank(&self) -> usize {
        match self {
            BundleComponent::FanoP3 => 1,
            BundleComponent::E2 | BundleComponent::D3 { .. } | BundleComponent::C21 { .. } => 2,
            BundleComponent::C22 { .. } => 3,
        }
    }

    pub fn describe(&self) -> String {
        let params = self.params();
        if params.is_empty() {
            self.case_tag().as_str().to_string()
        } else {
            let ps: Vec<String> = params.iter().map(|p| p.to_string()).collect();
            format!("{}({})", self.case_tag(), ps.join(","))
        }
    }
}

impl Serialize for BundleComponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            case: &'a str,
            params: Vec<i64>,
        }
        Repr {
            case: self.case_tag().as_str(),
            params: self.params(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BundleComponent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            case: String,
            #[serde(default)]
            params: Vec<i64>,
        }
        let repr = Repr::deserialize(deserializer)?;
        let component = match (repr.case.as_str(), repr.params.as_slice()) {
            ("F", []) => BundleComponent::FanoP3,
            ("E2", []) => BundleComponent::E2,
            ("D3", [a1, a2]) => BundleComponent::D3 { a1: *a1, a2: *a2 },
            ("C2_1", [a]) => BundleComponent::C21 { a: *a },
            ("C2_2", [n, k, m]) => BundleComponent::C22 {
                n: *n,
                k: *k,
                m: *m,
            },
            (case, params) => {
                return Err(D::Error::custom(format!(
                    "case {case} does not take {} parameters",
                    params.len()
                )))
            }
        };
        component.validate_params().map_err(D::Error::custom)?;
        Ok(component)
    }
}

/// One boundary divisor of a component: its ambient class, abstract surface,
/// normal-bundle class, and the classes cut by the other two boundaries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryEntry {
    pub slot: Slot,
    pub ambient_class: Vec<i64>,
    pub surface: SurfaceGeometry,
    pub normal: DivisorClass,
    pub restrictions: Vec<(Slot, DivisorClass)>,
}

impl BoundaryEntry {
    pub fn restriction(&self, slot: Slot) -> Option<&DivisorClass> {
        self.restrictions
            .iter()
            .find(|(s, _)| *s == slot)
            .map(|(_, c)| c)
    }

    /// Sum of the two restriction classes.
    pub fn restriction_sum(&self) -> DivisorClass {
        let mut acc = DivisorClass::zero(self.surface);
        for (_, c) in &self.restrictions {
            acc = acc
                .add(c)
                .expect("restriction classes live on the slot surface");
        }
        acc
    }
}

fn hirzebruch_normalized(n: i64) -> SurfaceGeometry {
    SurfaceGeometry::Hirzebruch(u32::try_from(n).expect("validated nonnegative")).normalized()
}

/// The three boundary entries of a component, with surfaces normalized.
pub fn boundary_table(component: &BundleComponent) -> Result<Vec<BoundaryEntry>> {
    component.validate_params()?;
    use SurfaceGeometry::ProjectivePlane as P2;
    let table = match *component {
        BundleComponent::FanoP3 => {
            // three hyperplanes; each pair of them cuts a line on the third
            Slot::ALL
                .iter()
                .map(|&slot| BoundaryEntry {
                    slot,
                    ambient_class: vec![1],
                    surface: P2,
                    normal: P2.cls(&[1]),
                    restrictions: slot.others().iter().map(|&o| (o, P2.cls(&[1]))).collect(),
                })
                .collect()
        }
        BundleComponent::E2 => return boundary_table(&BundleComponent::C21 { a: 1 }),
        BundleComponent::D3 { a1, a2 } => {
            let fa1 = hirzebruch_normalized(a1);
            let fa2 = hirzebruch_normalized(a2);
            vec![
                BoundaryEntry {
                    slot: Slot::D12,
                    ambient_class: vec![1, -a1],
                    surface: fa2,
                    normal: fa2.cls(&[1, a2 - a1]),
                    restrictions: vec![
                        (Slot::D13, fa2.cls(&[1, 0])),
                        (Slot::D14, fa2.cls(&[0, 1])),
                    ],
                },
                BoundaryEntry {
                    slot: Slot::D13,
                    ambient_class: vec![1, -a2],
                    surface: fa1,
                    normal: fa1.cls(&[1, a1 - a2]),
                    restrictions: vec![
                        (Slot::D12, fa1.cls(&[1, 0])),
                        (Slot::D14, fa1.cls(&[0, 1])),
                    ],
                },
                BoundaryEntry {
                    slot: Slot::D14,
                    ambient_class: vec![0, 1],
                    surface: P2,
                    normal: DivisorClass::zero(P2),
                    restrictions: vec![(Slot::D12, P2.cls(&[1])), (Slot::D13, P2.cls(&[1]))],
                },
            ]
        }
        BundleComponent::C21 { a } => {
            let fa = hirzebruch_normalized(a);
            vec![
                BoundaryEntry {
                    slot: Slot::D12,
                    ambient_class: vec![1, 0],
                    surface: P2,
                    normal: P2.cls(&[-a]),
                    restrictions: vec![(Slot::D13, P2.cls(&[1])), (Slot::D14, P2.cls(&[1]))],
                },
                BoundaryEntry {
                    slot: Slot::D13,
                    ambient_class: vec![0, 1],
                    surface: fa,
                    normal: fa.cls(&[0, 1]),
                    restrictions: vec![(Slot::D12, fa.cls(&[1, 0])), (Slot::D14, fa.cls(&[0, 1]))],
                },
                BoundaryEntry {
                    slot: Slot::D14,
                    ambient_class: vec![0, 1],
                    surface: fa,
                    normal: fa.cls(&[0, 1]),
                    restrictions: vec![(Slot::D12, fa.cls(&[1, 0])), (Slot::D13, fa.cls(&[0, 1]))],
                },
            ]
        }
        BundleComponent::C22 { n, k, m } => {
            let fn_ = hirzebruch_normalized(n);
            let fk = hirzebruch_normalized(k);
            let fm = hirzebruch_normalized(m);
            vec![
                // the tautological section, isomorphic to the base
                BoundaryEntry {
                    slot: Slot::D12,
                    ambient_class: vec![1, 0, 0],
                    surface: fn_,
                    normal: fn_.cls(&[-k, -(k * n + m)]),
                    restrictions: vec![
                        (Slot::D13, fn_.cls(&[0, 1])),
                        (Slot::D14, fn_.cls(&[1, 0])),
                    ],
                },
                // the preimage of a base fiber
                BoundaryEntry {
                    slot: Slot::D13,
                    ambient_class: vec![0, 0, 1],
                    surface: fk,
                    normal: DivisorClass::zero(fk),
                    restrictions: vec![(Slot::D12, fk.cls(&[1, 0])), (Slot::D14, fk.cls(&[0, 1]))],
                },
                // the preimage of the negative section of the base
                BoundaryEntry {
                    slot: Slot::D14,
                    ambient_class: vec![0, 1, 0],
                    surface: fm,
                    normal: fm.cls(&[0, -n]),
                    restrictions: vec![(Slot::D12, fm.cls(&[1, 0])), (Slot::D13, fm.cls(&[0, 1]))],
                },
            ]
        }
    };
    Ok(table)
}

/// Looks up one slot of the boundary table.
pub fn boundary_entry(component: &BundleComponent, slot: Slot) -> Result<BoundaryEntry> {
    let table = boundary_table(component)?;
    table
        .into_iter()
        .find(|e| e.slot == slot)
        .ok_or_else(|| Error::InvalidSlot {
            case: component.case_tag().as_str().into(),
            slot: slot.as_str().into(),
        })
}

/// The class that d-semistability forces for the inverse normal bundle of
/// the locus inside the neighboring component: `normal + sum of the two
/// restriction classes` on the slot surface. The neighbor's own normal class
/// must be the negative of this.
pub fn dss_partner_class(component: &BundleComponent, slot: Slot) -> Result<DivisorClass> {
    let entry = boundary_entry(component, slot)?;
    entry.normal.add(&entry.restriction_sum())
}

/// Picard rank and boundary-surface multiset of a component.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentInvariants {
    pub picard_rank: u32,
    pub boundary_surfaces: Vec<SurfaceGeometry>,
}

pub fn component_invariants(component: &BundleComponent) -> Result<ComponentInvariants> {
    let mut boundary_surfaces: Vec<SurfaceGeometry> = boundary_table(component)?
        .iter()
        .map(|e| e.surface)
        .collect();
    boundary_surfaces.sort_by_key(|s| s.order_key());
    Ok(ComponentInvariants {
        picard_rank: component.ambient_rank() as u32,
        boundary_surfaces,
    })
}
