//! Exhaustive d-semistability search over four-component three-dimensional
//! fibers, and the flag blow-up fibers realizing a simplex of every
//! admissible dimension.
//!
//! A candidate fiber is a 4-tuple of [`BundleComponent`]s, an assignment of
//! each component's three boundary slots to its three neighbors, and one
//! identification per double surface drawn from the finite isometry list.
//! A tuple survives when all six double surfaces match abstractly and the
//! d-semistability equation holds on each of them, read from either side.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fano3_bundles::{boundary_entry, BoundaryEntry, BundleComponent, CaseTag, Slot};
use crate::pic_surfaces::{LatticeAut, SurfaceGeometry, SurfacePair};
use crate::snc_fiber::{
    canonical_form, canonicalize, check_d_semistability_surface, Component, ComponentPayload,
    DoubleLocus, FiberComplex, Identification, LocusSide, TripleLocus,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Max3SearchConfig {
    /// Cap on every case parameter (`a`, `a1`, `a2`, `n`, `k`, `m`).
    pub param_bound: i64,
    /// Restrict the enumerated component families.
    pub case_filter: Option<BTreeSet<CaseTag>>,
    /// Keep only tuples containing a `C2_2` component with this base index.
    pub require_c2_2_base: Option<i64>,
}

impl Max3SearchConfig {
    pub fn new(param_bound: i64) -> Self {
        assert!(param_bound >= 1, "param_bound must be at least 1");
        Max3SearchConfig {
            param_bound,
            case_filter: None,
            require_c2_2_base: None,
        }
    }
}

/// Per-locus pass record of a solution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LocusCertificate {
    pub locus: String,
    pub surface: SurfaceGeometry,
    pub identification: Identification,
    pub pass: bool,
}

/// A surviving four-component fiber with its certificate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MaxSolution {
    pub components: Vec<BundleComponent>,
    pub fiber: FiberComplex,
    pub certificate: Vec<LocusCertificate>,
}

fn enumerate_components(cfg: &Max3SearchConfig) -> Vec<BundleComponent> {
    let b = cfg.param_bound;
    let mut out = vec![BundleComponent::FanoP3];
    for a1 in 0..=b {
        for a2 in a1..=b {
            out.push(BundleComponent::D3 { a1, a2 });
        }
    }
    for a in 0..=b {
        out.push(BundleComponent::C21 { a });
    }
    for n in 0..=b {
        for k in 0..=b {
            for m in 0..=b {
                out.push(BundleComponent::C22 { n, k, m });
            }
        }
    }
    if let Some(filter) = &cfg.case_filter {
        out.retain(|c| filter.iter().any(|tag| c.matches_tag(*tag)));
    }
    out
}

fn ident_of(aut: LatticeAut) -> Identification {
    match aut {
        LatticeAut::Identity => Identification::Id,
        LatticeAut::SwapFactors => Identification::Swap,
    }
}

/// Full locus check between two slotted components: the abstract surfaces
/// must agree and some identification must satisfy the d-semistability
/// equation read from both sides. Returns the first passing identification.
fn locus_identification(ea: &BoundaryEntry, eb: &BoundaryEntry) -> Option<Identification> {
    if ea.surface != eb.surface {
        return None;
    }
    let rest_a = ea.restriction_sum();
    let rest_b = eb.restriction_sum();
    for aut in ea.surface.automorphisms() {
        let fwd = ea
            .normal
            .add(&eb.normal.apply(*aut))
            .and_then(|s| s.add(&rest_a))
            .expect("classes share the locus surface");
        let bwd = eb
            .normal
            .add(&ea.normal.apply(aut.inverse()))
            .and_then(|s| s.add(&rest_b))
            .expect("classes share the locus surface");
        if fwd.is_zero() && bwd.is_zero() {
            return Some(ident_of(*aut));
        }
    }
    None
}

/// The six loci of a four-component fiber: component indices, the slot each
/// side occupies, and the chosen identification.
struct Gluing {
    loci: Vec<(usize, Slot, usize, Slot, Identification)>,
}

fn assemble_fiber(components: &[BundleComponent; 4], gluing: &Gluing) -> FiberComplex {
    let entry = |c: usize, s: Slot| boundary_entry(&components[c], s).expect("validated params");
    FiberComplex {
        fiber_dim: 3,
        components: components
            .iter()
            .enumerate()
            .map(|(i, c)| Component {
                id: format!("F{}", i + 1),
                payload: ComponentPayload::Threefold(*c),
            })
            .collect(),
        double_loci: gluing
            .loci
            .iter()
            .map(|&(i, si, j, sj, ident)| {
                let ea = entry(i, si);
                let eb = entry(j, sj);
                DoubleLocus {
                    id: format!("D{}{}", i + 1, j + 1),
                    a: LocusSide {
                        component: format!("F{}", i + 1),
                        class: ea.ambient_class.clone(),
                    },
                    b: LocusSide {
                        component: format!("F{}", j + 1),
                        class: eb.ambient_class.clone(),
                    },
                    triple_points: None,
                    normal_a: Some(ea.normal.coeffs().to_vec()),
                    normal_b: Some(eb.normal.coeffs().to_vec()),
                    identification: Some(ident),
                }
            })
            .collect(),
        triple_loci: [[1, 2, 3], [1, 2, 4], [1, 3, 4], [2, 3, 4]]
            .iter()
            .map(|t| TripleLocus {
                components: t.iter().map(|i| format!("F{i}")).collect(),
            })
            .collect(),
        quadruple_points: 1,
    }
}

fn solution_from_fiber(fiber: FiberComplex) -> MaxSolution {
    let components: Vec<BundleComponent> = fiber
        .components
        .iter()
        .map(|c| *c.payload.bundle().expect("threefold payload"))
        .collect();
    let certificate = fiber
        .double_loci
        .iter()
        .map(|d| {
            let entry = fiber
                .component(&d.a.component)
                .and_then(|c| c.payload.bundle())
                .map(|b| boundary_entry(b, slot_by_ambient(b, &d.a.class)).expect("valid slot"))
                .expect("threefold payload");
            LocusCertificate {
                locus: d.id.clone(),
                surface: entry.surface,
                identification: d.identification.unwrap_or(Identification::Id),
                pass: check_d_semistability_surface(&fiber, d).unwrap_or(false),
            }
        })
        .collect();
    MaxSolution {
        components,
        fiber,
        certificate,
    }
}

fn slot_by_ambient(bundle: &BundleComponent, ambient: &[i64]) -> Slot {
    crate::fano3_bundles::boundary_table(bundle)
        .expect("validated params")
        .into_iter()
        .find(|e| e.ambient_class == ambient)
        .map(|e| e.slot)
        .expect("ambient class names a slot")
}

/// Enumerates four-component fibers within the parameter bound and keeps
/// those passing abstract surface matching and d-semistability on all six
/// double surfaces. Deduplicates up to component permutation and
/// identification equivalence; output order is canonical.
pub fn search_maximal(cfg: &Max3SearchConfig) -> Vec<MaxSolution> {
    let components = enumerate_components(cfg);

    // index every (component, slot) by its abstract surface and the orbit of
    // its normal class under the surface isometries
    type NormalIndex = BTreeMap<(SurfaceGeometry, Vec<i64>), Vec<(usize, Slot)>>;
    let mut by_normal: NormalIndex = BTreeMap::new();
    let mut entries: Vec<[BoundaryEntry; 3]> = Vec::with_capacity(components.len());
    for (idx, c) in components.iter().enumerate() {
        let table = crate::fano3_bundles::boundary_table(c).expect("validated params");
        let arr: [BoundaryEntry; 3] = [table[0].clone(), table[1].clone(), table[2].clone()];
        for e in &arr {
            by_normal
                .entry((e.surface, e.normal.orbit_key()))
                .or_default()
                .push((idx, e.slot));
        }
        entries.push(arr);
    }
    let entry = |c: usize, s: Slot| -> &BoundaryEntry { &entries[c][s.index()] };

    let found: Vec<(String, FiberComplex)> = (0..components.len())
        .into_par_iter()
        .flat_map_iter(|i1| {
            let mut local: Vec<(String, FiberComplex)> = Vec::new();
            // component 1 faces its neighbors in slot order; the relabeling
            // freedom of the other three components is spent here and
            // restored by the final canonicalization
            let mut candidate_lists: Vec<Vec<(usize, Slot, Identification)>> = Vec::new();
            for slot in Slot::ALL {
                let e1 = entry(i1, slot);
                let partner = e1
                    .normal
                    .add(&e1.restriction_sum())
                    .expect("classes share the slot surface")
                    .neg();
                let key = (e1.surface, partner.orbit_key());
                let mut list = Vec::new();
                for &(j, sj) in by_normal.get(&key).into_iter().flatten() {
                    if let Some(ident) = locus_identification(e1, entry(j, sj)) {
                        list.push((j, sj, ident));
                    }
                }
                candidate_lists.push(list);
            }
            for &(i2, q2, id12) in &candidate_lists[0] {
                for &(i3, q3, id13) in &candidate_lists[1] {
                    for &(i4, q4, id14) in &candidate_lists[2] {
                        let tuple = [
                            components[i1],
                            components[i2],
                            components[i3],
                            components[i4],
                        ];
                        if let Some(base) = cfg.require_c2_2_base {
                            let has = tuple
                                .iter()
                                .any(|c| matches!(c, BundleComponent::C22 { n, .. } if *n == base));
                            if !has {
                                continue;
                            }
                        }
                        let r2 = q2.others();
                        let r3 = q3.others();
                        let r4 = q4.others();
                        for mask in 0..8u8 {
                            let (s23, s24) = if mask & 1 == 0 {
                                (r2[0], r2[1])
                            } else {
                                (r2[1], r2[0])
                            };
                            let (s32, s34) = if mask & 2 == 0 {
                                (r3[0], r3[1])
                            } else {
                                (r3[1], r3[0])
                            };
                            let (s42, s43) = if mask & 4 == 0 {
                                (r4[0], r4[1])
                            } else {
                                (r4[1], r4[0])
                            };
                            let inner =
                                [(i2, s23, i3, s32), (i2, s24, i4, s42), (i3, s34, i4, s43)];
                            let mut idents = Vec::with_capacity(3);
                            let mut ok = true;
                            for &(a, sa, b, sb) in &inner {
                                match locus_identification(entry(a, sa), entry(b, sb)) {
                                    Some(ident) => idents.push(ident),
                                    None => {
                                        ok = false;
                                        break;
                                    }
                                }
                            }
                            if !ok {
                                continue;
                            }
                            let gluing = Gluing {
                                loci: vec![
                                    (0, Slot::D12, 1, q2, id12),
                                    (0, Slot::D13, 2, q3, id13),
                                    (0, Slot::D14, 3, q4, id14),
                                    (1, s23, 2, s32, idents[0]),
                                    (1, s24, 3, s42, idents[1]),
                                    (2, s34, 3, s43, idents[2]),
                                ],
                            };
                            let fiber = canonicalize(&assemble_fiber(&tuple, &gluing));
                            local.push((canonical_form(&fiber), fiber));
                        }
                    }
                }
            }
            local
        })
        .collect();

    let mut deduped: BTreeMap<String, FiberComplex> = BTreeMap::new();
    for (key, fiber) in found {
        deduped.entry(key).or_insert(fiber);
    }
    deduped.into_values().map(solution_from_fiber).collect()
}

fn surface_pair(surface: SurfaceGeometry, boundary: &[(&str, &[i64])]) -> SurfacePair {
    SurfacePair::new(
        surface,
        boundary
            .iter()
            .map(|(label, coeffs)| (*label, surface.cls(coeffs)))
            .collect(),
    )
}

fn curve_component(id: &str) -> Component {
    Component {
        id: id.into(),
        payload: ComponentPayload::rational_curve(),
    }
}

fn combinatorial_component(id: &str, label: &str) -> Component {
    Component {
        id: id.into(),
        payload: ComponentPayload::Combinatorial {
            combinatorial: label.into(),
        },
    }
}

fn complete_strata(ids: &[&str]) -> (Vec<DoubleLocus>, Vec<TripleLocus>) {
    let mut loci = Vec::new();
    for i in 0..ids.len() {
        for j in i + 1..ids.len() {
            loci.push(DoubleLocus {
                id: format!("D{}{}", i + 1, j + 1),
                a: LocusSide {
                    component: ids[i].into(),
                    class: vec![],
                },
                b: LocusSide {
                    component: ids[j].into(),
                    class: vec![],
                },
                triple_points: None,
                normal_a: None,
                normal_b: None,
                identification: None,
            });
        }
    }
    let mut triples = Vec::new();
    for i in 0..ids.len() {
        for j in i + 1..ids.len() {
            for k in j + 1..ids.len() {
                triples.push(TripleLocus {
                    components: vec![ids[i].into(), ids[j].into(), ids[k].into()],
                });
            }
        }
    }
    (loci, triples)
}

/// The special fiber of the flag blow-up construction: blowing up the flag
/// `pt in line in ... ` of length `k` in one fiber of a trivial family of
/// `dim`-dimensional projective spaces yields `k + 1` components whose dual
/// complex is the `k`-simplex.
///
/// Geometric payloads are attached for `dim <= 2` and for the maximal case
/// `k = dim`; the intermediate three-dimensional fibers are structure-only.
pub fn flag_degeneration(dim: u8, k: u8) -> Result<FiberComplex> {
    if !(1..=3).contains(&dim) || k > dim {
        return Err(Error::FlagOutOfRange { dim, k });
    }
    use SurfaceGeometry::*;
    let fiber = match (dim, k) {
        (1, 0) => FiberComplex {
            fiber_dim: 1,
            components: vec![curve_component("F1")],
            double_loci: vec![],
            triple_loci: vec![],
            quadruple_points: 0,
        },
        (1, 1) => FiberComplex {
            fiber_dim: 1,
            components: vec![curve_component("F1"), curve_component("F2")],
            double_loci: vec![DoubleLocus {
                id: "D12".into(),
                a: LocusSide {
                    component: "F1".into(),
                    class: vec![1],
                },
                b: LocusSide {
                    component: "F2".into(),
                    class: vec![1],
                },
                triple_points: None,
                normal_a: None,
                normal_b: None,
                identification: None,
            }],
            triple_loci: vec![],
            quadruple_points: 0,
        },
        (2, 0) => FiberComplex {
            fiber_dim: 2,
            components: vec![Component {
                id: "F1".into(),
                payload: ComponentPayload::Surface(surface_pair(ProjectivePlane, &[])),
            }],
            double_loci: vec![],
            triple_loci: vec![],
            quadruple_points: 0,
        },
        (2, 1) => {
            // one blown point: the plane glues to the exceptional component
            // along a line on one side and the (-1)-section on the other
            let p1 = surface_pair(Hirzebruch(1), &[("s", &[1, 0])]);
            let p2 = surface_pair(ProjectivePlane, &[("l", &[1])]);
            FiberComplex {
                fiber_dim: 2,
                components: vec![
                    Component {
                        id: "F1".into(),
                        payload: ComponentPayload::Surface(p1),
                    },
                    Component {
                        id: "F2".into(),
                        payload: ComponentPayload::Surface(p2),
                    },
                ],
                double_loci: vec![DoubleLocus {
                    id: "D12".into(),
                    a: LocusSide {
                        component: "F1".into(),
                        class: vec![1, 0],
                    },
                    b: LocusSide {
                        component: "F2".into(),
                        class: vec![1],
                    },
                    triple_points: Some(0),
                    normal_a: None,
                    normal_b: None,
                    identification: None,
                }],
                triple_loci: vec![],
                quadruple_points: 0,
            }
        }
        (2, 2) => {
            // point and line blown: a triangle of F1 components, each
            // bounded by a section and a fiber, with one shared triple point
            let p = surface_pair(Hirzebruch(1), &[("s", &[1, 0]), ("f", &[0, 1])]);
            let locus = |id: &str, a: &str, ca: [i64; 2], b: &str, cb: [i64; 2]| DoubleLocus {
                id: id.into(),
                a: LocusSide {
                    component: a.into(),
                    class: ca.to_vec(),
                },
                b: LocusSide {
                    component: b.into(),
                    class: cb.to_vec(),
                },
                triple_points: Some(1),
                normal_a: None,
                normal_b: None,
                identification: None,
            };
            FiberComplex {
                fiber_dim: 2,
                components: ["F1", "F2", "F3"]
                    .iter()
                    .map(|id| Component {
                        id: (*id).into(),
                        payload: ComponentPayload::Surface(p.clone()),
                    })
                    .collect(),
                double_loci: vec![
                    locus("D12", "F1", [1, 0], "F2", [0, 1]),
                    locus("D13", "F1", [0, 1], "F3", [1, 0]),
                    locus("D23", "F2", [1, 0], "F3", [0, 1]),
                ],
                triple_loci: vec![TripleLocus {
                    components: vec!["F1".into(), "F2".into(), "F3".into()],
                }],
                quadruple_points: 0,
            }
        }
        (3, kk) if kk < 3 => {
            let labels = ["X0", "E1", "E2"];
            let ids: Vec<String> = (0..=kk).map(|i| format!("F{}", i + 1)).collect();
            let id_refs: Vec<&str> = ids.iter().map(|s| s.as_str()).collect();
            let (loci, triples) = complete_strata(&id_refs);
            FiberComplex {
                fiber_dim: 3,
                components: ids
                    .iter()
                    .zip(labels)
                    .map(|(id, label)| combinatorial_component(id, label))
                    .collect(),
                double_loci: loci,
                triple_loci: triples,
                quadruple_points: 0,
            }
        }
        (3, 3) => maximal_flag_fiber(),
        _ => unreachable!("range checked above"),
    };
    Ok(fiber)
}

/// The maximal three-dimensional flag fiber: four copies of the
/// `C2_2(1,1,0)` component. Tautological sections glue to fiber-preimages
/// around a four-cycle and the two section-preimage quadrics glue to each
/// other across it.
fn maximal_flag_fiber() -> FiberComplex {
    let c = BundleComponent::C22 { n: 1, k: 1, m: 0 };
    let components = [c, c, c, c];
    // H of F1 meets M_f of F3, H of F3 meets M_f of F2, H of F2 meets M_f of
    // F4, H of F4 meets M_f of F1; M_s surfaces pair up as F1-F2 and F3-F4
    let gluing = Gluing {
        loci: vec![
            (0, Slot::D14, 1, Slot::D14, Identification::Swap),
            (0, Slot::D12, 2, Slot::D13, Identification::Id),
            (0, Slot::D13, 3, Slot::D12, Identification::Id),
            (1, Slot::D13, 2, Slot::D12, Identification::Id),
            (1, Slot::D12, 3, Slot::D13, Identification::Id),
            (2, Slot::D14, 3, Slot::D14, Identification::Swap),
        ],
    };
    canonicalize(&assemble_fiber(&components, &gluing))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fano3_bundles::component_invariants;
    use crate::snc_fiber::{build_dual_complex, validate_fiber};

    #[test]
    fn unique_solution_at_small_bound() {
        let solutions = search_maximal(&Max3SearchConfig::new(2));
        assert_eq!(solutions.len(), 1);
        let sol = &solutions[0];
        for c in &sol.components {
            assert_eq!(*c, BundleComponent::C22 { n: 1, k: 1, m: 0 });
        }
        assert!(sol.certificate.iter().all(|c| c.pass));
        let dc = build_dual_complex(&sol.fiber).unwrap();
        assert_eq!(dc.is_simplex(), Some(3));
    }

    #[test]
    fn solution_double_surfaces() {
        let solutions = search_maximal(&Max3SearchConfig::new(2));
        let mut surfaces: Vec<SurfaceGeometry> =
            solutions[0].certificate.iter().map(|c| c.surface).collect();
        surfaces.sort_by_key(|s| s.order_key());
        assert_eq!(
            surfaces,
            vec![
                SurfaceGeometry::Hirzebruch(1),
                SurfaceGeometry::Hirzebruch(1),
                SurfaceGeometry::Hirzebruch(1),
                SurfaceGeometry::Hirzebruch(1),
                SurfaceGeometry::Quadric,
                SurfaceGeometry::Quadric,
            ]
        );
    }

    #[test]
    fn excluded_families_find_nothing() {
        let mut cfg = Max3SearchConfig::new(3);
        cfg.case_filter = Some([CaseTag::F].into());
        assert!(search_maximal(&cfg).is_empty());

        let mut cfg = Max3SearchConfig::new(3);
        cfg.case_filter = Some([CaseTag::D3, CaseTag::C2_1].into());
        assert!(search_maximal(&cfg).is_empty());

        let mut cfg = Max3SearchConfig::new(3);
        cfg.case_filter = Some([CaseTag::C2_2].into());
        cfg.require_c2_2_base = Some(0);
        assert!(search_maximal(&cfg).is_empty());
    }

    #[test]
    fn mixed_f_tuple_fails_on_the_induced_locus() {
        // the partner forced by a projective-space component: three copies
        // of C2_1(3); their mutual F3 loci violate d-semistability
        let tuple = [
            BundleComponent::FanoP3,
            BundleComponent::C21 { a: 3 },
            BundleComponent::C21 { a: 3 },
            BundleComponent::C21 { a: 3 },
        ];
        let e_f = boundary_entry(&tuple[0], Slot::D12).unwrap();
        let e_plane = boundary_entry(&tuple[1], Slot::D12).unwrap();
        assert_eq!(
            locus_identification(&e_f, &e_plane),
            Some(Identification::Id)
        );
        let e_13 = boundary_entry(&tuple[1], Slot::D13).unwrap();
        let e_14 = boundary_entry(&tuple[2], Slot::D14).unwrap();
        assert_eq!(e_13.surface, SurfaceGeometry::Hirzebruch(3));
        assert_eq!(locus_identification(&e_13, &e_14), None);
    }

    #[test]
    fn flag_fibers_are_simplices() {
        for dim in 1..=3u8 {
            for k in 0..=dim {
                let fiber = flag_degeneration(dim, k).unwrap();
                let report = validate_fiber(&fiber);
                assert!(report.is_valid(), "({dim},{k}): {report}");
                let dc = build_dual_complex(&fiber).unwrap();
                assert_eq!(dc.is_simplex(), Some(k as usize), "({dim},{k})");
                for m in 0..=k as usize {
                    let expected = binomial_usize(k as usize + 1, m + 1);
                    assert_eq!(dc.face_count(m), expected, "({dim},{k}) faces of dim {m}");
                }
            }
        }
        assert!(flag_degeneration(4, 1).is_err());
        assert!(flag_degeneration(2, 3).is_err());
    }

    fn binomial_usize(n: usize, k: usize) -> usize {
        if k > n {
            return 0;
        }
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn maximal_flag_fiber_matches_search() {
        let flag = flag_degeneration(3, 3).unwrap();
        let solutions = search_maximal(&Max3SearchConfig::new(2));
        assert_eq!(canonical_form(&flag), canonical_form(&solutions[0].fiber));
        for c in flag.components {
            let bundle = c.payload.bundle().unwrap();
            let inv = component_invariants(bundle).unwrap();
            assert_eq!(inv.picard_rank, 3);
        }
    }

    #[test]
    fn flag_fibers_match_the_surface_classification() {
        let flag = flag_degeneration(2, 2).unwrap();
        let table = crate::dp2_classify::reference_fibers();
        assert_eq!(canonical_form(&flag), canonical_form(&table[5]));
        let flag21 = flag_degeneration(2, 1).unwrap();
        assert_eq!(canonical_form(&flag21), canonical_form(&table[0]));
    }
}
