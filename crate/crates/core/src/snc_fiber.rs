//! The combinatorial model of a degenerate snc fiber together with its
//! verifiers: structural validation, the dual complex and simplex test, the
//! triple-point formula in fiber dimension two, and the d-semistability check
//! on the double surfaces of a three-dimensional fiber.
//!
//! A [`FiberComplex`] is plain data and can always be constructed or parsed;
//! [`validate_fiber`] reports every violated invariant instead of aborting,
//! and the checks below are pure functions of the stored data.

use std::collections::{BTreeMap, BTreeSet};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fano3_bundles::{boundary_table, BoundaryEntry, BundleComponent, Slot};
use crate::pic_surfaces::{DivisorClass, LatticeAut, SurfaceGeometry, SurfacePair};

/// Geometric payload of one fiber component.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComponentPayload {
    /// A threefold from the parameterized component families (fiber_dim 3).
    Threefold(BundleComponent),
    /// A surface with its snc boundary (fiber_dim 2).
    Surface(SurfacePair),
    /// Structure-only component; carries just a display label.
    Combinatorial { combinatorial: String },
    /// A smooth rational curve (fiber_dim 1).
    RationalCurve(RationalCurveTag),
}

/// Marker serialized as the string `"rational_curve"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RationalCurveTag;

impl Serialize for RationalCurveTag {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str("rational_curve")
    }
}

impl<'de> Deserialize<'de> for RationalCurveTag {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        if s == "rational_curve" {
            Ok(RationalCurveTag)
        } else {
            Err(D::Error::custom(format!("unknown payload string `{s}`")))
        }
    }
}

impl ComponentPayload {
    pub fn rational_curve() -> Self {
        ComponentPayload::RationalCurve(RationalCurveTag)
    }

    pub fn surface_pair(&self) -> Option<&SurfacePair> {
        match self {
            ComponentPayload::Surface(p) => Some(p),
            _ => None,
        }
    }

    pub fn bundle(&self) -> Option<&BundleComponent> {
        match self {
            ComponentPayload::Threefold(b) => Some(b),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub id: String,
    pub payload: ComponentPayload,
}

/// One side of a double locus: the component it lies in and its class there.
///
/// For a surface component the class is a divisor class in the surface
/// basis; for a threefold component it is the ambient class of the boundary
/// divisor in the threefold basis; for a rational curve it is `[1]` (one
/// reduced point); structure-only components leave it empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocusSide {
    pub component: String,
    pub class: Vec<i64>,
}

/// Identification of the two abstract descriptions of a double surface,
/// drawn from the finite isometry list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Identification {
    Id,
    Swap,
}

impl Identification {
    pub fn as_aut(&self) -> LatticeAut {
        match self {
            Identification::Id => LatticeAut::Identity,
            Identification::Swap => LatticeAut::SwapFactors,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Identification::Id => "id",
            Identification::Swap => "swap",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DoubleLocus {
    pub id: String,
    pub a: LocusSide,
    pub b: LocusSide,
    /// Number of triple points of the fiber along this curve (fiber_dim 2).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub triple_points: Option<u32>,
    /// Normal-bundle class of the locus surface inside component `a`
    /// (fiber_dim 3).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normal_a: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normal_b: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identification: Option<Identification>,
}

impl DoubleLocus {
    pub fn pair(&self) -> (String, String) {
        (self.a.component.clone(), self.b.component.clone())
    }

    /// The side lying in `id`, then the opposite side.
    pub fn side_of(&self, id: &str) -> Option<(&LocusSide, &LocusSide)> {
        if self.a.component == id {
            Some((&self.a, &self.b))
        } else if self.b.component == id {
            Some((&self.b, &self.a))
        } else {
            None
        }
    }

    pub fn touches(&self, id: &str) -> bool {
        self.a.component == id || self.b.component == id
    }
}

/// One irreducible stratum where three components meet: a point in fiber
/// dimension two, a curve in dimension three.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripleLocus {
    pub components: Vec<String>,
}

impl TripleLocus {
    pub fn contains(&self, id: &str) -> bool {
        self.components.iter().any(|c| c == id)
    }
}

fn is_zero_u32(v: &u32) -> bool {
    *v == 0
}

/// The combinatorial special fiber.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiberComplex {
    pub fiber_dim: u8,
    pub components: Vec<Component>,
    pub double_loci: Vec<DoubleLocus>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub triple_loci: Vec<TripleLocus>,
    #[serde(default, skip_serializing_if = "is_zero_u32")]
    pub quadruple_points: u32,
}

impl FiberComplex {
    pub fn component(&self, id: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.id == id)
    }

    pub fn locus_between(&self, a: &str, b: &str) -> Option<&DoubleLocus> {
        self.double_loci.iter().find(|d| {
            (d.a.component == a && d.b.component == b) || (d.a.component == b && d.b.component == a)
        })
    }

    /// Number of triple loci containing both given components.
    pub fn incident_triple_count(&self, a: &str, b: &str) -> usize {
        self.triple_loci
            .iter()
            .filter(|t| t.contains(a) && t.contains(b))
            .count()
    }
}

/// Accumulated invariant violations. Validation never aborts; it reports.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, v: String) {
        self.violations.push(v);
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.violations.is_empty() {
            write!(f, "valid")
        } else {
            write!(f, "{}", self.violations.join("\n"))
        }
    }
}

fn payload_kind(p: &ComponentPayload) -> &'static str {
    match p {
        ComponentPayload::Threefold(_) => "threefold",
        ComponentPayload::Surface(_) => "surface",
        ComponentPayload::Combinatorial { .. } => "combinatorial",
        ComponentPayload::RationalCurve(_) => "rational curve",
    }
}

/// Checks every structural invariant of a fiber and lists the violations.
pub fn validate_fiber(fiber: &FiberComplex) -> ValidationReport {
    let mut report = ValidationReport::default();

    if !(1..=3).contains(&fiber.fiber_dim) {
        report.push(format!(
            "fiber_dim must be 1, 2 or 3, got {}",
            fiber.fiber_dim
        ));
        return report;
    }
    if fiber.components.is_empty() {
        report.push("fiber has no components".into());
        return report;
    }
    // a reducible one-dimensional fiber is a chain of two rational curves
    if fiber.fiber_dim == 1 && fiber.components.len() > 2 {
        report.push(format!(
            "a dimension-1 fiber has at most two components, got {}",
            fiber.components.len()
        ));
    }

    let mut ids = BTreeSet::new();
    for c in &fiber.components {
        if c.id.is_empty() {
            report.push("component with empty id".into());
        }
        if !ids.insert(c.id.clone()) {
            report.push(format!("duplicate component id `{}`", c.id));
        }
        match (&c.payload, fiber.fiber_dim) {
            (ComponentPayload::RationalCurve(_), 1)
            | (ComponentPayload::Surface(_), 2)
            | (ComponentPayload::Threefold(_), 3)
            | (ComponentPayload::Combinatorial { .. }, _) => {}
            (p, d) => report.push(format!(
                "component `{}` has a {} payload in a dimension-{d} fiber",
                c.id,
                payload_kind(p)
            )),
        }
        match &c.payload {
            ComponentPayload::Surface(pair) => match crate::pic_surfaces::is_log_fano_pair(pair) {
                Ok(true) => {}
                Ok(false) => report.push(format!(
                    "component `{}` payload {} fails the log positivity test",
                    c.id,
                    pair.describe()
                )),
                Err(e) => report.push(format!("component `{}` payload invalid: {e}", c.id)),
            },
            ComponentPayload::Threefold(b) => {
                if let Err(e) = b.validate_params() {
                    report.push(format!("component `{}` payload invalid: {e}", c.id));
                }
            }
            _ => {}
        }
    }

    let mut locus_ids = BTreeSet::new();
    let mut seen_pairs: BTreeMap<(String, String), usize> = BTreeMap::new();
    for d in &fiber.double_loci {
        if !locus_ids.insert(d.id.clone()) {
            report.push(format!("duplicate double locus id `{}`", d.id));
        }
        for side in [&d.a, &d.b] {
            if fiber.component(&side.component).is_none() {
                report.push(format!(
                    "double locus `{}` refers to unknown component `{}`",
                    d.id, side.component
                ));
            }
        }
        if d.a.component == d.b.component {
            report.push(format!(
                "double locus `{}` has both sides on component `{}`",
                d.id, d.a.component
            ));
            continue;
        }
        let key = if d.a.component < d.b.component {
            (d.a.component.clone(), d.b.component.clone())
        } else {
            (d.b.component.clone(), d.a.component.clone())
        };
        *seen_pairs.entry(key).or_insert(0) += 1;
    }
    for ((a, b), count) in &seen_pairs {
        if *count > 1 {
            report.push(format!(
                "components `{a}` and `{b}` meet in {count} double loci; intersections are irreducible"
            ));
        }
    }

    // strong connectedness: every unordered pair of components intersects
    for (i, ci) in fiber.components.iter().enumerate() {
        for cj in fiber.components.iter().skip(i + 1) {
            if fiber.locus_between(&ci.id, &cj.id).is_none() {
                report.push(format!(
                    "components `{}` and `{}` are not strongly connected (no double locus)",
                    ci.id, cj.id
                ));
            }
        }
    }

    // side classes and boundary matching, per payload kind
    for c in &fiber.components {
        let mut side_classes: Vec<Vec<i64>> = Vec::new();
        for d in &fiber.double_loci {
            if let Some((mine, _)) = d.side_of(&c.id) {
                side_classes.push(mine.class.clone());
            }
        }
        match &c.payload {
            ComponentPayload::Surface(pair) => {
                let rank = pair.surface.rank();
                for cls in &side_classes {
                    if cls.len() != rank {
                        report.push(format!(
                            "locus side class {cls:?} on `{}` has wrong arity for {}",
                            c.id, pair.surface
                        ));
                    }
                }
                let mut expected: Vec<Vec<i64>> = pair
                    .boundary
                    .iter()
                    .map(|b| b.class.coeffs().to_vec())
                    .collect();
                expected.sort();
                let mut got = side_classes.clone();
                got.sort();
                if expected != got {
                    report.push(format!(
                        "boundary of `{}` does not match its double loci: boundary {expected:?}, locus sides {got:?}",
                        c.id
                    ));
                }
            }
            ComponentPayload::Threefold(b) => {
                if b.validate_params().is_err() {
                    continue;
                }
                let table = boundary_table(b).expect("params validated");
                let mut expected: Vec<Vec<i64>> =
                    table.iter().map(|e| e.ambient_class.clone()).collect();
                expected.sort();
                let mut got = side_classes.clone();
                got.sort();
                if expected != got {
                    report.push(format!(
                        "boundary slots of `{}` ({}) do not match its double loci: slots {expected:?}, locus sides {got:?}",
                        c.id,
                        b.describe()
                    ));
                }
            }
            ComponentPayload::RationalCurve(_) => {
                for cls in &side_classes {
                    if cls != &vec![1] {
                        report.push(format!(
                            "locus side class {cls:?} on curve `{}` must be [1]",
                            c.id
                        ));
                    }
                }
            }
            ComponentPayload::Combinatorial { .. } => {}
        }
    }

    // three-dimensional loci: the two abstract side surfaces must agree and
    // stored normals must match the component tables
    if fiber.fiber_dim == 3 {
        for d in &fiber.double_loci {
            let entries = (threefold_entry(fiber, &d.a), threefold_entry(fiber, &d.b));
            if let (Ok(Some(ea)), Ok(Some(eb))) = entries {
                if ea.surface != eb.surface {
                    report.push(format!(
                        "double locus `{}` sides describe different surfaces: {} vs {}",
                        d.id, ea.surface, eb.surface
                    ));
                }
                if let Some(na) = &d.normal_a {
                    if na != ea.normal.coeffs() {
                        report.push(format!(
                            "double locus `{}` stored normal_a {na:?} disagrees with the component table {:?}",
                            d.id,
                            ea.normal.coeffs()
                        ));
                    }
                }
                if let Some(nb) = &d.normal_b {
                    if nb != eb.normal.coeffs() {
                        report.push(format!(
                            "double locus `{}` stored normal_b {nb:?} disagrees with the component table {:?}",
                            d.id,
                            eb.normal.coeffs()
                        ));
                    }
                }
                if d.identification == Some(Identification::Swap)
                    && ea.surface.normalized() != SurfaceGeometry::Quadric
                {
                    report.push(format!(
                        "double locus `{}` uses the factor swap on {}, which only exists on P1xP1",
                        d.id, ea.surface
                    ));
                }
            }
        }
    } else {
        for d in &fiber.double_loci {
            if d.normal_a.is_some() || d.normal_b.is_some() || d.identification.is_some() {
                report.push(format!(
                    "double locus `{}` carries threefold data in a dimension-{} fiber",
                    d.id, fiber.fiber_dim
                ));
            }
        }
    }

    // triple loci: three distinct known components lying on pairwise loci
    for t in &fiber.triple_loci {
        if fiber.fiber_dim < 2 {
            report.push("triple loci are not allowed in a dimension-1 fiber".into());
            break;
        }
        if t.components.len() != 3 {
            report.push(format!(
                "triple locus {:?} must list exactly three components",
                t.components
            ));
            continue;
        }
        let set: BTreeSet<&String> = t.components.iter().collect();
        if set.len() != 3 {
            report.push(format!(
                "triple locus {:?} repeats a component",
                t.components
            ));
            continue;
        }
        for id in &t.components {
            if fiber.component(id).is_none() {
                report.push(format!(
                    "triple locus {:?} refers to unknown component `{id}`",
                    t.components
                ));
            }
        }
        let ids: Vec<&String> = t.components.iter().collect();
        for (x, y) in [(0, 1), (0, 2), (1, 2)] {
            if fiber.locus_between(ids[x], ids[y]).is_none() {
                report.push(format!(
                    "triple locus {:?} does not lie on a double locus of `{}` and `{}`",
                    t.components, ids[x], ids[y]
                ));
            }
        }
    }

    // the stored per-curve count and the incidence list are redundant
    // storages of the same triple points and must agree
    if fiber.fiber_dim == 2 {
        for d in &fiber.double_loci {
            let stored = d.triple_points.unwrap_or(0) as usize;
            let incident = fiber.incident_triple_count(&d.a.component, &d.b.component);
            if stored != incident {
                report.push(format!(
                    "triple count mismatch on `{}`: stored {stored}, incident triple loci {incident}",
                    d.id
                ));
            }
        }
    }

    if fiber.quadruple_points > 0 {
        if fiber.fiber_dim != 3 {
            report.push("quadruple points are only allowed in a dimension-3 fiber".into());
        } else if fiber.components.len() != 4 {
            report.push(format!(
                "quadruple points require exactly four components, fiber has {}",
                fiber.components.len()
            ));
        } else if fiber.triple_loci.len() != 4 || {
            let all: BTreeSet<BTreeSet<&String>> = fiber
                .triple_loci
                .iter()
                .map(|t| t.components.iter().collect())
                .collect();
            all.len() != 4
        } {
            report.push(
                "a quadruple point must lie on the four triple curves of its components".into(),
            );
        }
    }

    report
}

/// Resolves a threefold locus side to the component's boundary-table entry,
/// matching the stored ambient class. `Ok(None)` when the component payload
/// carries no table (combinatorial).
fn threefold_entry(fiber: &FiberComplex, side: &LocusSide) -> Result<Option<BoundaryEntry>> {
    let comp = fiber
        .component(&side.component)
        .ok_or_else(|| Error::UnknownComponent {
            id: side.component.clone(),
        })?;
    let bundle = match &comp.payload {
        ComponentPayload::Threefold(b) => b,
        _ => return Ok(None),
    };
    let table = boundary_table(bundle)?;
    table
        .into_iter()
        .find(|e| e.ambient_class == side.class)
        .map(Some)
        .ok_or_else(|| Error::MissingLocusData {
            id: side.component.clone(),
            what: format!(
                "no boundary slot of {} has ambient class {:?}",
                bundle.describe(),
                side.class
            ),
        })
}

/// Assigns each double locus at a threefold component to one of its three
/// boundary slots, matching ambient classes bijectively. Slots sharing an
/// ambient class carry identical data, so the grouping order is immaterial.
fn slot_assignment(fiber: &FiberComplex, comp_id: &str) -> Result<BTreeMap<String, Slot>> {
    let comp = fiber
        .component(comp_id)
        .ok_or_else(|| Error::UnknownComponent { id: comp_id.into() })?;
    let bundle = match &comp.payload {
        ComponentPayload::Threefold(b) => b,
        _ => {
            return Err(Error::MissingLocusData {
                id: comp_id.into(),
                what: "component has no boundary table".into(),
            })
        }
    };
    let table = boundary_table(bundle)?;
    let mut free: Vec<&BoundaryEntry> = table.iter().collect();
    let mut out = BTreeMap::new();
    for d in &fiber.double_loci {
        if let Some((mine, _)) = d.side_of(comp_id) {
            let pos = free
                .iter()
                .position(|e| e.ambient_class == mine.class)
                .ok_or_else(|| Error::MissingLocusData {
                    id: d.id.clone(),
                    what: format!(
                        "side class {:?} matches no remaining slot of {}",
                        mine.class,
                        bundle.describe()
                    ),
                })?;
            out.insert(d.id.clone(), free.remove(pos).slot);
        }
    }
    Ok(out)
}

fn surface_side_class(fiber: &FiberComplex, side: &LocusSide) -> Result<DivisorClass> {
    let comp = fiber
        .component(&side.component)
        .ok_or_else(|| Error::UnknownComponent {
            id: side.component.clone(),
        })?;
    let pair = comp
        .payload
        .surface_pair()
        .ok_or_else(|| Error::MissingLocusData {
            id: side.component.clone(),
            what: "component has no surface payload".into(),
        })?;
    DivisorClass::new(pair.surface, side.class.clone())
}

/// The triple-point formula on a double curve of a two-dimensional fiber:
/// the two self-intersections plus the stored number of triple points must
/// vanish.
pub fn check_triple_point(fiber: &FiberComplex, locus: &DoubleLocus) -> Result<bool> {
    if fiber.fiber_dim != 2 {
        return Err(Error::WrongFiberDimension {
            want: 2,
            got: fiber.fiber_dim,
        });
    }
    let ca = surface_side_class(fiber, &locus.a)?;
    let cb = surface_side_class(fiber, &locus.b)?;
    let n_c = locus.triple_points.unwrap_or(0) as i64;
    Ok(ca.self_intersection() + cb.self_intersection() + n_c == 0)
}

/// The degree form of the d-semistability condition on a double curve: the
/// degrees of the two normal bundles plus the degree cut by every other
/// component. The third term is read off the triple-locus incidence list, a
/// storage independent of the per-curve count consumed by
/// [`check_triple_point`].
pub fn check_dss_degree(fiber: &FiberComplex, locus: &DoubleLocus) -> Result<bool> {
    if fiber.fiber_dim != 2 {
        return Err(Error::WrongFiberDimension {
            want: 2,
            got: fiber.fiber_dim,
        });
    }
    let ca = surface_side_class(fiber, &locus.a)?;
    let cb = surface_side_class(fiber, &locus.b)?;
    let deg_normal_a = ca.self_intersection();
    let deg_normal_b = cb.self_intersection();
    let mut crossing_degree = 0i64;
    for comp in &fiber.components {
        if comp.id == locus.a.component || comp.id == locus.b.component {
            continue;
        }
        crossing_degree += fiber
            .triple_loci
            .iter()
            .filter(|t| {
                t.contains(&locus.a.component)
                    && t.contains(&locus.b.component)
                    && t.contains(&comp.id)
            })
            .count() as i64;
    }
    Ok(deg_normal_a + deg_normal_b + crossing_degree == 0)
}

/// The d-semistability condition on a double surface of a three-dimensional
/// fiber: the side-`a` normal class, plus the side-`b` normal class carried
/// through the identification, plus the classes cut by the two remaining
/// components, must vanish in the Picard lattice of the locus surface.
pub fn check_d_semistability_surface(fiber: &FiberComplex, locus: &DoubleLocus) -> Result<bool> {
    if fiber.fiber_dim != 3 {
        return Err(Error::WrongFiberDimension {
            want: 3,
            got: fiber.fiber_dim,
        });
    }
    let ident = locus.identification.unwrap_or(Identification::Id);
    // resolve both sides through the per-component slot assignment so that
    // slots sharing an ambient class stay coherently matched to loci
    let entry_for = |side: &LocusSide| -> Result<Option<BoundaryEntry>> {
        let comp = fiber
            .component(&side.component)
            .ok_or_else(|| Error::UnknownComponent {
                id: side.component.clone(),
            })?;
        let bundle = match &comp.payload {
            ComponentPayload::Threefold(b) => b,
            _ => return Ok(None),
        };
        let assignment = slot_assignment(fiber, &side.component)?;
        let slot = *assignment
            .get(&locus.id)
            .ok_or_else(|| Error::MissingLocusData {
                id: locus.id.clone(),
                what: format!("no slot of `{}` matched to this locus", side.component),
            })?;
        crate::fano3_bundles::boundary_entry(bundle, slot).map(Some)
    };
    let entry_a = entry_for(&locus.a)?;
    let entry_b = entry_for(&locus.b)?;

    let (surface, normal_a, normal_b) = match (&entry_a, &entry_b) {
        (Some(ea), Some(eb)) => {
            if ea.surface != eb.surface {
                return Err(Error::SurfaceMismatch {
                    a: ea.surface.name(),
                    b: eb.surface.name(),
                });
            }
            let na = match &locus.normal_a {
                Some(v) => DivisorClass::new(ea.surface, v.clone())?,
                None => ea.normal.clone(),
            };
            let nb = match &locus.normal_b {
                Some(v) => DivisorClass::new(eb.surface, v.clone())?,
                None => eb.normal.clone(),
            };
            (ea.surface, na, nb)
        }
        _ => {
            // structure-only sides: the check degenerates to the stored
            // normals, and is only defined without further components
            if fiber.components.len() > 2 {
                return Err(Error::MissingRestriction {
                    a: locus.a.component.clone(),
                    b: locus.b.component.clone(),
                });
            }
            let va = locus
                .normal_a
                .clone()
                .ok_or_else(|| Error::MissingLocusData {
                    id: locus.id.clone(),
                    what: "normal_a".into(),
                })?;
            let vb = locus
                .normal_b
                .clone()
                .ok_or_else(|| Error::MissingLocusData {
                    id: locus.id.clone(),
                    what: "normal_b".into(),
                })?;
            if va.len() != vb.len() {
                return Err(Error::MissingLocusData {
                    id: locus.id.clone(),
                    what: "normal classes of unequal arity".into(),
                });
            }
            let transported = ident.as_aut().apply(&vb);
            return Ok(va.iter().zip(&transported).all(|(x, y)| x + y == 0));
        }
    };

    if ident == Identification::Swap && surface.normalized() != SurfaceGeometry::Quadric {
        return Err(Error::BadIdentification {
            identification: ident.as_str().into(),
            surface: surface.name(),
        });
    }

    // restriction classes of the other two components, from side a's table
    let assignment = slot_assignment(fiber, &locus.a.component)?;
    let entry_a = entry_a.expect("threefold side checked above");
    let mut sum = normal_a.add(&normal_b.apply(ident.as_aut()))?;
    for comp in &fiber.components {
        if comp.id == locus.a.component || comp.id == locus.b.component {
            continue;
        }
        let other = fiber
            .locus_between(&locus.a.component, &comp.id)
            .ok_or_else(|| Error::MissingRestriction {
                a: locus.a.component.clone(),
                b: comp.id.clone(),
            })?;
        let other_slot = *assignment
            .get(&other.id)
            .ok_or_else(|| Error::MissingRestriction {
                a: locus.a.component.clone(),
                b: comp.id.clone(),
            })?;
        let restriction =
            entry_a
                .restriction(other_slot)
                .ok_or_else(|| Error::MissingRestriction {
                    a: locus.a.component.clone(),
                    b: comp.id.clone(),
                })?;
        sum = sum.add(restriction)?;
    }
    Ok(sum.is_zero())
}

/// Divisorial contraction types for a surface component, read off the pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ContractionType {
    E1,
    E2,
    E3,
    E5,
    Unknown,
}

impl ContractionType {
    pub fn as_str(&self) -> &'static str {
        match self {
            ContractionType::E1 => "E1",
            ContractionType::E2 => "E2",
            ContractionType::E3 => "E3",
            ContractionType::E5 => "E5",
            ContractionType::Unknown => "?",
        }
    }

    /// What the contraction does to the component.
    pub fn target(&self) -> &'static str {
        match self {
            ContractionType::E1 => "P1",
            ContractionType::E2 => "smooth point",
            ContractionType::E3 => "ordinary double point",
            ContractionType::E5 => "1/2(1,1,1) point",
            ContractionType::Unknown => "unknown",
        }
    }

    /// Canonical display order: E2, E5, E3, E1.
    pub fn rank(&self) -> u8 {
        match self {
            ContractionType::E2 => 0,
            ContractionType::E5 => 1,
            ContractionType::E3 => 2,
            ContractionType::E1 => 3,
            ContractionType::Unknown => 9,
        }
    }
}

impl std::fmt::Display for ContractionType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

fn is_section_class(c: &[i64]) -> bool {
    c[0] == 1 && c[1] >= 0
}

/// Classifies a surface pair by its contraction type: a plane with boundary
/// degree 1 contracts to a smooth point (E2), degree 2 to a half point (E5),
/// the quadric with an irreducible `(1,1)` boundary to an ordinary double
/// point (E3), and a ruled surface whose boundary is a section, or a section
/// and a fiber, contracts onto its base curve (E1).
pub fn classify_contraction(pair: &SurfacePair) -> ContractionType {
    let pair = pair.normalized();
    let mut classes: Vec<&[i64]> = pair.boundary.iter().map(|b| b.class.coeffs()).collect();
    classes.sort();
    match pair.surface {
        SurfaceGeometry::ProjectivePlane => match pair.boundary_sum().coeffs() {
            [1] if classes.len() == 1 => ContractionType::E2,
            [2] => ContractionType::E5,
            _ => ContractionType::Unknown,
        },
        SurfaceGeometry::Quadric => match classes.as_slice() {
            [[1, 1]] => ContractionType::E3,
            [[1, 0]] | [[0, 1]] => ContractionType::E1,
            [[0, 1], [1, 0]] => ContractionType::E1,
            _ => ContractionType::Unknown,
        },
        SurfaceGeometry::Hirzebruch(_) => match classes.as_slice() {
            [c] if is_section_class(c) => ContractionType::E1,
            [[0, 1], c] if is_section_class(c) => ContractionType::E1,
            _ => ContractionType::Unknown,
        },
    }
}

/// The fiber class of the ruling contracted by an E1 component: `f` on a
/// Hirzebruch surface, and on the quadric the ruling transverse to the
/// boundary section. `None` for pairs that are not of type E1.
pub fn general_ruling(pair: &SurfacePair) -> Option<DivisorClass> {
    if classify_contraction(pair) != ContractionType::E1 {
        return None;
    }
    let pair = pair.normalized();
    match pair.surface {
        SurfaceGeometry::Hirzebruch(_) => Some(pair.surface.cls(&[0, 1])),
        SurfaceGeometry::Quadric => {
            let mut classes: Vec<&[i64]> = pair.boundary.iter().map(|b| b.class.coeffs()).collect();
            classes.sort();
            match classes.as_slice() {
                [[0, 1]] => Some(pair.surface.cls(&[1, 0])),
                _ => Some(pair.surface.cls(&[0, 1])),
            }
        }
        _ => None,
    }
}

/// Sum over the surface components of the self-intersection of the
/// restricted anticanonical class `-K - D`.
pub fn anticanonical_degree(fiber: &FiberComplex) -> Result<i64> {
    if fiber.fiber_dim != 2 {
        return Err(Error::WrongFiberDimension {
            want: 2,
            got: fiber.fiber_dim,
        });
    }
    let mut total = 0;
    for c in &fiber.components {
        let pair = c
            .payload
            .surface_pair()
            .ok_or_else(|| Error::MissingLocusData {
                id: c.id.clone(),
                what: "component has no surface payload".into(),
            })?;
        total += pair.anti_log_canonical().self_intersection();
    }
    Ok(total)
}

/// The dual complex: one vertex per component, one `m`-face per stratum
/// where `m + 1` components meet. Faces are kept as a multiset since two
/// strata may share a vertex set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DualComplex {
    pub vertices: Vec<String>,
    /// `faces[d]` lists the vertex-index sets of the `(d+1)`-fold strata,
    /// for `d >= 1` (index 0 holds the edges).
    pub faces: Vec<Vec<BTreeSet<usize>>>,
}

impl DualComplex {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self, dim: usize) -> usize {
        if dim == 0 {
            self.vertices.len()
        } else {
            self.faces.get(dim - 1).map_or(0, |f| f.len())
        }
    }

    pub fn dimension(&self) -> usize {
        (1..=self.faces.len())
            .rev()
            .find(|d| !self.faces[d - 1].is_empty())
            .unwrap_or(0)
    }

    /// `Some(k)` when the complex is the full simplex on its vertices: every
    /// set of `m + 1` vertices spans exactly one `m`-face.
    pub fn is_simplex(&self) -> Option<usize> {
        let v = self.vertex_count();
        if v == 0 {
            return None;
        }
        for d in 1..self.faces.len() + 1 {
            let faces = self.faces.get(d - 1).cloned().unwrap_or_default();
            if d >= v {
                if !faces.is_empty() {
                    return None;
                }
                continue;
            }
            let mut counts: BTreeMap<BTreeSet<usize>, usize> = BTreeMap::new();
            for f in &faces {
                *counts.entry(f.clone()).or_insert(0) += 1;
            }
            let subsets = k_subsets(v, d + 1);
            if counts.len() != subsets.len() || faces.len() != subsets.len() {
                return None;
            }
            for s in subsets {
                if counts.get(&s) != Some(&1) {
                    return None;
                }
            }
        }
        // all intermediate dimensions up to v-1 must actually be present
        for d in 1..v {
            if self.face_count(d) != binomial(v, d + 1) {
                return None;
            }
        }
        Some(v - 1)
    }
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut out = 1usize;
    for i in 0..k {
        out = out * (n - i) / (i + 1);
    }
    out
}

fn k_subsets(n: usize, k: usize) -> Vec<BTreeSet<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(idx.iter().copied().collect());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Builds the dual complex of a validated fiber: vertices from components,
/// edges from double loci, 2-faces from triple loci, 3-faces from quadruple
/// points.
pub fn build_dual_complex(fiber: &FiberComplex) -> Result<DualComplex> {
    let report = validate_fiber(fiber);
    if !report.is_valid() {
        return Err(Error::InvalidFiber {
            report: report.to_string(),
        });
    }
    let mut vertices: Vec<String> = fiber.components.iter().map(|c| c.id.clone()).collect();
    vertices.sort();
    let index: BTreeMap<&String, usize> =
        vertices.iter().enumerate().map(|(i, v)| (v, i)).collect();

    let mut edges: Vec<BTreeSet<usize>> = fiber
        .double_loci
        .iter()
        .map(|d| {
            [index[&d.a.component], index[&d.b.component]]
                .into_iter()
                .collect()
        })
        .collect();
    edges.sort();
    let mut triangles: Vec<BTreeSet<usize>> = fiber
        .triple_loci
        .iter()
        .map(|t| t.components.iter().map(|c| index[c]).collect())
        .collect();
    triangles.sort();
    let mut faces = vec![edges, triangles];
    if fiber.quadruple_points > 0 {
        let all: BTreeSet<usize> = (0..vertices.len()).collect();
        faces.push(vec![all; fiber.quadruple_points as usize]);
    } else {
        faces.push(Vec::new());
    }
    while faces.last().is_some_and(|f| f.is_empty()) {
        faces.pop();
    }
    Ok(DualComplex { vertices, faces })
}

// ---------------------------------------------------------------------------
// canonical form
// ---------------------------------------------------------------------------

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..n).collect();
    permute(&mut items, 0, &mut out);
    out.sort();
    out
}

fn permute(items: &mut Vec<usize>, start: usize, out: &mut Vec<Vec<usize>>) {
    if start == items.len() {
        out.push(items.clone());
        return;
    }
    for i in start..items.len() {
        items.swap(start, i);
        permute(items, start + 1, out);
        items.swap(start, i);
    }
}

fn payload_normalized(p: &ComponentPayload) -> ComponentPayload {
    match p {
        ComponentPayload::Surface(pair) => ComponentPayload::Surface(pair.normalized()),
        other => other.clone(),
    }
}

fn payload_automorphisms(p: &ComponentPayload) -> &'static [LatticeAut] {
    match p {
        ComponentPayload::Surface(pair) => pair.surface.automorphisms(),
        _ => &[LatticeAut::Identity],
    }
}

fn payload_apply(p: &ComponentPayload, aut: LatticeAut) -> ComponentPayload {
    match p {
        ComponentPayload::Surface(pair) => ComponentPayload::Surface(pair.apply(aut)),
        other => other.clone(),
    }
}

/// Label-free serialization of a gauge-fixed fiber, used as the comparison
/// and dedup key.
fn gauge_string(fiber: &FiberComplex) -> String {
    use serde_json::json;
    let comps: Vec<serde_json::Value> = fiber
        .components
        .iter()
        .map(|c| match &c.payload {
            ComponentPayload::Surface(p) => {
                let mut classes: Vec<Vec<i64>> = p
                    .boundary
                    .iter()
                    .map(|b| b.class.coeffs().to_vec())
                    .collect();
                classes.sort();
                json!(["S", p.surface.name(), classes])
            }
            ComponentPayload::Threefold(b) => json!(["T", b.case_tag().as_str(), b.params()]),
            ComponentPayload::RationalCurve(_) => json!(["R"]),
            ComponentPayload::Combinatorial { combinatorial } => json!(["C", combinatorial]),
        })
        .collect();
    let loci: Vec<serde_json::Value> = fiber
        .double_loci
        .iter()
        .map(|d| {
            json!([
                d.a.component,
                d.b.component,
                d.a.class,
                d.b.class,
                d.triple_points.unwrap_or(0),
                d.normal_a,
                d.normal_b,
                d.identification.map(|i| i.as_str()),
            ])
        })
        .collect();
    let triples: Vec<Vec<String>> = fiber
        .triple_loci
        .iter()
        .map(|t| t.components.clone())
        .collect();
    json!({
        "dim": fiber.fiber_dim,
        "components": comps,
        "loci": loci,
        "triples": triples,
        "quad": fiber.quadruple_points,
    })
    .to_string()
}

fn apply_gauge(fiber: &FiberComplex, perm: &[usize], auts: &[LatticeAut]) -> FiberComplex {
    // perm[new_position] = old index
    let mut old_to_new = vec![0usize; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        old_to_new[old] = new;
    }
    let old_ids: Vec<String> = fiber.components.iter().map(|c| c.id.clone()).collect();
    let new_id = |old_id: &str| -> String {
        let old_idx = old_ids.iter().position(|i| i == old_id).expect("known id");
        format!("F{}", old_to_new[old_idx] + 1)
    };
    let aut_of = |old_id: &str| -> LatticeAut {
        let old_idx = old_ids.iter().position(|i| i == old_id).expect("known id");
        auts[old_idx]
    };

    let components: Vec<Component> = perm
        .iter()
        .enumerate()
        .map(|(new, &old)| {
            let c = &fiber.components[old];
            Component {
                id: format!("F{}", new + 1),
                payload: payload_apply(&c.payload, auts[old]),
            }
        })
        .collect();

    let mut loci: Vec<DoubleLocus> = fiber
        .double_loci
        .iter()
        .map(|d| {
            let map_side = |s: &LocusSide| -> LocusSide {
                let class = match fiber.component(&s.component).map(|c| &c.payload) {
                    Some(ComponentPayload::Surface(_)) => aut_of(&s.component).apply(&s.class),
                    _ => s.class.clone(),
                };
                LocusSide {
                    component: new_id(&s.component),
                    class,
                }
            };
            let mut a = map_side(&d.a);
            let mut b = map_side(&d.b);
            let mut normal_a = d.normal_a.clone();
            let mut normal_b = d.normal_b.clone();
            if a.component > b.component {
                std::mem::swap(&mut a, &mut b);
                std::mem::swap(&mut normal_a, &mut normal_b);
            }
            DoubleLocus {
                id: String::new(),
                a,
                b,
                triple_points: d.triple_points,
                normal_a,
                normal_b,
                identification: d.identification,
            }
        })
        .collect();
    loci.sort_by(|x, y| (&x.a.component, &x.b.component).cmp(&(&y.a.component, &y.b.component)));
    for d in loci.iter_mut() {
        d.id = format!(
            "D{}{}",
            d.a.component.trim_start_matches('F'),
            d.b.component.trim_start_matches('F')
        );
    }

    let mut triples: Vec<TripleLocus> = fiber
        .triple_loci
        .iter()
        .map(|t| {
            let mut components: Vec<String> = t.components.iter().map(|c| new_id(c)).collect();
            components.sort();
            TripleLocus { components }
        })
        .collect();
    triples.sort_by(|x, y| x.components.cmp(&y.components));

    FiberComplex {
        fiber_dim: fiber.fiber_dim,
        components,
        double_loci: loci,
        triple_loci: triples,
        quadruple_points: fiber.quadruple_points,
    }
}

/// Applies one lattice automorphism per component (positionally), renaming
/// ids in place order. A gauge transform: canonical forms are unchanged.
pub fn apply_component_automorphisms(fiber: &FiberComplex, auts: &[LatticeAut]) -> FiberComplex {
    let identity: Vec<usize> = (0..fiber.components.len()).collect();
    apply_gauge(fiber, &identity, auts)
}

/// The gauge-minimal representative of a fiber under component permutations
/// and the per-component lattice automorphisms, with surfaces normalized.
pub fn canonicalize(fiber: &FiberComplex) -> FiberComplex {
    let base = FiberComplex {
        fiber_dim: fiber.fiber_dim,
        components: fiber
            .components
            .iter()
            .map(|c| Component {
                id: c.id.clone(),
                payload: payload_normalized(&c.payload),
            })
            .collect(),
        double_loci: fiber.double_loci.clone(),
        triple_loci: fiber.triple_loci.clone(),
        quadruple_points: fiber.quadruple_points,
    };
    let n = base.components.len();
    let aut_lists: Vec<&'static [LatticeAut]> = base
        .components
        .iter()
        .map(|c| payload_automorphisms(&c.payload))
        .collect();

    let mut best: Option<(String, FiberComplex)> = None;
    for perm in permutations(n) {
        let mut choice = vec![0usize; n];
        loop {
            let auts: Vec<LatticeAut> = choice
                .iter()
                .zip(&aut_lists)
                .map(|(&i, list)| list[i])
                .collect();
            let candidate = apply_gauge(&base, &perm, &auts);
            let key = gauge_string(&candidate);
            if best.as_ref().is_none_or(|(k, _)| key < *k) {
                best = Some((key, candidate));
            }
            // advance the mixed-radix automorphism counter
            let mut i = 0;
            loop {
                if i == n {
                    break;
                }
                choice[i] += 1;
                if choice[i] < aut_lists[i].len() {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
        }
    }
    best.expect("at least one gauge").1
}

/// Lexicographically minimal label-free serialization of a fiber over the
/// allowed gauge; equality of canonical forms is the dedup criterion.
pub fn canonical_form(fiber: &FiberComplex) -> String {
    gauge_string(&canonicalize(fiber))
}
