//! Divisor-lattice arithmetic on the three surface families that occur as
//! components and double loci: the projective plane, the quadric surface
//! `P1xP1` and the Hirzebruch surfaces `Fn`.
//!
//! Every class is an integer vector in a fixed basis of the Picard lattice:
//! `[l]` on `P2`, `[l1, l2]` on `P1xP1` and `[s, f]` on `Fn` (`s` the
//! `(-n)`-section, `f` a fiber). `F0` and `P1xP1` are distinct encodings of
//! the same surface; [`SurfaceGeometry::normalized`] maps `F0` to the quadric
//! with `s -> l1`, `f -> l2`, and all comparisons made by the search engines
//! go through that normalization.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// One of the three surface families, identified by its Picard lattice data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SurfaceGeometry {
    /// The projective plane; basis `[l]`, Gram matrix `[[1]]`.
    ProjectivePlane,
    /// `P1 x P1`; basis `[l1, l2]`, Gram matrix `[[0,1],[1,0]]`.
    Quadric,
    /// The Hirzebruch surface `Fn`; basis `[s, f]`, Gram matrix `[[-n,1],[1,0]]`.
    Hirzebruch(u32),
}

/// Lattice isometries used for identifications and canonical forms.
///
/// The plane and `Fn` with `n > 0` admit only the identity; the quadric
/// additionally admits the factor swap `(a, b) -> (b, a)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LatticeAut {
    Identity,
    SwapFactors,
}

impl LatticeAut {
    pub fn apply(&self, coeffs: &[i64]) -> Vec<i64> {
        match self {
            LatticeAut::Identity => coeffs.to_vec(),
            LatticeAut::SwapFactors => {
                debug_assert_eq!(coeffs.len(), 2);
                vec![coeffs[1], coeffs[0]]
            }
        }
    }

    pub fn inverse(&self) -> LatticeAut {
        // both are involutions
        *self
    }
}

impl SurfaceGeometry {
    /// Rank of the Picard lattice in the fixed basis.
    pub fn rank(&self) -> usize {
        match self {
            SurfaceGeometry::ProjectivePlane => 1,
            _ => 2,
        }
    }

    /// Names of the basis classes, in coefficient order.
    pub fn basis_names(&self) -> &'static [&'static str] {
        match self {
            SurfaceGeometry::ProjectivePlane => &["l"],
            SurfaceGeometry::Quadric => &["l1", "l2"],
            SurfaceGeometry::Hirzebruch(_) => &["s", "f"],
        }
    }

    /// The symmetric Gram matrix of the basis.
    pub fn gram(&self) -> Vec<Vec<i64>> {
        match self {
            SurfaceGeometry::ProjectivePlane => vec![vec![1]],
            SurfaceGeometry::Quadric => vec![vec![0, 1], vec![1, 0]],
            SurfaceGeometry::Hirzebruch(n) => {
                vec![vec![-(*n as i64), 1], vec![1, 0]]
            }
        }
    }

    /// The intersection pairing `a^T . gram . b`.
    pub fn pairing(&self, a: &[i64], b: &[i64]) -> i64 {
        match self {
            SurfaceGeometry::ProjectivePlane => a[0] * b[0],
            SurfaceGeometry::Quadric => a[0] * b[1] + a[1] * b[0],
            SurfaceGeometry::Hirzebruch(n) => {
                -(*n as i64) * a[0] * b[0] + a[0] * b[1] + a[1] * b[0]
            }
        }
    }

    /// The canonical class: `-3l` on `P2`, `(-2,-2)` on the quadric,
    /// `-2s-(n+2)f` on `Fn`.
    pub fn canonical_class(&self) -> DivisorClass {
        let coeffs = match self {
            SurfaceGeometry::ProjectivePlane => vec![-3],
            SurfaceGeometry::Quadric => vec![-2, -2],
            SurfaceGeometry::Hirzebruch(n) => vec![-2, -(*n as i64) - 2],
        };
        DivisorClass {
            surface: *self,
            coeffs,
        }
    }

    /// Canonicalizes the `F0`/`P1xP1` duplication: `F0` maps to the quadric
    /// (the coefficients are unchanged since `s -> l1`, `f -> l2`).
    pub fn normalized(&self) -> SurfaceGeometry {
        match self {
            SurfaceGeometry::Hirzebruch(0) => SurfaceGeometry::Quadric,
            other => *other,
        }
    }

    /// The lattice automorphisms preserving the Gram matrix that we allow as
    /// identifications, on the normalized encoding.
    pub fn automorphisms(&self) -> &'static [LatticeAut] {
        match self.normalized() {
            SurfaceGeometry::Quadric => &[LatticeAut::Identity, LatticeAut::SwapFactors],
            _ => &[LatticeAut::Identity],
        }
    }

    /// Display name: `P2`, `P1xP1`, `F3`, ...
    pub fn name(&self) -> String {
        match self {
            SurfaceGeometry::ProjectivePlane => "P2".to_string(),
            SurfaceGeometry::Quadric => "P1xP1".to_string(),
            SurfaceGeometry::Hirzebruch(n) => format!("F{n}"),
        }
    }

    /// A class on this surface; panics on an arity mismatch, so only for
    /// statically correct coefficient lists.
    pub fn cls(&self, coeffs: &[i64]) -> DivisorClass {
        assert_eq!(
            coeffs.len(),
            self.rank(),
            "coefficient arity mismatch on {}",
            self.name()
        );
        DivisorClass {
            surface: *self,
            coeffs: coeffs.to_vec(),
        }
    }

    /// Sort key used by canonical orderings: plane, then Hirzebruch by index,
    /// then the quadric.
    pub fn order_key(&self) -> (u8, u32) {
        match self {
            SurfaceGeometry::ProjectivePlane => (0, 0),
            SurfaceGeometry::Hirzebruch(n) => (1, *n),
            SurfaceGeometry::Quadric => (2, 0),
        }
    }
}

impl std::fmt::Display for SurfaceGeometry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.name())
    }
}

#[derive(Serialize, Deserialize)]
struct SurfaceRepr {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<u32>,
}

impl Serialize for SurfaceGeometry {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = match self {
            SurfaceGeometry::ProjectivePlane => SurfaceRepr {
                kind: "P2".into(),
                n: None,
            },
            SurfaceGeometry::Quadric => SurfaceRepr {
                kind: "P1xP1".into(),
                n: None,
            },
            SurfaceGeometry::Hirzebruch(n) => SurfaceRepr {
                kind: "Fn".into(),
                n: Some(*n),
            },
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SurfaceGeometry {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = SurfaceRepr::deserialize(deserializer)?;
        match (repr.kind.as_str(), repr.n) {
            ("P2", None) => Ok(SurfaceGeometry::ProjectivePlane),
            ("P1xP1", None) => Ok(SurfaceGeometry::Quadric),
            ("Fn", Some(n)) => Ok(SurfaceGeometry::Hirzebruch(n)),
            ("Fn", None) => Err(D::Error::custom("surface kind Fn requires field `n`")),
            (kind, Some(_)) => Err(D::Error::custom(format!(
                "surface kind {kind} does not take field `n`"
            ))),
            (kind, None) => Err(D::Error::custom(format!("unknown surface kind {kind}"))),
        }
    }
}

/// An integer divisor class in the fixed basis of its surface.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DivisorClass {
    surface: SurfaceGeometry,
    coeffs: Vec<i64>,
}

impl DivisorClass {
    pub fn new(surface: SurfaceGeometry, coeffs: Vec<i64>) -> Result<Self> {
        if coeffs.len() != surface.rank() {
            return Err(Error::CoefficientLength {
                surface: surface.name(),
                got: coeffs.len(),
                want: surface.rank(),
            });
        }
        Ok(DivisorClass { surface, coeffs })
    }

    pub fn zero(surface: SurfaceGeometry) -> Self {
        DivisorClass {
            surface,
            coeffs: vec![0; surface.rank()],
        }
    }

    pub fn surface(&self) -> SurfaceGeometry {
        self.surface
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Nonzero and inside the effective cone spanned by the basis classes.
    pub fn is_effective(&self) -> bool {
        !self.is_zero() && self.coeffs.iter().all(|&c| c >= 0)
    }

    fn check_same_surface(&self, other: &DivisorClass) -> Result<()> {
        if self.surface.normalized() != other.surface.normalized() {
            return Err(Error::SurfaceMismatch {
                a: self.surface.name(),
                b: other.surface.name(),
            });
        }
        Ok(())
    }

    /// The intersection number of two classes on the same surface.
    pub fn intersect(&self, other: &DivisorClass) -> Result<i64> {
        self.check_same_surface(other)?;
        Ok(self
            .surface
            .normalized()
            .pairing(&self.coeffs, &other.coeffs))
    }

    pub fn self_intersection(&self) -> i64 {
        self.surface.pairing(&self.coeffs, &self.coeffs)
    }

    pub fn add(&self, other: &DivisorClass) -> Result<DivisorClass> {
        self.check_same_surface(other)?;
        Ok(DivisorClass {
            surface: self.surface,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn neg(&self) -> DivisorClass {
        DivisorClass {
            surface: self.surface,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn scale(&self, k: i64) -> DivisorClass {
        DivisorClass {
            surface: self.surface,
            coeffs: self.coeffs.iter().map(|c| k * c).collect(),
        }
    }

    pub fn apply(&self, aut: LatticeAut) -> DivisorClass {
        DivisorClass {
            surface: self.surface,
            coeffs: aut.apply(&self.coeffs),
        }
    }

    /// Same class on the normalized surface encoding.
    pub fn normalized(&self) -> DivisorClass {
        DivisorClass {
            surface: self.surface.normalized(),
            coeffs: self.coeffs.clone(),
        }
    }

    /// The orbit-minimal coefficient vector under the surface automorphisms,
    /// used as a comparison key when identifications are free.
    pub fn orbit_key(&self) -> Vec<i64> {
        self.surface
            .automorphisms()
            .iter()
            .map(|aut| aut.apply(&self.coeffs))
            .min()
            .expect("automorphism list is never empty")
    }

    /// Renders the class in the basis names, e.g. `s+3f` or `-2l`.
    pub fn describe(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (c, name) in self.coeffs.iter().zip(self.surface.basis_names()) {
            match *c {
                0 => continue,
                1 => {
                    if !out.is_empty() {
                        out.push('+');
                    }
                    out.push_str(name);
                }
                -1 => {
                    out.push('-');
                    out.push_str(name);
                }
                c => {
                    if c > 0 && !out.is_empty() {
                        out.push('+');
                    }
                    out.push_str(&format!("{c}{name}"));
                }
            }
        }
        out
    }
}

impl Serialize for DivisorClass {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            surface: &'a SurfaceGeometry,
            coeffs: &'a [i64],
        }
        Repr {
            surface: &self.surface,
            coeffs: &self.coeffs,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DivisorClass {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            surface: SurfaceGeometry,
            coeffs: Vec<i64>,
        }
        let repr = Repr::deserialize(deserializer)?;
        DivisorClass::new(repr.surface, repr.coeffs).map_err(D::Error::custom)
    }
}

/// Ampleness in closed form per family: `P2`: `a > 0`; quadric: `a, b > 0`;
/// `Fn` with `D = a s + b f`: `a > 0` and `b > a n`.
pub fn is_ample(d: &DivisorClass) -> bool {
    let d = d.normalized();
    let c = d.coeffs();
    match d.surface() {
        SurfaceGeometry::ProjectivePlane => c[0] > 0,
        SurfaceGeometry::Quadric => c[0] > 0 && c[1] > 0,
        SurfaceGeometry::Hirzebruch(n) => c[0] > 0 && c[1] > c[0] * n as i64,
    }
}

/// Nefness: the same inequalities with `>=`.
pub fn is_nef(d: &DivisorClass) -> bool {
    let d = d.normalized();
    let c = d.coeffs();
    match d.surface() {
        SurfaceGeometry::ProjectivePlane => c[0] >= 0,
        SurfaceGeometry::Quadric => c[0] >= 0 && c[1] >= 0,
        SurfaceGeometry::Hirzebruch(n) => c[0] >= 0 && c[1] >= c[0] * n as i64,
    }
}

/// One reduced irreducible boundary curve, carried with its display label.
/// Distinct curves in the same class (e.g. two lines) get distinct labels.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BoundaryCurve {
    pub label: String,
    pub class: DivisorClass,
}

/// A surface together with a reduced snc boundary: the log surface datum.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SurfacePair {
    pub surface: SurfaceGeometry,
    pub boundary: Vec<BoundaryCurve>,
}

impl SurfacePair {
    pub fn new(surface: SurfaceGeometry, boundary: Vec<(&str, DivisorClass)>) -> Self {
        SurfacePair {
            surface,
            boundary: boundary
                .into_iter()
                .map(|(label, class)| BoundaryCurve {
                    label: label.to_string(),
                    class,
                })
                .collect(),
        }
    }

    /// Checks the boundary invariants: classes nonzero effective on the right
    /// surface, labels pairwise distinct.
    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for curve in &self.boundary {
            if curve.class.surface().normalized() != self.surface.normalized() {
                return Err(Error::SurfaceMismatch {
                    a: curve.class.surface().name(),
                    b: self.surface.name(),
                });
            }
            if !curve.class.is_effective() {
                return Err(Error::NonEffectiveBoundary {
                    label: curve.label.clone(),
                    surface: self.surface.name(),
                });
            }
            if !seen.insert(curve.label.clone()) {
                return Err(Error::DuplicateBoundaryLabel {
                    label: curve.label.clone(),
                });
            }
        }
        Ok(())
    }

    /// `-K - sum of the boundary`, the class whose ampleness defines the pair.
    pub fn anti_log_canonical(&self) -> DivisorClass {
        let mut acc = self.surface.canonical_class().neg();
        for curve in &self.boundary {
            acc = acc
                .add(&curve.class.neg())
                .expect("boundary class surface checked by validate");
        }
        acc
    }

    /// Total boundary class.
    pub fn boundary_sum(&self) -> DivisorClass {
        let mut acc = DivisorClass::zero(self.surface);
        for curve in &self.boundary {
            acc = acc.add(&curve.class).expect("same surface");
        }
        acc
    }

    /// Normalized encoding: `F0` becomes the quadric, the `s`, `f`, `h`
    /// labels become ruling names.
    pub fn normalized(&self) -> SurfacePair {
        if self.surface != SurfaceGeometry::Hirzebruch(0) {
            return self.clone();
        }
        SurfacePair {
            surface: SurfaceGeometry::Quadric,
            boundary: self
                .boundary
                .iter()
                .map(|c| BoundaryCurve {
                    label: match c.label.as_str() {
                        "s" | "h" => "l1".to_string(),
                        "f" => "l2".to_string(),
                        other => other.to_string(),
                    },
                    class: c.class.normalized(),
                })
                .collect(),
        }
    }

    /// Applies a lattice automorphism to the whole boundary.
    pub fn apply(&self, aut: LatticeAut) -> SurfacePair {
        SurfacePair {
            surface: self.surface,
            boundary: self
                .boundary
                .iter()
                .map(|c| BoundaryCurve {
                    label: match (aut, c.label.as_str()) {
                        (LatticeAut::SwapFactors, "l1") => "l2".to_string(),
                        (LatticeAut::SwapFactors, "l2") => "l1".to_string(),
                        _ => c.label.clone(),
                    },
                    class: c.class.apply(aut),
                })
                .collect(),
        }
    }

    /// Key identifying the pair up to the allowed lattice automorphisms.
    pub fn canonical_key(&self) -> (SurfaceGeometry, Vec<Vec<i64>>) {
        let norm = self.normalized();
        norm.surface
            .automorphisms()
            .iter()
            .map(|aut| {
                let mut classes: Vec<Vec<i64>> = norm
                    .boundary
                    .iter()
                    .map(|c| aut.apply(c.class.coeffs()))
                    .collect();
                classes.sort();
                (norm.surface, classes)
            })
            .min()
            .expect("automorphism list is never empty")
    }

    pub fn describe(&self) -> String {
        if self.boundary.is_empty() {
            return format!("({}, -)", self.surface.name());
        }
        let labels: Vec<&str> = self.boundary.iter().map(|c| c.label.as_str()).collect();
        format!("({}, {})", self.surface.name(), labels.join(" u "))
    }
}

impl Serialize for SurfacePair {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct CurveRepr<'a> {
            label: &'a str,
            coeffs: &'a [i64],
        }
        #[derive(Serialize)]
        struct Repr<'a> {
            surface: &'a SurfaceGeometry,
            boundary: Vec<CurveRepr<'a>>,
        }
        Repr {
            surface: &self.surface,
            boundary: self
                .boundary
                .iter()
                .map(|c| CurveRepr {
                    label: &c.label,
                    coeffs: c.class.coeffs(),
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SurfacePair {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct CurveRepr {
            label: String,
            coeffs: Vec<i64>,
        }
        #[derive(Deserialize)]
        struct Repr {
            surface: SurfaceGeometry,
            boundary: Vec<CurveRepr>,
        }
        let repr = Repr::deserialize(deserializer)?;
        let boundary = repr
            .boundary
            .into_iter()
            .map(|c| {
                Ok(BoundaryCurve {
                    label: c.label,
                    class: DivisorClass::new(repr.surface, c.coeffs).map_err(D::Error::custom)?,
                })
            })
            .collect::<std::result::Result<Vec<_>, D::Error>>()?;
        Ok(SurfacePair {
            surface: repr.surface,
            boundary,
        })
    }
}

/// Whether `-K - D` is ample. Errors on an invalid boundary.
pub fn is_log_fano_pair(pair: &SurfacePair) -> Result<bool> {
    pair.validate()?;
    Ok(is_ample(&pair.anti_log_canonical()))
}

/// The catalog of log surfaces with nonempty reduced boundary, complete for
/// the three families: `(P2, l)`, `(P2, l u l')`, `(P2, q)`,
/// `(P1xP1, l(1,1))`, `(F1, h)`, `(Fn, s)` and `(Fn, s u f)` for
/// `0 <= n <= n_max`. Index-0 entries are returned in the quadric encoding.
pub fn maeda_catalog(n_max: u32) -> Vec<SurfacePair> {
    use SurfaceGeometry::*;
    let mut out = vec![
        SurfacePair::new(ProjectivePlane, vec![("l", ProjectivePlane.cls(&[1]))]),
        SurfacePair::new(
            ProjectivePlane,
            vec![
                ("l", ProjectivePlane.cls(&[1])),
                ("l'", ProjectivePlane.cls(&[1])),
            ],
        ),
        SurfacePair::new(ProjectivePlane, vec![("q", ProjectivePlane.cls(&[2]))]),
        SurfacePair::new(Quadric, vec![("l(1,1)", Quadric.cls(&[1, 1]))]),
        SurfacePair::new(Hirzebruch(1), vec![("h", Hirzebruch(1).cls(&[1, 1]))]),
    ];
    for n in 0..=n_max {
        let surface = Hirzebruch(n);
        out.push(SurfacePair::new(surface, vec![("s", surface.cls(&[1, 0]))]).normalized());
    }
    for n in 0..=n_max {
        let surface = Hirzebruch(n);
        out.push(
            SurfacePair::new(
                surface,
                vec![("s", surface.cls(&[1, 0])), ("f", surface.cls(&[0, 1]))],
            )
            .normalized(),
        );
    }
    out
}

/// Exhaustive completeness check for [`maeda_catalog`]: enumerates every
/// reduced boundary of at most two curves drawn from the named classes on the
/// three families with index `<= n_max` and returns the pairs that pass the
/// log test but are not in the catalog (expected empty).
pub fn maeda_catalog_verify(n_max: u32) -> Vec<SurfacePair> {
    use SurfaceGeometry::*;
    let catalog_keys: std::collections::BTreeSet<_> = maeda_catalog(n_max)
        .iter()
        .map(|p| p.canonical_key())
        .collect();

    let mut offenders = Vec::new();
    let mut surfaces = vec![ProjectivePlane, Quadric];
    for n in 1..=n_max {
        surfaces.push(Hirzebruch(n));
    }

    for surface in surfaces {
        // named irreducible curve classes on this surface
        let named: Vec<DivisorClass> = match surface {
            ProjectivePlane => vec![surface.cls(&[1]), surface.cls(&[2])],
            Quadric => vec![
                surface.cls(&[1, 0]),
                surface.cls(&[0, 1]),
                surface.cls(&[1, 1]),
            ],
            Hirzebruch(n) => {
                let mut v = vec![surface.cls(&[1, 0]), surface.cls(&[0, 1])];
                if n > 0 {
                    v.push(surface.cls(&[1, n as i64]));
                }
                v
            }
        };
        let mut candidates: Vec<Vec<DivisorClass>> = Vec::new();
        for c in &named {
            candidates.push(vec![c.clone()]);
        }
        for (i, c) in named.iter().enumerate() {
            for d in named.iter().skip(i) {
                // a repeated class stands for two distinct curves in it
                candidates.push(vec![c.clone(), d.clone()]);
            }
        }
        for boundary in candidates {
            let pair = SurfacePair {
                surface,
                boundary: boundary
                    .into_iter()
                    .enumerate()
                    .map(|(i, class)| BoundaryCurve {
                        label: format!("c{i}"),
                        class,
                    })
                    .collect(),
            };
            if is_log_fano_pair(&pair).unwrap_or(false)
                && !catalog_keys.contains(&pair.canonical_key())
            {
                offenders.push(pair);
            }
        }
    }
    offenders
}
