//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see every line.

use std::collections::BTreeSet;
use std::process::Command;
use std::time::{Duration, Instant};

use snc_fano::dp2_classify::{enumerate_dp2, justify_bound, Dp2SearchConfig};
use snc_fano::fano3_bundles::{
    component_invariants, dss_partner_class, BundleComponent, CaseTag, Slot,
};
use snc_fano::max3_search::{flag_degeneration, search_maximal, Max3SearchConfig};
use snc_fano::pic_surfaces::{BoundaryCurve, DivisorClass, SurfaceGeometry, SurfacePair};
use snc_fano::snc_fiber::{
    build_dual_complex, canonical_form, check_dss_degree, check_triple_point, classify_contraction,
    validate_fiber, Component, ComponentPayload, ContractionType, DoubleLocus, FiberComplex,
    LocusSide, TripleLocus,
};

fn criterion(name: &str, pass: bool, detail: String) {
    println!(
        "ACCEPTANCE {name}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{name}: {detail}");
}

fn run_cli(args: &[&str]) -> (serde_json::Value, Duration) {
    let start = Instant::now();
    let output = Command::new(env!("CARGO_BIN_EXE_snc-fano"))
        .args(args)
        .output()
        .expect("binary runs");
    let elapsed = start.elapsed();
    assert!(
        output.status.success(),
        "cli {args:?} failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let report: serde_json::Value = serde_json::from_slice(&output.stdout).expect("report is JSON");
    (report, elapsed)
}

fn result_fibers(report: &serde_json::Value) -> Vec<FiberComplex> {
    report["results"]
        .as_array()
        .expect("results array")
        .iter()
        .map(|v| serde_json::from_value(v.clone()).expect("fiber JSON"))
        .collect()
}

// The six expected fibers of the classification, written out literally.
fn expected_rows() -> Vec<FiberComplex> {
    use SurfaceGeometry::*;
    fn pair(surface: SurfaceGeometry, boundary: &[(&str, &[i64])]) -> SurfacePair {
        SurfacePair {
            surface,
            boundary: boundary
                .iter()
                .map(|(label, coeffs)| BoundaryCurve {
                    label: label.to_string(),
                    class: DivisorClass::new(surface, coeffs.to_vec()).unwrap(),
                })
                .collect(),
        }
    }
    fn glue2(p1: SurfacePair, c1: &[i64], p2: SurfacePair, c2: &[i64]) -> FiberComplex {
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
                    class: c1.to_vec(),
                },
                b: LocusSide {
                    component: "F2".into(),
                    class: c2.to_vec(),
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
    let f1sf = pair(Hirzebruch(1), &[("s", &[1, 0]), ("f", &[0, 1])]);
    let triangle = FiberComplex {
        fiber_dim: 2,
        components: ["F1", "F2", "F3"]
            .iter()
            .map(|id| Component {
                id: (*id).into(),
                payload: ComponentPayload::Surface(f1sf.clone()),
            })
            .collect(),
        double_loci: vec![
            DoubleLocus {
                id: "D12".into(),
                a: LocusSide {
                    component: "F1".into(),
                    class: vec![1, 0],
                },
                b: LocusSide {
                    component: "F2".into(),
                    class: vec![0, 1],
                },
                triple_points: Some(1),
                normal_a: None,
                normal_b: None,
                identification: None,
            },
            DoubleLocus {
                id: "D13".into(),
                a: LocusSide {
                    component: "F1".into(),
                    class: vec![0, 1],
                },
                b: LocusSide {
                    component: "F3".into(),
                    class: vec![1, 0],
                },
                triple_points: Some(1),
                normal_a: None,
                normal_b: None,
                identification: None,
            },
            DoubleLocus {
                id: "D23".into(),
                a: LocusSide {
                    component: "F2".into(),
                    class: vec![1, 0],
                },
                b: LocusSide {
                    component: "F3".into(),
                    class: vec![0, 1],
                },
                triple_points: Some(1),
                normal_a: None,
                normal_b: None,
                identification: None,
            },
        ],
        triple_loci: vec![TripleLocus {
            components: vec!["F1".into(), "F2".into(), "F3".into()],
        }],
        quadruple_points: 0,
    };
    vec![
        glue2(
            pair(ProjectivePlane, &[("l", &[1])]),
            &[1],
            pair(Hirzebruch(1), &[("s", &[1, 0])]),
            &[1, 0],
        ),
        glue2(
            pair(ProjectivePlane, &[("q", &[2])]),
            &[2],
            pair(Hirzebruch(4), &[("s", &[1, 0])]),
            &[1, 0],
        ),
        glue2(
            pair(Quadric, &[("l(1,1)", &[1, 1])]),
            &[1, 1],
            pair(Hirzebruch(2), &[("s", &[1, 0])]),
            &[1, 0],
        ),
        glue2(
            pair(Hirzebruch(1), &[("s", &[1, 0])]),
            &[1, 0],
            pair(Hirzebruch(1), &[("h", &[1, 1])]),
            &[1, 1],
        ),
        glue2(
            pair(Quadric, &[("l1", &[1, 0])]),
            &[1, 0],
            pair(Quadric, &[("l1", &[1, 0])]),
            &[1, 0],
        ),
        triangle,
    ]
}

fn contraction_row(fiber: &FiberComplex) -> Vec<ContractionType> {
    let mut tags: Vec<ContractionType> = fiber
        .components
        .iter()
        .filter_map(|c| c.payload.surface_pair())
        .map(classify_contraction)
        .collect();
    tags.sort_by_key(|t| t.rank());
    tags
}

fn triple_data(fiber: &FiberComplex) -> Vec<u32> {
    let mut counts: Vec<u32> = fiber
        .double_loci
        .iter()
        .map(|d| d.triple_points.unwrap_or(0))
        .collect();
    counts.sort();
    counts
}

#[test]
fn criterion_1_table_reproduction() {
    let (report, elapsed) = run_cli(&["classify-dp2", "--n-max", "4", "--json"]);
    let fibers = result_fibers(&report);
    let expected = expected_rows();
    let mut pass = fibers.len() == 6 && elapsed < Duration::from_secs(10);
    let mut detail = format!("{} fibers in {elapsed:?}", fibers.len());
    if pass {
        for (i, (got, want)) in fibers.iter().zip(&expected).enumerate() {
            let same_form = canonical_form(got) == canonical_form(want);
            let same_tags = contraction_row(got) == contraction_row(want);
            let same_triples = triple_data(got) == triple_data(want);
            if !(same_form && same_tags && same_triples) {
                pass = false;
                detail = format!(
                    "row {} mismatch: form {same_form}, tags {same_tags}, triples {same_triples}",
                    i + 1
                );
                break;
            }
        }
    }
    criterion("classification-reproduction", pass, detail);
}

#[test]
fn criterion_2_bound_stability() {
    let reference: Vec<String> = enumerate_dp2(&Dp2SearchConfig::new(5))
        .iter()
        .map(canonical_form)
        .collect();
    let stable = (6..=8).all(|n| {
        let got: Vec<String> = enumerate_dp2(&Dp2SearchConfig::new(n))
            .iter()
            .map(canonical_form)
            .collect();
        got == reference
    });
    let cert = justify_bound();
    let pass = stable && cert.bound == 5 && cert.verify();
    criterion(
        "bound-stability",
        pass,
        format!("bound {}, stable {stable}", cert.bound),
    );
}

#[test]
fn criterion_3_maximal_degeneration_uniqueness() {
    let (report, elapsed) = run_cli(&["max3-search", "--param-bound", "4", "--json"]);
    let solutions = report["results"].as_array().unwrap().clone();
    let mut pass = solutions.len() == 1 && elapsed < Duration::from_secs(60);
    let mut detail = format!("{} solutions in {elapsed:?}", solutions.len());
    if pass {
        let components: Vec<BundleComponent> =
            serde_json::from_value(solutions[0]["components"].clone()).unwrap();
        let expected = BundleComponent::C22 { n: 1, k: 1, m: 0 };
        pass &= components.len() == 4 && components.iter().all(|c| *c == expected);
        for c in &components {
            let inv = component_invariants(c).unwrap();
            pass &= inv.boundary_surfaces
                == vec![
                    SurfaceGeometry::Hirzebruch(1),
                    SurfaceGeometry::Hirzebruch(1),
                    SurfaceGeometry::Quadric,
                ];
        }
        let reference: Vec<String> = search_maximal(&Max3SearchConfig::new(4))
            .iter()
            .map(|s| canonical_form(&s.fiber))
            .collect();
        for bound in 5..=8 {
            let got: Vec<String> = search_maximal(&Max3SearchConfig::new(bound))
                .iter()
                .map(|s| canonical_form(&s.fiber))
                .collect();
            if got != reference {
                pass = false;
                detail = format!("bound {bound} diverges");
            }
        }
    }
    criterion("maximal-degeneration-uniqueness", pass, detail);
}

#[test]
fn criterion_4_displayed_equation_suite() {
    let mut mismatches = 0usize;
    let mut total = 0usize;
    let check = |mismatches: &mut usize,
                 total: &mut usize,
                 c: &BundleComponent,
                 slot: Slot,
                 surface: SurfaceGeometry,
                 coeffs: &[i64]| {
        *total += 1;
        let got = dss_partner_class(c, slot).unwrap();
        let want = DivisorClass::new(surface.normalized(), coeffs.to_vec()).unwrap();
        if got != want {
            *mismatches += 1;
        }
    };
    use SurfaceGeometry::*;
    for a1 in 0..=6 {
        for a2 in a1..=6 {
            let c = BundleComponent::D3 { a1, a2 };
            check(
                &mut mismatches,
                &mut total,
                &c,
                Slot::D12,
                Hirzebruch(a2 as u32),
                &[2, a2 - a1 + 1],
            );
            check(
                &mut mismatches,
                &mut total,
                &c,
                Slot::D13,
                Hirzebruch(a1 as u32),
                &[2, a1 - a2 + 1],
            );
            check(
                &mut mismatches,
                &mut total,
                &c,
                Slot::D14,
                ProjectivePlane,
                &[2],
            );
        }
    }
    for a in 0..=6 {
        let c = BundleComponent::C21 { a };
        check(
            &mut mismatches,
            &mut total,
            &c,
            Slot::D12,
            ProjectivePlane,
            &[2 - a],
        );
        check(
            &mut mismatches,
            &mut total,
            &c,
            Slot::D13,
            Hirzebruch(a as u32),
            &[1, 2],
        );
        check(
            &mut mismatches,
            &mut total,
            &c,
            Slot::D14,
            Hirzebruch(a as u32),
            &[1, 2],
        );
    }
    for slot in Slot::ALL {
        check(
            &mut mismatches,
            &mut total,
            &BundleComponent::E2,
            slot,
            match slot {
                Slot::D12 => ProjectivePlane,
                _ => Hirzebruch(1),
            },
            match slot {
                Slot::D12 => &[1],
                _ => &[1, 2],
            },
        );
    }
    for n in 0..=6 {
        for k in 0..=6 {
            for m in 0..=6 {
                let c = BundleComponent::C22 { n, k, m };
                check(
                    &mut mismatches,
                    &mut total,
                    &c,
                    Slot::D12,
                    Hirzebruch(n as u32),
                    &[1 - k, 1 - k * n - m],
                );
                check(
                    &mut mismatches,
                    &mut total,
                    &c,
                    Slot::D13,
                    Hirzebruch(k as u32),
                    &[1, 1],
                );
                check(
                    &mut mismatches,
                    &mut total,
                    &c,
                    Slot::D14,
                    Hirzebruch(m as u32),
                    &[1, 1 - n],
                );
            }
        }
    }
    criterion(
        "displayed-equation-suite",
        mismatches == 0,
        format!("{total} equations, {mismatches} mismatches"),
    );
}

mod locus_instances {
    use super::*;

    pub struct Lcg(pub u64);

    impl Lcg {
        fn next(&mut self) -> u64 {
            self.0 = self
                .0
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            self.0 >> 33
        }

        fn range(&mut self, lo: i64, hi: i64) -> i64 {
            lo + (self.next() % (hi - lo + 1) as u64) as i64
        }

        fn surface(&mut self) -> SurfaceGeometry {
            match self.range(0, 5) {
                0 => SurfaceGeometry::ProjectivePlane,
                1 => SurfaceGeometry::Quadric,
                n => SurfaceGeometry::Hirzebruch(n as u32 - 2),
            }
        }

        fn class(&mut self, surface: SurfaceGeometry) -> Vec<i64> {
            (0..surface.rank()).map(|_| self.range(-2, 3)).collect()
        }
    }

    /// A random two- or three-component fiber whose two triple-point
    /// storages (per-curve counts, incidence list) are coherent; the
    /// formula itself holds or fails at random.
    pub fn random_instance(rng: &mut Lcg) -> FiberComplex {
        let count = if rng.range(0, 1) == 0 { 2usize } else { 3 };
        let triple_points = if count == 3 {
            rng.range(0, 2) as u32
        } else {
            0
        };
        let surfaces: Vec<SurfaceGeometry> = (0..count).map(|_| rng.surface()).collect();
        let ids: Vec<String> = (0..count).map(|i| format!("F{}", i + 1)).collect();
        let mut loci = Vec::new();
        let mut boundaries: Vec<Vec<Vec<i64>>> = vec![Vec::new(); count];
        for i in 0..count {
            for j in i + 1..count {
                let ca = rng.class(surfaces[i]);
                let cb = rng.class(surfaces[j]);
                boundaries[i].push(ca.clone());
                boundaries[j].push(cb.clone());
                loci.push(DoubleLocus {
                    id: format!("D{}{}", i + 1, j + 1),
                    a: LocusSide {
                        component: ids[i].clone(),
                        class: ca,
                    },
                    b: LocusSide {
                        component: ids[j].clone(),
                        class: cb,
                    },
                    triple_points: Some(triple_points),
                    normal_a: None,
                    normal_b: None,
                    identification: None,
                });
            }
        }
        FiberComplex {
            fiber_dim: 2,
            components: (0..count)
                .map(|i| Component {
                    id: ids[i].clone(),
                    payload: ComponentPayload::Surface(SurfacePair {
                        surface: surfaces[i],
                        boundary: boundaries[i]
                            .iter()
                            .enumerate()
                            .map(|(b, coeffs)| BoundaryCurve {
                                label: format!("c{b}"),
                                class: DivisorClass::new(surfaces[i], coeffs.clone()).unwrap(),
                            })
                            .collect(),
                    }),
                })
                .collect(),
            double_loci: loci,
            triple_loci: (0..triple_points)
                .map(|_| TripleLocus {
                    components: ids.clone(),
                })
                .collect(),
            quadruple_points: 0,
        }
    }
}

#[test]
fn criterion_5_triple_point_equals_degree_form() {
    let mut rng = locus_instances::Lcg(20260808);
    let mut checked = 0usize;
    let mut disagreements = 0usize;
    while checked < 1000 {
        let fiber = locus_instances::random_instance(&mut rng);
        for locus in &fiber.double_loci {
            let a = check_triple_point(&fiber, locus).unwrap();
            let b = check_dss_degree(&fiber, locus).unwrap();
            if a != b {
                disagreements += 1;
            }
            checked += 1;
        }
    }
    criterion(
        "triple-point-vs-degree-form",
        disagreements == 0,
        format!("{checked} instances, {disagreements} disagreements"),
    );
}

#[test]
fn criterion_6_anticanonical_degrees() {
    let (report, _) = run_cli(&["classify-dp2", "--n-max", "4", "--json"]);
    let degrees: Vec<i64> = result_fibers(&report)
        .iter()
        .map(|f| snc_fano::snc_fiber::anticanonical_degree(f).unwrap())
        .collect();
    let pass = degrees == vec![9, 9, 8, 8, 8, 9];
    criterion("anticanonical-degrees", pass, format!("{degrees:?}"));
}

#[test]
fn criterion_7_simplex_theorem_at_data_level() {
    let mut pass = true;
    let mut detail = String::from("all engine fibers are simplices");
    let mut engine_fibers: Vec<FiberComplex> = Vec::new();
    for n_max in [0, 2, 4, 6] {
        engine_fibers.extend(enumerate_dp2(&Dp2SearchConfig::new(n_max)));
    }
    for sol in search_maximal(&Max3SearchConfig::new(4)) {
        engine_fibers.push(sol.fiber);
    }
    for dim in 1..=3u8 {
        for k in 0..=dim {
            engine_fibers.push(flag_degeneration(dim, k).unwrap());
        }
    }
    for fiber in &engine_fibers {
        let dc = build_dual_complex(fiber).unwrap();
        match dc.is_simplex() {
            Some(k) if k <= fiber.fiber_dim as usize => {}
            other => {
                pass = false;
                detail = format!("fiber with {:?} is not an admissible simplex", other);
            }
        }
    }
    // the negative fixture
    let hollow = std::fs::read_to_string(
        std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR"))
            .join("tests/fixtures/hollow_triangle.json"),
    )
    .unwrap();
    let hollow: FiberComplex = serde_json::from_str(&hollow).unwrap();
    assert!(validate_fiber(&hollow).is_valid());
    let dc = build_dual_complex(&hollow).unwrap();
    if dc.is_simplex().is_some() {
        pass = false;
        detail = "hollow triangle wrongly accepted".into();
    }
    criterion(
        "simplex-theorem-data-level",
        pass,
        format!("{} fibers; {detail}", engine_fibers.len()),
    );
}

#[test]
fn criterion_8_flag_cross_checks() {
    let classified = {
        let (report, _) = run_cli(&["classify-dp2", "--n-max", "4", "--json"]);
        result_fibers(&report)
    };
    let triangle_fiber = &classified[5];
    let flag22 = flag_degeneration(2, 2).unwrap();
    let mut pass = canonical_form(&flag22) == canonical_form(triangle_fiber);
    let mut detail = String::from("flag(2,2) matches the triangle fiber");

    let solutions = search_maximal(&Max3SearchConfig::new(4));
    let flag33 = flag_degeneration(3, 3).unwrap();
    if solutions.len() != 1 || canonical_form(&flag33) != canonical_form(&solutions[0].fiber) {
        pass = false;
        detail = "flag(3,3) does not match the unique solution".into();
    }

    for n in 1..=3u8 {
        for k in 0..=n {
            let fiber = flag_degeneration(n, k).unwrap();
            let dc = build_dual_complex(&fiber).unwrap();
            for m in 0..=k as usize {
                let expected =
                    (0..m + 1).fold(1usize, |acc, i| acc * (k as usize + 1 - i) / (i + 1));
                if dc.face_count(m) != expected {
                    pass = false;
                    detail = format!("flag({n},{k}) has wrong stratum count in dim {m}");
                }
            }
        }
    }
    criterion("flag-cross-checks", pass, detail);
}

#[test]
fn criterion_9_targeted_exclusions() {
    let run = |filter: &[CaseTag], base: Option<i64>| -> usize {
        let mut cfg = Max3SearchConfig::new(4);
        cfg.case_filter = Some(BTreeSet::from_iter(filter.iter().copied()));
        cfg.require_c2_2_base = base;
        search_maximal(&cfg).len()
    };
    let all_f = run(&[CaseTag::F], None);
    let d3_c21 = run(&[CaseTag::D3, CaseTag::C2_1], None);
    let c22_base0 = run(&[CaseTag::C2_2], Some(0));
    let pass = all_f == 0 && d3_c21 == 0 && c22_base0 == 0;
    criterion(
        "targeted-exclusions",
        pass,
        format!("all-F: {all_f}, D3+C2_1: {d3_c21}, C2_2 with base 0: {c22_base0}"),
    );
}
