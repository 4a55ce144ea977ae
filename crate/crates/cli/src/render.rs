//! Plain-text table renderings of classification output.

use snc_fano::fano3_bundles::component_invariants;
use snc_fano::max3_search::MaxSolution;
use snc_fano::snc_fiber::{
    anticanonical_degree, classify_contraction, ContractionType, FiberComplex,
};

fn pad(s: &str, width: usize) -> String {
    format!("{s:<width$}")
}

/// One row per fiber: components, contraction targets, and the degree of the
/// generic fiber with a name when the degree determines it. Degree 9 is the
/// plane; degree 8 is the quadric when the fiber contains one and the first
/// Hirzebruch surface otherwise.
type DisplayPart = (ContractionType, (u8, u32), Vec<Vec<i64>>, String);

pub fn dp2_table(fibers: &[FiberComplex]) -> String {
    let mut rows: Vec<[String; 4]> = vec![[
        "#".into(),
        "components".into(),
        "contractions".into(),
        "X_eta".into(),
    ]];
    for (i, fiber) in fibers.iter().enumerate() {
        let mut parts: Vec<DisplayPart> = fiber
            .components
            .iter()
            .filter_map(|c| c.payload.surface_pair())
            .map(|p| {
                let mut classes: Vec<Vec<i64>> = p
                    .boundary
                    .iter()
                    .map(|b| b.class.coeffs().to_vec())
                    .collect();
                classes.sort();
                (
                    classify_contraction(p),
                    p.surface.normalized().order_key(),
                    classes,
                    p.describe(),
                )
            })
            .collect();
        parts.sort_by_key(|(t, surface, classes, _)| (t.rank(), *surface, classes.clone()));
        let components = parts
            .iter()
            .map(|(_, _, _, d)| d.clone())
            .collect::<Vec<_>>()
            .join(" u ");
        let contractions = parts
            .iter()
            .map(|(t, _, _, _)| format!("{t} -> {}", t.target()))
            .collect::<Vec<_>>()
            .join("; ");
        let degree = anticanonical_degree(fiber).unwrap_or(0);
        let has_quadric = fiber.components.iter().any(|c| {
            c.payload.surface_pair().is_some_and(|p| {
                p.surface.normalized() == snc_fano::pic_surfaces::SurfaceGeometry::Quadric
            })
        });
        let name = match degree {
            9 => "P2".to_string(),
            8 if has_quadric => "P1xP1".to_string(),
            8 => "F1".to_string(),
            _ => "?".to_string(),
        };
        rows.push([
            (i + 1).to_string(),
            components,
            contractions,
            format!("{name} (degree {degree})"),
        ]);
    }
    layout(rows)
}

pub fn max3_table(solutions: &[MaxSolution]) -> String {
    let mut rows: Vec<[String; 4]> = vec![[
        "#".into(),
        "components".into(),
        "boundary surfaces".into(),
        "double surfaces".into(),
    ]];
    for (i, sol) in solutions.iter().enumerate() {
        let components = sol
            .components
            .iter()
            .map(|c| c.describe())
            .collect::<Vec<_>>()
            .join(" + ");
        let boundaries = sol
            .components
            .first()
            .and_then(|c| component_invariants(c).ok())
            .map(|inv| {
                inv.boundary_surfaces
                    .iter()
                    .map(|s| s.name())
                    .collect::<Vec<_>>()
                    .join(", ")
            })
            .unwrap_or_default();
        let mut loci: Vec<String> = sol
            .certificate
            .iter()
            .map(|c| format!("{} ({})", c.surface.name(), c.identification.as_str()))
            .collect();
        loci.sort();
        rows.push([(i + 1).to_string(), components, boundaries, loci.join(", ")]);
    }
    layout(rows)
}

fn layout<const N: usize>(rows: Vec<[String; N]>) -> String {
    let mut widths = [0usize; N];
    for row in &rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    for row in &rows {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(i, cell)| pad(cell, widths[i]))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}
