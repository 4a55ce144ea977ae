//! Command-line front end: fiber ingestion and verification, the
//! two-dimensional classification run, the maximal three-dimensional search
//! and the flag-degeneration generator.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 on input
//! or usage errors.

mod render;
mod report;

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use snc_fano::dp2_classify::{enumerate_dp2, ComponentFilter, Dp2SearchConfig};
use snc_fano::fano3_bundles::CaseTag;
use snc_fano::max3_search::{flag_degeneration, search_maximal, Max3SearchConfig};
use snc_fano::snc_fiber::{
    anticanonical_degree, build_dual_complex, check_d_semistability_surface, check_triple_point,
    validate_fiber, FiberComplex,
};

use report::Report;

#[derive(Parser)]
#[command(
    name = "snc-fano",
    about = "Verify and classify snc degenerate fibers of Fano families",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Clone, Copy)]
struct OutputArgs {
    /// Emit the full report as one JSON line.
    #[arg(long, global = true, conflicts_with = "table")]
    json: bool,
    /// Render results as a plain-text table.
    #[arg(long, global = true)]
    table: bool,
    /// Print nothing; the exit code carries the verdict.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a fiber from JSON and run every applicable verifier.
    CheckFiber { path: PathBuf },
    /// Enumerate the two-dimensional semistable fibers within an index bound.
    ClassifyDp2 {
        #[arg(long)]
        n_max: u32,
        #[arg(long, value_enum, default_value_t = ComponentsArg::Both)]
        components: ComponentsArg,
    },
    /// Search four-component three-dimensional fibers for d-semistable ones.
    Max3Search {
        #[arg(long, default_value_t = 4)]
        param_bound: i64,
        /// Comma-separated case tags: F, E2, D3, C2_1, C2_2.
        #[arg(long)]
        cases: Option<String>,
        /// Keep only tuples containing a C2_2 component with this base index.
        #[arg(long)]
        require_c2_2_base: Option<i64>,
    },
    /// Emit the flag blow-up fiber with a k-simplex dual complex.
    FlagDegeneration {
        #[arg(long)]
        dim: u8,
        #[arg(long)]
        k: u8,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ComponentsArg {
    #[value(name = "2")]
    Two,
    #[value(name = "3")]
    Three,
    Both,
}

impl From<ComponentsArg> for ComponentFilter {
    fn from(value: ComponentsArg) -> Self {
        match value {
            ComponentsArg::Two => ComponentFilter::Two,
            ComponentsArg::Three => ComponentFilter::Three,
            ComponentsArg::Both => ComponentFilter::Both,
        }
    }
}

/// Input-side failure: reported on stderr with exit code 2.
struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

fn main() -> ExitCode {
    if let Err(e) = configure_threads() {
        eprintln!("error: {}", e.0);
        return ExitCode::from(2);
    }
    let cli = Cli::parse();
    let (report, table) = match run(&cli.command) {
        Ok(pair) => pair,
        Err(e) => {
            eprintln!("error: {}", e.0);
            return ExitCode::from(2);
        }
    };
    if !cli.output.quiet {
        if cli.output.json {
            print!("{}", report.to_json_line());
        } else if cli.output.table {
            print!("{}", table.unwrap_or_else(|| report.render_text()));
        } else {
            print!("{}", report.render_text());
        }
    }
    ExitCode::from(u8::try_from(report.exit_status).unwrap_or(1))
}

/// SNC_FANO_THREADS caps the worker count; 0 or unset means automatic.
fn configure_threads() -> Result<(), InputError> {
    match std::env::var("SNC_FANO_THREADS") {
        Err(_) => Ok(()),
        Ok(raw) => {
            let n: usize = raw.parse().map_err(|_| {
                InputError(format!("SNC_FANO_THREADS must be an integer, got `{raw}`"))
            })?;
            if n > 0 {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .map_err(|e| InputError(e.to_string()))?;
            }
            Ok(())
        }
    }
}

fn run(command: &Command) -> Result<(Report, Option<String>), InputError> {
    match command {
        Command::CheckFiber { path } => cmd_check_fiber(path),
        Command::ClassifyDp2 { n_max, components } => cmd_classify_dp2(*n_max, *components),
        Command::Max3Search {
            param_bound,
            cases,
            require_c2_2_base,
        } => cmd_max3(*param_bound, cases.as_deref(), *require_c2_2_base),
        Command::FlagDegeneration { dim, k } => cmd_flag(*dim, *k),
    }
}

fn cmd_check_fiber(path: &PathBuf) -> Result<(Report, Option<String>), InputError> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))?;
    let mut deserializer = serde_json::Deserializer::from_str(&raw);
    let fiber: FiberComplex = serde_path_to_error::deserialize(&mut deserializer).map_err(|e| {
        let inner = e.inner();
        InputError(format!(
            "invalid fiber JSON at line {} column {} (field path `{}`): {inner}",
            inner.line(),
            inner.column(),
            e.path()
        ))
    })?;

    let mut report = Report::new(format!("check-fiber {}", path.display()));
    let validation = validate_fiber(&fiber);
    report.check(
        "validate",
        validation.is_valid(),
        if validation.is_valid() {
            None
        } else {
            Some(validation.to_string().replace('\n', "; "))
        },
    );
    if validation.is_valid() {
        let dc = build_dual_complex(&fiber).expect("validated fiber");
        match dc.is_simplex() {
            Some(k) => {
                report.check("is_simplex", true, Some(format!("Delta^{k}")));
                report.check(
                    "simplex_dimension_bound",
                    k <= fiber.fiber_dim as usize,
                    Some(format!("{k} <= {}", fiber.fiber_dim)),
                );
            }
            None => report.check("is_simplex", false, Some("not a simplex".into())),
        }
        match fiber.fiber_dim {
            2 => {
                for locus in &fiber.double_loci {
                    let pass =
                        check_triple_point(&fiber, locus).map_err(|e| InputError(e.to_string()))?;
                    report.check(format!("triple_point[{}]", locus.id), pass, None);
                }
                let degree = anticanonical_degree(&fiber).map_err(|e| InputError(e.to_string()))?;
                report.check("anticanonical_degree", true, Some(degree.to_string()));
            }
            3 => {
                for locus in &fiber.double_loci {
                    let pass = check_d_semistability_surface(&fiber, locus)
                        .map_err(|e| InputError(e.to_string()))?;
                    report.check(format!("d_semistability[{}]", locus.id), pass, None);
                }
            }
            _ => {}
        }
    }
    report.attach_results(&vec![&fiber]);
    Ok((report, None))
}

fn cmd_classify_dp2(
    n_max: u32,
    components: ComponentsArg,
) -> Result<(Report, Option<String>), InputError> {
    let cfg = Dp2SearchConfig {
        n_max,
        components: components.into(),
        dedup: true,
    };
    let fibers = enumerate_dp2(&cfg);
    let mut report = Report::new(format!(
        "classify-dp2 --n-max {n_max} --components {}",
        match components {
            ComponentsArg::Two => "2",
            ComponentsArg::Three => "3",
            ComponentsArg::Both => "both",
        }
    ));
    report.check(
        "enumeration",
        true,
        Some(format!("{} fibers", fibers.len())),
    );
    for (i, fiber) in fibers.iter().enumerate() {
        let valid = validate_fiber(fiber).is_valid();
        let simplex = build_dual_complex(fiber)
            .ok()
            .and_then(|dc| dc.is_simplex())
            .is_some();
        let balanced = fiber
            .double_loci
            .iter()
            .all(|d| check_triple_point(fiber, d).unwrap_or(false));
        report.check(
            format!("verify[{i}]"),
            valid && simplex && balanced,
            Some(format!(
                "degree {}",
                anticanonical_degree(fiber).unwrap_or(0)
            )),
        );
    }
    report.attach_results(&fibers);
    let table = render::dp2_table(&fibers);
    Ok((report, Some(table)))
}

fn parse_cases(raw: &str) -> Result<BTreeSet<CaseTag>, InputError> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            CaseTag::parse(s).ok_or_else(|| {
                InputError(format!(
                    "unknown case tag `{s}` (expected F, E2, D3, C2_1 or C2_2)"
                ))
            })
        })
        .collect()
}

fn cmd_max3(
    param_bound: i64,
    cases: Option<&str>,
    require_c2_2_base: Option<i64>,
) -> Result<(Report, Option<String>), InputError> {
    if param_bound < 1 {
        return Err(InputError(format!(
            "--param-bound must be at least 1, got {param_bound}"
        )));
    }
    let mut cfg = Max3SearchConfig::new(param_bound);
    if let Some(raw) = cases {
        cfg.case_filter = Some(parse_cases(raw)?);
    }
    cfg.require_c2_2_base = require_c2_2_base;
    let solutions = search_maximal(&cfg);

    let mut command = format!("max3-search --param-bound {param_bound}");
    if let Some(raw) = cases {
        command.push_str(&format!(" --cases {raw}"));
    }
    if let Some(base) = require_c2_2_base {
        command.push_str(&format!(" --require-c2-2-base {base}"));
    }
    let mut report = Report::new(command);
    report.check(
        "search",
        true,
        Some(format!("{} solutions", solutions.len())),
    );
    for (i, sol) in solutions.iter().enumerate() {
        let all_pass = sol.certificate.iter().all(|c| c.pass);
        let simplex = build_dual_complex(&sol.fiber)
            .ok()
            .and_then(|dc| dc.is_simplex())
            == Some(3);
        report.check(
            format!("verify[{i}]"),
            all_pass && simplex,
            Some(
                sol.components
                    .iter()
                    .map(|c| c.describe())
                    .collect::<Vec<_>>()
                    .join(" + "),
            ),
        );
    }
    report.attach_results(&solutions);
    let table = render::max3_table(&solutions);
    Ok((report, Some(table)))
}

fn cmd_flag(dim: u8, k: u8) -> Result<(Report, Option<String>), InputError> {
    let fiber = flag_degeneration(dim, k).map_err(|e| InputError(e.to_string()))?;
    let mut report = Report::new(format!("flag-degeneration --dim {dim} --k {k}"));
    let validation = validate_fiber(&fiber);
    report.check("validate", validation.is_valid(), None);
    let dc = build_dual_complex(&fiber).map_err(|e| InputError(e.to_string()))?;
    report.check(
        "is_simplex",
        dc.is_simplex() == Some(k as usize),
        Some(format!("Delta^{k}")),
    );
    let counts_ok = (0..=k as usize).all(|m| {
        let expected = (0..m + 1).fold(1usize, |acc, i| acc * (k as usize + 1 - i) / (i + 1));
        dc.face_count(m) == expected
    });
    report.check("stratum_counts", counts_ok, None);
    report.attach_results(&vec![&fiber]);
    Ok((report, None))
}
