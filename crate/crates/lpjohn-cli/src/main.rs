//! Command-line front end: parse function specs, run solves, p-sweeps,
//! variations and the validation suite, and serialize result documents.
//!
//! Exit codes: 0 success, 1 validation-suite failure, 2 invalid input,
//! 3 numerical failure.

use clap::{Args, Parser, Subcommand};
use lpjohn::error::{Error, ErrorKind};
use lpjohn::functions::{FunctionOptions, FunctionSpec, LogConcaveFunction};
use lpjohn::solver::{solve_ep, SolveOptions, SolverResult};
use lpjohn::validation::{builtin_corpus, run_suite, CorpusMember, SuiteConfig, SuiteReport};
use lpjohn::variation::{
    lp_first_variation, lp_first_variation_fd_richardson, sup_ratio_variation, VariationReport,
};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

/// Environment variable overriding the default points per axis
/// (a positive odd integer; an explicit --resolution wins).
const RESOLUTION_ENV: &str = "LPJOHN_RESOLUTION";

const EXIT_SUITE_FAILURE: u8 = 1;
const EXIT_INVALID_INPUT: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "lpjohn",
    about = "L_p John ellipsoids of log-concave functions",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Points per axis override (odd, >= 33).
    #[arg(long)]
    resolution: Option<usize>,
    /// Seed for all stochastic components.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Write the result document (JSON) here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the L_p John ellipsoid of one function.
    Solve {
        /// Function-spec document (JSON).
        #[arg(long)]
        input: PathBuf,
        /// Exponent p: a real in [1, 32] or "inf".
        #[arg(long)]
        p: String,
        /// Solver convergence threshold on the whitened moment residual.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Solve across a list of p values and emit a CSV table.
    Sweep {
        #[arg(long)]
        input: PathBuf,
        /// Comma-separated p list, e.g. "1,2,8,inf".
        #[arg(long = "p-list")]
        p_list: String,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run the inequality suite over a corpus.
    Validate {
        /// "builtin" or a path to a JSON corpus file.
        #[arg(long, default_value = "builtin")]
        corpus: String,
        /// Comma-separated ladder override, e.g. "1,2,inf".
        #[arg(long = "p-ladder")]
        p_ladder: Option<String>,
        /// Also write the flat CSV of records here.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Debug switch: distort every normalized solution by 10% and
        /// require the suite to notice.
        #[arg(long, default_value_t = false)]
        corrupt_solver: bool,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// First variation of the total mass of f along g.
    Variation {
        /// Function-spec document for f.
        #[arg(long)]
        f: PathBuf,
        /// Function-spec document for g.
        #[arg(long)]
        g: PathBuf,
        /// Exponent p: a real in [1, 32] or "inf".
        #[arg(long)]
        p: String,
        /// Also run the difference-quotient oracle and print both values.
        #[arg(long, default_value_t = false)]
        oracle: bool,
        #[command(flatten)]
        common: CommonOpts,
    },
}

#[derive(Serialize, Deserialize)]
struct Tolerances {
    solver_tol: f64,
    solver_theta: f64,
}

#[derive(Serialize, Deserialize)]
struct Provenance {
    resolution: Option<usize>,
    seed: u64,
    tolerances: Tolerances,
    wall_time_ms: u128,
}

#[derive(Serialize)]
#[serde(rename_all = "snake_case")]
enum Outputs {
    SolverResult(SolverResult),
    Sweep(Vec<SweepRow>),
    VariationReport {
        report: VariationReport,
        #[serde(skip_serializing_if = "Option::is_none")]
        oracle_quotient: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        oracle_relative_gap: Option<f64>,
    },
    SuiteReport(SuiteReport),
}

#[derive(Serialize, Clone)]
struct SweepRow {
    p: String,
    mass: f64,
    delta_bar: f64,
    kkt_residual: f64,
    iterations: usize,
    converged: bool,
}

#[derive(Serialize)]
struct ResultDocument {
    schema_version: String,
    command: String,
    input_spec: serde_json::Value,
    outputs: Outputs,
    provenance: Provenance,
}

enum CliError {
    Input(String),
    Numerical(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e.kind() {
            ErrorKind::Input => CliError::Input(e.to_string()),
            ErrorKind::Numerical => CliError::Numerical(e.to_string()),
        }
    }
}

impl CliError {
    fn report(&self) -> u8 {
        match self {
            CliError::Input(msg) => {
                eprintln!("error (invalid input): {msg}");
                EXIT_INVALID_INPUT
            }
            CliError::Numerical(msg) => {
                eprintln!("error (numerical): {msg}");
                EXIT_NUMERICAL
            }
        }
    }
}

fn parse_p(text: &str) -> Result<f64, CliError> {
    if text.trim() == "inf" {
        return Ok(f64::INFINITY);
    }
    let p: f64 = text
        .trim()
        .parse()
        .map_err(|_| CliError::Input(format!("p = {text:?} is not a number or \"inf\"")))?;
    if !(p.is_finite() && (1.0..=32.0).contains(&p)) {
        return Err(CliError::Input(format!(
            "p = {p} outside [1, 32] (use \"inf\" for the limit problem)"
        )));
    }
    Ok(p)
}

fn parse_p_list(text: &str) -> Result<Vec<f64>, CliError> {
    let items: Vec<&str> = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect();
    if items.is_empty() {
        return Err(CliError::Input("empty p list".into()));
    }
    items.into_iter().map(parse_p).collect()
}

fn p_display(p: f64) -> String {
    if p.is_infinite() {
        "inf".into()
    } else {
        format!("{p}")
    }
}

fn effective_resolution(explicit: Option<usize>) -> Result<Option<usize>, CliError> {
    if explicit.is_some() {
        return validate_resolution(explicit);
    }
    match std::env::var(RESOLUTION_ENV) {
        Ok(text) => {
            let value: usize = text.parse().map_err(|_| {
                CliError::Input(format!(
                    "{RESOLUTION_ENV}={text:?} is not a positive integer"
                ))
            })?;
            validate_resolution(Some(value))
        }
        Err(_) => Ok(None),
    }
}

fn validate_resolution(r: Option<usize>) -> Result<Option<usize>, CliError> {
    if let Some(m) = r {
        if m % 2 == 0 || m < 33 {
            return Err(CliError::Input(format!(
                "resolution {m} must be an odd integer >= 33"
            )));
        }
    }
    Ok(r)
}

fn load_spec(path: &Path) -> Result<(FunctionSpec, serde_json::Value), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let spec = FunctionSpec::from_json(&text)?;
    let echo: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("spec is not JSON: {e}")))?;
    Ok((spec, echo))
}

fn build_function(
    spec: &FunctionSpec,
    resolution: Option<usize>,
) -> Result<LogConcaveFunction, CliError> {
    let opts = FunctionOptions {
        points_per_axis: resolution,
        half_width: None,
    };
    Ok(spec.build(&opts)?)
}

fn write_document(doc: &ResultDocument, out: Option<&Path>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(doc)
        .map_err(|e| CliError::Numerical(format!("serialization failed: {e}")))?;
    match out {
        Some(path) => std::fs::write(path, text.as_bytes())
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => Ok(()),
    }
}

fn provenance(resolution: Option<usize>, seed: u64, tol: f64, started: Instant) -> Provenance {
    Provenance {
        resolution,
        seed,
        tolerances: Tolerances {
            solver_tol: tol,
            solver_theta: SolveOptions::default().theta,
        },
        wall_time_ms: started.elapsed().as_millis(),
    }
}

fn eigenvalue_summary(values: &[f64]) -> String {
    let items: Vec<String> = values.iter().map(|l| format!("{l:.6}")).collect();
    format!("[{}]", items.join(", "))
}

fn cmd_solve(input: &Path, p_text: &str, tol: f64, common: &CommonOpts) -> Result<(), CliError> {
    let started = Instant::now();
    let p = parse_p(p_text)?;
    let resolution = effective_resolution(common.resolution)?;
    let (spec, echo) = load_spec(input)?;
    let f = build_function(&spec, resolution)?;
    let opts = SolveOptions {
        tol,
        ..SolveOptions::default()
    };
    let result = solve_ep(&f, p, &opts)?;
    if !result.converged {
        return Err(CliError::Numerical(format!(
            "solver did not converge (residual {:.3e} after {} iterations)",
            result.kkt_residual, result.iterations
        )));
    }
    println!(
        "p={} Q_bar eigenvalues {} delta_bar={:.8} mass={:.8} residual={:.3e} iterations={}",
        p_display(p),
        eigenvalue_summary(&result.q_bar.eigenvalues()),
        result.delta_bar,
        result.ellipsoid.mass(),
        result.kkt_residual,
        result.iterations
    );
    let doc = ResultDocument {
        schema_version: "1".into(),
        command: format!("solve --p {}", p_display(p)),
        input_spec: echo,
        outputs: Outputs::SolverResult(result),
        provenance: provenance(resolution, common.seed, tol, started),
    };
    write_document(&doc, common.out.as_deref())
}

fn cmd_sweep(input: &Path, p_list: &str, common: &CommonOpts) -> Result<(), CliError> {
    let started = Instant::now();
    let ps = parse_p_list(p_list)?;
    let resolution = effective_resolution(common.resolution)?;
    let (spec, echo) = load_spec(input)?;
    let f = build_function(&spec, resolution)?;

    let mut rows = Vec::new();
    let mut failures = 0usize;
    println!("p,mass,delta_bar,kkt_residual,iterations,converged");
    for &p in &ps {
        match solve_ep(&f, p, &SolveOptions::default()) {
            Ok(r) => {
                println!(
                    "{},{:.12e},{:.12e},{:.3e},{},{}",
                    p_display(p),
                    r.ellipsoid.mass(),
                    r.delta_bar,
                    r.kkt_residual,
                    r.iterations,
                    r.converged
                );
                rows.push(SweepRow {
                    p: p_display(p),
                    mass: r.ellipsoid.mass(),
                    delta_bar: r.delta_bar,
                    kkt_residual: r.kkt_residual,
                    iterations: r.iterations,
                    converged: r.converged,
                });
            }
            Err(e) => {
                eprintln!("p={}: {e}", p_display(p));
                failures += 1;
            }
        }
    }
    let doc = ResultDocument {
        schema_version: "1".into(),
        command: format!("sweep --p-list {p_list}"),
        input_spec: echo,
        outputs: Outputs::Sweep(rows.clone()),
        provenance: provenance(resolution, common.seed, 1e-6, started),
    };
    write_document(&doc, common.out.as_deref())?;
    if failures > 0 && rows.is_empty() {
        return Err(CliError::Numerical("every solve in the sweep failed".into()));
    }
    if failures > 0 {
        eprintln!("warning: {failures} sweep entries failed; partial results written");
    }
    Ok(())
}

#[derive(Deserialize)]
struct CorpusFileEntry {
    name: String,
    spec: FunctionSpec,
}

fn load_corpus(
    name: &str,
    resolution: Option<usize>,
) -> Result<(Vec<CorpusMember>, serde_json::Value), CliError> {
    let opts = FunctionOptions {
        points_per_axis: resolution,
        half_width: None,
    };
    if name == "builtin" {
        let corpus = builtin_corpus(&opts)?;
        return Ok((corpus, serde_json::Value::String("builtin".into())));
    }
    let path = Path::new(name);
    if !path.exists() {
        return Err(CliError::Input(format!(
            "unknown corpus {name:?}: not \"builtin\" and no such file"
        )));
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {name}: {e}")))?;
    let entries: Vec<CorpusFileEntry> = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("corpus file parse error: {e}")))?;
    if entries.is_empty() {
        return Err(CliError::Input("corpus file lists no functions".into()));
    }
    let echo: serde_json::Value = serde_json::from_str(&text).unwrap_or_default();
    let mut corpus = Vec::new();
    for entry in entries {
        corpus.push(CorpusMember {
            name: entry.name,
            f: entry.spec.build(&opts)?,
        });
    }
    Ok((corpus, echo))
}

fn cmd_validate(
    corpus_name: &str,
    p_ladder: Option<&str>,
    csv: Option<&Path>,
    corrupt: bool,
    common: &CommonOpts,
) -> Result<bool, CliError> {
    let started = Instant::now();
    let resolution = effective_resolution(common.resolution)?;
    let ladder = match p_ladder {
        Some(text) => parse_p_list(text)?,
        None => lpjohn::validation::default_p_ladder(),
    };
    let (corpus, echo) = load_corpus(corpus_name, resolution)?;
    let config = SuiteConfig {
        p_ladder: ladder,
        seed: common.seed,
        corrupt_solver: corrupt,
        resolution,
    };
    let report = run_suite(&corpus, &config);
    println!(
        "{} gate records passed, {} failed ({} total records)",
        report.gates_passed,
        report.gates_failed,
        report.records.len()
    );
    for r in report.records.iter().filter(|r| !r.pass) {
        println!(
            "FAIL {} [{}] p={} lhs={:.6e} rhs={:.6e} margin={:.3e}",
            r.name, r.function, r.p, r.lhs, r.rhs, r.margin
        );
    }
    if let Some(path) = csv {
        std::fs::write(path, report.to_csv())
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
    }
    let all_passed = report.all_passed();
    let doc = ResultDocument {
        schema_version: "1".into(),
        command: format!("validate --corpus {corpus_name}"),
        input_spec: echo,
        outputs: Outputs::SuiteReport(report),
        provenance: provenance(resolution, common.seed, 1e-6, started),
    };
    write_document(&doc, common.out.as_deref())?;
    Ok(all_passed)
}

fn cmd_variation(
    f_path: &Path,
    g_path: &Path,
    p_text: &str,
    oracle: bool,
    common: &CommonOpts,
) -> Result<(), CliError> {
    let started = Instant::now();
    let resolution = effective_resolution(common.resolution)?;
    let (f_spec, f_echo) = load_spec(f_path)?;
    let (g_spec, g_echo) = load_spec(g_path)?;
    let f = build_function(&f_spec, resolution)?;
    let g = build_function(&g_spec, resolution)?;

    let infinite = p_text.trim() == "inf";
    let (report, quotient) = if infinite {
        if oracle {
            return Err(CliError::Input(
                "--oracle applies to finite p only (the quotient needs Asplund sums)".into(),
            ));
        }
        let sup = sup_ratio_variation(&f, &g)?;
        (
            VariationReport {
                p: f64::INFINITY,
                delta_jp: None,
                normalized: sup.value,
                entropy_mass_used: None,
                cloud_size: 0,
                excluded_mass: 0.0,
            },
            None,
        )
    } else {
        let p = parse_p(p_text)?;
        let report = lp_first_variation(&f, &g, p)?;
        let quotient = if oracle {
            Some(lp_first_variation_fd_richardson(&f, &g, p, 1e-2)?)
        } else {
            None
        };
        (report, quotient)
    };

    match (&report.delta_jp, quotient) {
        (Some(delta), Some(q)) => {
            let gap = (q - delta).abs() / delta.abs().max(1e-300);
            println!(
                "p={} delta_J={:.8} normalized={:.8} quotient={:.8} relative_gap={:.3e}",
                p_display(report.p),
                delta,
                report.normalized,
                q,
                gap
            );
        }
        (Some(delta), None) => println!(
            "p={} delta_J={:.8} normalized={:.8} cloud={} excluded_mass={:.3e}",
            p_display(report.p),
            delta,
            report.normalized,
            report.cloud_size,
            report.excluded_mass
        ),
        (None, _) => println!("p=inf sup_ratio={}", report.normalized),
    }

    let gap = quotient.map(|q| {
        let delta = report.delta_jp.unwrap_or(f64::NAN);
        (q - delta).abs() / delta.abs().max(1e-300)
    });
    let doc = ResultDocument {
        schema_version: "1".into(),
        command: format!("variation --p {p_text}"),
        input_spec: serde_json::json!({ "f": f_echo, "g": g_echo }),
        outputs: Outputs::VariationReport {
            report,
            oracle_quotient: quotient,
            oracle_relative_gap: gap,
        },
        provenance: provenance(resolution, common.seed, 1e-6, started),
    };
    write_document(&doc, common.out.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome: Result<bool, CliError> = match &cli.command {
        Command::Solve {
            input,
            p,
            tol,
            common,
        } => cmd_solve(input, p, *tol, common).map(|_| true),
        Command::Sweep {
            input,
            p_list,
            common,
        } => cmd_sweep(input, p_list, common).map(|_| true),
        Command::Validate {
            corpus,
            p_ladder,
            csv,
            corrupt_solver,
            common,
        } => cmd_validate(
            corpus,
            p_ladder.as_deref(),
            csv.as_deref(),
            *corrupt_solver,
            common,
        ),
        Command::Variation {
            f,
            g,
            p,
            oracle,
            common,
        } => cmd_variation(f, g, p, *oracle, common).map(|_| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_SUITE_FAILURE),
        Err(e) => ExitCode::from(e.report()),
    }
}
