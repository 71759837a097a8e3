//! Command-line front door: spectra, module blueprints, and full
//! oracle-versus-formula verification runs.
//!
//! Exit codes: 0 all checks pass, 1 a verification check failed, 2 usage or
//! input error, 3 domain error (inadmissible parameter).

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use terwilliger::arrays::{self, IntersectionArray};
use terwilliger::config::{OracleConfig, Tolerances, DEFAULT_SEED};
use terwilliger::modules::{
    blueprint_endpoint0, blueprint_endpoint1, blueprint_endpoint2, classify_eta, ModuleError,
};
use terwilliger::oracle::verify_drg;
use terwilliger::pipeline::{builtin_suite, resolve_graph, verify_array, verify_graph};
use terwilliger::polyfams::PolyError;
use terwilliger::scalar::{parse_rat, rat_str, Scalar};
use terwilliger::spectra::{self, AnySpectrum};

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_DOMAIN: u8 = 3;

#[derive(Parser)]
#[command(
    name = "terw",
    version,
    about = "Verification workbench for bipartite distance-regular graphs and their subconstituent algebras"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Eigenvalues and multiplicities of an array or graph, with the
    /// eigenvalue facts checked.
    Spectrum(SpectrumArgs),
    /// Closed-form module blueprint for an endpoint (and local eigenvalue).
    Blueprint(BlueprintArgs),
    /// Full verification: identity suites, decomposition, blueprint
    /// comparisons, multiplicity audit.
    Verify(VerifyArgs),
}

#[derive(Args, Clone)]
struct SourceArgs {
    /// Graph spec: builtin:hypercube:D, builtin:doubled_odd:K, edgelist:PATH,
    /// or array:PATH.
    #[arg(long)]
    graph: Option<String>,
    /// Path to an intersection-array JSON file {"D":., "b":[..], "c":[..]}.
    #[arg(long)]
    array: Option<String>,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, default_value = "table")]
    format: String,
}

#[derive(Args)]
struct BlueprintArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Module endpoint: 0, 1, or 2.
    #[arg(long)]
    endpoint: usize,
    /// Local eigenvalue; required with --endpoint 2. Accepts "p/q" or decimals.
    #[arg(long)]
    eta: Option<String>,
    #[arg(long, default_value = "table")]
    format: String,
}

#[derive(Args)]
struct VerifyArgs {
    /// Graph spec as in `spectrum`, or "all" for the builtin suite.
    #[arg(long)]
    graph: Option<String>,
    /// Verify an array only (no oracle): path to JSON.
    #[arg(long)]
    array: Option<String>,
    /// Base vertex index, or "all".
    #[arg(long, default_value = "0")]
    vertex: String,
    /// Seed for the decomposition's reproducible basis choices.
    #[arg(long)]
    seed: Option<u64>,
    /// Tolerance scale factor applied to every float bound.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value = "table")]
    format: String,
}

/// Defaults loaded from the JSON file named by `TERW_CONFIG`, when set.
#[derive(Default, serde::Deserialize)]
struct EnvConfig {
    seed: Option<u64>,
    tol: Option<f64>,
}

fn env_config() -> Result<EnvConfig, String> {
    match std::env::var("TERW_CONFIG") {
        Ok(path) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| format!("cannot read TERW_CONFIG file {path}: {e}"))?;
            serde_json::from_str(&text).map_err(|e| format!("bad TERW_CONFIG JSON: {e}"))
        }
        Err(_) => Ok(EnvConfig::default()),
    }
}

fn fail(code: u8, message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(code)
}

fn load_array(path: &str) -> Result<IntersectionArray, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}"))?;
    serde_json::from_str(&text).map_err(|e| format!("bad array JSON in {path}: {e}"))
}

/// Resolves `--graph`/`--array` flags to an intersection array, going through
/// the distance-regularity check when a graph was named.
fn resolve_array(source: &SourceArgs) -> Result<IntersectionArray, (u8, String)> {
    let arr = match (&source.graph, &source.array) {
        (Some(spec), None) => {
            if let Some(path) = spec.strip_prefix("array:") {
                load_array(path).map_err(|e| (EXIT_USAGE, e))?
            } else {
                let g = resolve_graph(spec).map_err(|e| (EXIT_USAGE, e))?;
                verify_drg(&g).map_err(|e| (EXIT_CHECK_FAILED, e.to_string()))?
            }
        }
        (None, Some(path)) => load_array(path).map_err(|e| (EXIT_USAGE, e))?,
        _ => {
            return Err((
                EXIT_USAGE,
                "exactly one of --graph or --array is required".into(),
            ))
        }
    };
    let validation = arrays::validate(&arr);
    if !validation.all_pass() {
        let first = validation.first_failure().unwrap();
        return Err((
            EXIT_CHECK_FAILED,
            format!(
                "array validation failed at \"{}\": {}",
                first.name, first.detail
            ),
        ));
    }
    Ok(arr)
}

fn cmd_spectrum(args: &SpectrumArgs) -> ExitCode {
    let arr = match resolve_array(&args.source) {
        Ok(a) => a,
        Err((code, msg)) => return fail(code, msg),
    };
    let any = match spectra::spectrum(&arr) {
        Ok(s) => s,
        Err(e) => return fail(EXIT_CHECK_FAILED, e),
    };
    let (json, checks) = match &any {
        AnySpectrum::Exact(spec) => (spec.to_json(), spectra::verify_spectral_lemmas(&arr, spec)),
        AnySpectrum::Approx(spec) => (spec.to_json(), spectra::verify_spectral_lemmas(&arr, spec)),
    };

    if args.format == "json" {
        let out = serde_json::json!({
            "array": arr,
            "spectrum": json,
            "checks": checks,
            "all_pass": checks.all_pass(),
        });
        println!("{}", serde_json::to_string_pretty(&out).unwrap());
    } else {
        println!("array: {}", arr.display_name());
        match &any {
            AnySpectrum::Exact(spec) => {
                println!("{:>6} {:>12} {:>12}", "h", "theta_h", "m_h");
                for (h, (t, m)) in spec.theta.iter().zip(&spec.m).enumerate() {
                    println!("{h:>6} {:>12} {:>12}", rat_str(t), rat_str(m));
                }
            }
            AnySpectrum::Approx(spec) => {
                println!("{:>6} {:>18} {:>18}", "h", "theta_h", "m_h");
                for (h, (t, m)) in spec.theta.iter().zip(&spec.m).enumerate() {
                    println!("{h:>6} {t:>18.12} {m:>18.12}");
                }
            }
        }
        print!("{checks}");
    }
    if checks.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CHECK_FAILED)
    }
}

fn module_error_code(e: &ModuleError) -> u8 {
    match e {
        ModuleError::OutOfRangeEta { .. } => EXIT_DOMAIN,
        ModuleError::CaseParameterMismatch(_) => EXIT_DOMAIN,
        ModuleError::Poly(PolyError::InadmissibleTheta { .. }) => EXIT_DOMAIN,
        ModuleError::Poly(_) => EXIT_CHECK_FAILED,
    }
}

fn cmd_blueprint(args: &BlueprintArgs) -> ExitCode {
    if args.endpoint > 2 {
        return fail(EXIT_USAGE, "endpoint must be 0, 1, or 2");
    }
    if args.endpoint == 2 && args.eta.is_none() {
        return fail(EXIT_USAGE, "--eta is required with --endpoint 2");
    }
    let arr = match resolve_array(&args.source) {
        Ok(a) => a,
        Err((code, msg)) => return fail(code, msg),
    };

    let json = match spectra::spectrum(&arr) {
        Ok(AnySpectrum::Exact(spec)) => match args.endpoint {
            0 => blueprint_endpoint0(&arr, &spec).to_json(),
            1 => blueprint_endpoint1(&arr, &spec).to_json(),
            _ => {
                let eta_text = args.eta.as_deref().unwrap();
                match parse_rat(eta_text) {
                    Some(eta) => {
                        let case = match classify_eta(eta, &arr, &spec) {
                            Ok(c) => c,
                            Err(e) => return fail(module_error_code(&e), e),
                        };
                        match blueprint_endpoint2(&arr, &spec, &case) {
                            Ok(bp) => bp.to_json(),
                            Err(e) => return fail(module_error_code(&e), e),
                        }
                    }
                    None => return fail(EXIT_USAGE, format!("cannot parse eta: {eta_text}")),
                }
            }
        },
        Ok(AnySpectrum::Approx(spec)) => match args.endpoint {
            0 => blueprint_endpoint0(&arr, &spec).to_json(),
            1 => blueprint_endpoint1(&arr, &spec).to_json(),
            _ => {
                let eta_text = args.eta.as_deref().unwrap();
                let eta: f64 = match parse_rat(eta_text) {
                    Some(r) => r.to_f64(),
                    None => return fail(EXIT_USAGE, format!("cannot parse eta: {eta_text}")),
                };
                let case = match classify_eta(eta, &arr, &spec) {
                    Ok(c) => c,
                    Err(e) => return fail(module_error_code(&e), e),
                };
                match blueprint_endpoint2(&arr, &spec, &case) {
                    Ok(bp) => bp.to_json(),
                    Err(e) => return fail(module_error_code(&e), e),
                }
            }
        },
        Err(e) => return fail(EXIT_CHECK_FAILED, e),
    };

    if args.format == "json" {
        println!("{}", serde_json::to_string_pretty(&json).unwrap());
    } else {
        println!("array: {}", arr.display_name());
        println!(
            "endpoint {} module{}, dimension {}",
            json.endpoint,
            json.case
                .as_ref()
                .map(|c| format!(" (case {c})"))
                .unwrap_or_default(),
            json.dimension
        );
        println!("eigenprojection index set: {:?}", json.e_index_set);
        println!("shell-basis rows:          {:?}", json.astar_rows);
        println!("eigenbasis square norms:   {}", join_values(&json.e_norms));
        println!(
            "shell-basis square norms:  {}",
            join_values(&json.astar_norms)
        );
        println!("adjacency action (tridiagonal):");
        for row in &json.tridiag {
            println!("  [{}]", join_values(row));
        }
        println!("basis transition matrix:");
        for row in &json.transition {
            println!("  [{}]", join_values(row));
        }
    }
    ExitCode::SUCCESS
}

fn join_values(vals: &[serde_json::Value]) -> String {
    vals.iter()
        .map(|v| match v {
            serde_json::Value::String(s) => s.clone(),
            other => other.to_string(),
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn cmd_verify(args: &VerifyArgs, env: &EnvConfig) -> ExitCode {
    let seed = args.seed.or(env.seed).unwrap_or(DEFAULT_SEED);
    let tol_factor = args.tol.or(env.tol).unwrap_or(1.0);
    if tol_factor <= 0.0 {
        return fail(EXIT_USAGE, "--tol must be positive");
    }
    let cfg = OracleConfig {
        seed,
        tol: Tolerances::scaled(tol_factor),
    };

    // Array-only mode: identity suites without the oracle.
    if let Some(path) = &args.array {
        let arr = match load_array(path) {
            Ok(a) => a,
            Err(e) => return fail(EXIT_USAGE, e),
        };
        let result = match verify_array(&arr) {
            Ok(r) => r,
            Err(e) => return fail(EXIT_CHECK_FAILED, e),
        };
        let all_pass = result.all_pass();
        if args.format == "json" {
            let out = serde_json::json!({
                "array": result.array,
                "sections": result.sections,
                "all_pass": all_pass,
            });
            println!("{}", serde_json::to_string_pretty(&out).unwrap());
        } else {
            for section in &result.sections {
                print!("{section}");
            }
        }
        return if all_pass {
            ExitCode::SUCCESS
        } else {
            ExitCode::from(EXIT_CHECK_FAILED)
        };
    }

    let Some(graph_spec) = &args.graph else {
        return fail(EXIT_USAGE, "verify needs --graph or --array");
    };
    let graphs = if graph_spec == "all" {
        builtin_suite()
    } else {
        match resolve_graph(graph_spec) {
            Ok(g) => vec![g],
            Err(e) => return fail(EXIT_USAGE, e),
        }
    };

    // One job per (graph, base vertex); results merged deterministically by key.
    let mut jobs: Vec<(String, usize)> = Vec::new();
    for g in &graphs {
        match args.vertex.as_str() {
            "all" => jobs.extend((0..g.n).map(|v| (g.name.clone(), v))),
            v => match v.parse::<usize>() {
                Ok(v) if v < g.n => jobs.push((g.name.clone(), v)),
                Ok(v) => {
                    return fail(
                        EXIT_USAGE,
                        format!("vertex {v} out of range for {} ({} vertices)", g.name, g.n),
                    )
                }
                Err(e) => return fail(EXIT_USAGE, format!("bad vertex: {e}")),
            },
        }
    }

    let mut results: Vec<(String, usize, _)> = jobs
        .par_iter()
        .map(|(name, vertex)| {
            let g = graphs.iter().find(|g| &g.name == name).unwrap();
            (name.clone(), *vertex, verify_graph(g, *vertex, &cfg))
        })
        .collect();
    results.sort_by(|a, b| (&a.0, a.1).cmp(&(&b.0, b.1)));

    let mut all_pass = true;
    let mut failing_anchor: Option<String> = None;
    let mut json_out = Vec::new();
    for (name, vertex, result) in results {
        match result {
            Ok(verification) => {
                if !verification.all_pass() {
                    all_pass = false;
                    if failing_anchor.is_none() {
                        failing_anchor = verification
                            .sections
                            .iter()
                            .find_map(|s| s.first_failure().map(|l| l.name.clone()));
                    }
                }
                if args.format == "json" {
                    json_out.push(verification.to_json());
                } else {
                    println!("### {name} @ vertex {vertex}");
                    for section in &verification.sections {
                        print!("{section}");
                    }
                    println!();
                }
            }
            Err(e) => return fail(EXIT_CHECK_FAILED, format!("{name} @ {vertex}: {e}")),
        }
    }
    if args.format == "json" {
        println!("{}", serde_json::to_string_pretty(&json_out).unwrap());
    }

    if all_pass {
        ExitCode::SUCCESS
    } else {
        if let Some(anchor) = failing_anchor {
            eprintln!("verification failed at: {anchor}");
        }
        ExitCode::from(EXIT_CHECK_FAILED)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let env = match env_config() {
        Ok(e) => e,
        Err(msg) => return fail(EXIT_USAGE, msg),
    };
    match &cli.cmd {
        Cmd::Spectrum(args) => cmd_spectrum(args),
        Cmd::Blueprint(args) => cmd_blueprint(args),
        Cmd::Verify(args) => cmd_verify(args, &env),
    }
}
