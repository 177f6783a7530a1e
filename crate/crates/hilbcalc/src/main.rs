//! Command-line surface over the engine: model checking, cup products,
//! intersection numbers, structure-constant tabulation, Chern-bracket
//! expansion, and the verification suites.
//!
//! Exit codes: 0 on success, 1 when a validation or assertion fails, 2 on
//! usage or input errors. All rationals are printed as `p/q` strings, and
//! identical invocations produce byte-identical output regardless of cache
//! state or `--jobs`.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use num_traits::One;
use serde_json::json;

use hilbcalc::cache::CacheStore;
use hilbcalc::fock::FockVector;
use hilbcalc::hilbert::{row_to_json, PartitionKey, StructureRow};
use hilbcalc::rational::{format_q, parse_q, Q};
use hilbcalc::surface::{CohClass, ModelError, SurfaceModel};
use hilbcalc::verify::{run_suite, SuiteReport, VerifyCtx, SUITE_NAMES};
use hilbcalc::Engine;

use rayon::prelude::*;

#[derive(Parser)]
#[command(
    name = "hilbcalc",
    version,
    about = "Exact calculator for cohomology rings of Hilbert schemes of points on surfaces"
)]
struct Cli {
    /// Surface model: a JSON file path or `builtin:NAME`
    /// (builtins: P2, P1xP1, K3like, Abelianlike).
    #[arg(long, global = true)]
    model: Option<String>,

    /// Write the command's output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Disable the persistent result cache.
    #[arg(long, global = true)]
    no_cache: bool,

    /// Cache directory (default: $HILBCALC_CACHE, else the platform cache
    /// directory). Cache files are versioned and safe to delete at any time.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,

    /// Worker threads for parallel tabulation (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Pretty,
}

#[derive(Subcommand)]
enum Command {
    /// Load a surface model, check its ring axioms, and run the
    /// diagonal-pushforward identity suite on it.
    SurfaceCheck,

    /// Cup product of two weight-n classes, given as JSON term files.
    Cup {
        /// Number of points (the level n of X^[n]).
        #[arg(long)]
        n: u32,
        /// JSON file holding the left factor.
        a: PathBuf,
        /// JSON file holding the right factor.
        b: PathBuf,
    },

    /// Intersection number of a product of tautological Chern classes
    /// on X^[n]; prints 0 unless the total degree matches 4n.
    Intersect {
        /// Number of points (the level n of X^[n]).
        #[arg(long)]
        n: u32,
        /// A factor "K:CLASS" (repeatable), e.g. --gen 1:h --gen 0:p.
        /// CLASS is a basis name or a sum like "2*h+1/3*p".
        #[arg(long = "gen", required = true)]
        gens: Vec<String>,
    },

    /// Tabulate the n-independent structure constants for every ordered
    /// pair of nonempty keys with total weight up to the bound, one JSON
    /// record per line, in canonical graded-lexicographic order.
    StructureConstants {
        /// Largest total weight ‖ρ‖+‖σ‖ to tabulate.
        #[arg(long)]
        max_weight: u32,
    },

    /// Expand the commutator of a Chern operator with a creation operator
    /// into normally ordered creation/annihilation terms; the expansion is
    /// exact on states of weight at most the budget.
    ExpandChern {
        /// Order k of the Chern operator.
        #[arg(long)]
        k: u32,
        /// Class attached to the Chern operator (basis name or sum).
        #[arg(long)]
        alpha: String,
        /// Index r >= 1 of the creation operator a_{-r}.
        #[arg(long)]
        r: u32,
        /// Class attached to the creation operator (default: the unit).
        #[arg(long)]
        beta: Option<String>,
        /// Truncation weight for the printed expansion.
        #[arg(long, default_value_t = 6)]
        budget: u32,
    },

    /// Run one verification suite (default: all of them). Without --model
    /// the suites cover every builtin model.
    Verify {
        /// Suite name; see the README for the full list.
        #[arg(long)]
        suite: Option<String>,
    },
}

/// Errors carrying their exit code: input problems exit 2, failed
/// validations and assertions exit 1.
enum CliError {
    Input(String),
    Failure(String),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("warning: could not configure {jobs} worker threads: {e}");
        }
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(CliError::Failure(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<u8, CliError> {
    match &cli.command {
        Command::SurfaceCheck => cmd_surface_check(cli),
        Command::Cup { n, a, b } => cmd_cup(cli, *n, a, b),
        Command::Intersect { n, gens } => cmd_intersect(cli, *n, gens),
        Command::StructureConstants { max_weight } => cmd_structure_constants(cli, *max_weight),
        Command::ExpandChern { k, alpha, r, beta, budget } => {
            cmd_expand_chern(cli, *k, alpha, *r, beta.as_deref(), *budget)
        }
        Command::Verify { suite } => cmd_verify(cli, suite.as_deref()),
    }
}

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

fn open_store(cli: &Cli) -> Option<CacheStore> {
    if cli.no_cache {
        return None;
    }
    let dir = cli.cache_dir.clone().unwrap_or_else(CacheStore::default_dir);
    match CacheStore::open(dir.clone()) {
        Ok(store) => Some(store),
        Err(e) => {
            eprintln!("warning: cache at {} disabled: {e}", dir.display());
            None
        }
    }
}

/// Read the model source named by `--model` (without interpreting it).
fn model_text(source: &str) -> Result<Result<Arc<SurfaceModel>, ModelError>, CliError> {
    if let Some(name) = source.strip_prefix("builtin:") {
        Ok(SurfaceModel::builtin(name))
    } else {
        let text = fs::read_to_string(source)
            .map_err(|e| CliError::Input(format!("cannot read model file {source:?}: {e}")))?;
        Ok(SurfaceModel::load_json(&text))
    }
}

fn require_model(cli: &Cli) -> Result<Arc<SurfaceModel>, CliError> {
    let source = cli
        .model
        .as_deref()
        .ok_or_else(|| CliError::Input("this command needs --model <file|builtin:NAME>".into()))?;
    model_text(source)?.map_err(|e| CliError::Input(e.to_string()))
}

fn make_engine(cli: &Cli, model: Arc<SurfaceModel>) -> Engine {
    match open_store(cli) {
        Some(store) => Engine::with_store(model, store),
        None => Engine::new(model),
    }
}

fn writer(cli: &Cli) -> Result<Box<dyn Write>, CliError> {
    match &cli.out {
        Some(path) => {
            let file = fs::File::create(path).map_err(|e| {
                CliError::Input(format!("cannot create output file {}: {e}", path.display()))
            })?;
            Ok(Box::new(io::BufWriter::new(file)))
        }
        None => Ok(Box::new(io::BufWriter::new(io::stdout()))),
    }
}

fn emit(cli: &Cli, text: &str) -> Result<(), CliError> {
    let mut w = writer(cli)?;
    writeln!(w, "{text}").and_then(|_| w.flush()).map_err(|e| {
        CliError::Input(format!("cannot write output: {e}"))
    })
}

/// Parse a class expression: a basis name, or `+`-separated terms with an
/// optional rational prefix, e.g. `h`, `2*h`, `1/2*h+-3*p`.
fn parse_class(model: &SurfaceModel, text: &str) -> Result<CohClass, String> {
    let mut out = CohClass::zero();
    for term in text.split('+') {
        let term = term.trim();
        if term.is_empty() {
            return Err(format!("empty term in class expression {text:?}"));
        }
        let (coeff, name) = match term.split_once('*') {
            Some((q, name)) => (parse_q(q.trim())?, name.trim()),
            None => (Q::one(), term),
        };
        let idx = model
            .basis_index(name)
            .ok_or_else(|| format!("unknown basis class {name:?}"))?;
        out.add_term(idx, &coeff);
    }
    Ok(out)
}

fn fock_pretty(model: &SurfaceModel, v: &FockVector) -> String {
    if v.is_zero() {
        return "0".to_string();
    }
    v.terms
        .iter()
        .map(|(mono, coeff)| {
            let mut s = format!("{} · ", format_q(coeff));
            for f in &mono.factors {
                s.push_str(&format!("a[-{}]({})", f.r, model.basis[f.c].name));
            }
            s.push_str("|0>");
            s
        })
        .collect::<Vec<_>>()
        .join("  +  ")
}

fn row_pretty(model: &SurfaceModel, row: &StructureRow) -> String {
    if row.is_empty() {
        return "0".to_string();
    }
    row.iter()
        .map(|(nu, d)| format!("{}·{}", format_q(d), nu.display(model)))
        .collect::<Vec<_>>()
        .join(" + ")
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

fn cmd_surface_check(cli: &Cli) -> Result<u8, CliError> {
    let source = cli
        .model
        .as_deref()
        .ok_or_else(|| CliError::Input("surface-check needs --model <file|builtin:NAME>".into()))?;
    let model = match model_text(source)? {
        Ok(model) => model,
        // Structural problems are input errors; violated ring axioms are
        // validation failures with the offending relation named.
        Err(e @ ModelError::Schema(_)) => return Err(CliError::Input(e.to_string())),
        Err(e @ ModelError::Invariant(_)) => return Err(CliError::Failure(e.to_string())),
    };
    let ctx = VerifyCtx::new(vec![model.clone()], open_store(cli));
    let report = run_suite(&ctx, "pushforward").expect("registered suite");
    let passed = report.passed();
    match cli.format {
        Format::Json => {
            let doc = json!({
                "model": model.name,
                "dim": model.dim(),
                "fingerprint": model.fingerprint,
                "pushforward": report.to_json(),
                "passed": passed,
            });
            emit(cli, &doc.to_string())?;
        }
        Format::Pretty => {
            let mut text = format!(
                "model {} (dim {}): axioms OK\npushforward identities: {} checks, {}",
                model.name,
                model.dim(),
                report.checks,
                if passed { "all passed" } else { "FAILED" }
            );
            for f in &report.failures {
                text.push_str(&format!("\n  {}: {}", f.check, f.detail));
            }
            emit(cli, &text)?;
        }
    }
    Ok(if passed { 0 } else { 1 })
}

fn cmd_cup(cli: &Cli, n: u32, a_path: &PathBuf, b_path: &PathBuf) -> Result<u8, CliError> {
    let model = require_model(cli)?;
    let eng = make_engine(cli, model.clone());
    let read_vector = |path: &PathBuf| -> Result<FockVector, CliError> {
        let text = fs::read_to_string(path).map_err(|e| {
            CliError::Input(format!("cannot read class file {}: {e}", path.display()))
        })?;
        let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| {
            CliError::Input(format!("{}: invalid JSON: {e}", path.display()))
        })?;
        FockVector::from_json(&model, &value)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
    };
    let a = read_vector(a_path)?;
    let b = read_vector(b_path)?;
    // A cup error is a violated precondition (inhomogeneous or wrong-level
    // input), hence an input error.
    let product = eng.cup(&a, &b, n).map_err(CliError::Input)?;
    match cli.format {
        Format::Json => emit(cli, &product.to_json(&model).to_string()),
        Format::Pretty => emit(cli, &fock_pretty(&model, &product)),
    }?;
    Ok(0)
}

fn cmd_intersect(cli: &Cli, n: u32, gens: &[String]) -> Result<u8, CliError> {
    let model = require_model(cli)?;
    let eng = make_engine(cli, model.clone());
    let mut parsed: Vec<(u32, CohClass)> = Vec::with_capacity(gens.len());
    for g in gens {
        let (k, class) = g
            .split_once(':')
            .ok_or_else(|| CliError::Input(format!("--gen {g:?} is not of the form K:CLASS")))?;
        let k: u32 = k
            .trim()
            .parse()
            .map_err(|e| CliError::Input(format!("--gen {g:?}: bad order: {e}")))?;
        let class = parse_class(&model, class).map_err(CliError::Input)?;
        parsed.push((k, class));
    }
    let value = eng.intersection(&parsed, n);
    emit(cli, &format_q(&value))?;
    Ok(0)
}

fn cmd_structure_constants(cli: &Cli, max_weight: u32) -> Result<u8, CliError> {
    let model = require_model(cli)?;
    let eng = make_engine(cli, model.clone());
    let mut pairs: Vec<(PartitionKey, PartitionKey)> = Vec::new();
    for w1 in 1..max_weight {
        for w2 in 1..=(max_weight - w1) {
            for rho in PartitionKey::enumerate(&model, w1) {
                for sigma in PartitionKey::enumerate(&model, w2) {
                    pairs.push((rho.clone(), sigma));
                }
            }
        }
    }
    pairs.sort();
    // Rows are computed in parallel; the output order is fixed by the
    // canonical pair enumeration above, not by scheduling.
    let rows: Vec<Result<StructureRow, String>> = pairs
        .par_iter()
        .map(|(rho, sigma)| eng.structure_constants(rho, sigma))
        .collect();
    let mut lines = Vec::with_capacity(pairs.len());
    for ((rho, sigma), row) in pairs.iter().zip(rows) {
        let row = row.map_err(CliError::Failure)?;
        match cli.format {
            Format::Json => {
                let doc = json!({
                    "rho": rho.to_json(&model),
                    "sigma": sigma.to_json(&model),
                    "terms": row_to_json(&model, &row),
                });
                lines.push(doc.to_string());
            }
            Format::Pretty => lines.push(format!(
                "{}·{} = {}",
                rho.display(&model),
                sigma.display(&model),
                row_pretty(&model, &row)
            )),
        }
    }
    emit(cli, &lines.join("\n"))?;
    Ok(0)
}

fn cmd_expand_chern(
    cli: &Cli,
    k: u32,
    alpha: &str,
    r: u32,
    beta: Option<&str>,
    budget: u32,
) -> Result<u8, CliError> {
    let model = require_model(cli)?;
    if r == 0 {
        return Err(CliError::Input("--r must be at least 1".into()));
    }
    let alpha = parse_class(&model, alpha).map_err(CliError::Input)?;
    let beta = match beta {
        Some(text) => parse_class(&model, text).map_err(CliError::Input)?,
        None => model.unit_class(),
    };
    let eng = make_engine(cli, model.clone());
    let op = eng.chern_commutator(k, &alpha, r, &beta, budget);
    let doc = json!({"budget": budget, "terms": op.to_json(&model)});
    match cli.format {
        Format::Json => emit(cli, &doc.to_string()),
        Format::Pretty => emit(cli, &serde_json::to_string_pretty(&doc).expect("serializable")),
    }?;
    Ok(0)
}

fn cmd_verify(cli: &Cli, suite: Option<&str>) -> Result<u8, CliError> {
    let models = match cli.model.as_deref() {
        Some(source) => vec![model_text(source)?.map_err(|e| CliError::Input(e.to_string()))?],
        None => SurfaceModel::BUILTIN_NAMES
            .iter()
            .map(|n| SurfaceModel::builtin(n).expect("builtin model"))
            .collect(),
    };
    let ctx = VerifyCtx::new(models, open_store(cli));
    let reports: Vec<SuiteReport> = match suite {
        Some(name) => vec![run_suite(&ctx, name).map_err(CliError::Input)?],
        None => SUITE_NAMES
            .iter()
            .map(|name| run_suite(&ctx, name).expect("registered suite"))
            .collect(),
    };
    let passed = reports.iter().all(SuiteReport::passed);
    match cli.format {
        Format::Json => {
            let doc = json!({
                "passed": passed,
                "suites": reports.iter().map(SuiteReport::to_json).collect::<Vec<_>>(),
            });
            emit(cli, &doc.to_string())?;
        }
        Format::Pretty => {
            let mut text = String::new();
            for report in &reports {
                text.push_str(&format!(
                    "{:<20} {} ({} checks)\n",
                    report.suite,
                    if report.passed() { "PASS" } else { "FAIL" },
                    report.checks
                ));
                for f in &report.failures {
                    text.push_str(&format!("    {}: {}\n", f.check, f.detail));
                }
            }
            text.push_str(if passed { "all suites passed" } else { "FAILURES PRESENT" });
            emit(cli, &text)?;
        }
    }
    Ok(if passed { 0 } else { 1 })
}
