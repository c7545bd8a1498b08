//! Command-line driver: `faspc solve` runs parse, ground, classify, rewrite,
//! translate, solve and (optionally) verify; `faspc gen` writes benchmark
//! instances.
//!
//! Exit codes: 10 stable model, 20 incoherent, 30 unknown, 1 usage or input
//! error, 2 internal invariant breach.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::analysis::classify;
use crate::benchgen::{self, QbfVariant, SimpleKind};
use crate::frontend::{self, GroundOptions};
use crate::program::Interpretation;
use crate::smtclient::{self, SolveOutcome, SolverConfig};
use crate::translate::{self, Strategy, TranslateError};
use crate::verify::{self, Minimality};

pub const EXIT_STABLE: i32 = 10;
pub const EXIT_INCOHERENT: i32 = 20;
pub const EXIT_UNKNOWN: i32 = 30;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INTERNAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "faspc", version, about = "Fuzzy answer set programs solved through SMT")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute a stable model of a program.
    Solve(SolveArgs),
    /// Write a benchmark instance.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    Auto,
    Smt,
    Comp,
    Rcomp,
    Ocomp,
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Program file, or `-` for standard input.
    file: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    strategy: StrategyArg,
    /// Solver command line (default: $FASPC_SOLVER or `z3 -in`).
    #[arg(long)]
    solver: Option<String>,
    /// Per-query timeout in seconds.
    #[arg(long, default_value_t = 60.0)]
    timeout: f64,
    /// Verify the model before printing it.
    #[arg(long)]
    check: bool,
    /// Print a JSON report
    #[arg(long)]
    json: bool,
    /// Print the SMT-LIB script instead of solving.
    #[arg(long)]
    print_smt: bool,
    /// Print the rewritten program the theory is built from, then stop.
    #[arg(long)]
    dump_rewritten: bool,
    /// Print the structural classification as JSON, then stop.
    #[arg(long)]
    classify: bool,
    /// Include auxiliary atoms in the output.
    #[arg(long)]
    show_aux: bool,
    /// Use the grid oracle over {0, 1/k, ..., 1} instead of the solver.
    #[arg(long, value_name = "K")]
    oracle: Option<u32>,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[command(subcommand)]
    family: Family,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file (default: standard output).
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VariantArg {
    GodelOr,
    LukOr,
    LukAnd,
}

#[derive(Debug, Subcommand)]
enum Family {
    /// Random graph coloring
    Coloring {
        #[arg(long, default_value_t = 6)]
        vertices: usize,
        #[arg(long, default_value_t = 0.5)]
        density: f64,
        #[arg(long, default_value_t = 20)]
        den: u32,
    },
    /// Hamiltonian path on a random graph
    Hampath {
        #[arg(long, default_value_t = 5)]
        vertices: usize,
        #[arg(long, default_value_t = 20)]
        den: u32,
    },
    /// Layered program with negation between layers
    Stratified {
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        den: u32,
    },
    /// Negative cycle of odd length
    Oddcycle {
        #[arg(long, default_value_t = 5)]
        n: usize,
    },
    /// Random 2-QBF formula encoded as a program.
    Qbf {
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, value_enum, default_value = "godel-or")]
        variant: VariantArg,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Outcome {
    Stable,
    Incoherent,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub model_ok: bool,
    /// `true`, `false` or `unknown`.
    pub minimal: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<BTreeMap<String, String>>,
}

/// Machine-readable result of `faspc solve`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    /// `null` when the grid oracle answered.
    pub strategy: Option<Strategy>,
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub model: Option<BTreeMap<String, String>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub verification: Option<VerificationReport>,
    /// Phase durations in microseconds.
    pub timings_us: BTreeMap<String, u64>,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        match self.outcome {
            Outcome::Stable => EXIT_STABLE,
            Outcome::Incoherent => EXIT_INCOHERENT,
            Outcome::Unknown => EXIT_UNKNOWN,
        }
    }
}

/// A failure tagged with the phase it came from.
#[derive(Debug)]
struct Failure {
    phase: &'static str,
    message: String,
    code: i32,
}

impl Failure {
    fn usage(phase: &'static str, e: impl ToString) -> Self {
        Failure { phase, message: e.to_string(), code: EXIT_USAGE }
    }

    fn internal(phase: &'static str, e: impl ToString) -> Self {
        Failure { phase, message: e.to_string(), code: EXIT_INTERNAL }
    }
}

struct Timer {
    timings: BTreeMap<String, u64>,
}

impl Timer {
    fn phase<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings.insert(name.to_string(), start.elapsed().as_micros() as u64);
        out
    }
}

fn model_map(i: &Interpretation) -> BTreeMap<String, String> {
    i.iter().map(|(a, v)| (a.name().to_string(), v.to_string())).collect()
}

/// Entry point shared by the binary and the tests.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Solve(args) => solve(&args, out),
        Command::Gen(args) => generate(&args, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error[{}]: {}", f.phase, f.message);
            f.code
        }
    }
}

fn read_input(path: &PathBuf) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| Failure::usage("input", e))?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| Failure::usage("input", format!("{}: {e}", path.display())))
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes()).map_err(|e| Failure::usage("output", e))
}

fn solve(args: &SolveArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let mut timer = Timer { timings: BTreeMap::new() };
    let text = read_input(&args.file)?;
    let source = timer.phase("parse", || frontend::parse(&text)).map_err(|e| Failure::usage("parse", e))?;
    let program = timer
        .phase("ground", || frontend::ground_with(&source, GroundOptions::default()))
        .map_err(|e| Failure::usage("ground", e))?;
    let class = timer.phase("classify", || classify(&program));
    if args.classify {
        let json = serde_json::to_string(&class).map_err(|e| Failure::internal("classify", e))?;
        write_out(out, &format!("{json}\n"))?;
        return Ok(0);
    }
    let cfg = match &args.solver {
        Some(cmd) => SolverConfig::new(cmd, args.timeout),
        None => SolverConfig::from_env(args.timeout),
    }
    .map_err(|e| Failure::usage("solver", e))?;

    let (strategy, outcome) = if let Some(k) = args.oracle {
        if k == 0 {
            return Err(Failure::usage("oracle", "grid resolution must be positive"));
        }
        let models = timer
            .phase("oracle", || verify::grid_stable_models(&program, k, verify::DEFAULT_GRID_BUDGET))
            .map_err(|e| Failure::usage("oracle", e))?;
        let outcome = match models.into_iter().next() {
            Some(m) => SolveOutcome::Stable(m),
            None => SolveOutcome::Incoherent,
        };
        (None, outcome)
    } else {
        let pipeline = timer
            .phase("translate", || match args.strategy {
                StrategyArg::Auto => translate::select_pipeline(&program, &class),
                forced => translate::build_pipeline(&program, &class, forced_strategy(forced)),
            })
            .map_err(|e| match e {
                TranslateError::Precondition { .. } => Failure::usage("strategy", e),
                other => Failure::internal("translate", other),
            })?;
        if args.dump_rewritten || args.print_smt {
            if args.dump_rewritten {
                write_out(out, &pipeline.rewritten.to_string())?;
            }
            if args.print_smt {
                let script = smtclient::emit(&pipeline.theory).map_err(|e| Failure::internal("emit", e))?;
                write_out(out, &script)?;
            }
            return Ok(0);
        }
        let outcome = timer
            .phase("solve", || smtclient::solve_theory(&pipeline.theory, &cfg))
            .map_err(|e| Failure::internal("solve", e))?;
        (Some(pipeline.strategy), outcome)
    };

    let mut report = RunReport {
        strategy,
        outcome: Outcome::Unknown,
        model: None,
        reason: None,
        verification: None,
        timings_us: BTreeMap::new(),
    };
    match outcome {
        SolveOutcome::Incoherent => report.outcome = Outcome::Incoherent,
        SolveOutcome::Unknown(reason) => report.reason = Some(reason),
        SolveOutcome::Stable(full) => {
            let original = full.restrict(program.atoms());
            report.outcome = Outcome::Stable;
            if args.check {
                let verdict = timer
                    .phase("check", || verify::check_stable(&program, &original, &cfg))
                    .map_err(|e| Failure::internal("check", e))?;
                report.verification = Some(VerificationReport {
                    model_ok: verdict.model_ok,
                    minimal: match &verdict.minimal {
                        Minimality::Minimal => "true".into(),
                        Minimality::NotMinimal => "false".into(),
                        Minimality::Unknown(_) => "unknown".into(),
                    },
                    witness: verdict.witness.as_ref().map(model_map),
                });
                match verdict.minimal {
                    _ if !verdict.model_ok => {
                        return Err(Failure::internal("check", format!(
                            "computed interpretation {} is not a model",
                            verify::fmt_interp(&original)
                        )))
                    }
                    Minimality::NotMinimal => {
                        return Err(Failure::internal("check", format!(
                            "computed model {} is not minimal",
                            verify::fmt_interp(&original)
                        )))
                    }
                    Minimality::Unknown(reason) => {
                        report.outcome = Outcome::Unknown;
                        report.reason = Some(format!("model found but stability unconfirmed: {reason}"));
                    }
                    Minimality::Minimal => {}
                }
            }
            if report.outcome == Outcome::Stable {
                let visible = if args.show_aux {
                    let mut all = full.clone();
                    all.extend_zero(program.atoms());
                    all
                } else {
                    original
                };
                report.model = Some(model_map(&visible));
            }
        }
    }
    report.timings_us = timer.timings;
    let text = if args.json {
        format!("{}\n", serde_json::to_string(&report).map_err(|e| Failure::internal("report", e))?)
    } else {
        render_text(&report)
    };
    write_out(out, &text)?;
    Ok(report.exit_code())
}

fn forced_strategy(s: StrategyArg) -> Strategy {
    match s {
        StrategyArg::Smt | StrategyArg::Auto => Strategy::Smt,
        StrategyArg::Comp => Strategy::Comp,
        StrategyArg::Rcomp => Strategy::Rcomp,
        StrategyArg::Ocomp => Strategy::Ocomp,
    }
}

/// `atom = value` lines, or `INCOHERENT` / `UNKNOWN: reason`.
pub fn render_text(r: &RunReport) -> String {
    match r.outcome {
        Outcome::Stable => {
            let mut s = String::new();
            for (a, v) in r.model.iter().flatten() {
                s.push_str(&format!("{a} = {v}\n"));
            }
            s
        }
        Outcome::Incoherent => "INCOHERENT\n".into(),
        Outcome::Unknown => format!("UNKNOWN: {}\n", r.reason.as_deref().unwrap_or("no reason given")),
    }
}

fn generate(args: &GenArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let text = match &args.family {
        Family::Coloring { vertices, density, den } => benchgen::gen_coloring(*vertices, *density, *den, args.seed),
        Family::Hampath { vertices, den } => benchgen::gen_hampath(*vertices, *den, args.seed),
        Family::Stratified { n, den } => benchgen::gen_simple(SimpleKind::Stratified, *n, *den, args.seed),
        Family::Oddcycle { n } => benchgen::gen_simple(SimpleKind::OddCycle, *n, 1, args.seed),
        Family::Qbf { m, n, k, variant } => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(args.seed);
            benchgen::Qbf2Formula::random(*m, *n, *k, &mut rng).map(|f| {
                let variant = match variant {
                    VariantArg::GodelOr => QbfVariant::GodelOr,
                    VariantArg::LukOr => QbfVariant::LukOr,
                    VariantArg::LukAnd => QbfVariant::LukAnd,
                };
                benchgen::qbf_to_fasp(&f, variant)
            })
        }
    }
    .map_err(|e| Failure::usage("gen", e))?;
    match &args.output {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::usage("output", e))?,
        None => write_out(out, &text)?,
    }
    Ok(0)
}
