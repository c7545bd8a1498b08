//! SMT-LIB2 serialization of theories, a subprocess driver for external solvers
//! and model extraction.

mod sexp;

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::thread;
use std::time::Duration;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;
use wait_timeout::ChildExt;

use crate::degree::TruthDegree;
use crate::program::{Atom, Interpretation};
use crate::translate::{CmpOp, SmtFormula, SmtTerm, Theory};

pub use sexp::{parse_all, Sexp, SexpError};

/// Environment variable holding the default solver command line.
pub const SOLVER_ENV: &str = "FASPC_SOLVER";
pub const DEFAULT_SOLVER: &str = "z3 -in";

#[derive(Debug, Error)]
pub enum SmtError {
    #[error("theory uses undeclared names: {}", .0.join(", "))]
    Undeclared(Vec<String>),
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("cannot run solver `{command}`: {source}")]
    Spawn { command: String, source: std::io::Error },
    #[error("unparseable solver value for {name}: {value}")]
    BadValue { name: String, value: String },
    #[error("solver assigned {name} = {value}, outside [0,1]")]
    OutOfRange { name: String, value: String },
    #[error("solver failed ({reason}); transcript:\n{transcript}")]
    Crash { reason: String, transcript: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Program followed by its arguments.
    pub command: Vec<String>,
    pub timeout: Duration,
    /// Overrides the logic chosen by [`emit`].
    pub logic: Option<String>,
}

impl SolverConfig {
    pub fn new(command: &str, timeout_secs: f64) -> Result<Self, SmtError> {
        let command = shlex::split(command)
            .filter(|c| !c.is_empty())
            .ok_or_else(|| SmtError::Config(format!("cannot split solver command `{command}`")))?;
        if !(timeout_secs.is_finite() && timeout_secs > 0.0) {
            return Err(SmtError::Config(format!("timeout must be positive, got {timeout_secs}")));
        }
        Ok(SolverConfig { command, timeout: Duration::from_secs_f64(timeout_secs), logic: None })
    }

    /// Solver from `FASPC_SOLVER`, falling back to `z3 -in`.
    pub fn from_env(timeout_secs: f64) -> Result<Self, SmtError> {
        let cmd = std::env::var(SOLVER_ENV).unwrap_or_else(|_| DEFAULT_SOLVER.to_string());
        SolverConfig::new(&cmd, timeout_secs)
    }

    pub fn with_logic(mut self, logic: impl Into<String>) -> Self {
        self.logic = Some(logic.into());
        self
    }
}

const RESERVED: &[&str] = &[
    "true", "false", "not", "and", "or", "xor", "=>", "=", "distinct", "ite", "+", "-", "*", "/", "<", "<=", ">",
    ">=", "abs", "div", "mod", "to_real", "to_int", "is_int", "forall", "exists", "let", "par", "as", "!", "_",
    "root-obj",
];

fn is_simple_symbol(s: &str) -> bool {
    let mut chars = s.chars();
    let Some(first) = chars.next() else { return false };
    let ok = |c: char| c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c);
    !first.is_ascii_digit() && ok(first) && chars.all(ok)
}

/// Serialized form of a constant or variable name. Names clashing with built-in
/// symbols get a `.` prefix, which no program atom can carry.
pub fn symbol(name: &str) -> String {
    if RESERVED.contains(&name) {
        format!("|.{name}|")
    } else if is_simple_symbol(name) {
        name.to_string()
    } else {
        format!("|{name}|")
    }
}

/// Inverse of [`symbol`] on names read back without their bars.
pub fn unsymbol(name: &str) -> &str {
    match name.strip_prefix('.') {
        Some(rest) if RESERVED.contains(&rest) => rest,
        _ => name,
    }
}

/// Exact numeral: `3`, `(/ 1 2)`, `(- (/ 1 2))`.
pub fn numeral(r: &BigRational) -> String {
    let body = if r.is_integer() {
        r.numer().abs().to_string()
    } else {
        format!("(/ {} {})", r.numer().abs(), r.denom())
    };
    if r.is_negative() {
        format!("(- {body})")
    } else {
        body
    }
}

fn write_term(out: &mut String, t: &SmtTerm) {
    match t {
        SmtTerm::Num(n) => out.push_str(&numeral(n)),
        SmtTerm::Sym(s) | SmtTerm::Var(s) => out.push_str(&symbol(s)),
        SmtTerm::Add(a, b) | SmtTerm::Sub(a, b) => {
            out.push_str(if matches!(t, SmtTerm::Add(..)) { "(+ " } else { "(- " });
            write_term(out, a);
            out.push(' ');
            write_term(out, b);
            out.push(')');
        }
        SmtTerm::Ite(c, a, b) => {
            out.push_str("(ite ");
            write_formula(out, c);
            out.push(' ');
            write_term(out, a);
            out.push(' ');
            write_term(out, b);
            out.push(')');
        }
    }
}

fn write_nary(out: &mut String, op: &str, xs: &[SmtFormula], empty: &str) {
    match xs {
        [] => out.push_str(empty),
        [x] => write_formula(out, x),
        _ => {
            let _ = write!(out, "({op}");
            for x in xs {
                out.push(' ');
                write_formula(out, x);
            }
            out.push(')');
        }
    }
}

fn write_formula(out: &mut String, f: &SmtFormula) {
    match f {
        SmtFormula::Cmp(op, a, b) => {
            let name = match op {
                CmpOp::Lt => "<",
                CmpOp::Le => "<=",
                CmpOp::Ge => ">=",
                CmpOp::Gt => ">",
                CmpOp::Eq => "=",
                CmpOp::Ne => "distinct",
            };
            let _ = write!(out, "({name} ");
            write_term(out, a);
            out.push(' ');
            write_term(out, b);
            out.push(')');
        }
        SmtFormula::And(xs) => write_nary(out, "and", xs, "true"),
        SmtFormula::Or(xs) => write_nary(out, "or", xs, "false"),
        SmtFormula::Implies(_, b) if matches!(b.as_ref(), SmtFormula::And(xs) if xs.is_empty()) => {
            out.push_str("true")
        }
        SmtFormula::Implies(a, b) | SmtFormula::Iff(a, b) => {
            out.push_str(if matches!(f, SmtFormula::Implies(..)) { "(=> " } else { "(= " });
            write_formula(out, a);
            out.push(' ');
            write_formula(out, b);
            out.push(')');
        }
        SmtFormula::Forall(vars, body) if vars.is_empty() => write_formula(out, body),
        SmtFormula::Forall(vars, body) => {
            out.push_str("(forall (");
            for (i, v) in vars.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "({} Real)", symbol(v));
            }
            out.push_str(") ");
            write_formula(out, body);
            out.push(')');
        }
    }
}

/// Renders a single formula as an s-expression.
pub fn formula_text(f: &SmtFormula) -> String {
    let mut s = String::new();
    write_formula(&mut s, f);
    s
}

pub fn term_text(t: &SmtTerm) -> String {
    let mut s = String::new();
    write_term(&mut s, t);
    s
}

/// Script asking for the values of the theory's atom constants.
pub fn emit(t: &Theory) -> Result<String, SmtError> {
    let names: Vec<String> = t.atoms.iter().map(|a| a.name().to_string()).collect();
    emit_with_values(t, &names, None)
}

/// Script asking for the values of `values`; `logic` overrides the default choice.
pub fn emit_with_values(t: &Theory, values: &[String], logic: Option<&str>) -> Result<String, SmtError> {
    let undeclared = t.undeclared();
    if !undeclared.is_empty() {
        return Err(SmtError::Undeclared(undeclared));
    }
    let logic = logic.unwrap_or(if t.has_quantifier() { "LRA" } else { "QF_LRA" });
    let mut out = String::new();
    out.push_str("(set-option :produce-models true)\n");
    let _ = writeln!(out, "(set-logic {logic})");
    for c in &t.constants {
        let _ = writeln!(out, "(declare-const {} Real)", symbol(c));
    }
    for f in &t.formulas {
        out.push_str("(assert ");
        write_formula(&mut out, f);
        out.push_str(")\n");
    }
    out.push_str("(check-sat)\n");
    if !values.is_empty() {
        let names: Vec<String> = values.iter().map(|v| symbol(v)).collect();
        let _ = writeln!(out, "(get-value ({}))", names.join(" "));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Sat,
    Unsat,
    Unknown,
    Timeout,
    Crash,
}

#[derive(Debug, Clone)]
pub struct RawResult {
    pub status: Status,
    /// `(name value)` pairs from `get-value`, names unquoted.
    pub bindings: Vec<(String, Sexp)>,
    pub stdout: String,
    pub stderr: String,
    /// Why the run counts as a crash, if it does.
    pub reason: Option<String>,
}

impl RawResult {
    pub fn transcript(&self) -> String {
        format!("--- stdout ---\n{}--- stderr ---\n{}", self.stdout, self.stderr)
    }
}

fn read_to_string_thread<R: Read + Send + 'static>(mut r: R) -> thread::JoinHandle<String> {
    thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = r.read_to_end(&mut buf);
        String::from_utf8_lossy(&buf).into_owned()
    })
}

/// Runs the configured solver on `script`, killing it once the timeout passes.
pub fn solve(script: &str, cfg: &SolverConfig) -> Result<RawResult, SmtError> {
    let (program, args) = cfg.command.split_first().ok_or_else(|| SmtError::Config("empty solver command".into()))?;
    let mut child = Command::new(program)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|source| SmtError::Spawn { command: cfg.command.join(" "), source })?;
    let out = read_to_string_thread(child.stdout.take().expect("piped stdout"));
    let err = read_to_string_thread(child.stderr.take().expect("piped stderr"));
    let mut stdin = child.stdin.take().expect("piped stdin");
    // A solver that dies early closes the pipe; its output explains why.
    let _ = stdin.write_all(script.as_bytes());
    drop(stdin);

    let waited = child.wait_timeout(cfg.timeout).map_err(|source| SmtError::Spawn {
        command: cfg.command.join(" "),
        source,
    })?;
    let timed_out = waited.is_none();
    if timed_out {
        let _ = child.kill();
        let _ = child.wait();
    }
    let stdout = out.join().unwrap_or_default();
    let stderr = err.join().unwrap_or_default();
    let mut raw = RawResult { status: Status::Crash, bindings: Vec::new(), stdout, stderr, reason: None };
    if timed_out {
        raw.status = Status::Timeout;
        return Ok(raw);
    }
    interpret_output(&mut raw, script.contains("(get-value"));
    Ok(raw)
}

fn interpret_output(raw: &mut RawResult, want_values: bool) {
    let items = match parse_all(&raw.stdout) {
        Ok(items) => items,
        Err(e) => {
            raw.reason = Some(format!("malformed output: {e}"));
            return;
        }
    };
    let mut it = items.into_iter();
    match it.next() {
        Some(Sexp::Atom(s)) if s == "unsat" => raw.status = Status::Unsat,
        Some(Sexp::Atom(s)) if s == "unknown" => raw.status = Status::Unknown,
        Some(Sexp::Atom(s)) if s == "sat" => {
            if !want_values {
                raw.status = Status::Sat;
                return;
            }
            match it.next().as_ref().and_then(read_bindings) {
                Some(b) => {
                    raw.bindings = b;
                    raw.status = Status::Sat;
                }
                None => raw.reason = Some("sat without a readable get-value response".into()),
            }
        }
        Some(other) => raw.reason = Some(format!("unexpected response `{other}`")),
        None => raw.reason = Some("no output".into()),
    }
}

fn read_bindings(e: &Sexp) -> Option<Vec<(String, Sexp)>> {
    e.as_list()?
        .iter()
        .map(|pair| match pair.as_list()? {
            [Sexp::Atom(name), value] => Some((unsymbol(name).to_string(), value.clone())),
            _ => None,
        })
        .collect()
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if int.is_empty() || !int.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let scale = num_traits::pow(BigInt::from(10), frac.len());
    Some(BigRational::new(digits, scale))
}

/// Reads an SMT-LIB real value: numerals, decimals, `(/ a b)` and `(- a)`.
pub fn parse_value(e: &Sexp) -> Option<BigRational> {
    match e {
        Sexp::Atom(s) => parse_decimal(s),
        Sexp::List(xs) => match xs.as_slice() {
            [Sexp::Atom(op), a] if op == "-" => Some(-parse_value(a)?),
            [Sexp::Atom(op), a, b] if op == "/" => {
                let d = parse_value(b)?;
                if d.is_zero() {
                    None
                } else {
                    Some(parse_value(a)? / d)
                }
            }
            _ => None,
        },
    }
}

/// Interpretation over `atoms` from solver bindings; absent atoms get 0.
pub fn parse_model(bindings: &[(String, Sexp)], atoms: &[Atom]) -> Result<Interpretation, SmtError> {
    let mut i = Interpretation::new();
    for a in atoms {
        let value = match bindings.iter().find(|(n, _)| n == a.name()) {
            None => TruthDegree::zero(),
            Some((name, e)) => {
                let v = parse_value(e).ok_or_else(|| SmtError::BadValue { name: name.clone(), value: e.to_string() })?;
                if v.is_negative() || v > BigRational::one() {
                    return Err(SmtError::OutOfRange { name: name.clone(), value: e.to_string() });
                }
                TruthDegree::new(v).expect("range checked")
            }
        };
        i.set(a.clone(), value);
    }
    Ok(i)
}

/// Reads bindings as exact rationals without range checks (e.g. rank constants).
pub fn binding_values(bindings: &[(String, Sexp)]) -> Result<Vec<(String, BigRational)>, SmtError> {
    bindings
        .iter()
        .map(|(n, e)| {
            parse_value(e)
                .map(|v| (n.clone(), v))
                .ok_or_else(|| SmtError::BadValue { name: n.clone(), value: e.to_string() })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    Stable(Interpretation),
    Incoherent,
    Unknown(String),
}

/// Emits, solves and reads back the theory's atoms.
pub fn solve_theory(t: &Theory, cfg: &SolverConfig) -> Result<SolveOutcome, SmtError> {
    let names: Vec<String> = t.atoms.iter().map(|a| a.name().to_string()).collect();
    let script = emit_with_values(t, &names, cfg.logic.as_deref())?;
    let raw = solve(&script, cfg)?;
    match raw.status {
        Status::Sat => Ok(SolveOutcome::Stable(parse_model(&raw.bindings, &t.atoms)?)),
        Status::Unsat => Ok(SolveOutcome::Incoherent),
        Status::Unknown => Ok(SolveOutcome::Unknown("solver returned unknown".into())),
        Status::Timeout => Ok(SolveOutcome::Unknown(format!("timeout after {:?}", cfg.timeout))),
        Status::Crash => Err(SmtError::Crash {
            reason: raw.reason.clone().unwrap_or_else(|| "crash".into()),
            transcript: raw.transcript(),
        }),
    }
}
