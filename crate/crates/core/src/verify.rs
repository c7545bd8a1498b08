//! Stable-model verification: an exact minimality check backed by a
//! quantifier-free solver query, and a brute-force oracle over the grid
//! `Q_k = {i/k | 0 ≤ i ≤ k}` for differential testing.

use std::collections::BTreeSet;

use num_integer::Integer;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::analysis;
use crate::degree::TruthDegree;
use crate::program::{Atom, Conn, Expr, HeadConn, HeadItem, Interpretation, Program};
use crate::semantics::{self, SemanticsError};
use crate::smtclient::{self, SolverConfig, Status};
use crate::translate::{self, CmpOp, Mode, SmtFormula, SmtTerm, Strategy, Theory};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("interpretation has no value for atom {0}")]
    NotTotal(Atom),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error("solver and fixpoint disagree on minimality of {interpretation}: solver says {solver}")]
    Disagreement { interpretation: String, solver: &'static str },
    #[error("grid enumeration needs about {estimate} candidates, above the limit {limit}")]
    Budget { estimate: u128, limit: u128 },
    #[error("constants need a common denominator above {0}")]
    Scale(i64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Minimality {
    Minimal,
    NotMinimal,
    Unknown(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub model_ok: bool,
    pub minimal: Minimality,
    /// A model of the reduct strictly below the checked interpretation.
    pub witness: Option<Interpretation>,
}

impl Verdict {
    pub fn is_stable(&self) -> bool {
        self.model_ok && self.minimal == Minimality::Minimal
    }
}

fn close_term(t: &SmtTerm) -> SmtTerm {
    match t {
        SmtTerm::Var(v) => SmtTerm::Sym(v.clone()),
        SmtTerm::Num(_) | SmtTerm::Sym(_) => t.clone(),
        SmtTerm::Add(a, b) => SmtTerm::add(close_term(a), close_term(b)),
        SmtTerm::Sub(a, b) => SmtTerm::sub(close_term(a), close_term(b)),
        SmtTerm::Ite(c, a, b) => SmtTerm::ite(close_formula(c), close_term(a), close_term(b)),
    }
}

/// Turns free variables into constants of the same name.
fn close_formula(f: &SmtFormula) -> SmtFormula {
    match f {
        SmtFormula::Cmp(op, a, b) => SmtFormula::Cmp(*op, close_term(a), close_term(b)),
        SmtFormula::And(xs) => SmtFormula::And(xs.iter().map(close_formula).collect()),
        SmtFormula::Or(xs) => SmtFormula::Or(xs.iter().map(close_formula).collect()),
        SmtFormula::Implies(a, b) => SmtFormula::implies(close_formula(a), close_formula(b)),
        SmtFormula::Iff(a, b) => SmtFormula::Iff(Box::new(close_formula(a)), Box::new(close_formula(b))),
        SmtFormula::Forall(vs, body) => SmtFormula::Forall(vs.clone(), Box::new(close_formula(body))),
    }
}

/// The quantifier-free query "some model of `Π^I` lies strictly below `I`".
pub fn minimality_query(p: &Program, i: &Interpretation) -> Result<Theory, VerifyError> {
    let atoms: Vec<Atom> = p.atoms().iter().cloned().collect();
    let reduct = semantics::reduct(p, i)?;
    let x = |a: &Atom| SmtTerm::Sym(translate::var_name(a));
    let value = |a: &Atom| SmtTerm::Num(i.value(a).value().clone());
    let mut formulas: Vec<SmtFormula> =
        atoms.iter().map(|a| SmtFormula::in_range(x(a), SmtTerm::num(0), value(a))).collect();
    formulas.extend(reduct.rules().iter().map(|r| close_formula(&translate::rule_formula(r, Mode::Inn))));
    formulas.push(SmtFormula::Or(atoms.iter().map(|a| x(a).cmp(CmpOp::Lt, value(a))).collect()));
    Ok(Theory {
        constants: atoms.iter().map(translate::var_name).collect(),
        formulas,
        strategy: Strategy::Comp,
        atoms: Vec::new(),
    })
}

fn total(p: &Program, i: &Interpretation) -> Result<Interpretation, VerifyError> {
    match p.atoms().iter().find(|a| !i.contains(a)) {
        Some(a) => Err(VerifyError::NotTotal(a.clone())),
        None => Ok(i.restrict(p.atoms())),
    }
}

/// Minimality decided by the least fixpoint of `T_{Π^I}`, for reducts in the
/// class where the fixpoint is reached within the default step cap.
pub fn fixpoint_minimal(p: &Program, i: &Interpretation) -> Result<Option<(bool, Interpretation)>, VerifyError> {
    let i = total(p, i)?;
    let reduct = semantics::reduct(p, &i)?;
    if !analysis::in_lemma1_class(&reduct) || !semantics::is_model(p, &i)? {
        return Ok(None);
    }
    // atoms occurring only under negation vanish from the reduct
    let lfp = semantics::tp_fixpoint(&reduct)?.0.restrict(p.atoms());
    Ok(Some((lfp == i, lfp)))
}

/// Exact stability for programs whose reducts have single-item heads and no
/// negation, by comparing with the least fixpoint (computed up to `cap` steps).
/// `None` when the reduct is outside that shape or the cap is hit.
pub fn exact_stable(p: &Program, i: &Interpretation, cap: usize) -> Result<Option<bool>, VerifyError> {
    let i = total(p, i)?;
    if !semantics::is_model(p, &i)? {
        return Ok(Some(false));
    }
    let reduct = semantics::reduct(p, &i)?;
    if !reduct.rules().iter().all(|r| r.head.is_single()) {
        return Ok(None);
    }
    match semantics::tp_fixpoint_with_cap(&reduct, cap) {
        Ok((lfp, _)) => Ok(Some(lfp.restrict(p.atoms()) == i)),
        Err(SemanticsError::NoFixpoint { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Checks that `i` is a stable model of `p`: a model, with no strictly smaller
/// model of the reduct. Solver failures leave minimality unknown unless the
/// fixpoint decides it.
pub fn check_stable(p: &Program, i: &Interpretation, cfg: &SolverConfig) -> Result<Verdict, VerifyError> {
    let i = total(p, i)?;
    let model_ok = semantics::is_model(p, &i)?;
    let theory = minimality_query(p, &i)?;
    let atoms: Vec<Atom> = p.atoms().iter().cloned().collect();
    let names: Vec<String> = atoms.iter().map(translate::var_name).collect();
    let mut witness = None;
    let minimal = match smtclient::emit_with_values(&theory, &names, cfg.logic.as_deref())
        .and_then(|script| smtclient::solve(&script, cfg))
    {
        Ok(raw) => match raw.status {
            Status::Unsat => Minimality::Minimal,
            Status::Sat => match read_witness(&raw.bindings, &atoms) {
                Ok(w) => {
                    witness = Some(w);
                    Minimality::NotMinimal
                }
                Err(e) => Minimality::Unknown(e.to_string()),
            },
            Status::Unknown => Minimality::Unknown("solver returned unknown".into()),
            Status::Timeout => Minimality::Unknown(format!("solver timed out after {:?}", cfg.timeout)),
            Status::Crash => Minimality::Unknown(raw.reason.unwrap_or_else(|| "solver crashed".into())),
        },
        Err(e) => Minimality::Unknown(e.to_string()),
    };
    let mut verdict = Verdict { model_ok, minimal, witness };
    if let Some((fix_minimal, lfp)) = fixpoint_minimal(p, &i)? {
        match (&verdict.minimal, fix_minimal) {
            (Minimality::Minimal, false) | (Minimality::NotMinimal, true) => {
                let solver = if verdict.minimal == Minimality::Minimal { "minimal" } else { "not minimal" };
                return Err(VerifyError::Disagreement { interpretation: fmt_interp(&i), solver });
            }
            (Minimality::Unknown(_), true) => verdict.minimal = Minimality::Minimal,
            (Minimality::Unknown(_), false) => {
                verdict.minimal = Minimality::NotMinimal;
                verdict.witness = Some(lfp);
            }
            _ => {}
        }
    }
    Ok(verdict)
}

fn read_witness(bindings: &[(String, smtclient::Sexp)], atoms: &[Atom]) -> Result<Interpretation, smtclient::SmtError> {
    let renamed: Vec<(String, smtclient::Sexp)> = bindings
        .iter()
        .map(|(n, v)| (n.strip_prefix("__x.").unwrap_or(n).to_string(), v.clone()))
        .collect();
    smtclient::parse_model(&renamed, atoms)
}

pub fn fmt_interp(i: &Interpretation) -> String {
    let parts: Vec<String> = i.iter().map(|(a, v)| format!("{a} = {v}")).collect();
    format!("{{{}}}", parts.join(", "))
}

/// Default candidate budget for [`grid_stable_models`].
pub const DEFAULT_GRID_BUDGET: u128 = 5_000_000;

const MAX_SCALE: i64 = 1 << 40;

/// Expressions over atom indices with degrees scaled to integers.
#[derive(Debug, Clone)]
enum GExpr {
    Const(i64),
    Atom(usize),
    Neg(Box<GExpr>),
    Bin(Conn, Box<GExpr>, Box<GExpr>),
}

#[derive(Debug, Clone)]
enum GItem {
    Const(i64),
    Atom(usize),
}

#[derive(Debug, Clone)]
struct GRule {
    conn: Option<Conn>,
    head: Vec<GItem>,
    body: GExpr,
}

struct Grid<'a> {
    scale: i64,
    step: i64,
    atoms: &'a [Atom],
    /// Rules with one atom outside `D` as head, grouped by that atom.
    definite: Vec<(usize, GExpr)>,
    checks: Vec<GRule>,
    in_d: Vec<bool>,
}

impl Grid<'_> {
    fn eval(&self, e: &GExpr, j: &[i64], i: &[i64]) -> i64 {
        let l = self.scale;
        match e {
            GExpr::Const(c) => *c,
            GExpr::Atom(a) => j[*a],
            // negated parts are frozen at the guessed interpretation
            GExpr::Neg(inner) => l - self.eval(inner, i, i),
            GExpr::Bin(c, a, b) => {
                let (x, y) = (self.eval(a, j, i), self.eval(b, j, i));
                match c {
                    Conn::LukAnd => (x + y - l).max(0),
                    Conn::LukOr => (x + y).min(l),
                    Conn::GodelOr => x.max(y),
                    Conn::GodelAnd => x.min(y),
                }
            }
        }
    }

    fn head_value(&self, r: &GRule, j: &[i64]) -> i64 {
        let l = self.scale;
        let vals = r.head.iter().map(|h| match h {
            GItem::Const(c) => *c,
            GItem::Atom(a) => j[*a],
        });
        match r.conn {
            None | Some(Conn::GodelOr) => vals.max().unwrap_or(0),
            Some(Conn::GodelAnd) => vals.min().unwrap_or(0),
            Some(Conn::LukOr) => vals.sum::<i64>().min(l),
            Some(Conn::LukAnd) => {
                let n = r.head.len() as i64;
                (vals.sum::<i64>() - (n - 1) * l).max(0)
            }
        }
    }

    fn ceil(&self, v: i64) -> i64 {
        Integer::div_ceil(&v, &self.step) * self.step
    }

    /// Least grid interpretation agreeing with `j` on `D` that satisfies the
    /// definite rules of the reduct w.r.t. `i`.
    fn least(&self, j: &mut [i64], i: &[i64]) {
        for (a, v) in j.iter_mut().enumerate() {
            if !self.in_d[a] {
                *v = 0;
            }
        }
        loop {
            let mut changed = false;
            for (a, body) in &self.definite {
                let v = self.ceil(self.eval(body, j, i));
                if v > j[*a] {
                    j[*a] = v;
                    changed = true;
                }
            }
            if !changed {
                return;
            }
        }
    }

    fn checks_hold(&self, j: &[i64], i: &[i64]) -> bool {
        self.checks.iter().all(|r| self.head_value(r, j) >= self.eval(&r.body, j, i))
    }

    fn definite_hold(&self, j: &[i64], i: &[i64]) -> bool {
        self.definite.iter().all(|(a, body)| j[*a] >= self.eval(body, j, i))
    }
}

fn scaled(d: &TruthDegree, scale: i64) -> i64 {
    let v = d.value() * num_rational::BigRational::from_integer(scale.into());
    v.to_integer().to_i64().expect("scaled degree fits")
}

fn compile_expr(e: &Expr, index: &dyn Fn(&Atom) -> usize, scale: i64) -> GExpr {
    match e {
        Expr::Const(c) => GExpr::Const(scaled(c, scale)),
        Expr::Atom(a) => GExpr::Atom(index(a)),
        Expr::Neg(inner) => GExpr::Neg(Box::new(compile_expr(inner, index, scale))),
        Expr::Bin(c, a, b) => {
            GExpr::Bin(*c, Box::new(compile_expr(a, index, scale)), Box::new(compile_expr(b, index, scale)))
        }
    }
}

fn collect_denominators(e: &Expr, out: &mut Vec<num_bigint::BigInt>) {
    match e {
        Expr::Const(c) => out.push(c.value().denom().clone()),
        Expr::Atom(_) => {}
        Expr::Neg(inner) => collect_denominators(inner, out),
        Expr::Bin(_, a, b) => {
            collect_denominators(a, out);
            collect_denominators(b, out);
        }
    }
}

fn negated_atoms(e: &Expr, under_neg: bool, out: &mut BTreeSet<Atom>) {
    match e {
        Expr::Const(_) => {}
        Expr::Atom(a) => {
            if under_neg {
                out.insert(a.clone());
            }
        }
        Expr::Neg(inner) => negated_atoms(inner, true, out),
        Expr::Bin(_, a, b) => {
            negated_atoms(a, under_neg, out);
            negated_atoms(b, under_neg, out);
        }
    }
}

/// All stable models of `p` whose degrees lie on `Q_k`, where minimality is also
/// judged over `Q_k` only.
///
/// Only atoms under negation or in multi-item heads are guessed; the rest follow
/// from the least grid model of the remaining rules.
pub fn grid_stable_models(p: &Program, k: u32, budget: u128) -> Result<Vec<Interpretation>, VerifyError> {
    assert!(k >= 1, "grid resolution must be positive");
    let atoms: Vec<Atom> = p.atoms().iter().cloned().collect();
    let index = |a: &Atom| atoms.binary_search(a).expect("atom of program");

    let mut dens = vec![num_bigint::BigInt::from(k)];
    for r in p.rules() {
        collect_denominators(&r.body, &mut dens);
        for item in r.head.items() {
            if let HeadItem::Const(c) = item {
                dens.push(c.value().denom().clone());
            }
        }
    }
    let mut scale = num_bigint::BigInt::from(1);
    for d in dens {
        scale = scale.lcm(&d);
        if scale > num_bigint::BigInt::from(MAX_SCALE) {
            return Err(VerifyError::Scale(MAX_SCALE));
        }
    }
    let scale = scale.to_i64().expect("bounded scale");

    let mut guessed: BTreeSet<Atom> = BTreeSet::new();
    let mut in_d = vec![false; atoms.len()];
    for r in p.rules() {
        negated_atoms(&r.body, false, &mut guessed);
        if !r.head.is_single() {
            for a in r.head.atoms() {
                in_d[index(&a)] = true;
            }
        }
    }
    guessed.extend(atoms.iter().enumerate().filter(|(n, _)| in_d[*n]).map(|(_, a)| a.clone()));
    let estimate = (k as u128 + 1).checked_pow(guessed.len() as u32).unwrap_or(u128::MAX);
    if estimate > budget {
        return Err(VerifyError::Budget { estimate, limit: budget });
    }

    let mut definite = Vec::new();
    let mut checks = Vec::new();
    for r in p.rules() {
        let body = compile_expr(&r.body, &index, scale);
        match r.head.single_atom() {
            Some(a) if !in_d[index(a)] => definite.push((index(a), body)),
            _ => checks.push(GRule {
                conn: match r.head.conn() {
                    HeadConn::Single => None,
                    HeadConn::Conn(c) => Some(c),
                },
                head: r
                    .head
                    .items()
                    .iter()
                    .map(|h| match h {
                        HeadItem::Atom(a) => GItem::Atom(index(a)),
                        HeadItem::Const(c) => GItem::Const(scaled(c, scale)),
                    })
                    .collect(),
                body,
            }),
        }
    }
    let grid = Grid { scale, step: scale / k as i64, atoms: &atoms, definite, checks, in_d };
    let guess_idx: Vec<usize> = guessed.iter().map(index).collect();
    let d_idx: Vec<usize> = (0..atoms.len()).filter(|&a| grid.in_d[a]).collect();

    let mut found = Vec::new();
    let mut g = vec![0i64; atoms.len()];
    let mut digits = vec![0u32; guess_idx.len()];
    loop {
        for (slot, &a) in guess_idx.iter().enumerate() {
            g[a] = digits[slot] as i64 * grid.step;
        }
        if let Some(m) = candidate(&grid, &g, &guess_idx, &d_idx) {
            found.push(to_interpretation(&m, grid.atoms, scale));
        }
        if !advance(&mut digits, k) {
            break;
        }
    }
    found.sort();
    Ok(found)
}

/// Increments a base-`k+1` counter; false once it wraps around.
fn advance(digits: &mut [u32], k: u32) -> bool {
    for d in digits.iter_mut() {
        if *d < k {
            *d += 1;
            return true;
        }
        *d = 0;
    }
    false
}

fn candidate(grid: &Grid<'_>, g: &[i64], guess_idx: &[usize], d_idx: &[usize]) -> Option<Vec<i64>> {
    let mut m = g.to_vec();
    grid.least(&mut m, g);
    if guess_idx.iter().any(|&a| m[a] != g[a]) || !grid.checks_hold(&m, g) || !grid.definite_hold(&m, g) {
        return None;
    }
    // search a smaller reduct model: lower some D atoms, rebuild the rest
    let bounds: Vec<u32> = d_idx.iter().map(|&a| (m[a] / grid.step) as u32).collect();
    let mut digits = vec![0u32; d_idx.len()];
    let mut j = m.clone();
    loop {
        if digits != bounds {
            for (slot, &a) in d_idx.iter().enumerate() {
                j[a] = digits[slot] as i64 * grid.step;
            }
            grid.least(&mut j, g);
            if grid.checks_hold(&j, g) {
                return None;
            }
        }
        if !advance_bounded(&mut digits, &bounds) {
            break;
        }
    }
    Some(m)
}

fn advance_bounded(digits: &mut [u32], bounds: &[u32]) -> bool {
    for (d, &b) in digits.iter_mut().zip(bounds) {
        if *d < b {
            *d += 1;
            return true;
        }
        *d = 0;
    }
    false
}

fn to_interpretation(v: &[i64], atoms: &[Atom], scale: i64) -> Interpretation {
    Interpretation::from_pairs(
        atoms.iter().zip(v).map(|(a, &x)| (a.clone(), TruthDegree::ratio(x, scale).expect("grid value in range"))),
    )
}
