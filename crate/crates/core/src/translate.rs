//! Translation of programs into first-order theories over the reals: the quantified
//! encoding `smt`, completion `comp`, refined completion `rcomp` and ordered
//! completion `ocomp`, plus strategy selection.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{self, ProgramClass};
use crate::program::{Atom, Conn, Expr, HeadConn, HeadExpr, HeadItem, Program, Rule};
use crate::rewrite::{self, RewriteError};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SmtTerm {
    Num(BigRational),
    Sym(String),
    Var(String),
    Add(Box<SmtTerm>, Box<SmtTerm>),
    Sub(Box<SmtTerm>, Box<SmtTerm>),
    Ite(Box<SmtFormula>, Box<SmtTerm>, Box<SmtTerm>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Lt,
    Le,
    Ge,
    Gt,
    Eq,
    Ne,
}

impl CmpOp {
    pub fn holds(self, a: &BigRational, b: &BigRational) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Ge => a >= b,
            CmpOp::Gt => a > b,
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
        }
    }
}

/// Formulas. `And(vec![])` is ⊤ and `Or(vec![])` is ⊥.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SmtFormula {
    Cmp(CmpOp, SmtTerm, SmtTerm),
    And(Vec<SmtFormula>),
    Or(Vec<SmtFormula>),
    Implies(Box<SmtFormula>, Box<SmtFormula>),
    Iff(Box<SmtFormula>, Box<SmtFormula>),
    Forall(Vec<String>, Box<SmtFormula>),
}

impl SmtTerm {
    pub fn num(n: i64) -> Self {
        SmtTerm::Num(BigRational::from_integer(n.into()))
    }

    pub fn add(a: SmtTerm, b: SmtTerm) -> Self {
        SmtTerm::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: SmtTerm, b: SmtTerm) -> Self {
        SmtTerm::Sub(Box::new(a), Box::new(b))
    }

    pub fn ite(c: SmtFormula, a: SmtTerm, b: SmtTerm) -> Self {
        SmtTerm::Ite(Box::new(c), Box::new(a), Box::new(b))
    }

    /// Left-associated sum. Panics on an empty iterator.
    pub fn sum(items: impl IntoIterator<Item = SmtTerm>) -> Self {
        let mut it = items.into_iter();
        let first = it.next().expect("sum of at least one term");
        it.fold(first, SmtTerm::add)
    }

    pub fn cmp(self, op: CmpOp, other: SmtTerm) -> SmtFormula {
        SmtFormula::Cmp(op, self, other)
    }

    fn visit(&self, syms: &mut dyn FnMut(&SmtTerm)) {
        syms(self);
        match self {
            SmtTerm::Num(_) | SmtTerm::Sym(_) | SmtTerm::Var(_) => {}
            SmtTerm::Add(a, b) | SmtTerm::Sub(a, b) => {
                a.visit(syms);
                b.visit(syms);
            }
            SmtTerm::Ite(c, a, b) => {
                c.visit_terms(syms);
                a.visit(syms);
                b.visit(syms);
            }
        }
    }

    /// Evaluates under an assignment of symbols and variables.
    pub fn eval(&self, env: &HashMap<String, BigRational>) -> Option<BigRational> {
        Some(match self {
            SmtTerm::Num(n) => n.clone(),
            SmtTerm::Sym(s) | SmtTerm::Var(s) => env.get(s)?.clone(),
            SmtTerm::Add(a, b) => a.eval(env)? + b.eval(env)?,
            SmtTerm::Sub(a, b) => a.eval(env)? - b.eval(env)?,
            SmtTerm::Ite(c, a, b) => {
                if c.eval(env)? {
                    a.eval(env)?
                } else {
                    b.eval(env)?
                }
            }
        })
    }
}

impl SmtFormula {
    pub fn tt() -> Self {
        SmtFormula::And(Vec::new())
    }

    pub fn ff() -> Self {
        SmtFormula::Or(Vec::new())
    }

    pub fn implies(a: SmtFormula, b: SmtFormula) -> Self {
        SmtFormula::Implies(Box::new(a), Box::new(b))
    }

    /// `t ∈ [lo, hi]`.
    pub fn in_range(t: SmtTerm, lo: SmtTerm, hi: SmtTerm) -> Self {
        SmtFormula::And(vec![t.clone().cmp(CmpOp::Ge, lo), t.cmp(CmpOp::Le, hi)])
    }

    fn visit_terms(&self, f: &mut dyn FnMut(&SmtTerm)) {
        match self {
            SmtFormula::Cmp(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            SmtFormula::And(xs) | SmtFormula::Or(xs) => xs.iter().for_each(|x| x.visit_terms(f)),
            SmtFormula::Implies(a, b) | SmtFormula::Iff(a, b) => {
                a.visit_terms(f);
                b.visit_terms(f);
            }
            SmtFormula::Forall(_, body) => body.visit_terms(f),
        }
    }

    pub fn has_quantifier(&self) -> bool {
        match self {
            SmtFormula::Cmp(..) => false,
            SmtFormula::And(xs) | SmtFormula::Or(xs) => xs.iter().any(SmtFormula::has_quantifier),
            SmtFormula::Implies(a, b) | SmtFormula::Iff(a, b) => a.has_quantifier() || b.has_quantifier(),
            SmtFormula::Forall(vars, _) => !vars.is_empty(),
        }
    }

    /// Evaluates a formula; `None` for quantified formulas or unassigned names.
    pub fn eval(&self, env: &HashMap<String, BigRational>) -> Option<bool> {
        Some(match self {
            SmtFormula::Cmp(op, a, b) => op.holds(&a.eval(env)?, &b.eval(env)?),
            SmtFormula::And(xs) => {
                let mut all = true;
                for x in xs {
                    all &= x.eval(env)?;
                }
                all
            }
            SmtFormula::Or(xs) => {
                let mut any = false;
                for x in xs {
                    any |= x.eval(env)?;
                }
                any
            }
            SmtFormula::Implies(a, b) => !a.eval(env)? || b.eval(env)?,
            SmtFormula::Iff(a, b) => a.eval(env)? == b.eval(env)?,
            SmtFormula::Forall(vars, body) if vars.is_empty() => body.eval(env)?,
            SmtFormula::Forall(..) => return None,
        })
    }

    /// Names of free variables and symbols used in the formula.
    fn names(&self, bound: &mut Vec<String>, syms: &mut BTreeSet<String>, free_vars: &mut BTreeSet<String>) {
        match self {
            SmtFormula::Forall(vars, body) => {
                let before = bound.len();
                bound.extend(vars.iter().cloned());
                body.names(bound, syms, free_vars);
                bound.truncate(before);
            }
            SmtFormula::And(xs) | SmtFormula::Or(xs) => {
                xs.iter().for_each(|x| x.names(bound, syms, free_vars))
            }
            SmtFormula::Implies(a, b) | SmtFormula::Iff(a, b) => {
                a.names(bound, syms, free_vars);
                b.names(bound, syms, free_vars);
            }
            SmtFormula::Cmp(..) => {
                let mut leaf = |t: &SmtTerm| match t {
                    SmtTerm::Sym(s) => {
                        syms.insert(s.clone());
                    }
                    SmtTerm::Var(v) if !bound.contains(v) => {
                        free_vars.insert(v.clone());
                    }
                    _ => {}
                };
                self.visit_terms(&mut leaf);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Smt,
    Comp,
    Rcomp,
    Ocomp,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Smt => "smt",
            Strategy::Comp => "comp",
            Strategy::Rcomp => "rcomp",
            Strategy::Ocomp => "ocomp",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "smt" => Ok(Strategy::Smt),
            "comp" => Ok(Strategy::Comp),
            "rcomp" => Ok(Strategy::Rcomp),
            "ocomp" => Ok(Strategy::Ocomp),
            other => Err(format!("unknown strategy `{other}`")),
        }
    }
}

/// A closed theory together with its declared constants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Theory {
    /// Declared constant symbols, in declaration order.
    pub constants: Vec<String>,
    pub formulas: Vec<SmtFormula>,
    pub strategy: Strategy,
    /// Program atoms whose constants carry the answer.
    pub atoms: Vec<Atom>,
}

impl Theory {
    pub fn has_quantifier(&self) -> bool {
        self.formulas.iter().any(SmtFormula::has_quantifier)
    }

    /// Symbols used but not declared, and variables used outside any binder.
    pub fn undeclared(&self) -> Vec<String> {
        let (mut syms, mut free) = (BTreeSet::new(), BTreeSet::new());
        for f in &self.formulas {
            f.names(&mut Vec::new(), &mut syms, &mut free);
        }
        let declared: BTreeSet<&String> = self.constants.iter().collect();
        syms.into_iter().filter(|s| !declared.contains(s)).chain(free).collect()
    }

    /// Evaluates every formula under `env`; `None` if some formula is quantified.
    pub fn holds(&self, env: &HashMap<String, BigRational>) -> Option<bool> {
        let mut all = true;
        for f in &self.formulas {
            all &= f.eval(env)?;
        }
        Some(all)
    }
}

/// Name of the SMT constant for an atom.
pub fn sym_name(a: &Atom) -> String {
    a.name().to_string()
}

/// Name of the bound variable `x_p` used by the minimality check.
pub fn var_name(a: &Atom) -> String {
    format!("__x.{}", a.name())
}

/// Name of the rank constant `r_p`.
pub fn rank_name(a: &Atom) -> String {
    format!("__r.{}", a.name())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Out,
    Inn,
}

fn atom_term(a: &Atom, mode: Mode) -> SmtTerm {
    match mode {
        Mode::Out => SmtTerm::Sym(sym_name(a)),
        Mode::Inn => SmtTerm::Var(var_name(a)),
    }
}

fn connective(c: Conn, a: SmtTerm, b: SmtTerm) -> SmtTerm {
    match c {
        Conn::LukOr => {
            let t = SmtTerm::add(a, b);
            SmtTerm::ite(t.clone().cmp(CmpOp::Le, SmtTerm::num(1)), t, SmtTerm::num(1))
        }
        Conn::LukAnd => {
            let t = SmtTerm::sub(SmtTerm::add(a, b), SmtTerm::num(1));
            SmtTerm::ite(t.clone().cmp(CmpOp::Ge, SmtTerm::num(0)), t, SmtTerm::num(0))
        }
        Conn::GodelOr => SmtTerm::ite(a.clone().cmp(CmpOp::Ge, b.clone()), a, b),
        Conn::GodelAnd => SmtTerm::ite(a.clone().cmp(CmpOp::Le, b.clone()), a, b),
    }
}

/// `out(e)` / `inn(e)`. Negated subexpressions are always translated by `out`.
pub fn term_of(e: &Expr, mode: Mode) -> SmtTerm {
    match e {
        Expr::Const(c) => SmtTerm::Num(c.value().clone()),
        Expr::Atom(a) => atom_term(a, mode),
        Expr::Neg(inner) => SmtTerm::sub(SmtTerm::num(1), term_of(inner, Mode::Out)),
        Expr::Bin(c, a, b) => connective(*c, term_of(a, mode), term_of(b, mode)),
    }
}

fn item_term(i: &HeadItem, mode: Mode) -> SmtTerm {
    match i {
        HeadItem::Atom(a) => atom_term(a, mode),
        HeadItem::Const(c) => SmtTerm::Num(c.value().clone()),
    }
}

/// Head translation with n-ary sums for the Łukasiewicz connectives.
pub fn head_term(h: &HeadExpr, mode: Mode) -> SmtTerm {
    let items: Vec<SmtTerm> = h.items().iter().map(|i| item_term(i, mode)).collect();
    match h.conn() {
        HeadConn::Single => items.into_iter().next().expect("nonempty head"),
        HeadConn::Conn(Conn::LukOr) => {
            let t = SmtTerm::sum(items);
            SmtTerm::ite(t.clone().cmp(CmpOp::Le, SmtTerm::num(1)), t, SmtTerm::num(1))
        }
        HeadConn::Conn(Conn::LukAnd) => {
            let n = items.len() as i64;
            let t = SmtTerm::sub(SmtTerm::sum(items), SmtTerm::num(n - 1));
            SmtTerm::ite(t.clone().cmp(CmpOp::Ge, SmtTerm::num(0)), t, SmtTerm::num(0))
        }
        HeadConn::Conn(c) => {
            let mut it = items.into_iter();
            let first = it.next().expect("nonempty head");
            it.fold(first, |acc, t| connective(c, acc, t))
        }
    }
}

/// `out(r)` or `inn(r)`: head ≥ body.
pub fn rule_formula(r: &Rule, mode: Mode) -> SmtFormula {
    head_term(&r.head, mode).cmp(CmpOp::Ge, term_of(&r.body, mode))
}

fn unit_range(a: &Atom) -> SmtFormula {
    SmtFormula::in_range(SmtTerm::Sym(sym_name(a)), SmtTerm::num(0), SmtTerm::num(1))
}

/// `smt(Π)`: range and `out` formulas plus the minimality check `φ_inn`.
pub fn smt_theory(p: &Program) -> Theory {
    let atoms: Vec<Atom> = p.atoms().iter().cloned().collect();
    let mut formulas: Vec<SmtFormula> = atoms.iter().map(unit_range).collect();
    formulas.extend(p.rules().iter().map(|r| rule_formula(r, Mode::Out)));
    let vars: Vec<String> = atoms.iter().map(var_name).collect();
    let mut antecedent: Vec<SmtFormula> = atoms
        .iter()
        .map(|a| SmtFormula::in_range(SmtTerm::Var(var_name(a)), SmtTerm::num(0), SmtTerm::Sym(sym_name(a))))
        .collect();
    antecedent.extend(p.rules().iter().map(|r| rule_formula(r, Mode::Inn)));
    let consequent = atoms
        .iter()
        .map(|a| SmtTerm::Var(var_name(a)).cmp(CmpOp::Eq, SmtTerm::Sym(sym_name(a))))
        .collect();
    formulas.push(SmtFormula::Forall(
        vars,
        Box::new(SmtFormula::implies(SmtFormula::And(antecedent), SmtFormula::And(consequent))),
    ));
    Theory { constants: atoms.iter().map(sym_name).collect(), formulas, strategy: Strategy::Smt, atoms }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranslateError {
    #[error("completion needs atomic heads; offending rule: {0}")]
    NonAtomicHead(String),
    #[error("strategy {strategy} is not applicable: {condition}")]
    Precondition { strategy: Strategy, condition: String },
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
}

fn check_atomic_heads(p: &Program) -> Result<(), TranslateError> {
    match p.rules().iter().find(|r| !r.head.is_single()) {
        Some(r) => Err(TranslateError::NonAtomicHead(r.to_string())),
        None => Ok(()),
    }
}

/// `supp(p, {β1..βn})`: `0` when empty, `out(β)` for one rule, otherwise the
/// ite-max chain in rule order.
pub fn supp<'a>(bodies: impl IntoIterator<Item = &'a Expr>) -> SmtTerm {
    let terms: Vec<SmtTerm> = bodies.into_iter().map(|b| term_of(b, Mode::Out)).collect();
    max_chain(terms, SmtTerm::num(0))
}

fn max_chain(terms: Vec<SmtTerm>, empty: SmtTerm) -> SmtTerm {
    let mut it = terms.into_iter().rev();
    let Some(last) = it.next() else { return empty };
    it.fold(last, |t, head| SmtTerm::ite(head.clone().cmp(CmpOp::Ge, t.clone()), head, t))
}

/// `rank({q1..qn})`: ite-max chain over rank constants, `0` for the empty set.
pub fn rank(atoms: &[Atom]) -> SmtTerm {
    max_chain(atoms.iter().map(|a| SmtTerm::Sym(rank_name(a))).collect(), SmtTerm::num(0))
}

fn bodies_of<'a>(p: &'a Program, a: &'a Atom) -> Vec<&'a Expr> {
    p.heads_of(a).map(|r| &r.body).collect()
}

/// `comp(Π)` for programs with atomic heads.
pub fn comp(p: &Program) -> Result<Theory, TranslateError> {
    check_atomic_heads(p)?;
    let atoms: Vec<Atom> = p.atoms().iter().cloned().collect();
    let mut formulas = Vec::new();
    for a in &atoms {
        let def = SmtTerm::Sym(sym_name(a)).cmp(CmpOp::Eq, supp(bodies_of(p, a)));
        formulas.push(SmtFormula::And(vec![unit_range(a), def]));
    }
    formulas.extend(p.constraints().map(|r| rule_formula(r, Mode::Out)));
    Ok(Theory { constants: atoms.iter().map(sym_name).collect(), formulas, strategy: Strategy::Comp, atoms })
}

/// `rcomp(Π)`: completion of `bool⁻(Π)` with crispified atoms forced to `{0, 1}`
/// and linked to their surrogates by `b_p = ite(p > 0, 1, 0)`.
pub fn rcomp(p: &Program) -> Result<Theory, TranslateError> {
    check_atomic_heads(&analysis::without_bool(p))?;
    let minus = rewrite::bool_minus(p);
    let q = &minus.program;
    let mut atoms: BTreeSet<Atom> = q.atoms().clone();
    atoms.extend(minus.bool_atoms.keys().cloned());
    let atoms: Vec<Atom> = atoms.into_iter().collect();
    let mut formulas = Vec::new();
    for a in &atoms {
        let support = supp(bodies_of(q, a));
        let value = if minus.bool_atoms.contains_key(a) {
            SmtTerm::ite(support.cmp(CmpOp::Gt, SmtTerm::num(0)), SmtTerm::num(1), SmtTerm::num(0))
        } else {
            support
        };
        let def = SmtTerm::Sym(sym_name(a)).cmp(CmpOp::Eq, value);
        formulas.push(SmtFormula::And(vec![unit_range(a), def]));
    }
    formulas.extend(q.constraints().map(|r| rule_formula(r, Mode::Out)));
    for (a, b) in &minus.bool_atoms {
        let crisp = SmtTerm::ite(
            SmtTerm::Sym(sym_name(a)).cmp(CmpOp::Gt, SmtTerm::num(0)),
            SmtTerm::num(1),
            SmtTerm::num(0),
        );
        formulas.push(SmtTerm::Sym(sym_name(b)).cmp(CmpOp::Eq, crisp));
    }
    Ok(Theory { constants: atoms.iter().map(sym_name).collect(), formulas, strategy: Strategy::Rcomp, atoms })
}

/// `ocomp(Π)`: completion plus rank constants `r_p ∈ [1..|At(Π)|]` and, for every
/// atom, `p > 0 → osupp(p)`.
pub fn ocomp(p: &Program) -> Result<Theory, TranslateError> {
    let mut th = comp(p)?;
    th.strategy = Strategy::Ocomp;
    let n = th.atoms.len() as i64;
    for a in th.atoms.clone() {
        let r = SmtTerm::Sym(rank_name(&a));
        let domain = SmtFormula::Or((1..=n).map(|k| r.clone().cmp(CmpOp::Eq, SmtTerm::num(k))).collect());
        let osupp = SmtFormula::Or(
            p.heads_of(&a)
                .map(|rule| {
                    let value = SmtTerm::Sym(sym_name(&a)).cmp(CmpOp::Eq, term_of(&rule.body, Mode::Out));
                    let order = r.clone().cmp(
                        CmpOp::Eq,
                        SmtTerm::add(SmtTerm::num(1), rank(&rule.body.positive_atoms())),
                    );
                    SmtFormula::And(vec![value, order])
                })
                .collect(),
        );
        let positive = SmtTerm::Sym(sym_name(&a)).cmp(CmpOp::Gt, SmtTerm::num(0));
        th.formulas.push(SmtFormula::And(vec![domain, SmtFormula::implies(positive, osupp)]));
        th.constants.push(rank_name(&a));
    }
    Ok(th)
}

/// The outcome of strategy selection: the theory and the program it encodes.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub strategy: Strategy,
    pub theory: Theory,
    /// The rewritten program the theory was built from.
    pub rewritten: Program,
    /// Crispified atoms and their surrogates (rcomp only).
    pub bool_atoms: BTreeMap<Atom, Atom>,
}

/// The strategy chosen automatically from a classification.
pub fn auto_strategy(c: &ProgramClass) -> Strategy {
    if c.acyclic_mod_bool {
        Strategy::Rcomp
    } else if ocomp_applies(c) {
        Strategy::Ocomp
    } else {
        Strategy::Smt
    }
}

fn ocomp_applies(c: &ProgramClass) -> bool {
    c.hcf
        && c.nonrec_lukor
        && c.head_conns_within(&[HeadConn::Conn(Conn::GodelAnd), HeadConn::Conn(Conn::LukOr), HeadConn::Single])
}

pub fn select_pipeline(p: &Program, c: &ProgramClass) -> Result<Pipeline, TranslateError> {
    build_pipeline(p, c, auto_strategy(c))
}

/// Builds the theory for `strategy`, refusing strategies whose preconditions fail.
pub fn build_pipeline(p: &Program, c: &ProgramClass, strategy: Strategy) -> Result<Pipeline, TranslateError> {
    let refuse = |condition: &str| TranslateError::Precondition { strategy, condition: condition.to_string() };
    let simplified = rewrite::simp(p).program;
    match strategy {
        Strategy::Smt => {
            let theory = smt_theory(&simplified);
            Ok(Pipeline { strategy, theory, rewritten: simplified, bool_atoms: BTreeMap::new() })
        }
        Strategy::Rcomp | Strategy::Comp => {
            if !c.acyclic_mod_bool {
                return Err(refuse("the program without its crispifying rules is not acyclic"));
            }
            let shifted = rewrite::shift(&simplified)?.program;
            let bool_atoms = rewrite::bool_minus(&shifted).bool_atoms;
            if strategy == Strategy::Comp {
                if !bool_atoms.is_empty() {
                    return Err(refuse("the shifted program has crispifying rules; use rcomp"));
                }
                let theory = comp(&shifted)?;
                return Ok(Pipeline { strategy, theory, rewritten: shifted, bool_atoms });
            }
            let theory = rcomp(&shifted)?;
            Ok(Pipeline { strategy, theory, rewritten: shifted, bool_atoms })
        }
        Strategy::Ocomp => {
            if !c.hcf {
                return Err(refuse("the program is not head-cycle-free"));
            }
            if !c.nonrec_lukor {
                return Err(refuse("⊕ occurs recursively in a rule body"));
            }
            if !ocomp_applies(c) {
                return Err(refuse("head connectives other than ⋏ and ⊕ occur"));
            }
            let shifted = rewrite::shift(&simplified)?.program;
            let theory = ocomp(&shifted)?;
            Ok(Pipeline { strategy, theory, rewritten: shifted, bool_atoms: BTreeMap::new() })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::classify;
    use crate::frontend::parse_program;

    fn prog(text: &str) -> Program {
        parse_program(text).unwrap()
    }

    fn q(s: &str) -> BigRational {
        crate::degree::parse_rational(s).unwrap()
    }

    fn sym(s: &str) -> SmtTerm {
        SmtTerm::Sym(s.into())
    }

    fn env(pairs: &[(&str, &str)]) -> HashMap<String, BigRational> {
        pairs.iter().map(|(k, v)| (k.to_string(), q(v))).collect()
    }

    #[test]
    fn out_translation_of_luk_or() {
        let t = term_of(&Expr::bin(Conn::LukOr, Expr::atom("q"), Expr::atom("s")), Mode::Out);
        let sum = SmtTerm::add(sym("q"), sym("s"));
        assert_eq!(t, SmtTerm::ite(sum.clone().cmp(CmpOp::Le, SmtTerm::num(1)), sum, SmtTerm::num(1)));
    }

    #[test]
    fn negation_is_always_out() {
        let t = term_of(&Expr::neg(Expr::neg(Expr::atom("p"))), Mode::Inn);
        assert_eq!(t, SmtTerm::sub(SmtTerm::num(1), SmtTerm::sub(SmtTerm::num(1), sym("p"))));
        let t = term_of(&Expr::bin(Conn::LukAnd, Expr::atom("p"), Expr::neg(Expr::atom("p"))), Mode::Inn);
        let mut vars = Vec::new();
        t.visit(&mut |x| {
            if let SmtTerm::Var(v) = x {
                vars.push(v.clone())
            }
        });
        vars.dedup();
        assert_eq!(vars, vec!["__x.p".to_string()]);
    }

    #[test]
    fn constants_translate_exactly() {
        let c = Expr::Const("0.3".parse().unwrap());
        assert_eq!(term_of(&c, Mode::Out), SmtTerm::Num(q("3/10")));
        assert_eq!(term_of(&c, Mode::Inn), SmtTerm::Num(q("3/10")));
    }

    #[test]
    fn smt_theory_shape() {
        let pi2 = prog("p :- q || not s.\nq + s :- not not p.");
        let th = smt_theory(&pi2);
        assert_eq!(th.constants, vec!["p", "q", "s"]);
        assert_eq!(th.formulas.len(), 3 + 2 + 1);
        assert!(th.undeclared().is_empty());
        let SmtFormula::Forall(vars, _) = th.formulas.last().unwrap() else { panic!() };
        assert_eq!(vars, &["__x.p", "__x.q", "__x.s"]);

        let empty = smt_theory(&Program::default());
        assert!(empty.constants.is_empty());
        assert_eq!(empty.formulas.len(), 1);
        assert!(!empty.has_quantifier());
        assert_eq!(empty.holds(&HashMap::new()), Some(true));
    }

    #[test]
    fn comp_of_shifted_example() {
        // the shift of q + s :- not not p, written out without further simplification
        let p = prog("p :- q || not s.\nq :- not not p * not s.\ns :- not not p * not q.");
        let th = comp(&p).unwrap();
        let t1 = SmtTerm::sub(
            SmtTerm::add(
                SmtTerm::sub(SmtTerm::num(1), SmtTerm::sub(SmtTerm::num(1), sym("p"))),
                SmtTerm::sub(SmtTerm::num(1), sym("s")),
            ),
            SmtTerm::num(1),
        );
        let q_def = sym("q").cmp(
            CmpOp::Eq,
            SmtTerm::ite(t1.clone().cmp(CmpOp::Ge, SmtTerm::num(0)), t1, SmtTerm::num(0)),
        );
        assert_eq!(th.formulas[1], SmtFormula::And(vec![unit_range(&Atom::new("q")), q_def]));
        assert_eq!(th.holds(&env(&[("p", "1"), ("q", "1"), ("s", "0")])), Some(true));
        assert_eq!(th.holds(&env(&[("p", "1/2"), ("q", "0"), ("s", "1/2")])), Some(true));
        assert_eq!(th.holds(&env(&[("p", "1"), ("q", "1"), ("s", "1")])), Some(false));
    }

    #[test]
    fn comp_support_chain() {
        let th = comp(&prog("p :- 0.1.\np :- q.\nq :- p.")).unwrap();
        let expected = SmtTerm::ite(SmtTerm::Num(q("1/10")).cmp(CmpOp::Ge, sym("q")), SmtTerm::Num(q("1/10")), sym("q"));
        assert_eq!(th.formulas[0], SmtFormula::And(vec![unit_range(&Atom::new("p")), sym("p").cmp(CmpOp::Eq, expected)]));
        assert_eq!(th.formulas[1], SmtFormula::And(vec![unit_range(&Atom::new("q")), sym("q").cmp(CmpOp::Eq, sym("p"))]));
        assert!(comp(&Program::default()).unwrap().formulas.is_empty());
        assert!(matches!(comp(&prog("p + q :- 1.")), Err(TranslateError::NonAtomicHead(_))));
    }

    #[test]
    fn ocomp_example_model() {
        let th = ocomp(&prog("p :- 0.1.\np :- q.\nq :- p.")).unwrap();
        assert_eq!(th.constants, vec!["p", "q", "__r.p", "__r.q"]);
        let good = env(&[("p", "1/10"), ("q", "1/10"), ("__r.p", "1"), ("__r.q", "2")]);
        assert_eq!(th.holds(&good), Some(true));
        let swapped = env(&[("p", "1/10"), ("q", "1/10"), ("__r.p", "2"), ("__r.q", "1")]);
        assert_eq!(th.holds(&swapped), Some(false));
        let unsupported = env(&[("p", "1/2"), ("q", "1/2"), ("__r.p", "1"), ("__r.q", "2")]);
        assert_eq!(th.holds(&unsupported), Some(false));
        assert!(ocomp(&Program::default()).unwrap().formulas.is_empty());
    }

    #[test]
    fn ocomp_rejects_recursive_luk_or_cycle() {
        let th = ocomp(&prog("p :- p + 0.1.")).unwrap();
        for p in ["0", "1/2", "1"] {
            for r in ["0", "1", "2"] {
                assert_eq!(th.holds(&env(&[("p", p), ("__r.p", r)])), Some(false), "p={p} r={r}");
            }
        }
    }

    #[test]
    fn rcomp_lifts_crisp_atoms() {
        let th = rcomp(&prog("p :- p + p.\np :- 0.4.")).unwrap();
        assert_eq!(th.constants, vec!["__b1", "p"]);
        assert_eq!(th.holds(&env(&[("p", "1"), ("__b1", "1")])), Some(true));
        assert_eq!(th.holds(&env(&[("p", "2/5"), ("__b1", "1")])), Some(false));
        assert_eq!(th.holds(&env(&[("p", "0"), ("__b1", "0")])), Some(false));

        let plain = prog("p :- not q.\nq :- 1/2.");
        let (a, b) = (rcomp(&plain).unwrap(), comp(&plain).unwrap());
        assert_eq!(a.formulas, b.formulas);
    }

    #[test]
    fn rcomp_after_luk_and_shift() {
        let shifted = rewrite::shift(&prog("p * s :- 0.5.")).unwrap().program;
        let th = rcomp(&shifted).unwrap();
        assert!(th.undeclared().is_empty());
        let mut e = env(&[("p", "3/4"), ("s", "3/4"), ("__q1", "1"), ("__b1", "1")]);
        for (name, value) in [("__f1", "3/4"), ("__f2", "3/4")] {
            e.insert(name.into(), q(value));
        }
        assert_eq!(th.holds(&e), Some(true), "{:#?}", th.formulas);
    }

    #[test]
    fn supp_and_rank_chains_compute_max() {
        let bodies = [Expr::atom("a"), Expr::atom("b"), Expr::atom("c")];
        let t = supp(bodies.iter());
        let e = env(&[("a", "1/3"), ("b", "3/4"), ("c", "1/2")]);
        assert_eq!(t.eval(&e), Some(q("3/4")));
        assert_eq!(supp(std::iter::empty()).eval(&e), Some(q("0")));
        assert_eq!(rank(&[]).eval(&e), Some(q("0")));
        let r = rank(&[Atom::new("a"), Atom::new("b")]);
        assert_eq!(r.eval(&env(&[("__r.a", "3"), ("__r.b", "5")])), Some(q("5")));
    }

    #[test]
    fn strategy_selection() {
        let c = classify(&prog("p :- q || not s.\nq + s :- not not p."));
        assert_eq!(auto_strategy(&c), Strategy::Rcomp);
        let c = classify(&prog("p :- q.\nq :- p.\np + r :- 1."));
        assert_eq!(auto_strategy(&c), Strategy::Ocomp);
        let c = classify(&prog("p :- p + 0.1."));
        assert_eq!(auto_strategy(&c), Strategy::Smt);
        let c = classify(&prog("a * b :- c.\nc :- a."));
        assert_eq!(auto_strategy(&c), Strategy::Smt);
    }

    #[test]
    fn forced_strategies_check_preconditions() {
        let p = prog("p :- p + 0.1.");
        let c = classify(&p);
        let err = build_pipeline(&p, &c, Strategy::Ocomp).unwrap_err();
        assert!(matches!(err, TranslateError::Precondition { strategy: Strategy::Ocomp, .. }));
        assert!(build_pipeline(&p, &c, Strategy::Rcomp).is_err());
        assert!(build_pipeline(&p, &c, Strategy::Smt).is_ok());

        let p = prog("p * s :- 0.5.");
        let c = classify(&p);
        assert!(build_pipeline(&p, &c, Strategy::Comp).is_err());
        let pipe = build_pipeline(&p, &c, Strategy::Rcomp).unwrap();
        assert_eq!(pipe.bool_atoms.len(), 1);

        let p = prog("p + q :- 1.");
        let pipe = build_pipeline(&p, &classify(&p), Strategy::Comp).unwrap();
        assert_eq!(pipe.theory.strategy, Strategy::Comp);
    }

    #[test]
    fn theories_are_closed() {
        for text in ["p :- q || not s.\nq + s :- not not p.", "a || b :- c.\nc :- not a.", "p * q :- 1/2."] {
            let p = prog(text);
            let c = classify(&p);
            for s in [Strategy::Smt, Strategy::Rcomp, Strategy::Ocomp] {
                if let Ok(pipe) = build_pipeline(&p, &c, s) {
                    assert!(pipe.theory.undeclared().is_empty(), "{s} on {text}");
                }
            }
        }
    }
}
