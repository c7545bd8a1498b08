//! Program rewritings: `simp` (body normalization), `shift` (head-connective
//! elimination for HCF programs) and `bool⁻` (crispifier extraction).

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::analysis::{self, bool_atom};
use crate::program::{Atom, Conn, Expr, HeadConn, HeadExpr, HeadItem, Origin, Program, Rule};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RewriteError {
    #[error("shift needs a head-cycle-free program; head atoms share a component in `{0}`")]
    NotHcf(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RewriteResult {
    pub program: Program,
    pub fresh_atoms: BTreeSet<Atom>,
    /// Crispified atom `p` to its surrogate `b_p` (`bool⁻` only).
    pub bool_atoms: BTreeMap<Atom, Atom>,
}

pub const SIMP_PREFIX: &str = "__f";
pub const SHIFT_PREFIX: &str = "__q";
pub const BOOL_PREFIX: &str = "__b";

/// Generates `prefixN` names that do not clash with a set of taken atoms.
#[derive(Debug, Clone, Default)]
pub struct FreshNames {
    taken: BTreeSet<Atom>,
    counters: HashMap<&'static str, usize>,
    issued: BTreeSet<Atom>,
}

impl FreshNames {
    pub fn new<'a>(taken: impl IntoIterator<Item = &'a Atom>) -> Self {
        FreshNames { taken: taken.into_iter().cloned().collect(), ..Self::default() }
    }

    pub fn next(&mut self, prefix: &'static str) -> Atom {
        let counter = self.counters.entry(prefix).or_insert(0);
        loop {
            *counter += 1;
            let a = Atom::new(format!("{prefix}{counter}"));
            if self.taken.insert(a.clone()) {
                self.issued.insert(a.clone());
                return a;
            }
        }
    }

    pub fn issued(&self) -> &BTreeSet<Atom> {
        &self.issued
    }
}

/// An atom, a constant, or a negated atom.
pub fn is_literal(e: &Expr) -> bool {
    match e {
        Expr::Const(_) | Expr::Atom(_) => true,
        Expr::Neg(inner) => matches!(**inner, Expr::Atom(_)),
        Expr::Bin(..) => false,
    }
}

/// Whether a body is in simp normal form: a literal, or `a ⊙ b` over literals with
/// `⊙ ∈ {⊗, ⊕, ⋏}`.
pub fn is_simp_body(e: &Expr) -> bool {
    match e {
        Expr::Bin(c, a, b) => *c != Conn::GodelOr && is_literal(a) && is_literal(b),
        other => is_literal(other),
    }
}

/// Whether a rule is in simp normal form (body form above, no multi-item ⋏ head).
pub fn is_simp_rule(r: &Rule) -> bool {
    r.head.conn() != HeadConn::Conn(Conn::GodelAnd) && is_simp_body(&r.body)
}

pub fn simp(p: &Program) -> RewriteResult {
    let mut fresh = FreshNames::new(p.atoms());
    let program = simp_with(p, &mut fresh);
    RewriteResult { program, fresh_atoms: fresh.issued().clone(), bool_atoms: BTreeMap::new() }
}

fn simp_with(p: &Program, fresh: &mut FreshNames) -> Program {
    let mut out = Vec::new();
    for r in p.rules() {
        simp_rule(r.clone(), fresh, &mut out);
    }
    dedup(out)
}

fn dedup(rules: Vec<Rule>) -> Program {
    let mut seen = std::collections::HashSet::new();
    rules.into_iter().filter(|r| seen.insert(r.clone())).collect()
}

fn simp_rule(rule: Rule, fresh: &mut FreshNames, out: &mut Vec<Rule>) {
    let mut queue = VecDeque::from([rule]);
    while let Some(r) = queue.pop_front() {
        let origin = r.origin.clone();
        if r.head.conn() == HeadConn::Conn(Conn::GodelAnd) {
            for (k, item) in r.head.items().iter().enumerate() {
                let head = HeadExpr::new(Conn::GodelAnd, vec![item.clone()]);
                queue.insert(k, Rule { head, body: r.body.clone(), origin: origin.clone() });
            }
            continue;
        }
        let mut extracted = Vec::new();
        let mut define = |e: Expr, extracted: &mut Vec<Rule>| -> Expr {
            let f = fresh.next(SIMP_PREFIX);
            extracted.push(Rule::atomic(f.clone(), e).with_origin(Origin::Rewrite("simp")));
            Expr::Atom(f)
        };
        let body = match r.body {
            Expr::Bin(Conn::GodelOr, a, b) => {
                queue.push_front(Rule { head: r.head.clone(), body: *b, origin: origin.clone() });
                queue.push_front(Rule { head: r.head, body: *a, origin });
                continue;
            }
            Expr::Neg(inner) => match *inner {
                Expr::Const(c) => Expr::Const(c.complement()),
                Expr::Atom(a) => Expr::neg(Expr::Atom(a)),
                other => Expr::neg(define(other, &mut extracted)),
            },
            Expr::Bin(c, a, b) => {
                let mut operand = |e: Expr| match e {
                    Expr::Neg(inner) if matches!(*inner, Expr::Const(_)) => {
                        let Expr::Const(k) = *inner else { unreachable!() };
                        Expr::Const(k.complement())
                    }
                    e if is_literal(&e) => e,
                    e => define(e, &mut extracted),
                };
                let a = operand(*a);
                let b = operand(*b);
                Expr::bin(c, a, b)
            }
            atomic => atomic,
        };
        out.push(Rule { head: r.head, body, origin });
        for (k, e) in extracted.into_iter().enumerate() {
            queue.insert(k, e);
        }
    }
}

/// `shift(simp(Π))`-style head elimination; see [`shift_with`].
pub fn shift(p: &Program) -> Result<RewriteResult, RewriteError> {
    shift_with(p, ShiftOptions::default())
}

#[derive(Debug, Clone, Copy)]
pub struct ShiftOptions {
    /// Leave crispifying rules `p ⊗ p ← p` untouched so `bool⁻` can still recognize them.
    pub keep_bool: bool,
}

impl Default for ShiftOptions {
    fn default() -> Self {
        ShiftOptions { keep_bool: true }
    }
}

/// Replaces every multi-item head by single-head rules, then normalizes with simp.
pub fn shift_with(p: &Program, opts: ShiftOptions) -> Result<RewriteResult, RewriteError> {
    if let Some(r) = analysis::hcf_violation(p) {
        return Err(RewriteError::NotHcf(r.to_string()));
    }
    let mut fresh = FreshNames::new(p.atoms());
    let mut out = Vec::new();
    for r in p.rules() {
        let origin = Origin::Rewrite("shift");
        let conn = match r.head.conn() {
            HeadConn::Single => {
                out.push(r.clone());
                continue;
            }
            HeadConn::Conn(c) => c,
        };
        if opts.keep_bool && bool_atom(r).is_some() {
            out.push(r.clone());
            continue;
        }
        let items = r.head.items();
        let head_of = |item: &HeadItem| HeadExpr::new(conn, vec![item.clone()]);
        let neg = |item: &HeadItem| Expr::neg(item.as_expr());
        match conn {
            Conn::GodelAnd => {
                for item in items {
                    out.push(Rule { head: head_of(item), body: r.body.clone(), origin: origin.clone() });
                }
            }
            Conn::LukOr | Conn::LukAnd => {
                let beta = if r.body.is_atomic() {
                    r.body.clone()
                } else {
                    let f = fresh.next(SHIFT_PREFIX);
                    out.push(Rule::atomic(f.clone(), r.body.clone()).with_origin(origin.clone()));
                    Expr::Atom(f)
                };
                let q = (conn == Conn::LukAnd).then(|| fresh.next(SHIFT_PREFIX));
                for i in 0..items.len() {
                    let others = items.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, it)| neg(it));
                    let body = match &q {
                        None => Expr::chain(Conn::LukAnd, std::iter::once(beta.clone()).chain(others)),
                        Some(q) => Expr::bin(
                            Conn::LukAnd,
                            Expr::Atom(q.clone()),
                            Expr::chain(Conn::LukOr, std::iter::once(beta.clone()).chain(others)),
                        ),
                    };
                    out.push(Rule { head: head_of(&items[i]), body, origin: origin.clone() });
                }
                if let Some(q) = q {
                    let qe = Expr::Atom(q.clone());
                    out.push(Rule::atomic(q.clone(), beta).with_origin(origin.clone()));
                    out.push(
                        Rule::atomic(q, Expr::bin(Conn::LukOr, qe.clone(), qe)).with_origin(origin.clone()),
                    );
                }
            }
            Conn::GodelOr => {
                let mut distinct: Vec<HeadItem> = Vec::new();
                for item in items {
                    if !distinct.contains(item) {
                        distinct.push(item.clone());
                    }
                }
                for (i, item) in distinct.iter().enumerate() {
                    // g is crisp: 1 iff every other head item lies strictly below the body
                    let below = distinct
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, other)| Expr::bin(Conn::LukAnd, r.body.clone(), neg(other)))
                        .collect::<Vec<_>>();
                    if below.is_empty() {
                        out.push(Rule { head: head_of(item), body: r.body.clone(), origin: origin.clone() });
                        continue;
                    }
                    let g = fresh.next(SHIFT_PREFIX);
                    let ge = Expr::Atom(g.clone());
                    let cond = Expr::neg(Expr::neg(Expr::chain(Conn::GodelAnd, below)));
                    let body = Expr::bin(Conn::GodelAnd, r.body.clone(), ge.clone());
                    out.push(Rule { head: head_of(item), body, origin: origin.clone() });
                    out.push(Rule::atomic(g.clone(), cond).with_origin(origin.clone()));
                    out.push(Rule::atomic(g, Expr::bin(Conn::LukOr, ge.clone(), ge)).with_origin(origin.clone()));
                }
            }
        }
    }
    let shifted = dedup(out);
    let program = simp_with(&shifted, &mut fresh);
    Ok(RewriteResult { program, fresh_atoms: fresh.issued().clone(), bool_atoms: BTreeMap::new() })
}

/// `bool⁻(Π)`: drops crispifying rules, routes body occurrences of each crispified atom
/// `p` through a fresh choice atom `b_p`.
pub fn bool_minus(p: &Program) -> RewriteResult {
    let mut crisp: Vec<Atom> = Vec::new();
    for r in p.rules() {
        if let Some(a) = bool_atom(r) {
            if !crisp.contains(a) {
                crisp.push(a.clone());
            }
        }
    }
    if crisp.is_empty() {
        return RewriteResult { program: p.clone(), ..RewriteResult::default() };
    }
    let mut fresh = FreshNames::new(p.atoms());
    let map: BTreeMap<Atom, Atom> = crisp.iter().map(|a| (a.clone(), fresh.next(BOOL_PREFIX))).collect();
    let mut rules: Vec<Rule> = Vec::new();
    for r in p.rules().iter().filter(|r| bool_atom(r).is_none()) {
        let mut body = r.body.clone();
        for (a, b) in &map {
            body = body.substitute(a, &Expr::Atom(b.clone()));
        }
        rules.push(Rule { head: r.head.clone(), body, origin: r.origin.clone() });
    }
    for a in &crisp {
        let b = Expr::Atom(map[a].clone());
        rules.push(Rule::atomic(map[a].clone(), Expr::neg(Expr::neg(b))).with_origin(Origin::Rewrite("bool")));
    }
    RewriteResult { program: Program::new(rules), fresh_atoms: fresh.issued().clone(), bool_atoms: map }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{ground_with, parse_program, parse_with, GroundOptions, ParseOptions};
    use crate::program::Interpretation;

    fn prog(text: &str) -> Program {
        parse_program(text).unwrap()
    }

    fn aux(text: &str) -> Program {
        let sp = parse_with(text, ParseOptions { allow_reserved: true }).unwrap();
        ground_with(&sp, GroundOptions { fold: false, ..GroundOptions::default() }).unwrap()
    }

    #[test]
    fn simp_extracts_non_atomic_operands() {
        let r = simp(&prog("p :- q * (r + s)."));
        assert_eq!(r.program, aux("p :- q * __f1.\n__f1 :- r + s."));
        assert_eq!(r.fresh_atoms, BTreeSet::from([Atom::new("__f1")]));
    }

    #[test]
    fn simp_splits_godel_heads_and_bodies() {
        assert_eq!(simp(&prog("a && b :- c.")).program, prog("a :- c.\nb :- c."));
        assert_eq!(simp(&prog("p :- q || not s.")).program, prog("p :- q.\np :- not s."));
    }

    #[test]
    fn simp_negation_cases() {
        assert_eq!(simp(&prog("p :- not 0.25.")).program, prog("p :- 3/4."));
        let r = simp(&prog("p :- not (q * r)."));
        assert_eq!(r.program, aux("p :- not __f1.\n__f1 :- q * r."));
        let r = simp(&prog("p :- not not p."));
        assert_eq!(r.program, aux("p :- not __f1.\n__f1 :- not p."));
    }

    #[test]
    fn simp_output_is_normal() {
        let r = simp(&prog("p + q :- (a || b) * not (c && (d + not e)).\nx && y :- (a * b) + (c || d)."));
        assert!(r.program.rules().iter().all(is_simp_rule), "{}", r.program);
        assert!(r.fresh_atoms.iter().all(|a| !prog("p :- a.").atoms().contains(a)));
    }

    #[test]
    fn fresh_names_skip_taken_atoms() {
        let taken = [Atom::new("__f1")];
        let mut f = FreshNames::new(&taken);
        assert_eq!(f.next(SIMP_PREFIX), Atom::new("__f2"));
        assert_eq!(f.next(SHIFT_PREFIX), Atom::new("__q1"));
    }

    #[test]
    fn shift_luk_or() {
        let r = shift(&prog("p + q :- 0.6.")).unwrap();
        assert_eq!(r.program, prog("p :- 3/5 * not q.\nq :- 3/5 * not p."));
    }

    #[test]
    fn shift_luk_and() {
        let r = shift(&prog("p * s :- b.")).unwrap();
        let expected = aux(
            "p :- __q1 * __f1.\n__f1 :- b + not s.\ns :- __q1 * __f2.\n__f2 :- b + not p.\n__q1 :- b.\n__q1 :- __q1 + __q1.",
        );
        assert_eq!(r.program, expected);
    }

    #[test]
    fn shift_godel_or() {
        let r = shift(&prog("p1 || p2 :- b.")).unwrap();
        let expected = aux(
            "p1 :- b && __q1.\n__q1 :- not __f1.\n__f1 :- not __f2.\n__f2 :- b * not p2.\n__q1 :- __q1 + __q1.\n\
             p2 :- b && __q2.\n__q2 :- not __f3.\n__f3 :- not __f4.\n__f4 :- b * not p1.\n__q2 :- __q2 + __q2.",
        );
        assert_eq!(r.program, expected, "\n{}", r.program);
    }

    fn assert_shift_keeps_grid_models(text: &str, ks: &[u32]) {
        let p = prog(text);
        let sh = shift(&simp(&p).program).unwrap().program;
        let project = |ms: Vec<Interpretation>| -> Vec<Interpretation> {
            let mut v: Vec<Interpretation> = ms.iter().map(|m| m.restrict(p.atoms())).collect();
            v.sort();
            v.dedup();
            v
        };
        for &k in ks {
            let base = project(crate::verify::grid_stable_models(&p, k, 1_000_000).unwrap());
            let shifted = project(crate::verify::grid_stable_models(&sh, k, 10_000_000).unwrap());
            assert_eq!(shifted, base, "k = {k}\n{sh}");
        }
    }

    #[test]
    fn godel_or_shift_keeps_models_carried_by_the_first_head_atom() {
        // the guard must not depend positively on the head atom it enables
        assert_shift_keeps_grid_models("b || c :- not b.", &[2, 4]);
    }

    #[test]
    fn godel_or_shift_withholds_support_when_another_atom_covers_the_body() {
        assert_shift_keeps_grid_models("a :- 1/2.\nb || d :- a.\nd :- b && a.\nb * b :- b.", &[2, 4]);
    }

    #[test]
    fn shift_refuses_non_hcf() {
        let err = shift(&prog("p :- q + not not p.\nq * s :- p.\nq :- s.")).unwrap_err();
        assert_eq!(err, RewriteError::NotHcf("q * s :- p.".into()));
    }

    #[test]
    fn shift_output_heads_are_single() {
        let r = shift(&prog("a + b + c :- d * e.\nx * y :- 1/2.\nu || v || w :- z.\n0.5 + k :- 1.")).unwrap();
        assert!(r.program.rules().iter().all(|r| r.head.is_single()), "{}", r.program);
        assert!(r.program.rules().iter().all(is_simp_rule));
    }

    #[test]
    fn shift_keeps_crispifiers() {
        let r = shift(&prog("p * p :- p.\nq :- p.")).unwrap();
        assert_eq!(r.program, prog("p * p :- p.\nq :- p."));
        let r = shift_with(&prog("p * p :- p."), ShiftOptions { keep_bool: false }).unwrap();
        assert!(r.program.rules().iter().all(|r| r.head.is_single()));
    }

    #[test]
    fn bool_minus_examples() {
        let r = bool_minus(&prog("p :- p + p.\ns :- p."));
        assert_eq!(r.program, aux("s :- __b1.\n__b1 :- not not __b1."));
        assert_eq!(r.bool_atoms, BTreeMap::from([(Atom::new("p"), Atom::new("__b1"))]));

        let plain = prog("p :- q.");
        let r = bool_minus(&plain);
        assert_eq!(r.program, plain);
        assert!(r.bool_atoms.is_empty());

        let r = bool_minus(&prog("p * p :- p.\n:- not p."));
        assert_eq!(r.program, aux(":- not __b1.\n__b1 :- not not __b1."));
    }
}
