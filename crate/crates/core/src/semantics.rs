//! Exact evaluation, model checking, reducts and the immediate consequence operator.

use thiserror::Error;

use crate::degree::TruthDegree;
use crate::program::{Atom, Expr, HeadExpr, Interpretation, Program, Rule};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("atom `{0}` is not in the interpretation's universe")]
    UnknownAtom(Atom),
    #[error("the immediate consequence operator needs atomic heads and negation-free bodies; offending rule: {0}")]
    NotDefinite(String),
    #[error("no fixpoint within {cap} applications of the immediate consequence operator (is ⊕ used recursively?)")]
    NoFixpoint { cap: usize },
}

pub fn eval(e: &Expr, i: &Interpretation) -> Result<TruthDegree, SemanticsError> {
    Ok(match e {
        Expr::Const(c) => c.clone(),
        Expr::Atom(a) => i.get(a).cloned().ok_or_else(|| SemanticsError::UnknownAtom(a.clone()))?,
        Expr::Neg(inner) => eval(inner, i)?.complement(),
        Expr::Bin(c, a, b) => c.apply(&eval(a, i)?, &eval(b, i)?),
    })
}

pub fn eval_head(h: &HeadExpr, i: &Interpretation) -> Result<TruthDegree, SemanticsError> {
    eval(&h.as_expr(), i)
}

/// `I ⊨ α ← β` iff `I(α) ≥ I(β)`.
pub fn satisfies(rule: &Rule, i: &Interpretation) -> Result<bool, SemanticsError> {
    Ok(eval_head(&rule.head, i)? >= eval(&rule.body, i)?)
}

/// Result of checking an interpretation against every rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelCheck {
    pub violated: Vec<Rule>,
}

impl ModelCheck {
    pub fn holds(&self) -> bool {
        self.violated.is_empty()
    }
}

pub fn check_model(p: &Program, i: &Interpretation) -> Result<ModelCheck, SemanticsError> {
    let mut violated = Vec::new();
    for r in p.rules() {
        if !satisfies(r, i)? {
            violated.push(r.clone());
        }
    }
    Ok(ModelCheck { violated })
}

pub fn is_model(p: &Program, i: &Interpretation) -> Result<bool, SemanticsError> {
    Ok(check_model(p, i)?.holds())
}

/// Replaces every maximal negated subexpression `~α` by the constant `1 − I(α)`.
pub fn reduct_expr(e: &Expr, i: &Interpretation) -> Result<Expr, SemanticsError> {
    Ok(match e {
        Expr::Const(_) | Expr::Atom(_) => e.clone(),
        Expr::Neg(inner) => Expr::Const(eval(inner, i)?.complement()),
        Expr::Bin(c, a, b) => Expr::bin(*c, reduct_expr(a, i)?, reduct_expr(b, i)?),
    })
}

/// The reduct `Π^I`.
pub fn reduct(p: &Program, i: &Interpretation) -> Result<Program, SemanticsError> {
    p.rules()
        .iter()
        .map(|r| {
            Ok(Rule { head: r.head.clone(), body: reduct_expr(&r.body, i)?, origin: r.origin.clone() })
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Program::new)
}

fn ensure_definite(p: &Program) -> Result<(), SemanticsError> {
    match p.rules().iter().find(|r| !r.head.is_single() || r.body.contains_neg()) {
        Some(r) => Err(SemanticsError::NotDefinite(r.to_string())),
        None => Ok(()),
    }
}

/// One application of `T_Π`: each atom gets the maximum of its rule bodies under `j`
/// (0 without rules). Constraint rules are ignored.
pub fn tp_step(p: &Program, j: &Interpretation) -> Result<Interpretation, SemanticsError> {
    ensure_definite(p)?;
    let mut next = Interpretation::zero(p.atoms());
    for r in p.rules() {
        if let Some(a) = r.head.single_atom() {
            let v = eval(&r.body, j)?;
            if v > next.value(a) {
                next.set(a.clone(), v);
            }
        }
    }
    Ok(next)
}

/// Least fixpoint of `T_Π` from the all-zero interpretation, with the default cap of
/// `2·|At(Π)| + 1` applications.
pub fn tp_fixpoint(p: &Program) -> Result<(Interpretation, usize), SemanticsError> {
    tp_fixpoint_with_cap(p, 2 * p.atoms().len() + 1)
}

/// Iterates `T_Π` until stationary. The step count is the number of applications
/// that changed the interpretation.
pub fn tp_fixpoint_with_cap(
    p: &Program,
    cap: usize,
) -> Result<(Interpretation, usize), SemanticsError> {
    ensure_definite(p)?;
    let mut current = Interpretation::zero(p.atoms());
    let mut steps = 0;
    loop {
        let next = tp_step(p, &current)?;
        if next == current {
            return Ok((current, steps));
        }
        if steps == cap {
            return Err(SemanticsError::NoFixpoint { cap });
        }
        steps += 1;
        current = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::{Conn, HeadItem};

    fn d(s: &str) -> TruthDegree {
        s.parse().unwrap()
    }

    fn c(s: &str) -> Expr {
        Expr::Const(d(s))
    }

    fn a(s: &str) -> Expr {
        Expr::atom(s)
    }

    fn interp(pairs: &[(&str, &str)]) -> Interpretation {
        Interpretation::from_pairs(pairs.iter().map(|(k, v)| (Atom::new(k), d(v))))
    }

    /// Π₂ = {p ← q ⊻ ~s, q ⊕ s ← ~~p}
    fn pi2() -> Program {
        Program::new(vec![
            Rule::atomic("p", Expr::bin(Conn::GodelOr, a("q"), Expr::neg(a("s")))),
            Rule::new(
                HeadExpr::new(Conn::LukOr, vec![Atom::new("q").into(), Atom::new("s").into()]),
                Expr::neg(Expr::neg(a("p"))),
            ),
        ])
    }

    #[test]
    fn eval_examples() {
        let empty = Interpretation::new();
        assert_eq!(eval(&Expr::bin(Conn::LukAnd, c("0.4"), c("0.8")), &empty).unwrap(), d("0.2"));
        assert_eq!(eval(&Expr::neg(c("0.3")), &empty).unwrap(), d("0.7"));
        let i = interp(&[("p", "1"), ("q", "1"), ("s", "0")]);
        assert_eq!(eval(&Expr::bin(Conn::GodelOr, a("q"), Expr::neg(a("s"))), &i).unwrap(), d("1"));
        assert_eq!(eval(&Expr::neg(Expr::neg(a("p"))), &i).unwrap(), d("1"));
    }

    #[test]
    fn eval_unknown_atom() {
        let err = eval(&a("zz"), &Interpretation::new()).unwrap_err();
        assert_eq!(err, SemanticsError::UnknownAtom(Atom::new("zz")));
    }

    #[test]
    fn eval_head_examples() {
        let h = HeadExpr::new(Conn::LukOr, vec![Atom::new("p").into(), Atom::new("s").into()]);
        assert_eq!(eval_head(&h, &interp(&[("p", "0.5"), ("s", "0.5")])).unwrap(), d("1"));
        assert_eq!(eval_head(&HeadExpr::constant(d("0")), &Interpretation::new()).unwrap(), d("0"));
        let h = HeadExpr::new(Conn::LukOr, vec![Atom::new("xt").into(), Atom::new("xf").into()]);
        assert_eq!(eval_head(&h, &interp(&[("xt", "1"), ("xf", "0.5")])).unwrap(), d("1"));
        let h = HeadExpr::new(
            Conn::LukAnd,
            vec![HeadItem::Atom(Atom::new("p")), HeadItem::Const(d("0.5"))],
        );
        assert_eq!(eval_head(&h, &interp(&[("p", "0.75")])).unwrap(), d("0.25"));
    }

    #[test]
    fn model_examples() {
        let p = Program::new(vec![Rule::atomic("p", c("0.3"))]);
        assert!(is_model(&p, &interp(&[("p", "0.3")])).unwrap());
        let check = check_model(&p, &interp(&[("p", "0.2")])).unwrap();
        assert!(!check.holds());
        assert_eq!(check.violated, vec![Rule::atomic("p", c("0.3"))]);
        assert!(is_model(&pi2(), &interp(&[("p", "1"), ("q", "1"), ("s", "0")])).unwrap());
    }

    #[test]
    fn reduct_examples() {
        let p = Program::new(vec![Rule::atomic("p", Expr::neg(a("q")))]);
        let r = reduct(&p, &interp(&[("p", "0"), ("q", "0.4")])).unwrap();
        assert_eq!(r, Program::new(vec![Rule::atomic("p", c("0.6"))]));

        let r = reduct(&pi2(), &interp(&[("p", "1"), ("q", "0"), ("s", "0")])).unwrap();
        assert_eq!(r.rules()[1].body, c("1"));
        assert!(r.is_negation_free());

        let p = Program::new(vec![Rule::constraint(d("0"), Expr::neg(a("sat")))]);
        let r = reduct(&p, &interp(&[("sat", "1")])).unwrap();
        assert_eq!(r.rules()[0].body, c("0"));
    }

    #[test]
    fn fixpoint_examples() {
        let p = Program::new(vec![
            Rule::atomic("p", c("0.1")),
            Rule::atomic("p", a("q")),
            Rule::atomic("q", a("p")),
        ]);
        let (lfp, steps) = tp_fixpoint(&p).unwrap();
        assert_eq!(lfp, interp(&[("p", "0.1"), ("q", "0.1")]));
        assert_eq!(steps, 2);

        let (lfp, steps) = tp_fixpoint(&Program::default()).unwrap();
        assert!(lfp.is_empty());
        assert_eq!(steps, 0);

        let p = Program::new(vec![Rule::atomic("p", Expr::bin(Conn::LukOr, a("p"), c("0.25")))]);
        assert_eq!(tp_fixpoint(&p).unwrap_err(), SemanticsError::NoFixpoint { cap: 3 });
        let (lfp, steps) = tp_fixpoint_with_cap(&p, 10).unwrap();
        assert_eq!(lfp, interp(&[("p", "1")]));
        assert_eq!(steps, 4);
    }

    #[test]
    fn fixpoint_ignores_constraints_and_rejects_negation() {
        let p = Program::new(vec![Rule::atomic("p", c("0.5")), Rule::constraint(d("0"), a("p"))]);
        let (lfp, _) = tp_fixpoint(&p).unwrap();
        assert_eq!(lfp, interp(&[("p", "0.5")]));
        let p = Program::new(vec![Rule::atomic("p", Expr::neg(a("p")))]);
        assert!(matches!(tp_fixpoint(&p), Err(SemanticsError::NotDefinite(_))));
    }
}
