//! Naive grounding by substitution over the program's term universe, with fact folding.

use std::collections::{BTreeMap, HashMap, HashSet};

use thiserror::Error;

use super::{SourceAtom, SourceExpr, SourceHeadItem, SourceProgram, Statement, Term};
use crate::degree::TruthDegree;
use crate::program::{Atom, Conn, Expr, HeadConn, HeadExpr, HeadItem, Origin, Program, Rule};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroundError {
    #[error("line {line}: unsafe variable `{var}` (it must occur in a body atom outside `not`)")]
    Unsafe { line: usize, var: String },
    #[error("line {line}: variables present but the program has no ground terms")]
    EmptyUniverse { line: usize },
    #[error("line {line}: grounding would need {estimate} substitutions (limit {limit})")]
    TooLarge { line: usize, estimate: u128, limit: u64 },
}

#[derive(Debug, Clone, Copy)]
pub struct GroundOptions {
    /// Replace atoms of fact-only predicates by their degrees and drop rules whose body is 0.
    pub fold: bool,
    /// Upper bound on substitutions tried for a single rule.
    pub max_substitutions: u64,
}

impl Default for GroundOptions {
    fn default() -> Self {
        GroundOptions { fold: true, max_substitutions: 20_000_000 }
    }
}

pub fn ground(sp: &SourceProgram) -> Result<Program, GroundError> {
    ground_with(sp, GroundOptions::default())
}

type PredKey = (String, usize);

fn key(a: &SourceAtom) -> PredKey {
    (a.predicate.clone(), a.args.len())
}

pub fn ground_with(sp: &SourceProgram, opts: GroundOptions) -> Result<Program, GroundError> {
    for st in &sp.statements {
        check_safety(st)?;
    }
    let facts = if opts.fold { fact_table(sp) } else { FactTable::default() };
    let mut rules = Vec::new();
    let mut seen = HashSet::new();
    for st in &sp.statements {
        let vars = st.vars();
        if !vars.is_empty() && sp.constants.is_empty() {
            return Err(GroundError::EmptyUniverse { line: st.line });
        }
        let estimate = (sp.constants.len() as u128)
            .checked_pow(vars.len() as u32)
            .unwrap_or(u128::MAX);
        if estimate > opts.max_substitutions as u128 {
            return Err(GroundError::TooLarge {
                line: st.line,
                estimate,
                limit: opts.max_substitutions,
            });
        }
        let guards = guards(&st.body, &facts);
        let mut binding: HashMap<&str, &str> = HashMap::new();
        let mut emit = |binding: &HashMap<&str, &str>| {
            if let Some(rule) = instantiate(st, binding, &facts, !vars.is_empty()) {
                if seen.insert(rule.clone()) {
                    rules.push(rule);
                }
            }
        };
        enumerate(&vars, 0, &sp.constants, &guards, &facts, &mut binding, &mut emit);
    }
    Ok(Program::new(rules))
}

fn check_safety(st: &Statement) -> Result<(), GroundError> {
    let safe: HashSet<&str> = st
        .body
        .atoms_with_polarity()
        .into_iter()
        .filter(|(_, negated)| !negated)
        .flat_map(|(a, _)| a.vars())
        .collect();
    match st.vars().into_iter().find(|v| !safe.contains(v.as_str())) {
        Some(var) => Err(GroundError::Unsafe { line: st.line, var }),
        None => Ok(()),
    }
}

/// Degrees of predicates defined only by facts (`p(..) :- c.` with a constant body).
#[derive(Default)]
struct FactTable {
    degrees: HashMap<PredKey, HashMap<Vec<String>, TruthDegree>>,
}

impl FactTable {
    fn is_fact_pred(&self, a: &SourceAtom) -> bool {
        self.degrees.contains_key(&key(a))
    }

    /// Degree of a ground fact atom, or `None` when the predicate is not fact-only.
    fn lookup(&self, a: &SourceAtom, binding: &HashMap<&str, &str>) -> Option<TruthDegree> {
        let table = self.degrees.get(&key(a))?;
        let args: Vec<String> = a.args.iter().map(|t| subst_term(t, binding).to_string()).collect();
        Some(table.get(&args).cloned().unwrap_or_else(TruthDegree::zero))
    }
}

fn fact_table(sp: &SourceProgram) -> FactTable {
    let mut ok: BTreeMap<PredKey, bool> = BTreeMap::new();
    for st in &sp.statements {
        let is_fact = st.head.conn == HeadConn::Single
            && matches!(st.body, SourceExpr::Const(_))
            && matches!(&st.head.items[0], SourceHeadItem::Atom(a) if a.is_ground());
        for item in &st.head.items {
            if let SourceHeadItem::Atom(a) = item {
                let entry = ok.entry(key(a)).or_insert(true);
                *entry &= is_fact;
            }
        }
    }
    let mut table = FactTable::default();
    for st in &sp.statements {
        if let (SourceHeadItem::Atom(a), SourceExpr::Const(c)) = (&st.head.items[0], &st.body) {
            if ok.get(&key(a)).copied().unwrap_or(false) {
                let args = a.args.iter().map(|t| t.to_string()).collect();
                let slot = table.degrees.entry(key(a)).or_default().entry(args).or_insert_with(TruthDegree::zero);
                if c > slot {
                    *slot = c.clone();
                }
            }
        }
    }
    table
}

/// Fact-only atoms that are conjuncts of the top-level body: if one of them is 0,
/// the whole body is 0 and the substitution can be skipped.
fn guards<'a>(body: &'a SourceExpr, facts: &FactTable) -> Vec<&'a SourceAtom> {
    fn walk<'a>(e: &'a SourceExpr, facts: &FactTable, out: &mut Vec<&'a SourceAtom>) {
        match e {
            SourceExpr::Bin(Conn::LukAnd | Conn::GodelAnd, a, b) => {
                walk(a, facts, out);
                walk(b, facts, out);
            }
            SourceExpr::Atom(a) if facts.is_fact_pred(a) => out.push(a),
            _ => {}
        }
    }
    let mut out = Vec::new();
    walk(body, facts, &mut out);
    out
}

fn enumerate<'a>(
    vars: &'a [String],
    depth: usize,
    universe: &'a [String],
    guards: &[&SourceAtom],
    facts: &FactTable,
    binding: &mut HashMap<&'a str, &'a str>,
    emit: &mut dyn FnMut(&HashMap<&'a str, &'a str>),
) {
    let pruned = guards.iter().any(|g| {
        g.vars().all(|v| binding.contains_key(v))
            && facts.lookup(g, binding).is_some_and(|d| d.is_zero())
    });
    if pruned {
        return;
    }
    if depth == vars.len() {
        emit(binding);
        return;
    }
    for c in universe {
        binding.insert(&vars[depth], c);
        enumerate(vars, depth + 1, universe, guards, facts, binding, emit);
    }
    binding.remove(vars[depth].as_str());
}

fn subst_term<'a>(t: &'a Term, binding: &HashMap<&str, &'a str>) -> &'a str {
    match t {
        Term::Const(c) => c,
        Term::Var(v) => binding.get(v.as_str()).copied().expect("every variable is bound"),
    }
}

fn ground_atom(a: &SourceAtom, binding: &HashMap<&str, &str>) -> Atom {
    if a.args.is_empty() {
        return Atom::new(&a.predicate);
    }
    let args: Vec<&str> = a.args.iter().map(|t| subst_term(t, binding)).collect();
    Atom::new(format!("{}({})", a.predicate, args.join(",")))
}

fn ground_expr(
    e: &SourceExpr,
    binding: &HashMap<&str, &str>,
    facts: &FactTable,
    folded: &mut bool,
) -> Expr {
    match e {
        SourceExpr::Const(c) => Expr::Const(c.clone()),
        SourceExpr::Atom(a) => match facts.lookup(a, binding) {
            Some(d) => {
                *folded = true;
                Expr::Const(d)
            }
            None => Expr::Atom(ground_atom(a, binding)),
        },
        SourceExpr::Neg(inner) => Expr::neg(ground_expr(inner, binding, facts, folded)),
        SourceExpr::Bin(c, a, b) => Expr::bin(
            *c,
            ground_expr(a, binding, facts, folded),
            ground_expr(b, binding, facts, folded),
        ),
    }
}

fn instantiate(
    st: &Statement,
    binding: &HashMap<&str, &str>,
    facts: &FactTable,
    has_vars: bool,
) -> Option<Rule> {
    let mut folded = false;
    let mut body = ground_expr(&st.body, binding, facts, &mut folded);
    if has_vars || folded {
        body = simplify_constants(&body);
        if upper_bound(&body).is_zero() {
            return None;
        }
    }
    let items = st
        .head
        .items
        .iter()
        .map(|i| match i {
            SourceHeadItem::Atom(a) => HeadItem::Atom(ground_atom(a, binding)),
            SourceHeadItem::Const(c) => HeadItem::Const(c.clone()),
        })
        .collect();
    let head = match st.head.conn {
        HeadConn::Single => HeadExpr::new(Conn::LukOr, items),
        HeadConn::Conn(c) => HeadExpr::new(c, items),
    };
    Some(Rule::new(head, body).with_origin(Origin::Line(st.line)))
}

/// Folds constant subexpressions and unit/absorbing constants of each connective.
pub fn simplify_constants(e: &Expr) -> Expr {
    match e {
        Expr::Const(_) | Expr::Atom(_) => e.clone(),
        Expr::Neg(inner) => match simplify_constants(inner) {
            Expr::Const(c) => Expr::Const(c.complement()),
            other => Expr::neg(other),
        },
        Expr::Bin(c, a, b) => {
            let (a, b) = (simplify_constants(a), simplify_constants(b));
            let (unit, absorbing) = match c {
                Conn::LukAnd | Conn::GodelAnd => (TruthDegree::one(), TruthDegree::zero()),
                Conn::LukOr | Conn::GodelOr => (TruthDegree::zero(), TruthDegree::one()),
            };
            match (a, b) {
                (Expr::Const(x), Expr::Const(y)) => Expr::Const(c.apply(&x, &y)),
                (Expr::Const(x), other) | (other, Expr::Const(x)) if x == unit => other,
                (Expr::Const(x), _) | (_, Expr::Const(x)) if x == absorbing => Expr::Const(x),
                (a, b) => Expr::bin(*c, a, b),
            }
        }
    }
}

/// Largest value the expression can take when every atom ranges over `[0,1]`.
fn upper_bound(e: &Expr) -> TruthDegree {
    fn bounds(e: &Expr) -> (TruthDegree, TruthDegree) {
        match e {
            Expr::Const(c) => (c.clone(), c.clone()),
            Expr::Atom(_) => (TruthDegree::zero(), TruthDegree::one()),
            Expr::Neg(inner) => {
                let (lo, hi) = bounds(inner);
                (hi.complement(), lo.complement())
            }
            Expr::Bin(c, a, b) => {
                let ((la, ha), (lb, hb)) = (bounds(a), bounds(b));
                (c.apply(&la, &lb), c.apply(&ha, &hb))
            }
        }
    }
    bounds(e).1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse, parse_program};

    fn d(s: &str) -> TruthDegree {
        s.parse().unwrap()
    }

    #[test]
    fn ground_program_is_unchanged() {
        let text = "p :- q * not r.\nq + r :- 1/2.\n:- p && q.\ns :- s + s.\n";
        let prog = parse_program(text).unwrap();
        assert_eq!(prog.to_string(), text);
        assert!(prog.rules().iter().all(|r| matches!(r.origin, Origin::Line(_))));
    }

    #[test]
    fn edge_guess_folds_to_one_rule() {
        let prog = parse_program("in(X,Y) + out(X,Y) :- edge(X,Y).\nedge(a,b) :- 1.\n").unwrap();
        let text = prog.to_string();
        assert_eq!(text, "in(a,b) + out(a,b).\nedge(a,b).\n");
    }

    #[test]
    fn unsafe_variables_are_reported() {
        let err = ground(&parse("p(X) :- not q(X).\nq(a).").unwrap()).unwrap_err();
        assert_eq!(err, GroundError::Unsafe { line: 1, var: "X".into() });
        let err = ground(&parse("p(X).").unwrap()).unwrap_err();
        assert!(matches!(err, GroundError::Unsafe { .. }));
    }

    #[test]
    fn social_network_instances() {
        let text = "\
user(alice). user(bob).
next(0,1). next(1,2).
distrust(X,Y,T2) :- (distrust(X,Y,T) + conflict(X,Y,T)), user(X), user(Y), next(T,T2).
trust(X,Y,T2) :- (trust(X,Y,T) * not (distrust(X,Y,T2) * not distrust(X,Y,T))), user(X), user(Y), next(T,T2).
";
        let prog = parse_program(text).unwrap();
        let count = |pred: &str| {
            prog.rules()
                .iter()
                .filter(|r| r.head.single_atom().is_some_and(|a| a.name().starts_with(pred)))
                .count()
        };
        assert_eq!(count("distrust("), 8);
        assert_eq!(count("trust("), 8);
        let sample = prog
            .rules()
            .iter()
            .find(|r| r.head.single_atom().is_some_and(|a| a.name() == "distrust(alice,bob,2)"))
            .unwrap();
        assert_eq!(
            sample.body.to_string(),
            "distrust(alice,bob,1) + conflict(alice,bob,1)"
        );
    }

    #[test]
    fn folding_uses_max_fact_degree() {
        let prog = parse_program("w(a) :- 0.25.\nw(a) :- 0.5.\np :- w(a) * q.\nr :- w(b) + q.").unwrap();
        let bodies: Vec<String> = prog.rules().iter().map(|r| r.body.to_string()).collect();
        assert_eq!(bodies, vec!["1/4", "1/2", "1/2 * q", "q"]);
        let unfolded = ground_with(
            &parse("w(a) :- 0.5.\np :- w(a) * q.").unwrap(),
            GroundOptions { fold: false, ..GroundOptions::default() },
        )
        .unwrap();
        assert_eq!(unfolded.rules()[1].body.to_string(), "w(a) * q");
    }

    #[test]
    fn zero_bodies_are_dropped() {
        let prog = parse_program("e(a,b).\np(X) :- e(X,Y) * q(Y).\nq(b) :- not p(a).").unwrap();
        let heads: Vec<String> = prog.rules().iter().map(|r| r.head.to_string()).collect();
        assert_eq!(heads, vec!["e(a,b)", "p(a)", "q(b)"]);
    }

    #[test]
    fn empty_universe() {
        let sp = SourceProgram {
            statements: parse("p(X) :- q(X).").unwrap().statements,
            constants: vec![],
        };
        assert_eq!(ground(&sp).unwrap_err(), GroundError::EmptyUniverse { line: 1 });
    }

    #[test]
    fn constant_simplification() {
        let e = Expr::bin(Conn::GodelAnd, Expr::atom("p"), Expr::one());
        assert_eq!(simplify_constants(&e), Expr::atom("p"));
        let e = Expr::bin(Conn::LukAnd, Expr::zero(), Expr::atom("p"));
        assert_eq!(simplify_constants(&e), Expr::zero());
        let e = Expr::neg(Expr::bin(Conn::LukOr, Expr::Const(d("0.25")), Expr::Const(d("0.5"))));
        assert_eq!(simplify_constants(&e), Expr::Const(d("0.25")));
    }
}
