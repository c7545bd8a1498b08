//! Helpers shared by the property and acceptance suites: a seeded random
//! program generator, an exact stability oracle and grid comparisons.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use faspc::analysis::classify;
use faspc::degree::TruthDegree;
use faspc::program::{Atom, Conn, Expr, HeadExpr, HeadItem, Interpretation, Program, Rule};
use faspc::smtclient::{self, SolveOutcome, SolverConfig};
use faspc::translate::{self, CmpOp, SmtFormula, SmtTerm};
use faspc::verify::{self, Minimality, VerifyError};
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::Rng;

pub const ATOM_NAMES: [&str; 6] = ["a", "b", "c", "d", "e", "f"];

pub fn z3() -> SolverConfig {
    SolverConfig::from_env(30.0).expect("solver configuration")
}

/// Shape of randomly generated ground programs.
#[derive(Debug, Clone)]
pub struct GenParams {
    pub atoms: usize,
    pub max_rules: usize,
    /// Constants are multiples of `1/den`.
    pub den: i64,
    pub max_depth: u32,
    pub body_conns: Vec<Conn>,
    /// Connectives allowed between head items; empty means single heads only.
    pub head_conns: Vec<Conn>,
    pub multi_head: f64,
    pub negation: f64,
    pub constant: f64,
    pub constraint: f64,
    /// Positive body atoms strictly precede head atoms in `ATOM_NAMES`.
    pub acyclic: bool,
    /// Probability of adding a crispifying rule.
    pub bool_rule: f64,
}

impl GenParams {
    pub fn general(den: i64) -> Self {
        GenParams {
            atoms: 4,
            max_rules: 6,
            den,
            max_depth: 2,
            body_conns: Conn::ALL.to_vec(),
            head_conns: Conn::ALL.to_vec(),
            multi_head: 0.25,
            negation: 0.3,
            constant: 0.2,
            constraint: 0.1,
            acyclic: false,
            bool_rule: 0.0,
        }
    }
}

pub fn degree(n: i64, d: i64) -> TruthDegree {
    TruthDegree::ratio(n, d).expect("degree in range")
}

fn random_leaf(rng: &mut impl Rng, gp: &GenParams, allowed: &[Atom]) -> Expr {
    if allowed.is_empty() || rng.gen_bool(gp.constant) {
        return Expr::constant(degree(rng.gen_range(0..=gp.den), gp.den));
    }
    let a = Expr::Atom(allowed.choose(rng).unwrap().clone());
    if rng.gen_bool(gp.negation) {
        Expr::neg(a)
    } else {
        a
    }
}

fn random_expr(rng: &mut impl Rng, gp: &GenParams, depth: u32, allowed: &[Atom], all: &[Atom]) -> Expr {
    if depth == 0 || gp.body_conns.is_empty() || rng.gen_bool(0.4) {
        // negated atoms never add dependency arcs, so any atom may appear under `not`
        if rng.gen_bool(gp.negation) && !all.is_empty() {
            return Expr::neg(Expr::Atom(all.choose(rng).unwrap().clone()));
        }
        return random_leaf(rng, &GenParams { negation: 0.0, ..gp.clone() }, allowed);
    }
    let c = *gp.body_conns.choose(rng).unwrap();
    Expr::bin(c, random_expr(rng, gp, depth - 1, allowed, all), random_expr(rng, gp, depth - 1, allowed, all))
}

pub fn random_program(rng: &mut impl Rng, gp: &GenParams) -> Program {
    let atoms: Vec<Atom> = ATOM_NAMES[..gp.atoms].iter().map(|n| Atom::new(n)).collect();
    let n_rules = rng.gen_range(1..=gp.max_rules);
    let mut rules = Vec::new();
    for _ in 0..n_rules {
        if rng.gen_bool(gp.constraint) {
            let body = random_expr(rng, gp, gp.max_depth, &atoms, &atoms);
            let c = degree(rng.gen_range(0..gp.den), gp.den);
            rules.push(Rule::constraint(c, body));
            continue;
        }
        let multi = !gp.head_conns.is_empty() && rng.gen_bool(gp.multi_head);
        let width = if multi { rng.gen_range(2..=3.min(gp.atoms)) } else { 1 };
        let mut head_atoms: Vec<Atom> = atoms.choose_multiple(rng, width).cloned().collect();
        head_atoms.sort();
        let allowed: Vec<Atom> = if gp.acyclic {
            atoms.iter().take_while(|a| *a < &head_atoms[0]).cloned().collect()
        } else {
            atoms.clone()
        };
        let body = random_expr(rng, gp, gp.max_depth, &allowed, &atoms);
        let head = if multi {
            let c = *gp.head_conns.choose(rng).unwrap();
            HeadExpr::new(c, head_atoms.into_iter().map(HeadItem::Atom).collect())
        } else {
            HeadExpr::atom(head_atoms.pop().unwrap())
        };
        rules.push(Rule::new(head, body));
    }
    if gp.bool_rule > 0.0 && rng.gen_bool(gp.bool_rule) {
        let p = atoms.choose(rng).unwrap().clone();
        if rng.gen_bool(0.5) {
            rules.push(Rule::atomic(p.clone(), Expr::bin(Conn::LukOr, Expr::Atom(p.clone()), Expr::Atom(p))));
        } else {
            let head = HeadExpr::new(Conn::LukAnd, vec![HeadItem::Atom(p.clone()), HeadItem::Atom(p.clone())]);
            rules.push(Rule::new(head, Expr::Atom(p)));
        }
    }
    // grounding drops repeated rules, so the generator does too
    let mut seen = std::collections::HashSet::new();
    rules.retain(|r| seen.insert(r.clone()));
    Program::new(rules)
}

/// Draws programs until `accept` holds.
pub fn sample(rng: &mut impl Rng, gp: &GenParams, accept: impl Fn(&Program) -> bool) -> Program {
    loop {
        let p = random_program(rng, gp);
        if accept(&p) {
            return p;
        }
    }
}

pub fn is_hcf(p: &Program) -> bool {
    classify(p).hcf
}

/// Exact stability of `i` in `p`: least fixpoint of the reduct where it applies,
/// otherwise the solver-backed minimality query. `None` when neither decides.
pub struct StabilityOracle {
    pub cfg: SolverConfig,
    cache: BTreeMap<(String, Interpretation), Option<bool>>,
    pub solver_calls: usize,
}

impl StabilityOracle {
    pub fn new() -> Self {
        StabilityOracle { cfg: z3(), cache: BTreeMap::new(), solver_calls: 0 }
    }

    pub fn stable(&mut self, p: &Program, i: &Interpretation) -> Option<bool> {
        let key = (p.to_string(), i.clone());
        if let Some(v) = self.cache.get(&key) {
            return *v;
        }
        let verdict = match verify::exact_stable(p, i, 64 * (p.atoms().len() + 1)).expect("total interpretation") {
            Some(b) => Some(b),
            None => {
                self.solver_calls += 1;
                let v = verify::check_stable(p, i, &self.cfg).expect("verification");
                match v.minimal {
                    Minimality::Unknown(_) => None,
                    _ => Some(v.is_stable()),
                }
            }
        };
        self.cache.insert(key, verdict);
        verdict
    }
}

pub fn project(models: &[Interpretation], atoms: &BTreeSet<Atom>) -> BTreeSet<Interpretation> {
    models.iter().map(|m| m.restrict(atoms)).collect()
}

/// Grid-stable models of `q` at resolution `k`, projected to the atoms of `p`
/// and filtered by exact stability in `p`.
pub fn filtered_grid(
    p: &Program,
    q: &Program,
    k: u32,
    budget: u128,
    oracle: &mut StabilityOracle,
) -> Result<BTreeSet<Interpretation>, VerifyError> {
    let models = verify::grid_stable_models(q, k, budget)?;
    Ok(project(&models, p.atoms()).into_iter().filter(|m| oracle.stable(p, m) != Some(false)).collect())
}

fn num(r: &BigRational) -> SmtTerm {
    SmtTerm::Num(r.clone())
}

/// All models of the pipeline theory for `p` whose original atoms lie on `Q_k`,
/// projected to `At(p)`. Enumerated by blocking each answer in turn.
pub fn pipeline_grid_models(
    p: &Program,
    k: u32,
    cfg: &SolverConfig,
    limit: usize,
) -> Result<(translate::Strategy, BTreeSet<Interpretation>), String> {
    let pipeline = translate::select_pipeline(p, &classify(p)).map_err(|e| e.to_string())?;
    let mut theory = pipeline.theory.clone();
    let atoms: Vec<Atom> = p.atoms().iter().cloned().collect();
    for a in &atoms {
        let options =
            (0..=k).map(|i| SmtTerm::Sym(translate::sym_name(a)).cmp(CmpOp::Eq, num(&BigRational::new(i.into(), k.into()))));
        theory.formulas.push(SmtFormula::Or(options.collect()));
    }
    let mut found = BTreeSet::new();
    loop {
        if found.len() > limit {
            return Err(format!("more than {limit} models"));
        }
        match smtclient::solve_theory(&theory, cfg).map_err(|e| e.to_string())? {
            SolveOutcome::Incoherent => return Ok((pipeline.strategy, found)),
            SolveOutcome::Unknown(r) => return Err(r),
            SolveOutcome::Stable(m) => {
                let m = m.restrict(p.atoms());
                let block = atoms
                    .iter()
                    .map(|a| SmtTerm::Sym(translate::sym_name(a)).cmp(CmpOp::Ne, num(m.value(a).value())))
                    .collect();
                theory.formulas.push(SmtFormula::Or(block));
                if !found.insert(m) {
                    return Err("blocked model returned again".into());
                }
            }
        }
    }
}

pub fn show(set: &BTreeSet<Interpretation>) -> String {
    let parts: Vec<String> = set.iter().map(verify::fmt_interp).collect();
    format!("[{}]", parts.join("; "))
}
