//! Benchmark instance generators: fuzzy Graph Coloring, fuzzy Hamiltonian Path,
//! Stratified and Odd Cycle chains, and programs encoding 2-QBF formulas.
//!
//! Instance degrees are multiples of `1/den`. Generators are deterministic for a
//! fixed seed.
//!
//! Hamiltonian Path template, for start vertex `v1`:
//!
//! ```text
//! vertex(vX) :- dX.                      % degree of each vertex
//! edge(vX,vY) :- dXY.                    % degree of each arc
//! in(vX,vY) + out(vX,vY) :- edge(vX,vY). % per arc
//! reached(v1).
//! reached(vY) :- reached(vX) * in(vX,vY).
//! :- vertex(vX) * not reached(vX).       % reach every vertex to its degree
//! :- in(vX,vY) * in(vX,vZ).              % Y < Z, one way out
//! :- in(vX,vZ) * in(vY,vZ).              % X < Y, one way in
//! :- in(vX,v1).                          % nothing enters the start
//! ```
//!
//! Stratified is the chain `p1 :- c. p(i+1) :- p(i) * d(i).` and Odd Cycle the
//! loop `p1 :- not p2. ... pn :- not p1.` for odd `n`.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::degree::TruthDegree;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BenchError {
    #[error("invalid parameter: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> BenchError {
    BenchError::Invalid(msg.into())
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn degree(num: u32, den: u32) -> TruthDegree {
    TruthDegree::ratio(num.into(), den.into()).expect("degree within [0,1]")
}

/// A positive multiple of `1/den`.
fn random_degree(rng: &mut ChaCha8Rng, den: u32) -> TruthDegree {
    degree(rng.gen_range(1..=den), den)
}

fn check_den(den: u32) -> Result<(), BenchError> {
    if den == 0 {
        return Err(invalid("den must be positive"));
    }
    Ok(())
}

/// Coloring program for explicit weighted edges over vertices `v1..vn`.
pub fn coloring_instance(vertices: usize, edges: &[(usize, usize, TruthDegree)]) -> String {
    let mut out = String::new();
    for v in 1..=vertices {
        let _ = writeln!(out, "black(v{v}) + white(v{v}) :- 1.");
    }
    for (x, y, d) in edges {
        let _ = writeln!(out, "edge(v{x},v{y}) :- {d}.");
    }
    for (x, y, _) in edges {
        let _ = writeln!(out, ":- edge(v{x},v{y}) * black(v{x}) * black(v{y}).");
        let _ = writeln!(out, ":- edge(v{x},v{y}) * white(v{x}) * white(v{y}).");
    }
    out
}

/// Random graph with each edge present with probability `edge_density`.
pub fn gen_coloring(vertices: usize, edge_density: f64, den: u32, seed: u64) -> Result<String, BenchError> {
    if vertices < 2 {
        return Err(invalid("coloring needs at least 2 vertices"));
    }
    if !(0.0..=1.0).contains(&edge_density) {
        return Err(invalid(format!("edge density {edge_density} outside [0,1]")));
    }
    check_den(den)?;
    let mut rng = rng(seed);
    let mut edges = Vec::new();
    for x in 1..=vertices {
        for y in x + 1..=vertices {
            if rng.gen_bool(edge_density) {
                edges.push((x, y, random_degree(&mut rng, den)));
            }
        }
    }
    Ok(coloring_instance(vertices, &edges))
}

/// Hamiltonian Path program for explicit degrees; vertex `i` is `v{i+1}` and
/// `v1` is the start.
pub fn hampath_instance(vertex_degrees: &[TruthDegree], arcs: &[(usize, usize, TruthDegree)]) -> String {
    let mut out = String::new();
    for (i, d) in vertex_degrees.iter().enumerate() {
        let _ = writeln!(out, "vertex(v{}) :- {d}.", i + 1);
    }
    for (x, y, d) in arcs {
        let _ = writeln!(out, "edge(v{x},v{y}) :- {d}.");
    }
    for (x, y, _) in arcs {
        let _ = writeln!(out, "in(v{x},v{y}) + out(v{x},v{y}) :- edge(v{x},v{y}).");
    }
    out.push_str("reached(v1).\n");
    for (x, y, _) in arcs {
        let _ = writeln!(out, "reached(v{y}) :- reached(v{x}) * in(v{x},v{y}).");
    }
    for i in 1..=vertex_degrees.len() {
        let _ = writeln!(out, ":- vertex(v{i}) * not reached(v{i}).");
    }
    for (a, (x1, y1, _)) in arcs.iter().enumerate() {
        for (x2, y2, _) in &arcs[a + 1..] {
            if x1 == x2 {
                let _ = writeln!(out, ":- in(v{x1},v{y1}) * in(v{x2},v{y2}).");
            }
            if y1 == y2 {
                let _ = writeln!(out, ":- in(v{x1},v{y1}) * in(v{x2},v{y2}).");
            }
        }
    }
    for (x, y, _) in arcs.iter().filter(|(_, y, _)| *y == 1) {
        let _ = writeln!(out, ":- in(v{x},v{y}).");
    }
    out
}

/// Random digraph: arcs `v1 → v2` and `v2 → v1` always, every other arc with
/// probability 1/2; arc and vertex degrees are positive multiples of `1/den`.
pub fn gen_hampath(vertices: usize, den: u32, seed: u64) -> Result<String, BenchError> {
    if vertices < 2 {
        return Err(invalid("hamiltonian path needs at least 2 vertices"));
    }
    check_den(den)?;
    let mut rng = rng(seed);
    let degrees: Vec<TruthDegree> = (0..vertices).map(|_| random_degree(&mut rng, den)).collect();
    let mut arcs = Vec::new();
    for x in 1..=vertices {
        for y in 1..=vertices {
            if x == y {
                continue;
            }
            let forced = (x, y) == (1, 2) || (x, y) == (2, 1);
            if forced || rng.gen_bool(0.5) {
                arcs.push((x, y, random_degree(&mut rng, den)));
            }
        }
    }
    Ok(hampath_instance(&degrees, &arcs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimpleKind {
    Stratified,
    OddCycle,
}

impl FromStr for SimpleKind {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "stratified" => Ok(SimpleKind::Stratified),
            "oddcycle" => Ok(SimpleKind::OddCycle),
            other => Err(invalid(format!("unknown family `{other}`"))),
        }
    }
}

/// Stratified chain or odd negative cycle of length `n`.
///
/// Chain degrees lose at most `den - 1` units of `1/den` in total, so every
/// atom of the chain ends up positive.
pub fn gen_simple(kind: SimpleKind, n: usize, den: u32, seed: u64) -> Result<String, BenchError> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    check_den(den)?;
    let mut out = String::new();
    match kind {
        SimpleKind::OddCycle => {
            if n % 2 == 0 {
                return Err(invalid(format!("odd cycle needs odd n, got {n}")));
            }
            for i in 1..=n {
                let _ = writeln!(out, "p{i} :- not p{}.", i % n + 1);
            }
        }
        SimpleKind::Stratified => {
            let mut rng = rng(seed);
            let _ = writeln!(out, "p1 :- 1.");
            let mut budget = den - 1;
            for i in 1..n {
                let loss = if budget > 0 && rng.gen_bool(0.5) { rng.gen_range(1..=budget.min(2)) } else { 0 };
                budget -= loss;
                let _ = writeln!(out, "p{} :- p{i} * {}.", i + 1, degree(den - loss, den));
            }
        }
    }
    Ok(out)
}

/// A literal over `x_1..x_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lit {
    pub var: usize,
    pub positive: bool,
}

/// `∃x_1..x_m ∀x_(m+1)..x_n` followed by a disjunction of 3-literal conjunctions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Qbf2Formula {
    m: usize,
    n: usize,
    disjuncts: Vec<[Lit; 3]>,
}

impl Qbf2Formula {
    pub fn new(m: usize, n: usize, disjuncts: Vec<[Lit; 3]>) -> Result<Self, BenchError> {
        if !(n > m && m >= 1) {
            return Err(invalid(format!("need n > m >= 1, got m = {m}, n = {n}")));
        }
        if disjuncts.is_empty() {
            return Err(invalid("need at least one disjunct"));
        }
        if let Some(l) = disjuncts.iter().flatten().find(|l| l.var == 0 || l.var > n) {
            return Err(invalid(format!("literal over x{} outside [1..{n}]", l.var)));
        }
        Ok(Qbf2Formula { m, n, disjuncts })
    }

    pub fn random(m: usize, n: usize, k: usize, rng: &mut impl Rng) -> Result<Self, BenchError> {
        let disjuncts = (0..k)
            .map(|_| std::array::from_fn(|_| Lit { var: rng.gen_range(1..=n.max(1)), positive: rng.gen_bool(0.5) }))
            .collect();
        Qbf2Formula::new(m, n, disjuncts)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn disjuncts(&self) -> &[[Lit; 3]] {
        &self.disjuncts
    }

    /// Value of the matrix under an assignment given as a bit mask (bit `i-1` is `x_i`).
    pub fn matrix(&self, assignment: u64) -> bool {
        let val = |l: &Lit| ((assignment >> (l.var - 1)) & 1 == 1) == l.positive;
        self.disjuncts.iter().any(|d| d.iter().all(val))
    }

    /// Truth of the quantified formula by enumeration.
    pub fn is_satisfiable(&self) -> bool {
        let universal = self.n - self.m;
        (0..1u64 << self.m).any(|e| (0..1u64 << universal).all(|u| self.matrix(e | (u << self.m))))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QbfVariant {
    /// `⊻` guesses and `⋏` conjunctions.
    GodelOr,
    /// `⊕` guesses, `⋏` conjunctions and crispifying rules `p :- p + p`.
    LukOr,
    /// `⊗` guesses pinning each pair to `{1, 1/2}` and `⊗` conjunctions.
    LukAnd,
}

impl QbfVariant {
    pub const ALL: [QbfVariant; 3] = [QbfVariant::GodelOr, QbfVariant::LukOr, QbfVariant::LukAnd];
}

impl FromStr for QbfVariant {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "godel_or" => Ok(QbfVariant::GodelOr),
            "luk_or" => Ok(QbfVariant::LukOr),
            "luk_and" => Ok(QbfVariant::LukAnd),
            other => Err(invalid(format!("unknown variant `{other}`"))),
        }
    }
}

fn sigma(l: &Lit) -> String {
    format!("{}({})", if l.positive { "xt" } else { "xf" }, l.var)
}

/// Program that is coherent exactly when the formula is true.
pub fn qbf_to_fasp(f: &Qbf2Formula, variant: QbfVariant) -> String {
    let mut out = String::new();
    for i in 1..=f.n {
        match variant {
            QbfVariant::GodelOr => {
                let _ = writeln!(out, "xt({i}) || xf({i}) :- 1.");
            }
            QbfVariant::LukOr => {
                let _ = writeln!(out, "xt({i}) + xf({i}) :- 1.");
            }
            QbfVariant::LukAnd => {
                let _ = writeln!(out, "xt({i}) * xf({i}) :- 1/2.");
                let _ = writeln!(out, "xt({i}) * xt({i}) * xt({i}) :- xt({i}) * xt({i}).");
                let _ = writeln!(out, "xf({i}) * xf({i}) * xf({i}) :- xf({i}) * xf({i}).");
            }
        }
    }
    for i in f.m + 1..=f.n {
        let _ = writeln!(out, "xt({i}) :- sat.\nxf({i}) :- sat.");
    }
    out.push_str(":- not sat.\n");
    if variant == QbfVariant::LukAnd {
        out.push_str("sat :- 1/2.\n");
    }
    let conj = if variant == QbfVariant::LukAnd { " * " } else { ", " };
    for d in &f.disjuncts {
        let body: Vec<String> = d.iter().map(sigma).collect();
        let _ = writeln!(out, "sat :- {}.", body.join(conj));
    }
    if variant == QbfVariant::LukOr {
        for i in 1..=f.n {
            let _ = writeln!(out, "xt({i}) :- xt({i}) + xt({i}).\nxf({i}) :- xf({i}) + xf({i}).");
        }
        out.push_str("sat :- sat + sat.\n");
    }
    out
}
