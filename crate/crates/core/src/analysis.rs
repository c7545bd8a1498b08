//! Dependency graphs, strongly connected components and structural classification.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::program::{Atom, Conn, Expr, HeadConn, HeadItem, Program, Rule};
use crate::rewrite;

/// `G_Π`: an arc `(p, q)` for each head atom `p` and positive body atom `q` of a rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepGraph {
    vertices: Vec<Atom>,
    index: HashMap<Atom, usize>,
    succ: Vec<Vec<usize>>,
}

impl DepGraph {
    pub fn vertices(&self) -> &[Atom] {
        &self.vertices
    }

    pub fn index_of(&self, a: &Atom) -> Option<usize> {
        self.index.get(a).copied()
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.succ[v]
    }

    pub fn arcs(&self) -> BTreeSet<(Atom, Atom)> {
        let mut out = BTreeSet::new();
        for (p, qs) in self.succ.iter().enumerate() {
            for &q in qs {
                out.insert((self.vertices[p].clone(), self.vertices[q].clone()));
            }
        }
        out
    }

    pub fn has_arc(&self, p: &Atom, q: &Atom) -> bool {
        match (self.index_of(p), self.index_of(q)) {
            (Some(p), Some(q)) => self.succ[p].contains(&q),
            _ => false,
        }
    }

    /// Vertices reachable from `v` by a path of length ≥ 0.
    pub fn reachable_from(&self, v: usize) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([v]);
        let mut stack = vec![v];
        while let Some(x) = stack.pop() {
            for &y in &self.succ[x] {
                if seen.insert(y) {
                    stack.push(y);
                }
            }
        }
        seen
    }
}

pub fn dependency_graph(p: &Program) -> DepGraph {
    let vertices: Vec<Atom> = p.atoms().iter().cloned().collect();
    let index: HashMap<Atom, usize> =
        vertices.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();
    let mut succ: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); vertices.len()];
    for r in p.rules() {
        let body = r.body.positive_atoms();
        for h in r.head.atoms() {
            for q in &body {
                succ[index[&h]].insert(index[q]);
            }
        }
    }
    DepGraph { vertices, index, succ: succ.into_iter().map(|s| s.into_iter().collect()).collect() }
}

/// Strongly connected components. Components are numbered so that every arc goes
/// from a component to one with an equal or smaller number (dependencies first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SccInfo {
    component: Vec<usize>,
    members: Vec<Vec<usize>>,
}

impl SccInfo {
    pub fn component_of(&self, v: usize) -> usize {
        self.component[v]
    }

    /// Component members, in dependencies-first order.
    pub fn components(&self) -> &[Vec<usize>] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Iterative Tarjan.
pub fn components(g: &DepGraph) -> SccInfo {
    const UNVISITED: usize = usize::MAX;
    let n = g.vertices.len();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut component = vec![UNVISITED; n];
    let mut members = Vec::new();
    let mut next_index = 0;

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        // (vertex, position of the next successor to explore)
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if let Some(&w) = g.succ[v].get(*pos) {
                *pos += 1;
                if index[w] == UNVISITED {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let id = members.len();
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack holds the component");
                    on_stack[w] = false;
                    component[w] = id;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                members.push(comp);
            }
        }
    }
    SccInfo { component, members }
}

/// Structural verdicts that drive strategy selection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProgramClass {
    pub acyclic: bool,
    pub acyclic_mod_bool: bool,
    pub hcf: bool,
    pub nonrec_lukor: bool,
    pub nonrec_godelor: bool,
    pub head_conns: BTreeSet<HeadConn>,
}

impl ProgramClass {
    /// Whether every head connective is in `allowed`.
    pub fn head_conns_within(&self, allowed: &[HeadConn]) -> bool {
        self.head_conns.iter().all(|c| allowed.contains(c))
    }
}

pub fn is_acyclic(p: &Program) -> bool {
    let g = dependency_graph(p);
    let scc = components(&g);
    scc.components().iter().all(|c| c.len() == 1)
        && (0..g.vertices.len()).all(|v| !g.succ[v].contains(&v))
}

/// First rule whose head holds two distinct atoms of one component, if any.
pub fn hcf_violation(p: &Program) -> Option<&Rule> {
    let g = dependency_graph(p);
    let scc = components(&g);
    p.rules().iter().find(|r| {
        let comps: Vec<usize> =
            r.head.atoms().iter().map(|a| scc.component_of(g.index[a])).collect();
        let distinct: BTreeSet<usize> = comps.iter().copied().collect();
        distinct.len() < comps.len()
    })
}

/// Whether `conn` is non-recursive in the bodies of `p`, tested on `simp(p)`.
pub fn nonrecursive(p: &Program, conn: Conn) -> bool {
    let simplified = rewrite::simp(p).program;
    nonrecursive_in(&simplified, conn)
}

fn nonrecursive_in(p: &Program, conn: Conn) -> bool {
    let g = dependency_graph(p);
    let scc = components(&g);
    let comp = |a: &Atom| scc.component_of(g.index[a]);
    p.rules().iter().filter(|r| r.body.positive_connectives().contains(&conn)).all(|r| {
        let body = r.body.positive_atoms();
        r.head.atoms().iter().all(|h| body.iter().all(|q| comp(h) != comp(q)))
    })
}

/// Negation-free programs with single-item heads in which neither ⊕ nor ⊻ occurs
/// recursively in a body; `T_Π` reaches its least fixpoint within `|At(Π)|` steps.
pub fn in_lemma1_class(p: &Program) -> bool {
    p.rules().iter().all(|r| r.head.is_single() && !r.body.contains_neg())
        && nonrecursive_in(p, Conn::LukOr)
        && nonrecursive_in(p, Conn::GodelOr)
}

/// `Π \ bool(Π)`.
pub fn without_bool(p: &Program) -> Program {
    p.rules().iter().filter(|r| bool_atom(r).is_none()).cloned().collect()
}

/// The atom of a crispifying rule `p ← p ⊕ p` or `p ⊗ p ← p`.
pub fn bool_atom(r: &Rule) -> Option<&Atom> {
    if let Some(p) = r.head.single_atom() {
        if let Expr::Bin(Conn::LukOr, a, b) = &r.body {
            if matches!((&**a, &**b), (Expr::Atom(x), Expr::Atom(y)) if x == p && y == p) {
                return Some(p);
            }
        }
        return None;
    }
    match (r.head.conn(), r.head.items(), &r.body) {
        (HeadConn::Conn(Conn::LukAnd), [HeadItem::Atom(x), HeadItem::Atom(y)], Expr::Atom(b))
            if x == y && y == b =>
        {
            Some(x)
        }
        _ => None,
    }
}

pub fn classify(p: &Program) -> ProgramClass {
    let simplified = rewrite::simp(p).program;
    let head_conns = p.rules().iter().map(|r| r.head.conn()).collect();
    ProgramClass {
        acyclic: is_acyclic(p),
        acyclic_mod_bool: is_acyclic(&without_bool(p)),
        hcf: hcf_violation(p).is_none(),
        nonrec_lukor: nonrecursive_in(&simplified, Conn::LukOr),
        nonrec_godelor: nonrecursive_in(&simplified, Conn::GodelOr),
        head_conns,
    }
}
