//! Propositional FASP programs: atoms, fuzzy expressions, rules and interpretations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::degree::TruthDegree;

/// A propositional atom, identified by its (ground) name.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom(Arc<str>);

impl Atom {
    pub fn new(name: impl AsRef<str>) -> Self {
        let name = name.as_ref();
        assert!(!name.is_empty(), "atom names are nonempty");
        Atom(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    /// Atoms introduced by rewritings carry the reserved `__` prefix.
    pub fn is_auxiliary(&self) -> bool {
        self.0.starts_with(RESERVED_PREFIX)
    }
}

pub const RESERVED_PREFIX: &str = "__";

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Atom {
    fn from(s: &str) -> Self {
        Atom::new(s)
    }
}

/// Binary fuzzy connectives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Conn {
    /// Łukasiewicz conjunction ⊗.
    LukAnd,
    /// Łukasiewicz disjunction ⊕.
    LukOr,
    /// Gödel disjunction ⊻ (max).
    GodelOr,
    /// Gödel conjunction ⋏ (min).
    GodelAnd,
}

impl Conn {
    pub const ALL: [Conn; 4] = [Conn::LukAnd, Conn::LukOr, Conn::GodelOr, Conn::GodelAnd];

    pub fn apply(self, a: &TruthDegree, b: &TruthDegree) -> TruthDegree {
        match self {
            Conn::LukAnd => a.luk_and(b),
            Conn::LukOr => a.luk_or(b),
            Conn::GodelOr => a.godel_or(b),
            Conn::GodelAnd => a.godel_and(b),
        }
    }

    /// ASCII operator used by the text format.
    pub fn symbol(self) -> &'static str {
        match self {
            Conn::LukAnd => "*",
            Conn::LukOr => "+",
            Conn::GodelOr => "||",
            Conn::GodelAnd => "&&",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Conn::LukAnd => "luk_and",
            Conn::LukOr => "luk_or",
            Conn::GodelOr => "godel_or",
            Conn::GodelAnd => "godel_and",
        }
    }
}

/// A fuzzy expression.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(TruthDegree),
    Atom(Atom),
    Neg(Box<Expr>),
    Bin(Conn, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn atom(name: impl AsRef<str>) -> Self {
        Expr::Atom(Atom::new(name))
    }

    pub fn constant(d: TruthDegree) -> Self {
        Expr::Const(d)
    }

    pub fn zero() -> Self {
        Expr::Const(TruthDegree::zero())
    }

    pub fn one() -> Self {
        Expr::Const(TruthDegree::one())
    }

    pub fn neg(e: Expr) -> Self {
        Expr::Neg(Box::new(e))
    }

    pub fn bin(conn: Conn, a: Expr, b: Expr) -> Self {
        Expr::Bin(conn, Box::new(a), Box::new(b))
    }

    /// Left-associated chain `e1 ⊙ e2 ⊙ ... ⊙ en`. Panics on an empty iterator.
    pub fn chain(conn: Conn, items: impl IntoIterator<Item = Expr>) -> Self {
        let mut it = items.into_iter();
        let first = it.next().expect("chain of at least one expression");
        it.fold(first, |acc, e| Expr::bin(conn, acc, e))
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self, Expr::Const(_) | Expr::Atom(_))
    }

    /// All atoms, in order of first occurrence.
    pub fn atoms(&self) -> Vec<Atom> {
        let mut out = Vec::new();
        self.collect_atoms(false, &mut out);
        out
    }

    /// Atoms not under the scope of any negation (`pos`), in order of first occurrence.
    pub fn positive_atoms(&self) -> Vec<Atom> {
        let mut out = Vec::new();
        self.collect_atoms(true, &mut out);
        out
    }

    fn collect_atoms(&self, positive_only: bool, out: &mut Vec<Atom>) {
        match self {
            Expr::Const(_) => {}
            Expr::Atom(a) => {
                if !out.contains(a) {
                    out.push(a.clone());
                }
            }
            Expr::Neg(e) => {
                if !positive_only {
                    e.collect_atoms(positive_only, out);
                }
            }
            Expr::Bin(_, a, b) => {
                a.collect_atoms(positive_only, out);
                b.collect_atoms(positive_only, out);
            }
        }
    }

    pub fn contains_neg(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Atom(_) => false,
            Expr::Neg(_) => true,
            Expr::Bin(_, a, b) => a.contains_neg() || b.contains_neg(),
        }
    }

    /// Connectives occurring outside any negation.
    pub fn positive_connectives(&self) -> BTreeSet<Conn> {
        let mut out = BTreeSet::new();
        fn walk(e: &Expr, out: &mut BTreeSet<Conn>) {
            if let Expr::Bin(c, a, b) = e {
                out.insert(*c);
                walk(a, out);
                walk(b, out);
            }
        }
        walk(self, &mut out);
        out
    }

    /// Replaces every occurrence of atom `from` by the expression `to`.
    pub fn substitute(&self, from: &Atom, to: &Expr) -> Expr {
        match self {
            Expr::Atom(a) if a == from => to.clone(),
            Expr::Const(_) | Expr::Atom(_) => self.clone(),
            Expr::Neg(e) => Expr::neg(e.substitute(from, to)),
            Expr::Bin(c, a, b) => Expr::bin(*c, a.substitute(from, to), b.substitute(from, to)),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Atom(_) => 1,
            Expr::Neg(e) => 1 + e.size(),
            Expr::Bin(_, a, b) => 1 + a.size() + b.size(),
        }
    }
}

/// Connective of a head expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HeadConn {
    Single,
    Conn(Conn),
}

impl serde::Serialize for HeadConn {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl HeadConn {
    pub fn name(self) -> &'static str {
        match self {
            HeadConn::Single => "single",
            HeadConn::Conn(c) => c.name(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum HeadItem {
    Atom(Atom),
    Const(TruthDegree),
}

impl HeadItem {
    pub fn as_expr(&self) -> Expr {
        match self {
            HeadItem::Atom(a) => Expr::Atom(a.clone()),
            HeadItem::Const(c) => Expr::Const(c.clone()),
        }
    }
}

/// Head expression `p1 ⊙ ... ⊙ pn` over atoms and numeric constants.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HeadExpr {
    conn: HeadConn,
    items: Vec<HeadItem>,
}

impl HeadExpr {
    /// Builds a head; `Single` is chosen iff there is exactly one item.
    ///
    /// Panics when `items` is empty.
    pub fn new(conn: Conn, items: Vec<HeadItem>) -> Self {
        assert!(!items.is_empty(), "head expressions are nonempty");
        if items.len() == 1 {
            HeadExpr { conn: HeadConn::Single, items }
        } else {
            HeadExpr { conn: HeadConn::Conn(conn), items }
        }
    }

    pub fn atom(a: Atom) -> Self {
        HeadExpr { conn: HeadConn::Single, items: vec![HeadItem::Atom(a)] }
    }

    pub fn constant(c: TruthDegree) -> Self {
        HeadExpr { conn: HeadConn::Single, items: vec![HeadItem::Const(c)] }
    }

    pub fn conn(&self) -> HeadConn {
        self.conn
    }

    pub fn items(&self) -> &[HeadItem] {
        &self.items
    }

    pub fn is_single(&self) -> bool {
        self.conn == HeadConn::Single
    }

    /// The single atom of an atomic head.
    pub fn single_atom(&self) -> Option<&Atom> {
        match (self.conn, self.items.as_slice()) {
            (HeadConn::Single, [HeadItem::Atom(a)]) => Some(a),
            _ => None,
        }
    }

    /// The constant of a constraint head.
    pub fn single_const(&self) -> Option<&TruthDegree> {
        match (self.conn, self.items.as_slice()) {
            (HeadConn::Single, [HeadItem::Const(c)]) => Some(c),
            _ => None,
        }
    }

    /// Head atoms in order of first occurrence (duplicates removed).
    pub fn atoms(&self) -> Vec<Atom> {
        let mut out: Vec<Atom> = Vec::new();
        for item in &self.items {
            if let HeadItem::Atom(a) = item {
                if !out.contains(a) {
                    out.push(a.clone());
                }
            }
        }
        out
    }

    /// The head as a fuzzy expression (left-associated).
    pub fn as_expr(&self) -> Expr {
        match self.conn {
            HeadConn::Single => self.items[0].as_expr(),
            HeadConn::Conn(c) => Expr::chain(c, self.items.iter().map(HeadItem::as_expr)),
        }
    }
}

/// Where a rule came from.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Origin {
    #[default]
    Unknown,
    Line(usize),
    Rewrite(&'static str),
}

/// A rule `head ← body`. Equality ignores the origin tag.
#[derive(Debug, Clone)]
pub struct Rule {
    pub head: HeadExpr,
    pub body: Expr,
    pub origin: Origin,
}

impl Rule {
    pub fn new(head: HeadExpr, body: Expr) -> Self {
        Rule { head, body, origin: Origin::Unknown }
    }

    pub fn with_origin(mut self, origin: Origin) -> Self {
        self.origin = origin;
        self
    }

    /// `p ← body`.
    pub fn atomic(head: impl Into<Atom>, body: Expr) -> Self {
        Rule::new(HeadExpr::atom(head.into()), body)
    }

    /// `c ← body` for a constant head.
    pub fn constraint(c: TruthDegree, body: Expr) -> Self {
        Rule::new(HeadExpr::constant(c), body)
    }

    pub fn atoms(&self) -> Vec<Atom> {
        let mut out = self.head.atoms();
        for a in self.body.atoms() {
            if !out.contains(&a) {
                out.push(a);
            }
        }
        out
    }

    pub fn is_constraint(&self) -> bool {
        self.head.single_const().is_some()
    }
}

impl PartialEq for Rule {
    fn eq(&self, other: &Self) -> bool {
        self.head == other.head && self.body == other.body
    }
}

impl Eq for Rule {}

impl Hash for Rule {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.head.hash(state);
        self.body.hash(state);
    }
}

impl From<Atom> for HeadItem {
    fn from(a: Atom) -> Self {
        HeadItem::Atom(a)
    }
}

/// A finite list of ground rules together with the atoms they use.
#[derive(Debug, Clone, Default)]
pub struct Program {
    rules: Vec<Rule>,
    atoms: BTreeSet<Atom>,
}

impl Program {
    pub fn new(rules: Vec<Rule>) -> Self {
        let atoms = rules.iter().flat_map(Rule::atoms).collect();
        Program { rules, atoms }
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn into_rules(self) -> Vec<Rule> {
        self.rules
    }

    /// `At(Π)`.
    pub fn atoms(&self) -> &BTreeSet<Atom> {
        &self.atoms
    }

    /// Atoms in order of first occurrence in the rules.
    pub fn atoms_in_order(&self) -> Vec<Atom> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for r in &self.rules {
            for a in r.atoms() {
                if seen.insert(a.clone()) {
                    out.push(a);
                }
            }
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    /// True when every head is a single atom or a constant.
    pub fn has_atomic_heads(&self) -> bool {
        self.rules.iter().all(|r| r.head.is_single())
    }

    pub fn is_negation_free(&self) -> bool {
        self.rules.iter().all(|r| !r.body.contains_neg())
    }

    /// Rules whose head is exactly `p` (`heads(p, Π)`).
    pub fn heads_of<'a>(&'a self, p: &'a Atom) -> impl Iterator<Item = &'a Rule> + 'a {
        self.rules.iter().filter(move |r| r.head.single_atom() == Some(p))
    }

    /// Rules whose head is a numeric constant.
    pub fn constraints(&self) -> impl Iterator<Item = &Rule> {
        self.rules.iter().filter(|r| r.is_constraint())
    }
}

impl PartialEq for Program {
    fn eq(&self, other: &Self) -> bool {
        self.rules == other.rules
    }
}

impl Eq for Program {}

impl FromIterator<Rule> for Program {
    fn from_iter<T: IntoIterator<Item = Rule>>(iter: T) -> Self {
        Program::new(iter.into_iter().collect())
    }
}

/// A fuzzy interpretation over a declared universe of atoms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Interpretation {
    values: BTreeMap<Atom, TruthDegree>,
}

impl Interpretation {
    pub fn new() -> Self {
        Self::default()
    }

    /// Assigns 0 to every atom of `universe`.
    pub fn zero<'a>(universe: impl IntoIterator<Item = &'a Atom>) -> Self {
        Interpretation {
            values: universe.into_iter().map(|a| (a.clone(), TruthDegree::zero())).collect(),
        }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Atom, TruthDegree)>) -> Self {
        Interpretation { values: pairs.into_iter().collect() }
    }

    pub fn set(&mut self, atom: Atom, value: TruthDegree) {
        self.values.insert(atom, value);
    }

    pub fn with(mut self, atom: impl Into<Atom>, value: TruthDegree) -> Self {
        self.set(atom.into(), value);
        self
    }

    pub fn get(&self, atom: &Atom) -> Option<&TruthDegree> {
        self.values.get(atom)
    }

    /// Value of `atom`, reading atoms outside the universe as 0.
    pub fn value(&self, atom: &Atom) -> TruthDegree {
        self.values.get(atom).cloned().unwrap_or_else(TruthDegree::zero)
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.values.contains_key(atom)
    }

    pub fn universe(&self) -> impl Iterator<Item = &Atom> {
        self.values.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Atom, &TruthDegree)> {
        self.values.iter()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `I ∩ S`: keeps values of atoms in `atoms`, dropping the rest.
    pub fn restrict<'a>(&self, atoms: impl IntoIterator<Item = &'a Atom>) -> Interpretation {
        Interpretation {
            values: atoms.into_iter().map(|a| (a.clone(), self.value(a))).collect(),
        }
    }

    /// Extends the universe with `atoms`, assigning 0 to the new ones.
    pub fn extend_zero<'a>(&mut self, atoms: impl IntoIterator<Item = &'a Atom>) {
        for a in atoms {
            self.values.entry(a.clone()).or_insert_with(TruthDegree::zero);
        }
    }

    /// Pointwise `≤` over the union of both universes.
    pub fn is_subset_of(&self, other: &Interpretation) -> bool {
        self.values.keys().chain(other.values.keys()).all(|a| self.value(a) <= other.value(a))
    }

    /// Pointwise `≤` with inequality somewhere.
    pub fn is_strict_subset_of(&self, other: &Interpretation) -> bool {
        self.is_subset_of(other)
            && self.values.keys().chain(other.values.keys()).any(|a| self.value(a) < other.value(a))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Atom(a) => write!(f, "{a}"),
            Expr::Neg(e) => {
                if matches!(**e, Expr::Bin(..)) {
                    write!(f, "not ({e})")
                } else {
                    write!(f, "not {e}")
                }
            }
            Expr::Bin(c, a, b) => {
                match &**a {
                    Expr::Bin(ca, ..) if ca != c => write!(f, "({a})")?,
                    _ => write!(f, "{a}")?,
                }
                write!(f, " {} ", c.symbol())?;
                match &**b {
                    Expr::Bin(..) => write!(f, "({b})"),
                    _ => write!(f, "{b}"),
                }
            }
        }
    }
}

impl fmt::Display for HeadItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeadItem::Atom(a) => write!(f, "{a}"),
            HeadItem::Const(c) => write!(f, "{c}"),
        }
    }
}

impl fmt::Display for HeadExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sep = match self.conn {
            HeadConn::Single => "",
            HeadConn::Conn(c) => c.symbol(),
        };
        for (i, item) in self.items.iter().enumerate() {
            if i > 0 {
                write!(f, " {sep} ")?;
            }
            write!(f, "{item}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.head.single_const().is_some_and(TruthDegree::is_zero) {
            return write!(f, ":- {}.", self.body);
        }
        match &self.body {
            Expr::Const(c) if c.is_one() => write!(f, "{}.", self.head),
            body => write!(f, "{} :- {}.", self.head, body),
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (a, v)) in self.values.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a} = {v}")?;
        }
        f.write_str("}")
    }
}
