//! Text front end: parser for the FASP surface language and a naive grounder.
//!
//! ```text
//! distrust(X,Y,T2) :- (distrust(X,Y,T) + conflict(X,Y,T)) && next(T,T2).
//! p + q :- 0.5.
//! :- edge(X,Y) * black(X) * black(Y).
//! ```

mod ground;
mod parser;

use std::fmt;

use crate::degree::TruthDegree;
use crate::program::{Conn, HeadConn, Program};

pub use ground::{ground, ground_with, simplify_constants, GroundError, GroundOptions};
pub use parser::{parse, parse_with, ParseError, ParseErrorKind, ParseOptions};

/// A term in an atom's argument list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    /// Lowercase identifier or integer.
    Const(String),
    /// Capitalized identifier.
    Var(String),
}

impl Term {
    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }
}

/// An atom that may still contain variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SourceAtom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl SourceAtom {
    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|t| match t {
            Term::Var(v) => Some(v.as_str()),
            Term::Const(_) => None,
        })
    }

    pub fn is_ground(&self) -> bool {
        !self.args.iter().any(Term::is_var)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SourceExpr {
    Const(TruthDegree),
    Atom(SourceAtom),
    Neg(Box<SourceExpr>),
    Bin(Conn, Box<SourceExpr>, Box<SourceExpr>),
}

impl SourceExpr {
    /// Atoms in order of occurrence, each paired with whether it sits under a negation.
    pub fn atoms_with_polarity(&self) -> Vec<(&SourceAtom, bool)> {
        fn walk<'a>(e: &'a SourceExpr, negated: bool, out: &mut Vec<(&'a SourceAtom, bool)>) {
            match e {
                SourceExpr::Const(_) => {}
                SourceExpr::Atom(a) => out.push((a, negated)),
                SourceExpr::Neg(inner) => walk(inner, true, out),
                SourceExpr::Bin(_, a, b) => {
                    walk(a, negated, out);
                    walk(b, negated, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, false, &mut out);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SourceHeadItem {
    Atom(SourceAtom),
    Const(TruthDegree),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceHead {
    pub conn: HeadConn,
    pub items: Vec<SourceHeadItem>,
}

/// A parsed rule with its source position. Equality ignores the position.
#[derive(Debug, Clone)]
pub struct Statement {
    pub head: SourceHead,
    pub body: SourceExpr,
    pub line: usize,
    pub col: usize,
}

impl PartialEq for Statement {
    fn eq(&self, other: &Self) -> bool {
        self.head == other.head && self.body == other.body
    }
}

impl Eq for Statement {}

impl Statement {
    /// Variables in order of first occurrence (head, then body).
    pub fn vars(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let head_atoms = self.head.items.iter().filter_map(|i| match i {
            SourceHeadItem::Atom(a) => Some(a),
            SourceHeadItem::Const(_) => None,
        });
        let body_atoms = self.body.atoms_with_polarity().into_iter().map(|(a, _)| a);
        for a in head_atoms.chain(body_atoms) {
            for v in a.vars() {
                if !out.iter().any(|o| o == v) {
                    out.push(v.to_string());
                }
            }
        }
        out
    }
}

/// A parsed, not yet grounded program.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SourceProgram {
    pub statements: Vec<Statement>,
    /// Ground terms in order of first appearance, without duplicates.
    pub constants: Vec<String>,
}

/// Parses and grounds in one step.
pub fn parse_program(text: &str) -> Result<Program, FrontendError> {
    Ok(ground(&parse(text)?)?)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FrontendError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Ground(#[from] GroundError),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(s) | Term::Var(s) => f.write_str(s),
        }
    }
}

impl fmt::Display for SourceAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, t) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{t}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for SourceExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceExpr::Const(c) => write!(f, "{c}"),
            SourceExpr::Atom(a) => write!(f, "{a}"),
            SourceExpr::Neg(e) => match **e {
                SourceExpr::Bin(..) => write!(f, "not ({e})"),
                _ => write!(f, "not {e}"),
            },
            SourceExpr::Bin(c, a, b) => {
                match &**a {
                    SourceExpr::Bin(ca, ..) if ca != c => write!(f, "({a})")?,
                    _ => write!(f, "{a}")?,
                }
                write!(f, " {} ", c.symbol())?;
                match &**b {
                    SourceExpr::Bin(..) => write!(f, "({b})"),
                    _ => write!(f, "{b}"),
                }
            }
        }
    }
}

impl fmt::Display for SourceHeadItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceHeadItem::Atom(a) => write!(f, "{a}"),
            SourceHeadItem::Const(c) => write!(f, "{c}"),
        }
    }
}

impl fmt::Display for SourceHead {
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

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let zero_head = matches!(self.head.items.as_slice(), [SourceHeadItem::Const(c)] if c.is_zero());
        if zero_head {
            return write!(f, ":- {}.", self.body);
        }
        match &self.body {
            SourceExpr::Const(c) if c.is_one() => write!(f, "{}.", self.head),
            body => write!(f, "{} :- {}.", self.head, body),
        }
    }
}

impl fmt::Display for SourceProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.statements {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}
