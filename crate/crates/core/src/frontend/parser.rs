//! Hand-written lexer and recursive-descent parser.

use std::fmt;

use thiserror::Error;

use super::{SourceAtom, SourceExpr, SourceHead, SourceHeadItem, SourceProgram, Statement, Term};
use crate::degree::{parse_rational, DegreeError, TruthDegree};
use crate::program::{Conn, HeadConn, RESERVED_PREFIX};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("ambiguous connective mix: `{0}` and `{1}` at the same level; add parentheses")]
    AmbiguousMix(&'static str, &'static str),
    #[error("truth constant {0} is outside [0,1]")]
    Range(String),
    #[error("name `{0}` uses the reserved prefix `__`")]
    Reserved(String),
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Accept atoms with the reserved `__` prefix (for re-reading rewritten programs).
    pub allow_reserved: bool,
}

pub fn parse(text: &str) -> Result<SourceProgram, ParseError> {
    parse_with(text, ParseOptions::default())
}

pub fn parse_with(text: &str, opts: ParseOptions) -> Result<SourceProgram, ParseError> {
    let tokens = lex(text)?;
    let mut p = Parser { tokens, pos: 0, opts, constants: Vec::new() };
    let mut statements = Vec::new();
    while !p.at_end() {
        statements.push(p.statement()?);
    }
    Ok(SourceProgram { statements, constants: p.constants })
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Var(String),
    Number(String),
    Not,
    If,
    Dot,
    Comma,
    LParen,
    RParen,
    Star,
    Plus,
    BarBar,
    AmpAmp,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) | Tok::Var(s) | Tok::Number(s) => write!(f, "`{s}`"),
            Tok::Not => f.write_str("`not`"),
            Tok::If => f.write_str("`:-`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::BarBar => f.write_str("`||`"),
            Tok::AmpAmp => f.write_str("`&&`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, col, msg: String| ParseError { line, col, kind: ParseErrorKind::Syntax(msg) };
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let mut advance = |n: usize, i: &mut usize| {
            *i += n;
            col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => {
                advance(1, &mut i);
                continue;
            }
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            _ => {}
        }
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let tok = match two.as_str() {
            ":-" => Some(Tok::If),
            "||" => Some(Tok::BarBar),
            "&&" => Some(Tok::AmpAmp),
            _ => None,
        };
        if let Some(tok) = tok {
            advance(2, &mut i);
            out.push(Spanned { tok, line: tl, col: tc });
            continue;
        }
        let single = match c {
            '.' => Some(Tok::Dot),
            ',' => Some(Tok::Comma),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '*' => Some(Tok::Star),
            '+' => Some(Tok::Plus),
            _ => None,
        };
        if let Some(tok) = single {
            advance(1, &mut i);
            out.push(Spanned { tok, line: tl, col: tc });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                advance(1, &mut i);
            }
            let frac_sep = i + 1 < chars.len()
                && (chars[i] == '.' || chars[i] == '/')
                && chars[i + 1].is_ascii_digit();
            if frac_sep {
                advance(1, &mut i);
                while i < chars.len() && chars[i].is_ascii_digit() {
                    advance(1, &mut i);
                }
            }
            let s: String = chars[start..i].iter().collect();
            out.push(Spanned { tok: Tok::Number(s), line: tl, col: tc });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                advance(1, &mut i);
            }
            let s: String = chars[start..i].iter().collect();
            let tok = if s == "not" {
                Tok::Not
            } else if c.is_uppercase() {
                Tok::Var(s)
            } else if c.is_lowercase() || s.starts_with(RESERVED_PREFIX) {
                Tok::Ident(s)
            } else {
                return Err(err(tl, tc, format!("identifier `{s}` must start with a letter")));
            };
            out.push(Spanned { tok, line: tl, col: tc });
            continue;
        }
        return Err(err(tl, tc, format!("unexpected character `{c}`")));
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
    opts: ParseOptions,
    constants: Vec<String>,
}

/// Binary operator token at an expression level; `,` and `&&` are the same operator.
fn op_of(tok: &Tok) -> Option<Conn> {
    match tok {
        Tok::Star => Some(Conn::LukAnd),
        Tok::Plus => Some(Conn::LukOr),
        Tok::BarBar => Some(Conn::GodelOr),
        Tok::AmpAmp | Tok::Comma => Some(Conn::GodelAnd),
        _ => None,
    }
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.tokens[self.pos]
    }

    fn at_end(&self) -> bool {
        self.peek().tok == Tok::Eof
    }

    fn bump(&mut self) -> Spanned {
        let t = self.tokens[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, t: &Spanned, kind: ParseErrorKind) -> ParseError {
        ParseError { line: t.line, col: t.col, kind }
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        let t = self.peek();
        self.error_at(t, ParseErrorKind::Syntax(format!("expected {expected}, found {}", t.tok)))
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek().tok == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(what))
        }
    }

    fn note_constant(&mut self, c: &str) {
        if !self.constants.iter().any(|k| k == c) {
            self.constants.push(c.to_string());
        }
    }

    fn statement(&mut self) -> Result<Statement, ParseError> {
        let start = self.peek().clone();
        if start.tok == Tok::If {
            self.bump();
            let body = self.expr()?;
            self.expect(Tok::Dot, "`.`")?;
            let head = SourceHead {
                conn: HeadConn::Single,
                items: vec![SourceHeadItem::Const(TruthDegree::zero())],
            };
            return Ok(Statement { head, body, line: start.line, col: start.col });
        }
        let head = self.head()?;
        let body = match self.peek().tok {
            Tok::Dot => SourceExpr::Const(TruthDegree::one()),
            Tok::If => {
                self.bump();
                self.expr()?
            }
            _ => return Err(self.unexpected("`:-` or `.`")),
        };
        self.expect(Tok::Dot, "`.`")?;
        Ok(Statement { head, body, line: start.line, col: start.col })
    }

    fn head(&mut self) -> Result<SourceHead, ParseError> {
        let mut items = vec![self.head_item()?];
        let mut conn: Option<Conn> = None;
        loop {
            let t = self.peek().clone();
            let op = match t.tok {
                Tok::Comma => return Err(self.error_at(&t, ParseErrorKind::Syntax(
                    "`,` is not a head connective; use `&&`".into(),
                ))),
                ref tok => op_of(tok),
            };
            let Some(op) = op else { break };
            match conn {
                Some(c) if c != op => {
                    return Err(self.error_at(&t, ParseErrorKind::AmbiguousMix(c.symbol(), op.symbol())))
                }
                _ => conn = Some(op),
            }
            self.bump();
            items.push(self.head_item()?);
        }
        let conn = match conn {
            Some(c) => HeadConn::Conn(c),
            None => HeadConn::Single,
        };
        Ok(SourceHead { conn, items })
    }

    fn head_item(&mut self) -> Result<SourceHeadItem, ParseError> {
        match self.peek().tok {
            Tok::Number(_) => Ok(SourceHeadItem::Const(self.number()?)),
            Tok::Ident(_) => Ok(SourceHeadItem::Atom(self.atom()?)),
            _ => Err(self.unexpected("an atom or a number in the head")),
        }
    }

    fn expr(&mut self) -> Result<SourceExpr, ParseError> {
        let mut acc = self.term()?;
        let mut conn: Option<(Conn, &'static str)> = None;
        loop {
            let t = self.peek().clone();
            let Some(op) = op_of(&t.tok) else { break };
            let shown = if t.tok == Tok::Comma { "," } else { op.symbol() };
            match conn {
                Some((c, first)) if c != op => {
                    return Err(self.error_at(&t, ParseErrorKind::AmbiguousMix(first, shown)))
                }
                _ => conn = Some((op, shown)),
            }
            self.bump();
            let rhs = self.term()?;
            acc = SourceExpr::Bin(op, Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<SourceExpr, ParseError> {
        match self.peek().tok {
            Tok::Not => {
                self.bump();
                Ok(SourceExpr::Neg(Box::new(self.term()?)))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Number(_) => Ok(SourceExpr::Const(self.number()?)),
            Tok::Ident(_) => Ok(SourceExpr::Atom(self.atom()?)),
            _ => Err(self.unexpected("an atom, a number, `not` or `(`")),
        }
    }

    fn number(&mut self) -> Result<TruthDegree, ParseError> {
        let t = self.bump();
        let Tok::Number(s) = &t.tok else { unreachable!("caller checked for a number") };
        let value = parse_rational(s).map_err(|e| self.error_at(&t, degree_error(e)))?;
        TruthDegree::new(value).map_err(|e| self.error_at(&t, degree_error(e)))
    }

    fn atom(&mut self) -> Result<SourceAtom, ParseError> {
        let t = self.bump();
        let Tok::Ident(name) = t.tok.clone() else { unreachable!("caller checked for an identifier") };
        if name.starts_with(RESERVED_PREFIX) && !self.opts.allow_reserved {
            return Err(self.error_at(&t, ParseErrorKind::Reserved(name)));
        }
        let mut args = Vec::new();
        if self.peek().tok == Tok::LParen {
            self.bump();
            loop {
                let a = self.bump();
                let term = match a.tok.clone() {
                    Tok::Ident(s) => {
                        self.note_constant(&s);
                        Term::Const(s)
                    }
                    Tok::Number(s) if s.chars().all(|c| c.is_ascii_digit()) => {
                        self.note_constant(&s);
                        Term::Const(s)
                    }
                    Tok::Var(s) => Term::Var(s),
                    other => {
                        return Err(self.error_at(&a, ParseErrorKind::Syntax(format!(
                            "expected a term, found {other}"
                        ))))
                    }
                };
                args.push(term);
                match self.peek().tok {
                    Tok::Comma => {
                        self.bump();
                    }
                    Tok::RParen => {
                        self.bump();
                        break;
                    }
                    _ => return Err(self.unexpected("`,` or `)`")),
                }
            }
        }
        Ok(SourceAtom { predicate: name, args })
    }
}

fn degree_error(e: DegreeError) -> ParseErrorKind {
    match e {
        DegreeError::OutOfRange(s) => ParseErrorKind::Range(s),
        DegreeError::Malformed(s) => ParseErrorKind::Syntax(format!("malformed number `{s}`")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> TruthDegree {
        s.parse().unwrap()
    }

    fn atom(name: &str) -> SourceExpr {
        SourceExpr::Atom(SourceAtom { predicate: name.into(), args: vec![] })
    }

    fn one(text: &str) -> Statement {
        let sp = parse(text).unwrap();
        assert_eq!(sp.statements.len(), 1);
        sp.statements.into_iter().next().unwrap()
    }

    #[test]
    fn luk_and_body() {
        let s = one("a :- b * c.");
        assert_eq!(s.head.conn, HeadConn::Single);
        assert_eq!(s.body, SourceExpr::Bin(Conn::LukAnd, Box::new(atom("b")), Box::new(atom("c"))));
    }

    #[test]
    fn luk_or_head_with_constant_body() {
        let s = one("p + q :- 0.5.");
        assert_eq!(s.head.conn, HeadConn::Conn(Conn::LukOr));
        assert_eq!(s.head.items.len(), 2);
        assert_eq!(s.body, SourceExpr::Const(d("1/2")));
    }

    #[test]
    fn mixed_connectives_are_rejected() {
        let err = parse("a :- b * c + d.").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::AmbiguousMix("*", "+")));
        assert!(err.to_string().contains("ambiguous connective mix"));
        assert_eq!((err.line, err.col), (1, 12));
        assert!(parse("a :- b, c && d.").is_ok());
        assert!(matches!(parse("a :- b, c || d.").unwrap_err().kind, ParseErrorKind::AmbiguousMix(",", "||")));
        assert!(matches!(parse("a + b * c.").unwrap_err().kind, ParseErrorKind::AmbiguousMix("+", "*")));
    }

    #[test]
    fn range_and_syntax_errors() {
        let err = parse("a :- 1.5.").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Range("3/2".into()));
        let err = parse("a :- b\n  :- c.").unwrap_err();
        assert_eq!((err.line, err.col), (2, 3));
        assert!(parse("a :- (b * c.").is_err());
        assert!(parse("a :- b").is_err());
        assert!(parse("A :- b.").is_err());
    }

    #[test]
    fn reserved_names() {
        assert!(matches!(parse("__f1 :- a.").unwrap_err().kind, ParseErrorKind::Reserved(_)));
        assert!(parse_with("__f1 :- a.", ParseOptions { allow_reserved: true }).is_ok());
    }

    #[test]
    fn facts_constraints_and_comments() {
        let sp = parse("% header\np. % fact\n:- p * q.\n0.5 :- r.\n").unwrap();
        assert_eq!(sp.statements.len(), 3);
        assert_eq!(sp.statements[0].body, SourceExpr::Const(TruthDegree::one()));
        assert_eq!(sp.statements[1].head.items, vec![SourceHeadItem::Const(TruthDegree::zero())]);
        assert_eq!(sp.statements[1].line, 3);
        assert_eq!(sp.statements[2].head.items, vec![SourceHeadItem::Const(d("0.5"))]);
    }

    #[test]
    fn negation_binds_tightest() {
        let s = one("p :- not q * r.");
        let expected = SourceExpr::Bin(
            Conn::LukAnd,
            Box::new(SourceExpr::Neg(Box::new(atom("q")))),
            Box::new(atom("r")),
        );
        assert_eq!(s.body, expected);
        let s = one("p :- not not p.");
        assert_eq!(s.body, SourceExpr::Neg(Box::new(SourceExpr::Neg(Box::new(atom("p"))))));
    }

    #[test]
    fn atoms_with_arguments() {
        let sp = parse("in(X,Y) + out(X,Y) :- edge(X,Y).\nedge(a,b) :- 1.\nnext(0,1).").unwrap();
        assert_eq!(sp.constants, vec!["a", "b", "0", "1"]);
        let s = &sp.statements[0];
        let SourceHeadItem::Atom(a) = &s.head.items[0] else { panic!() };
        assert_eq!(a.args, vec![Term::Var("X".into()), Term::Var("Y".into())]);
        assert_eq!(s.vars(), vec!["X", "Y"]);
    }

    #[test]
    fn printing_round_trips() {
        let text = "a :- b * (c * d).\np + q :- 1/2.\n:- not (a || b), c.\nx && y :- (a + b) * not c.\nf.\n1/3 :- a.\n";
        let sp = parse(text).unwrap();
        let printed = sp.to_string();
        assert_eq!(parse(&printed).unwrap(), sp);
    }
}
