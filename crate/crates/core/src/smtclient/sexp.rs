//! Minimal s-expression reader for solver responses.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

impl Sexp {
    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(s) => Some(s),
            Sexp::List(_) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(xs) => Some(xs),
            Sexp::Atom(_) => None,
        }
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(s) => f.write_str(s),
            Sexp::List(xs) => {
                f.write_str("(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SexpError {
    #[error("unbalanced parentheses at byte {0}")]
    Unbalanced(usize),
    #[error("unterminated quoted symbol or string at byte {0}")]
    Unterminated(usize),
}

/// Reads every top-level expression in `text`. Quoted symbols lose their bars.
pub fn parse_all(text: &str) -> Result<Vec<Sexp>, SexpError> {
    let bytes = text.as_bytes();
    let mut stack: Vec<(usize, Vec<Sexp>)> = Vec::new();
    let mut top = Vec::new();
    let mut i = 0;
    let push = |stack: &mut Vec<(usize, Vec<Sexp>)>, top: &mut Vec<Sexp>, e: Sexp| match stack.last_mut() {
        Some((_, xs)) => xs.push(e),
        None => top.push(e),
    };
    while i < bytes.len() {
        match bytes[i] {
            b if b.is_ascii_whitespace() => i += 1,
            b';' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'(' => {
                stack.push((i, Vec::new()));
                i += 1;
            }
            b')' => {
                let (_, xs) = stack.pop().ok_or(SexpError::Unbalanced(i))?;
                push(&mut stack, &mut top, Sexp::List(xs));
                i += 1;
            }
            q @ (b'|' | b'"') => {
                let start = i;
                i += 1;
                let from = i;
                while i < bytes.len() && bytes[i] != q {
                    i += 1;
                }
                if i >= bytes.len() {
                    return Err(SexpError::Unterminated(start));
                }
                let body = &text[from..i];
                let atom = if q == b'"' { format!("\"{body}\"") } else { body.to_string() };
                push(&mut stack, &mut top, Sexp::Atom(atom));
                i += 1;
            }
            _ => {
                let from = i;
                while i < bytes.len() && !bytes[i].is_ascii_whitespace() && !b"()|\";".contains(&bytes[i]) {
                    i += 1;
                }
                push(&mut stack, &mut top, Sexp::Atom(text[from..i].to_string()));
            }
        }
    }
    match stack.first() {
        Some((pos, _)) => Err(SexpError::Unbalanced(*pos)),
        None => Ok(top),
    }
}
