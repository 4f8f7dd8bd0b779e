//! Just enough of an S-expression reader for solver output: symbols,
//! `|quoted|` symbols, integers, lists and `;` comments.

use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sexp {
    /// Symbol or numeral, with its byte offset.
    Atom(String, usize),
    List(Vec<Sexp>, usize),
}

impl Sexp {
    pub fn pos(&self) -> usize {
        match self {
            Sexp::Atom(_, p) | Sexp::List(_, p) => *p,
        }
    }

    pub fn sym(&self) -> Option<&str> {
        match self {
            Sexp::Atom(s, _) => Some(s),
            Sexp::List(..) => None,
        }
    }

    pub fn is_sym(&self, s: &str) -> bool {
        self.sym() == Some(s)
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(s, _) => write!(f, "{s}"),
            Sexp::List(xs, _) => {
                write!(f, "(")?;
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SexpError {
    #[error("offset {0}: unbalanced ')'")]
    Unbalanced(usize),
    #[error("offset {0}: unclosed '('")]
    Unclosed(usize),
    #[error("offset {0}: unterminated quoted symbol")]
    Quote(usize),
}

pub fn parse_sexps(text: &str) -> Result<Vec<Sexp>, SexpError> {
    let bytes = text.as_bytes();
    let mut stack: Vec<(Vec<Sexp>, usize)> = vec![(Vec::new(), 0)];
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b';' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
                continue;
            }
            b'(' => stack.push((Vec::new(), i)),
            b')' => {
                if stack.len() == 1 {
                    return Err(SexpError::Unbalanced(i));
                }
                let (xs, p) = stack.pop().expect("non-empty");
                stack.last_mut().expect("outer").0.push(Sexp::List(xs, p));
            }
            b'|' => {
                let start = i;
                let end = text[i + 1..].find('|').ok_or(SexpError::Quote(start))? + i + 1;
                stack.last_mut().expect("outer").0.push(Sexp::Atom(text[i + 1..end].to_string(), start));
                i = end;
            }
            c if c.is_ascii_whitespace() => {}
            _ => {
                let start = i;
                while i < bytes.len() && !bytes[i].is_ascii_whitespace() && !b"();|".contains(&bytes[i]) {
                    i += 1;
                }
                stack.last_mut().expect("outer").0.push(Sexp::Atom(text[start..i].to_string(), start));
                continue;
            }
        }
        i += 1;
    }
    if stack.len() > 1 {
        return Err(SexpError::Unclosed(stack.last().expect("open").1));
    }
    Ok(stack.pop().expect("top").0)
}
