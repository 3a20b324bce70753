//! Minimal s-expression reader shared by the formula and automaton parsers.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

impl Sexp {
    pub fn atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(s) => Some(s),
            Sexp::List(_) => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::Atom(_) => None,
            Sexp::List(items) => Some(items),
        }
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(s) => write!(f, "{s}"),
            Sexp::List(items) => {
                write!(f, "(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{item}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SexpError {
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unexpected closing parenthesis")]
    UnexpectedClose,
    #[error("trailing input after expression")]
    TrailingInput,
}

pub fn parse(text: &str) -> Result<Sexp, SexpError> {
    let tokens = tokenize(text);
    let mut pos = 0;
    let expr = parse_tokens(&tokens, &mut pos)?;
    if pos != tokens.len() {
        return Err(SexpError::TrailingInput);
    }
    Ok(expr)
}

fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in text.chars() {
        match c {
            '(' | ')' => {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
                tokens.push(c.to_string());
            }
            c if c.is_whitespace() => {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
            }
            c => current.push(c),
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

fn parse_tokens(tokens: &[String], pos: &mut usize) -> Result<Sexp, SexpError> {
    let tok = tokens.get(*pos).ok_or(SexpError::UnexpectedEnd)?;
    *pos += 1;
    match tok.as_str() {
        "(" => {
            let mut items = Vec::new();
            loop {
                match tokens.get(*pos).map(|t| t.as_str()) {
                    Some(")") => {
                        *pos += 1;
                        return Ok(Sexp::List(items));
                    }
                    Some(_) => items.push(parse_tokens(tokens, pos)?),
                    None => return Err(SexpError::UnexpectedEnd),
                }
            }
        }
        ")" => Err(SexpError::UnexpectedClose),
        atom => Ok(Sexp::Atom(atom.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_nested() {
        let e = parse("(and (adj x y) (not (= x y)))").unwrap();
        let items = e.list().unwrap();
        assert_eq!(items[0].atom(), Some("and"));
        assert_eq!(items.len(), 3);
    }

    #[test]
    fn rejects_trailing() {
        assert_eq!(parse("(a) b"), Err(SexpError::TrailingInput));
        assert_eq!(parse(")"), Err(SexpError::UnexpectedClose));
        assert_eq!(parse("("), Err(SexpError::UnexpectedEnd));
    }

    #[test]
    fn display_round_trip() {
        let src = "(or (= x y) (adj x z))";
        let e = parse(src).unwrap();
        assert_eq!(e.to_string(), src);
    }
}
