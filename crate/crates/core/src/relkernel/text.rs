//! Canonical text form of elements.
//!
//! Naturals print as digits, atoms as identifiers, pairs as `(x,y)` and sets
//! as `{a,b}` in canonical order with no whitespace. The parser accepts
//! optional whitespace so hand-written scenario files stay readable.

use thiserror::Error;

use super::{Element, FiniteSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("column {column}: {message}")]
pub struct ParseElementError {
    /// 1-based column within the parsed text.
    pub column: usize,
    pub message: String,
}

pub fn is_atom_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub fn parse_element(text: &str) -> Result<Element, ParseElementError> {
    let mut p = Parser {
        bytes: text.as_bytes(),
        pos: 0,
    };
    let e = p.element()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(p.error("trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> ParseElementError {
        ParseElementError {
            column: self.pos + 1,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn expect(&mut self, b: u8) -> Result<(), ParseElementError> {
        if self.peek() == Some(b) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected '{}'", b as char)))
        }
    }

    fn element(&mut self) -> Result<Element, ParseElementError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let l = self.element()?;
                self.expect(b',')?;
                let r = self.element()?;
                self.expect(b')')?;
                Ok(Element::pair(l, r))
            }
            Some(b'{') => {
                self.pos += 1;
                let mut items = Vec::new();
                if self.peek() == Some(b'}') {
                    self.pos += 1;
                    return Ok(Element::Set(FiniteSet::empty()));
                }
                loop {
                    items.push(self.element()?);
                    match self.peek() {
                        Some(b',') => self.pos += 1,
                        Some(b'}') => {
                            self.pos += 1;
                            break;
                        }
                        _ => return Err(self.error("expected ',' or '}'")),
                    }
                }
                Ok(Element::Set(items.into_iter().collect()))
            }
            Some(b) if b.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let digits = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
                digits.parse::<u64>().map(Element::Nat).map_err(|_| {
                    ParseElementError {
                        column: start + 1,
                        message: "natural out of range".to_string(),
                    }
                })
            }
            Some(b) if b.is_ascii_alphabetic() || b == b'_' => {
                let start = self.pos;
                while self.pos < self.bytes.len()
                    && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
                Ok(Element::atom(name))
            }
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_nested_values() {
        let e = parse_element("{(A,{(c1,{B,C})}),(B,{})}").unwrap();
        assert_eq!(e.to_string(), "{(A,{(c1,{B,C})}),(B,{})}");
    }

    #[test]
    fn whitespace_is_tolerated_and_dropped() {
        let e = parse_element(" { b , a } ").unwrap();
        assert_eq!(e.to_string(), "{a,b}");
    }

    #[test]
    fn errors_carry_columns() {
        let err = parse_element("{a,").unwrap_err();
        assert_eq!(err.column, 4);
        let err = parse_element("(a b)").unwrap_err();
        assert_eq!(err.column, 4);
        assert!(parse_element("a b").is_err());
        assert!(parse_element("").is_err());
    }

    #[test]
    fn atom_names() {
        assert!(is_atom_name("c1"));
        assert!(is_atom_name("_x"));
        assert!(!is_atom_name("1c"));
        assert!(!is_atom_name(""));
    }
}
