//! Polynomial string grammar:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('-' | '+') unary | power
//! power  := atom ('^' integer)?
//! atom   := number | variable | '(' expr ')'
//! ```
//!
//! Division is only allowed by nonzero constants.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use super::poly::{BiPoly, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// How identifiers map to variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variables {
    /// `x` and `y`.
    Bivariate,
    /// A single index variable written as `x`, `n`, `k` or `i`; mapped to `x`.
    Index,
}

pub fn parse_poly(s: &str) -> Result<BiPoly, ParseError> {
    parse_with(s, Variables::Bivariate)
}

pub fn parse_index_poly(s: &str) -> Result<BiPoly, ParseError> {
    parse_with(s, Variables::Index)
}

pub fn parse_with(s: &str, vars: Variables) -> Result<BiPoly, ParseError> {
    let tokens = tokenize(s)?;
    let mut p = Parser { tokens, pos: 0, vars, end: s.chars().count() + 1 };
    let out = p.expr()?;
    if let Some(t) = p.peek() {
        return Err(err(t.col, format!("unexpected '{}'", t.kind.text())));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
enum Kind {
    Num(BigRational, String),
    Ident(String),
    Op(char),
}

impl Kind {
    fn text(&self) -> String {
        match self {
            Kind::Num(_, t) | Kind::Ident(t) => t.clone(),
            Kind::Op(c) => c.to_string(),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    kind: Kind,
    col: usize,
}

fn err(col: usize, message: impl Into<String>) -> ParseError {
    ParseError { line: 1, column: col, message: message.into() }
}

fn tokenize(s: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let (v, _) = super::parse_decimal(&text).ok_or_else(|| err(col, format!("bad number '{text}'")))?;
            out.push(Token { kind: Kind::Num(v, text), col });
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token { kind: Kind::Ident(chars[start..i].iter().collect()), col });
        } else if "+-*/^()".contains(c) {
            out.push(Token { kind: Kind::Op(c), col });
            i += 1;
        } else {
            return Err(err(col, format!("unexpected character '{c}'")));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    vars: Variables,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_op(&self) -> Option<char> {
        match self.peek() {
            Some(Token { kind: Kind::Op(c), .. }) => Some(*c),
            _ => None,
        }
    }

    fn col(&self) -> usize {
        self.peek().map_or(self.end, |t| t.col)
    }

    fn expr(&mut self) -> Result<BiPoly, ParseError> {
        let mut acc = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if op == '+' { acc + rhs } else { acc - rhs };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<BiPoly, ParseError> {
        let mut acc = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let col = self.col();
            let rhs = self.unary()?;
            if op == '*' {
                acc = acc * rhs;
            } else {
                if !rhs.is_constant() {
                    return Err(err(col, "division by a non-constant"));
                }
                let c = rhs.constant_term();
                if c.is_zero() {
                    return Err(err(col, "division by zero"));
                }
                acc = acc.scale(&c.recip());
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<BiPoly, ParseError> {
        match self.peek_op() {
            Some('-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<BiPoly, ParseError> {
        let base = self.atom()?;
        if self.peek_op() != Some('^') {
            return Ok(base);
        }
        self.pos += 1;
        let col = self.col();
        let e = match self.peek() {
            Some(Token { kind: Kind::Num(v, _), .. }) if v.is_integer() => {
                v.to_integer().to_u32().ok_or_else(|| err(col, "exponent too large"))?
            }
            _ => return Err(err(col, "expected a nonnegative integer exponent")),
        };
        self.pos += 1;
        if self.peek_op() == Some('^') {
            return Err(err(self.col(), "chained exponents are not supported"));
        }
        Ok(base.pow(e))
    }

    fn atom(&mut self) -> Result<BiPoly, ParseError> {
        let col = self.col();
        let Some(tok) = self.peek().cloned() else {
            return Err(err(col, "unexpected end of input"));
        };
        self.pos += 1;
        match tok.kind {
            Kind::Num(v, _) => Ok(BiPoly::constant(v)),
            Kind::Ident(name) => self.variable(&name, col),
            Kind::Op('(') => {
                let inner = self.expr()?;
                if self.peek_op() != Some(')') {
                    return Err(err(self.col(), "expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Kind::Op(c) => Err(err(col, format!("unexpected '{c}'"))),
        }
    }

    fn variable(&self, name: &str, col: usize) -> Result<BiPoly, ParseError> {
        let v = match (self.vars, name) {
            (Variables::Bivariate, "x") => Var::X,
            (Variables::Bivariate, "y") => Var::Y,
            (Variables::Index, "x" | "n" | "k" | "i") => Var::X,
            _ => return Err(err(col, format!("unknown variable '{name}'"))),
        };
        Ok(BiPoly::var(v))
    }
}

/// Parses an integer literal with a column-aware error, used by file readers.
pub fn parse_int(s: &str) -> Result<BigInt, ParseError> {
    s.trim().parse().map_err(|_| err(1, format!("bad integer '{s}'")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::poly::rat;

    #[test]
    fn parses_zeta3_polynomial() {
        let p = parse_poly("x^3 + 2*x^2*y + 2*x*y^2 + y^3").unwrap();
        assert_eq!(p.eval_i64(2, 1), rat(21));
    }

    #[test]
    fn precedence_and_unary_minus() {
        let p = parse_poly("-x^2 + 3*(x - y)/2").unwrap();
        assert_eq!(p.eval_i64(2, 0), rat(-1));
        assert_eq!(parse_poly("2^3").unwrap(), BiPoly::from_int(8));
    }

    #[test]
    fn index_aliases() {
        let p = parse_index_poly("(2*n-1)^2").unwrap();
        assert_eq!(p.eval_i64(3, 0), rat(25));
        assert!(parse_poly("n").is_err());
    }

    #[test]
    fn errors_carry_columns() {
        let e = parse_poly("x+*y").unwrap_err();
        assert_eq!((e.line, e.column), (1, 3));
        let e = parse_poly("x/(y+1)").unwrap_err();
        assert_eq!(e.column, 3);
        let e = parse_poly("(x+y").unwrap_err();
        assert_eq!(e.column, 5);
        assert!(parse_poly("x $ y").is_err());
        assert!(parse_poly("2x").is_err());
    }

    #[test]
    fn display_round_trip() {
        for s in ["x^3 + 2*x^2*y + 2*x*y^2 + y^3", "-x^6 + y^6", "(1/2)*x - 3", "0"] {
            let p = parse_poly(s).unwrap();
            let printed = p.to_string();
            assert_eq!(parse_poly(&printed).unwrap(), p);
            assert_eq!(parse_poly(&printed).unwrap().to_string(), printed);
        }
    }
}
