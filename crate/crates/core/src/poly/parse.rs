//! Text grammar for polynomial systems.
//!
//! A system is a list of expressions separated by `;` or by newlines (a
//! newline inside parentheses does not separate). Expressions use `+ - * ^`,
//! parentheses, integer or decimal literals, and division by a constant.
//! Products must be written with an explicit `*`: `x*y`, never `xy` or `2x`.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::One;

use super::polynomial::{Polynomial, Rational};
use crate::error::PolyError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Sep,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> PolyError {
    PolyError::Syntax {
        line,
        col,
        msg: msg.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<Token>, PolyError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (1usize, 1usize);
    let mut depth = 0i32;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let single = |tok| Token {
            tok,
            line: tl,
            col: tc,
        };
        match c {
            '\n' => {
                if depth == 0 {
                    out.push(single(Tok::Sep));
                }
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => {}
            ';' => out.push(single(Tok::Sep)),
            '+' => out.push(single(Tok::Plus)),
            '-' => out.push(single(Tok::Minus)),
            '*' => out.push(single(Tok::Star)),
            '/' => out.push(single(Tok::Slash)),
            '^' => out.push(single(Tok::Caret)),
            '(' => {
                depth += 1;
                out.push(single(Tok::LParen));
            }
            ')' => {
                depth -= 1;
                out.push(single(Tok::RParen));
            }
            '#' => {
                // comment to end of line
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                let lit: String = chars[start..i].iter().collect();
                let value = parse_decimal(&lit).ok_or_else(|| {
                    syntax(tl, tc, format!("malformed number literal '{lit}'"))
                })?;
                col += i - start;
                out.push(Token {
                    tok: Tok::Num(value),
                    line: tl,
                    col: tc,
                });
                continue;
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let name: String = chars[start..i].iter().collect();
                col += i - start;
                out.push(Token {
                    tok: Tok::Ident(name),
                    line: tl,
                    col: tc,
                });
                continue;
            }
            other => return Err(syntax(tl, tc, format!("unexpected character '{other}'"))),
        }
        i += 1;
        col += 1;
    }
    Ok(out)
}

/// `"0.13"` becomes exactly `13/100`.
fn parse_decimal(lit: &str) -> Option<Rational> {
    let mut parts = lit.split('.');
    let int_part = parts.next()?;
    let frac_part = parts.next();
    if parts.next().is_some() {
        return None;
    }
    let frac = frac_part.unwrap_or("");
    if int_part.is_empty() && frac.is_empty() {
        return None;
    }
    let digits = format!("{int_part}{frac}");
    let numer: BigInt = digits.parse().ok()?;
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    Some(Rational::new(numer, denom))
}

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
    names: &'a [String],
    eof: (usize, usize),
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        self.peek().map(|t| (t.line, t.col)).unwrap_or(self.eof)
    }

    fn n(&self) -> usize {
        self.names.len()
    }

    fn expr(&mut self) -> Result<Polynomial, PolyError> {
        let mut acc = self.term()?;
        while let Some(t) = self.peek() {
            match t.tok {
                Tok::Plus => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Tok::Minus => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Polynomial, PolyError> {
        let mut acc = self.unary()?;
        while let Some(t) = self.peek() {
            match t.tok {
                Tok::Star => {
                    self.pos += 1;
                    acc = &acc * &self.unary()?;
                }
                Tok::Slash => {
                    self.pos += 1;
                    let (l, c) = self.here();
                    let rhs = self.unary()?;
                    if rhs.degree() > 0 || rhs.is_zero() {
                        return Err(syntax(l, c, "division is only allowed by a nonzero constant"));
                    }
                    let inv = Rational::one() / rhs.constant_term();
                    acc = acc.scale(&inv);
                }
                Tok::Ident(_) | Tok::Num(_) | Tok::LParen => {
                    return Err(syntax(
                        t.line,
                        t.col,
                        "implicit multiplication is not supported; write '*' explicitly",
                    ));
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Polynomial, PolyError> {
        match self.peek().map(|t| &t.tok) {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(-&self.unary()?)
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Polynomial, PolyError> {
        let base = self.atom()?;
        if let Some(Token { tok: Tok::Caret, .. }) = self.peek() {
            self.pos += 1;
            let (l, c) = self.here();
            match self.peek().map(|t| &t.tok) {
                Some(Tok::Num(k)) if k.is_integer() => {
                    self.pos += 1;
                    let k: u32 = k
                        .to_integer()
                        .try_into()
                        .map_err(|_| syntax(l, c, "exponent too large"))?;
                    if let Some(Token { tok: Tok::Caret, line, col }) = self.peek() {
                        return Err(syntax(*line, *col, "chained '^' is ambiguous; use parentheses"));
                    }
                    return Ok(base.pow(k));
                }
                _ => return Err(syntax(l, c, "exponent must be a nonnegative integer literal")),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Polynomial, PolyError> {
        let (l, c) = self.here();
        let Some(t) = self.peek() else {
            return Err(syntax(l, c, "unexpected end of expression"));
        };
        self.pos += 1;
        match &t.tok {
            Tok::Num(v) => Ok(Polynomial::constant(self.n(), v.clone())),
            Tok::Ident(name) => {
                let i = self
                    .names
                    .iter()
                    .position(|s| s == name)
                    .ok_or_else(|| PolyError::UnknownVariable(name.clone()))?;
                Ok(Polynomial::var(self.n(), i))
            }
            Tok::LParen => {
                let inner = self.expr()?;
                match self.peek() {
                    Some(Token { tok: Tok::RParen, .. }) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    _ => {
                        let (l, c) = self.here();
                        Err(syntax(l, c, "expected ')'"))
                    }
                }
            }
            other => Err(syntax(t.line, t.col, format!("unexpected token {other:?}"))),
        }
    }
}

/// Parses a system. Variables are ordered lexicographically unless
/// `var_order` is given, in which case every identifier must appear in it.
pub fn parse_polynomials(
    text: &str,
    var_order: Option<&[String]>,
) -> Result<(Vec<Polynomial>, Vec<String>), PolyError> {
    let toks = tokenize(text)?;
    let idents: BTreeSet<String> = toks
        .iter()
        .filter_map(|t| match &t.tok {
            Tok::Ident(s) => Some(s.clone()),
            _ => None,
        })
        .collect();
    let names: Vec<String> = match var_order {
        Some(order) => {
            if let Some(missing) = idents.iter().find(|s| !order.contains(s)) {
                return Err(PolyError::UnknownVariable(missing.clone()));
            }
            order.to_vec()
        }
        None => idents.into_iter().collect(),
    };
    let mut polys = Vec::new();
    let last = text.lines().count().max(1);
    let eof = (last, text.lines().last().map(|l| l.len() + 1).unwrap_or(1));
    for chunk in toks.split(|t| t.tok == Tok::Sep) {
        if chunk.is_empty() {
            continue;
        }
        let mut p = Parser {
            toks: chunk,
            pos: 0,
            names: &names,
            eof,
        };
        let poly = p.expr()?;
        if let Some(t) = p.peek() {
            return Err(syntax(t.line, t.col, format!("unexpected token {:?}", t.tok)));
        }
        polys.push(poly);
    }
    if polys.is_empty() {
        return Err(PolyError::EmptyInput);
    }
    if names.is_empty() {
        return Err(PolyError::NoVariables);
    }
    Ok((polys, names))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(parse_decimal("0.13"), Some(r(13, 100)));
        assert_eq!(parse_decimal("2."), Some(r(2, 1)));
        assert_eq!(parse_decimal(".5"), Some(r(1, 2)));
        assert_eq!(parse_decimal("1.2.3"), None);
        assert_eq!(parse_decimal("."), None);
    }

    #[test]
    fn circle() {
        let (ps, names) = parse_polynomials("x^2 + y^2 - 1", None).unwrap();
        assert_eq!(names, vec!["x", "y"]);
        assert_eq!(ps.len(), 1);
        assert_eq!(ps[0].degree(), 2);
        assert_eq!(ps[0].num_terms(), 3);
    }

    #[test]
    fn implicit_multiplication_rejected() {
        let err = parse_polynomials("2x + 1", None).unwrap_err();
        assert!(matches!(err, PolyError::Syntax { line: 1, col: 2, .. }), "{err:?}");
        // `xy` is a single identifier, so it is an unknown name under an
        // explicit ordering.
        let order: Vec<String> = ["x", "y"].iter().map(|s| s.to_string()).collect();
        let err = parse_polynomials("xy + 1", Some(&order)).unwrap_err();
        assert_eq!(err, PolyError::UnknownVariable("xy".into()));
        let err = parse_polynomials("(x+1)(x-1)", None).unwrap_err();
        assert!(matches!(err, PolyError::Syntax { .. }));
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse_polynomials("x^2 + y\nx + * y", None).unwrap_err();
        assert_eq!(
            err,
            PolyError::Syntax {
                line: 2,
                col: 5,
                msg: "unexpected token Star".into()
            }
        );
        assert_eq!(parse_polynomials("  \n ; ", None).unwrap_err(), PolyError::EmptyInput);
        assert!(matches!(
            parse_polynomials("x^y", None).unwrap_err(),
            PolyError::Syntax { .. }
        ));
        assert!(matches!(
            parse_polynomials("x / y", None).unwrap_err(),
            PolyError::Syntax { .. }
        ));
    }

    #[test]
    fn newline_inside_parentheses_continues() {
        let (ps, _) = parse_polynomials("(x +\n y)^2; x - 1", None).unwrap();
        assert_eq!(ps.len(), 2);
        assert_eq!(ps[0].num_terms(), 3);
    }

    #[test]
    fn division_by_constant() {
        let (ps, _) = parse_polynomials("x^2/4 + y^2 - 1", None).unwrap();
        assert_eq!(ps[0].coefficient(&[2, 0]), r(1, 4));
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        let (ps, _) = parse_polynomials("-x^2", None).unwrap();
        assert_eq!(ps[0].coefficient(&[2]), r(-1, 1));
        let (ps, _) = parse_polynomials("(-x)^3 + 0", None).unwrap();
        assert_eq!(ps[0].coefficient(&[3]), r(-1, 1));
        assert!(ps[0].coefficient(&[3]) != Rational::default());
    }
}
