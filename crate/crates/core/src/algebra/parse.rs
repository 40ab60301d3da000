//! Arithmetic expression parser producing sparse polynomials.
//!
//! Grammar (whitespace insensitive):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*      divisors must be constant
//! unary   := '-' unary | '+' unary | power
//! power   := primary ('^' integer)?
//! primary := number | identifier | '(' expr ')'
//! ```
//!
//! Positions in errors are 1-based character columns.

use super::polynomial::Polynomial;
use super::AlgebraError;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Ge,
    Le,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, AlgebraError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push((Tok::Plus, col));
                i += 1
            }
            '-' => {
                out.push((Tok::Minus, col));
                i += 1
            }
            '*' => {
                out.push((Tok::Star, col));
                i += 1
            }
            '/' => {
                out.push((Tok::Slash, col));
                i += 1
            }
            '^' => {
                out.push((Tok::Caret, col));
                i += 1
            }
            '(' => {
                out.push((Tok::LParen, col));
                i += 1
            }
            ')' => {
                out.push((Tok::RParen, col));
                i += 1
            }
            '>' | '<' => {
                if chars.get(i + 1) == Some(&'=') {
                    out.push((if c == '>' { Tok::Ge } else { Tok::Le }, col));
                    i += 2;
                } else {
                    return Err(AlgebraError::Syntax {
                        pos: col,
                        message: format!("expected '{c}=' (strict inequalities are not supported)"),
                    });
                }
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let s: String = chars[start..i].iter().collect();
                let v: f64 = s.parse().map_err(|_| AlgebraError::Syntax {
                    pos: col,
                    message: format!("malformed number '{s}'"),
                })?;
                out.push((Tok::Num(v), col));
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), col));
            }
            other => {
                return Err(AlgebraError::Syntax {
                    pos: col,
                    message: format!("unexpected character '{other}'"),
                })
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end_col: usize,
    vars: &'a [String],
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|(_, c)| *c).unwrap_or(self.end_col)
    }

    fn err(&self, message: impl Into<String>) -> AlgebraError {
        AlgebraError::Syntax { pos: self.col(), message: message.into() }
    }

    fn expr(&mut self) -> Result<Polynomial, AlgebraError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    acc = &acc + &rhs;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    acc = &acc - &rhs;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial, AlgebraError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    acc = &acc * &rhs;
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let col = self.col();
                    let rhs = self.unary()?;
                    let c = rhs.coeff(&super::Monomial::one(self.vars.len()));
                    if rhs.degree() > 0 || c == 0.0 {
                        return Err(AlgebraError::Syntax {
                            pos: col,
                            message: "divisor must be a non-zero constant".into(),
                        });
                    }
                    acc = acc.scale(1.0 / c);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Polynomial, AlgebraError> {
        match self.peek() {
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

    fn power(&mut self) -> Result<Polynomial, AlgebraError> {
        let base = self.primary()?;
        if let Some(Tok::Caret) = self.peek() {
            self.pos += 1;
            match self.peek().cloned() {
                Some(Tok::Num(v)) => {
                    if v.fract() != 0.0 || v > u32::MAX as f64 {
                        return Err(self.err("exponent must be a non-negative integer"));
                    }
                    self.pos += 1;
                    Ok(base.pow(v as u32))
                }
                Some(Tok::Minus) => Err(AlgebraError::NegativeExponent { pos: self.col() }),
                _ => Err(self.err("expected integer exponent after '^'")),
            }
        } else {
            Ok(base)
        }
    }

    fn primary(&mut self) -> Result<Polynomial, AlgebraError> {
        let n = self.vars.len();
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Polynomial::constant(n, v))
            }
            Some(Tok::Ident(name)) => {
                let col = self.col();
                self.pos += 1;
                match self.vars.iter().position(|v| *v == name) {
                    Some(i) => Ok(Polynomial::var(n, i)),
                    None => Err(AlgebraError::UnknownVariable { name, pos: col }),
                }
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                match self.peek() {
                    Some(Tok::RParen) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    _ => Err(self.err("expected ')'")),
                }
            }
            Some(_) => Err(self.err("expected number, variable or '('")),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

/// Parses `text` as a polynomial over the ordered variable list `vars`.
pub fn parse_poly(text: &str, vars: &[String]) -> Result<Polynomial, AlgebraError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, end_col: text.chars().count() + 1, vars };
    let out = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(out)
}

/// Parses `lhs >= rhs` or `lhs <= rhs` into a polynomial `g` with the
/// meaning `g >= 0`.
pub fn parse_inequality(text: &str, vars: &[String]) -> Result<Polynomial, AlgebraError> {
    let toks = lex(text)?;
    let split = toks
        .iter()
        .position(|(t, _)| matches!(t, Tok::Ge | Tok::Le))
        .ok_or_else(|| AlgebraError::Syntax {
            pos: 1,
            message: "expected an inequality of the form 'expr >= expr'".into(),
        })?;
    let (op, op_col) = toks[split].clone();
    if toks[split + 1..].iter().any(|(t, _)| matches!(t, Tok::Ge | Tok::Le)) {
        return Err(AlgebraError::Syntax { pos: op_col, message: "chained inequalities are not supported".into() });
    }
    let end_col = text.chars().count() + 1;
    let mut lhs_p = Parser { toks: toks[..split].to_vec(), pos: 0, end_col: op_col, vars };
    let lhs = lhs_p.expr()?;
    if lhs_p.pos != lhs_p.toks.len() {
        return Err(lhs_p.err("unexpected trailing input"));
    }
    let mut rhs_p = Parser { toks: toks[split + 1..].to_vec(), pos: 0, end_col, vars };
    let rhs = rhs_p.expr()?;
    if rhs_p.pos != rhs_p.toks.len() {
        return Err(rhs_p.err("unexpected trailing input"));
    }
    Ok(match op {
        Tok::Ge => &lhs - &rhs,
        _ => &rhs - &lhs,
    })
}
