//! Formula grammar, loosest binding first:
//!
//! ```text
//! impl  := or ('->' impl)?
//! or    := and ('|' and)*
//! and   := until ('&' until)*
//! until := unary ('U' until)?
//! unary := ('!' | 'X' | 'WX' | 'F' | 'G') unary | atom
//! atom  := 'true' | 'false' | name | '(' impl ')'
//! ```
//!
//! `a -> b` is read as `!a | b`. Error positions are 1-based columns.

use super::{Formula, FormulaError, Props};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Not,
    And,
    Or,
    Implies,
    Next,
    WeakNext,
    Eventually,
    Always,
    Until,
    True,
    False,
    Name(String),
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, FormulaError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        let single = match c {
            '!' => Some(Tok::Not),
            '&' => Some(Tok::And),
            '|' => Some(Tok::Or),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(t) = single {
            out.push((t, col));
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
        } else if c == '-' {
            if chars.get(i + 1) == Some(&'>') {
                out.push((Tok::Implies, col));
                i += 2;
            } else {
                return Err(FormulaError::Syntax { pos: col, message: "expected '->'".into() });
            }
        } else if c.is_alphanumeric() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            let tok = match word.as_str() {
                "X" => Tok::Next,
                "WX" => Tok::WeakNext,
                "F" => Tok::Eventually,
                "G" => Tok::Always,
                "U" => Tok::Until,
                "true" => Tok::True,
                "false" => Tok::False,
                _ => Tok::Name(word),
            };
            out.push((tok, col));
        } else {
            return Err(FormulaError::Syntax { pos: col, message: format!("unexpected character '{c}'") });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end_col: usize,
    props: &'a Props,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map(|(_, c)| *c).unwrap_or(self.end_col)
    }

    fn err(&self, message: &str) -> FormulaError {
        let message = if self.pos >= self.toks.len() { "unexpected end of input" } else { message };
        FormulaError::Syntax { pos: self.col(), message: message.into() }
    }

    fn implication(&mut self) -> Result<Formula, FormulaError> {
        let lhs = self.or()?;
        if self.peek() == Some(&Tok::Implies) {
            self.pos += 1;
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, FormulaError> {
        let mut acc = self.and()?;
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            acc = Formula::or(acc, self.and()?);
        }
        Ok(acc)
    }

    fn and(&mut self) -> Result<Formula, FormulaError> {
        let mut acc = self.until()?;
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            acc = Formula::and(acc, self.until()?);
        }
        Ok(acc)
    }

    fn until(&mut self) -> Result<Formula, FormulaError> {
        let lhs = self.unary()?;
        if self.peek() == Some(&Tok::Until) {
            self.pos += 1;
            let rhs = self.until()?;
            return Ok(Formula::until(lhs, rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, FormulaError> {
        let wrap: Option<fn(Formula) -> Formula> = match self.peek() {
            Some(Tok::Not) => Some(Formula::not),
            Some(Tok::Next) => Some(Formula::next),
            Some(Tok::WeakNext) => Some(Formula::weak_next),
            Some(Tok::Eventually) => Some(Formula::eventually),
            Some(Tok::Always) => Some(Formula::always),
            _ => None,
        };
        match wrap {
            Some(w) => {
                self.pos += 1;
                Ok(w(self.unary()?))
            }
            None => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula, FormulaError> {
        match self.peek().cloned() {
            Some(Tok::True) => {
                self.pos += 1;
                Ok(Formula::True)
            }
            Some(Tok::False) => {
                self.pos += 1;
                Ok(Formula::False)
            }
            Some(Tok::Name(name)) => {
                let col = self.col();
                self.pos += 1;
                match self.props.index(&name) {
                    Some(i) => Ok(Formula::Atom(i)),
                    None => Err(FormulaError::UndeclaredProposition { name, pos: col }),
                }
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.implication()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(inner)
            }
            _ => Err(self.err("expected a proposition, constant, unary operator or '('")),
        }
    }
}

/// Parses `text` against the declared propositions.
pub fn parse_formula(text: &str, props: &Props) -> Result<Formula, FormulaError> {
    if props.is_empty() {
        return Err(FormulaError::NoPropositions);
    }
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, end_col: text.chars().count() + 1, props };
    let f = p.implication()?;
    if p.pos != p.toks.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(f)
}
