//! LTL over finite, non-empty traces whose letters are single propositions.

mod parse;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use parse::parse_formula;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("syntax error at column {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("undeclared proposition '{name}' at column {pos}")]
    UndeclaredProposition { name: String, pos: usize },
    #[error("proposition set is empty")]
    NoPropositions,
}

/// Declared proposition names; atoms and letters are indices into it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Props {
    names: Vec<String>,
}

impl Props {
    pub fn new(names: Vec<String>) -> Self {
        Props { names }
    }

    pub fn numbered(n: usize) -> Self {
        Props { names: (0..n).map(|i| format!("p{i}")).collect() }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// Formula AST. `Next` is the strong next; `WeakNext` also holds at the
/// last position of a trace and is what negated strong nexts normalise to.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom(usize),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    WeakNext(Box<Formula>),
    Eventually(Box<Formula>),
    Always(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
}

use Formula::*;

impl Formula {
    pub fn atom(p: usize) -> Self {
        Atom(p)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Or(Box::new(a), Box::new(b))
    }

    pub fn next(f: Formula) -> Self {
        Next(Box::new(f))
    }

    pub fn weak_next(f: Formula) -> Self {
        WeakNext(Box::new(f))
    }

    pub fn eventually(f: Formula) -> Self {
        Eventually(Box::new(f))
    }

    pub fn always(f: Formula) -> Self {
        Always(Box::new(f))
    }

    pub fn until(a: Formula, b: Formula) -> Self {
        Until(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::or(Formula::not(a), b)
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            True | False | Atom(_) => 1,
            Not(a) | Next(a) | WeakNext(a) | Eventually(a) | Always(a) => 1 + a.size(),
            And(a, b) | Or(a, b) | Until(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            True | False | Atom(_) => 0,
            Not(a) | Next(a) | WeakNext(a) | Eventually(a) | Always(a) => 1 + a.depth(),
            And(a, b) | Or(a, b) | Until(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Largest atom index plus one (0 when atom-free).
    pub fn atom_bound(&self) -> usize {
        match self {
            True | False => 0,
            Atom(p) => p + 1,
            Not(a) | Next(a) | WeakNext(a) | Eventually(a) | Always(a) => a.atom_bound(),
            And(a, b) | Or(a, b) | Until(a, b) => a.atom_bound().max(b.atom_bound()),
        }
    }

    /// Negation normal form: negations only directly above atoms.
    pub fn to_nnf(&self) -> Formula {
        nnf(self, false)
    }

    /// Whether the NNF stays within the safe fragment
    /// {true, false, p, !p, &, |, X, WX, G}.
    pub fn is_safe(&self) -> bool {
        fn safe(f: &Formula) -> bool {
            match f {
                True | False | Atom(_) => true,
                Not(a) => matches!(**a, Atom(_)),
                And(a, b) | Or(a, b) => safe(a) && safe(b),
                Next(a) | WeakNext(a) | Always(a) => safe(a),
                Eventually(_) | Until(..) => false,
            }
        }
        safe(&self.to_nnf())
    }

    /// `σ, 0 ⊨ self`. Panics on an empty trace.
    pub fn evaluate(&self, trace: &[usize]) -> bool {
        assert!(!trace.is_empty(), "traces are non-empty");
        self.sat(trace)[0]
    }

    /// Satisfaction at every position of `trace`, computed back to front.
    pub fn sat(&self, trace: &[usize]) -> Vec<bool> {
        let n = trace.len();
        match self {
            True => vec![true; n],
            False => vec![false; n],
            Atom(p) => trace.iter().map(|l| l == p).collect(),
            Not(a) => a.sat(trace).into_iter().map(|v| !v).collect(),
            And(a, b) => a.sat(trace).into_iter().zip(b.sat(trace)).map(|(x, y)| x && y).collect(),
            Or(a, b) => a.sat(trace).into_iter().zip(b.sat(trace)).map(|(x, y)| x || y).collect(),
            Next(a) => {
                let s = a.sat(trace);
                (0..n).map(|i| i + 1 < n && s[i + 1]).collect()
            }
            WeakNext(a) => {
                let s = a.sat(trace);
                (0..n).map(|i| i + 1 == n || s[i + 1]).collect()
            }
            Eventually(a) => {
                let s = a.sat(trace);
                let mut out = vec![false; n];
                let mut acc = false;
                for i in (0..n).rev() {
                    acc |= s[i];
                    out[i] = acc;
                }
                out
            }
            Always(a) => {
                let s = a.sat(trace);
                let mut out = vec![false; n];
                let mut acc = true;
                for i in (0..n).rev() {
                    acc &= s[i];
                    out[i] = acc;
                }
                out
            }
            Until(a, b) => {
                let sa = a.sat(trace);
                let sb = b.sat(trace);
                let mut out = vec![false; n];
                let mut next = false;
                for i in (0..n).rev() {
                    out[i] = sb[i] || (sa[i] && next);
                    next = out[i];
                }
                out
            }
        }
    }

    pub fn display<'a>(&'a self, props: &'a Props) -> FormulaDisplay<'a> {
        FormulaDisplay { f: self, props }
    }
}

fn nnf(f: &Formula, neg: bool) -> Formula {
    match (f, neg) {
        (True, false) | (False, true) => True,
        (True, true) | (False, false) => False,
        (Atom(p), false) => Atom(*p),
        (Atom(p), true) => Formula::not(Atom(*p)),
        (Not(a), _) => nnf(a, !neg),
        (And(a, b), false) => Formula::and(nnf(a, false), nnf(b, false)),
        (And(a, b), true) => Formula::or(nnf(a, true), nnf(b, true)),
        (Or(a, b), false) => Formula::or(nnf(a, false), nnf(b, false)),
        (Or(a, b), true) => Formula::and(nnf(a, true), nnf(b, true)),
        (Next(a), false) => Formula::next(nnf(a, false)),
        (Next(a), true) => Formula::weak_next(nnf(a, true)),
        (WeakNext(a), false) => Formula::weak_next(nnf(a, false)),
        (WeakNext(a), true) => Formula::next(nnf(a, true)),
        (Eventually(a), false) => Formula::eventually(nnf(a, false)),
        (Eventually(a), true) => Formula::always(nnf(a, true)),
        (Always(a), false) => Formula::always(nnf(a, false)),
        (Always(a), true) => Formula::eventually(nnf(a, true)),
        (Until(a, b), false) => Formula::until(nnf(a, false), nnf(b, false)),
        // !(a U b) == (!b U (!a & !b)) | G !b
        (Until(a, b), true) => {
            let na = nnf(a, true);
            let nb = nnf(b, true);
            Formula::or(Formula::until(nb.clone(), Formula::and(na, nb.clone())), Formula::always(nb))
        }
    }
}

/// Printer matching the parser's precedence so that printing then parsing
/// gives back the same tree.
pub struct FormulaDisplay<'a> {
    f: &'a Formula,
    props: &'a Props,
}

const PREC_OR: u8 = 1;
const PREC_AND: u8 = 2;
const PREC_UNTIL: u8 = 3;
const PREC_UNARY: u8 = 4;

fn prec(f: &Formula) -> u8 {
    match f {
        Or(..) => PREC_OR,
        And(..) => PREC_AND,
        Until(..) => PREC_UNTIL,
        Not(_) | Next(_) | WeakNext(_) | Eventually(_) | Always(_) => PREC_UNARY,
        True | False | Atom(_) => PREC_UNARY + 1,
    }
}

impl FormulaDisplay<'_> {
    fn child(&self, out: &mut fmt::Formatter<'_>, f: &Formula, min_prec: u8) -> fmt::Result {
        if prec(f) < min_prec {
            write!(out, "(")?;
            self.node(out, f)?;
            write!(out, ")")
        } else {
            self.node(out, f)
        }
    }

    fn node(&self, out: &mut fmt::Formatter<'_>, f: &Formula) -> fmt::Result {
        match f {
            True => write!(out, "true"),
            False => write!(out, "false"),
            Atom(p) => match self.props.names.get(*p) {
                Some(n) => write!(out, "{n}"),
                None => write!(out, "p{p}"),
            },
            Not(a) => {
                write!(out, "!")?;
                self.child(out, a, PREC_UNARY)
            }
            Next(a) | WeakNext(a) | Eventually(a) | Always(a) => {
                let op = match f {
                    Next(_) => "X",
                    WeakNext(_) => "WX",
                    Eventually(_) => "F",
                    _ => "G",
                };
                write!(out, "{op} ")?;
                self.child(out, a, PREC_UNARY)
            }
            // & and | associate to the left, U to the right
            And(a, b) => {
                self.child(out, a, PREC_AND)?;
                write!(out, " & ")?;
                self.child(out, b, PREC_AND + 1)
            }
            Or(a, b) => {
                self.child(out, a, PREC_OR)?;
                write!(out, " | ")?;
                self.child(out, b, PREC_OR + 1)
            }
            Until(a, b) => {
                self.child(out, a, PREC_UNTIL + 1)?;
                write!(out, " U ")?;
                self.child(out, b, PREC_UNTIL)
            }
        }
    }
}

impl fmt::Display for FormulaDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.node(f, self.f)
    }
}
