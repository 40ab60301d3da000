use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::monomial::Monomial;
use super::noise::NoiseModel;
use super::AlgebraError;

/// Sparse real polynomial over a fixed number of variables.
///
/// Zero coefficients are never stored, so the zero polynomial has an empty
/// term map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "TermList", try_from = "TermList")]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, f64>,
}

/// Serialized form: arity plus `[exponents, coefficient]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct TermList {
    nvars: usize,
    terms: Vec<(Vec<u32>, f64)>,
}

impl From<Polynomial> for TermList {
    fn from(p: Polynomial) -> Self {
        TermList {
            nvars: p.nvars,
            terms: p.terms.into_iter().map(|(m, c)| (m.exponents().to_vec(), c)).collect(),
        }
    }
}

impl TryFrom<TermList> for Polynomial {
    type Error = String;

    fn try_from(t: TermList) -> Result<Self, Self::Error> {
        let mut p = Polynomial::zero(t.nvars);
        for (e, c) in t.terms {
            if e.len() != t.nvars {
                return Err(format!("term has {} exponents, expected {}", e.len(), t.nvars));
            }
            if !c.is_finite() {
                return Err("non-finite coefficient".into());
            }
            p.add_term(Monomial::from_exponents(e), c);
        }
        Ok(p)
    }
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::one(nvars), c);
        p
    }

    pub fn var(nvars: usize, index: usize) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::var(nvars, index), 1.0);
        p
    }

    pub fn monomial(m: Monomial, c: f64) -> Self {
        let mut p = Self::zero(m.nvars());
        p.add_term(m, c);
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, f64)>) -> Self {
        let mut p = Self::zero(nvars);
        for (m, c) in terms {
            assert_eq!(m.nvars(), nvars, "monomial arity mismatch");
            p.add_term(m, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, f64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> f64 {
        self.terms.get(m).copied().unwrap_or(0.0)
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, range: std::ops::Range<usize>) -> u32 {
        self.terms
            .keys()
            .map(|m| m.degree_in(range.clone()))
            .max()
            .unwrap_or(0)
    }

    pub fn add_term(&mut self, m: Monomial, c: f64) {
        if c == 0.0 {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == 0.0 {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        if s == 0.0 {
            return Polynomial::zero(self.nvars);
        }
        Polynomial {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut acc = Polynomial::constant(self.nvars, 1.0);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Drops terms with `|c| <= tol`.
    pub fn prune(&self, tol: f64) -> Polynomial {
        Polynomial {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.abs() > tol)
                .map(|(m, c)| (m.clone(), *c))
                .collect(),
        }
    }

    /// Re-expresses the polynomial over `nvars >= self.nvars` variables; the
    /// new trailing variables do not occur.
    pub fn extend(&self, nvars: usize) -> Polynomial {
        assert!(nvars >= self.nvars);
        Polynomial {
            nvars,
            terms: self.terms.iter().map(|(m, c)| (m.extend(nvars), *c)).collect(),
        }
    }

    /// Evaluates the polynomial using per-variable power tables.
    pub fn eval(&self, point: &[f64]) -> Result<f64, AlgebraError> {
        if point.len() != self.nvars {
            return Err(AlgebraError::DimensionMismatch {
                expected: self.nvars,
                found: point.len(),
            });
        }
        Ok(self.eval_unchecked(point))
    }

    pub(crate) fn eval_unchecked(&self, point: &[f64]) -> f64 {
        let max_deg = self.degree() as usize;
        if max_deg <= 1 {
            return self.terms.iter().map(|(m, c)| c * m.eval(point)).sum();
        }
        let powers: Vec<Vec<f64>> = point
            .iter()
            .map(|&x| {
                let mut row = Vec::with_capacity(max_deg + 1);
                let mut acc = 1.0;
                for _ in 0..=max_deg {
                    row.push(acc);
                    acc *= x;
                }
                row
            })
            .collect();
        self.terms
            .iter()
            .map(|(m, c)| {
                m.exponents()
                    .iter()
                    .enumerate()
                    .fold(*c, |acc, (i, &e)| acc * powers[i][e as usize])
            })
            .sum()
    }

    /// Substitutes `subs[i]` for variable `i`. All substituted polynomials
    /// must share one arity, which becomes the arity of the result.
    pub fn compose(&self, subs: &[Polynomial]) -> Result<Polynomial, AlgebraError> {
        if subs.len() != self.nvars {
            return Err(AlgebraError::DimensionMismatch {
                expected: self.nvars,
                found: subs.len(),
            });
        }
        let target = match subs.first() {
            Some(p) => p.nvars,
            None => 0,
        };
        if let Some(bad) = subs.iter().find(|p| p.nvars != target) {
            return Err(AlgebraError::DimensionMismatch {
                expected: target,
                found: bad.nvars,
            });
        }
        let max_exp: Vec<u32> = (0..self.nvars)
            .map(|i| self.terms.keys().map(|m| m.exponents()[i]).max().unwrap_or(0))
            .collect();
        let power_tables: Vec<Vec<Polynomial>> = subs
            .iter()
            .zip(&max_exp)
            .map(|(s, &k)| {
                let mut row = vec![Polynomial::constant(target, 1.0)];
                for j in 1..=k as usize {
                    let next = &row[j - 1] * s;
                    row.push(next);
                }
                row
            })
            .collect();
        let mut out = Polynomial::zero(target);
        for (m, c) in &self.terms {
            let mut term = Polynomial::constant(target, *c);
            for (i, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    term = &term * &power_tables[i][e as usize];
                }
            }
            out = &out + &term;
        }
        Ok(out)
    }

    /// Expectation over the trailing noise variables: every factor
    /// `w_j^k` is replaced with the `k`-th raw moment of noise dimension `j`.
    /// The first `nvars - noise.dim()` variables are kept.
    pub fn expect_noise(&self, noise: &NoiseModel) -> Result<Polynomial, AlgebraError> {
        let m = noise.dim();
        if m > self.nvars {
            return Err(AlgebraError::DimensionMismatch {
                expected: m,
                found: self.nvars,
            });
        }
        let n = self.nvars - m;
        let mut out = Polynomial::zero(n);
        for (mono, c) in &self.terms {
            let exps = mono.exponents();
            let mut factor = *c;
            for (j, &k) in exps[n..].iter().enumerate() {
                if k > 0 {
                    factor *= noise.moment(j, k)?;
                }
            }
            out.add_term(mono.truncate(n), factor);
        }
        Ok(out)
    }

    /// Largest absolute coefficient.
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |a, c| a.max(c.abs()))
    }

    pub fn display<'a>(&'a self, names: &'a [String]) -> PolyDisplay<'a> {
        PolyDisplay { poly: self, names }
    }
}

impl<'a> Add<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &'a Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars, "polynomial arity mismatch");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), *c);
        }
        out
    }
}

impl<'a> Sub<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &'a Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars, "polynomial arity mismatch");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -*c);
        }
        out
    }
}

impl<'a> Mul<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &'a Polynomial) -> Polynomial {
        assert_eq!(self.nvars, rhs.nvars, "polynomial arity mismatch");
        let mut acc: BTreeMap<Monomial, f64> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                *acc.entry(ma.mul(mb)).or_insert(0.0) += ca * cb;
            }
        }
        acc.retain(|_, c| *c != 0.0);
        Polynomial { nvars: self.nvars, terms: acc }
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

pub struct PolyDisplay<'a> {
    poly: &'a Polynomial,
    names: &'a [String],
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.terms.is_empty() {
            return write!(f, "0");
        }
        // highest degree first reads more naturally
        for (i, (m, c)) in self.poly.terms.iter().rev().enumerate() {
            let (sign, mag) = if *c < 0.0 { ("-", -c) } else { ("+", *c) };
            if i == 0 {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let factors: Vec<String> = m
                .exponents()
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(v, &e)| {
                    let name = self.names.get(v).cloned().unwrap_or_else(|| format!("v{}", v + 1));
                    if e == 1 {
                        name
                    } else {
                        format!("{name}^{e}")
                    }
                })
                .collect();
            if factors.is_empty() {
                write!(f, "{mag:?}")?;
            } else if mag == 1.0 {
                write!(f, "{}", factors.join("*"))?;
            } else {
                write!(f, "{mag:?}*{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(n: usize, i: usize) -> Polynomial {
        Polynomial::var(n, i)
    }

    #[test]
    fn cancellation_removes_terms() {
        let p = &x(1, 0) - &x(1, 0);
        assert!(p.is_zero());
        let mut q = Polynomial::constant(2, 3.0);
        q.add_term(Monomial::one(2), -3.0);
        assert_eq!(q.num_terms(), 0);
    }

    #[test]
    fn pow_matches_repeated_multiplication() {
        let p = &(&x(2, 0) + &x(2, 1)) + &Polynomial::constant(2, 1.0);
        let cube = &(&p * &p) * &p;
        assert_eq!(p.pow(3), cube);
        assert_eq!(p.pow(0), Polynomial::constant(2, 1.0));
    }

    #[test]
    fn compose_swaps_variables() {
        let b = &x(2, 0) * &x(2, 1);
        let swapped = b.compose(&[x(2, 1), x(2, 0)]).unwrap();
        assert_eq!(swapped, b);
    }

    #[test]
    fn compose_constant_is_fixed() {
        let b = Polynomial::constant(1, 1.0);
        let f = vec![&x(2, 0) + &x(2, 1).scale(0.1)];
        let c = b.compose(&f).unwrap();
        assert_eq!(c, Polynomial::constant(2, 1.0));
    }

    #[test]
    fn compose_dimension_mismatch() {
        let b = x(2, 0);
        assert!(matches!(
            b.compose(&[x(3, 0)]),
            Err(AlgebraError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn eval_dimension_mismatch() {
        assert!(x(2, 0).eval(&[1.0]).is_err());
    }

    #[test]
    fn display_is_readable() {
        let names = vec!["x1".to_string(), "x2".to_string()];
        let p = &(&x(2, 0).pow(2) - &x(2, 1).scale(0.5)) + &Polynomial::constant(2, 2.0);
        assert_eq!(p.display(&names).to_string(), "x1^2 - 0.5*x2 + 2.0");
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let p = &x(2, 0).scale(0.1) + &x(2, 1).pow(3).scale(-1.0 / 3.0);
        let text = serde_json::to_string(&p).unwrap();
        let back: Polynomial = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<Polynomial>(r#"{"nvars":2,"terms":[[[1],1.0]]}"#).is_err());
    }
}
