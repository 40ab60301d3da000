use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

/// Exponent vector over a fixed, ordered variable list.
///
/// Ordering is graded lexicographic: lower total degree first, and within a
/// degree the monomial with the larger exponent on the earlier variable
/// comes first (`1 < x1 < x2 < x1^2 < x1*x2 < x2^2 < ...`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, index: usize) -> Self {
        let mut e = vec![0; nvars];
        e[index] = 1;
        Monomial(e)
    }

    pub fn from_exponents(exps: Vec<u32>) -> Self {
        Monomial(exps)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Degree restricted to the variables in `range`.
    pub fn degree_in(&self, range: std::ops::Range<usize>) -> u32 {
        self.0[range].iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.0.len(), other.0.len());
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Keeps the first `n` exponents.
    pub fn truncate(&self, n: usize) -> Monomial {
        Monomial(self.0[..n].to_vec())
    }

    /// Pads with zero exponents up to `nvars` variables.
    pub fn extend(&self, nvars: usize) -> Monomial {
        let mut e = self.0.clone();
        e.resize(nvars, 0);
        Monomial(e)
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(point)
            .filter(|(e, _)| **e > 0)
            .map(|(&e, &x)| x.powi(e as i32))
            .product()
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All monomials in `nvars` variables of total degree at most `max_degree`,
/// in graded lexicographic order.
pub fn monomials_up_to(nvars: usize, max_degree: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    for d in 0..=max_degree {
        let mut cur = vec![0u32; nvars];
        homogeneous(nvars, 0, d, &mut cur, &mut out);
    }
    out
}

fn homogeneous(nvars: usize, pos: usize, remaining: u32, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
    if nvars == 0 {
        if remaining == 0 {
            out.push(Monomial(Vec::new()));
        }
        return;
    }
    if pos == nvars - 1 {
        cur[pos] = remaining;
        out.push(Monomial(cur.clone()));
        cur[pos] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        cur[pos] = e;
        homogeneous(nvars, pos + 1, remaining - e, cur, out);
    }
    cur[pos] = 0;
}
