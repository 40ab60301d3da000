use rand::Rng;
use serde::{Deserialize, Serialize};

use super::polynomial::Polynomial;

/// Axis-aligned box, possibly with infinite sides.
pub type Interval = (f64, f64);

/// `{x : g_i(x) >= 0 for all i}` over the state variables.
///
/// An empty inequality list denotes the whole space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasicSet {
    pub ineqs: Vec<Polynomial>,
}

impl BasicSet {
    pub fn new(ineqs: Vec<Polynomial>) -> Self {
        BasicSet { ineqs }
    }

    pub fn whole_space() -> Self {
        BasicSet { ineqs: Vec::new() }
    }

    pub fn is_whole_space(&self) -> bool {
        self.ineqs.is_empty()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.ineqs.iter().all(|g| g.eval_unchecked(x) >= 0.0)
    }

    /// Minimum constraint value at `x` (positive inside, negative outside).
    pub fn margin(&self, x: &[f64]) -> f64 {
        self.ineqs
            .iter()
            .map(|g| g.eval_unchecked(x))
            .fold(f64::INFINITY, f64::min)
    }

    /// Outer bounding box derived by interval propagation over linear
    /// constraints and univariate quadratics. Sides that cannot be bounded
    /// stay infinite. Returns `None` if propagation proves the set empty.
    pub fn bounding_box(&self, nvars: usize) -> Option<Vec<Interval>> {
        let mut bx = vec![(f64::NEG_INFINITY, f64::INFINITY); nvars];
        for _ in 0..32 {
            let mut changed = false;
            for g in &self.ineqs {
                match tighten(g, &mut bx) {
                    Tighten::Empty => return None,
                    Tighten::Changed => changed = true,
                    Tighten::Same => {}
                }
            }
            if !changed {
                break;
            }
        }
        Some(bx)
    }
}

enum Tighten {
    Same,
    Changed,
    Empty,
}

fn set_lo(bx: &mut [Interval], i: usize, lo: f64) -> Tighten {
    if lo > bx[i].0 + 1e-12 {
        bx[i].0 = lo;
        if bx[i].0 > bx[i].1 + 1e-9 {
            return Tighten::Empty;
        }
        return Tighten::Changed;
    }
    Tighten::Same
}

fn set_hi(bx: &mut [Interval], i: usize, hi: f64) -> Tighten {
    if hi < bx[i].1 - 1e-12 {
        bx[i].1 = hi;
        if bx[i].0 > bx[i].1 + 1e-9 {
            return Tighten::Empty;
        }
        return Tighten::Changed;
    }
    Tighten::Same
}

fn merge(a: Tighten, b: Tighten) -> Tighten {
    match (a, b) {
        (Tighten::Empty, _) | (_, Tighten::Empty) => Tighten::Empty,
        (Tighten::Changed, _) | (_, Tighten::Changed) => Tighten::Changed,
        _ => Tighten::Same,
    }
}

fn tighten(g: &Polynomial, bx: &mut [Interval]) -> Tighten {
    let n = bx.len();
    let deg = g.degree();
    if deg == 0 {
        return if g.coeff(&super::Monomial::one(n)) < 0.0 { Tighten::Empty } else { Tighten::Same };
    }
    if deg == 1 {
        let mut a = vec![0.0; n];
        let mut b = 0.0;
        for (m, c) in g.terms() {
            match m.exponents().iter().position(|&e| e == 1) {
                Some(i) => a[i] = c,
                None => b = c,
            }
        }
        let mut result = Tighten::Same;
        for i in 0..n {
            if a[i] == 0.0 {
                continue;
            }
            // a_i x_i >= -b - sum_{j != i} a_j x_j >= -b - max(sum ...)
            let mut max_rest = 0.0;
            for j in 0..n {
                if j == i || a[j] == 0.0 {
                    continue;
                }
                let hi = if a[j] > 0.0 { a[j] * bx[j].1 } else { a[j] * bx[j].0 };
                max_rest += hi;
            }
            if !max_rest.is_finite() {
                continue;
            }
            let rhs = -b - max_rest;
            let r = if a[i] > 0.0 { set_lo(bx, i, rhs / a[i]) } else { set_hi(bx, i, rhs / a[i]) };
            result = merge(result, r);
            if matches!(result, Tighten::Empty) {
                return result;
            }
        }
        return result;
    }
    if deg == 2 {
        // univariate quadratic a x^2 + b x + c >= 0 with a < 0 bounds x
        let vars: Vec<usize> = (0..n)
            .filter(|&i| g.terms().any(|(m, _)| m.exponents()[i] > 0))
            .collect();
        if vars.len() == 1 {
            let i = vars[0];
            let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
            for (m, coef) in g.terms() {
                match m.exponents()[i] {
                    2 => a = coef,
                    1 => b = coef,
                    _ => c = coef,
                }
            }
            if a < 0.0 {
                let disc = b * b - 4.0 * a * c;
                if disc < 0.0 {
                    return Tighten::Empty;
                }
                let s = disc.sqrt();
                let r1 = (-b + s) / (2.0 * a);
                let r2 = (-b - s) / (2.0 * a);
                let (lo, hi) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
                return merge(set_lo(bx, i, lo), set_hi(bx, i, hi));
            }
        }
    }
    Tighten::Same
}

/// Finite union of basic semi-algebraic sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub disjuncts: Vec<BasicSet>,
    pub bounded: bool,
}

impl Region {
    pub fn new(disjuncts: Vec<BasicSet>, bounded: bool) -> Self {
        Region { disjuncts, bounded }
    }

    pub fn whole_space() -> Self {
        Region { disjuncts: vec![BasicSet::whole_space()], bounded: false }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.disjuncts.iter().any(|d| d.contains(x))
    }

    pub fn union(parts: impl IntoIterator<Item = Region>) -> Region {
        let mut disjuncts = Vec::new();
        let mut bounded = true;
        for r in parts {
            bounded &= r.bounded;
            disjuncts.extend(r.disjuncts);
        }
        Region { disjuncts, bounded }
    }

    /// Hull of the disjunct bounding boxes (empty disjuncts are skipped).
    pub fn bounding_box(&self, nvars: usize) -> Option<Vec<Interval>> {
        let mut hull: Option<Vec<Interval>> = None;
        for d in &self.disjuncts {
            if let Some(b) = d.bounding_box(nvars) {
                hull = Some(match hull {
                    None => b,
                    Some(h) => h.iter().zip(&b).map(|(x, y)| (x.0.min(y.0), x.1.max(y.1))).collect(),
                });
            }
        }
        hull
    }
}

pub fn box_is_finite(bx: &[Interval]) -> bool {
    bx.iter().all(|(lo, hi)| lo.is_finite() && hi.is_finite())
}

pub fn intersect_boxes(a: &[Interval], b: &[Interval]) -> Vec<Interval> {
    a.iter().zip(b).map(|(x, y)| (x.0.max(y.0), x.1.min(y.1))).collect()
}

pub fn sample_box<R: Rng + ?Sized>(bx: &[Interval], rng: &mut R) -> Vec<f64> {
    bx.iter().map(|(lo, hi)| lo + (hi - lo) * rng.random::<f64>()).collect()
}

/// Draws up to `count` points uniformly from `set ∩ bx` by rejection.
/// Gives up after `count * max_tries_factor` proposals.
pub fn rejection_sample<R: Rng + ?Sized>(
    set: &BasicSet,
    extra: Option<&BasicSet>,
    bx: &[Interval],
    count: usize,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    let max_tries = count.saturating_mul(200).max(10_000);
    let mut tries = 0;
    while out.len() < count && tries < max_tries {
        tries += 1;
        let x = sample_box(bx, rng);
        if set.contains(&x) && extra.map(|e| e.contains(&x)).unwrap_or(true) {
            out.push(x);
        }
    }
    out
}

/// Labeling function `L : X -> Π`, realised as an ordered list of regions
/// each mapped to one proposition, plus an optional label for the complement.
#[derive(Debug, Clone)]
pub struct Labeling {
    pub entries: Vec<LabeledRegion>,
    pub default: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct LabeledRegion {
    pub name: String,
    pub region: Region,
    pub prop: usize,
}

impl Labeling {
    /// Proposition of the first region containing `x`, else the default.
    pub fn label(&self, x: &[f64]) -> Option<usize> {
        self.entries
            .iter()
            .find(|e| e.region.contains(x))
            .map(|e| e.prop)
            .or(self.default)
    }

    /// `L^{-1}(letters)`; `None` when a letter is only covered by the
    /// complement label, which has no semi-algebraic description.
    pub fn preimage(&self, letters: &[usize]) -> Option<Region> {
        let mut parts = Vec::new();
        for &p in letters {
            let mine: Vec<&LabeledRegion> = self.entries.iter().filter(|e| e.prop == p).collect();
            if mine.is_empty() || self.default == Some(p) {
                return None;
            }
            parts.extend(mine.into_iter().map(|e| e.region.clone()));
        }
        Some(Region::union(parts))
    }
}
