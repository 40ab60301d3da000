//! Trace simulation and exact binomial confidence intervals.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};
use thiserror::Error;

use crate::algebra::{box_is_finite, sample_box, AlgebraError, Interval, Labeling, Region, StochasticSystem};
use crate::engine::Specification;

pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha), stream = realization index";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("state {state:?} at step {step} has no label and no default label is configured")]
    Unlabeled { step: usize, state: Vec<f64> },
    #[error("initial region has no finite bounding box to sample from")]
    UnboundedInitial,
    #[error("could not draw an initial state inside the initial region")]
    EmptyInitial,
    #[error("invalid simulation settings: {0}")]
    Invalid(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum InitialSampler {
    Point { state: Vec<f64> },
    /// Uniform over the region, by rejection from its bounding box.
    Uniform { region: Region },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub horizon: usize,
    pub realizations: usize,
    pub seed: u64,
    pub initial: InitialSampler,
    pub confidence: f64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.horizon == 0 {
            return Err(SimError::Invalid("horizon must be at least 1".into()));
        }
        if self.realizations == 0 {
            return Err(SimError::Invalid("at least one realization is required".into()));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(SimError::Invalid(format!("confidence {} not in (0, 1)", self.confidence)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub states: Vec<Vec<f64>>,
    pub letters: Vec<usize>,
}

/// `N` states starting at `x0` and their labels.
pub fn simulate_trace<R: rand::Rng>(
    sys: &StochasticSystem,
    labeling: &Labeling,
    x0: &[f64],
    n: usize,
    rng: &mut R,
) -> Result<Trace, SimError> {
    let mut states = Vec::with_capacity(n);
    let mut letters = Vec::with_capacity(n);
    let mut x = x0.to_vec();
    for k in 0..n {
        let l = labeling.label(&x).ok_or_else(|| SimError::Unlabeled { step: k, state: x.clone() })?;
        letters.push(l);
        if k + 1 < n {
            let next = sys.step(&x, rng)?;
            states.push(std::mem::replace(&mut x, next));
        }
    }
    states.push(x);
    Ok(Trace { states, letters })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub successes: usize,
    pub trials: usize,
    pub confidence: f64,
    pub lower: f64,
    pub upper: f64,
    pub rng: String,
    pub seed: u64,
}

impl Estimate {
    pub fn rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

/// Uniform sampler over a union of basic sets: propose from the disjunct
/// bounding boxes in proportion to their volume, accept points inside the
/// region with probability one over the number of boxes covering them.
struct InitialDraw {
    region: Region,
    boxes: Vec<Vec<Interval>>,
    cumulative: Vec<f64>,
}

impl InitialDraw {
    fn new(region: &Region, n: usize) -> Result<Self, SimError> {
        let mut boxes = Vec::new();
        let mut cumulative = Vec::new();
        let mut total = 0.0;
        for d in &region.disjuncts {
            let Some(bx) = d.bounding_box(n) else { continue };
            if !box_is_finite(&bx) {
                return Err(SimError::UnboundedInitial);
            }
            let vol: f64 = bx.iter().map(|(lo, hi)| (hi - lo).max(0.0)).product();
            total += vol;
            boxes.push(bx);
            cumulative.push(total);
        }
        if boxes.is_empty() || total <= 0.0 {
            return Err(SimError::EmptyInitial);
        }
        Ok(InitialDraw { region: region.clone(), boxes, cumulative })
    }

    fn draw<R: rand::Rng>(&self, rng: &mut R) -> Result<Vec<f64>, SimError> {
        let total = *self.cumulative.last().expect("non-empty");
        for _ in 0..1_000_000 {
            let u = rng.random::<f64>() * total;
            let i = self.cumulative.partition_point(|&c| c <= u).min(self.boxes.len() - 1);
            let x = sample_box(&self.boxes[i], rng);
            if !self.region.contains(&x) {
                continue;
            }
            let cover = self
                .boxes
                .iter()
                .filter(|b| b.iter().zip(&x).all(|((lo, hi), v)| lo <= v && v <= hi))
                .count();
            if cover <= 1 || rng.random::<f64>() * (cover as f64) < 1.0 {
                return Ok(x);
            }
        }
        Err(SimError::EmptyInitial)
    }
}

/// Counts traces satisfying `spec`. Realization `i` uses its own ChaCha8
/// stream `i` under `cfg.seed`, so results do not depend on thread count.
pub fn estimate(
    sys: &StochasticSystem,
    labeling: &Labeling,
    spec: &Specification,
    cfg: &SimConfig,
) -> Result<Estimate, SimError> {
    cfg.validate()?;
    let n = sys.state_dim();
    let draw = match &cfg.initial {
        InitialSampler::Point { state } => {
            if state.len() != n {
                return Err(SimError::Invalid(format!("initial state has {} entries, expected {n}", state.len())));
            }
            None
        }
        InitialSampler::Uniform { region } => Some(InitialDraw::new(region, n)?),
    };
    let outcomes: Result<Vec<bool>, SimError> = (0..cfg.realizations)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            let x0 = match (&draw, &cfg.initial) {
                (Some(d), _) => d.draw(&mut rng)?,
                (None, InitialSampler::Point { state }) => state.clone(),
                (None, InitialSampler::Uniform { .. }) => unreachable!("sampler built above"),
            };
            let trace = simulate_trace(sys, labeling, &x0, cfg.horizon, &mut rng)?;
            Ok(spec.satisfied_by(&trace.letters))
        })
        .collect();
    let successes = outcomes?.into_iter().filter(|&s| s).count();
    let (lower, upper) = clopper_pearson(successes, cfg.realizations, cfg.confidence);
    Ok(Estimate {
        successes,
        trials: cfg.realizations,
        confidence: cfg.confidence,
        lower,
        upper,
        rng: RNG_ALGORITHM.to_string(),
        seed: cfg.seed,
    })
}

/// Exact binomial interval at level `confidence`. Equal tails of
/// `alpha / 2` in the interior; when `k = 0` or `k = n` the single open
/// side takes the whole `alpha`.
pub fn clopper_pearson(k: usize, n: usize, confidence: f64) -> (f64, f64) {
    assert!(n > 0 && k <= n, "need 0 <= k <= n, n > 0");
    let alpha = 1.0 - confidence;
    let nf = n as f64;
    if k == 0 {
        return (0.0, 1.0 - alpha.powf(1.0 / nf));
    }
    if k == n {
        return (alpha.powf(1.0 / nf), 1.0);
    }
    let kf = k as f64;
    let lo = Beta::new(kf, nf - kf + 1.0).expect("positive shape").inverse_cdf(alpha / 2.0);
    let hi = Beta::new(kf + 1.0, nf - kf).expect("positive shape").inverse_cdf(1.0 - alpha / 2.0);
    (lo, hi)
}
