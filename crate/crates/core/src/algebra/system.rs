use rand::Rng;
use serde::{Deserialize, Serialize};

use super::noise::NoiseModel;
use super::polynomial::Polynomial;
use super::AlgebraError;

/// `x(k+1) = f(x(k), w(k))` with polynomial `f` and i.i.d. noise `w`.
///
/// Update maps are polynomials over `n + m` variables: the state variables
/// first, then the noise variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StochasticSystem {
    pub state_names: Vec<String>,
    pub noise_names: Vec<String>,
    pub dynamics: Vec<Polynomial>,
    pub noise: NoiseModel,
}

impl StochasticSystem {
    pub fn new(
        state_names: Vec<String>,
        noise_names: Vec<String>,
        dynamics: Vec<Polynomial>,
        noise: NoiseModel,
    ) -> Result<Self, AlgebraError> {
        let n = state_names.len();
        let m = noise_names.len();
        if dynamics.len() != n {
            return Err(AlgebraError::DimensionMismatch { expected: n, found: dynamics.len() });
        }
        if noise.dim() != m {
            return Err(AlgebraError::DimensionMismatch { expected: m, found: noise.dim() });
        }
        if let Some(bad) = dynamics.iter().find(|f| f.nvars() != n + m) {
            return Err(AlgebraError::DimensionMismatch { expected: n + m, found: bad.nvars() });
        }
        Ok(StochasticSystem { state_names, noise_names, dynamics, noise })
    }

    pub fn state_dim(&self) -> usize {
        self.state_names.len()
    }

    pub fn noise_dim(&self) -> usize {
        self.noise_names.len()
    }

    /// State names followed by noise names.
    pub fn all_names(&self) -> Vec<String> {
        self.state_names.iter().chain(&self.noise_names).cloned().collect()
    }

    /// `E[B(f(x, w)) | x]` for a polynomial `B` over the state variables.
    pub fn expected_next(&self, b: &Polynomial) -> Result<Polynomial, AlgebraError> {
        let composed = b.compose(&self.dynamics)?;
        composed.expect_noise(&self.noise)
    }

    /// One deterministic step for a given noise realisation.
    pub fn step_with(&self, x: &[f64], w: &[f64]) -> Vec<f64> {
        let mut point = Vec::with_capacity(x.len() + w.len());
        point.extend_from_slice(x);
        point.extend_from_slice(w);
        self.dynamics.iter().map(|f| f.eval_unchecked(&point)).collect()
    }

    pub fn step<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R) -> Result<Vec<f64>, AlgebraError> {
        let mut w = vec![0.0; self.noise_dim()];
        self.noise.sample_into(rng, &mut w)?;
        Ok(self.step_with(x, &w))
    }
}
