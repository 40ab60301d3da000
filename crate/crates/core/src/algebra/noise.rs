use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::AlgebraError;

/// Distribution of one noise dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum NoiseDist {
    Normal { mean: f64, std: f64 },
    Uniform { low: f64, high: f64 },
    Point { value: f64 },
    /// Raw moments `E[w^0], E[w^1], ...`; expectation only, cannot be sampled.
    Moments { moments: Vec<f64> },
}

impl NoiseDist {
    pub fn standard_normal() -> Self {
        NoiseDist::Normal { mean: 0.0, std: 1.0 }
    }

    /// Raw moment `E[w^k]`.
    pub fn moment(&self, k: u32) -> Option<f64> {
        match *self {
            NoiseDist::Normal { mean, std } => {
                // E[(mean + std Z)^k] = sum_j C(k,j) mean^(k-j) std^j E[Z^j]
                let mut total = 0.0;
                let mut binom = 1.0;
                for j in 0..=k {
                    if j > 0 {
                        binom = binom * f64::from(k - j + 1) / f64::from(j);
                    }
                    let z = standard_normal_moment(j);
                    if z != 0.0 {
                        total += binom * mean.powi((k - j) as i32) * std.powi(j as i32) * z;
                    }
                }
                Some(total)
            }
            NoiseDist::Uniform { low, high } => {
                if k == 0 {
                    return Some(1.0);
                }
                if high == low {
                    return Some(low.powi(k as i32));
                }
                let kp = f64::from(k + 1);
                Some((high.powi(k as i32 + 1) - low.powi(k as i32 + 1)) / (kp * (high - low)))
            }
            NoiseDist::Point { value } => Some(value.powi(k as i32)),
            NoiseDist::Moments { ref moments } => moments.get(k as usize).copied(),
        }
    }

    pub fn can_sample(&self) -> bool {
        !matches!(self, NoiseDist::Moments { .. })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<f64> {
        match *self {
            NoiseDist::Normal { mean, std } => {
                let z: f64 = StandardNormal.sample(rng);
                Some(mean + std * z)
            }
            NoiseDist::Uniform { low, high } => Some(low + (high - low) * rng.random::<f64>()),
            NoiseDist::Point { value } => Some(value),
            NoiseDist::Moments { .. } => None,
        }
    }

    fn validate(&self, dim: usize) -> Result<(), AlgebraError> {
        let bad = |reason: &str| AlgebraError::InvalidNoise { dim, reason: reason.to_string() };
        match *self {
            NoiseDist::Normal { std, .. } if !(std >= 0.0) => Err(bad("std must be non-negative")),
            NoiseDist::Uniform { low, high } if !(low <= high) => Err(bad("uniform requires low <= high")),
            NoiseDist::Moments { ref moments } => {
                if moments.first().map(|m| (m - 1.0).abs() > 1e-12).unwrap_or(true) {
                    return Err(bad("moment list must start with m(0) = 1"));
                }
                if moments.iter().step_by(2).any(|m| *m < 0.0) {
                    return Err(bad("even-order moments must be non-negative"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// `E[Z^k]` for a standard normal `Z`: zero for odd `k`, `(k-1)!!` for even.
pub fn standard_normal_moment(k: u32) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    let mut acc = 1.0;
    let mut j = k as i64 - 1;
    while j > 1 {
        acc *= j as f64;
        j -= 2;
    }
    acc
}

/// Independent noise dimensions, i.i.d. across time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NoiseModel {
    dims: Vec<NoiseDist>,
}

impl NoiseModel {
    pub fn new(dims: Vec<NoiseDist>) -> Result<Self, AlgebraError> {
        for (j, d) in dims.iter().enumerate() {
            d.validate(j)?;
        }
        Ok(NoiseModel { dims })
    }

    pub fn standard_normal(m: usize) -> Self {
        NoiseModel { dims: vec![NoiseDist::standard_normal(); m] }
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn dists(&self) -> &[NoiseDist] {
        &self.dims
    }

    pub fn moment(&self, j: usize, k: u32) -> Result<f64, AlgebraError> {
        self.dims
            .get(j)
            .and_then(|d| d.moment(k))
            .ok_or(AlgebraError::MissingMoment { dim: j, order: k })
    }

    pub fn can_sample(&self) -> bool {
        self.dims.iter().all(NoiseDist::can_sample)
    }

    /// Fills `out` with one draw per dimension.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) -> Result<(), AlgebraError> {
        for (j, (d, slot)) in self.dims.iter().zip(out.iter_mut()).enumerate() {
            *slot = d.sample(rng).ok_or(AlgebraError::NotSampleable { dim: j })?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_normal_moments() {
        let expected = [1.0, 0.0, 1.0, 0.0, 3.0, 0.0, 15.0, 0.0, 105.0];
        for (k, e) in expected.iter().enumerate() {
            assert_eq!(standard_normal_moment(k as u32), *e);
        }
    }

    #[test]
    fn shifted_normal_moments() {
        let d = NoiseDist::Normal { mean: 2.0, std: 3.0 };
        assert_eq!(d.moment(1), Some(2.0));
        assert!((d.moment(2).unwrap() - 13.0).abs() < 1e-12);
        // E[X^3] = mu^3 + 3 mu sigma^2
        assert!((d.moment(3).unwrap() - (8.0 + 54.0)).abs() < 1e-12);
    }

    #[test]
    fn uniform_moments() {
        let d = NoiseDist::Uniform { low: -1.0, high: 1.0 };
        assert_eq!(d.moment(0), Some(1.0));
        assert!(d.moment(1).unwrap().abs() < 1e-15);
        assert!((d.moment(2).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn moment_list_validation() {
        assert!(NoiseModel::new(vec![NoiseDist::Moments { moments: vec![1.0, 0.0, 1.0] }]).is_ok());
        assert!(NoiseModel::new(vec![NoiseDist::Moments { moments: vec![0.5] }]).is_err());
        assert!(NoiseModel::new(vec![NoiseDist::Moments { moments: vec![1.0, 0.0, -1.0] }]).is_err());
        let nm = NoiseModel::new(vec![NoiseDist::Moments { moments: vec![1.0, 0.0, 1.0] }]).unwrap();
        assert!(matches!(nm.moment(0, 3), Err(AlgebraError::MissingMoment { dim: 0, order: 3 })));
        assert!(!nm.can_sample());
    }
}
