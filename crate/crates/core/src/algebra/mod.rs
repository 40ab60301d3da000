//! Sparse multivariate polynomials, semi-algebraic regions, noise moments and
//! the one-step expectation operator `E[B(f(x, w)) | x]`.

mod monomial;
mod noise;
mod parse;
mod polynomial;
mod region;
mod system;

use thiserror::Error;

pub use monomial::{monomials_up_to, Monomial};
pub use noise::{standard_normal_moment, NoiseDist, NoiseModel};
pub use parse::{parse_inequality, parse_poly};
pub use polynomial::{PolyDisplay, Polynomial};
pub use region::{
    box_is_finite, intersect_boxes, rejection_sample, sample_box, BasicSet, Interval, LabeledRegion, Labeling,
    Region,
};
pub use system::StochasticSystem;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebraError {
    #[error("syntax error at column {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("unknown variable '{name}' at column {pos}")]
    UnknownVariable { name: String, pos: usize },
    #[error("negative exponent at column {pos}")]
    NegativeExponent { pos: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("noise dimension {dim} has no moment of order {order}")]
    MissingMoment { dim: usize, order: u32 },
    #[error("noise dimension {dim} cannot be sampled (moments only)")]
    NotSampleable { dim: usize },
    #[error("invalid noise model for dimension {dim}: {reason}")]
    InvalidNoise { dim: usize, reason: String },
}
