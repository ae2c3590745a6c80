//! Numerical tools for learning the weights of mixed unitary channels.
//!
//! A channel `Λ(ρ) = Σ_a θ_a U_a ρ U_a†` is probed with a state, measured
//! with the pretty good measurement of its unitary orbit, and `θ` is
//! recovered by inverting the overlap matrix of that measurement. The crate
//! also computes classical Fisher matrices of such protocols (single use and
//! concatenated) and audits them against trace bounds.

pub mod channel;
pub mod error;
pub mod estimator;
pub mod fisher;
pub mod harness;
pub mod linalg;
pub mod povm;
pub mod record;
pub mod seed;

pub use channel::{MixedUnitaryChannel, ProbabilityVector};
pub use error::{Error, Result};
pub use estimator::{EstimateResult, EstimatorOptions, PgmEstimator, SamplingPath};
pub use fisher::{fisher_concat, fisher_matrix, FisherMatrix};
pub use linalg::{DensityOperator, PureState, UnitaryMatrix};
pub use povm::{overlap_matrix, pgm, Ensemble, OverlapMatrix, Povm};
