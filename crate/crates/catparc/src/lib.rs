//! CATParc: partial-correlation inference for multivariate categorical
//! sequence data.
//!
//! The pipeline one-hot encodes a multiple sequence alignment, removes the
//! influence of all other positions from each position pair by multivariate
//! group-lasso regression, and tests the residual cross-correlation with a
//! modified Wilks-lambda statistic against chi-squared or weighted
//! chi-squared references. Amino-acid-level statistics, MI/PSICOV/l2/linf
//! baselines, simulation and benchmark harnesses, and mutation-effect
//! features build on the same residuals.
//!
//! All numerics are generic over the scalar type through [`scalar::Scalar`]
//! (`f32` or `f64`); the aliases below fix `f64` for ordinary use.

pub mod align;
pub mod aa_level;
pub mod baselines;
pub mod bench;
pub mod dist;
pub mod error;
pub mod features;
pub mod group_lasso;
pub mod io;
pub mod linalg;
pub mod pairwise;
pub mod scalar;
pub mod simulate;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Default-precision aliases for the main pipeline types.
pub type EncodedMatrix = align::EncodedMatrix<f64>;
pub type GroupPenaltySpec = group_lasso::GroupPenaltySpec<f64>;
pub type FitResult = group_lasso::FitResult<f64>;
pub type TestOptions = pairwise::TestOptions<f64>;
pub type ResidualCache = pairwise::ResidualCache<f64>;
pub type PairResult = pairwise::PairResult<f64>;
pub type PairSweep = pairwise::PairSweep<f64>;
pub type WeightedChiSq = dist::WeightedChiSq<f64>;
pub type AAPairMatrix = aa_level::AAPairMatrix<f64>;
pub type AAGroupStrength = aa_level::AAGroupStrength<f64>;
pub type PrecisionEstimate = baselines::PrecisionEstimate<f64>;
pub type PartialCovMap = features::PartialCovMap<f64>;
pub type FeatureRow = features::FeatureRow<f64>;
pub type SequenceScores = features::SequenceScores<f64>;
