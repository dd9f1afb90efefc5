//! Monte-Carlo analysis on the group: degree projections, norms under μ/γ/ν, convolution forms,
//! noise pairings, cap measures and the coupling moment checks.

mod basis;
mod cap;
mod claims;
mod estimate;
mod functional;

pub use basis::{fit_basis_with, fit_empirical_basis, project_low_degree_norm, EmpiricalBasis, FeatureFamily, Target, RELATIVE_CUTOFF, SAMPLES_PER_MONOMIAL};
pub use cap::{cap_measure, cap_threshold, IndicatorSpec, Predicate, Sense};
pub use claims::{
    comf_projection_factor, comf_projection_mc, epsilon_ell, gmd_moment, lambda_s_regression, off_diagonal_count, off_diagonal_pairing, BoundedEstimate,
    ComfProjection, LambdaRegression,
};
pub use estimate::{mc_mean, mc_means, monte_carlo, EstimateRecord, EstimateWithCI, Mergeable, Moments, CHUNK, Z_BAND};
pub(crate) use functional::ErrSlot;
pub use functional::{
    conv_sq_norm, convolution_form, noise_pairing, noise_pairing_with_floor, norm_under, product_hit_rate, ConvSquareNorm, Distribution, NoisePairing,
    CONVOLUTION_FLOOR, CONV_SQ_FLOOR,
};
