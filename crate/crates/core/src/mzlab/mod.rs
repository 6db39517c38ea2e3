//! Experiments: Marcinkiewicz–Zygmund norm equivalences, the oscillation
//! inequality, the sampling/reconstruction operators U_N and T,
//! approximation rates of delayed means, and bump-function fixtures.

mod bumps;
mod factorization;
mod mz;
mod norms;
mod oscillation;
mod rate;

pub use bumps::{bump_fixture, bump_profile, Bump, BumpDiagnostics, BumpFixture};
pub use factorization::{identity_error, operator_norm_ratios, t_operator, un_operator, OperatorNormRow};
pub use mz::{discrete_norm, discrete_norm_values, mz_bands, mz_report, MzOptions, RatioBand};
pub use norms::{
    continuous_norm, continuous_norm_with, mc_norm, random_poly, sup_estimate, NormEstimate, NormMethod,
    NormOptions,
};
pub use oscillation::{
    oscillation_check, oscillation_check_with, oscillation_lhs, OscillationOptions, OscillationReport,
    OscillationTrial,
};
pub use rate::{approx_rate, RateFit};
