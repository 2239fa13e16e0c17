//! Least-squares fitting with classical and heteroskedasticity-robust
//! standard errors, plus the machinery to study them by simulation.
//!
//! - [`model`]: datasets and OLS via pivoted QR
//! - [`variance`]: classical and HC0-HC3 covariance, closed forms for a
//!   binary predictor, asymptotic limits
//! - [`distributions`]: disturbance families and splittable random streams
//! - [`montecarlo`]: grouped-disturbance data generation and replicated runs
//! - [`density`]: Gaussian KDE of sampling distributions
//! - [`diagnostics`]: bootstrap information-matrix test, normal Q-Q data,
//!   difference in medians

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod density;
pub mod diagnostics;
pub mod distributions;
pub mod error;
pub mod linalg;
pub mod model;
pub mod montecarlo;
pub mod parallel;
pub mod variance;

pub use density::{kde, DensityCurve};
pub use diagnostics::{diff_in_medians, im_test, qq_normal, ImComponents, ImTestResult, QqData};
pub use distributions::{derive_stream, sample, DisturbanceSpec, Family, RngStream};
pub use error::{Error, Result};
pub use linalg::Matrix;
pub use model::{group_means, ols_fit, validate_dataset, Dataset, FitResult};
pub use montecarlo::{
    generate_dataset, run_simulation, DgpSpec, EstimatorSummary, SimulationOptions,
    SimulationOutput, SimulationSummary,
};
pub use variance::{
    asymptotic_limits, binary_true_se, classical_cov, divergence_ratio, hc_cov, CovEstimate,
    Estimator, HcVariant, LimitPair,
};
