//! Grouped-disturbance data generation and replicated fit-and-estimate runs.
//!
//! The design is held fixed across replicates: rows `0..m` have `X = 1` and
//! disturbances from `dist1`, rows `m..n` have `X = 0` and disturbances from
//! `dist0`. Replicate `k` draws from stream `k` of the master seed.

use serde::{Deserialize, Serialize};

use crate::density::{kde, DensityCurve};
use crate::distributions::{derive_stream, DisturbanceSpec, RngStream};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::{ols_fit, Dataset};
use crate::parallel::map_indexed;
use crate::variance::{asymptotic_limits, binary_true_se, estimate, Estimator, LimitPair};

/// Normal critical value used for the nominal 95% intervals.
pub const CRITICAL_VALUE: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DgpSpec {
    pub n: usize,
    /// Size of the `X = 1` group.
    pub m: usize,
    pub beta0: f64,
    pub beta1: f64,
    pub dist0: DisturbanceSpec,
    pub dist1: DisturbanceSpec,
}

impl DgpSpec {
    pub fn new(
        n: usize,
        m: usize,
        beta0: f64,
        beta1: f64,
        dist0: DisturbanceSpec,
        dist1: DisturbanceSpec,
    ) -> Result<Self> {
        let spec = DgpSpec {
            n,
            m,
            beta0,
            beta1,
            dist0,
            dist1,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `n = 1000`, `m = 200`, zero coefficients, Laplace(0, 1) disturbances
    /// when `X = 0` and Laplace(0, 2) when `X = 1`.
    pub fn two_group_laplace() -> Self {
        DgpSpec {
            n: 1000,
            m: 200,
            beta0: 0.0,
            beta1: 0.0,
            dist0: DisturbanceSpec::laplace(0.0, 1.0).expect("valid"),
            dist1: DisturbanceSpec::laplace(0.0, 2.0).expect("valid"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.m >= self.n {
            return Err(Error::BadGroupSizes {
                m: self.m,
                n: self.n,
            });
        }
        if !(self.beta0.is_finite() && self.beta1.is_finite()) {
            return Err(Error::InvalidInput("coefficients must be finite".into()));
        }
        self.dist0.validate()?;
        self.dist1.validate()
    }

    pub fn mu(&self) -> f64 {
        self.m as f64 / self.n as f64
    }

    /// Exact standard error of the slope under this design.
    pub fn true_se(&self) -> Result<f64> {
        binary_true_se(self.dist0.variance(), self.dist1.variance(), self.m, self.n)
    }

    /// Scaled asymptotic limits at `mu = m/n`.
    pub fn limits(&self) -> Result<LimitPair> {
        asymptotic_limits(self.mu(), self.dist0.variance(), self.dist1.variance())
    }

    fn design(&self) -> Matrix {
        let x: Vec<f64> = (0..self.n)
            .map(|i| if i < self.m { 1.0 } else { 0.0 })
            .collect();
        Matrix::from_columns(&[vec![1.0; self.n], x])
    }
}

/// One dataset from `spec`, consuming draws from `stream` in row order.
pub fn generate_dataset(spec: &DgpSpec, stream: &mut RngStream) -> Result<Dataset> {
    spec.validate()?;
    let y = outcomes(spec, stream);
    Dataset::new(y, spec.design(), Some(1))
}

fn outcomes(spec: &DgpSpec, stream: &mut RngStream) -> Vec<f64> {
    (0..spec.n)
        .map(|i| {
            if i < spec.m {
                spec.beta0 + spec.beta1 + spec.dist1.draw(stream)
            } else {
                spec.beta0 + spec.dist0.draw(stream)
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct SimulationOptions {
    pub replicates: usize,
    pub estimators: Vec<Estimator>,
    pub master_seed: u64,
    /// Emit a density curve per estimator.
    pub kde: bool,
    /// Fixed KDE bandwidth; Silverman's rule when `None`.
    pub bandwidth: Option<f64>,
    pub workers: Option<usize>,
    /// Divide the classical RSS by `n - p` instead of `n`.
    pub classical_dof: bool,
    /// Keep every replicate's standard error in the summary.
    pub keep_samples: bool,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        SimulationOptions {
            replicates: 25_000,
            estimators: vec![Estimator::Classical, Estimator::HC0],
            master_seed: 1,
            kde: false,
            bandwidth: None,
            workers: None,
            classical_dof: false,
            keep_samples: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorSummary {
    pub estimator: Estimator,
    pub mean_se: f64,
    /// `None` with a single replicate.
    pub sd_se: Option<f64>,
    /// Fraction of replicates with `|b1_hat - b1| <= 1.96 se`.
    pub coverage: f64,
    /// Large-sample standard error this estimator converges to at `n`.
    pub asymptotic_se: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub replicates: usize,
    pub master_seed: u64,
    pub spec: DgpSpec,
    pub estimators: Vec<EstimatorSummary>,
    pub true_se: f64,
    pub limits: Option<LimitPair>,
    pub beta1_mean: f64,
    pub beta1_sd: Option<f64>,
}

impl SimulationSummary {
    pub fn get(&self, estimator: Estimator) -> Option<&EstimatorSummary> {
        self.estimators.iter().find(|e| e.estimator == estimator)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutput {
    pub summary: SimulationSummary,
    /// One curve per estimator whose standard errors have nonzero spread;
    /// empty unless requested or with fewer than two replicates.
    pub densities: Vec<(Estimator, DensityCurve)>,
}

struct Replicate {
    beta1: f64,
    ses: Vec<f64>,
}

fn mean_sd(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = (values.len() > 1)
        .then(|| (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
    (mean, sd)
}

/// Replicates `generate -> fit -> standard errors` and summarizes the slope's
/// standard-error sampling distributions. Output depends only on the spec and
/// options, never on `workers`.
pub fn run_simulation(spec: &DgpSpec, opts: &SimulationOptions) -> Result<SimulationOutput> {
    spec.validate()?;
    if opts.replicates == 0 {
        return Err(Error::InvalidInput("replicates must be at least 1".into()));
    }
    if opts.estimators.is_empty() {
        return Err(Error::InvalidInput("no estimators requested".into()));
    }
    let design = spec.design();
    // Built once; each replicate swaps in its own outcome.
    let template = Dataset::new(vec![0.0; spec.n], design, Some(1))?;

    let reps = map_indexed(opts.replicates, opts.workers, |k| {
        let mut stream = derive_stream(opts.master_seed, k as u64);
        let d = template.with_outcome(outcomes(spec, &mut stream))?;
        let fit = ols_fit(&d)?;
        let ses = opts
            .estimators
            .iter()
            .map(|&e| estimate(&fit, e, opts.classical_dof).map(|c| c.se(1)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Replicate {
            beta1: fit.beta[1],
            ses,
        })
    })?;

    let betas: Vec<f64> = reps.iter().map(|r| r.beta1).collect();
    let (beta1_mean, beta1_sd) = mean_sd(&betas);
    let limits = spec.limits().ok();
    let scaled = limits.map(|l| l.at_sample_size(spec.n));

    let mut estimators = Vec::with_capacity(opts.estimators.len());
    let mut densities = Vec::new();
    for (j, &est) in opts.estimators.iter().enumerate() {
        let ses: Vec<f64> = reps.iter().map(|r| r.ses[j]).collect();
        let (mean_se, sd_se) = mean_sd(&ses);
        let covered = reps
            .iter()
            .filter(|r| (r.beta1 - spec.beta1).abs() <= CRITICAL_VALUE * r.ses[j])
            .count();
        if opts.kde && ses.len() >= 2 {
            match kde(&ses, opts.bandwidth) {
                Ok(curve) => densities.push((est, curve)),
                Err(Error::DegenerateSample(_)) => {}
                Err(e) => return Err(e),
            }
        }
        estimators.push(EstimatorSummary {
            estimator: est,
            mean_se,
            sd_se,
            coverage: covered as f64 / opts.replicates as f64,
            asymptotic_se: scaled.map(|l| {
                if est.is_robust() {
                    l.robust_limit
                } else {
                    l.classical_limit
                }
            }),
            samples: opts.keep_samples.then_some(ses),
        });
    }

    Ok(SimulationOutput {
        summary: SimulationSummary {
            replicates: opts.replicates,
            master_seed: opts.master_seed,
            spec: *spec,
            estimators,
            true_se: spec.true_se()?,
            limits,
            beta1_mean,
            beta1_sd,
        },
        densities,
    })
}
