use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use sandwich_lab::variance::estimate;
use sandwich_lab::{divergence_ratio, ols_fit, Estimator, ImTestResult};

use crate::error::CliResult;
use crate::table::Loaded;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub file: String,
    pub n: usize,
    pub p: usize,
    /// Size of the `X = 1` group when a binary predictor is present.
    pub m: Option<usize>,
    pub intercept: bool,
    pub binary_column: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    /// Keyed by estimator name: `classical`, `hc0`, ...
    pub standard_errors: BTreeMap<String, f64>,
    /// `robust / classical` per robust estimator; null when the classical
    /// standard error is zero.
    pub divergence_ratio: BTreeMap<String, Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub dataset: Provenance,
    /// Classical variance divides the RSS by `n - p` rather than `n`.
    pub classical_dof: bool,
    pub estimators: Vec<Estimator>,
    pub coefficients: Vec<Coefficient>,
    pub imtest: Option<ImTestResult>,
    pub qq_path: Option<String>,
}

/// Fits OLS and collects classical plus the requested robust standard
/// errors. HC0 is always included.
pub fn build_fit_report(
    loaded: &Loaded,
    robust: &[Estimator],
    classical_dof: bool,
) -> CliResult<FitReport> {
    let d = &loaded.dataset;
    let fit = ols_fit(d)?;
    let mut estimators = vec![Estimator::Classical, Estimator::HC0];
    for &e in robust {
        if !estimators.contains(&e) {
            estimators.push(e);
        }
    }
    estimators.sort();
    let ses = estimators
        .iter()
        .map(|&e| estimate(&fit, e, classical_dof).map(|c| c.standard_errors()))
        .collect::<sandwich_lab::Result<Vec<_>>>()?;

    let coefficients = (0..d.p())
        .map(|j| {
            let classical = ses[0][j];
            let mut standard_errors = BTreeMap::new();
            let mut ratio = BTreeMap::new();
            for (e, se) in estimators.iter().zip(&ses) {
                standard_errors.insert(e.name().to_owned(), se[j]);
                if e.is_robust() {
                    ratio.insert(e.name().to_owned(), divergence_ratio(se[j], classical).ok());
                }
            }
            Coefficient {
                name: loaded.coefficient_names[j].clone(),
                estimate: fit.beta[j],
                standard_errors,
                divergence_ratio: ratio,
            }
        })
        .collect();

    Ok(FitReport {
        dataset: Provenance {
            file: loaded.source.clone(),
            n: d.n(),
            p: d.p(),
            m: d.treated(),
            intercept: loaded.intercept,
            binary_column: loaded.binary_name.clone(),
        },
        classical_dof,
        estimators,
        coefficients,
        imtest: None,
        qq_path: None,
    })
}

pub fn render_imtest(out: &mut String, r: &ImTestResult) {
    let c = &r.components;
    let _ = writeln!(
        out,
        "information matrix test (parametric bootstrap, B = {})",
        r.bootstrap_replicates
    );
    let _ = writeln!(out, "  statistic           {:.6}", r.statistic);
    let _ = writeln!(out, "    heteroskedasticity {:.6}", c.heteroskedasticity);
    let _ = writeln!(out, "    skewness           {:.6}", c.skewness);
    let _ = writeln!(out, "    kurtosis           {:.6}", c.kurtosis);
    let _ = writeln!(out, "  bootstrap p-value   {:.4}", r.bootstrap_p);
}

impl FitReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let d = &self.dataset;
        let _ = write!(out, "data: {} (n = {}, p = {}", d.file, d.n, d.p);
        if let (Some(m), Some(b)) = (d.m, &d.binary_column) {
            let _ = write!(out, ", m = {m} with {b} = 1");
        }
        let _ = writeln!(out, ")");
        let _ = writeln!(
            out,
            "classical variance uses RSS / {}\n",
            if self.classical_dof { "(n - p)" } else { "n" }
        );

        let width = self
            .coefficients
            .iter()
            .map(|c| c.name.len())
            .max()
            .unwrap_or(0)
            .max(11);
        let _ = write!(out, "{:<width$} {:>13}", "coefficient", "estimate");
        for e in &self.estimators {
            let _ = write!(out, " {:>12}", e.name());
        }
        let _ = writeln!(out, " {:>10}", "hc0/class.");
        for c in &self.coefficients {
            let _ = write!(out, "{:<width$} {:>13.6}", c.name, c.estimate);
            for e in &self.estimators {
                let _ = write!(out, " {:>12.6}", c.standard_errors[e.name()]);
            }
            match c.divergence_ratio["hc0"] {
                Some(r) => {
                    let _ = writeln!(out, " {r:>10.4}");
                }
                None => {
                    let _ = writeln!(out, " {:>10}", "-");
                }
            }
        }
        if let Some(im) = &self.imtest {
            out.push('\n');
            render_imtest(&mut out, im);
        }
        if let Some(q) = &self.qq_path {
            let _ = writeln!(out, "\nQ-Q pairs written to {q}");
        }
        out
    }
}
