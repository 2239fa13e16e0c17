//! Specification diagnostics for the homoskedastic normal linear model.
//!
//! The information-matrix statistic uses the usual three-way split for the
//! normal linear model on standardized residuals `z_i = e_i / sigma_hat`:
//!
//! - heteroskedasticity: half the explained sum of squares from regressing
//!   `z^2` on a constant and the distinct products `x_j x_k`,
//! - skewness: `n * mean(z^3)^2 / 6`,
//! - kurtosis: `n * (mean(z^4) - 3)^2 / 24`.
//!
//! The null distribution is not taken from chi-square tables. It is rebuilt
//! by refitting on data drawn from the fitted homoskedastic normal model,
//! and the p-value is `(1 + #{T_b >= T}) / (B + 1)`.

use serde::Serialize;

use crate::distributions::RngStream;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, PivotedQr};
use crate::model::{ols_fit, Dataset, FitResult, RANK_TOLERANCE};
use crate::parallel::map_indexed;

pub const MIN_BOOTSTRAP_REPLICATES: usize = 99;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImComponents {
    pub heteroskedasticity: f64,
    pub skewness: f64,
    pub kurtosis: f64,
}

impl ImComponents {
    pub fn total(&self) -> f64 {
        self.heteroskedasticity + self.skewness + self.kurtosis
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImTestResult {
    pub statistic: f64,
    pub bootstrap_p: f64,
    pub bootstrap_replicates: usize,
    pub components: ImComponents,
}

/// Bootstrap p-value with the `(1 + r) / (B + 1)` convention.
pub fn bootstrap_p_value(observed: f64, bootstrap: &[f64]) -> f64 {
    let r = bootstrap.iter().filter(|&&t| t >= observed).count();
    (1 + r) as f64 / (bootstrap.len() + 1) as f64
}

/// Regressors of the auxiliary heteroskedasticity regression; depends only
/// on the design, so the bootstrap shares it.
struct AuxRegression {
    qr: PivotedQr,
}

impl AuxRegression {
    fn new(x: &Matrix) -> Self {
        let (n, p) = (x.nrows(), x.ncols());
        let mut cols = vec![vec![1.0; n]];
        for j in 0..p {
            for k in j..p {
                let prod: Vec<f64> = x
                    .column(j)
                    .iter()
                    .zip(x.column(k))
                    .map(|(a, b)| a * b)
                    .collect();
                // constant products duplicate the first column
                if prod.iter().any(|&v| v != prod[0]) {
                    cols.push(prod);
                }
            }
        }
        AuxRegression {
            qr: PivotedQr::new(&Matrix::from_columns(&cols), RANK_TOLERANCE),
        }
    }

    fn explained_ss(&self, v: &[f64]) -> f64 {
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        self.qr.project(v).iter().map(|f| (f - mean).powi(2)).sum()
    }
}

fn noise_scale(fit: &FitResult, y: &[f64]) -> Result<f64> {
    let sigma = (fit.rss() / fit.dims.n as f64).sqrt();
    let scale = y.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
    if !(sigma > 1e-10 * scale) {
        return Err(Error::DegenerateSample("residuals have zero spread"));
    }
    Ok(sigma)
}

fn components(aux: &AuxRegression, fit: &FitResult, sigma: f64) -> ImComponents {
    let n = fit.dims.n as f64;
    let z2: Vec<f64> = fit.residuals.iter().map(|e| (e / sigma).powi(2)).collect();
    let m3 = fit
        .residuals
        .iter()
        .map(|e| (e / sigma).powi(3))
        .sum::<f64>()
        / n;
    let m4 = z2.iter().map(|v| v * v).sum::<f64>() / n;
    ImComponents {
        heteroskedasticity: 0.5 * aux.explained_ss(&z2),
        skewness: n * m3 * m3 / 6.0,
        kurtosis: n * (m4 - 3.0).powi(2) / 24.0,
    }
}

/// Information-matrix statistic of a fitted dataset, without calibration.
pub fn im_statistic(d: &Dataset) -> Result<ImComponents> {
    let fit = ols_fit(d)?;
    let sigma = noise_scale(&fit, d.y())?;
    Ok(components(&AuxRegression::new(d.x()), &fit, sigma))
}

/// Parametric-bootstrap information-matrix test against homoskedastic normal
/// disturbances. Bootstrap draw `b` uses `stream.child(b)`.
pub fn im_test(
    d: &Dataset,
    bootstrap_replicates: usize,
    stream: &RngStream,
) -> Result<ImTestResult> {
    if bootstrap_replicates < MIN_BOOTSTRAP_REPLICATES {
        return Err(Error::InvalidInput(format!(
            "need at least {MIN_BOOTSTRAP_REPLICATES} bootstrap replicates, got {bootstrap_replicates}"
        )));
    }
    let aux = AuxRegression::new(d.x());
    let fit = ols_fit(d)?;
    let sigma = noise_scale(&fit, d.y())?;
    let observed = components(&aux, &fit, sigma);
    let fitted = d.x().mul_vec(&fit.beta);

    let boot = map_indexed(bootstrap_replicates, None, |b| {
        let mut s = stream.child(b as u64);
        let normal = crate::distributions::DisturbanceSpec::normal(0.0, sigma)?;
        let y: Vec<f64> = fitted.iter().map(|f| f + normal.draw(&mut s)).collect();
        let db = d.with_outcome(y)?;
        let fb = ols_fit(&db)?;
        let sb = noise_scale(&fb, db.y())?;
        Ok(components(&aux, &fb, sb).total())
    })?;

    let statistic = observed.total();
    Ok(ImTestResult {
        statistic,
        bootstrap_p: bootstrap_p_value(statistic, &boot),
        bootstrap_replicates,
        components: observed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QqData {
    /// `(theoretical, sample)` pairs, ascending in both coordinates.
    pub pairs: Vec<(f64, f64)>,
}

/// Normal Q-Q pairs for a fit's residuals.
pub fn qq_normal(f: &FitResult) -> Result<QqData> {
    qq_from_residuals(&f.residuals)
}

/// Residuals centered and divided by their sample standard deviation,
/// sorted, and paired with standard normal quantiles at `(i - 0.5) / n`.
pub fn qq_from_residuals(residuals: &[f64]) -> Result<QqData> {
    let n = residuals.len();
    if n < 3 {
        return Err(Error::DegenerateSample(
            "Q-Q extraction needs at least 3 residuals",
        ));
    }
    let mean = residuals.iter().sum::<f64>() / n as f64;
    let sd = (residuals.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    let scale = residuals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if !(sd > 1e-12 * scale) || sd == 0.0 {
        return Err(Error::DegenerateSample("residuals have zero spread"));
    }
    let mut z: Vec<f64> = residuals.iter().map(|r| (r - mean) / sd).collect();
    z.sort_by(f64::total_cmp);
    let pairs = z
        .into_iter()
        .enumerate()
        .map(|(i, s)| (normal_quantile((i as f64 + 0.5) / n as f64), s))
        .collect();
    Ok(QqData { pairs })
}

/// Standard normal quantile (Wichura's AS 241, about 1e-16 relative).
#[allow(clippy::excessive_precision)]
pub fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 8] = [
        3.387_132_872_796_366_6,
        133.141_667_891_784_38,
        1_971.590_950_306_551_3,
        13_731.693_765_509_461,
        45_921.953_931_549_87,
        67_265.770_927_008_7,
        33_430.575_583_588_13,
        2_509.080_928_730_122_7,
    ];
    const B: [f64; 8] = [
        1.0,
        42.313_330_701_600_91,
        687.187_007_492_057_9,
        5_394.196_021_424_751,
        21_213.794_301_586_597,
        39_307.895_800_092_71,
        28_729.085_735_721_943,
        5_226.495_278_852_546,
    ];
    const C: [f64; 8] = [
        1.423_437_110_749_683_5,
        4.630_337_846_156_545,
        5.769_497_221_460_691,
        3.647_848_324_763_204_5,
        1.270_458_252_452_368_4,
        0.241_780_725_177_450_6,
        0.022_723_844_989_269_184,
        7.745_450_142_783_414e-4,
    ];
    const D: [f64; 8] = [
        1.0,
        2.053_191_626_637_759,
        1.676_384_830_183_803_8,
        0.689_767_334_985_1,
        0.148_103_976_427_480_08,
        0.015_198_666_563_616_457,
        5.475_938_084_995_345e-4,
        1.050_750_071_644_416_8e-9,
    ];
    const E: [f64; 8] = [
        6.657_904_643_501_103,
        5.463_784_911_164_114,
        1.784_826_539_917_291_3,
        0.296_560_571_828_504_9,
        0.026_532_189_526_576_124,
        0.001_242_660_947_388_078_4,
        2.711_555_568_743_487_6e-5,
        2.010_334_399_292_288_1e-7,
    ];
    const F: [f64; 8] = [
        1.0,
        0.599_832_206_555_887_9,
        0.136_929_880_922_735_8,
        0.014_875_361_290_850_615,
        7.868_691_311_456_133e-4,
        1.846_318_317_510_054_8e-5,
        1.421_511_758_316_446e-7,
        2.044_263_103_389_94e-15,
    ];
    fn poly(c: &[f64; 8], x: f64) -> f64 {
        c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
    }

    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180_625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let tail = p.min(1.0 - p);
    if tail == 0.0 {
        return if q < 0.0 {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        };
    }
    let r = (-tail.ln()).sqrt();
    let x = if r <= 5.0 {
        let r = r - 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        let r = r - 5.0;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -x
    } else {
        x
    }
}

/// Median with the midpoint convention for even counts. Empty input gives NaN.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len().is_multiple_of(2) {
        0.5 * (v[mid - 1] + v[mid])
    } else {
        v[mid]
    }
}

/// `median(y | X = 1) - median(y | X = 0)`.
pub fn diff_in_medians(d: &Dataset) -> Result<f64> {
    let col = d.binary_column().ok_or(Error::MissingBinaryColumn)?;
    let (mut g0, mut g1) = (Vec::new(), Vec::new());
    for (&y, &x) in d.y().iter().zip(d.x().column(col)) {
        if x == 1.0 {
            g1.push(y);
        } else {
            g0.push(y);
        }
    }
    Ok(median(&g1) - median(&g0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::derive_stream;
    use crate::model::validate_dataset;

    #[test]
    fn p_value_boundaries() {
        let boot: Vec<f64> = (0..99).map(|i| i as f64).collect();
        assert_eq!(bootstrap_p_value(1000.0, &boot), 0.01);
        assert_eq!(bootstrap_p_value(-1.0, &boot), 1.0);
        // ties count against the observed statistic
        assert_eq!(bootstrap_p_value(98.0, &boot), 0.02);
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
        let d = validate_dataset(
            &[
                vec![3.0, 1.0, 1.0],
                vec![5.0, 1.0, 1.0],
                vec![2.0, 1.0, 0.0],
                vec![4.0, 1.0, 0.0],
            ],
            Some(1),
        )
        .unwrap();
        assert_eq!(diff_in_medians(&d).unwrap(), 1.0);
    }

    #[test]
    fn qq_three_points() {
        let q = qq_from_residuals(&[0.3, -1.0, 0.7]).unwrap();
        // scipy.stats.norm.ppf at 1/6, 1/2, 5/6
        let want = [-0.967421566101701, 0.0, 0.967421566101701];
        for ((t, _), w) in q.pairs.iter().zip(want) {
            assert!((t - w).abs() < 1e-14);
        }
        assert!(q.pairs.windows(2).all(|w| w[0].1 <= w[1].1));
        assert!(matches!(
            qq_from_residuals(&[1.0, 1.0, 1.0]),
            Err(Error::DegenerateSample(_))
        ));
        assert!(qq_from_residuals(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn quantile_reference_values() {
        // scipy.stats.norm.ppf
        for (p, want) in [
            (1e-20, -9.262340089798409),
            (0.001, -3.090232306167813),
            (0.3, -0.5244005127080409),
            (0.93, 1.475791028179171),
            (0.025, -1.9599639845400545),
            (0.975, 1.959963984540054),
            (0.9995, 3.2905267314919255),
        ] {
            assert!((normal_quantile(p) - want).abs() < 1e-14, "p = {p}");
        }
        assert_eq!(normal_quantile(0.5), 0.0);
        assert_eq!(normal_quantile(0.0), f64::NEG_INFINITY);
        assert!(normal_quantile(1.5).is_nan());
    }

    #[test]
    fn im_test_needs_enough_draws() {
        let d = validate_dataset(
            &(0..20)
                .map(|i| vec![(i * i % 7) as f64, 1.0, i as f64])
                .collect::<Vec<_>>(),
            None,
        )
        .unwrap();
        assert!(matches!(
            im_test(&d, 50, &derive_stream(1, 0)),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn noiseless_data_is_degenerate() {
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|i| vec![1.0 + 2.0 * i as f64, 1.0, i as f64])
            .collect();
        let d = validate_dataset(&rows, None).unwrap();
        assert!(matches!(
            im_test(&d, 99, &derive_stream(1, 0)),
            Err(Error::DegenerateSample(_))
        ));
    }
}
