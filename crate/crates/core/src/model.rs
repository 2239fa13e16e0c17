//! Datasets and ordinary least squares.
//!
//! The model is `y = X b + e` with `X` conditioned on (fixed). The intercept
//! is an ordinary column of ones supplied by the caller. When one column is
//! tagged as a 0/1 predictor, [`group_means`] gives the method-of-moments
//! solution that OLS must reproduce.

use crate::error::{Error, Result};
use crate::linalg::{Matrix, PivotedQr};

/// Relative pivot tolerance below which the design is declared collinear.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Outcome vector and design matrix, validated on construction.
#[derive(Debug, Clone)]
pub struct Dataset {
    y: Vec<f64>,
    x: Matrix,
    binary_column: Option<usize>,
    treated: Option<usize>,
    qr: PivotedQr,
}

impl Dataset {
    /// Validates and builds a dataset from an outcome and a full design
    /// matrix (intercept included if wanted).
    pub fn new(y: Vec<f64>, x: Matrix, binary_column: Option<usize>) -> Result<Self> {
        let (n, p) = (x.nrows(), x.ncols());
        if y.len() != n {
            return Err(Error::InvalidInput(format!(
                "outcome has {} rows but design has {n}",
                y.len()
            )));
        }
        if n < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least 2 rows, got {n}"
            )));
        }
        if p == 0 {
            return Err(Error::InvalidInput("design has no columns".into()));
        }
        if let Some(row) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row, col: 0 });
        }
        for j in 0..p {
            if let Some(row) = x.column(j).iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { row, col: j + 1 });
            }
        }
        let treated = match binary_column {
            Some(col) => Some(check_binary(&x, col)?),
            None => None,
        };
        if n < p {
            return Err(Error::Collinear { rank: n, cols: p });
        }
        let qr = PivotedQr::new(&x, RANK_TOLERANCE);
        if !qr.is_full_rank() {
            return Err(Error::Collinear {
                rank: qr.rank(),
                cols: p,
            });
        }
        Ok(Dataset {
            y,
            x,
            binary_column,
            treated,
            qr,
        })
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn binary_column(&self) -> Option<usize> {
        self.binary_column
    }

    /// Number of rows with the binary predictor equal to one.
    pub fn treated(&self) -> Option<usize> {
        self.treated
    }

    /// Same design, new outcome. Used by the bootstrap and by tests that
    /// transform `y`.
    pub fn with_outcome(&self, y: Vec<f64>) -> Result<Self> {
        assert_eq!(y.len(), self.n(), "outcome length must match design");
        if let Some(row) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row, col: 0 });
        }
        Ok(Dataset { y, ..self.clone() })
    }
}

fn check_binary(x: &Matrix, col: usize) -> Result<usize> {
    if col >= x.ncols() {
        return Err(Error::InvalidInput(format!(
            "binary column {col} out of range for {} columns",
            x.ncols()
        )));
    }
    let mut ones = 0;
    for (row, &v) in x.column(col).iter().enumerate() {
        if v == 1.0 {
            ones += 1;
        } else if v != 0.0 {
            return Err(Error::NotBinary { col, row, value: v });
        }
    }
    let n = x.nrows();
    if ones == 0 || ones == n {
        return Err(Error::DegenerateBinary { col, ones, n });
    }
    Ok(ones)
}

/// Validates a raw table whose rows are `[y, x_0, .., x_{p-1}]`.
///
/// `binary_column` indexes the design columns (so `Some(1)` is the column
/// after an intercept).
pub fn validate_dataset(rows: &[Vec<f64>], binary_column: Option<usize>) -> Result<Dataset> {
    let width = rows.first().map_or(0, Vec::len);
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != width) {
        return Err(Error::InvalidInput(format!(
            "row {i} has {} fields, expected {width}",
            r.len()
        )));
    }
    if rows.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 rows, got {}",
            rows.len()
        )));
    }
    if width < 2 {
        return Err(Error::InvalidInput(
            "each row needs an outcome and at least one predictor".into(),
        ));
    }
    let y = rows.iter().map(|r| r[0]).collect();
    let columns: Vec<Vec<f64>> = (1..width)
        .map(|j| rows.iter().map(|r| r[j]).collect())
        .collect();
    Dataset::new(y, Matrix::from_columns(&columns), binary_column)
}

/// Shape of the data a fit came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub n: usize,
    pub p: usize,
    pub m: Option<usize>,
}

/// OLS estimates plus everything the variance estimators need.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub beta: Vec<f64>,
    pub residuals: Vec<f64>,
    pub xtx_inverse: Matrix,
    pub leverage: Vec<f64>,
    pub dims: Dims,
    pub binary_column: Option<usize>,
    design: Matrix,
}

impl FitResult {
    pub fn design(&self) -> &Matrix {
        &self.design
    }

    pub fn rss(&self) -> f64 {
        self.residuals.iter().map(|e| e * e).sum()
    }
}

/// Fits `y` on `X` through the dataset's pivoted QR factorization.
pub fn ols_fit(d: &Dataset) -> Result<FitResult> {
    let (beta, residuals) = d.qr.least_squares(&d.y);
    Ok(FitResult {
        beta,
        residuals,
        xtx_inverse: d.qr.unscaled_covariance(),
        leverage: d.qr.leverage(),
        dims: Dims {
            n: d.n(),
            p: d.p(),
            m: d.treated,
        },
        binary_column: d.binary_column,
        design: d.x.clone(),
    })
}

/// Means of `y` over the rows where the binary predictor is 0 and 1.
pub fn group_means(d: &Dataset) -> Result<(f64, f64)> {
    let col = d.binary_column.ok_or(Error::MissingBinaryColumn)?;
    let (mut s0, mut n0, mut s1, mut n1) = (0.0, 0usize, 0.0, 0usize);
    for (&y, &x) in d.y.iter().zip(d.x.column(col)) {
        if x == 1.0 {
            s1 += y;
            n1 += 1;
        } else {
            s0 += y;
            n0 += 1;
        }
    }
    Ok((s0 / n0 as f64, s1 / n1 as f64))
}
