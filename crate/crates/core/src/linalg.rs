//! Dense column-major matrices and a column-pivoted Householder QR.
//!
//! Only what the regression code needs: tall-skinny least squares, rank
//! detection, `(X'X)^-1` recovered from `R`, and projections onto the column
//! space. Nothing here forms `X'X` explicitly.

use std::ops::{Index, IndexMut};

/// Column-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Matrix::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from equal-length columns.
    ///
    /// Panics if the columns differ in length.
    pub fn from_columns(columns: &[Vec<f64>]) -> Self {
        let rows = columns.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows * columns.len());
        for c in columns {
            assert_eq!(c.len(), rows, "ragged columns");
            data.extend_from_slice(c);
        }
        Matrix {
            rows,
            cols: columns.len(),
            data,
        }
    }

    /// Builds a matrix from equal-length rows.
    ///
    /// Panics if the rows differ in length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Matrix::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged rows");
            for (j, &v) in r.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn column_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.cols).map(|j| self[(i, j)]).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.data.iter()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for i in 0..self.rows {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// `self * v`
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        let mut out = vec![0.0; self.rows];
        for (j, &vj) in v.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.column(j)) {
                *o += a * vj;
            }
        }
        out
    }

    /// `self' * v`
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows);
        (0..self.cols).map(|j| dot(self.column(j), v)).collect()
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            for k in 0..self.cols {
                let b = other[(k, j)];
                if b == 0.0 {
                    continue;
                }
                for i in 0..self.rows {
                    out[(i, j)] += self[(i, k)] * b;
                }
            }
        }
        out
    }

    /// Replaces the matrix by `(A + A') / 2`. Square matrices only.
    pub fn symmetrize(&mut self) {
        assert_eq!(self.rows, self.cols);
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let avg = 0.5 * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = avg;
                self[(j, i)] = avg;
            }
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .collect()
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Householder QR with column pivoting, `A P = Q R`.
///
/// Reflectors are stored LAPACK-style below the diagonal of `qr` with an
/// implicit leading one; `R` occupies the upper triangle.
#[derive(Debug, Clone)]
pub struct PivotedQr {
    qr: Matrix,
    tau: Vec<f64>,
    perm: Vec<usize>,
    rank: usize,
}

impl PivotedQr {
    /// Factorizes `a`. A diagonal entry of `R` counts toward the rank when
    /// its magnitude exceeds `rel_tol * |R[0, 0]|`.
    pub fn new(a: &Matrix, rel_tol: f64) -> Self {
        let (n, p) = (a.nrows(), a.ncols());
        let mut qr = a.clone();
        let steps = n.min(p);
        let mut tau = vec![0.0; steps];
        let mut perm: Vec<usize> = (0..p).collect();

        for k in 0..steps {
            // Pivot: largest trailing column norm. Norms are recomputed rather
            // than downdated; p is small for every caller.
            let mut best = k;
            let mut best_norm = -1.0;
            for j in k..p {
                let s: f64 = qr.column(j)[k..].iter().map(|v| v * v).sum();
                if s > best_norm {
                    best_norm = s;
                    best = j;
                }
            }
            if best != k {
                for i in 0..n {
                    let tmp = qr[(i, k)];
                    qr[(i, k)] = qr[(i, best)];
                    qr[(i, best)] = tmp;
                }
                perm.swap(k, best);
            }

            let x0 = qr[(k, k)];
            let tail: f64 = qr.column(k)[k + 1..].iter().map(|v| v * v).sum();
            if tail == 0.0 {
                tau[k] = 0.0;
                continue;
            }
            let norm = (x0 * x0 + tail).sqrt();
            let beta = if x0 >= 0.0 { -norm } else { norm };
            tau[k] = (beta - x0) / beta;
            let scale = 1.0 / (x0 - beta);
            for v in &mut qr.column_mut(k)[k + 1..] {
                *v *= scale;
            }
            qr[(k, k)] = beta;

            for j in (k + 1)..p {
                let mut w = qr[(k, j)];
                for i in (k + 1)..n {
                    w += qr[(i, k)] * qr[(i, j)];
                }
                w *= tau[k];
                qr[(k, j)] -= w;
                for i in (k + 1)..n {
                    let vik = qr[(i, k)];
                    qr[(i, j)] -= w * vik;
                }
            }
        }

        let lead = if steps > 0 { qr[(0, 0)].abs() } else { 0.0 };
        let rank = if lead == 0.0 {
            0
        } else {
            (0..steps)
                .take_while(|&k| qr[(k, k)].abs() > rel_tol * lead)
                .count()
        };

        PivotedQr {
            qr,
            tau,
            perm,
            rank,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn nrows(&self) -> usize {
        self.qr.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.qr.ncols()
    }

    /// `perm[k]` is the original column placed at position `k`.
    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank == self.ncols()
    }

    /// Overwrites `v` with `Q' v`.
    pub fn apply_qt(&self, v: &mut [f64]) {
        let n = self.nrows();
        assert_eq!(v.len(), n);
        for (k, &t) in self.tau.iter().enumerate() {
            if t == 0.0 {
                continue;
            }
            let col = self.qr.column(k);
            let mut w = v[k];
            for i in (k + 1)..n {
                w += col[i] * v[i];
            }
            w *= t;
            v[k] -= w;
            for i in (k + 1)..n {
                v[i] -= w * col[i];
            }
        }
    }

    /// Overwrites `v` with `Q v`.
    pub fn apply_q(&self, v: &mut [f64]) {
        let n = self.nrows();
        assert_eq!(v.len(), n);
        for (k, &t) in self.tau.iter().enumerate().rev() {
            if t == 0.0 {
                continue;
            }
            let col = self.qr.column(k);
            let mut w = v[k];
            for i in (k + 1)..n {
                w += col[i] * v[i];
            }
            w *= t;
            v[k] -= w;
            for i in (k + 1)..n {
                v[i] -= w * col[i];
            }
        }
    }

    /// Least-squares coefficients in the original column order, together
    /// with the residual vector `y - A b`. Requires full column rank.
    pub fn least_squares(&self, y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let p = self.ncols();
        debug_assert!(self.is_full_rank());
        let mut qty = y.to_vec();
        self.apply_qt(&mut qty);

        let mut z = vec![0.0; p];
        for k in (0..p).rev() {
            let s = ((k + 1)..p).fold(qty[k], |s, j| s - self.qr[(k, j)] * z[j]);
            z[k] = s / self.qr[(k, k)];
        }
        let mut beta = vec![0.0; p];
        for (k, &orig) in self.perm.iter().enumerate() {
            beta[orig] = z[k];
        }

        // Residual = Q [0; (Q'y)_tail]
        let mut resid = qty;
        resid[..p].iter_mut().for_each(|v| *v = 0.0);
        self.apply_q(&mut resid);
        (beta, resid)
    }

    /// Orthogonal projection of `v` onto the span of the first `rank`
    /// pivoted columns.
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        let mut w = v.to_vec();
        self.apply_qt(&mut w);
        w[self.rank..].iter_mut().for_each(|x| *x = 0.0);
        self.apply_q(&mut w);
        w
    }

    /// Inverse of the leading `p x p` upper-triangular factor, pivoted order.
    fn r_inverse(&self) -> Matrix {
        let p = self.ncols();
        let mut inv = Matrix::zeros(p, p);
        for j in 0..p {
            inv[(j, j)] = 1.0 / self.qr[(j, j)];
            for i in (0..j).rev() {
                let mut s = 0.0;
                for k in (i + 1)..=j {
                    s += self.qr[(i, k)] * inv[(k, j)];
                }
                inv[(i, j)] = -s / self.qr[(i, i)];
            }
        }
        inv
    }

    /// `(A'A)^-1 = P R^-1 R^-T P'`, in the original column order.
    pub fn unscaled_covariance(&self) -> Matrix {
        let p = self.ncols();
        let rinv = self.r_inverse();
        let mut out = Matrix::zeros(p, p);
        for a in 0..p {
            for b in a..p {
                // rows a and b of R^-1; R^-1 is upper triangular
                let s: f64 = (b..p).map(|k| rinv[(a, k)] * rinv[(b, k)]).sum();
                let (ia, ib) = (self.perm[a], self.perm[b]);
                out[(ia, ib)] = s;
                out[(ib, ia)] = s;
            }
        }
        out
    }

    /// Diagonal of the hat matrix, `h_i = sum_k Q[i, k]^2` over the thin `Q`.
    pub fn leverage(&self) -> Vec<f64> {
        let (n, p) = (self.nrows(), self.ncols());
        let mut h = vec![0.0; n];
        let mut e = vec![0.0; n];
        for k in 0..p.min(n) {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[k] = 1.0;
            self.apply_q(&mut e);
            for (hi, qi) in h.iter_mut().zip(&e) {
                *hi += qi * qi;
            }
        }
        h
    }
}
