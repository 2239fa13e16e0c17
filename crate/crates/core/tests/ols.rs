use num::{BigRational, ToPrimitive, Zero};
use proptest::prelude::*;
use rand_core::RngCore;
use sandwich_lab::{derive_stream, group_means, ols_fit, Dataset, Matrix};

/// Solves the normal equations `X'X b = X'y` in exact rational arithmetic.
fn exact_normal_equations(x: &Matrix, y: &[f64]) -> Vec<f64> {
    let (n, p) = (x.nrows(), x.ncols());
    let r = |v: f64| BigRational::from_float(v).unwrap();
    let xs: Vec<Vec<BigRational>> = (0..p)
        .map(|j| x.column(j).iter().map(|&v| r(v)).collect())
        .collect();
    let ys: Vec<BigRational> = y.iter().map(|&v| r(v)).collect();

    // augmented [X'X | X'y]
    let mut a: Vec<Vec<BigRational>> = (0..p)
        .map(|i| {
            let mut row: Vec<BigRational> = (0..p)
                .map(|j| (0..n).fold(BigRational::zero(), |s, k| s + &xs[i][k] * &xs[j][k]))
                .collect();
            row.push((0..n).fold(BigRational::zero(), |s, k| s + &xs[i][k] * &ys[k]));
            row
        })
        .collect();
    for c in 0..p {
        let piv = (c..p).find(|&i| !a[i][c].is_zero()).expect("singular");
        a.swap(c, piv);
        for i in 0..p {
            if i != c {
                let f = &a[i][c] / &a[c][c];
                for j in c..=p {
                    let t = &f * &a[c][j];
                    a[i][j] -= t;
                }
            }
        }
    }
    (0..p)
        .map(|i| (&a[i][p] / &a[i][i]).to_f64().unwrap())
        .collect()
}

fn uniform(s: &mut sandwich_lab::RngStream) -> f64 {
    (s.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

#[test]
fn random_designs_match_exact_oracle() {
    for trial in 0..20 {
        let mut s = derive_stream(2024, trial);
        let n = 50;
        let cols = vec![
            vec![1.0; n],
            (0..n)
                .map(|_| 4.0 * uniform(&mut s) - 2.0)
                .collect::<Vec<_>>(),
            (0..n).map(|_| 10.0 * uniform(&mut s)).collect::<Vec<_>>(),
        ];
        let y: Vec<f64> = (0..n)
            .map(|i| 1.5 - 2.0 * cols[1][i] + 0.3 * cols[2][i] + uniform(&mut s) - 0.5)
            .collect();
        let x = Matrix::from_columns(&cols);
        let oracle = exact_normal_equations(&x, &y);
        let fit = ols_fit(&Dataset::new(y, x, None).unwrap()).unwrap();
        for (b, o) in fit.beta.iter().zip(&oracle) {
            assert!((b - o).abs() <= 1e-8, "trial {trial}: {b} vs {o}");
        }
    }
}

#[test]
fn xtx_inverse_inverts_cross_product() {
    let x = Matrix::from_rows(&[
        vec![1.0, 0.5, 3.0],
        vec![1.0, -1.0, 2.0],
        vec![1.0, 2.0, 0.0],
        vec![1.0, 0.0, 1.0],
        vec![1.0, 1.5, -2.0],
    ]);
    let fit = ols_fit(&Dataset::new(vec![0.0; 5], x.clone(), None).unwrap()).unwrap();
    let xtx = x.transpose().matmul(&x);
    let prod = xtx.matmul(&fit.xtx_inverse);
    for i in 0..3 {
        for j in 0..3 {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((prod[(i, j)] - want).abs() < 1e-12);
        }
    }
}

fn binary_design(x: &[bool]) -> Matrix {
    Matrix::from_columns(&[
        vec![1.0; x.len()],
        x.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
    ])
}

fn binary_case() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
    (10usize..300)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(-1e3..1e3f64, n),
                prop::collection::vec(any::<bool>(), n),
            )
        })
        .prop_filter("both groups present", |(_, x)| {
            x.iter().any(|&b| b) && x.iter().any(|&b| !b)
        })
}

fn general_case() -> impl Strategy<Value = (Vec<f64>, Vec<Vec<f64>>)> {
    (8usize..80, 1usize..4).prop_flat_map(|(n, k)| {
        (
            prop::collection::vec(-50.0..50.0f64, n),
            prop::collection::vec(prop::collection::vec(-5.0..5.0f64, n), k),
        )
    })
}

fn with_intercept(cols: &[Vec<f64>]) -> Matrix {
    let n = cols[0].len();
    let mut all = vec![vec![1.0; n]];
    all.extend(cols.iter().cloned());
    Matrix::from_columns(&all)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ols_equals_group_means((y, x) in binary_case()) {
        let d = Dataset::new(y.clone(), binary_design(&x), Some(1)).unwrap();
        let fit = ols_fit(&d).unwrap();
        let (m0, m1) = group_means(&d).unwrap();
        let scale = 1.0 + y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        prop_assert!((fit.beta[0] - m0).abs() <= 1e-10 * scale);
        prop_assert!((fit.beta[1] - (m1 - m0)).abs() <= 1e-10 * scale);
    }

    #[test]
    fn residuals_orthogonal_to_design((y, cols) in general_case()) {
        let x = with_intercept(&cols);
        if let Ok(d) = Dataset::new(y.clone(), x.clone(), None) {
            let fit = ols_fit(&d).unwrap();
            let ynorm = y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            for v in x.tr_mul_vec(&fit.residuals) {
                prop_assert!(v.abs() <= 1e-8 * (1.0 + ynorm));
            }
        }
    }

    #[test]
    fn affine_equivariance((y, cols) in general_case(), a in -10.0..10.0f64, b in -100.0..100.0f64) {
        let x = with_intercept(&cols);
        if let Ok(d) = Dataset::new(y.clone(), x, None) {
            let fit = ols_fit(&d).unwrap();
            let y2: Vec<f64> = y.iter().map(|v| a * v + b).collect();
            let fit2 = ols_fit(&d.with_outcome(y2).unwrap()).unwrap();
            for (j, (b1, b2)) in fit.beta.iter().zip(&fit2.beta).enumerate() {
                let want = a * b1 + if j == 0 { b } else { 0.0 };
                prop_assert!((b2 - want).abs() <= 1e-9 * (1.0 + want.abs()), "{} vs {}", b2, want);
            }
        }
    }

    #[test]
    fn row_permutation_invariance((y, cols) in general_case(), seed in any::<u64>()) {
        let x = with_intercept(&cols);
        if let Ok(d) = Dataset::new(y.clone(), x.clone(), None) {
            let n = y.len();
            let mut order: Vec<usize> = (0..n).collect();
            let mut s = derive_stream(seed, 0);
            for i in (1..n).rev() {
                order.swap(i, (s.next_u64() % (i as u64 + 1)) as usize);
            }
            let yp: Vec<f64> = order.iter().map(|&i| y[i]).collect();
            let rows: Vec<Vec<f64>> = order.iter().map(|&i| x.row(i)).collect();
            let dp = Dataset::new(yp, Matrix::from_rows(&rows), None).unwrap();
            let (f, fp) = (ols_fit(&d).unwrap(), ols_fit(&dp).unwrap());
            for (a, b) in f.beta.iter().zip(&fp.beta) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{} vs {}", a, b);
            }
        }
    }
}
