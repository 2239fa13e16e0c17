use sandwich_lab::diagnostics::{im_statistic, normal_quantile, qq_from_residuals};
use sandwich_lab::{
    derive_stream, diff_in_medians, generate_dataset, im_test, ols_fit, qq_normal, sample, DgpSpec,
    DisturbanceSpec,
};

fn normal_spec(n: usize) -> DgpSpec {
    let e = DisturbanceSpec::normal(0.0, 1.0).unwrap();
    DgpSpec::new(n, n / 5, 1.0, 0.5, e, e).unwrap()
}

#[test]
fn qq_of_exact_quantiles_is_a_scaled_identity() {
    let n = 501;
    let q: Vec<f64> = (0..n)
        .map(|i| normal_quantile((i as f64 + 0.5) / n as f64))
        .collect();
    let mean = q.iter().sum::<f64>() / n as f64;
    let sd = (q.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    // shuffle so sorting is exercised
    let mut shuffled = q.clone();
    shuffled.reverse();
    shuffled.rotate_left(123);
    let qq = qq_from_residuals(&shuffled).unwrap();
    assert_eq!(qq.pairs.len(), n);
    for (theory, samp) in &qq.pairs {
        assert!((samp * sd - theory).abs() <= 1e-9, "{samp} vs {theory}");
    }
}

#[test]
fn qq_coordinates_are_monotone() {
    let d = generate_dataset(&DgpSpec::two_group_laplace(), &mut derive_stream(3, 3)).unwrap();
    let qq = qq_normal(&ols_fit(&d).unwrap()).unwrap();
    for w in qq.pairs.windows(2) {
        assert!(w[1].0 > w[0].0);
        assert!(w[1].1 >= w[0].1);
    }
}

#[test]
fn laplace_tails_exceed_normal_tails() {
    let n = 100_000;
    let r = sample(
        &DisturbanceSpec::laplace(0.0, 1.0).unwrap(),
        &mut derive_stream(10, 0),
        n,
    );
    let qq = qq_from_residuals(&r).unwrap();
    let i = (0.999 * n as f64) as usize;
    let (theory, samp) = qq.pairs[i];
    assert!(samp.abs() > theory.abs(), "{samp} vs {theory}");
    let (theory_lo, samp_lo) = qq.pairs[n - 1 - i];
    assert!(samp_lo.abs() > theory_lo.abs());
}

#[test]
fn im_statistic_affine_invariant() {
    for k in 0..10 {
        let d = generate_dataset(&DgpSpec::two_group_laplace(), &mut derive_stream(31, k)).unwrap();
        let base = im_statistic(&d).unwrap();
        for (a, b) in [(0.01, 5.0), (3.7, -100.0), (250.0, 1e3)] {
            let t = d
                .with_outcome(d.y().iter().map(|v| a * v + b).collect())
                .unwrap();
            let moved = im_statistic(&t).unwrap();
            for (x, y) in [
                (base.heteroskedasticity, moved.heteroskedasticity),
                (base.skewness, moved.skewness),
                (base.kurtosis, moved.kurtosis),
            ] {
                assert!((x - y).abs() <= 1e-8 * (1.0 + x.abs()), "{x} vs {y}");
            }
        }
    }
}

#[test]
fn im_test_is_deterministic() {
    let d = generate_dataset(&normal_spec(300), &mut derive_stream(4, 0)).unwrap();
    let a = im_test(&d, 99, &derive_stream(9, 1)).unwrap();
    let b = im_test(&d, 99, &derive_stream(9, 1)).unwrap();
    assert_eq!(a, b);
    assert!((0.0..=1.0).contains(&a.bootstrap_p));
}

/// Under the null the rejection rate at 0.05 and 0.10 stays within two
/// binomial standard errors of the nominal level.
#[test]
fn bootstrap_p_is_valid_under_null() {
    let trials = 300;
    let spec = normal_spec(400);
    let ps: Vec<f64> = (0..trials)
        .map(|t| {
            let d = generate_dataset(&spec, &mut derive_stream(1234, t)).unwrap();
            im_test(&d, 99, &derive_stream(5678, t))
                .unwrap()
                .bootstrap_p
        })
        .collect();
    for alpha in [0.05, 0.10] {
        let rate = ps.iter().filter(|&&p| p <= alpha).count() as f64 / trials as f64;
        let se = (alpha * (1.0 - alpha) / trials as f64).sqrt();
        assert!(rate <= alpha + 2.0 * se, "alpha {alpha}: rate {rate}");
    }
}

#[test]
fn im_test_detects_laplace_heteroskedasticity() {
    let trials = 100;
    let spec = DgpSpec::two_group_laplace();
    let rejections = (0..trials)
        .filter(|&t| {
            let d = generate_dataset(&spec, &mut derive_stream(4321, t)).unwrap();
            im_test(&d, 499, &derive_stream(8765, t))
                .unwrap()
                .bootstrap_p
                <= 0.05
        })
        .count();
    assert!(rejections >= 95, "{rejections} of {trials}");
}

#[test]
fn medians_shift_invariant() {
    let d = generate_dataset(&DgpSpec::two_group_laplace(), &mut derive_stream(6, 0)).unwrap();
    let base = diff_in_medians(&d).unwrap();
    for c in [-1e3, -2.5, 0.125, 7.0] {
        let s = d
            .with_outcome(d.y().iter().map(|v| v + c).collect())
            .unwrap();
        assert!((diff_in_medians(&s).unwrap() - base).abs() <= 1e-12 * (1.0 + c.abs()));
    }
}

#[test]
fn medians_inconsistent_under_asymmetry() {
    let spec = DgpSpec::new(
        8000,
        4000,
        0.0,
        0.0,
        DisturbanceSpec::centered_exponential(0.0, 1.0).unwrap(),
        DisturbanceSpec::normal(0.0, 1.0).unwrap(),
    )
    .unwrap();
    let reps = 200;
    let (mut med, mut ols) = (0.0, 0.0);
    for k in 0..reps {
        let d = generate_dataset(&spec, &mut derive_stream(77, k)).unwrap();
        med += diff_in_medians(&d).unwrap();
        ols += ols_fit(&d).unwrap().beta[1];
    }
    let (med, ols) = (med / reps as f64, ols / reps as f64);
    // 0 - (ln 2 - 1)
    let expected = 1.0 - std::f64::consts::LN_2;
    assert!((med - expected).abs() <= 0.03, "{med}");
    assert!(ols.abs() <= 0.03, "{ols}");
}
