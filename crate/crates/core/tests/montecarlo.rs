use sandwich_lab::{
    derive_stream, generate_dataset, kde, run_simulation, sample, DgpSpec, DisturbanceSpec,
    Estimator, SimulationOptions,
};

fn sample_var(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)
}

#[test]
fn generated_groups_have_default_variances() {
    let d = generate_dataset(&DgpSpec::two_group_laplace(), &mut derive_stream(42, 0)).unwrap();
    let (treated, control) = d.y().split_at(200);
    assert!(d.x().column(1)[..200].iter().all(|&v| v == 1.0));
    assert!(d.x().column(1)[200..].iter().all(|&v| v == 0.0));
    assert!((sample_var(control) - 2.0).abs() <= 0.25 * 2.0);
    assert!((sample_var(treated) - 8.0).abs() <= 0.25 * 8.0);
}

#[test]
fn homoskedastic_balanced_estimators_agree() {
    let e = DisturbanceSpec::normal(0.0, 1.0).unwrap();
    let spec = DgpSpec::new(1000, 500, 0.0, 0.0, e, e).unwrap();
    let out = run_simulation(
        &spec,
        &SimulationOptions {
            replicates: 5000,
            master_seed: 3,
            ..Default::default()
        },
    )
    .unwrap();
    let r = out.summary.get(Estimator::HC0).unwrap().mean_se;
    let c = out.summary.get(Estimator::Classical).unwrap().mean_se;
    assert!((r - c).abs() < 0.01 * c, "{r} vs {c}");
}

#[test]
fn kde_recovers_standard_normal_peak() {
    let z = sample(
        &DisturbanceSpec::normal(0.0, 1.0).unwrap(),
        &mut derive_stream(8, 0),
        100_000,
    );
    let curve = kde(&z, None).unwrap();
    let at_zero = curve
        .grid
        .windows(2)
        .zip(curve.density.windows(2))
        .find(|(g, _)| g[0] <= 0.0 && g[1] > 0.0)
        .map(|(g, d)| d[0] + (d[1] - d[0]) * (0.0 - g[0]) / (g[1] - g[0]))
        .unwrap();
    let phi0 = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    assert!((at_zero - phi0).abs() <= 0.05 * phi0, "{at_zero}");
    assert!((curve.integral() - 1.0).abs() <= 0.01);
}

#[test]
fn default_spec_summary_shape() {
    let spec = DgpSpec::two_group_laplace();
    let out = run_simulation(
        &spec,
        &SimulationOptions {
            replicates: 4000,
            master_seed: 21,
            kde: true,
            estimators: Estimator::ALL.to_vec(),
            ..Default::default()
        },
    )
    .unwrap();
    let s = &out.summary;
    assert_eq!(s.estimators.len(), 5);
    assert_eq!(out.densities.len(), 5);
    for (_, c) in &out.densities {
        assert!((c.integral() - 1.0).abs() <= 0.01);
        assert!(c.bandwidth > 0.0);
    }
    for e in &s.estimators {
        assert!((0.0..=1.0).contains(&e.coverage));
    }
    let hc0 = s.get(Estimator::HC0).unwrap();
    let robust_curve = &out
        .densities
        .iter()
        .find(|(e, _)| *e == Estimator::HC0)
        .unwrap()
        .1;
    assert!(
        (robust_curve.mode() - 0.206).abs() <= 0.01,
        "{}",
        robust_curve.mode()
    );
    assert!((robust_curve.mode() - hc0.mean_se).abs() <= 0.01);
    assert!((s.true_se - 0.206155).abs() < 1e-6);
    // HC1..HC3 inflate HC0 slightly, never deflate it
    for e in [Estimator::HC1, Estimator::HC2, Estimator::HC3] {
        assert!(s.get(e).unwrap().mean_se >= hc0.mean_se);
    }
}

/// Replicate estimates of the slope are centered on the truth within four
/// Monte Carlo standard errors.
#[test]
fn slope_is_unbiased() {
    let spec = DgpSpec {
        beta0: 1.0,
        beta1: -0.75,
        ..DgpSpec::two_group_laplace()
    };
    let reps = 25_000;
    let out = run_simulation(
        &spec,
        &SimulationOptions {
            replicates: reps,
            master_seed: 5,
            ..Default::default()
        },
    )
    .unwrap();
    let s = &out.summary;
    let mc_se = s.beta1_sd.unwrap() / (reps as f64).sqrt();
    assert!((s.beta1_mean - spec.beta1).abs() <= 4.0 * mc_se);
    // the sampling sd of the slope is the true standard error
    assert!((s.beta1_sd.unwrap() - s.true_se).abs() <= 0.02 * s.true_se);
}

#[test]
fn scaled_errors_track_their_limits() {
    for n in [1000usize, 4000] {
        let spec = DgpSpec {
            n,
            m: n / 5,
            ..DgpSpec::two_group_laplace()
        };
        let limits = spec.limits().unwrap();
        let out = run_simulation(
            &spec,
            &SimulationOptions {
                replicates: 2000,
                master_seed: 17,
                ..Default::default()
            },
        )
        .unwrap();
        let root_n = (n as f64).sqrt();
        let robust = root_n * out.summary.get(Estimator::HC0).unwrap().mean_se;
        assert!((robust - limits.robust_limit).abs() <= 0.02 * limits.robust_limit);
        if n == 4000 {
            let classical = root_n * out.summary.get(Estimator::Classical).unwrap().mean_se;
            assert!((classical - limits.classical_limit).abs() <= 0.02 * limits.classical_limit);
        }
    }
}

#[test]
fn replicate_errors_carry_their_index() {
    let spec = DgpSpec::two_group_laplace();
    let err = run_simulation(
        &DgpSpec { m: 999, ..spec },
        &SimulationOptions {
            replicates: 2,
            estimators: vec![Estimator::HC2],
            ..Default::default()
        },
    )
    .unwrap_err();
    assert!(
        matches!(err, sandwich_lab::Error::Replicate { index: 0, .. }),
        "{err}"
    );
}
