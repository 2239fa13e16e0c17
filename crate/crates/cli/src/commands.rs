use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use sandwich_lab::{
    asymptotic_limits, derive_stream, generate_dataset, im_test, ols_fit, qq_normal,
    run_simulation, DensityCurve, Estimator, LimitPair, SimulationOptions, SimulationSummary,
};

use crate::config::SimConfig;
use crate::error::{CliError, CliResult};
use crate::report::{build_fit_report, render_imtest};
use crate::table::{read_table, write_dataset, write_qq, Loaded, INTERCEPT_NAME};
use crate::{DataArgs, FitArgs, GenerateArgs, ImtestArgs, LimitsArgs, SimulateArgs};

fn emit(out: &mut dyn Write, text: &str) -> CliResult<()> {
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::io("writing output", e))
}

fn emit_json<T: Serialize>(out: &mut dyn Write, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Input(format!("serializing output: {e}")))?;
    text.push('\n');
    emit(out, &text)
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path.display(), e))
}

fn load(data: &DataArgs) -> CliResult<Loaded> {
    read_table(&data.csv)?.to_dataset(!data.no_intercept, data.binary_col.as_deref())
}

pub fn fit(a: &FitArgs, out: &mut dyn Write) -> CliResult<()> {
    let loaded = load(&a.data)?;
    let mut report = build_fit_report(&loaded, &a.robust, a.classical_dof)?;
    if let Some(b) = a.imtest {
        report.imtest = Some(im_test(&loaded.dataset, b, &derive_stream(a.seed.seed, 0))?);
    }
    if let Some(path) = &a.qq {
        let qq = qq_normal(&ols_fit(&loaded.dataset)?)?;
        write_qq(create(path)?, &qq)?;
        report.qq_path = Some(path.display().to_string());
    }
    if a.json {
        emit_json(out, &report)
    } else {
        emit(out, &report.render())
    }
}

pub fn imtest(a: &ImtestArgs, out: &mut dyn Write) -> CliResult<()> {
    let loaded = load(&a.data)?;
    let result = im_test(&loaded.dataset, a.bootstrap, &derive_stream(a.seed.seed, 0))?;
    if a.json {
        return emit_json(out, &result);
    }
    let mut text = format!(
        "data: {} (n = {}, p = {})\n",
        loaded.source,
        loaded.dataset.n(),
        loaded.dataset.p()
    );
    render_imtest(&mut text, &result);
    emit(out, &text)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per estimator. Empty cells mark undefined values (the standard
/// deviation of a single replicate, limits for non-binary designs).
pub fn write_summary_csv<W: Write>(w: W, s: &SimulationSummary) -> CliResult<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let err = |e: csv::Error| CliError::Input(format!("writing summary: {e}"));
    wtr.write_record([
        "estimator",
        "replicates",
        "mean_se",
        "sd_se",
        "coverage",
        "true_se",
        "asymptotic_se",
    ])
    .map_err(err)?;
    for e in &s.estimators {
        wtr.write_record([
            e.estimator.name().to_owned(),
            s.replicates.to_string(),
            e.mean_se.to_string(),
            fmt_opt(e.sd_se),
            e.coverage.to_string(),
            s.true_se.to_string(),
            fmt_opt(e.asymptotic_se),
        ])
        .map_err(err)?;
    }
    wtr.flush().map_err(|e| CliError::io("writing summary", e))
}

pub fn write_density_csv<W: Write>(w: W, curves: &[(Estimator, DensityCurve)]) -> CliResult<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let err = |e: csv::Error| CliError::Input(format!("writing density: {e}"));
    wtr.write_record(["estimator", "x", "density", "bandwidth"])
        .map_err(err)?;
    for (e, c) in curves {
        let h = c.bandwidth.to_string();
        for (x, f) in c.grid.iter().zip(&c.density) {
            wtr.write_record([e.name(), &x.to_string(), &f.to_string(), &h])
                .map_err(err)?;
        }
    }
    wtr.flush().map_err(|e| CliError::io("writing density", e))
}

fn render_summary(s: &SimulationSummary) -> String {
    let spec = &s.spec;
    let mut t = String::new();
    let _ = writeln!(
        t,
        "{} replicates, seed {}: n = {}, m = {} (mu = {}), beta0 = {}, beta1 = {}",
        s.replicates,
        s.master_seed,
        spec.n,
        spec.m,
        spec.mu(),
        spec.beta0,
        spec.beta1
    );
    for (label, d) in [("X = 0", spec.dist0), ("X = 1", spec.dist1)] {
        let _ = writeln!(
            t,
            "  {label}: {}(location {}, scale {}), variance {}",
            d.family,
            d.location,
            d.scale,
            d.variance()
        );
    }
    let _ = writeln!(t, "true SE of beta1_hat: {:.6}", s.true_se);
    let _ = write!(t, "mean beta1_hat: {:.6}", s.beta1_mean);
    if let Some(sd) = s.beta1_sd {
        let _ = write!(t, " (sd {sd:.6})");
    }
    let _ = writeln!(t, "\n");
    let _ = writeln!(
        t,
        "{:<10} {:>10} {:>10} {:>9} {:>14}",
        "estimator", "mean SE", "sd SE", "coverage", "asymptotic SE"
    );
    let cell = |v: Option<f64>| v.map_or("-".to_owned(), |x| format!("{x:.6}"));
    for e in &s.estimators {
        let _ = writeln!(
            t,
            "{:<10} {:>10.6} {:>10} {:>9.4} {:>14}",
            e.estimator.name(),
            e.mean_se,
            cell(e.sd_se),
            e.coverage,
            cell(e.asymptotic_se)
        );
    }
    t
}

pub fn simulate(a: &SimulateArgs, out: &mut dyn Write) -> CliResult<()> {
    if a.workers == Some(0) {
        return Err(CliError::Input("--workers must be at least 1".into()));
    }
    let cfg = SimConfig::load(a.config.as_deref())?;
    let spec = cfg.spec()?;
    let opts = SimulationOptions {
        replicates: cfg.replicates,
        estimators: cfg.estimators.clone(),
        master_seed: a.seed.seed,
        kde: cfg.kde.is_some() || a.out_density.is_some(),
        bandwidth: cfg.kde.as_ref().and_then(|k| k.bandwidth),
        workers: a.workers,
        classical_dof: cfg.classical_dof,
        keep_samples: false,
    };
    let result = run_simulation(&spec, &opts)?;
    if let Some(p) = &a.out_summary {
        write_summary_csv(create(p)?, &result.summary)?;
    }
    if let Some(p) = &a.out_density {
        write_density_csv(create(p)?, &result.densities)?;
    }
    if a.json {
        emit_json(out, &result.summary)
    } else {
        emit(out, &render_summary(&result.summary))
    }
}

#[derive(Debug, Clone, Serialize)]
struct LimitRow {
    mu: f64,
    var0: f64,
    var1: f64,
    #[serde(flatten)]
    limits: LimitPair,
    classical_gap: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    at_n: Option<LimitPair>,
}

pub fn limits(a: &LimitsArgs, out: &mut dyn Write) -> CliResult<()> {
    let mus: Vec<f64> = match (a.mu, a.sweep) {
        (Some(mu), _) => vec![mu],
        (None, Some(k)) if k > 0 => (1..=k).map(|i| i as f64 / (k + 1) as f64).collect(),
        _ => return Err(CliError::Input("give --mu or --sweep K with K >= 1".into())),
    };
    if a.n == Some(0) {
        return Err(CliError::Input("--n must be positive".into()));
    }
    let rows = mus
        .iter()
        .map(|&mu| {
            let limits = asymptotic_limits(mu, a.var0, a.var1)?;
            Ok(LimitRow {
                mu,
                var0: a.var0,
                var1: a.var1,
                limits,
                classical_gap: limits.classical_gap(),
                n: a.n,
                at_n: a.n.map(|n| limits.at_sample_size(n)),
            })
        })
        .collect::<sandwich_lab::Result<Vec<_>>>()?;
    if a.json {
        return emit_json(out, &rows);
    }

    let mut t = format!(
        "limits of sqrt(n) * SE(beta1_hat), var0 = {}, var1 = {}\n",
        a.var0, a.var1
    );
    let _ = write!(
        t,
        "{:>8} {:>12} {:>12} {:>12} {:>12}",
        "mu", "robust", "classical", "true", "gap"
    );
    if let Some(n) = a.n {
        let _ = write!(
            t,
            " {:>14} {:>14}",
            format!("robust n={n}"),
            format!("classical n={n}")
        );
    }
    t.push('\n');
    for r in &rows {
        let l = &r.limits;
        let _ = write!(
            t,
            "{:>8.4} {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
            r.mu, l.robust_limit, l.classical_limit, l.true_limit, r.classical_gap
        );
        if let Some(s) = &r.at_n {
            let _ = write!(t, " {:>14.6} {:>14.6}", s.robust_limit, s.classical_limit);
        }
        t.push('\n');
    }
    if let [r] = rows.as_slice() {
        let l = &r.limits;
        let same = (l.classical_limit - l.robust_limit).abs() <= 1e-12 * l.robust_limit;
        let _ = writeln!(
            t,
            "classical limit {} the robust limit",
            if same {
                "coincides with"
            } else {
                "differs from"
            }
        );
    }
    emit(out, &t)
}

pub fn generate(a: &GenerateArgs, out: &mut dyn Write) -> CliResult<()> {
    let spec = SimConfig::load(a.config.as_deref())?.spec()?;
    let d = generate_dataset(&spec, &mut derive_stream(a.seed.seed, a.replicate))?;
    let names = [INTERCEPT_NAME.to_owned(), "x".to_owned()];
    match &a.out {
        Some(p) => write_dataset(create(p)?, "y", &names, &d, &[0]),
        None => write_dataset(out, "y", &names, &d, &[0]),
    }
}
