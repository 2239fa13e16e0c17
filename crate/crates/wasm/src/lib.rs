//! Browser bindings. Every export takes and returns plain strings (JSON or
//! CSV text) so the page needs no generated type glue beyond the functions.

use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

use sandwich_lab::variance::estimate;
use sandwich_lab::{
    asymptotic_limits, divergence_ratio, ols_fit, run_simulation, Dataset, DgpSpec,
    DisturbanceSpec, Estimator, Matrix, SimulationOptions, SimulationSummary,
};

#[derive(Debug, Serialize)]
pub struct LimitPoint {
    pub mu: f64,
    pub robust: f64,
    pub classical: f64,
}

/// Scaled robust and classical limits at `points` evenly spaced `mu` values
/// strictly inside (0, 1).
pub fn limit_curve(var0: f64, var1: f64, points: usize) -> Result<Vec<LimitPoint>, String> {
    if points == 0 {
        return Err("need at least one point".into());
    }
    (1..=points)
        .map(|i| {
            let mu = i as f64 / (points + 1) as f64;
            let l = asymptotic_limits(mu, var0, var1).map_err(|e| e.to_string())?;
            Ok(LimitPoint {
                mu,
                robust: l.robust_limit,
                classical: l.classical_limit,
            })
        })
        .collect()
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemoConfig {
    pub n: usize,
    pub m: usize,
    pub dist0: DisturbanceSpec,
    pub dist1: DisturbanceSpec,
    pub replicates: usize,
    pub seed: u64,
}

impl Default for DemoConfig {
    fn default() -> Self {
        let spec = DgpSpec::two_group_laplace();
        DemoConfig {
            n: spec.n,
            m: spec.m,
            dist0: spec.dist0,
            dist1: spec.dist1,
            replicates: 5000,
            seed: 1,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Curve {
    pub estimator: Estimator,
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
}

#[derive(Debug, Serialize)]
pub struct DemoSimulation {
    pub summary: SimulationSummary,
    pub curves: Vec<Curve>,
}

pub fn simulate(config: &DemoConfig) -> Result<DemoSimulation, String> {
    let spec = DgpSpec::new(config.n, config.m, 0.0, 0.0, config.dist0, config.dist1)
        .map_err(|e| e.to_string())?;
    let out = run_simulation(
        &spec,
        &SimulationOptions {
            replicates: config.replicates,
            master_seed: config.seed,
            kde: true,
            workers: Some(1),
            ..Default::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let curves = out
        .densities
        .into_iter()
        .map(|(estimator, c)| Curve {
            estimator,
            grid: c.grid,
            density: c.density,
            bandwidth: c.bandwidth,
        })
        .collect();
    Ok(DemoSimulation {
        summary: out.summary,
        curves,
    })
}

#[derive(Debug, Serialize)]
pub struct FitRow {
    pub name: String,
    pub estimate: f64,
    pub classical: f64,
    pub hc0: f64,
    pub hc3: Option<f64>,
    pub ratio: Option<f64>,
}

/// Fits `y ~ 1 + predictors` to CSV text with a header row and the outcome
/// in the first column.
pub fn fit_csv(text: &str) -> Result<Vec<FitRow>, String> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let names: Vec<String> = rdr
        .headers()
        .map_err(|e| e.to_string())?
        .iter()
        .map(str::to_owned)
        .collect();
    if names.len() < 2 {
        return Err("need an outcome column and at least one predictor".into());
    }
    let mut cols = vec![Vec::new(); names.len()];
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        for (j, field) in rec.iter().enumerate() {
            let v: f64 = field
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| {
                    format!("row {}, column {} ({}): '{field}'", i + 1, j + 1, names[j])
                })?;
            cols[j].push(v);
        }
    }
    let y = cols.remove(0);
    let mut design = vec![vec![1.0; y.len()]];
    design.extend(cols);
    let d = Dataset::new(y, Matrix::from_columns(&design), None).map_err(|e| e.to_string())?;
    let fit = ols_fit(&d).map_err(|e| e.to_string())?;
    let se = |e| estimate(&fit, e, false).map(|c| c.standard_errors());
    let classical = se(Estimator::Classical).map_err(|e| e.to_string())?;
    let hc0 = se(Estimator::HC0).map_err(|e| e.to_string())?;
    // HC3 is undefined with a leverage-one row; report the rest anyway
    let hc3 = se(Estimator::HC3).ok();
    let mut labels = vec!["(intercept)".to_owned()];
    labels.extend(names.into_iter().skip(1));
    Ok((0..d.p())
        .map(|j| FitRow {
            name: labels[j].clone(),
            estimate: fit.beta[j],
            classical: classical[j],
            hc0: hc0[j],
            hc3: hc3.as_ref().map(|v| v[j]),
            ratio: divergence_ratio(hc0[j], classical[j]).ok(),
        })
        .collect())
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsValue> {
    r.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string()))
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = limitCurve)]
pub fn limit_curve_js(var0: f64, var1: f64, points: usize) -> Result<String, JsValue> {
    to_js(limit_curve(var0, var1, points))
}

#[wasm_bindgen(js_name = simulate)]
pub fn simulate_js(config_json: &str) -> Result<String, JsValue> {
    to_js(
        serde_json::from_str::<DemoConfig>(config_json)
            .map_err(|e| e.to_string())
            .and_then(|c| simulate(&c)),
    )
}

#[wasm_bindgen(js_name = fitCsv)]
pub fn fit_csv_js(text: &str) -> Result<String, JsValue> {
    to_js(fit_csv(text))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_crosses_at_half() {
        let c = limit_curve(2.0, 8.0, 9).unwrap();
        assert_eq!(c.len(), 9);
        assert_eq!(c[4].mu, 0.5);
        assert_eq!(c[4].robust, c[4].classical);
        assert!(c[0].classical < c[0].robust);
        assert!(c[8].classical > c[8].robust);
        assert!(limit_curve(2.0, 8.0, 0).is_err());
        assert!(limit_curve(-1.0, 8.0, 3).is_err());
    }

    #[test]
    fn small_simulation() {
        let cfg: DemoConfig = serde_json::from_str(r#"{"replicates": 400, "seed": 3}"#).unwrap();
        let s = simulate(&cfg).unwrap();
        assert_eq!(s.curves.len(), 2);
        assert_eq!(s.curves[0].grid.len(), s.curves[0].density.len());
        let hc0 = s.summary.get(Estimator::HC0).unwrap().mean_se;
        assert!((hc0 - 0.206).abs() < 0.01);
        let again = simulate(&cfg).unwrap();
        assert_eq!(again.summary, s.summary);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(serde_json::from_str::<DemoConfig>(r#"{"bogus": 1}"#).is_err());
        let cfg: DemoConfig = serde_json::from_str(r#"{"n": 10, "m": 10}"#).unwrap();
        assert!(simulate(&cfg).is_err());
    }

    #[test]
    fn hand_example_fit() {
        let rows = fit_csv("y,x\n3,1\n5,1\n2,0\n4,0\n").unwrap();
        assert_eq!(rows[1].name, "x");
        assert!((rows[1].estimate - 1.0).abs() < 1e-12);
        assert!((rows[1].classical - 1.0).abs() < 1e-12);
        assert!((rows[1].hc0 - 1.0).abs() < 1e-12);
        assert_eq!(rows[1].ratio.map(|r| (r - 1.0).abs() < 1e-12), Some(true));
        let err = fit_csv("y,x\n1,2\n3,zz\n").unwrap_err();
        assert!(err.contains("row 2, column 2"), "{err}");
    }

    #[test]
    fn exports_return_json() {
        let s = limit_curve_js(2.0, 8.0, 3).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v.as_array().unwrap().len(), 3);
        let f = fit_csv_js("y,x\n3,1\n5,1\n2,0\n4,0\n").unwrap();
        assert!(f.contains("\"name\":\"x\""));
    }
}
