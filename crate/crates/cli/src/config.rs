use std::path::Path;

use serde::Deserialize;

use sandwich_lab::{DgpSpec, DisturbanceSpec, Estimator, SimulationOptions};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KdeConfig {
    pub bandwidth: Option<f64>,
}

/// Simulation config file. Every key is optional; missing keys take the
/// default two-group Laplace design (n = 1000, m = 200, scales 1 and 2,
/// 25000 replicates, classical and HC0).
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub n: usize,
    pub m: usize,
    pub beta0: f64,
    pub beta1: f64,
    pub dist0: DisturbanceSpec,
    pub dist1: DisturbanceSpec,
    pub replicates: usize,
    pub estimators: Vec<Estimator>,
    pub kde: Option<KdeConfig>,
    pub classical_dof: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        let spec = DgpSpec::two_group_laplace();
        let opts = SimulationOptions::default();
        SimConfig {
            n: spec.n,
            m: spec.m,
            beta0: spec.beta0,
            beta1: spec.beta1,
            dist0: spec.dist0,
            dist1: spec.dist1,
            replicates: opts.replicates,
            estimators: opts.estimators,
            kde: None,
            classical_dof: false,
        }
    }
}

impl SimConfig {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        match path {
            None => Ok(SimConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p.display(), e))?;
                Self::parse(&text).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))
            }
        }
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let cfg: SimConfig =
            serde_json::from_str(text).map_err(|e| CliError::Input(format!("config: {e}")))?;
        cfg.spec()?;
        if cfg.replicates == 0 {
            return Err(CliError::Input(
                "config: replicates must be at least 1".into(),
            ));
        }
        if cfg.estimators.is_empty() {
            return Err(CliError::Input(
                "config: estimators must not be empty".into(),
            ));
        }
        if let Some(KdeConfig { bandwidth: Some(h) }) = cfg.kde {
            if !(h > 0.0 && h.is_finite()) {
                return Err(CliError::Input(format!(
                    "config: kde bandwidth must be positive, got {h}"
                )));
            }
        }
        Ok(cfg)
    }

    pub fn spec(&self) -> CliResult<DgpSpec> {
        DgpSpec::new(
            self.n, self.m, self.beta0, self.beta1, self.dist0, self.dist1,
        )
        .map_err(|e| CliError::Input(format!("config: {e}")))
    }
}
