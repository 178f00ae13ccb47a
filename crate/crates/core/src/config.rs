//! Experiment configuration (JSON in), CSV artifact writers, and the run
//! manifest that makes every output reproducible from its directory alone.

use crate::boundary::Boundary;
use crate::error::{Error, Result};
use crate::increments::IncrementModel;
use crate::ladder::RenewalTable;
use crate::passage::VgTrace;
use crate::stats::SurvivalCurve;
use crate::whbound::BoundReport;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

/// Increment model description as it appears in config files.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelSpec {
    Lattice {
        support: Vec<i64>,
        probs: Vec<f64>,
        /// Permit nonzero drift (the estimators that need the zero-mean
        /// normalization will refuse such a model themselves).
        #[serde(default)]
        allow_drift: bool,
    },
    Stable {
        alpha: f64,
        beta: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    Pareto {
        alpha: f64,
        weight_right: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl ModelSpec {
    pub fn build(&self) -> Result<IncrementModel> {
        match self {
            ModelSpec::Lattice {
                support,
                probs,
                allow_drift,
            } => {
                if *allow_drift {
                    IncrementModel::lattice_drifted(support.clone(), probs.clone())
                } else {
                    IncrementModel::lattice(support.clone(), probs.clone())
                }
            }
            ModelSpec::Stable { alpha, beta, scale } => {
                IncrementModel::stable(*alpha, *beta, *scale)
            }
            ModelSpec::Pareto {
                alpha,
                weight_right,
            } => IncrementModel::pareto(*alpha, *weight_right),
        }
    }
}

fn default_paths() -> u64 {
    100_000
}

fn default_horizon() -> u64 {
    4096
}

fn default_seed() -> u64 {
    1
}

/// One experiment: a model, an optional boundary, and sampling budgets.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    #[serde(default)]
    pub boundary: Option<Boundary>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_paths")]
    pub n_paths: u64,
    #[serde(default = "default_horizon")]
    pub horizon: u64,
    /// Explicit n grid; defaults to dyadic points up to the horizon.
    #[serde(default)]
    pub n_grid: Option<Vec<u64>>,
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.build()?;
        if let Some(b) = &self.boundary {
            b.validate()?;
        }
        if self.n_paths == 0 || self.horizon == 0 {
            return Err(Error::InvalidConfig(
                "n_paths and horizon must be positive".into(),
            ));
        }
        if let Some(grid) = &self.n_grid {
            if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidConfig("n_grid must be increasing".into()));
            }
            if *grid.last().unwrap() > self.horizon {
                return Err(Error::InvalidConfig("n_grid exceeds horizon".into()));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<u64> {
        match &self.n_grid {
            Some(g) => g.clone(),
            None => dyadic_grid(1, self.horizon),
        }
    }
}

/// Powers of two in [lo, hi], plus hi itself.
pub fn dyadic_grid(lo: u64, hi: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut n = lo.max(1);
    while n <= hi {
        out.push(n);
        n *= 2;
    }
    if *out.last().unwrap_or(&0) != hi {
        out.push(hi);
    }
    out
}

pub fn survival_csv(c: &SurvivalCurve) -> String {
    let mut s = String::from("n,prob,stderr,provenance\n");
    for i in 0..c.n.len() {
        let _ = writeln!(s, "{},{},{},{}", c.n[i], c.prob[i], c.stderr[i], c.provenance);
    }
    s
}

pub fn renewal_csv(t: &RenewalTable) -> String {
    let mut s = String::from("x,value,stderr,n_paths\n");
    for i in 0..t.grid.len() {
        let _ = writeln!(s, "{},{},{},{}", t.grid[i], t.values[i], t.stderr[i], t.n_paths);
    }
    s
}

pub fn vg_csv(t: &VgTrace) -> String {
    let mut s = String::from("n,value,stderr\n");
    for i in 0..t.n.len() {
        let _ = writeln!(s, "{},{},{}", t.n[i], t.value[i], t.stderr[i]);
    }
    s
}

pub fn kernel_csv(rows: &[(u64, i64, f64)]) -> String {
    let mut s = String::from("x,y,prob\n");
    for &(x, y, p) in rows {
        let _ = writeln!(s, "{x},{y},{p}");
    }
    s
}

pub fn whbound_csv(report: &BoundReport) -> String {
    let mut s = String::from("n,b,r,q,p_Tg,p_T0\n");
    for row in &report.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            row.n, row.b, row.r, row.q, row.p_tg, row.p_t0
        );
    }
    s
}

/// Written next to every artifact set; enough to rerun the experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub workers: usize,
    pub version: String,
    pub wall_time_secs: f64,
}

impl Manifest {
    pub fn write(&self, dir: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(dir.join("manifest.json"), text)?;
        Ok(())
    }
}

/// The JSON body printed on validation failures (exit code 2).
pub fn error_json(err: &Error) -> String {
    serde_json::json!({
        "error": err.to_string(),
    })
    .to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::Provenance;

    #[test]
    fn config_round_trip_and_validation() {
        let text = r#"{
            "model": {"kind": "lattice", "support": [-1, 1], "probs": [0.5, 0.5]},
            "boundary": {"kind": "power", "amplitude": 1.0, "gamma": 0.25, "offset": 1.0},
            "seed": 7,
            "n_paths": 1000,
            "horizon": 64
        }"#;
        let cfg: ExperimentConfig = serde_json::from_str(text).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.seed, 7);
        assert!(cfg.model.build().unwrap().as_lattice().is_some());
        assert_eq!(cfg.grid(), vec![1, 2, 4, 8, 16, 32, 64]);
    }

    #[test]
    fn unknown_fields_rejected() {
        let text = r#"{
            "model": {"kind": "lattice", "support": [-1, 1], "probs": [0.5, 0.5]},
            "typo_field": 3
        }"#;
        assert!(serde_json::from_str::<ExperimentConfig>(text).is_err());
    }

    #[test]
    fn drift_requires_opt_in() {
        let drifted = r#"{"kind": "lattice", "support": [-2, 1], "probs": [0.25, 0.75]}"#;
        let spec: ModelSpec = serde_json::from_str(drifted).unwrap();
        assert!(spec.build().is_err());
        let ok = r#"{"kind": "lattice", "support": [-2, 1], "probs": [0.25, 0.75], "allow_drift": true}"#;
        let spec: ModelSpec = serde_json::from_str(ok).unwrap();
        assert!(spec.build().is_ok());
    }

    #[test]
    fn csv_headers() {
        let c = SurvivalCurve {
            n: vec![1],
            prob: vec![0.5],
            stderr: vec![0.0],
            n_paths: 10,
            provenance: Provenance::DpExact,
        };
        let csv = survival_csv(&c);
        assert!(csv.starts_with("n,prob,stderr,provenance\n"));
        assert!(csv.contains("1,0.5,0,dp-exact"));
    }

    #[test]
    fn dyadic_grid_includes_endpoint() {
        assert_eq!(dyadic_grid(1, 10), vec![1, 2, 4, 8, 10]);
        assert_eq!(dyadic_grid(4, 16), vec![4, 8, 16]);
    }
}
