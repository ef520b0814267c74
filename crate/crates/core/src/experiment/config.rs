use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ngrc::{FeatureConfig, Layout, MAX_FEATURE_LENGTH};

/// Base profile reproducing the full-size skip-ahead experiment.
pub const PAPER_PROFILE: &str = r#"
seed = 0

[system]
n_qubits = 4
coupling = 0.5
field = 5.0
dt = "auto"

[training]
n_train = 20000
tau = 1000000
m = 2
p = 2
delta = 1
lambda = 0.0
burn_in = 10000
layout = "concatenated"
pinv_rtol = 1e-12

[prediction]
n_predict = 40000
mode = "skip"
burn_in = 2000000
iterative_lambda = 1e-3

[quantum]
enable = true
d = 1
n_train = 4
tau = 1
dt = 1.0
lambda = 0.1
delta_w = 1e-2
delta = 1e-2
n_predict = 4

[output]
dir = "out/paper"
"#;

/// Overrides applied on top of [`PAPER_PROFILE`] for the short CI run.
pub const CI_OVERRIDES: &str = r#"
[training]
n_train = 2000
tau = 10000

[prediction]
n_predict = 2000
burn_in = 100000

[output]
dir = "out/ci"
"#;

/// Time step: `"auto"` for `1/(200 E_max)`, or a positive number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DtRule {
    Fixed(f64),
    Named(DtName),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DtName {
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Skip,
    Iterative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub n_qubits: usize,
    pub coupling: f64,
    pub field: f64,
    pub dt: DtRule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingConfig {
    pub n_train: usize,
    pub tau: u64,
    pub m: usize,
    pub p: usize,
    pub delta: usize,
    pub lambda: f64,
    pub burn_in: u64,
    pub layout: Layout,
    pub pinv_rtol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictionConfig {
    pub n_predict: usize,
    pub mode: Mode,
    /// Step of the oldest state of the first prediction input.
    pub burn_in: u64,
    /// Regularization of the one-step model used by
    /// [`ExperimentConfig::iterative_counterpart`].
    pub iterative_lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantumConfig {
    pub enable: bool,
    pub d: usize,
    pub n_train: usize,
    pub tau: u64,
    pub dt: f64,
    pub lambda: f64,
    pub delta_w: f64,
    pub delta: f64,
    pub n_predict: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub system: SystemConfig,
    pub training: TrainingConfig,
    pub prediction: PredictionConfig,
    pub quantum: QuantumConfig,
    pub output: OutputConfig,
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn parse_table(text: &str, origin: &str) -> Result<toml::Table> {
    text.parse::<toml::Table>().map_err(|e| Error::Config {
        field: origin.into(),
        message: e.to_string(),
    })
}

fn cfg_err(field: &str, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        message: message.into(),
    }
}

impl ExperimentConfig {
    /// Built-in profile by name (`paper` or `ci`).
    pub fn profile(name: &str) -> Result<Self> {
        Self::resolve(name, None)
    }

    /// Profile `name` with the TOML document `overlay` merged over it.
    pub fn resolve(name: &str, overlay: Option<&str>) -> Result<Self> {
        let mut table = parse_table(PAPER_PROFILE, "profile")?;
        match name {
            "paper" => {}
            "ci" => merge(&mut table, parse_table(CI_OVERRIDES, "profile")?),
            other => {
                return Err(cfg_err(
                    "profile",
                    format!("unknown profile `{other}`, expected paper or ci"),
                ))
            }
        }
        if let Some(text) = overlay {
            merge(&mut table, parse_table(text, "config")?);
        }
        let cfg: Self = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config {
                field: "config".into(),
                message: e.message().to_string(),
            })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Profile `name` overlaid with the file at `path`, if any.
    pub fn load(path: Option<&Path>, name: &str) -> Result<Self> {
        let text = path.map(std::fs::read_to_string).transpose()?;
        Self::resolve(name, text.as_deref())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| cfg_err("config", e.to_string()))
    }

    pub fn feature_config(&self) -> Result<FeatureConfig> {
        let t = &self.training;
        FeatureConfig::new(t.m, t.p, t.delta, t.tau, t.lambda)
    }

    /// The one-step model whose rollout predicts the same absolute steps as
    /// this configuration's skip-ahead run: `tau = 1`, the iterative
    /// regularization, and prediction inputs shifted by `tau - 1`.
    pub fn iterative_counterpart(&self) -> Self {
        let mut c = self.clone();
        c.prediction.mode = Mode::Iterative;
        c.training.tau = 1;
        c.training.lambda = self.prediction.iterative_lambda;
        c.prediction.burn_in = self.prediction.burn_in + self.training.tau - 1;
        c
    }

    /// Checks every module precondition that can be checked without computing.
    pub fn validate(&self) -> Result<()> {
        let s = &self.system;
        if !(2..=14).contains(&s.n_qubits) {
            return Err(cfg_err(
                "system.n_qubits",
                format!("must lie in 2..=14, got {}", s.n_qubits),
            ));
        }
        if !s.coupling.is_finite() || !s.field.is_finite() {
            return Err(cfg_err("system", "coupling and field must be finite"));
        }
        match s.dt {
            DtRule::Fixed(dt) if !(dt > 0.0 && dt.is_finite()) => {
                return Err(cfg_err("system.dt", format!("must be positive or \"auto\", got {dt}")));
            }
            _ => {}
        }
        let t = &self.training;
        if t.m == 0 {
            return Err(cfg_err("training.m", "must be at least 1"));
        }
        if t.p == 0 {
            return Err(cfg_err("training.p", "must be at least 1"));
        }
        if t.delta == 0 {
            return Err(cfg_err("training.delta", "must be at least 1"));
        }
        if t.tau == 0 {
            return Err(cfg_err("training.tau", "must be at least 1"));
        }
        if !(t.lambda >= 0.0 && t.lambda.is_finite()) {
            return Err(cfg_err(
                "training.lambda",
                format!("must be nonnegative, got {}", t.lambda),
            ));
        }
        if t.n_train == 0 {
            return Err(cfg_err("training.n_train", "must be positive"));
        }
        if !(t.pinv_rtol > 0.0 && t.pinv_rtol < 1.0) {
            return Err(cfg_err(
                "training.pinv_rtol",
                format!("must lie in (0, 1), got {}", t.pinv_rtol),
            ));
        }
        let len = t.m * (1usize << s.n_qubits);
        let rows = crate::ngrc::feature_length(len, t.p).map_err(|e| cfg_err("training.p", e.to_string()))?;
        if rows.saturating_mul(t.n_train) > MAX_FEATURE_LENGTH * 16 {
            return Err(cfg_err(
                "training.n_train",
                format!("feature matrix {rows}x{} is too large", t.n_train),
            ));
        }
        let p = &self.prediction;
        if p.n_predict == 0 {
            return Err(cfg_err("prediction.n_predict", "must be positive"));
        }
        if p.mode == Mode::Iterative && t.tau != 1 {
            return Err(cfg_err(
                "training.tau",
                format!("iterative prediction needs a one-step model, got tau = {}", t.tau),
            ));
        }
        if !(p.iterative_lambda >= 0.0 && p.iterative_lambda.is_finite()) {
            return Err(cfg_err("prediction.iterative_lambda", "must be nonnegative"));
        }
        let q = &self.quantum;
        if q.enable {
            if !(1..=2).contains(&q.d) {
                return Err(cfg_err(
                    "quantum.d",
                    format!("desk-scale pipeline needs d in 1..=2, got {}", q.d),
                ));
            }
            if !q.n_train.is_power_of_two() || q.n_train > 8 {
                return Err(cfg_err(
                    "quantum.n_train",
                    format!("must be a power of two no larger than 8, got {}", q.n_train),
                ));
            }
            if !(q.dt > 0.0 && q.dt.is_finite()) {
                return Err(cfg_err("quantum.dt", "must be positive"));
            }
            if !(q.lambda >= 0.0 && q.lambda.is_finite()) {
                return Err(cfg_err("quantum.lambda", "must be nonnegative"));
            }
            for (name, v) in [("quantum.delta_w", q.delta_w), ("quantum.delta", q.delta)] {
                if !(v > 0.0 && v <= 1.0) {
                    return Err(cfg_err(name, format!("must lie in (0, 1], got {v}")));
                }
            }
            if q.tau == 0 {
                return Err(cfg_err("quantum.tau", "must be at least 1"));
            }
            if q.n_predict == 0 {
                return Err(cfg_err("quantum.n_predict", "must be positive"));
            }
        }
        Ok(())
    }
}
