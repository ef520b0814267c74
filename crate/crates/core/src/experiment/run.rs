use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{DtRule, ExperimentConfig, Mode};
use crate::dynamics::{build_tfim_hamiltonian, default_time_step, evolve_series, propagator, Hamiltonian, TimeSeries};
use crate::error::{Error, Result};
use crate::io;
use crate::ngrc::{
    amplitude_errors, assemble_training, feature_for, fidelity, pauli_expectation, predict_iterative_with_norms,
    predict_skip, train_weights_with, Pauli, TrainOptions, WeightModel,
};
use crate::state::StateVector;

pub const TRAIN_FILE: &str = "train.bin";
pub const TRAIN_TARGETS_FILE: &str = "train_targets.bin";
pub const PREDICT_FILE: &str = "predict.bin";
pub const TARGETS_FILE: &str = "targets.bin";
pub const MODEL_FILE: &str = "model.qngrc";
pub const METRICS_FILE: &str = "metrics.csv";
pub const PREDICTED_FILE: &str = "predicted.bin";
pub const RESOLVED_CONFIG_FILE: &str = "config.resolved.toml";

/// The four series an experiment consumes.
#[derive(Debug, Clone)]
pub struct Dataset {
    /// `n_train + (m-1) delta` states from the training burn-in.
    pub train: TimeSeries,
    /// `n_train` states from `burn_in + (m-1) delta + tau`.
    pub train_targets: TimeSeries,
    /// Skip mode: `n_predict + (m-1) delta` input states; iterative mode: the
    /// `(m-1) delta + 1` seed states.
    pub predict: TimeSeries,
    /// `n_predict` exact states matching the predictions.
    pub targets: TimeSeries,
}

/// Hamiltonian and step of the configured system.
pub fn system(cfg: &ExperimentConfig) -> Result<(Hamiltonian, f64)> {
    let s = &cfg.system;
    let h = build_tfim_hamiltonian(s.n_qubits, s.coupling, s.field)?;
    let dt = match s.dt {
        DtRule::Fixed(dt) => dt,
        DtRule::Named(_) => default_time_step(&h)?,
    };
    Ok((h, dt))
}

/// First target step: `burn_in + (m-1) delta + tau`.
fn first_target(cfg: &ExperimentConfig) -> u64 {
    let history = ((cfg.training.m - 1) * cfg.training.delta) as u64;
    cfg.prediction.burn_in + history + cfg.training.tau
}

/// Generates every series from `|0...0>`. Long jumps are exact; consecutive
/// states come from repeated application of the one-step propagator.
pub fn generate(cfg: &ExperimentConfig) -> Result<Dataset> {
    cfg.validate()?;
    let (h, dt) = system(cfg)?;
    let p = propagator(&h, dt)?;
    let s0 = StateVector::zero(cfg.system.n_qubits);
    let t = &cfg.training;
    let history = (t.m - 1) * t.delta;
    let model = h.model();
    let tag = |mut s: TimeSeries, origin: &str| {
        s.model = model;
        s.origin = origin.into();
        s
    };
    let train = tag(
        evolve_series(&p, &s0, t.n_train + history, t.burn_in)?,
        "training inputs",
    );
    let train_targets = tag(
        evolve_series(&p, &s0, t.n_train, t.burn_in + history as u64 + t.tau)?,
        "training targets",
    );
    let n_inputs = match cfg.prediction.mode {
        Mode::Skip => cfg.prediction.n_predict + history,
        Mode::Iterative => history + 1,
    };
    let predict = tag(
        evolve_series(&p, &s0, n_inputs, cfg.prediction.burn_in)?,
        "prediction inputs",
    );
    let targets = tag(
        evolve_series(&p, &s0, cfg.prediction.n_predict, first_target(cfg))?,
        "prediction targets",
    );
    Ok(Dataset {
        train,
        train_targets,
        predict,
        targets,
    })
}

/// Trains `W` on the configured layout.
pub fn train(cfg: &ExperimentConfig, train: &TimeSeries, train_targets: &TimeSeries) -> Result<WeightModel> {
    let fc = cfg.feature_config()?;
    let (x, y) = assemble_training(train, train_targets, &fc, cfg.training.layout)?;
    let opts = TrainOptions {
        pinv_rtol: cfg.training.pinv_rtol,
        ..TrainOptions::default()
    };
    train_weights_with(&x, &y, &fc, opts)
}

/// One row of the per-step metrics file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub step: u64,
    pub fidelity: f64,
    #[serde(rename = "exp_X0")]
    pub x0_pred: f64,
    #[serde(rename = "exp_X0_target")]
    pub x0_target: f64,
    #[serde(rename = "exp_X0X1")]
    pub x0x1_pred: f64,
    #[serde(rename = "exp_X0X1_target")]
    pub x0x1_target: f64,
    /// `|W x|` before normalization.
    pub raw_norm: f64,
    pub amp_err_raw: f64,
    pub amp_err_aligned: f64,
}

/// Metrics of `pred` against `target`.
pub fn metric_row(step: u64, pred: &StateVector, target: &StateVector, raw_norm: f64) -> Result<MetricRow> {
    let x0 = [(0, Pauli::X)];
    let x0x1 = [(0, Pauli::X), (1, Pauli::X)];
    let amp = amplitude_errors(pred, target)?;
    Ok(MetricRow {
        step,
        fidelity: fidelity(pred, target)?,
        x0_pred: pauli_expectation(pred, &x0)?,
        x0_target: pauli_expectation(target, &x0)?,
        x0x1_pred: pauli_expectation(pred, &x0x1)?,
        x0x1_target: pauli_expectation(target, &x0x1)?,
        raw_norm,
        amp_err_raw: amp.raw,
        amp_err_aligned: amp.phase_aligned,
    })
}

fn check_compatible(cfg: &ExperimentConfig, model: &WeightModel) -> Result<()> {
    let c = &model.config;
    let t = &cfg.training;
    if (c.m, c.p, c.delta, c.tau) != (t.m, t.p, t.delta, t.tau) || model.layout != t.layout {
        return Err(Error::InvalidArgument(format!(
            "model trained with m = {}, p = {}, delta = {}, tau = {}, layout {:?}; config has m = {}, p = {}, delta = {}, tau = {}, layout {:?}",
            c.m, c.p, c.delta, c.tau, model.layout, t.m, t.p, t.delta, t.tau, t.layout
        )));
    }
    if cfg.prediction.mode == Mode::Iterative && c.tau != 1 {
        return Err(Error::InvalidArgument(format!(
            "iterative prediction needs a model trained with tau = 1, got tau = {}",
            c.tau
        )));
    }
    Ok(())
}

/// Predictions and per-step metrics in the configured mode.
pub fn predict(
    cfg: &ExperimentConfig,
    model: &WeightModel,
    inputs: &TimeSeries,
    targets: &TimeSeries,
) -> Result<(Vec<MetricRow>, TimeSeries)> {
    check_compatible(cfg, model)?;
    let fc = model.config;
    let history = fc.history();
    let n = cfg.prediction.n_predict;
    let first = inputs.start_step + history as u64 + fc.tau;
    let target_at = |j: usize| {
        targets.at_step(first + j as u64).ok_or_else(|| {
            Error::DimensionMismatch(format!(
                "targets cover steps {}..{}, prediction {j} needs step {}",
                targets.start_step,
                targets.end_step(),
                first + j as u64
            ))
        })
    };
    let (states, norms): (Vec<StateVector>, Vec<f64>) = match cfg.prediction.mode {
        Mode::Skip => {
            if inputs.len() < n + history {
                return Err(Error::DimensionMismatch(format!(
                    "{} input states for {n} predictions with {history} steps of history",
                    inputs.len()
                )));
            }
            (0..n)
                .into_par_iter()
                .map(|j| {
                    let k = j + history;
                    let delays: Vec<&StateVector> = (0..fc.m).map(|i| &inputs.states[k - i * fc.delta]).collect();
                    let p = predict_skip(model, &feature_for(&delays, &fc, model.layout)?)?;
                    Ok((p.state, p.raw_norm))
                })
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .unzip()
        }
        Mode::Iterative => {
            if inputs.len() < history + 1 {
                return Err(Error::DimensionMismatch(format!(
                    "{} seed states, the delay embedding needs {}",
                    inputs.len(),
                    history + 1
                )));
            }
            let (series, norms) = predict_iterative_with_norms(model, &inputs.states[..=history], n)?;
            (series.states, norms)
        }
    };
    let rows = states
        .par_iter()
        .zip(norms.par_iter())
        .enumerate()
        .map(|(j, (s, &norm))| metric_row(first + j as u64, s, target_at(j)?, norm))
        .collect::<Result<Vec<_>>>()?;
    let mut predicted = TimeSeries::new(states, inputs.dt, first, "predictions")?;
    predicted.model = inputs.model;
    Ok((rows, predicted))
}

pub fn write_metrics(path: &Path, rows: &[MetricRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let rows = r.deserialize().collect::<std::result::Result<Vec<MetricRow>, _>>()?;
    if rows.is_empty() {
        return Err(Error::Format(format!("{} holds no metric rows", path.display())));
    }
    Ok(rows)
}

/// Output directory: `out` if given, else the configured one.
pub fn output_dir(cfg: &ExperimentConfig, out: Option<&Path>) -> PathBuf {
    out.map_or_else(|| cfg.output.dir.clone(), Path::to_path_buf)
}

/// Writes the four series and the resolved configuration.
pub fn cmd_generate(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out)?;
    let data = generate(cfg)?;
    let files = [
        (TRAIN_FILE, &data.train),
        (TRAIN_TARGETS_FILE, &data.train_targets),
        (PREDICT_FILE, &data.predict),
        (TARGETS_FILE, &data.targets),
    ];
    let mut written = Vec::new();
    for (name, series) in files {
        let path = out.join(name);
        io::write_series(&path, series)?;
        written.push(path);
    }
    let path = out.join(RESOLVED_CONFIG_FILE);
    fs::write(&path, cfg.to_toml()?)?;
    written.push(path);
    Ok(written)
}

/// Opens an input file, naming it in any I/O error.
pub(super) fn with_path<T>(path: &Path, read: impl FnOnce(&Path) -> Result<T>) -> Result<T> {
    read(path).map_err(|e| match e {
        Error::Io(e) => Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))),
        other => other,
    })
}

/// Trains on the generated series in `out` and writes the model file.
pub fn cmd_train(cfg: &ExperimentConfig, out: &Path) -> Result<WeightModel> {
    let train_series = with_path(&out.join(TRAIN_FILE), io::read_series_any)?;
    let targets = with_path(&out.join(TRAIN_TARGETS_FILE), io::read_series_any)?;
    let model = train(cfg, &train_series, &targets)?;
    io::write_model(&out.join(MODEL_FILE), &model)?;
    Ok(model)
}

/// Predicts from the files in `out`, writing the metrics and predicted states.
pub fn cmd_predict(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<MetricRow>> {
    let model = with_path(&out.join(MODEL_FILE), io::read_model)?;
    let inputs = with_path(&out.join(PREDICT_FILE), io::read_series_any)?;
    let targets = with_path(&out.join(TARGETS_FILE), io::read_series_any)?;
    let (rows, predicted) = predict(cfg, &model, &inputs, &targets)?;
    write_metrics(&out.join(METRICS_FILE), &rows)?;
    io::write_series(&out.join(PREDICTED_FILE), &predicted)?;
    Ok(rows)
}
