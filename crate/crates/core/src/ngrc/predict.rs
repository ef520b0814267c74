use faer::c64;

use super::features::{feature_vector, padded_feature_vector_general, FeatureConfig, Layout};
use super::ridge::WeightModel;
use crate::dynamics::TimeSeries;
use crate::error::{Error, Result};
use crate::linalg::{matvec, vec_norm};
use crate::state::StateVector;

/// Normalized prediction together with the raw `W x`.
#[derive(Debug, Clone)]
pub struct Prediction {
    pub state: StateVector,
    pub raw: Vec<c64>,
    pub raw_norm: f64,
}

/// Below this norm `W x` is treated as zero.
const DEGENERATE_NORM: f64 = 1e-300;

/// Feature vector of the delay states `newest_first[0], newest_first[1], ...`
/// (spacing already applied) in the given layout.
pub fn feature_for(newest_first: &[&StateVector], cfg: &FeatureConfig, layout: Layout) -> Result<Vec<c64>> {
    if newest_first.len() != cfg.m {
        return Err(Error::DimensionMismatch(format!(
            "{} delay states supplied, m = {}",
            newest_first.len(),
            cfg.m
        )));
    }
    let o: Vec<c64> = newest_first
        .iter()
        .flat_map(|s| s.amplitudes().iter().copied())
        .collect();
    match layout {
        Layout::Concatenated => feature_vector(&o, cfg.p),
        Layout::Padded => {
            let norm = vec_norm(&o);
            let unit: Vec<c64> = o.iter().map(|z| z / norm).collect();
            padded_feature_vector_general(&unit, cfg.p)
        }
    }
}

/// `W x / |W x|`.
pub fn predict_skip(model: &WeightModel, feature: &[c64]) -> Result<Prediction> {
    if feature.len() != model.w.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "feature of length {} for W with {} columns",
            feature.len(),
            model.w.ncols()
        )));
    }
    let raw = matvec(model.w.as_ref(), feature);
    let raw_norm = vec_norm(&raw);
    if !(raw_norm > DEGENERATE_NORM) || !raw_norm.is_finite() {
        return Err(Error::DegeneratePrediction(format!("|W x| = {raw_norm:e}")));
    }
    let state = StateVector::normalized(raw.clone())?;
    Ok(Prediction { state, raw, raw_norm })
}

/// Rolls a one-step model forward `n_steps` times from the most recent
/// `(m-1) delta + 1` states of `seed` (oldest first).
///
/// The returned series holds only predictions; `start_step` is 0 and callers
/// relabel it onto their time axis.
pub fn predict_iterative(model: &WeightModel, seed: &[StateVector], n_steps: usize) -> Result<TimeSeries> {
    predict_iterative_with_norms(model, seed, n_steps).map(|r| r.0)
}

/// [`predict_iterative`] also returning `|W x|` at every step.
pub fn predict_iterative_with_norms(
    model: &WeightModel,
    seed: &[StateVector],
    n_steps: usize,
) -> Result<(TimeSeries, Vec<f64>)> {
    let cfg = model.config;
    if cfg.tau != 1 {
        return Err(Error::InvalidArgument(format!(
            "iterative prediction needs a model trained with tau = 1, got tau = {}",
            cfg.tau
        )));
    }
    let needed = cfg.history() + 1;
    if seed.len() < needed {
        return Err(Error::InvalidArgument(format!(
            "seed has {} states, the delay embedding needs {needed}",
            seed.len()
        )));
    }
    let mut history: Vec<StateVector> = seed[seed.len() - needed..].to_vec();
    let mut out = Vec::with_capacity(n_steps);
    let mut norms = Vec::with_capacity(n_steps);
    for step in 0..n_steps {
        let newest = history.len() - 1;
        let delays: Vec<&StateVector> = (0..cfg.m).map(|j| &history[newest - j * cfg.delta]).collect();
        let x = feature_for(&delays, &cfg, model.layout)?;
        let pred = predict_skip(model, &x).map_err(|e| match e {
            Error::DegeneratePrediction(msg) => Error::DegeneratePrediction(format!("rollout step {step}: {msg}")),
            other => other,
        })?;
        history.remove(0);
        history.push(pred.state.clone());
        out.push(pred.state);
        norms.push(pred.raw_norm);
    }
    let series = TimeSeries {
        states: out,
        dt: 0.0,
        burn_in: 0,
        start_step: 0,
        origin: "iterative rollout".into(),
        model: None,
    };
    Ok((series, norms))
}
