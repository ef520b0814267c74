use faer::Mat;
use serde::Serialize;

use super::config::ExperimentConfig;
use crate::block_encoding::{embed_with_ancillas, verify_encoding, BlockEncoding, CostEstimate};
use crate::circuit::{
    build_pipeline, iterative_qubits, oracle_from_series_seeded, prediction_circuit, toy_series, CircuitDims,
    DataOracle, PipelineRequest, QuantumPipeline,
};
use crate::dynamics::TimeSeries;
use crate::error::{Error, Result};
use crate::linalg::{matvec, spectral_norm, vec_norm, CMat};
use crate::ngrc::{
    assemble_features, feature_for, fidelity, predict_skip, train_weights, FeatureConfig, FeatureMatrix, Layout,
    WeightModel,
};
use crate::qsvt::encoded_spectrum;
use crate::state::StateVector;

/// Largest spectral-norm mismatch tolerated between `alpha * block` and the
/// encoded matrix for stages with no declared error.
const EXACT_STAGE_TOL: f64 = 1e-9;

/// Success probabilities of exact encodings must match `|W x|^2/alpha^2` this closely.
pub const PROBABILITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct StageReport {
    pub name: String,
    pub alpha: f64,
    pub n_ancilla: usize,
    pub epsilon: f64,
    /// `|A - alpha block|`.
    pub residual: f64,
    /// Frobenius norm of `U^dagger U - I` for the stages whose unitary is formed.
    pub unitarity: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AncillaReport {
    pub w: usize,
    pub w_prime: usize,
    pub weight_encoding_ancillas: usize,
    pub weight_encoding_qubits: usize,
    pub iterative_qubits_k2: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PredictionCheck {
    pub index: usize,
    pub fidelity_vs_classical: f64,
    pub probability: f64,
    pub exact_probability: f64,
    pub expected_exact_probability: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub dims: CircuitDims,
    pub lambda: f64,
    pub kappa: f64,
    pub delta_w: f64,
    pub delta_y: f64,
    pub ancillas: AncillaReport,
    pub stages: Vec<StageReport>,
    /// `|W_quantum - W_classical|`.
    pub weight_error: f64,
    /// Error of the weight encoding used for prediction, tightened to the
    /// prediction precondition when needed.
    pub prediction_delta_w: f64,
    pub prediction_delta: f64,
    pub predictions: Vec<PredictionCheck>,
    pub min_prediction_fidelity: f64,
    pub max_exact_probability_error: f64,
    pub costs: Vec<CostEstimate>,
    pub passed: bool,
}

/// Series, classical model and quantum pipeline of the desk-scale instance.
#[derive(Debug, Clone)]
pub struct ToyInstance {
    pub series: TimeSeries,
    pub config: FeatureConfig,
    pub n_train: usize,
    pub n_predict: usize,
    pub x: CMat,
    pub y: CMat,
    pub classical: WeightModel,
}

impl ToyInstance {
    /// Position of the newest delay state of training column `k`.
    pub fn train_position(&self, k: usize) -> usize {
        self.config.history() + k
    }

    /// Position of the newest delay state of prediction `k`.
    pub fn predict_position(&self, k: usize) -> usize {
        self.config.history() + self.n_train + k
    }

    /// Padded feature state of prediction `k`.
    pub fn predict_feature(&self, k: usize) -> Result<Vec<crate::c64>> {
        let pos = self.predict_position(k);
        let c = &self.config;
        let delays: Vec<&StateVector> = (0..c.m).map(|j| &self.series.states[pos - j * c.delta]).collect();
        feature_for(&delays, c, Layout::Padded)
    }

    /// `O~_{-j delta}` for `j = 0..m`, covering the prediction indices.
    pub fn prediction_oracles(&self, seed: u64) -> Result<Vec<DataOracle>> {
        let c = &self.config;
        (0..c.m)
            .map(|j| {
                let offset = (self.predict_position(0) - j * c.delta) as i64;
                oracle_from_series_seeded(&self.series, offset, self.n_predict, seed)
            })
            .collect()
    }

    pub fn pipeline(&self, delta_w: f64, seed: u64) -> Result<QuantumPipeline> {
        build_pipeline(
            &self.series,
            &PipelineRequest {
                config: self.config,
                n_train: self.n_train,
                delta_w,
                seed,
            },
        )
    }
}

/// Toy dynamics of `d` qubits with the padded-layout classical model trained
/// on the first `n_train` columns.
pub fn toy_instance(d: usize, dt: f64, config: FeatureConfig, n_train: usize, n_predict: usize) -> Result<ToyInstance> {
    config.validate()?;
    let history = config.history();
    let tau = usize::try_from(config.tau).map_err(|_| Error::InvalidArgument("tau too large".into()))?;
    let series = toy_series(d, history + n_train + n_predict + tau, dt)?;
    let features = assemble_features(&series, &config, Layout::Padded)?;
    let x = Mat::from_fn(features.rows(), n_train, |i, j| features.columns[(i, j)]);
    let y = Mat::from_fn(series.dim(), n_train, |i, j| {
        series.states[history + j + tau].amplitudes()[i]
    });
    let classical = train_weights(
        &FeatureMatrix {
            columns: x.clone(),
            layout: Layout::Padded,
        },
        &y,
        &config,
    )?;
    Ok(ToyInstance {
        series,
        config,
        n_train,
        n_predict,
        x,
        y,
        classical,
    })
}

fn stage(name: &str, be: &BlockEncoding, a: &CMat, unitarity: bool) -> Result<StageReport> {
    Ok(StageReport {
        name: name.into(),
        alpha: be.alpha(),
        n_ancilla: be.n_ancilla(),
        epsilon: be.epsilon(),
        residual: verify_encoding(be, a)?,
        unitarity: if unitarity {
            Some(be.unitarity_residual()?)
        } else {
            None
        },
    })
}

/// Runs the feature, target, weight and prediction stages on the configured
/// toy instance and compares each against its classical counterpart.
pub fn verify_quantum(cfg: &ExperimentConfig) -> Result<VerificationReport> {
    let q = &cfg.quantum;
    if !q.enable {
        return Err(Error::Config {
            field: "quantum.enable".into(),
            message: "the quantum section is disabled".into(),
        });
    }
    let t = &cfg.training;
    let fc = FeatureConfig::new(t.m, t.p, t.delta, q.tau, q.lambda)?;
    let inst = toy_instance(q.d, q.dt, fc, q.n_train, q.n_predict)?;
    let pl = inst.pipeline(q.delta_w, cfg.seed)?;
    let w = &inst.classical.w;

    let mut stages = vec![
        stage("feature X", &pl.be_x, &inst.x, true)?,
        stage("target Y", &pl.be_y, &inst.y, false)?,
    ];
    let weight = stage("weight W", &pl.be_w, w, false)?;
    let weight_error = weight.residual;
    stages.push(weight);

    // the prediction circuit needs delta_W <= delta |W| / (4 kappa_W)
    let spec = encoded_spectrum(&pl.be_w)?;
    let bound = q.delta * spec.norm / (4.0 * spec.kappa);
    let pred_pl = if pl.be_w.epsilon() > bound {
        inst.pipeline(0.9 * bound, cfg.seed)?
    } else {
        pl.clone()
    };
    let out = prediction_circuit(
        &pred_pl.be_w,
        &inst.prediction_oracles(cfg.seed)?,
        fc.p,
        &pred_pl.dims,
        q.delta,
        pred_pl.kappa,
    )?;

    let norm_w = spectral_norm(w.as_ref())?;
    let be_exact = embed_with_ancillas(w, norm_w, 1)?;
    let exact = prediction_circuit(
        &be_exact,
        &inst.prediction_oracles(cfg.seed)?,
        fc.p,
        &pred_pl.dims,
        q.delta,
        pred_pl.kappa,
    )?;
    stages.push(stage("exact W", &be_exact, w, true)?);

    let mut predictions = Vec::with_capacity(q.n_predict);
    for k in 0..q.n_predict {
        let x = inst.predict_feature(k)?;
        let classical = predict_skip(&inst.classical, &x)?;
        let wx = vec_norm(&matvec(w.as_ref(), &x));
        predictions.push(PredictionCheck {
            index: k,
            fidelity_vs_classical: fidelity(&out.states[k], &classical.state)?,
            probability: out.probabilities[k],
            exact_probability: exact.probabilities[k],
            expected_exact_probability: (wx / norm_w).powi(2),
        });
    }
    let min_prediction_fidelity = predictions
        .iter()
        .map(|p| p.fidelity_vs_classical)
        .fold(f64::INFINITY, f64::min);
    let max_exact_probability_error = predictions
        .iter()
        .map(|p| (p.exact_probability - p.expected_exact_probability).abs())
        .fold(0.0, f64::max);

    let mut costs = pl.costs.clone();
    costs.push(out.cost);
    let passed = weight_error <= q.delta_w
        && min_prediction_fidelity >= 1.0 - q.delta
        && max_exact_probability_error <= PROBABILITY_TOL
        && stages[..2].iter().all(|s| s.residual <= s.epsilon.max(EXACT_STAGE_TOL));

    Ok(VerificationReport {
        dims: pl.dims,
        lambda: q.lambda,
        kappa: pl.kappa,
        delta_w: q.delta_w,
        delta_y: pl.delta_y,
        ancillas: AncillaReport {
            w: pl.dims.w,
            w_prime: pl.dims.w_prime,
            weight_encoding_ancillas: pl.be_w.n_ancilla(),
            weight_encoding_qubits: pl.be_w.total_qubits(),
            iterative_qubits_k2: iterative_qubits(&pl.dims, 2),
        },
        stages,
        weight_error,
        prediction_delta_w: pred_pl.be_w.epsilon(),
        prediction_delta: q.delta,
        predictions,
        min_prediction_fidelity,
        max_exact_probability_error,
        costs,
        passed,
    })
}

/// Runs [`verify_quantum`] and writes the report as JSON.
pub fn cmd_verify_quantum(cfg: &ExperimentConfig, out: &std::path::Path) -> Result<VerificationReport> {
    std::fs::create_dir_all(out)?;
    let report = verify_quantum(cfg)?;
    let file = std::fs::File::create(out.join(VERIFY_FILE))?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), &report)?;
    Ok(report)
}

pub const VERIFY_FILE: &str = "verify_quantum.json";
