use super::encoders::{build_u_f, build_u_lin, feature_block_encoding, target_block_encoding, FeatureCircuit};
use super::oracle::{oracle_from_series_seeded, DataOracle};
use super::CircuitDims;
use crate::block_encoding::{BlockEncoding, CostEstimate};
use crate::dynamics::TimeSeries;
use crate::error::{Error, Result};
use crate::ngrc::FeatureConfig;
use crate::qsvt::{augmented_condition_number, build_weight_encoding};

/// Inputs of the training half of the quantum pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineRequest {
    pub config: FeatureConfig,
    /// Training columns `T`, a power of two.
    pub n_train: usize,
    pub delta_w: f64,
    /// Seed of the oracle completions.
    pub seed: u64,
}

/// Every stage of the quantum training pipeline on one series.
#[derive(Debug, Clone)]
pub struct QuantumPipeline {
    pub dims: CircuitDims,
    /// `O_0, O_{-delta}, ...`, offsets relative to the newest delay state.
    pub feature_oracles: Vec<DataOracle>,
    pub target_oracle: DataOracle,
    pub u_f: FeatureCircuit,
    pub be_x: BlockEncoding,
    pub be_y: BlockEncoding,
    pub be_w: BlockEncoding,
    /// Condition number of the augmented feature matrix.
    pub kappa: f64,
    pub delta_y: f64,
    pub costs: Vec<CostEstimate>,
}

/// Builds the feature, target and weight encodings for training column `k`
/// at series position `(m-1) delta + k` and target position
/// `(m-1) delta + k + tau`, `k = 0..T`.
pub fn build_pipeline(series: &TimeSeries, req: &PipelineRequest) -> Result<QuantumPipeline> {
    let cfg = req.config;
    cfg.validate()?;
    let d = crate::linalg::qubits_for(series.dim());
    let dims = CircuitDims::for_training(d, req.n_train)?;
    let history = cfg.history() as i64;
    let tau = i64::try_from(cfg.tau).map_err(|_| Error::InvalidArgument("tau too large".into()))?;
    let feature_oracles = (0..cfg.m)
        .map(|j| oracle_from_series_seeded(series, history - (j * cfg.delta) as i64, req.n_train, req.seed))
        .collect::<Result<Vec<_>>>()?;
    let target_oracle = oracle_from_series_seeded(series, history + tau, req.n_train, req.seed)?;
    let u_f = build_u_f(&build_u_lin(&feature_oracles, cfg.m)?, cfg.p)?;
    let be_x = feature_block_encoding(&u_f, &dims)?;
    let kappa = augmented_condition_number(&be_x, cfg.lambda)?;
    // strictly inside the bound so that rounding cannot trip the check
    let delta_y = req.delta_w / (4.0 * kappa) * (1.0 - 1e-9);
    let (be_y, y_cost) = target_block_encoding(&target_oracle, &dims, delta_y)?;
    let (be_w, w_cost) = build_weight_encoding(&be_x, &be_y, cfg.lambda, req.delta_w, Some(&dims))?;
    Ok(QuantumPipeline {
        dims,
        feature_oracles,
        target_oracle,
        u_f,
        be_x,
        be_y,
        be_w,
        kappa,
        delta_y,
        costs: vec![y_cost, w_cost],
    })
}
