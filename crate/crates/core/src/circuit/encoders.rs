use std::sync::Arc;

use faer::Mat;

use super::oracle::DataOracle;
use super::CircuitDims;
use crate::block_encoding::{preamplify, BlockEncoding, CostEstimate};
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::sim::Circuit;

/// Largest feature register [`build_u_f`] builds.
pub const MAX_FEATURE_QUBITS: usize = 24;

/// State-preparation circuit `|0>^f |k> -> |x_k> |k>` on `[feature f][index t]`.
#[derive(Debug, Clone)]
pub struct FeatureCircuit {
    pub circuit: Circuit,
    pub feature_qubits: usize,
    pub index_qubits: usize,
    /// Oracle applications per prepared state.
    pub oracle_calls: usize,
}

impl FeatureCircuit {
    pub fn n_qubits(&self) -> usize {
        self.feature_qubits + self.index_qubits
    }
}

/// `(H^{(x) eta} (x) I) . sum_j |j><j| (x) O_{-j delta}` with `eta = log2 m`,
/// mapping `|0>|0>^d|k>` to `sum_j |j>|s_{k - j delta}>|k> / sqrt(m)`.
pub fn build_u_lin(oracles: &[DataOracle], m: usize) -> Result<FeatureCircuit> {
    if !m.is_power_of_two() {
        return Err(Error::InvalidArgument(format!("m = {m} is not a power of two")));
    }
    if oracles.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "{} oracles supplied for m = {m}",
            oracles.len()
        )));
    }
    let (d, t, count) = (oracles[0].data_qubits(), oracles[0].index_qubits(), oracles[0].count());
    if oracles
        .iter()
        .any(|o| o.data_qubits() != d || o.index_qubits() != t || o.count() != count)
    {
        return Err(Error::DimensionMismatch(
            "oracles differ in register widths or index range".into(),
        ));
    }
    let eta = m.trailing_zeros() as usize;
    let mut circuit = Circuit::new(eta + d + t);
    for q in 0..eta {
        circuit.hadamard("U^lin/H-layer", q)?;
    }
    let mut branches: Vec<Option<Arc<CMat>>> = vec![None; m << t];
    for (j, o) in oracles.iter().enumerate() {
        for (k, u) in o.loaders().iter().enumerate() {
            branches[(j << t) | k] = Some(u.clone());
        }
        o.record_call();
    }
    let selectors: Vec<usize> = (0..eta).chain(eta + d..eta + d + t).collect();
    let data: Vec<usize> = (eta..eta + d).collect();
    circuit.select("U^lin/SELECT", &selectors, &data, branches)?;
    Ok(FeatureCircuit {
        circuit,
        feature_qubits: eta + d,
        index_qubits: t,
        oracle_calls: m,
    })
}

/// `U^f = (|0><0| (x) (U^lin)^{(x)p} + |1><1| (x) I^{(x)(p-1)} (x) U^lin) (H (x) I)`
/// on `[c][lin_1]...[lin_p][index]`, all copies sharing the index register.
pub fn build_u_f(u_lin: &FeatureCircuit, p: usize) -> Result<FeatureCircuit> {
    if p == 0 {
        return Err(Error::InvalidArgument("p must be at least 1".into()));
    }
    let l = u_lin.feature_qubits;
    let t = u_lin.index_qubits;
    let f = p
        .checked_mul(l)
        .map(|x| x + 1)
        .filter(|&f| f <= MAX_FEATURE_QUBITS)
        .ok_or_else(|| {
            Error::InvalidArgument(format!(
                "feature register of {p} x {l} + 1 qubits exceeds the cap of {MAX_FEATURE_QUBITS}"
            ))
        })?;
    let mut circuit = Circuit::new(f + t);
    circuit.hadamard("U^f/H", 0)?;
    for r in 0..p {
        let map: Vec<usize> = (1 + r * l..1 + (r + 1) * l).chain(f..f + t).collect();
        if r + 1 < p {
            circuit.append_controlled(&u_lin.circuit, &map, &[(0, false)])?;
        } else {
            circuit.append_mapped(&u_lin.circuit, &map)?;
        }
    }
    Ok(FeatureCircuit {
        circuit,
        feature_qubits: f,
        index_qubits: t,
        oracle_calls: p * u_lin.oracle_calls,
    })
}

/// `(I (x) H^{(x)t} (x) I) . SWAP . U` on two `n_reg`-qubit registers, where
/// `U` prepares `|v_k>` in the low qubits of the first register from `|k>` in
/// the low qubits of the second. The block is `[v_0 ... v_{T-1}] / sqrt(T)`.
fn index_encoding(
    prep: &Circuit,
    payload_qubits: usize,
    rows: usize,
    dims: &CircuitDims,
    queries: f64,
) -> Result<BlockEncoding> {
    let n = dims.n_reg;
    let t = dims.t;
    if payload_qubits > n || prep.n_qubits() != payload_qubits + t {
        return Err(Error::DimensionMismatch(format!(
            "circuit on {} + {t} qubits does not fit registers of {n}",
            payload_qubits
        )));
    }
    let mut circuit = Circuit::new(2 * n);
    let map: Vec<usize> = (n - payload_qubits..n).chain(2 * n - t..2 * n).collect();
    circuit.append_mapped(prep, &map)?;
    for q in 0..n {
        circuit.swap("SWAP", q, n + q)?;
    }
    for q in n - t..n {
        circuit.hadamard("H-layer", q)?;
    }
    BlockEncoding::from_circuit(
        circuit,
        n,
        (dims.n_train as f64).sqrt(),
        0.0,
        (rows, dims.n_train),
        queries,
    )
}

/// `(sqrt(T), n_reg, 0)`-encoding of the feature matrix whose columns are the
/// states prepared by `u_f`.
pub fn feature_block_encoding(u_f: &FeatureCircuit, dims: &CircuitDims) -> Result<BlockEncoding> {
    if u_f.index_qubits != dims.t {
        return Err(Error::DimensionMismatch(format!(
            "feature circuit has {} index qubits, dims have t = {}",
            u_f.index_qubits, dims.t
        )));
    }
    if u_f.feature_qubits > dims.n_reg {
        return Err(Error::DimensionMismatch(format!(
            "{} feature qubits exceed the register width {}",
            u_f.feature_qubits, dims.n_reg
        )));
    }
    index_encoding(
        &u_f.circuit,
        u_f.feature_qubits,
        1 << u_f.feature_qubits,
        dims,
        u_f.oracle_calls as f64,
    )
}

/// Encoding of `Y` with parameters `(sqrt(2) |Y|, n_reg + 1, delta_Y)`: the
/// `(sqrt(T), n_reg, 0)` index encoding of the oracle's outputs, pre-amplified.
pub fn target_block_encoding(
    oracle_tau: &DataOracle,
    dims: &CircuitDims,
    delta_y: f64,
) -> Result<(BlockEncoding, CostEstimate)> {
    let raw = raw_target_encoding(oracle_tau, dims)?;
    let block = raw.block()?;
    let (rows, cols) = raw.block_dims();
    let root = raw.alpha();
    let y = Mat::from_fn(rows, cols, |i, j| block[(i, j)] * root);
    preamplify(&raw, &y, delta_y)
}

/// The `(sqrt(T), n_reg, 0)` index encoding of `Y` before pre-amplification.
pub fn raw_target_encoding(oracle_tau: &DataOracle, dims: &CircuitDims) -> Result<BlockEncoding> {
    if oracle_tau.data_qubits() != dims.d || oracle_tau.index_qubits() != dims.t {
        return Err(Error::DimensionMismatch(format!(
            "oracle on {} + {} qubits, dims have d = {}, t = {}",
            oracle_tau.data_qubits(),
            oracle_tau.index_qubits(),
            dims.d,
            dims.t
        )));
    }
    if oracle_tau.count() != dims.n_train {
        return Err(Error::DimensionMismatch(format!(
            "oracle covers {} indices, T = {}",
            oracle_tau.count(),
            dims.n_train
        )));
    }
    oracle_tau.record_call();
    index_encoding(oracle_tau.circuit(), dims.d, dims.big_d, dims, 1.0)
}
