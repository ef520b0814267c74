//! Circuit-level constructions for degree-2, two-delay features: data
//! oracles, the `U^lin` and `U^f` feature encoders, the feature and target
//! block encodings, the prediction and recursive circuits, ancilla
//! accounting and the error recurrence of the recursive circuit.
//!
//! Registers are `n_reg = max(2d + 3, t)` qubits wide; payloads sit in the
//! low (least significant) qubits of a register.

mod encoders;
mod oracle;
mod pipeline;
mod prediction;

use serde::{Deserialize, Serialize};

pub use encoders::{
    build_u_f, build_u_lin, feature_block_encoding, raw_target_encoding, target_block_encoding, FeatureCircuit,
    MAX_FEATURE_QUBITS,
};
pub use oracle::{oracle_from_series, oracle_from_series_seeded, DataOracle, ORACLE_SEED};
pub use pipeline::{build_pipeline, PipelineRequest, QuantumPipeline};
pub use prediction::{
    iterative_circuit, iterative_qubits, prediction_circuit, IterativeOutput, PerturbationHook, PredictionOutput,
    MAX_ITERATIVE_QUBITS,
};

use crate::dynamics::{evolve_series, propagator, Hamiltonian, TimeSeries};
use crate::error::{Error, Result};
use crate::linalg::{qubits_for, CMat};
use crate::sim::{Circuit, GateSummary};
use crate::state::StateVector;

/// Register widths and ancilla counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitDims {
    pub d: usize,
    #[serde(rename = "D")]
    pub big_d: usize,
    pub t: usize,
    #[serde(rename = "T")]
    pub n_train: usize,
    /// `max(2d + 3, t)`.
    pub n_reg: usize,
    /// `2 n_reg + 2`.
    pub w: usize,
    /// `w + max(0, t - 2d - 3)`.
    pub w_prime: usize,
}

/// Dimensions for `d` qubits per state and a `t`-qubit index register (`T = 2^t`).
pub fn ancilla_accounting(d: usize, t: usize) -> CircuitDims {
    let n_reg = (2 * d + 3).max(t);
    let w = 2 * n_reg + 2;
    CircuitDims {
        d,
        big_d: 1 << d,
        t,
        n_train: 1 << t,
        n_reg,
        w,
        w_prime: w + t.saturating_sub(2 * d + 3),
    }
}

impl CircuitDims {
    /// Dimensions for `n_train` training columns, which must be a power of two
    /// so that the Hadamard layer weights every column by exactly `1/sqrt(T)`.
    pub fn for_training(d: usize, n_train: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("d must be at least 1".into()));
        }
        if !n_train.is_power_of_two() {
            return Err(Error::InvalidArgument(format!("T = {n_train} is not a power of two")));
        }
        Ok(ancilla_accounting(d, qubits_for(n_train)))
    }
}

/// Minimal error budget `delta_j = 3 kappa_W (delta_{j-1} + delta_{j-2})`,
/// `delta_0 = delta_1 = delta_seed`, for levels `0..=k`.
pub fn error_propagation_bound(delta_seed: f64, kappa_w: f64, k: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(k + 1);
    for j in 0..=k {
        let v = if j < 2 {
            delta_seed
        } else {
            3.0 * kappa_w * (out[j - 1] + out[j - 2])
        };
        out.push(v);
    }
    out
}

/// Hamiltonian of the small test dynamics: `h X - J Z` on one qubit for
/// `d = 1`, the periodic transverse-field Ising chain otherwise.
pub fn toy_hamiltonian(d: usize, coupling: f64, field: f64) -> Result<Hamiltonian> {
    match d {
        0 => Err(Error::InvalidArgument("d must be at least 1".into())),
        1 => {
            let m = CMat::from_fn(2, 2, |i, j| match (i, j) {
                (0, 0) => crate::c64::new(-coupling, 0.0),
                (1, 1) => crate::c64::new(coupling, 0.0),
                _ => crate::c64::new(field, 0.0),
            });
            Hamiltonian::from_matrix(1, m)
        }
        _ => crate::dynamics::build_tfim_hamiltonian(d, coupling, field),
    }
}

/// `len` states of the toy dynamics from `|0...0>` with step `dt`.
pub fn toy_series(d: usize, len: usize, dt: f64) -> Result<TimeSeries> {
    let h = toy_hamiltonian(d, 0.5, 1.0)?;
    let p = propagator(&h, dt)?;
    evolve_series(&p, &StateVector::zero(d), len, 0)
}

/// Named contiguous register of a circuit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Register {
    pub name: String,
    pub start: usize,
    pub len: usize,
}

/// Inspection view of a circuit: its register map and block-level gates.
#[derive(Debug, Clone, Serialize)]
pub struct CircuitDescription {
    pub n_qubits: usize,
    pub registers: Vec<Register>,
    pub gates: Vec<GateSummary>,
}

pub fn describe_circuit(circuit: &Circuit, registers: &[(&str, usize)]) -> Result<CircuitDescription> {
    let total: usize = registers.iter().map(|r| r.1).sum();
    if total != circuit.n_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "registers cover {total} qubits, circuit has {}",
            circuit.n_qubits()
        )));
    }
    let mut start = 0;
    let registers = registers
        .iter()
        .map(|&(name, len)| {
            let r = Register {
                name: name.into(),
                start,
                len,
            };
            start += len;
            r
        })
        .collect();
    Ok(CircuitDescription {
        n_qubits: circuit.n_qubits(),
        registers,
        gates: circuit.describe(),
    })
}
