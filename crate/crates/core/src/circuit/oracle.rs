use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dynamics::TimeSeries;
use crate::error::{Error, Result};
use crate::linalg::{complete_to_unitary, qubits_for, CMat};
use crate::sim::Circuit;
use crate::state::StateVector;

/// Seed of the deterministic completion of oracle columns.
pub const ORACLE_SEED: u64 = 0x5eed_0dac_1e00;

/// Index-conditioned state loader `|0>^d |k> -> |s_{k+offset}> |k>` for
/// `k < count`, acting as identity on the remaining index values.
///
/// Qubits are ordered `[data d][index t]` with `t = ceil(log2 count)`.
#[derive(Debug)]
pub struct DataOracle {
    offset: i64,
    d: usize,
    t: usize,
    states: Vec<StateVector>,
    loaders: Vec<Arc<CMat>>,
    circuit: Circuit,
    calls: AtomicU64,
}

impl Clone for DataOracle {
    fn clone(&self) -> Self {
        Self {
            offset: self.offset,
            d: self.d,
            t: self.t,
            states: self.states.clone(),
            loaders: self.loaders.clone(),
            circuit: self.circuit.clone(),
            calls: AtomicU64::new(self.calls()),
        }
    }
}

impl DataOracle {
    /// Oracle depositing `states[k]` on index `k`; `offset` is a label only.
    pub fn from_states(states: Vec<StateVector>, offset: i64, seed: u64) -> Result<Self> {
        let first = states
            .first()
            .ok_or_else(|| Error::InvalidArgument("an oracle needs at least one state".into()))?;
        let dim = first.dim();
        if !dim.is_power_of_two() || dim < 2 {
            return Err(Error::DimensionMismatch(format!(
                "state dimension {dim} is not a power of two"
            )));
        }
        if let Some(s) = states.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch(format!(
                "oracle states of dimensions {dim} and {}",
                s.dim()
            )));
        }
        let d = qubits_for(dim);
        let t = qubits_for(states.len());
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (offset as u64).rotate_left(17));
        let loaders: Vec<Arc<CMat>> = states
            .iter()
            .map(|s| Arc::new(complete_to_unitary(s.amplitudes(), &mut rng)))
            .collect();
        let mut circuit = Circuit::new(d + t);
        let data: Vec<usize> = (0..d).collect();
        let index: Vec<usize> = (d..d + t).collect();
        circuit.select("O", &index, &data, loaders.iter().cloned().map(Some).collect())?;
        Ok(Self {
            offset,
            d,
            t,
            states,
            loaders,
            circuit,
            calls: AtomicU64::new(0),
        })
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn data_qubits(&self) -> usize {
        self.d
    }

    pub fn index_qubits(&self) -> usize {
        self.t
    }

    /// Number of specified index values.
    pub fn count(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub(crate) fn loaders(&self) -> &[Arc<CMat>] {
        &self.loaders
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    /// Times the oracle has been placed into a circuit.
    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub(crate) fn record_call(&self) {
        self.calls.fetch_add(1, Ordering::Relaxed);
    }

    /// Dense unitary on `d + t` qubits.
    pub fn to_dense(&self) -> Result<CMat> {
        self.circuit.to_dense()
    }
}

/// Oracle with `k -> series.states[k + offset]` for `k = 0..count`, with the
/// unspecified columns filled by seeded orthonormal completion.
pub fn oracle_from_series(series: &TimeSeries, offset: i64, count: usize) -> Result<DataOracle> {
    oracle_from_series_seeded(series, offset, count, ORACLE_SEED)
}

pub fn oracle_from_series_seeded(series: &TimeSeries, offset: i64, count: usize, seed: u64) -> Result<DataOracle> {
    if count == 0 {
        return Err(Error::InvalidArgument("oracle count must be positive".into()));
    }
    let lo = offset;
    let hi = offset + count as i64 - 1;
    if lo < 0 || hi >= series.len() as i64 {
        return Err(Error::IndexOutOfRange(format!(
            "offset {offset} with {count} indices needs positions {lo}..={hi}, series has {}",
            series.len()
        )));
    }
    let states = series.states[lo as usize..=hi as usize].to_vec();
    DataOracle::from_states(states, offset, seed)
}
