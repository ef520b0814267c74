use std::ops::Index;

use faer::c64;

use crate::error::{Error, Result};
use crate::linalg::{inner, vec_norm, ZERO};

/// Tolerance used when a caller-supplied state must already be normalized.
pub const NORM_TOLERANCE: f64 = 1e-8;

/// Unit-norm amplitude vector over `n` qubits, dimension `2^n`.
///
/// Basis index convention: qubit 0 is the most significant bit, so
/// `|q0 q1 ... q_{n-1}>` has index `sum_q q * 2^(n-1-q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<c64>,
}

impl StateVector {
    /// Wraps `amplitudes`, checking the norm against [`NORM_TOLERANCE`].
    pub fn new(amplitudes: Vec<c64>) -> Result<Self> {
        let norm = vec_norm(&amplitudes);
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized {
                norm,
                tolerance: NORM_TOLERANCE,
            });
        }
        Ok(Self { amplitudes })
    }

    /// Rescales `v` to unit norm. Fails when `v` is numerically zero.
    pub fn normalized(mut v: Vec<c64>) -> Result<Self> {
        let norm = vec_norm(&v);
        if !(norm > 1e-300) || !norm.is_finite() {
            return Err(Error::DegeneratePrediction(format!(
                "cannot normalize a vector of norm {norm:e}"
            )));
        }
        v.iter_mut().for_each(|z| *z /= norm);
        Ok(Self { amplitudes: v })
    }

    /// Computational basis state `|index>` in dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = c64::new(1.0, 0.0);
        Self { amplitudes }
    }

    /// `|0...0>` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Self {
        Self::basis(1 << n_qubits, 0)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn amplitudes(&self) -> &[c64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<c64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        vec_norm(&self.amplitudes)
    }

    pub fn inner(&self, other: &StateVector) -> c64 {
        inner(&self.amplitudes, &other.amplitudes)
    }

    pub(crate) fn from_raw_unchecked(amplitudes: Vec<c64>) -> Self {
        Self { amplitudes }
    }
}

impl Index<usize> for StateVector {
    type Output = c64;

    fn index(&self, index: usize) -> &c64 {
        &self.amplitudes[index]
    }
}

impl AsRef<[c64]> for StateVector {
    fn as_ref(&self) -> &[c64] {
        &self.amplitudes
    }
}
