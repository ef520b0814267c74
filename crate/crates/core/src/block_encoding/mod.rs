//! Block encodings: a circuit `U` on `a` ancillas followed by `s` system
//! qubits, with `alpha (<0|^a (x) I) U (|0>^a (x) I)` approximating a matrix
//! `A` to within `epsilon` in spectral norm.
//!
//! Ancillas are the most significant qubits, so the encoded block is the
//! top-left `2^s x 2^s` corner of `U`. Rectangular matrices are zero-padded
//! into that corner; `block_dims` remembers the logical shape.
//!
//! Composite encodings are kept as gate lists. Constructions that transform
//! singular values re-embed the resulting matrix as one dense dilation gate
//! acting on the last ancilla and the system register, leaving any other
//! ancillas idle.

mod cost;

use faer::Mat;
use rayon::prelude::*;

pub use cost::{log_factor, CostEstimate};

use crate::error::{Error, Result};
use crate::linalg::{pad, psd_sqrt, qubits_for, spectral_norm, sub, thin_svd, unitarity_residual, CMat, ONE, ZERO};
use crate::sim::{Circuit, SparseState};
use crate::state::StateVector;

/// Largest system register whose block [`BlockEncoding::block`] extracts.
pub const MAX_BLOCK_QUBITS: usize = 12;

/// Post-selection probabilities below this are rejected.
pub const MIN_SUCCESS_PROBABILITY: f64 = 1e-14;

/// Relative slack allowed when checking `alpha >= |A|`.
const ALPHA_SLACK: f64 = 1e-12;

/// Eigenvalue clamp for the dilation square roots.
const SQRT_CLAMP: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct BlockEncoding {
    circuit: Circuit,
    alpha: f64,
    n_ancilla: usize,
    epsilon: f64,
    system_qubits: usize,
    block_dims: (usize, usize),
    queries: f64,
}

impl BlockEncoding {
    /// Wraps a circuit on `n_ancilla + system_qubits` qubits.
    pub fn from_circuit(
        circuit: Circuit,
        n_ancilla: usize,
        alpha: f64,
        epsilon: f64,
        block_dims: (usize, usize),
        queries: f64,
    ) -> Result<Self> {
        if circuit.n_qubits() < n_ancilla {
            return Err(Error::DimensionMismatch(format!(
                "{n_ancilla} ancillas on a {}-qubit circuit",
                circuit.n_qubits()
            )));
        }
        let system_qubits = circuit.n_qubits() - n_ancilla;
        let full = 1usize << system_qubits;
        if block_dims.0 > full || block_dims.1 > full {
            return Err(Error::DimensionMismatch(format!(
                "block {}x{} does not fit {system_qubits} system qubits",
                block_dims.0, block_dims.1
            )));
        }
        if !(alpha > 0.0) || !alpha.is_finite() || !(epsilon >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "need alpha > 0 and epsilon >= 0, got alpha = {alpha}, epsilon = {epsilon}"
            )));
        }
        Ok(Self {
            circuit,
            alpha,
            n_ancilla,
            epsilon,
            system_qubits,
            block_dims,
            queries,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n_ancilla(&self) -> usize {
        self.n_ancilla
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn system_qubits(&self) -> usize {
        self.system_qubits
    }

    pub fn total_qubits(&self) -> usize {
        self.n_ancilla + self.system_qubits
    }

    pub fn block_dims(&self) -> (usize, usize) {
        self.block_dims
    }

    /// Oracle queries spent per application of the encoding.
    pub fn queries(&self) -> f64 {
        self.queries
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub(crate) fn set_alpha(&mut self, alpha: f64) {
        self.alpha = alpha;
    }

    pub(crate) fn set_epsilon(&mut self, epsilon: f64) {
        self.epsilon = epsilon;
    }

    pub(crate) fn set_queries(&mut self, queries: f64) {
        self.queries = queries;
    }

    /// Same encoding with a different logical shape inside the padded block.
    pub fn with_block_dims(mut self, rows: usize, cols: usize) -> Result<Self> {
        let full = 1usize << self.system_qubits;
        if rows > full || cols > full {
            return Err(Error::DimensionMismatch(format!(
                "block {rows}x{cols} does not fit {} system qubits",
                self.system_qubits
            )));
        }
        self.block_dims = (rows, cols);
        Ok(self)
    }

    /// `(<0|^a (x) I) U (|0>^a (x) I)`, the full `2^s x 2^s` block.
    pub fn block(&self) -> Result<CMat> {
        if self.system_qubits > MAX_BLOCK_QUBITS {
            return Err(Error::InvalidArgument(format!(
                "block extraction limited to {MAX_BLOCK_QUBITS} system qubits, encoding has {}",
                self.system_qubits
            )));
        }
        let dim = 1usize << self.system_qubits;
        let n = self.total_qubits();
        let cols: Vec<Vec<_>> = (0..dim)
            .into_par_iter()
            .map(|j| {
                let mut s = SparseState::basis(n, j);
                self.circuit.apply(&mut s)?;
                Ok(s.register_amplitudes(self.n_ancilla, self.system_qubits))
            })
            .collect::<Result<_>>()?;
        Ok(Mat::from_fn(dim, dim, |i, j| cols[j][i]))
    }

    /// `alpha` times the block, cut to `block_dims`.
    pub fn encoded(&self) -> Result<CMat> {
        let b = self.block()?;
        let (r, c) = self.block_dims;
        Ok(Mat::from_fn(r, c, |i, j| b[(i, j)] * self.alpha))
    }

    /// Dense unitary; subject to the simulator's dimension cap.
    pub fn unitary(&self) -> Result<CMat> {
        self.circuit.to_dense()
    }

    /// Frobenius norm of `U^dagger U - I`, computed densely.
    pub fn unitarity_residual(&self) -> Result<f64> {
        unitarity_residual(self.unitary()?.as_ref())
    }
}

/// `|A - alpha (<0|^a (x) I) U (|0>^a (x) I)|`, with `A` zero-padded to the block.
pub fn verify_encoding(be: &BlockEncoding, a: &CMat) -> Result<f64> {
    let full = 1usize << be.system_qubits;
    if a.nrows() > full || a.ncols() > full {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix against a {full}x{full} block",
            a.nrows(),
            a.ncols()
        )));
    }
    let block = be.block()?;
    let scaled = Mat::from_fn(full, full, |i, j| block[(i, j)] * be.alpha);
    let padded = pad(a.as_ref(), full, full);
    spectral_norm(sub(padded.as_ref(), scaled.as_ref()).as_ref())
}

/// `(alpha, 1, 0)`-encoding of `a` by unitary dilation.
pub fn embed(a: &CMat, alpha: f64) -> Result<BlockEncoding> {
    embed_with_ancillas(a, alpha, 1)
}

/// Dilation `[[B, sqrt(I - B B^dagger)], [sqrt(I - B^dagger B), -B^dagger]]`
/// with `B = a/alpha` zero-padded to a square power-of-two size, placed on
/// the last of `n_ancilla` ancillas and the system register.
pub fn embed_with_ancillas(a: &CMat, alpha: f64, n_ancilla: usize) -> Result<BlockEncoding> {
    let s = qubits_for(a.nrows().max(a.ncols()));
    embed_on(a, alpha, n_ancilla, s)
}

pub(crate) fn embed_on(a: &CMat, alpha: f64, n_ancilla: usize, system_qubits: usize) -> Result<BlockEncoding> {
    if n_ancilla == 0 {
        return Err(Error::InvalidArgument("a dilation needs at least one ancilla".into()));
    }
    let norm = spectral_norm(a.as_ref())?;
    if !(alpha > 0.0) || norm > alpha * (1.0 + ALPHA_SLACK) {
        return Err(Error::InfeasibleSubnormalization { alpha, norm });
    }
    let full = 1usize << system_qubits;
    if a.nrows() > full || a.ncols() > full {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix does not fit {system_qubits} system qubits",
            a.nrows(),
            a.ncols()
        )));
    }
    let b = Mat::from_fn(full, full, |i, j| {
        if i < a.nrows() && j < a.ncols() {
            a[(i, j)] / alpha
        } else {
            ZERO
        }
    });
    let u = dilation(&b)?;
    let mut circuit = Circuit::new(n_ancilla + system_qubits);
    let targets: Vec<usize> = (n_ancilla - 1..n_ancilla + system_qubits).collect();
    circuit.unitary("dilation", &targets, u)?;
    BlockEncoding::from_circuit(circuit, n_ancilla, alpha, 0.0, (a.nrows(), a.ncols()), 0.0)
}

fn dilation(b: &CMat) -> Result<CMat> {
    let n = b.nrows();
    let mut left = b * b.adjoint();
    let mut right = b.adjoint() * b;
    for i in 0..n {
        for j in 0..n {
            let id = if i == j { ONE } else { ZERO };
            left[(i, j)] = id - left[(i, j)];
            right[(i, j)] = id - right[(i, j)];
        }
    }
    let top_right = psd_sqrt(left.as_ref(), SQRT_CLAMP)?;
    let bottom_left = psd_sqrt(right.as_ref(), SQRT_CLAMP)?;
    Ok(Mat::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, true) => b[(i, j)],
        (true, false) => top_right[(i, j - n)],
        (false, true) => bottom_left[(i - n, j)],
        (false, false) => -b[(j - n, i - n)].conj(),
    }))
}

/// Caps the singular values of `m` at `1`; used before re-embedding matrices
/// whose norm may exceed one by approximation error.
pub(crate) fn clip_to_contraction(m: &CMat) -> Result<CMat> {
    let svd = thin_svd(m.as_ref())?;
    if svd.s.first().is_none_or(|&s| s <= 1.0) {
        return Ok(m.clone());
    }
    let us = Mat::from_fn(svd.u.nrows(), svd.s.len(), |i, j| svd.u[(i, j)] * svd.s[j].min(1.0));
    Ok(&us * svd.v.adjoint())
}

/// Product encoding of `A B` on `[A ancillas][B ancillas][system]`:
/// `(alpha beta, a + b, alpha eps_B + beta eps_A)`.
pub fn multiply(be_a: &BlockEncoding, be_b: &BlockEncoding) -> Result<BlockEncoding> {
    if be_a.system_qubits != be_b.system_qubits {
        return Err(Error::DimensionMismatch(format!(
            "system registers of {} and {} qubits",
            be_a.system_qubits, be_b.system_qubits
        )));
    }
    let full = 1usize << be_a.system_qubits;
    let (inner_a, inner_b) = (be_a.block_dims.1, be_b.block_dims.0);
    if inner_a != inner_b && inner_a != full && inner_b != full {
        return Err(Error::DimensionMismatch(format!(
            "inner dimensions {inner_a} and {inner_b} differ"
        )));
    }
    let (a, b, s) = (be_a.n_ancilla, be_b.n_ancilla, be_a.system_qubits);
    let mut circuit = Circuit::new(a + b + s);
    let map_b: Vec<usize> = (a..a + b).chain(a + b..a + b + s).collect();
    let map_a: Vec<usize> = (0..a).chain(a + b..a + b + s).collect();
    circuit.append_mapped(&be_b.circuit, &map_b)?;
    circuit.append_mapped(&be_a.circuit, &map_a)?;
    BlockEncoding::from_circuit(
        circuit,
        a + b,
        be_a.alpha * be_b.alpha,
        be_a.alpha * be_b.epsilon + be_b.alpha * be_a.epsilon,
        (be_a.block_dims.0, be_b.block_dims.1),
        be_a.queries + be_b.queries,
    )
}

/// Encoding of `|0><0| (x) A` with one more system qubit, placed as the most
/// significant system qubit. Parameters are unchanged.
pub fn extend_system(be: &BlockEncoding) -> Result<BlockEncoding> {
    if be.n_ancilla == 0 {
        return Err(Error::InvalidArgument(
            "extending the system register needs an ancilla to flag the new branch".into(),
        ));
    }
    let (a, s) = (be.n_ancilla, be.system_qubits);
    let new = a;
    let mut circuit = Circuit::new(a + s + 1);
    let map: Vec<usize> = (0..a).chain(a + 1..a + 1 + s).collect();
    circuit.append_controlled(&be.circuit, &map, &[(new, false)])?;
    circuit.pauli_x("flag", 0)?;
    circuit.control_last(new, true)?;
    BlockEncoding::from_circuit(circuit, a, be.alpha, be.epsilon, be.block_dims, be.queries)
}

/// Encoding of `X_I = [[X, sqrt(lambda) I], [0, 0]]` with parameters
/// `(alpha_X + sqrt(lambda), a_X, eps_X)`; the added system qubit is the
/// most significant one.
///
/// The block is re-embedded exactly from the extracted `alpha_X` block, so
/// any encoding error of `be_x` carries over unchanged.
pub fn augment_tikhonov(be_x: &BlockEncoding, lambda: f64) -> Result<BlockEncoding> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "lambda must be nonnegative, got {lambda}"
        )));
    }
    let x = be_x.block()?;
    let n = x.nrows();
    let r = lambda.sqrt();
    let xi = Mat::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, true) => x[(i, j)] * be_x.alpha,
        (true, false) if i == j - n => crate::c64::new(r, 0.0),
        _ => ZERO,
    });
    let alpha = be_x.alpha + r;
    let mut out = embed_on(&xi, alpha, be_x.n_ancilla.max(1), be_x.system_qubits + 1)?;
    out.epsilon = be_x.epsilon;
    out.queries = be_x.queries;
    Ok(out)
}

/// Re-embeds `be` at `sqrt(2) |A_ref|` with one more ancilla and error `delta`.
///
/// Requires `be.epsilon <= delta / 2`. The cost factor is
/// `(alpha/|A|) max(1, ln(|A|/delta))`.
pub fn preamplify(be: &BlockEncoding, a_ref: &CMat, delta: f64) -> Result<(BlockEncoding, CostEstimate)> {
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    if be.epsilon > delta / 2.0 {
        return Err(Error::precondition(
            "pre-amplification requires epsilon <= delta/2",
            format!("epsilon = {:e}, delta/2 = {:e}", be.epsilon, delta / 2.0),
        ));
    }
    let norm_a = spectral_norm(a_ref.as_ref())?;
    if norm_a == 0.0 {
        return Err(Error::InvalidArgument("reference matrix is zero".into()));
    }
    let block = be.block()?;
    let m = Mat::from_fn(block.nrows(), block.ncols(), |i, j| block[(i, j)] * be.alpha);
    let alpha = std::f64::consts::SQRT_2 * norm_a;
    let mut out = embed_on(&m, alpha, be.n_ancilla + 1, be.system_qubits)?;
    out.block_dims = be.block_dims;
    out.epsilon = delta;
    let factor = (be.alpha / norm_a) * log_factor(norm_a / delta);
    out.queries = factor * be.queries.max(1.0);
    let cost = CostEstimate::new(
        "preamplification",
        "(alpha/|A|) * log(|A|/delta) * T_A",
        "T_A",
        factor,
        out.queries,
    )
    .with("alpha", be.alpha)
    .with("norm_A", norm_a)
    .with("delta", delta);
    cost.validate()?;
    Ok((out, cost))
}

/// Applies `U` to `|0>^a |b>` and post-selects the ancillas on `|0>^a`.
///
/// Returns the normalized post-selected system state, cut to the block's
/// row count, and the success probability `|A b|^2 / alpha^2`.
pub fn apply_to_state(be: &BlockEncoding, b: &StateVector) -> Result<(StateVector, f64)> {
    if b.dim() != be.block_dims.1 {
        return Err(Error::DimensionMismatch(format!(
            "state of dimension {} for a block with {} columns",
            b.dim(),
            be.block_dims.1
        )));
    }
    let mut amps = b.amplitudes().to_vec();
    amps.resize(1 << be.system_qubits, ZERO);
    let mut full = vec![ZERO; 1 << be.total_qubits()];
    full[..amps.len()].copy_from_slice(&amps);
    let mut state = SparseState::from_dense(be.total_qubits(), &full)?;
    be.circuit.apply(&mut state)?;
    let fixed: Vec<(usize, bool)> = (0..be.n_ancilla).map(|q| (q, false)).collect();
    let probability = state.project(&fixed);
    if probability < MIN_SUCCESS_PROBABILITY {
        return Err(Error::DegeneratePostSelection {
            probability,
            threshold: MIN_SUCCESS_PROBABILITY,
        });
    }
    let mut out = state.register_amplitudes(be.n_ancilla, be.system_qubits);
    out.truncate(be.block_dims.0);
    Ok((StateVector::normalized(out)?, probability))
}
