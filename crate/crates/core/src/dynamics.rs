//! Exact unitary dynamics of small spin chains.
//!
//! Everything here works in the eigenbasis of the Hamiltonian, which is
//! computed once and cached: a propagator for step `dt` is
//! `V exp(-i diag(E) dt) V^dagger`, and long horizons are reached by scaling
//! the phase rather than by repeated multiplication.

use std::sync::{Arc, OnceLock};

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, matvec, max_abs_diff, CMat, ZERO};
use crate::state::{StateVector, NORM_TOLERANCE};

/// Parameters of the periodic transverse-field Ising chain
/// `H = -J sum_i Z_i Z_{i+1} + h sum_i X_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TfimParams {
    pub n_qubits: usize,
    pub coupling: f64,
    pub field: f64,
}

#[derive(Debug)]
pub struct Spectrum {
    pub energies: Vec<f64>,
    pub vectors: CMat,
}

impl Spectrum {
    /// `exp(-i H t) |psi>` for an arbitrary (possibly huge) `t`.
    pub fn evolve(&self, psi: &[c64], t: f64) -> Vec<c64> {
        let n = self.energies.len();
        let mut coeffs = vec![ZERO; n];
        for (k, c) in coeffs.iter_mut().enumerate() {
            let col = self.vectors.col(k);
            let overlap: c64 = col.iter().zip(psi).map(|(v, p)| v.conj() * p).sum();
            *c = overlap * c64::cis(-self.energies[k] * t);
        }
        matvec(self.vectors.as_ref(), &coeffs)
    }
}

#[derive(Debug)]
pub struct Hamiltonian {
    n_qubits: usize,
    model: Option<TfimParams>,
    matrix: CMat,
    spectrum: OnceLock<Arc<Spectrum>>,
}

impl Hamiltonian {
    /// Wraps an explicit Hermitian matrix of dimension `2^n_qubits`.
    pub fn from_matrix(n_qubits: usize, matrix: CMat) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "hamiltonian on {n_qubits} qubits must be {dim}x{dim}, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let adj = matrix.adjoint().to_owned();
        let asym = max_abs_diff(matrix.as_ref(), adj.as_ref());
        if asym > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "hamiltonian is not hermitian (max |H - H^dagger| = {asym:e})"
            )));
        }
        Ok(Self {
            n_qubits,
            model: None,
            matrix,
            spectrum: OnceLock::new(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn model(&self) -> Option<TfimParams> {
        self.model
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    /// Cached eigendecomposition.
    pub fn spectrum(&self) -> Result<Arc<Spectrum>> {
        if let Some(s) = self.spectrum.get() {
            return Ok(s.clone());
        }
        let (energies, vectors) = hermitian_eigen(self.matrix.as_ref())?;
        let s = Arc::new(Spectrum { energies, vectors });
        Ok(self.spectrum.get_or_init(|| s).clone())
    }

    /// `<psi|H|psi>`, real part.
    pub fn energy(&self, psi: &StateVector) -> f64 {
        let h_psi = matvec(self.matrix.as_ref(), psi.amplitudes());
        psi.amplitudes()
            .iter()
            .zip(&h_psi)
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }
}

/// Builds `-J sum_i Z_i Z_{i+1} + h sum_i X_i` with periodic wrap `i+1 mod n`.
pub fn build_tfim_hamiltonian(n_qubits: usize, coupling: f64, field: f64) -> Result<Hamiltonian> {
    if n_qubits < 2 {
        return Err(Error::InvalidArgument(format!(
            "periodic TFIM needs at least 2 qubits, got {n_qubits}"
        )));
    }
    if n_qubits > 14 {
        return Err(Error::InvalidArgument(format!(
            "dense TFIM limited to 14 qubits, got {n_qubits}"
        )));
    }
    let dim = 1usize << n_qubits;
    let bit = |index: usize, site: usize| (index >> (n_qubits - 1 - site)) & 1;
    let mut m = Mat::<c64>::zeros(dim, dim);
    for idx in 0..dim {
        let mut diag = 0.0;
        for site in 0..n_qubits {
            let next = (site + 1) % n_qubits;
            let zi = 1.0 - 2.0 * bit(idx, site) as f64;
            let zj = 1.0 - 2.0 * bit(idx, next) as f64;
            diag -= coupling * zi * zj;
        }
        m[(idx, idx)] = c64::new(diag, 0.0);
        for site in 0..n_qubits {
            let flipped = idx ^ (1 << (n_qubits - 1 - site));
            m[(flipped, idx)] += c64::new(field, 0.0);
        }
    }
    let mut h = Hamiltonian::from_matrix(n_qubits, m)?;
    h.model = Some(TfimParams {
        n_qubits,
        coupling,
        field,
    });
    Ok(h)
}

/// Largest eigenvalue `E_max`.
pub fn max_eigen_energy(h: &Hamiltonian) -> Result<f64> {
    let spectrum = h.spectrum()?;
    spectrum
        .energies
        .last()
        .copied()
        .ok_or_else(|| Error::Numerical("empty spectrum".into()))
}

/// The step size `1 / (200 E_max)` used for the benchmark trajectories.
pub fn default_time_step(h: &Hamiltonian) -> Result<f64> {
    let e_max = max_eigen_energy(h)?;
    if e_max <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "time-step rule 1/(200 E_max) needs E_max > 0, got {e_max}"
        )));
    }
    Ok(1.0 / (200.0 * e_max))
}

/// Exact single-step evolution operator `exp(-i H dt)`.
#[derive(Debug, Clone)]
pub struct Propagator {
    matrix: CMat,
    dt: f64,
    spectrum: Arc<Spectrum>,
}

impl Propagator {
    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, psi: &StateVector) -> StateVector {
        StateVector::from_raw_unchecked(matvec(self.matrix.as_ref(), psi.amplitudes()))
    }

    /// `P^n |psi>` evaluated in the eigenbasis.
    pub fn apply_power(&self, psi: &StateVector, n: u64) -> StateVector {
        StateVector::from_raw_unchecked(self.spectrum.evolve(psi.amplitudes(), n as f64 * self.dt))
    }
}

pub fn propagator(h: &Hamiltonian, dt: f64) -> Result<Propagator> {
    if !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("time step must be finite, got {dt}")));
    }
    let spectrum = h.spectrum()?;
    let n = h.dim();
    let v = &spectrum.vectors;
    let phased = Mat::from_fn(n, n, |i, k| v[(i, k)] * c64::cis(-spectrum.energies[k] * dt));
    let matrix = &phased * v.adjoint();
    Ok(Propagator { matrix, dt, spectrum })
}

/// `exp(-i H t) |s0>` computed directly, without stepping.
pub fn state_at(h: &Hamiltonian, s0: &StateVector, t: f64) -> Result<StateVector> {
    check_input_state(s0, h.dim())?;
    let spectrum = h.spectrum()?;
    Ok(StateVector::from_raw_unchecked(spectrum.evolve(s0.amplitudes(), t)))
}

fn check_input_state(s0: &StateVector, dim: usize) -> Result<()> {
    if s0.dim() != dim {
        return Err(Error::DimensionMismatch(format!(
            "state has dimension {}, operator has {dim}",
            s0.dim()
        )));
    }
    let norm = s0.norm();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::NotNormalized {
            norm,
            tolerance: NORM_TOLERANCE,
        });
    }
    Ok(())
}

/// Ordered sequence of states with a fixed step.
///
/// `start_step` is the absolute step index of `states[0]` measured from the
/// initial state, so `states[i]` is `s_{start_step + i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub states: Vec<StateVector>,
    pub dt: f64,
    pub burn_in: u64,
    pub start_step: u64,
    pub origin: String,
    pub model: Option<TfimParams>,
}

impl TimeSeries {
    /// Validates the invariants: shared dimension, unit norms within 1e-10.
    pub fn new(states: Vec<StateVector>, dt: f64, start_step: u64, origin: impl Into<String>) -> Result<Self> {
        if let Some(first) = states.first() {
            let dim = first.dim();
            for (i, s) in states.iter().enumerate() {
                if s.dim() != dim {
                    return Err(Error::DimensionMismatch(format!(
                        "state {i} has dimension {}, expected {dim}",
                        s.dim()
                    )));
                }
                let norm = s.norm();
                if (norm - 1.0).abs() > 1e-10 {
                    return Err(Error::NotNormalized { norm, tolerance: 1e-10 });
                }
            }
        }
        Ok(Self {
            states,
            dt,
            burn_in: start_step,
            start_step,
            origin: origin.into(),
            model: None,
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, StateVector::dim)
    }

    /// End step (exclusive).
    pub fn end_step(&self) -> u64 {
        self.start_step + self.states.len() as u64
    }

    /// State at absolute step `step`, if covered.
    pub fn at_step(&self, step: u64) -> Option<&StateVector> {
        step.checked_sub(self.start_step)
            .and_then(|i| self.states.get(i as usize))
    }

    /// Same states relabeled so that `states[0]` sits at `start_step`.
    pub fn relabeled(&self, start_step: u64) -> Self {
        Self {
            start_step,
            ..self.clone()
        }
    }
}

/// Steps `s0` through `burn_in` discarded steps, then records `n_steps` states
/// `s_{burn_in}, ..., s_{burn_in + n_steps - 1}` with `s_{k+1} = P s_k`.
pub fn evolve_series(p: &Propagator, s0: &StateVector, n_steps: usize, burn_in: u64) -> Result<TimeSeries> {
    check_input_state(s0, p.dim())?;
    let mut current = if burn_in == 0 {
        s0.clone()
    } else {
        p.apply_power(s0, burn_in)
    };
    let mut states = Vec::with_capacity(n_steps);
    for i in 0..n_steps {
        if i > 0 {
            current = p.apply(&current);
        }
        states.push(current.clone());
    }
    Ok(TimeSeries {
        states,
        dt: p.dt(),
        burn_in,
        start_step: burn_in,
        origin: "|0...0> evolved".into(),
        model: None,
    })
}

/// States at the absolute steps `steps`, each computed by direct
/// exponentiation from `s0`.
pub fn states_at_steps(
    h: &Hamiltonian,
    s0: &StateVector,
    dt: f64,
    steps: impl IntoIterator<Item = u64>,
) -> Result<Vec<StateVector>> {
    check_input_state(s0, h.dim())?;
    let spectrum = h.spectrum()?;
    let n = h.dim();
    // project once, then only phases change
    let overlaps: Vec<c64> = (0..n)
        .map(|k| {
            spectrum
                .vectors
                .col(k)
                .iter()
                .zip(s0.amplitudes())
                .map(|(v, p)| v.conj() * p)
                .sum()
        })
        .collect();
    Ok(steps
        .into_iter()
        .map(|step| {
            let t = step as f64 * dt;
            let coeffs: Vec<c64> = overlaps
                .iter()
                .zip(&spectrum.energies)
                .map(|(c, e)| c * c64::cis(-e * t))
                .collect();
            StateVector::from_raw_unchecked(matvec(spectrum.vectors.as_ref(), &coeffs))
        })
        .collect())
}
