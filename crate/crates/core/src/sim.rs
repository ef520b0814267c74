//! Gate-list circuits and a sparse state-vector simulator.
//!
//! Encodings built by the quantum pipeline reach 20+ qubits while their
//! states stay supported on a small subspace (ancillas mostly in `|0>`), so
//! states are stored as ordered maps from basis index to amplitude.
//! Qubit 0 is the most significant bit of a basis index.

use std::collections::BTreeMap;
use std::sync::Arc;

use faer::{c64, Mat};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{unitarity_residual, CMat, ONE, ZERO};

/// Largest dimension [`Circuit::to_dense`] will materialize.
pub const DENSE_DIM_CAP: usize = 1 << 14;

/// Tolerance for the unitarity of every gate matrix.
pub const GATE_UNITARITY_TOL: f64 = 1e-10;

/// Amplitudes with squared modulus below this are dropped.
const PRUNE: f64 = 1e-34;

#[derive(Debug, Clone)]
pub enum GateKind {
    /// Matrix on `targets`, `targets[0]` being the most significant bit.
    Unitary {
        targets: Vec<usize>,
        matrix: Arc<CMat>,
    },
    /// Multiplexed unitary `sum_v |v><v|_selectors (x) M_v`; `None` acts as identity.
    Select {
        selectors: Vec<usize>,
        targets: Vec<usize>,
        matrices: Vec<Option<Arc<CMat>>>,
    },
    Swap(usize, usize),
}

/// A gate, optionally conditioned on control qubits taking given values.
#[derive(Debug, Clone)]
pub struct Gate {
    pub label: String,
    pub kind: GateKind,
    pub controls: Vec<(usize, bool)>,
}

impl Gate {
    fn qubits(&self) -> Vec<usize> {
        let mut q: Vec<usize> = self.controls.iter().map(|c| c.0).collect();
        match &self.kind {
            GateKind::Unitary { targets, .. } => q.extend(targets),
            GateKind::Select { selectors, targets, .. } => {
                q.extend(selectors);
                q.extend(targets);
            }
            GateKind::Swap(a, b) => q.extend([*a, *b]),
        }
        q
    }

    fn remapped(&self, map: &[usize]) -> Gate {
        let m = |v: &[usize]| v.iter().map(|&q| map[q]).collect::<Vec<_>>();
        let kind = match &self.kind {
            GateKind::Unitary { targets, matrix } => GateKind::Unitary {
                targets: m(targets),
                matrix: matrix.clone(),
            },
            GateKind::Select {
                selectors,
                targets,
                matrices,
            } => GateKind::Select {
                selectors: m(selectors),
                targets: m(targets),
                matrices: matrices.clone(),
            },
            GateKind::Swap(a, b) => GateKind::Swap(map[*a], map[*b]),
        };
        Gate {
            label: self.label.clone(),
            kind,
            controls: self.controls.iter().map(|&(q, v)| (map[q], v)).collect(),
        }
    }
}

/// Ordered list of gates on `n_qubits` qubits; gates apply first to last.
#[derive(Debug, Clone, Default)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

fn check_unitary(label: &str, m: &CMat) -> Result<()> {
    let r = unitarity_residual(m.as_ref())?;
    if r > GATE_UNITARITY_TOL {
        return Err(Error::Numerical(format!(
            "gate `{label}` is not unitary (residual {r:e})"
        )));
    }
    Ok(())
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    fn check_qubits(&self, gate: &Gate) -> Result<()> {
        let qs = gate.qubits();
        for (i, &q) in qs.iter().enumerate() {
            if q >= self.n_qubits {
                return Err(Error::IndexOutOfRange(format!(
                    "gate `{}` touches qubit {q} of a {}-qubit circuit",
                    gate.label, self.n_qubits
                )));
            }
            if qs[..i].contains(&q) {
                return Err(Error::InvalidArgument(format!(
                    "gate `{}` uses qubit {q} twice",
                    gate.label
                )));
            }
        }
        Ok(())
    }

    fn push_checked(&mut self, gate: Gate) -> Result<()> {
        self.check_qubits(&gate)?;
        self.gates.push(gate);
        Ok(())
    }

    /// Appends a unitary on `targets`, checking shape and unitarity.
    pub fn unitary(&mut self, label: &str, targets: &[usize], matrix: CMat) -> Result<()> {
        self.unitary_shared(label, targets, Arc::new(matrix))
    }

    pub fn unitary_shared(&mut self, label: &str, targets: &[usize], matrix: Arc<CMat>) -> Result<()> {
        let dim = 1usize << targets.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "gate `{label}` on {} qubits needs a {dim}x{dim} matrix, got {}x{}",
                targets.len(),
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        check_unitary(label, &matrix)?;
        self.push_checked(Gate {
            label: label.into(),
            kind: GateKind::Unitary {
                targets: targets.to_vec(),
                matrix,
            },
            controls: Vec::new(),
        })
    }

    /// Appends a multiplexed unitary indexed by the value of `selectors`.
    pub fn select(
        &mut self,
        label: &str,
        selectors: &[usize],
        targets: &[usize],
        matrices: Vec<Option<Arc<CMat>>>,
    ) -> Result<()> {
        let dim = 1usize << targets.len();
        if matrices.len() > 1usize << selectors.len() {
            return Err(Error::DimensionMismatch(format!(
                "select `{label}` has {} branches for {} selector qubits",
                matrices.len(),
                selectors.len()
            )));
        }
        for m in matrices.iter().flatten() {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "select `{label}` branch is {}x{}, expected {dim}x{dim}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            check_unitary(label, m)?;
        }
        self.push_checked(Gate {
            label: label.into(),
            kind: GateKind::Select {
                selectors: selectors.to_vec(),
                targets: targets.to_vec(),
                matrices,
            },
            controls: Vec::new(),
        })
    }

    pub fn swap(&mut self, label: &str, a: usize, b: usize) -> Result<()> {
        self.push_checked(Gate {
            label: label.into(),
            kind: GateKind::Swap(a, b),
            controls: Vec::new(),
        })
    }

    pub fn hadamard(&mut self, label: &str, q: usize) -> Result<()> {
        self.unitary(label, &[q], hadamard_matrix())
    }

    pub fn pauli_x(&mut self, label: &str, q: usize) -> Result<()> {
        self.unitary(label, &[q], pauli_x_matrix())
    }

    /// Appends `other`, with its qubit `i` placed on `map[i]`.
    pub fn append_mapped(&mut self, other: &Circuit, map: &[usize]) -> Result<()> {
        if map.len() != other.n_qubits {
            return Err(Error::DimensionMismatch(format!(
                "qubit map has {} entries for a {}-qubit circuit",
                map.len(),
                other.n_qubits
            )));
        }
        for g in &other.gates {
            self.push_checked(g.remapped(map))?;
        }
        Ok(())
    }

    /// Appends `other` conditioned on every `(qubit, value)` in `controls`.
    pub fn append_controlled(&mut self, other: &Circuit, map: &[usize], controls: &[(usize, bool)]) -> Result<()> {
        if map.len() != other.n_qubits {
            return Err(Error::DimensionMismatch(format!(
                "qubit map has {} entries for a {}-qubit circuit",
                map.len(),
                other.n_qubits
            )));
        }
        for g in &other.gates {
            let mut g = g.remapped(map);
            g.controls.extend_from_slice(controls);
            self.push_checked(g)?;
        }
        Ok(())
    }

    /// Adds the control `(qubit, value)` to the most recently appended gate.
    pub fn control_last(&mut self, qubit: usize, value: bool) -> Result<()> {
        let mut g = self
            .gates
            .pop()
            .ok_or_else(|| Error::InvalidArgument("no gate to control".into()))?;
        g.controls.push((qubit, value));
        self.push_checked(g)
    }

    /// Runs the circuit on `state`.
    pub fn apply(&self, state: &mut SparseState) -> Result<()> {
        if state.n_qubits != self.n_qubits {
            return Err(Error::DimensionMismatch(format!(
                "state has {} qubits, circuit has {}",
                state.n_qubits, self.n_qubits
            )));
        }
        for g in &self.gates {
            state.apply_gate(g);
        }
        Ok(())
    }

    /// Dense matrix of the whole circuit; refuses dimensions above [`DENSE_DIM_CAP`].
    pub fn to_dense(&self) -> Result<CMat> {
        let dim = 1usize
            .checked_shl(self.n_qubits as u32)
            .filter(|&d| d <= DENSE_DIM_CAP)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "dense unitary on {} qubits exceeds the 2^14 cap; shrink d or T",
                    self.n_qubits
                ))
            })?;
        let cols: Vec<Vec<c64>> = (0..dim)
            .into_par_iter()
            .map(|j| {
                let mut s = SparseState::basis(self.n_qubits, j);
                for g in &self.gates {
                    s.apply_gate(g);
                }
                s.to_dense()
            })
            .collect();
        Ok(Mat::from_fn(dim, dim, |i, j| cols[j][i]))
    }

    /// Block-level description for inspection.
    pub fn describe(&self) -> Vec<GateSummary> {
        self.gates
            .iter()
            .map(|g| {
                let (kind, targets, selectors) = match &g.kind {
                    GateKind::Unitary { targets, .. } => ("unitary", targets.clone(), Vec::new()),
                    GateKind::Select { selectors, targets, .. } => ("select", targets.clone(), selectors.clone()),
                    GateKind::Swap(a, b) => ("swap", vec![*a, *b], Vec::new()),
                };
                GateSummary {
                    label: g.label.clone(),
                    kind,
                    targets,
                    selectors,
                    controls: g.controls.clone(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GateSummary {
    pub label: String,
    pub kind: &'static str,
    pub targets: Vec<usize>,
    pub selectors: Vec<usize>,
    pub controls: Vec<(usize, bool)>,
}

pub fn hadamard_matrix() -> CMat {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    Mat::from_fn(2, 2, |i, j| c64::new(if i == 1 && j == 1 { -r } else { r }, 0.0))
}

pub fn pauli_x_matrix() -> CMat {
    Mat::from_fn(2, 2, |i, j| if i != j { ONE } else { ZERO })
}

/// State vector stored as an ordered map of nonzero amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseState {
    n_qubits: usize,
    amps: BTreeMap<usize, c64>,
}

impl SparseState {
    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut amps = BTreeMap::new();
        amps.insert(index, ONE);
        Self { n_qubits, amps }
    }

    /// Sparse copy of a dense amplitude vector.
    pub fn from_dense(n_qubits: usize, amplitudes: &[c64]) -> Result<Self> {
        if amplitudes.len() != 1usize << n_qubits {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for {n_qubits} qubits",
                amplitudes.len()
            )));
        }
        let amps = amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > 0.0)
            .map(|(i, &a)| (i, a))
            .collect();
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn support_size(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitude(&self, index: usize) -> c64 {
        self.amps.get(&index).copied().unwrap_or(ZERO)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, c64)> + '_ {
        self.amps.iter().map(|(&i, &a)| (i, a))
    }

    pub fn norm(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn to_dense(&self) -> Vec<c64> {
        let mut v = vec![ZERO; 1 << self.n_qubits];
        for (&i, &a) in &self.amps {
            v[i] = a;
        }
        v
    }

    fn mask(&self, q: usize) -> usize {
        1 << (self.n_qubits - 1 - q)
    }

    fn controls_hold(&self, idx: usize, controls: &[(usize, bool)]) -> bool {
        controls.iter().all(|&(q, v)| (idx & self.mask(q) != 0) == v)
    }

    fn gather(&self, idx: usize, qubits: &[usize]) -> usize {
        qubits
            .iter()
            .fold(0, |acc, &q| (acc << 1) | usize::from(idx & self.mask(q) != 0))
    }

    fn scatter(&self, base: usize, qubits: &[usize], value: usize) -> usize {
        let k = qubits.len();
        qubits.iter().enumerate().fold(base, |acc, (i, &q)| {
            if (value >> (k - 1 - i)) & 1 == 1 {
                acc | self.mask(q)
            } else {
                acc
            }
        })
    }

    pub fn apply_gate(&mut self, gate: &Gate) {
        let amps = std::mem::take(&mut self.amps);
        let mut out: BTreeMap<usize, c64> = BTreeMap::new();
        if let GateKind::Swap(a, b) = gate.kind {
            let (ma, mb) = (self.mask(a), self.mask(b));
            for (idx, amp) in amps {
                let new = if self.controls_hold(idx, &gate.controls) && ((idx & ma != 0) != (idx & mb != 0)) {
                    idx ^ ma ^ mb
                } else {
                    idx
                };
                out.insert(new, amp);
            }
            self.amps = out;
            return;
        }
        let (targets, selectors): (&[usize], &[usize]) = match &gate.kind {
            GateKind::Unitary { targets, .. } => (targets, &[]),
            GateKind::Select { selectors, targets, .. } => (targets, selectors),
            GateKind::Swap(..) => unreachable!(),
        };
        let tmask = targets.iter().fold(0, |m, &q| m | self.mask(q));
        let dim = 1usize << targets.len();
        let mut groups: BTreeMap<usize, Vec<c64>> = BTreeMap::new();
        for (idx, amp) in amps {
            if !self.controls_hold(idx, &gate.controls) {
                *out.entry(idx).or_insert(ZERO) += amp;
                continue;
            }
            let base = idx & !tmask;
            let sub = self.gather(idx, targets);
            groups.entry(base).or_insert_with(|| vec![ZERO; dim])[sub] += amp;
        }
        for (base, v) in groups {
            let matrix = match &gate.kind {
                GateKind::Unitary { matrix, .. } => Some(matrix),
                GateKind::Select { matrices, .. } => {
                    let sel = self.gather(base, selectors);
                    matrices.get(sel).and_then(Option::as_ref)
                }
                GateKind::Swap(..) => unreachable!(),
            };
            match matrix {
                None => {
                    for (sub, a) in v.into_iter().enumerate() {
                        if a != ZERO {
                            *out.entry(self.scatter(base, targets, sub)).or_insert(ZERO) += a;
                        }
                    }
                }
                Some(m) => {
                    let mut w = vec![ZERO; dim];
                    for (j, &a) in v.iter().enumerate() {
                        if a == ZERO {
                            continue;
                        }
                        for (wi, &mij) in w.iter_mut().zip(m.col(j).iter()) {
                            *wi += mij * a;
                        }
                    }
                    for (sub, a) in w.into_iter().enumerate() {
                        if a.norm_sqr() > PRUNE {
                            *out.entry(self.scatter(base, targets, sub)).or_insert(ZERO) += a;
                        }
                    }
                }
            }
        }
        self.amps = out;
    }

    /// Projects the listed qubits onto the given values and removes nothing
    /// else; returns the squared norm of the kept part.
    pub fn project(&mut self, fixed: &[(usize, bool)]) -> f64 {
        let amps = std::mem::take(&mut self.amps);
        self.amps = amps
            .into_iter()
            .filter(|&(i, _)| self.controls_hold(i, fixed))
            .collect();
        self.norm().powi(2)
    }

    /// Amplitudes of the contiguous register `start..start+len`, with every
    /// other qubit required to be in `|0>`; entries elsewhere are ignored.
    pub fn register_amplitudes(&self, start: usize, len: usize) -> Vec<c64> {
        let shift = self.n_qubits - start - len;
        let reg_mask = ((1usize << len) - 1) << shift;
        let mut v = vec![ZERO; 1 << len];
        for (&i, &a) in &self.amps {
            if i & !reg_mask == 0 {
                v[(i & reg_mask) >> shift] += a;
            }
        }
        v
    }
}
