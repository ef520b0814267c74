use faer::c64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::StateVector;

/// `|<a|b>|`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "fidelity between dimensions {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(a.inner(b).norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// `Re <s| P_1 (x) P_2 ... |s>` for Pauli factors on the listed sites.
pub fn pauli_expectation(state: &StateVector, sites: &[(usize, Pauli)]) -> Result<f64> {
    let n = state.n_qubits();
    if state.dim() != 1 << n {
        return Err(Error::DimensionMismatch(format!(
            "dimension {} is not a power of two",
            state.dim()
        )));
    }
    let mut flip = 0usize;
    let mut y_mask = 0usize;
    let mut phase_mask = 0usize;
    for &(site, axis) in sites {
        if site >= n {
            return Err(Error::IndexOutOfRange(format!("site {site} on {n} qubits")));
        }
        let bit = 1usize << (n - 1 - site);
        if (flip | phase_mask) & bit != 0 {
            return Err(Error::InvalidArgument(format!("site {site} listed twice")));
        }
        match axis {
            Pauli::X => flip |= bit,
            Pauli::Y => {
                flip |= bit;
                y_mask |= bit;
                phase_mask |= bit;
            }
            Pauli::Z => phase_mask |= bit,
        }
    }
    let n_y = y_mask.count_ones();
    // Y = i X Z: P|j> = i^{n_y} (-1)^{popcount(j & phase_mask)} |j ^ flip>
    let global = c64::new(0.0, 1.0).powu(n_y);
    let amps = state.amplitudes();
    let value: c64 = amps
        .iter()
        .enumerate()
        .map(|(j, &a)| {
            let sign = if (j & phase_mask).count_ones().is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            amps[j ^ flip].conj() * a * sign
        })
        .sum::<c64>()
        * global;
    Ok(value.re)
}

/// Entrywise amplitude errors between a prediction and a target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeErrors {
    /// `max_i |a_i - b_i|`.
    pub raw: f64,
    /// Same after rotating `a` by the global phase that maximizes `Re <b|a>`.
    pub phase_aligned: f64,
}

pub fn amplitude_errors(pred: &StateVector, target: &StateVector) -> Result<AmplitudeErrors> {
    if pred.dim() != target.dim() {
        return Err(Error::DimensionMismatch(format!(
            "dimensions {} and {}",
            pred.dim(),
            target.dim()
        )));
    }
    let overlap = pred.inner(target);
    let rot = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        c64::new(1.0, 0.0)
    };
    let mut raw = 0.0f64;
    let mut aligned = 0.0f64;
    for (a, b) in pred.amplitudes().iter().zip(target.amplitudes()) {
        raw = raw.max((a - b).norm());
        aligned = aligned.max((a * rot - b).norm());
    }
    Ok(AmplitudeErrors {
        raw,
        phase_aligned: aligned,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_expectations() {
        let zero = StateVector::zero(1);
        assert_eq!(pauli_expectation(&zero, &[(0, Pauli::Z)]).unwrap(), 1.0);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let plus0 = StateVector::new(vec![
            c64::new(r, 0.0),
            c64::new(0.0, 0.0),
            c64::new(r, 0.0),
            c64::new(0.0, 0.0),
        ])
        .unwrap();
        assert!((pauli_expectation(&plus0, &[(0, Pauli::X)]).unwrap() - 1.0).abs() < 1e-15);
        let plus_i = StateVector::new(vec![c64::new(r, 0.0), c64::new(0.0, r)]).unwrap();
        assert!((pauli_expectation(&plus_i, &[(0, Pauli::Y)]).unwrap() - 1.0).abs() < 1e-15);
        assert!(pauli_expectation(&zero, &[(1, Pauli::Z)]).is_err());
    }

    #[test]
    fn fidelity_extremes() {
        let a = StateVector::basis(4, 1);
        let b = StateVector::basis(4, 2);
        assert_eq!(fidelity(&a, &a).unwrap(), 1.0);
        assert_eq!(fidelity(&a, &b).unwrap(), 0.0);
        assert!(fidelity(&a, &StateVector::zero(1)).is_err());
    }

    #[test]
    fn phase_alignment_removes_global_phase() {
        let a = StateVector::new(vec![c64::new(0.6, 0.0), c64::new(0.0, 0.8)]).unwrap();
        let b = StateVector::new(a.amplitudes().iter().map(|z| z * c64::cis(0.7)).collect()).unwrap();
        let e = amplitude_errors(&a, &b).unwrap();
        assert!(e.raw > 0.1);
        assert!(e.phase_aligned < 1e-15);
    }
}
