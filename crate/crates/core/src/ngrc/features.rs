use faer::{c64, Mat};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::TimeSeries;
use crate::error::{Error, Result};
use crate::linalg::{kron_vec, vec_norm, CMat, ZERO};

/// Upper limit on the length of a single feature vector.
pub const MAX_FEATURE_LENGTH: usize = 1 << 24;

/// NG-RC hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    /// Number of delayed states in a delay vector.
    pub m: usize,
    /// Degree of the monomial block.
    pub p: usize,
    /// Spacing between delayed states, in steps.
    pub delta: usize,
    /// Prediction horizon, in steps.
    pub tau: u64,
    /// Tikhonov regularization strength.
    pub lambda: f64,
}

impl FeatureConfig {
    pub fn new(m: usize, p: usize, delta: usize, tau: u64, lambda: f64) -> Result<Self> {
        let cfg = Self {
            m,
            p,
            delta,
            tau,
            lambda,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("m", self.m as u64),
            ("p", self.p as u64),
            ("delta", self.delta as u64),
            ("tau", self.tau),
        ] {
            if v < 1 {
                return Err(Error::InvalidArgument(format!("{name} must be at least 1")));
            }
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "lambda must be finite and nonnegative, got {}",
                self.lambda
            )));
        }
        Ok(())
    }

    /// Steps of history a delay vector needs before its newest state.
    pub fn history(&self) -> usize {
        (self.m - 1) * self.delta
    }
}

/// Placement of the delay data inside a feature vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    /// `o (+) o^{(x)p}`, length `mD + (mD)^p`.
    Concatenated,
    /// Unit-norm state `(|0>|o>^{(x)p} + |1>|0...0>|o>)/sqrt(2)` with
    /// `|o> = o/|o|`, length `2 (mD)^p`.
    Padded,
}

#[derive(Debug, Clone)]
pub struct FeatureMatrix {
    /// One feature vector per column.
    pub columns: CMat,
    pub layout: Layout,
}

impl FeatureMatrix {
    pub fn rows(&self) -> usize {
        self.columns.nrows()
    }

    pub fn cols(&self) -> usize {
        self.columns.ncols()
    }
}

/// `o_k = s_k (+) s_{k-delta} (+) ... (+) s_{k-(m-1)delta}`, `k` indexing `series.states`.
pub fn delay_vector(series: &TimeSeries, k: usize, m: usize, delta: usize) -> Result<Vec<c64>> {
    if m == 0 || delta == 0 {
        return Err(Error::InvalidArgument("m and delta must be at least 1".into()));
    }
    if k >= series.len() {
        return Err(Error::IndexOutOfRange(format!(
            "index {k} beyond series of length {}",
            series.len()
        )));
    }
    let history = (m - 1) * delta;
    if k < history {
        return Err(Error::IndexOutOfRange(format!(
            "index {k} lacks {history} steps of delay history"
        )));
    }
    let mut o = Vec::with_capacity(m * series.dim());
    for j in 0..m {
        o.extend_from_slice(series.states[k - j * delta].amplitudes());
    }
    Ok(o)
}

/// Length of `o (+) o^{(x)p}` for `|o| = len`, or an error past [`MAX_FEATURE_LENGTH`].
pub fn feature_length(len: usize, p: usize) -> Result<usize> {
    let too_big = || {
        Error::InvalidArgument(format!(
            "feature length {len} + {len}^{p} exceeds the budget of {MAX_FEATURE_LENGTH} entries"
        ))
    };
    let tail = u32::try_from(p)
        .ok()
        .and_then(|p| len.checked_pow(p))
        .ok_or_else(too_big)?;
    let total = len.checked_add(tail).ok_or_else(too_big)?;
    if total > MAX_FEATURE_LENGTH {
        return Err(too_big());
    }
    Ok(total)
}

fn tensor_power(o: &[c64], p: usize) -> Vec<c64> {
    let mut acc = o.to_vec();
    for _ in 1..p {
        acc = kron_vec(&acc, o);
    }
    acc
}

/// `x = o (+) o^{(x)p}`.
pub fn feature_vector(o: &[c64], p: usize) -> Result<Vec<c64>> {
    if p == 0 {
        return Err(Error::InvalidArgument("p must be at least 1".into()));
    }
    let total = feature_length(o.len(), p)?;
    let mut x = Vec::with_capacity(total);
    x.extend_from_slice(o);
    x.extend(tensor_power(o, p));
    Ok(x)
}

/// Padded degree-2 feature state of length `2 |o|^2`; see [`padded_feature_vector_general`].
pub fn padded_feature_vector(o: &[c64]) -> Result<Vec<c64>> {
    padded_feature_vector_general(o, 2)
}

/// `(1/sqrt 2)|0>|o>^{(x)p} + (1/sqrt 2)|1>|0...0>|o>` for unit-norm `o`.
///
/// Index layout with `n = |o|`: the first half holds `o^{(x)p}/sqrt 2`; the
/// second half holds `o/sqrt 2` in its first `n` entries and zeros elsewhere.
pub fn padded_feature_vector_general(o: &[c64], p: usize) -> Result<Vec<c64>> {
    if p == 0 {
        return Err(Error::InvalidArgument("p must be at least 1".into()));
    }
    let norm = vec_norm(o);
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized { norm, tolerance: 1e-10 });
    }
    let n = o.len();
    let half = feature_length(n, p)? - n;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut x: Vec<c64> = tensor_power(o, p).into_iter().map(|z| z * r).collect();
    x.resize(2 * half, ZERO);
    for (i, &z) in o.iter().enumerate() {
        x[half + i] = z * r;
    }
    Ok(x)
}

/// Recovers the concatenated feature vector of the unnormalized delay vector
/// `o_c` (with `|o_c| = norm`) from its degree-2 padded state.
///
/// The padded state carries `o_c / (sqrt 2 norm)` in the linear block and
/// `o_c (x) o_c / (sqrt 2 norm^2)` in the quadratic block.
pub fn padded_to_classical(x_padded: &[c64], delay_len: usize, norm: f64) -> Result<Vec<c64>> {
    let quad = delay_len * delay_len;
    if x_padded.len() != 2 * quad {
        return Err(Error::DimensionMismatch(format!(
            "padded vector of length {} does not match delay length {delay_len}",
            x_padded.len()
        )));
    }
    let s2 = std::f64::consts::SQRT_2;
    let mut x = Vec::with_capacity(delay_len + quad);
    x.extend(x_padded[quad..quad + delay_len].iter().map(|z| z * (s2 * norm)));
    x.extend(x_padded[..quad].iter().map(|z| z * (s2 * norm * norm)));
    Ok(x)
}

fn column_feature(o: Vec<c64>, p: usize, layout: Layout) -> Result<Vec<c64>> {
    match layout {
        Layout::Concatenated => feature_vector(&o, p),
        Layout::Padded => {
            let norm = vec_norm(&o);
            let unit: Vec<c64> = o.iter().map(|z| z / norm).collect();
            padded_feature_vector_general(&unit, p)
        }
    }
}

fn columns_to_matrix(cols: Vec<Vec<c64>>, rows: usize) -> CMat {
    Mat::from_fn(rows, cols.len(), |i, j| cols[j][i])
}

/// Feature vectors for every index of `series` with a full delay history.
///
/// Column `c` corresponds to `series.states[c + (m-1) delta]`.
pub fn assemble_features(series: &TimeSeries, cfg: &FeatureConfig, layout: Layout) -> Result<FeatureMatrix> {
    cfg.validate()?;
    let history = cfg.history();
    if series.len() <= history {
        return Err(Error::InvalidArgument(format!(
            "series of length {} has no index with {history} steps of history",
            series.len()
        )));
    }
    let cols: Vec<Vec<c64>> = (history..series.len())
        .into_par_iter()
        .map(|k| column_feature(delay_vector(series, k, cfg.m, cfg.delta)?, cfg.p, layout))
        .collect::<Result<_>>()?;
    let rows = cols[0].len();
    Ok(FeatureMatrix {
        columns: columns_to_matrix(cols, rows),
        layout,
    })
}

/// Features `X` and targets `Y`, column `c` of `Y` being the state `tau`
/// steps after the newest state in column `c` of `X`.
///
/// Targets are matched by absolute step, so `targets` may cover any window
/// containing `series.start_step + (m-1) delta + tau ..`.
pub fn assemble_training(
    series: &TimeSeries,
    targets: &TimeSeries,
    cfg: &FeatureConfig,
    layout: Layout,
) -> Result<(FeatureMatrix, CMat)> {
    let x = assemble_features(series, cfg, layout)?;
    let history = cfg.history() as u64;
    let d = series.dim();
    if targets.dim() != d {
        return Err(Error::DimensionMismatch(format!(
            "targets have dimension {}, series has {d}",
            targets.dim()
        )));
    }
    let n = x.cols();
    let mut y = Mat::<c64>::zeros(d, n);
    for c in 0..n {
        let step = series.start_step + history + c as u64 + cfg.tau;
        let s = targets.at_step(step).ok_or_else(|| {
            Error::DimensionMismatch(format!(
                "targets cover steps {}..{}, column {c} needs step {step}",
                targets.start_step,
                targets.end_step()
            ))
        })?;
        for (i, &a) in s.amplitudes().iter().enumerate() {
            y[(i, c)] = a;
        }
    }
    Ok((x, y))
}

/// `(1/sqrt(cols), sqrt(rows cols))`: operator-norm bounds for a matrix
/// whose columns are unit vectors.
pub fn norm_bounds(rows: usize, cols: usize) -> (f64, f64) {
    let t = cols as f64;
    (1.0 / t.sqrt(), (rows as f64 * t).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::StateVector;

    fn series_from(values: &[[f64; 2]]) -> TimeSeries {
        let states = values
            .iter()
            .map(|v| StateVector::normalized(vec![c64::new(v[0], 0.0), c64::new(v[1], 0.0)]).unwrap())
            .collect();
        TimeSeries::new(states, 0.1, 0, "test").unwrap()
    }

    #[test]
    fn single_delay_is_the_state() {
        let s = series_from(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]);
        assert_eq!(delay_vector(&s, 2, 1, 1).unwrap(), s.states[2].amplitudes());
        let o = delay_vector(&s, 1, 2, 1).unwrap();
        assert_eq!(&o[..2], s.states[1].amplitudes());
        assert_eq!(&o[2..], s.states[0].amplitudes());
        assert!(matches!(delay_vector(&s, 0, 2, 1), Err(Error::IndexOutOfRange(_))));
    }

    #[test]
    fn feature_lengths() {
        let o = vec![c64::new(1.0, 0.0), c64::new(2.0, 0.0)];
        let x = feature_vector(&o, 2).unwrap();
        assert_eq!(x.len(), 6);
        assert_eq!(x[2..], [1.0, 2.0, 2.0, 4.0].map(|v| c64::new(v, 0.0)));
        assert_eq!(feature_length(32, 2).unwrap(), 1056);
        assert!(feature_length(1024, 4).is_err());
    }

    #[test]
    fn padded_is_unit_and_sized() {
        let o: Vec<c64> = (0..4).map(|i| c64::new(0.5, 0.0) * c64::cis(i as f64)).collect();
        let x = padded_feature_vector(&o).unwrap();
        assert_eq!(x.len(), 32);
        assert!((vec_norm(&x) - 1.0).abs() < 1e-14);
        assert!(padded_feature_vector(&[c64::new(2.0, 0.0)]).is_err());
    }
}
