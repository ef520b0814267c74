use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use super::features::{FeatureConfig, FeatureMatrix, Layout};
use crate::error::{Error, Result};
use crate::linalg::{condition_number, singular_values, thin_svd, CMat};

/// Singular values at or below `RANK_RTOL * sigma_max` count as zero.
pub const RANK_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    /// With `lambda = 0`, fail instead of falling back to the pseudoinverse
    /// when `X X^dagger` is singular.
    pub require_full_row_rank: bool,
    /// Relative cutoff for the `lambda = 0` pseudoinverse.
    pub pinv_rtol: f64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            require_full_row_rank: false,
            pinv_rtol: RANK_RTOL,
        }
    }
}

/// Trained readout `W` with conditioning diagnostics.
#[derive(Debug, Clone)]
pub struct WeightModel {
    pub w: CMat,
    pub config: FeatureConfig,
    pub layout: Layout,
    /// Largest over smallest nonzero singular value of `X`.
    pub kappa_x: f64,
    /// Regularized condition number `kappa_X sqrt((|X|^2+l)/(|X|^2+l kappa_X^2))`.
    pub kappa: f64,
    pub kappa_w: f64,
    pub norm_x: f64,
    pub norm_y: f64,
    pub norm_w: f64,
    /// Numerical rank of `X`.
    pub rank_x: usize,
    pub n_train: usize,
}

/// Diagnostic part of a [`WeightModel`], for serialization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelDiagnostics {
    pub kappa_x: f64,
    pub kappa: f64,
    pub kappa_w: f64,
    pub norm_x: f64,
    pub norm_y: f64,
    pub norm_w: f64,
    pub rank_x: usize,
    pub n_train: usize,
}

impl WeightModel {
    pub fn diagnostics(&self) -> ModelDiagnostics {
        ModelDiagnostics {
            kappa_x: self.kappa_x,
            kappa: self.kappa,
            kappa_w: self.kappa_w,
            norm_x: self.norm_x,
            norm_y: self.norm_y,
            norm_w: self.norm_w,
            rank_x: self.rank_x,
            n_train: self.n_train,
        }
    }

    pub fn from_parts(w: CMat, config: FeatureConfig, layout: Layout, d: ModelDiagnostics) -> Self {
        Self {
            w,
            config,
            layout,
            kappa_x: d.kappa_x,
            kappa: d.kappa,
            kappa_w: d.kappa_w,
            norm_x: d.norm_x,
            norm_y: d.norm_y,
            norm_w: d.norm_w,
            rank_x: d.rank_x,
            n_train: d.n_train,
        }
    }
}

/// Regularized condition number of the augmented system.
pub fn kappa_regularized(kappa_x: f64, norm_x: f64, lambda: f64) -> f64 {
    let n2 = norm_x * norm_x;
    kappa_x * ((n2 + lambda) / (n2 + lambda * kappa_x * kappa_x)).sqrt()
}

/// [`train_weights_with`] using default options.
pub fn train_weights(x: &FeatureMatrix, y: &CMat, config: &FeatureConfig) -> Result<WeightModel> {
    train_weights_with(x, y, config, TrainOptions::default())
}

/// `W = Y X^dagger (X X^dagger + lambda I)^{-1}` via the SVD `X = U S V^dagger`:
/// `W = Y V diag(s/(s^2+lambda)) U^dagger`.
///
/// With `lambda = 0` this is `Y X^+`, singular values at or below
/// [`RANK_RTOL`]` * s_max` discarded.
pub fn train_weights_with(
    x: &FeatureMatrix,
    y: &CMat,
    config: &FeatureConfig,
    opts: TrainOptions,
) -> Result<WeightModel> {
    config.validate()?;
    let lambda = config.lambda;
    if x.cols() != y.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "X has {} columns, Y has {}",
            x.cols(),
            y.ncols()
        )));
    }
    if x.cols() == 0 {
        return Err(Error::InvalidArgument("no training columns".into()));
    }
    let svd = thin_svd(x.columns.as_ref())?;
    let s_max = svd.s.first().copied().unwrap_or(0.0);
    let rank = svd.rank(RANK_RTOL);
    if rank == 0 {
        return Err(Error::IllConditioned {
            smallest_singular_value: 0.0,
        });
    }
    if lambda == 0.0 && opts.require_full_row_rank && rank < x.rows() {
        let smallest = if svd.s.len() < x.rows() {
            0.0
        } else {
            svd.s.last().copied().unwrap_or(0.0)
        };
        return Err(Error::IllConditioned {
            smallest_singular_value: smallest,
        });
    }
    let cutoff = opts.pinv_rtol * s_max;
    let gains: Vec<f64> = svd
        .s
        .iter()
        .map(|&s| {
            if lambda == 0.0 {
                if s > cutoff {
                    1.0 / s
                } else {
                    0.0
                }
            } else {
                s / (s * s + lambda)
            }
        })
        .collect();
    let yv = y * &svd.v;
    let scaled = Mat::from_fn(yv.nrows(), yv.ncols(), |i, j| yv[(i, j)] * gains[j]);
    let w = &scaled * svd.u.adjoint();

    if !(0..w.ncols()).all(|j| w.col(j).iter().all(|z: &c64| z.is_finite())) {
        return Err(Error::Numerical("non-finite weight entries".into()));
    }
    let kappa_x = condition_number(&svd.s, RANK_RTOL);
    let kappa = kappa_regularized(kappa_x, s_max, lambda);
    let sw = singular_values(w.as_ref())?;
    let norm_y = singular_values(y.as_ref())?.first().copied().unwrap_or(0.0);
    Ok(WeightModel {
        kappa_w: condition_number(&sw, RANK_RTOL),
        norm_w: sw.first().copied().unwrap_or(0.0),
        w,
        config: *config,
        layout: x.layout,
        kappa_x,
        kappa,
        norm_x: s_max,
        norm_y,
        rank_x: rank,
        n_train: x.cols(),
    })
}
