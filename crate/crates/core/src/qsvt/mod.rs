//! Singular-value transformation of block encodings.
//!
//! Transforms use a spectral shortcut: the encoded block is decomposed
//! exactly, its singular values are mapped through the inversion polynomial,
//! and the result is re-embedded as a dilation. Query costs of the
//! corresponding circuits are tracked in [`CostEstimate`] records.

mod polynomial;

use std::f64::consts::SQRT_2;

use faer::Mat;

pub use polynomial::{
    build_inversion_polynomial, InversionPolynomial, CERTIFICATION_GRID, DEGREE_CAP, DEGREE_CONSTANT,
};

use crate::block_encoding::{
    augment_tikhonov, clip_to_contraction, embed_on, extend_system, log_factor, multiply, BlockEncoding, CostEstimate,
};
use crate::circuit::CircuitDims;
use crate::error::{Error, Result};
use crate::linalg::{condition_number, thin_svd, CMat, ThinSvd};

/// Singular values at or below this fraction of the largest are treated as zero.
pub const ZERO_RTOL: f64 = 1e-12;

/// Slack on the domain check `sigma/alpha >= 1/kappa`.
const DOMAIN_SLACK: f64 = 1e-9;

/// Exact spectral data of an encoding's block, scaled by `alpha`.
#[derive(Debug, Clone)]
pub struct EncodedSpectrum {
    pub svd: ThinSvd,
    pub norm: f64,
    pub kappa: f64,
}

/// SVD of `alpha * block`, with the condition number over nonzero singular values.
pub fn encoded_spectrum(be: &BlockEncoding) -> Result<EncodedSpectrum> {
    let block = be.block()?;
    let m = Mat::from_fn(block.nrows(), block.ncols(), |i, j| block[(i, j)] * be.alpha());
    let svd = thin_svd(m.as_ref())?;
    let norm = svd.s.first().copied().unwrap_or(0.0);
    let kappa = condition_number(&svd.s, ZERO_RTOL);
    Ok(EncodedSpectrum { svd, norm, kappa })
}

/// Exact condition number of `X_I = [[X, sqrt(lambda) I], [0, 0]]` over its
/// nonzero singular values.
pub fn augmented_condition_number(be_x: &BlockEncoding, lambda: f64) -> Result<f64> {
    Ok(encoded_spectrum(&augment_tikhonov(be_x, lambda)?)?.kappa)
}

/// `V diag(scale * P(s_i / alpha)) U^dagger` for the block `U diag(s) V^dagger / alpha`,
/// with zero singular values mapped to zero.
fn transformed_matrix(
    be: &BlockEncoding,
    spec: &EncodedSpectrum,
    poly: &InversionPolynomial,
    scale: f64,
) -> Result<CMat> {
    let alpha = be.alpha();
    let lower = poly.domain_lower() * (1.0 - DOMAIN_SLACK);
    let zero = ZERO_RTOL * spec.norm;
    let mut offenders = Vec::new();
    let mapped: Vec<f64> = spec
        .svd
        .s
        .iter()
        .map(|&s| {
            if s <= zero {
                return 0.0;
            }
            let x = s / alpha;
            if x < lower || x > 1.0 + DOMAIN_SLACK {
                offenders.push(x);
            }
            scale * poly.eval(x.min(1.0))
        })
        .collect();
    if !offenders.is_empty() {
        return Err(Error::DomainViolation {
            lower: poly.domain_lower(),
            offenders,
        });
    }
    let v = &spec.svd.v;
    let vs = Mat::from_fn(v.nrows(), mapped.len(), |i, j| v[(i, j)] * mapped[j]);
    Ok(&vs * spec.svd.u.adjoint())
}

/// Applies `poly` to the singular values of the encoded block.
///
/// The output encodes `A^+` with parameters `(2 kappa_P / alpha, a + 1,
/// eps_P / alpha)`, where `kappa_P`, `eps_P` are the polynomial's and
/// `alpha` is the input subnormalization; with `kappa_P = kappa_A alpha / |A|`
/// this is `2 kappa_A / |A|`.
pub fn transform_singular_values(be_a: &BlockEncoding, poly: &InversionPolynomial) -> Result<BlockEncoding> {
    let spec = encoded_spectrum(be_a)?;
    let t = transformed_matrix(be_a, &spec, poly, 1.0)?;
    let mut out = embed_on(
        &clip_to_contraction(&t)?,
        1.0,
        be_a.n_ancilla() + 1,
        be_a.system_qubits(),
    )?;
    let (r, c) = be_a.block_dims();
    out = out.with_block_dims(c, r)?;
    out.set_alpha(2.0 * poly.kappa / be_a.alpha());
    out.set_epsilon(poly.eps / be_a.alpha());
    out.set_queries(poly.degree as f64 * be_a.queries().max(1.0));
    Ok(out)
}

/// `(2 kappa_A/|A|, a + 1, delta)`-encoding of `A^+`.
///
/// Requires `be_a.epsilon <= delta |A| / (2 kappa_A^2)`. Cost factor
/// `(kappa_A alpha/|A|) log(kappa_A/(delta |A|))`.
pub fn pseudoinverse(be_a: &BlockEncoding, kappa_a: f64, delta: f64) -> Result<(BlockEncoding, CostEstimate)> {
    check_delta(delta)?;
    if !(kappa_a >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "kappa_A must be at least 1, got {kappa_a}"
        )));
    }
    let spec = encoded_spectrum(be_a)?;
    let norm = spec.norm;
    if norm == 0.0 {
        return Err(Error::InvalidArgument("cannot pseudoinvert a zero block".into()));
    }
    let bound = delta * norm / (2.0 * kappa_a * kappa_a);
    if be_a.epsilon() > bound {
        return Err(Error::precondition(
            "pseudoinversion requires epsilon <= delta |A| / (2 kappa_A^2)",
            format!("epsilon = {:e}, bound = {bound:e}", be_a.epsilon()),
        ));
    }
    let alpha = be_a.alpha();
    let poly_kappa = (kappa_a * alpha / norm).max(1.0);
    let poly = build_inversion_polynomial(poly_kappa, (delta * alpha / 2.0).min(1.0))?;
    let t = transformed_matrix(be_a, &spec, &poly, 1.0)?;
    let mut out = embed_on(
        &clip_to_contraction(&t)?,
        1.0,
        be_a.n_ancilla() + 1,
        be_a.system_qubits(),
    )?;
    let (r, c) = be_a.block_dims();
    out = out.with_block_dims(c, r)?;
    out.set_alpha(2.0 * kappa_a / norm);
    out.set_epsilon(delta);
    let factor = (kappa_a * alpha / norm) * log_factor(kappa_a / (delta * norm));
    out.set_queries(factor * be_a.queries().max(1.0));
    let cost = CostEstimate::new(
        "pseudoinverse",
        "(kappa_A alpha/|A|) * log(kappa_A/(delta |A|)) * T_A",
        "T_A",
        factor,
        out.queries(),
    )
    .with("kappa_A", kappa_a)
    .with("alpha", alpha)
    .with("norm_A", norm)
    .with("delta", delta)
    .with("degree", poly.degree as f64);
    cost.validate()?;
    Ok((out, cost))
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidArgument(format!("delta must lie in (0, 1], got {delta}")));
    }
    Ok(())
}

/// Encoding of `X_I^+` for the augmented `X_I = [[X, sqrt(lambda) I], [0, 0]]`,
/// whose top-left block is `X^dagger (X X^dagger + lambda I)^{-1}`.
///
/// Parameters `(2 kappa/(|X| + sqrt(lambda)), a_X + 1, delta)`, where
/// `kappa` is the exact condition number of `X_I` over its nonzero singular
/// values (recorded in the cost as `kappa`).
pub fn regularized_pseudoinverse(
    be_x: &BlockEncoding,
    lambda: f64,
    delta: f64,
) -> Result<(BlockEncoding, CostEstimate)> {
    check_delta(delta)?;
    let x_spec = encoded_spectrum(be_x)?;
    let norm_x = x_spec.norm;
    let root = lambda.sqrt();
    let be_i = augment_tikhonov(be_x, lambda)?;
    let i_spec = encoded_spectrum(&be_i)?;
    let kappa = i_spec.kappa;
    let norm_i = i_spec.norm;
    if norm_i == 0.0 {
        return Err(Error::InvalidArgument("cannot pseudoinvert a zero block".into()));
    }

    let gram_norm = norm_x * norm_x + lambda;
    let bound = delta * gram_norm / (32.0 * (be_x.alpha() + root) * kappa.powi(3) * log_factor(kappa / delta).powi(3));
    if be_x.epsilon() > bound {
        return Err(Error::precondition(
            "regularized pseudoinversion requires epsilon_X <= delta |X X^dagger + lambda I| / (32 (alpha_X + sqrt(lambda)) kappa^3 log^3(kappa/delta))",
            format!("epsilon_X = {:e}, bound = {bound:e}", be_x.epsilon()),
        ));
    }

    let alpha_i = be_i.alpha();
    let poly_kappa = (kappa * alpha_i / norm_i).max(1.0);
    let poly = build_inversion_polynomial(poly_kappa, (delta * alpha_i / 4.0).min(1.0))?;
    let alpha_out = 2.0 * kappa / (norm_x + root);
    // P approximates alpha_i/(2 poly_kappa s) = norm_i/(2 kappa s); rescale to 1/(alpha_out s)
    let scale = (norm_x + root) / norm_i;
    let t = transformed_matrix(&be_i, &i_spec, &poly, scale)?;
    let mut out = embed_on(
        &clip_to_contraction(&t)?,
        1.0,
        be_i.n_ancilla() + 1,
        be_i.system_qubits(),
    )?;
    out.set_alpha(alpha_out);
    out.set_epsilon(delta);
    let factor = (kappa * be_x.alpha() / (norm_x + root)) * log_factor(kappa / delta);
    out.set_queries(factor * be_x.queries().max(1.0));
    let cost = CostEstimate::new(
        "regularized_pseudoinverse",
        "(kappa alpha_X/(|X| + sqrt(lambda))) * log(kappa/delta) * T_X",
        "T_X",
        factor,
        out.queries(),
    )
    .with("kappa", kappa)
    .with("alpha_X", be_x.alpha())
    .with("alpha_augmented", alpha_i)
    .with("norm_X", norm_x)
    .with("norm_augmented", norm_i)
    .with("lambda", lambda)
    .with("delta", delta)
    .with("degree", poly.degree as f64);
    cost.validate()?;
    Ok((out, cost))
}

/// Error-budget split for [`build_weight_encoding`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WeightBudget {
    /// Pseudoinversion error; defaults to `delta_W / (2 sqrt(2) |Y|)`.
    pub delta_x: Option<f64>,
}

/// Encoding of `W = Y X^dagger (X X^dagger + lambda I)^{-1}` as the product of
/// the lifted target encoding with the regularized pseudoinverse of `X`.
///
/// `be_y` must carry `alpha_Y = sqrt(2) |Y|` and `epsilon = delta_Y <= delta_W/(4 kappa)`.
/// Output parameters `(2 sqrt(2) kappa |Y|/(|X| + sqrt(lambda)), a_Y + a_X + 1, delta_W)`.
/// The system register gains the augmentation qubit as its most significant
/// qubit; `W` sits in the top-left `rows(Y) x rows(X)` corner.
pub fn build_weight_encoding(
    be_x: &BlockEncoding,
    be_y: &BlockEncoding,
    lambda: f64,
    delta_w: f64,
    dims: Option<&CircuitDims>,
) -> Result<(BlockEncoding, CostEstimate)> {
    build_weight_encoding_with(be_x, be_y, lambda, delta_w, dims, WeightBudget::default())
}

pub fn build_weight_encoding_with(
    be_x: &BlockEncoding,
    be_y: &BlockEncoding,
    lambda: f64,
    delta_w: f64,
    dims: Option<&CircuitDims>,
    budget: WeightBudget,
) -> Result<(BlockEncoding, CostEstimate)> {
    check_delta(delta_w)?;
    if be_x.system_qubits() != be_y.system_qubits() {
        return Err(Error::DimensionMismatch(format!(
            "feature and target encodings act on {} and {} system qubits",
            be_x.system_qubits(),
            be_y.system_qubits()
        )));
    }
    if let Some(d) = dims {
        let a = d.n_reg;
        if be_x.n_ancilla() != a || be_y.n_ancilla() != a + 1 {
            return Err(Error::DimensionMismatch(format!(
                "expected {a} feature and {} target ancillas, got {} and {}",
                a + 1,
                be_x.n_ancilla(),
                be_y.n_ancilla()
            )));
        }
    }
    let norm_y = be_y.alpha() / SQRT_2;
    let root = lambda.sqrt();

    let default_dx = delta_w / (2.0 * SQRT_2 * norm_y);
    let delta_x = budget.delta_x.unwrap_or(default_dx).min(1.0);
    if delta_x > default_dx * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "delta_X = {delta_x:e} exceeds delta_W/(2 sqrt(2) |Y|) = {default_dx:e}"
        )));
    }
    let (pinv, pinv_cost) = regularized_pseudoinverse(be_x, lambda, delta_x)?;
    let kappa = pinv_cost.factors["kappa"];
    let norm_x = pinv_cost.factors["norm_X"];

    let delta_y = be_y.epsilon();
    if delta_y > delta_w / (4.0 * kappa) {
        return Err(Error::precondition(
            "weight encoding requires delta_Y <= delta_W / (4 kappa)",
            format!(
                "delta_Y = {delta_y:e}, delta_W/(4 kappa) = {:e}",
                delta_w / (4.0 * kappa)
            ),
        ));
    }

    let lifted = extend_system(be_y)?;
    let mut w = multiply(&lifted, &pinv)?;
    let composite = SQRT_2 * norm_y * delta_x + 2.0 * kappa * delta_y / (norm_x + root);
    w.set_alpha(2.0 * SQRT_2 * kappa * norm_y / (norm_x + root));
    w.set_epsilon(delta_w);
    let w = w.with_block_dims(be_y.block_dims().0, be_x.block_dims().0)?;
    if let Some(d) = dims {
        if w.n_ancilla() != d.w {
            return Err(Error::DimensionMismatch(format!(
                "weight encoding uses {} ancillas, expected w = {}",
                w.n_ancilla(),
                d.w
            )));
        }
    }

    let t = be_x.alpha() * be_x.alpha();
    let big_d = be_y.block_dims().0 as f64;
    let factor = (kappa / (norm_x + root) + 1.0 / norm_y) * log_factor(kappa * norm_y / delta_w) * t.sqrt();
    let simplified = kappa * t * log_factor(kappa * big_d * t / delta_w);
    let cost = CostEstimate::new(
        "weight_encoding",
        "(kappa/(|X| + sqrt(lambda)) + 1/|Y|) * log(kappa |Y|/delta_W) * sqrt(T) * T_O",
        "T_O",
        factor,
        w.queries(),
    )
    .with("kappa", kappa)
    .with("norm_X", norm_x)
    .with("norm_Y", norm_y)
    .with("lambda", lambda)
    .with("delta_W", delta_w)
    .with("delta_X", delta_x)
    .with("delta_Y", delta_y)
    .with("composite_error", composite)
    .with("T", t)
    .with("D", big_d)
    .with("simplified_factor", simplified);
    cost.validate()?;
    Ok((w, cost))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block_encoding::{embed, verify_encoding};
    use crate::c64;
    use crate::linalg::{max_abs_diff, ZERO};

    #[test]
    fn diagonal_transform_matches_pointwise_evaluation() {
        let a = Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => c64::new(1.0, 0.0),
            (1, 1) => c64::new(0.5, 0.0),
            _ => ZERO,
        });
        let be = embed(&a, 1.0).unwrap();
        let poly = build_inversion_polynomial(2.0, 1e-3).unwrap();
        let out = transform_singular_values(&be, &poly).unwrap();
        let block = out.block().unwrap();
        assert!((block[(0, 0)].re - poly.eval(1.0)).abs() < 1e-12);
        assert!((block[(1, 1)].re - poly.eval(0.5)).abs() < 1e-12);
        assert_eq!(out.alpha(), 4.0);
        assert_eq!(out.n_ancilla(), 2);
    }

    #[test]
    fn domain_violation_lists_offenders() {
        let a = Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => c64::new(1.0, 0.0),
            (1, 1) => c64::new(0.1, 0.0),
            _ => ZERO,
        });
        let be = embed(&a, 1.0).unwrap();
        let poly = build_inversion_polynomial(2.0, 1e-3).unwrap();
        match transform_singular_values(&be, &poly) {
            Err(Error::DomainViolation { offenders, .. }) => assert_eq!(offenders.len(), 1),
            other => panic!("expected a domain violation, got {other:?}"),
        }
    }

    #[test]
    fn identity_pseudoinverse() {
        let id = Mat::<c64>::identity(4, 4);
        let be = embed(&id, 1.0).unwrap();
        let (out, _) = pseudoinverse(&be, 1.0, 1e-3).unwrap();
        assert_eq!(out.alpha(), 2.0);
        assert!(verify_encoding(&out, &id).unwrap() <= 1e-3);
        let half = Mat::from_fn(4, 4, |i, j| if i == j { c64::new(0.5, 0.0) } else { ZERO });
        assert!(max_abs_diff(out.block().unwrap().as_ref(), half.as_ref()) < 1e-3);
    }
}
