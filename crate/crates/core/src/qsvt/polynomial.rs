use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points in the certification grid over `[1/kappa, 1]`.
pub const CERTIFICATION_GRID: usize = 10_000;

/// Largest degree [`build_inversion_polynomial`] will return.
pub const DEGREE_CAP: usize = 100_001;

/// Empirical constant in `degree <= C kappa max(1, ln(kappa/eps))`.
pub const DEGREE_CONSTANT: f64 = 2.5;

/// Odd polynomial approximating `1/(2 kappa x)` on `[1/kappa, 1]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InversionPolynomial {
    pub kappa: f64,
    pub eps: f64,
    /// Chebyshev coefficients `a_j` of `sum_j a_j T_j(x)`; even entries are zero.
    pub coefficients: Vec<f64>,
    pub degree: usize,
    /// Exponent `b` of the smoothing factor `1 - (1 - x^2)^b`.
    pub smoothing_exponent: u64,
    /// Largest `|P(x) - 1/(2 kappa x)|` on the certification grid.
    pub certified_error: f64,
    /// Largest `|P(x)|` on the certification grid.
    pub certified_max: f64,
}

impl InversionPolynomial {
    /// Clenshaw evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        clenshaw(&self.coefficients, x)
    }

    /// Lower end `1/kappa` of the approximation interval.
    pub fn domain_lower(&self) -> f64 {
        1.0 / self.kappa
    }

    /// `C kappa max(1, ln(kappa/eps))`.
    pub fn degree_bound(kappa: f64, eps: f64) -> f64 {
        DEGREE_CONSTANT * kappa * (kappa / eps).ln().max(1.0)
    }
}

fn clenshaw(a: &[f64], x: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &c in a.iter().skip(1).rev() {
        let b0 = 2.0 * x * b1 - b2 + c;
        b2 = b1;
        b1 = b0;
    }
    x * b1 - b2 + a.first().copied().unwrap_or(0.0)
}

/// `(1 - (1 - x^2)^b) / (2 kappa x)`, odd, equal to `0` at `x = 0`.
fn smoothed_inverse(x: f64, kappa: f64, b: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let damp = -(b * (-x * x).ln_1p()).exp_m1();
    damp / (2.0 * kappa * x)
}

/// Builds the polynomial by Chebyshev interpolation of the smoothed inverse,
/// truncated at the first odd degree whose coefficient tail is at most
/// `eps/(4 kappa)`, then certified on [`CERTIFICATION_GRID`] points.
pub fn build_inversion_polynomial(kappa: f64, eps: f64) -> Result<InversionPolynomial> {
    if !(kappa >= 1.0) || !kappa.is_finite() {
        return Err(Error::InvalidArgument(format!("kappa must be at least 1, got {kappa}")));
    }
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidArgument(format!("eps must lie in (0, 1], got {eps}")));
    }
    // (1 - 1/kappa^2)^b / 2 <= eps/(4 kappa) at the left end of the domain
    let b = (kappa * kappa * (2.0 * kappa / eps).ln()).ceil().max(1.0);
    let target = eps / (2.0 * kappa);
    let tail_budget = eps / (4.0 * kappa);

    // the smoothed inverse is a polynomial of degree 2b - 1; sample above it
    // so the cosine transform is exact, up to a size bound
    let exact_degree = 2.0 * b - 1.0;
    let n = if exact_degree < (1u64 << 21) as f64 {
        (exact_degree as usize + 2).next_power_of_two()
    } else {
        1 << 21
    };
    let coeffs = chebyshev_coefficients(|x| smoothed_inverse(x, kappa, b), n);

    // smallest odd degree whose discarded odd tail fits the budget
    let top = coeffs.len() - 1;
    let mut j = if top % 2 == 1 { top } else { top - 1 };
    let mut tail = 0.0;
    let mut degree = 1;
    while j > 1 {
        if tail + coeffs[j].abs() > tail_budget {
            degree = j;
            break;
        }
        tail += coeffs[j].abs();
        j -= 2;
    }
    let coefficients: Vec<f64> = coeffs[..=degree]
        .iter()
        .enumerate()
        .map(|(j, &c)| if j % 2 == 1 { c } else { 0.0 })
        .collect();

    let lower = 1.0 / kappa;
    let grid: Vec<f64> = (0..CERTIFICATION_GRID)
        .map(|i| lower + (1.0 - lower) * i as f64 / (CERTIFICATION_GRID - 1) as f64)
        .collect();
    let (certified_error, certified_max) = grid
        .par_iter()
        .map(|&x| {
            let p = clenshaw(&coefficients, x);
            ((p - 1.0 / (2.0 * kappa * x)).abs(), p.abs())
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));

    if degree > DEGREE_CAP || certified_error > target || certified_max > 1.0 {
        return Err(Error::PolynomialDidNotConverge {
            degree_cap: DEGREE_CAP,
            sup_error: certified_error,
            target,
        });
    }
    Ok(InversionPolynomial {
        kappa,
        eps,
        coefficients,
        degree,
        smoothing_exponent: b as u64,
        certified_error,
        certified_max,
    })
}

/// Chebyshev coefficients of the interpolant of `f` at the `n + 1` extreme
/// points `cos(pi k / n)`, via an FFT of the even extension.
fn chebyshev_coefficients(f: impl Fn(f64) -> f64 + Sync, n: usize) -> Vec<f64> {
    let samples: Vec<f64> = (0..=n)
        .into_par_iter()
        .map(|k| f((std::f64::consts::PI * k as f64 / n as f64).cos()))
        .collect();
    let mut buf: Vec<Complex<f64>> = Vec::with_capacity(2 * n);
    buf.extend(samples.iter().map(|&v| Complex::new(v, 0.0)));
    buf.extend(samples[1..n].iter().rev().map(|&v| Complex::new(v, 0.0)));
    let fft = FftPlanner::new().plan_fft_forward(2 * n);
    fft.process(&mut buf);
    let mut a: Vec<f64> = buf[..=n].iter().map(|z| z.re / n as f64).collect();
    a[0] /= 2.0;
    a[n] /= 2.0;
    a
}
