//! Independent reference implementations used only by the tests.
#![allow(dead_code)]

pub mod algebra;

use faer::{c64, Mat};
use qngrc_core::linalg::CMat;
use qngrc_core::StateVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> c64 {
    c64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    Mat::from_fn(n, n, |i, j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) })
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (br, bc) = (b.nrows(), b.ncols());
    Mat::from_fn(a.nrows() * br, a.ncols() * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

pub fn pauli_x() -> CMat {
    Mat::from_fn(2, 2, |i, j| if i != j { c(1.0, 0.0) } else { c(0.0, 0.0) })
}

pub fn pauli_z() -> CMat {
    Mat::from_fn(2, 2, |i, j| match (i, j) {
        (0, 0) => c(1.0, 0.0),
        (1, 1) => c(-1.0, 0.0),
        _ => c(0.0, 0.0),
    })
}

/// `op` on `site` of an `n`-qubit chain, site 0 being the leftmost factor.
pub fn site_op(op: &CMat, site: usize, n: usize) -> CMat {
    let mut acc = identity(1);
    for s in 0..n {
        acc = kron(&acc, &if s == site { op.clone() } else { identity(2) });
    }
    acc
}

/// Periodic TFIM assembled from Kronecker products.
pub fn tfim_kron(n: usize, j: f64, h: f64) -> CMat {
    let dim = 1 << n;
    let mut m = Mat::<c64>::zeros(dim, dim);
    for s in 0..n {
        let zz = &site_op(&pauli_z(), s, n) * &site_op(&pauli_z(), (s + 1) % n, n);
        let x = site_op(&pauli_x(), s, n);
        m = &m + &(scale(&zz, -j) + scale(&x, h));
    }
    m
}

pub fn scale(a: &CMat, f: f64) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * f)
}

/// Frobenius norm of `a - b`, an upper bound on the spectral norm.
pub fn diff_norm(a: &CMat, b: &CMat) -> f64 {
    let d = a - b;
    d.norm_l2()
}

/// Spectral norm as the square root of the largest eigenvalue of `A^dagger A`,
/// by power iteration on a deterministic start.
pub fn power_spectral_norm(a: &CMat) -> f64 {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0.0;
    }
    let g = a.adjoint() * a;
    let n = g.nrows();
    let mut v: Vec<c64> = (0..n).map(|i| c(1.0 + 0.37 * i as f64, 0.11 * i as f64)).collect();
    let mut lambda = 0.0;
    for _ in 0..2000 {
        let w: Vec<c64> = (0..n).map(|i| (0..n).map(|k| g[(i, k)] * v[k]).sum()).collect();
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let next = norm;
        v = w.into_iter().map(|z| z / norm).collect();
        if (next - lambda).abs() <= 1e-15 * next {
            lambda = next;
            break;
        }
        lambda = next;
    }
    lambda.sqrt()
}

/// Ridge weights from the normal equations `W (X X^dagger + lambda I) = Y X^dagger`,
/// solved with a full-pivot LU.
pub fn ridge_normal_equations(x: &CMat, y: &CMat, lambda: f64) -> CMat {
    let mut gram = x * x.adjoint();
    for i in 0..gram.nrows() {
        gram[(i, i)] += c(lambda, 0.0);
    }
    let rhs = y * x.adjoint();
    // W G = R  <=>  G^dagger W^dagger = R^dagger
    let lu = gram.adjoint().full_piv_lu();
    let sol = faer::linalg::solvers::Solve::solve(&lu, rhs.adjoint().to_owned());
    sol.adjoint().to_owned()
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMat {
    Mat::from_fn(rows, cols, |_, _| {
        c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

pub fn random_unit_vector(rng: &mut impl Rng, n: usize) -> Vec<c64> {
    let v: Vec<c64> = (0..n)
        .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

pub fn overlap(a: &[c64], b: &[c64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<c64>().norm()
}

pub fn matvec(a: &CMat, x: &[c64]) -> Vec<c64> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)] * x[j]).sum())
        .collect()
}

pub fn norm(v: &[c64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `cos(t) psi + sin(t) v` with `v` orthogonal to `psi` and `|result - psi| = delta`.
pub fn perturb(psi: &StateVector, delta: f64) -> StateVector {
    let a = psi.amplitudes();
    let mut v: Vec<c64> = (0..a.len()).map(|i| c(0.3 + i as f64, -0.7 * i as f64)).collect();
    let proj: c64 = a.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
    for (vi, ai) in v.iter_mut().zip(a) {
        *vi -= proj * ai;
    }
    let nv = norm(&v);
    let theta = 2.0 * (delta / 2.0).asin();
    let out: Vec<c64> = a
        .iter()
        .zip(&v)
        .map(|(x, y)| x * theta.cos() + y / nv * theta.sin())
        .collect();
    StateVector::new(out).unwrap()
}

/// Euclidean distance between amplitude vectors, with no phase alignment.
pub fn state_distance(a: &StateVector, b: &StateVector) -> f64 {
    a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}
