//! Dense complex linear-algebra helpers on top of `faer`.

use faer::{c64, Mat, MatRef, Side};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type CMat = Mat<c64>;

pub const ZERO: c64 = c64 { re: 0.0, im: 0.0 };
pub const ONE: c64 = c64 { re: 1.0, im: 0.0 };

/// Thin singular value decomposition `A = U diag(s) V^dagger`, singular values
/// sorted in nonincreasing order.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v: CMat,
}

impl ThinSvd {
    /// Number of singular values strictly above `rtol * s_max`.
    pub fn rank(&self, rtol: f64) -> usize {
        let cutoff = rtol * self.s.first().copied().unwrap_or(0.0);
        self.s.iter().filter(|&&s| s > cutoff && s > 0.0).count()
    }
}

pub fn thin_svd(a: MatRef<'_, c64>) -> Result<ThinSvd> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(ThinSvd {
            u: Mat::zeros(a.nrows(), 0),
            s: Vec::new(),
            v: Mat::zeros(a.ncols(), 0),
        });
    }
    let svd = a
        .thin_svd()
        .map_err(|e| Error::Numerical(format!("svd failed: {e:?}")))?;
    let s = svd.S().column_vector().iter().map(|x| x.re).collect();
    Ok(ThinSvd {
        u: svd.U().to_owned(),
        s,
        v: svd.V().to_owned(),
    })
}

pub fn singular_values(a: MatRef<'_, c64>) -> Result<Vec<f64>> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(Vec::new());
    }
    a.singular_values()
        .map_err(|e| Error::Numerical(format!("svd failed: {e:?}")))
}

/// Largest singular value.
pub fn spectral_norm(a: MatRef<'_, c64>) -> Result<f64> {
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}

/// Ratio of the largest singular value to the smallest one above `rtol * s_max`.
pub fn condition_number(singular_values: &[f64], rtol: f64) -> f64 {
    let Some(&max) = singular_values.first() else {
        return 1.0;
    };
    if max == 0.0 {
        return 1.0;
    }
    let min = singular_values
        .iter()
        .copied()
        .filter(|&s| s > rtol * max)
        .fold(f64::INFINITY, f64::min);
    max / min
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues in nondecreasing order.
pub fn hermitian_eigen(a: MatRef<'_, c64>) -> Result<(Vec<f64>, CMat)> {
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("hermitian eigensolver failed: {e:?}")))?;
    let values = evd.S().column_vector().iter().map(|x| x.re).collect();
    Ok((values, evd.U().to_owned()))
}

/// Square root of a Hermitian positive semidefinite matrix. Eigenvalues below
/// `clamp` (including small negative roundoff) are treated as zero.
pub fn psd_sqrt(a: MatRef<'_, c64>, clamp: f64) -> Result<CMat> {
    let (values, vectors) = hermitian_eigen(a)?;
    let n = values.len();
    let roots: Vec<f64> = values
        .iter()
        .map(|&l| if l <= clamp { 0.0 } else { l.sqrt() })
        .collect();
    let mut scaled = vectors.clone();
    for (j, &r) in roots.iter().enumerate() {
        for i in 0..n {
            scaled[(i, j)] *= r;
        }
    }
    Ok(&scaled * vectors.adjoint())
}

/// Frobenius norm of `U^dagger U - I`, an upper bound on its spectral norm.
pub fn unitarity_residual(u: MatRef<'_, c64>) -> Result<f64> {
    if u.nrows() != u.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "unitary must be square, got {}x{}",
            u.nrows(),
            u.ncols()
        )));
    }
    let mut g = u.adjoint() * u;
    for i in 0..g.nrows() {
        g[(i, i)] -= ONE;
    }
    Ok(g.norm_l2())
}

pub fn kron(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> CMat {
    let (br, bc) = (b.nrows(), b.ncols());
    Mat::from_fn(a.nrows() * br, a.ncols() * bc, |i, j| {
        a[(i / br, j / bc)] * b[(i % br, j % bc)]
    })
}

pub fn matvec(a: MatRef<'_, c64>, x: &[c64]) -> Vec<c64> {
    assert_eq!(a.ncols(), x.len(), "matvec dimension mismatch");
    let mut y = vec![ZERO; a.nrows()];
    for (j, &xj) in x.iter().enumerate() {
        if xj == ZERO {
            continue;
        }
        let col = a.col(j);
        for (yi, &aij) in y.iter_mut().zip(col.iter()) {
            *yi += aij * xj;
        }
    }
    y
}

/// Zero-pads `a` into the top-left corner of a `rows x cols` matrix.
pub fn pad(a: MatRef<'_, c64>, rows: usize, cols: usize) -> CMat {
    assert!(a.nrows() <= rows && a.ncols() <= cols);
    Mat::from_fn(rows, cols, |i, j| {
        if i < a.nrows() && j < a.ncols() {
            a[(i, j)]
        } else {
            ZERO
        }
    })
}

pub fn top_left(a: MatRef<'_, c64>, rows: usize, cols: usize) -> CMat {
    a.submatrix(0, 0, rows, cols).to_owned()
}

pub fn scale(a: MatRef<'_, c64>, factor: f64) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * factor)
}

pub fn sub(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> CMat {
    assert_eq!(a.shape(), b.shape());
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] - b[(i, j)])
}

/// Entrywise maximum modulus of `a - b`.
pub fn max_abs_diff(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    m
}

pub fn vec_norm(v: &[c64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `<a|b>` with the first argument conjugated.
pub fn inner(a: &[c64], b: &[c64]) -> c64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn kron_vec(a: &[c64], b: &[c64]) -> Vec<c64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        out.extend(b.iter().map(|&y| x * y));
    }
    out
}

/// Number of qubits needed to index `n` basis states, `ceil(log2 n)`.
pub fn qubits_for(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

pub fn random_complex_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<c64> {
    (0..n)
        .map(|_| c64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

pub fn random_state<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<c64> {
    let mut v = random_complex_vector(rng, n);
    let norm = vec_norm(&v);
    v.iter_mut().for_each(|z| *z /= norm);
    v
}

pub fn random_complex_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    let data = random_complex_vector(rng, rows * cols);
    Mat::from_fn(rows, cols, |i, j| data[i * cols + j])
}

/// Haar-ish random unitary from Gram-Schmidt on a Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMat {
    let first = random_state(rng, n);
    complete_to_unitary(&first, rng)
}

/// Builds a unitary whose first column is the unit vector `first`; the
/// remaining columns come from Gram-Schmidt on random vectors drawn from `rng`.
pub fn complete_to_unitary<R: Rng + ?Sized>(first: &[c64], rng: &mut R) -> CMat {
    let n = first.len();
    let mut cols: Vec<Vec<c64>> = Vec::with_capacity(n);
    cols.push(first.to_vec());
    while cols.len() < n {
        let mut v = random_complex_vector(rng, n);
        // two passes of classical Gram-Schmidt
        for _ in 0..2 {
            for c in &cols {
                let proj = inner(c, &v);
                for (vi, ci) in v.iter_mut().zip(c) {
                    *vi -= proj * ci;
                }
            }
        }
        let norm = vec_norm(&v);
        if norm < 1e-8 {
            continue;
        }
        v.iter_mut().for_each(|z| *z /= norm);
        cols.push(v);
    }
    Mat::from_fn(n, n, |i, j| cols[j][i])
}
