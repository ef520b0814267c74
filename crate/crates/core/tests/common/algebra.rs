//! Randomized block-encoding compositions checked against closed-form parameters.

use faer::Mat;
use qngrc_core::block_encoding::{augment_tikhonov, embed_with_ancillas, multiply, preamplify, BlockEncoding};
use qngrc_core::linalg::{random_unitary, CMat};
use qngrc_core::qsvt::{
    augmented_condition_number, build_weight_encoding, encoded_spectrum, pseudoinverse, regularized_pseudoinverse,
};
use rand::Rng;

use super::{diff_norm, ridge_normal_equations};

/// `U diag(s) V^dagger` with Haar-ish unitaries, plus its factors.
pub struct Known {
    pub a: CMat,
    pub s: Vec<f64>,
    pub u: CMat,
    pub v: CMat,
}

pub fn with_singular_values(rng: &mut impl Rng, s: &[f64]) -> Known {
    let n = s.len();
    let u = random_unitary(rng, n);
    let v = random_unitary(rng, n);
    let us = Mat::from_fn(n, n, |i, j| u[(i, j)] * s[j]);
    Known {
        a: &us * v.adjoint(),
        s: s.to_vec(),
        u,
        v,
    }
}

fn spread(rng: &mut impl Rng, n: usize, kappa: f64, scale: f64) -> Vec<f64> {
    let mut s: Vec<f64> = (0..n)
        .map(|i| match i {
            0 => scale,
            _ if i == n - 1 => scale / kappa,
            _ => scale * rng.random_range(1.0 / kappa..1.0),
        })
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// `n x n` matrix with condition number `kappa` and norm drawn from `scale`.
pub fn random_known(rng: &mut impl Rng, n: usize, kappa: f64, scale: std::ops::Range<f64>) -> Known {
    let top = rng.random_range(scale);
    let s = spread(rng, n, kappa, top);
    with_singular_values(rng, &s)
}

fn with_epsilon(be: &BlockEncoding, eps: f64) -> BlockEncoding {
    BlockEncoding::from_circuit(
        be.circuit().clone(),
        be.n_ancilla(),
        be.alpha(),
        eps,
        be.block_dims(),
        be.queries(),
    )
    .unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn ensure(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

/// Kind of composition exercised by `seed`: product, pseudoinverse,
/// regularized inverse, or the full weight encoding.
pub fn composition_kind(seed: u64) -> &'static str {
    ["product", "pseudoinverse", "regularized", "weight"][(seed % 4) as usize]
}

/// One randomized composition; `Err` describes the first mismatch.
pub fn check_composition(seed: u64) -> Result<(), String> {
    let mut rng = super::rng(seed);
    let s = rng.random_range(1..=2usize);
    let n = 1 << s;
    match composition_kind(seed) {
        "product" => {
            let ka = random_known(&mut rng, n, 4.0, 0.2..2.0);
            let kb = random_known(&mut rng, n, 4.0, 0.2..2.0);
            let alpha = ka.s[0] * rng.random_range(1.0..3.0);
            let beta = kb.s[0] * rng.random_range(1.0..3.0);
            let (na, nb) = (rng.random_range(1..=2), rng.random_range(1..=2));
            let be_a = with_epsilon(
                &embed_with_ancillas(&ka.a, alpha, na).unwrap(),
                rng.random_range(0.0..1e-3),
            );
            let be_b = with_epsilon(
                &embed_with_ancillas(&kb.a, beta, nb).unwrap(),
                rng.random_range(0.0..1e-3),
            );
            let ab = multiply(&be_a, &be_b).map_err(|e| e.to_string())?;
            ensure(ab.alpha() == alpha * beta, || {
                format!("alpha {} != {}", ab.alpha(), alpha * beta)
            })?;
            ensure(ab.n_ancilla() == na + nb, || {
                format!("ancillas {} != {}", ab.n_ancilla(), na + nb)
            })?;
            let eps = alpha * be_b.epsilon() + beta * be_a.epsilon();
            ensure(ab.epsilon() == eps, || format!("epsilon {} != {eps}", ab.epsilon()))?;
            let block = ab.block().unwrap();
            let got = Mat::from_fn(n, n, |i, j| block[(i, j)] * ab.alpha());
            let want = &ka.a * &kb.a;
            ensure(diff_norm(&got, &want) < 1e-10, || {
                "product block differs from A B".into()
            })
        }
        "pseudoinverse" => {
            let kappa = rng.random_range(1.5..6.0);
            let k = random_known(&mut rng, n, kappa, 0.3..1.5);
            let alpha = k.s[0] * rng.random_range(1.0..2.0);
            let be = embed_with_ancillas(&k.a, alpha, rng.random_range(1..=2)).unwrap();
            let delta = rng.random_range(1e-3..1e-1);
            let (p, _) = pseudoinverse(&be, kappa, delta).map_err(|e| e.to_string())?;
            let norm = encoded_spectrum(&be).unwrap().norm;
            ensure(p.alpha() == 2.0 * kappa / norm, || {
                format!("alpha {} != 2 kappa/|A|", p.alpha())
            })?;
            ensure(rel(norm, k.s[0]) < 1e-12, || {
                format!("|A| = {norm}, constructed {}", k.s[0])
            })?;
            ensure(p.n_ancilla() == be.n_ancilla() + 1, || "ancillas != a + 1".into())?;
            ensure(p.epsilon() == delta, || format!("epsilon {} != {delta}", p.epsilon()))?;
            let pinv = {
                let vs = Mat::from_fn(n, n, |i, j| k.v[(i, j)] / k.s[j]);
                &vs * k.u.adjoint()
            };
            let block = p.block().unwrap();
            let got = Mat::from_fn(n, n, |i, j| block[(i, j)] * p.alpha());
            ensure(diff_norm(&got, &pinv) <= delta, || {
                "pseudoinverse block misses A^+ by more than delta".into()
            })
        }
        "regularized" => {
            let k = random_known(&mut rng, n, 5.0, 0.3..1.5);
            let alpha = k.s[0] * rng.random_range(1.0..2.0);
            let lambda: f64 = rng.random_range(0.0..0.5);
            let root = lambda.sqrt();
            let be = embed_with_ancillas(&k.a, alpha, rng.random_range(1..=2)).unwrap();
            let aug = augment_tikhonov(&be, lambda).map_err(|e| e.to_string())?;
            ensure(aug.alpha() == alpha + root, || {
                format!("augmented alpha {} != alpha + sqrt(lambda)", aug.alpha())
            })?;
            ensure(aug.n_ancilla() == be.n_ancilla(), || {
                "augmentation changed the ancilla count".into()
            })?;
            ensure(aug.epsilon() == be.epsilon(), || "augmentation changed epsilon".into())?;
            let delta = rng.random_range(1e-3..1e-1);
            let (p, cost) = regularized_pseudoinverse(&be, lambda, delta).map_err(|e| e.to_string())?;
            let (kappa, norm_x) = (cost.factors["kappa"], cost.factors["norm_X"]);
            ensure(p.alpha() == 2.0 * kappa / (norm_x + root), || {
                format!("alpha {} != 2 kappa/(|X| + sqrt(lambda))", p.alpha())
            })?;
            let smax = k.s[0];
            let smin = k.s[n - 1];
            let kappa_oracle = ((smax * smax + lambda) / (smin * smin + lambda)).sqrt();
            ensure(rel(kappa, kappa_oracle) < 1e-10, || {
                format!("kappa {kappa} != {kappa_oracle}")
            })?;
            ensure(rel(norm_x, smax) < 1e-12, || format!("|X| {norm_x} != {smax}"))?;
            ensure(p.n_ancilla() == be.n_ancilla() + 1, || "ancillas != a + 1".into())?;
            ensure(p.epsilon() == delta, || "epsilon != delta".into())
        }
        _ => {
            let kx = random_known(&mut rng, n, 3.0, 0.5..1.5);
            let rows_y = rng.random_range(1..=n);
            let y = super::random_matrix(&mut rng, rows_y, n);
            let lambda: f64 = [0.0, 0.01, 0.1][rng.random_range(0..3)];
            let root = lambda.sqrt();
            let a_x = rng.random_range(1..=2);
            let be_x = embed_with_ancillas(&kx.a, kx.s[0] * rng.random_range(1.0..1.5), a_x).unwrap();
            let kappa = augmented_condition_number(&be_x, lambda).unwrap();
            let delta_w = rng.random_range(1e-3..5e-2);
            let norm_y = super::power_spectral_norm(&y);
            let raw_y = embed_with_ancillas(&y, norm_y * 1.3, rng.random_range(1..=2)).map_err(|e| e.to_string())?;
            let (be_y, _) = preamplify(&raw_y, &y, delta_w / (8.0 * kappa)).map_err(|e| e.to_string())?;
            let (w, cost) = build_weight_encoding(&be_x, &be_y, lambda, delta_w, None).map_err(|e| e.to_string())?;
            let (kappa_c, norm_x, norm_y_c) = (cost.factors["kappa"], cost.factors["norm_X"], cost.factors["norm_Y"]);
            let closed = 2.0 * std::f64::consts::SQRT_2 * kappa_c * norm_y_c / (norm_x + root);
            ensure(w.alpha() == closed, || format!("alpha {} != {closed}", w.alpha()))?;
            ensure(rel(norm_y_c, norm_y) < 1e-6, || format!("|Y| {norm_y_c} != {norm_y}"))?;
            ensure(rel(kappa_c, kappa) < 1e-12, || {
                "kappa differs from the augmented condition number".into()
            })?;
            let want_a = be_y.n_ancilla() + be_x.n_ancilla() + 1;
            ensure(w.n_ancilla() == want_a, || {
                format!("ancillas {} != {want_a}", w.n_ancilla())
            })?;
            ensure(w.epsilon() == delta_w, || "epsilon != delta_W".into())?;
            let block = w.block().unwrap();
            let got = Mat::from_fn(rows_y, n, |i, j| block[(i, j)] * w.alpha());
            let oracle = ridge_normal_equations(&kx.a, &y, lambda);
            let err = diff_norm(&got, &oracle);
            ensure(err <= delta_w, || {
                format!("|W_q - W| = {err:e} > delta_W = {delta_w:e}")
            })?;
            Ok(())
        }
    }
}
