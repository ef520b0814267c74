mod common;

use common::{c, diff_norm, tfim_kron};
use proptest::prelude::*;
use qngrc_core::dynamics::{
    build_tfim_hamiltonian, default_time_step, evolve_series, max_eigen_energy, propagator, state_at, states_at_steps,
    Hamiltonian,
};
use qngrc_core::linalg::{hermitian_eigen, CMat};
use qngrc_core::{Error, StateVector};

fn energy(h: &Hamiltonian, s: &StateVector) -> f64 {
    let hs = common::matvec(h.matrix(), s.amplitudes());
    s.amplitudes()
        .iter()
        .zip(&hs)
        .map(|(a, b)| a.conj() * b)
        .sum::<qngrc_core::c64>()
        .re
}

#[test]
fn tfim_matches_kronecker_assembly() {
    for n in 2..=5 {
        for (j, h) in [(0.5, 5.0), (1.0, 0.3), (-0.7, 1.1)] {
            let built = build_tfim_hamiltonian(n, j, h).unwrap();
            let oracle = tfim_kron(n, j, h);
            assert!(diff_norm(built.matrix(), &oracle) < 1e-12, "n = {n}, J = {j}, h = {h}");
        }
    }
}

#[test]
fn two_site_hamiltonian_by_hand() {
    // periodic wrap doubles the single bond for n = 2
    let h = build_tfim_hamiltonian(2, 0.5, 5.0).unwrap();
    let m = h.matrix();
    assert!((m[(0, 0)].re + 1.0).abs() < 1e-15);
    assert!((m[(1, 1)].re - 1.0).abs() < 1e-15);
    assert!((m[(1, 0)].re - 5.0).abs() < 1e-15);
    assert!((m[(3, 0)].re).abs() < 1e-15);
}

#[test]
fn rejects_out_of_range_sizes() {
    assert!(matches!(
        build_tfim_hamiltonian(1, 1.0, 1.0),
        Err(Error::InvalidArgument(_))
    ));
    assert!(matches!(
        build_tfim_hamiltonian(15, 1.0, 1.0),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn time_step_rule_uses_the_largest_eigenvalue() {
    let h = build_tfim_hamiltonian(4, 0.5, 5.0).unwrap();
    let (vals, _) = hermitian_eigen(tfim_kron(4, 0.5, 5.0).as_ref()).unwrap();
    let e_max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!((max_eigen_energy(&h).unwrap() - e_max).abs() < 1e-10);
    assert!((default_time_step(&h).unwrap() - 1.0 / (200.0 * e_max)).abs() < 1e-15);
}

#[test]
fn propagator_is_unitary_and_matches_taylor_series() {
    let h = build_tfim_hamiltonian(3, 0.5, 5.0).unwrap();
    let dt = 1e-3;
    let p = propagator(&h, dt).unwrap();
    // exp(-i H dt) through order 8
    let n = h.dim();
    let mut term = common::identity(n);
    let mut sum = common::identity(n);
    for k in 1..=8 {
        term = &term * h.matrix();
        term = Mat::from_fn(n, n, |i, j| term[(i, j)] * c(0.0, -dt / k as f64));
        sum = &sum + &term;
    }
    assert!(diff_norm(p.matrix(), &sum) < 1e-13);
    let g: CMat = p.matrix().adjoint() * p.matrix();
    assert!(diff_norm(&g, &common::identity(n)) < 1e-12);
}

use faer::Mat;

#[test]
fn semigroup_property() {
    let h = build_tfim_hamiltonian(4, 0.5, 5.0).unwrap();
    let s0 = StateVector::zero(4);
    for (t1, t2) in [(0.3, 0.7), (12.5, 1e3), (1e4, 2.5e4)] {
        let direct = state_at(&h, &s0, t1 + t2).unwrap();
        let split = state_at(&h, &state_at(&h, &s0, t1).unwrap(), t2).unwrap();
        let err: f64 = direct
            .amplitudes()
            .iter()
            .zip(split.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "t1 = {t1}, t2 = {t2}, err = {err}");
    }
}

#[test]
fn energy_is_conserved_along_a_trajectory() {
    let h = build_tfim_hamiltonian(4, 0.5, 5.0).unwrap();
    let dt = default_time_step(&h).unwrap();
    let p = propagator(&h, dt).unwrap();
    let series = evolve_series(&p, &StateVector::zero(4), 5000, 1000).unwrap();
    let e0 = energy(&h, &series.states[0]);
    for s in &series.states {
        assert!((energy(&h, s) - e0).abs() < 1e-9);
        assert!((s.norm() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn stepping_agrees_with_direct_exponentiation() {
    let h = build_tfim_hamiltonian(3, 0.5, 5.0).unwrap();
    let dt = default_time_step(&h).unwrap();
    let p = propagator(&h, dt).unwrap();
    let s0 = StateVector::zero(3);
    let series = evolve_series(&p, &s0, 2000, 10_000).unwrap();
    assert_eq!(series.start_step, 10_000);
    let direct = states_at_steps(&h, &s0, dt, [10_000, 10_500, 11_999]).unwrap();
    for (step, d) in [10_000u64, 10_500, 11_999].iter().zip(&direct) {
        let s = series.at_step(*step).unwrap();
        let f = s.inner(d).norm();
        assert!((f - 1.0).abs() < 1e-10, "step {step}: fidelity {f}");
    }
}

#[test]
fn zero_time_is_the_identity() {
    let h = build_tfim_hamiltonian(2, 0.5, 5.0).unwrap();
    let s0 = StateVector::basis(4, 2);
    let s = state_at(&h, &s0, 0.0).unwrap();
    assert!((s.amplitudes()[2] - c(1.0, 0.0)).norm() < 1e-14);
}

#[test]
fn rejects_mismatched_or_unnormalized_states() {
    let h = build_tfim_hamiltonian(2, 0.5, 5.0).unwrap();
    assert!(matches!(
        state_at(&h, &StateVector::zero(3), 1.0),
        Err(Error::DimensionMismatch(_))
    ));
    assert!(matches!(
        StateVector::new(vec![c(1.0, 0.0), c(1.0, 0.0)]),
        Err(Error::NotNormalized { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn evolution_preserves_norm(n in 2usize..5, j in -2.0f64..2.0, h in -6.0f64..6.0, t in 0.0f64..1e5) {
        let ham = build_tfim_hamiltonian(n, j, h).unwrap();
        let s = state_at(&ham, &StateVector::zero(n), t).unwrap();
        prop_assert!((s.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn hamiltonian_is_hermitian(n in 2usize..6, j in -2.0f64..2.0, h in -6.0f64..6.0) {
        let ham = build_tfim_hamiltonian(n, j, h).unwrap();
        let m = ham.matrix();
        let adj: CMat = m.adjoint().to_owned();
        prop_assert!(diff_norm(m, &adj) < 1e-14);
    }
}
