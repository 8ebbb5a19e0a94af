mod common;

use common::*;
use cqe_core::cqe::{
    assemble_antihermitian, assemble_hermitian, build_pool, residual_a, residual_b,
};
use cqe_core::experiment::solve_tc;
use cqe_core::{
    build_tavis_cummings, diagonalize, solve, Backend, BackendSpec, CqeConfig, InitialState,
    TcParams, Verdict,
};
use proptest::prelude::*;

fn tc(n_sites: usize, g: f64) -> TcParams {
    TcParams {
        n_sites,
        ..TcParams::default()
    }
    .with_coupling(g)
}

#[test]
fn residuals_respect_adjoint_symmetry_and_assemble_cleanly() {
    let mut rng = rng(21);
    let h = build_tavis_cummings(&tc(3, 0.9)).unwrap();
    let pool = build_pool(&h).unwrap();
    assert!(pool.closed_under_adjoint());
    let mut backend = Backend::exact();
    for _ in 0..5 {
        let psi = random_state(&mut rng, h.basis());
        let e = h.energy(&psi).unwrap();
        let a = residual_a(&pool, &h, &psi, &mut backend).unwrap();
        let b = residual_b(&pool, &h, &psi, e, &mut backend).unwrap();
        for k in 0..pool.len() {
            let j = pool.adjoint_index(k);
            assert!((a[j] + a[k].conj()).norm() <= 1e-10);
            assert!((b[j] - b[k].conj()).norm() <= 1e-10);
        }
        let a_hat = assemble_antihermitian(&pool, &a).unwrap();
        let b_hat = assemble_hermitian(&pool, &b).unwrap();
        assert!(!a_hat.symmetrized && !b_hat.symmetrized);
        assert!(a_hat.operator.anti_hermiticity_residual() <= 1e-12);
        assert!(b_hat.operator.hermiticity_residual() <= 1e-12);
    }
}

#[test]
fn noisy_residuals_are_symmetrized() {
    let mut rng = rng(4);
    let h = build_tavis_cummings(&tc(2, 1.1)).unwrap();
    let pool = build_pool(&h).unwrap();
    let psi = random_state(&mut rng, h.basis());
    let e = h.energy(&psi).unwrap();
    let mut backend = Backend::sampled(100, 9).unwrap();
    let a = residual_a(&pool, &h, &psi, &mut backend).unwrap();
    let b = residual_b(&pool, &h, &psi, e, &mut backend).unwrap();
    let a_hat = assemble_antihermitian(&pool, &a).unwrap();
    let b_hat = assemble_hermitian(&pool, &b).unwrap();
    assert!(a_hat.symmetrized && b_hat.symmetrized);
    assert_eq!(a_hat.operator.anti_hermiticity_residual(), 0.0);
    assert_eq!(b_hat.operator.hermiticity_residual(), 0.0);
}

#[test]
fn zero_residuals_assemble_to_zero() {
    let h = build_tavis_cummings(&tc(1, 0.3)).unwrap();
    let pool = build_pool(&h).unwrap();
    let zeros = vec![c(0.0, 0.0); pool.len()];
    assert_eq!(
        assemble_antihermitian(&pool, &zeros)
            .unwrap()
            .operator
            .nnz(),
        0
    );
    assert_eq!(assemble_hermitian(&pool, &zeros).unwrap().operator.nnz(), 0);
}

#[test]
fn exact_ground_state_is_a_fixed_point() {
    for g in [0.3, 0.9, 1.7] {
        let h = build_tavis_cummings(&tc(3, g)).unwrap();
        let ground = diagonalize(&h, 1).unwrap();
        let config = CqeConfig {
            initial_state: InitialState::State(ground.ground_state().clone()),
            ..CqeConfig::default()
        };
        let trace = solve(&h, &config).unwrap();
        assert_eq!(trace.iterations(), 0);
        assert_eq!(trace.verdict, Verdict::ConvergedVariance);
        assert!((trace.final_energy() - ground.ground_energy()).abs() <= 1e-10);
    }
}

#[test]
fn random_hamiltonians_descend_monotonically() {
    let mut rng = rng(8);
    for _ in 0..4 {
        let h = random_hamiltonian(&mut rng, 3, 2);
        let config = CqeConfig {
            max_iters: 60,
            initial_state: InitialState::Uniform,
            ..CqeConfig::default()
        };
        let trace = solve(&h, &config).unwrap();
        let e0 = diagonalize(&h, 1).unwrap().ground_energy();
        for w in trace.records.windows(2) {
            assert!(w[1].energy <= w[0].energy + 1e-12);
        }
        assert!(trace.final_energy() >= e0 - 1e-10);
    }
}

#[test]
fn single_site_below_resonance_converges() {
    // below g = 1 the ground state is |-, 0> with energy 0
    let trace = solve_tc(&tc(1, 0.5), &CqeConfig::default(), 0).unwrap();
    assert!(
        trace.final_energy().abs() <= 1e-6,
        "E = {}",
        trace.final_energy()
    );
    assert_ne!(trace.verdict, Verdict::MaxIters);
}

#[test]
fn sampled_solves_repeat_with_the_seed() {
    let config = CqeConfig {
        backend: BackendSpec::Sampled {
            shots: 10_000,
            seed: 0,
        },
        max_iters: 40,
        ..CqeConfig::default()
    };
    let a = solve_tc(&tc(2, 0.8), &config, 77).unwrap();
    let b = solve_tc(&tc(2, 0.8), &config, 77).unwrap();
    let c = solve_tc(&tc(2, 0.8), &config, 78).unwrap();
    assert_eq!(a.records, b.records);
    assert_eq!(a.final_state.amplitudes(), b.final_state.amplitudes());
    assert_ne!(a.records, c.records);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn unitary_steps_preserve_sector_weights(n_sites in 1usize..=3, g in 0.0..2.0f64) {
        let config = CqeConfig { max_iters: 40, ..CqeConfig::default() };
        let trace = solve_tc(&tc(n_sites, g), &config, 0).unwrap();
        for r in &trace.records {
            prop_assert!(r.unitary_sector_drift <= 1e-10);
            prop_assert!((r.sector_weights.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
        }
        for (i, r) in trace.records.iter().enumerate() {
            prop_assert_eq!(r.n, i);
        }
    }
}
