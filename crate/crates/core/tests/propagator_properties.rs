use nalgebra::DMatrix;
use nni_validity::{
    amplitude_matrix, decompose_spec, evolve_state, nni_analytic_amplitude, ChainSpec, Complex64,
    InitialState, TauGrid,
};
use proptest::prelude::*;

fn chain() -> impl Strategy<Value = ChainSpec> {
    (2usize..=60, 0.0f64..1.0, 3.0f64..15.0).prop_map(|(n, m_frac, alpha)| {
        let m = 1 + ((n - 2) as f64 * m_frac).round() as usize;
        ChainSpec::new(n, m, alpha).unwrap()
    })
}

fn max_deviation_from_identity(p: &DMatrix<Complex64>) -> f64 {
    let n = p.nrows();
    let product = p * p.adjoint();
    let mut worst = 0.0f64;
    for j in 0..n {
        for k in 0..n {
            let id = if j == k { 1.0 } else { 0.0 };
            worst = worst.max((product[(j, k)] - Complex64::new(id, 0.0)).norm());
        }
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn propagator_is_unitary_symmetric_and_mirror_invariant(spec in chain(), tau_frac in 0.0f64..1.0) {
        let n = spec.n_spins();
        let tau = tau_frac * 4.0 * n as f64;
        let p = amplitude_matrix(&decompose_spec(&spec).unwrap(), tau);
        prop_assert!(max_deviation_from_identity(&p) <= 1e-10);
        for j in 0..n {
            for k in 0..n {
                prop_assert!((p[(j, k)] - p[(k, j)]).norm() <= 1e-14);
                prop_assert!((p[(j, k)] - p[(n - 1 - j, n - 1 - k)]).norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn propagator_composes(spec in chain(), t1 in 0.0f64..50.0, t2 in 0.0f64..50.0) {
        let d = decompose_spec(&spec).unwrap();
        let composed = amplitude_matrix(&d, t1) * amplitude_matrix(&d, t2);
        let direct = amplitude_matrix(&d, t1 + t2);
        let worst = composed.iter().zip(direct.iter()).fold(0.0f64, |acc, (a, b)| acc.max((a - b).norm()));
        prop_assert!(worst <= 1e-9);
    }

    #[test]
    fn nearest_neighbor_matches_sine_basis(n in 2usize..=50, j_frac in 0.0f64..1.0, k_frac in 0.0f64..1.0) {
        let j = 1 + ((n - 1) as f64 * j_frac).round() as usize;
        let k = 1 + ((n - 1) as f64 * k_frac).round() as usize;
        let spec = ChainSpec::nearest_neighbor(n, 3.0).unwrap();
        let grid = TauGrid::simpson(4.0 * n as f64, 0.25).unwrap();
        let series = decompose_spec(&spec).unwrap().series(j, k, &grid).unwrap();
        for (s, value) in series.values.iter().enumerate() {
            let oracle = nni_analytic_amplitude(n, j, k, grid.tau(s));
            prop_assert!((value - oracle).norm() <= 1e-8);
        }
    }

    #[test]
    fn evolution_preserves_norm(spec in chain(), tau in 0.0f64..200.0, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let raw: Vec<Complex64> = (0..spec.n_spins())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-3);
        let state = InitialState::new(raw.into_iter().map(|a| a / norm).collect()).unwrap();
        let out = evolve_state(&state, &spec, tau).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() <= 1e-10);
    }
}

#[test]
fn end_to_end_row_is_a_probability_distribution() {
    // sum_k |p_1k|^2 = 1 at all times (the unitarity row, not a plain amplitude sum)
    let spec = ChainSpec::all_neighbor(9, 3.0).unwrap();
    let d = decompose_spec(&spec).unwrap();
    for tau in [0.0, 1.0, 4.5, 18.0, 36.0] {
        let total: f64 = (1..=9)
            .map(|k| d.amplitude(1, k, tau).unwrap().norm_sqr())
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
