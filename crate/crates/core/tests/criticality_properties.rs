use nni_validity::{
    find_alpha_c, find_alpha_c_at_horizon, CriterionKind, CriterionTarget, SearchSettings,
};

fn settings(step: f64) -> SearchSettings {
    SearchSettings {
        alpha_step: step,
        ..SearchSettings::default()
    }
}

#[test]
fn refining_the_exponent_grid_moves_alpha_c_by_at_most_one_step() {
    for target in [
        CriterionTarget::end_to_end(),
        CriterionTarget::full_matrix(),
    ] {
        let coarse = find_alpha_c(9, target, &settings(0.02)).unwrap();
        let fine = find_alpha_c(9, target, &settings(0.01)).unwrap();
        assert!(
            (coarse.alpha_c - fine.alpha_c).abs() <= 0.02 + 1e-9,
            "{:?}: {} vs {}",
            target.kind,
            coarse.alpha_c,
            fine.alpha_c
        );
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| find_alpha_c(12, CriterionTarget::full_matrix(), &settings(0.05)).unwrap())
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn full_matrix_threshold_dominates_end_to_end() {
    for n in [4, 8, 12, 16] {
        let end = find_alpha_c(n, CriterionTarget::end_to_end(), &settings(0.01)).unwrap();
        let full = find_alpha_c(n, CriterionTarget::full_matrix(), &settings(0.01)).unwrap();
        assert!(
            full.alpha_c >= end.alpha_c,
            "N={n}: {} < {}",
            full.alpha_c,
            end.alpha_c
        );
    }
}

#[test]
fn short_chain_binds_on_a_diagonal_pair() {
    let r = find_alpha_c(5, CriterionTarget::full_matrix(), &settings(0.01)).unwrap();
    let binding = r.binding.unwrap();
    assert_eq!(binding.pair.0, binding.pair.1);
}

#[test]
fn chain_of_twenty_thresholds_follow_the_logarithmic_law() {
    let end = find_alpha_c(20, CriterionTarget::end_to_end(), &settings(0.01)).unwrap();
    assert!((end.alpha_c - 10.53).abs() <= 0.35, "{}", end.alpha_c);
    let full = find_alpha_c(20, CriterionTarget::full_matrix(), &settings(0.01)).unwrap();
    assert!((full.alpha_c - 12.03).abs() <= 0.35, "{}", full.alpha_c);
}

#[test]
fn growing_chain_raises_the_threshold() {
    let values: Vec<f64> = [5, 10, 20]
        .iter()
        .map(|&n| {
            find_alpha_c(n, CriterionTarget::end_to_end(), &settings(0.01))
                .unwrap()
                .alpha_c
        })
        .collect();
    assert!(values.windows(2).all(|w| w[0] < w[1]), "{values:?}");
}

#[test]
fn longer_horizons_past_arrival_raise_the_threshold() {
    let at = |t: f64| {
        find_alpha_c_at_horizon(20, CriterionKind::EndToEnd, t, &settings(0.01))
            .unwrap()
            .alpha_c
    };
    let (t40, t60, t100) = (at(40.0), at(60.0), at(100.0));
    assert!(t40 <= t60 && t60 <= t100, "{t40} {t60} {t100}");
}
