use splitorder_core::scheme::builtin;
use splitorder_mc::estimate::{estimate_strong_order, estimate_weak_order, McConfig, Verdict};
use splitorder_mc::system::{builtin_system, witness_system, BoundSystem};

fn ladder(t: f64) -> Vec<f64> {
    (3..=6).map(|k| t / 2f64.powi(k)).collect()
}

#[test]
fn lie_trotter_strong_slope_on_witness_system() {
    let s = builtin("lie-trotter").unwrap().validate().unwrap();
    let w = s.alphabet.parse_word("Ab").unwrap();
    let sys = BoundSystem::bind(&witness_system(&s.alphabet, &w).unwrap(), s.alphabet.clone()).unwrap();
    let est = estimate_strong_order(&s, &sys, &McConfig::new(2000, 1, ladder(1.0))).unwrap();
    assert_eq!(est.predicted, Some(1.0));
    assert_eq!(est.verdict, Verdict::Pass, "{est:?}");
}

#[test]
fn counterexample_strong_error_does_not_shrink() {
    let s = builtin("counterexample").unwrap().validate().unwrap();
    let sys = BoundSystem::bind(&builtin_system("gbm").unwrap(), s.alphabet.clone()).unwrap();
    let est = estimate_strong_order(&s, &sys, &McConfig::new(1000, 2, ladder(1.0))).unwrap();
    assert_eq!(est.predicted, Some(0.0));
    assert!(est.slope.abs() < 0.25, "{est:?}");
}

#[test]
fn exact_scheme_has_no_prediction() {
    let s = builtin("exact").unwrap().validate().unwrap();
    let sys = BoundSystem::bind(&builtin_system("gbm-integrator").unwrap(), s.alphabet.clone()).unwrap();
    let est = estimate_strong_order(&s, &sys, &McConfig::new(200, 3, ladder(1.0))).unwrap();
    assert_eq!(est.verdict, Verdict::NoPrediction);
}

#[test]
fn lie_trotter_weak_slope() {
    let s = builtin("lie-trotter").unwrap().validate().unwrap();
    let sys = BoundSystem::bind(&builtin_system("gbm-integrator").unwrap(), s.alphabet.clone()).unwrap();
    let obs = sys.observable.clone();
    let est = estimate_weak_order(&s, &sys, &obs, &McConfig::new(2000, 4, ladder(1.0))).unwrap();
    assert_eq!(est.predicted, Some(1.0));
    assert_eq!(est.verdict, Verdict::Pass, "{est:?}");
}

#[test]
fn bad_ladders_and_systems_are_rejected() {
    let s = builtin("lie-trotter").unwrap().validate().unwrap();
    let sys = BoundSystem::bind(&builtin_system("gbm-integrator").unwrap(), s.alphabet.clone()).unwrap();
    assert!(estimate_strong_order(&s, &sys, &McConfig::new(10, 1, vec![0.5, 0.25])).is_err());
    assert!(estimate_strong_order(&s, &sys, &McConfig::new(10, 1, vec![0.5, 0.25, 0.3])).is_err());
    // ou lacks the letter b.
    assert!(BoundSystem::bind(&builtin_system("ou").unwrap(), s.alphabet.clone()).is_err());
}
