//! Invariants of the adaptive recursions.

use damdc_core::algorithms::{
    baseline_iteration, damdc_iteration, p_update, threshold_map, w_adapt, AlgoError,
    AlgorithmConfig, BaselineKind, NodeState, RegressionSnapshot,
};
use damdc_core::linalg::Mat;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
}

#[test]
fn pinned_selector_reduces_to_standard_on_complex_data() {
    // With the threshold at -inf the selector stays all-ones, and the gated
    // recursion must trace standard diffusion LMS exactly, including in
    // complex arithmetic.
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cfg = AlgorithmConfig {
        tau: f64::NEG_INFINITY,
        project_combination: false,
        ..AlgorithmConfig::default()
    };
    let cfg_std = AlgorithmConfig::default();
    let mut damdc = NodeState::<Complex64>::new(3);
    let mut standard = NodeState::<Complex64>::new(3);
    for _ in 0..200 {
        let row: Vec<Complex64> = (0..3).map(|_| random_complex(&mut rng)).collect();
        let d = vec![random_complex(&mut rng)];
        let snap = RegressionSnapshot::new(Mat::from_rows(vec![row]).unwrap(), d);
        damdc = damdc_iteration(0, &damdc, &snap, &cfg, &[1.0], &[]).unwrap();
        standard =
            baseline_iteration(BaselineKind::Standard, 0, &standard, &snap, &cfg_std, &[1.0], &[])
                .unwrap();
        for m in 0..3 {
            let diff = (damdc.omega[m] - standard.omega[m]).norm();
            let scale = standard.omega[m].norm().max(1e-30);
            assert!(diff / scale <= 1e-12, "trajectories drifted apart");
        }
    }
}

#[test]
fn projection_algebra_forms_agree() {
    // A binary diagonal selector commutes through the inner product: the
    // three groupings conj(w)^T (P x), p^T (conj(w) o x), x^T (P conj(w))
    // must agree to floating-point accuracy.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let m = 6;
        let w: Vec<Complex64> = (0..m).map(|_| random_complex(&mut rng)).collect();
        let x: Vec<Complex64> = (0..m).map(|_| random_complex(&mut rng)).collect();
        let p: Vec<f64> = (0..m).map(|_| if rng.random::<bool>() { 1.0 } else { 0.0 }).collect();

        let f1: Complex64 = (0..m).map(|i| w[i].conj() * (p[i] * x[i])).sum();
        let f2: Complex64 = (0..m).map(|i| p[i] * (w[i].conj() * x[i])).sum();
        let f3: Complex64 = (0..m).map(|i| x[i] * (p[i] * w[i].conj())).sum();
        assert!((f1 - f2).norm() <= 1e-12);
        assert!((f1 - f3).norm() <= 1e-12);
    }
}

#[test]
fn non_finite_updates_are_reported_as_divergence() {
    let snap = RegressionSnapshot::new(
        Mat::from_rows(vec![vec![1e308, 0.0]]).unwrap(),
        vec![1e308],
    );
    let mut st = NodeState::<f64>::new(2);
    st.omega = vec![1e308, 0.0];
    st.companion = st.omega.clone();
    assert!(matches!(
        p_update(&st, &snap, 1.0),
        Err(AlgoError::NonFinite(_))
    ));
    assert!(matches!(
        w_adapt(&st, &snap, 1.0),
        Err(AlgoError::NonFinite(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn thresholding_binary_vectors_is_idempotent(
        p in proptest::collection::vec(-5.0f64..5.0, 1..16),
        tau_raw in 0.0f64..1.0,
    ) {
        // tau in (0, 1]: any binary vector is a fixed point of the map.
        let tau = 1.0 - tau_raw * 0.999;
        let once = threshold_map(&p, tau);
        let twice = threshold_map(&once, tau);
        prop_assert_eq!(once, twice);
    }
}
