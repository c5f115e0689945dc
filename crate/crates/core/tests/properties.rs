use approx::assert_abs_diff_eq;
use num_complex::Complex64;
use oac_core::filter::{
    check_feasibility, lemma1_coeffs, solve_tikhonov, solve_unbiased, tikhonov_objective,
    ReceiveFilter,
};
use oac_core::linalg::{max_abs_diff, norm2};
use oac_core::receiver::{estimate, expected_estimate, expected_estimate_explicit};
use oac_core::signal::{
    hankel_lift, pulse_matrix, pulse_shape, shift, shift_matrix, upsample, SampleVector,
};
use oac_core::transmitter::Frame;
use oac_core::PulseShape64;
use proptest::prelude::*;

fn taps(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 1..=max_len)
}

/// Pulse taps with a guaranteed nonzero first tap.
fn pulse(max_len: usize) -> impl Strategy<Value = PulseShape64> {
    taps(max_len).prop_map(|mut t| {
        t[0] = if t[0] >= 0.0 { t[0] + 0.1 } else { t[0] - 0.1 };
        PulseShape64::custom(t).unwrap()
    })
}

proptest! {
    #[test]
    fn pulse_shaping_is_kronecker_product(
        g in pulse(6),
        symbols in prop::collection::vec(0.0f64..2.0, 1..6),
    ) {
        let ns = g.len();
        let direct = pulse_shape(&upsample(&symbols, ns).unwrap(), &g).unwrap();
        let dense = pulse_matrix(&g, symbols.len()).matvec(&symbols).unwrap();
        prop_assert!(max_abs_diff(direct.samples(), &dense) < 1e-14);
    }

    #[test]
    fn shifts_compose(x in taps(20), a in 0usize..10, b in 0usize..10) {
        prop_assume!(a + b < x.len());
        let twice = shift(&shift(&x, a).unwrap(), b).unwrap();
        prop_assert_eq!(twice, shift(&x, a + b).unwrap());
        let dense = shift_matrix::<f64>(x.len(), a).matvec(&x).unwrap();
        prop_assert_eq!(dense, shift(&x, a).unwrap());
    }

    #[test]
    fn hankel_has_constant_antidiagonals(x in taps(16), d in 0usize..15) {
        prop_assume!(d < x.len());
        let h = hankel_lift(&x, d).unwrap();
        prop_assert_eq!((h.rows(), h.cols()), (d + 1, x.len() - d));
        for r in 1..h.rows() {
            for c in 1..h.cols() {
                prop_assert_eq!(h.entry(r, c), h.entry(r - 1, c - 1));
            }
        }
        let alpha: Vec<f64> = (0..h.cols()).map(|i| i as f64 - 0.5).collect();
        let dense = h.to_dense().matvec(&alpha).unwrap();
        prop_assert!(max_abs_diff(&h.matvec(&alpha).unwrap(), &dense) < 1e-13);
    }

    #[test]
    fn factory_pulses_have_unit_energy(ns in 1usize..80) {
        for g in [PulseShape64::rectangular(ns).unwrap(), PulseShape64::gaussian(ns).unwrap()] {
            prop_assert!((norm2(g.taps()) - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn tikhonov_minimizes_its_objective(
        g in pulse(10),
        d_frac in 0.0f64..1.0,
        lambda in 1e-3f64..10.0,
        direction in prop::collection::vec(-1.0f64..1.0, 10),
        step in 1e-4f64..1e-1,
    ) {
        let d = ((g.len() as f64 * d_frac) as usize).min(g.len() - 1);
        let f = solve_tikhonov(&g, d, lambda).unwrap();
        let alpha = f.trailing().to_vec();
        let best = tikhonov_objective(&g, d, lambda, &alpha).unwrap();
        let moved: Vec<f64> = alpha.iter().zip(&direction).map(|(a, u)| a + step * u).collect();
        prop_assert!(tikhonov_objective(&g, d, lambda, &moved).unwrap() >= best - 1e-12);
    }

    #[test]
    fn tikhonov_norm_shrinks_with_lambda(g in pulse(10), d_frac in 0.0f64..1.0, lambda in 1e-3f64..10.0) {
        let d = ((g.len() as f64 * d_frac) as usize).min(g.len() - 1);
        let small = solve_tikhonov(&g, d, lambda).unwrap().noise_gain();
        let large = solve_tikhonov(&g, d, 2.0 * lambda).unwrap().noise_gain();
        prop_assert!(large <= small * (1.0 + 1e-12));
    }

    #[test]
    fn rectangular_pulse_is_always_compensable(ns in 1usize..40, d_frac in 0.0f64..1.0) {
        let d = ((ns as f64 * d_frac) as usize).min(ns - 1);
        let g = PulseShape64::rectangular(ns).unwrap();
        let report = check_feasibility(&g, d).unwrap();
        prop_assert!(report.feasible);
        prop_assert_eq!(report.rank, 1);
        let f = solve_unbiased(&g, d).unwrap();
        for dk in 0..=d {
            let c = lemma1_coeffs(&f, &g, dk).unwrap();
            prop_assert!((c.current - 1.0).abs() < 1e-12 && c.previous.abs() < 1e-12);
        }
    }

    #[test]
    fn overdetermined_generic_pulses_are_infeasible(g in pulse(10)) {
        // One column, at least two distinct-ratio rows: no exact solution.
        let ns = g.len();
        prop_assume!(ns >= 2);
        let t = g.taps();
        prop_assume!((0..ns).any(|i| (t[i] - t[0]).abs() > 1e-3));
        prop_assert!(!check_feasibility(&g, ns - 1).unwrap().feasible);
    }

    #[test]
    fn expectation_shortcut_matches_quadratic_form(
        g in pulse(6),
        filter_taps in prop::collection::vec(-1.0f64..1.0, 6),
        x in prop::collection::vec(prop::collection::vec(0.0f64..3.0, 3), 1..4),
        delay_seeds in prop::collection::vec(0usize..100, 4),
    ) {
        let ns = g.len();
        let filter = ReceiveFilter::custom(filter_taps[..ns].to_vec(), 0).unwrap();
        let delays: Vec<usize> = delay_seeds[..x.len()].iter().map(|s| s % ns).collect();
        let frame = Frame::new(x, 0.0, 3.0).unwrap();
        let a = expected_estimate(&frame, &filter, &g, &delays).unwrap();
        let b = expected_estimate_explicit(&frame, &filter, &g, &delays).unwrap();
        prop_assert!(max_abs_diff(&a, &b) < 1e-12);
    }

    #[test]
    fn raw_estimate_is_quadratic_in_the_signal(
        re in prop::collection::vec(-1.0f64..1.0, 8),
        im in prop::collection::vec(-1.0f64..1.0, 8),
        scale in 0.1f64..5.0,
    ) {
        let v: Vec<Complex64> = re.iter().zip(&im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        let filter = ReceiveFilter::custom(vec![0.3, -0.2, 0.9, 0.4], 1).unwrap();
        let base = SampleVector::new(v.clone(), 2, 4).unwrap();
        let scaled = SampleVector::new(v.iter().map(|s| s * scale).collect(), 2, 4).unwrap();
        let a = estimate(&[base], &filter, 0.5, 3).unwrap();
        let b = estimate(&[scaled], &filter, 0.5, 3).unwrap();
        for (x, y) in a.f_hat_raw.iter().zip(&b.f_hat_raw) {
            prop_assert!((x * scale * scale - y).abs() < 1e-12 * (1.0 + y.abs()));
        }
        prop_assert_eq!(a.correction, b.correction);
    }
}

#[test]
fn unbiased_filter_is_exact_in_expectation_for_every_admissible_delay() {
    let g = PulseShape64::gaussian(10).unwrap();
    let f = solve_unbiased(&g, 4).unwrap();
    let frame = Frame::new(vec![vec![0.5, 2.5, 1.0, 3.0]; 5], 0.0, 3.0).unwrap();
    for dk in 0..=4 {
        let e = expected_estimate(&frame, &f, &g, &[dk; 5]).unwrap();
        for (a, b) in e.iter().zip(frame.mean()) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-9);
        }
    }
}
