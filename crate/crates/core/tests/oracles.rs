//! Values frozen from an independent dense-matrix computation (explicit
//! Hankel, pseudo-inverse and Kronecker products), plus cross-checks of the
//! hand-written linear algebra against nalgebra.

use approx::assert_abs_diff_eq;
use nalgebra::DMatrix;
use oac_core::filter::{lemma1_coeffs, matched_filter, solve_tikhonov, solve_unbiased};
use oac_core::linalg::{cholesky_solve, Matrix, Svd};
use oac_core::receiver::{expected_estimate, expected_estimate_explicit};
use oac_core::signal::hankel_lift;
use oac_core::transmitter::Frame;
use oac_core::PulseShape64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GAUSS6: [f64; 6] = [
    0.0330039494394006,
    0.24386803389400188,
    0.6629020450760998,
    0.6629020450760998,
    0.24386803389400188,
    0.0330039494394006,
];

const TIK_8_3: [f64; 8] = [
    0.0,
    0.0,
    0.0,
    0.5701104243835704,
    0.5329191357312026,
    0.4288163384632801,
    0.532919135731202,
    0.5701104243835712,
];

#[test]
fn gaussian_taps() {
    let g = PulseShape64::gaussian(6).unwrap();
    for (a, b) in g.taps().iter().zip(GAUSS6) {
        assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
    }
}

#[test]
fn tikhonov_gaussian_8_3() {
    let g = PulseShape64::gaussian(8).unwrap();
    let f = solve_tikhonov(&g, 3, 0.1).unwrap();
    for (a, b) in f.taps().iter().zip(TIK_8_3) {
        assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
    }
    assert_abs_diff_eq!(f.noise_gain(), 1.401940854571668, epsilon = 1e-12);
    let c: Vec<f64> = (0..4)
        .map(|dk| lemma1_coeffs(&f, &g, dk).unwrap().current)
        .collect();
    assert_abs_diff_eq!(c[0], 0.8885460207900675, epsilon = 1e-12);
    assert_abs_diff_eq!(c[1], 1.0281429228907843, epsilon = 1e-12);
    assert_abs_diff_eq!(c[3], 0.8885460207900677, epsilon = 1e-12);
}

#[test]
fn matched_gaussian_leakage() {
    let g = PulseShape64::gaussian(8).unwrap();
    let c = lemma1_coeffs(&matched_filter(&g), &g, 3).unwrap();
    assert_abs_diff_eq!(c.current, 0.280525088120432, epsilon = 1e-14);
    assert_abs_diff_eq!(c.previous, 0.026915322950542424, epsilon = 1e-14);
}

#[test]
fn unbiased_gaussian_12_5_noise_gain() {
    let g = PulseShape64::gaussian(12).unwrap();
    let f = solve_unbiased(&g, 5).unwrap();
    assert_abs_diff_eq!(f.noise_gain(), 26.334657064656458, epsilon = 1e-7);
}

#[test]
fn expected_estimate_two_devices() {
    let g = PulseShape64::gaussian(8).unwrap();
    let f = solve_tikhonov(&g, 3, 0.1).unwrap();
    let frame = Frame::new(vec![vec![1.0, 2.0, 0.5], vec![3.0, 0.0, 1.5]], 0.0, 3.0).unwrap();
    let want = [0.6343767431982539, 1.0655154053655322, 0.317188371599127];
    for e in [
        expected_estimate(&frame, &f, &g, &[2, 5]).unwrap(),
        expected_estimate_explicit(&frame, &f, &g, &[2, 5]).unwrap(),
    ] {
        for (a, b) in e.iter().zip(want) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }
}

fn to_nalgebra(m: &Matrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |r, c| m[(r, c)])
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix<f64> {
    Matrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

#[test]
fn singular_values_match_nalgebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let (r, c) = (rng.random_range(1..12), rng.random_range(1..12));
        let a = random_matrix(&mut rng, r, c);
        let ours = Svd::new(&a);
        let mut theirs: Vec<f64> = to_nalgebra(&a).singular_values().iter().copied().collect();
        theirs.sort_by(|x, y| y.partial_cmp(x).unwrap());
        for (x, y) in ours.singular_values.iter().zip(&theirs) {
            assert_abs_diff_eq!(*x, *y, epsilon = 1e-12);
        }
    }
}

#[test]
fn min_norm_matches_pseudo_inverse() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..50 {
        let ns = rng.random_range(2..14);
        let taps: Vec<f64> = (0..ns).map(|_| rng.random_range(-1.0..1.0)).collect();
        let d = rng.random_range(0..ns);
        let h = hankel_lift(&taps, d).unwrap().to_dense();
        let svd = Svd::new(&h);
        let ones = vec![1.0; d + 1];
        let ours = svd
            .solve_min_norm(&ones, svd.max_singular_value() * 1e-12)
            .unwrap();
        let pinv = to_nalgebra(&h).pseudo_inverse(1e-12).unwrap();
        let theirs = pinv * nalgebra::DVector::from_vec(ones);
        for (x, y) in ours.iter().zip(theirs.iter()) {
            assert_abs_diff_eq!(*x, *y, epsilon = 1e-8 * (1.0 + y.abs()));
        }
    }
}

#[test]
fn cholesky_matches_nalgebra() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let n = rng.random_range(1..10);
        let a = random_matrix(&mut rng, n + 3, n);
        let mut spd = a.gram();
        for i in 0..n {
            spd[(i, i)] += 0.5;
        }
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let ours = cholesky_solve(&spd, &b).unwrap();
        let theirs = to_nalgebra(&spd)
            .cholesky()
            .unwrap()
            .solve(&nalgebra::DVector::from_vec(b));
        for (x, y) in ours.iter().zip(theirs.iter()) {
            assert_abs_diff_eq!(*x, *y, epsilon = 1e-12);
        }
    }
}
