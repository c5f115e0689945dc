//! Fusion-center side: block filtering, the squared-magnitude estimator over
//! `M` copies with noise-power correction, and its closed-form expectation.

use num_complex::Complex;

use crate::error::{invalid, mismatch, Result};
use crate::filter::{lemma1_coeffs, ReceiveFilter};
use crate::linalg::{dot, Matrix};
use crate::signal::{pulse_matrix, shift_matrix, PulseShape, SampleVector};
use crate::transmitter::Frame;
use crate::Real;

/// `y[n] = ãᵀ v[n N_s .. (n+1) N_s]`.
pub fn apply_filter<T: Real>(
    v: &SampleVector<Complex<T>>,
    filter: &ReceiveFilter<T>,
) -> Result<Vec<Complex<T>>> {
    if v.samples_per_symbol() != filter.len() {
        return Err(mismatch(format!(
            "signal has {} samples per symbol, filter has {} taps",
            v.samples_per_symbol(),
            filter.len()
        )));
    }
    Ok((0..v.symbols())
        .map(|n| {
            v.block(n)
                .iter()
                .zip(filter.taps())
                .fold(Complex::new(T::zero(), T::zero()), |acc, (&x, &a)| {
                    acc + x * a
                })
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionEstimate<T> {
    /// Corrected estimate `f_hat_raw - correction`; individual entries can be
    /// negative.
    pub f_hat: Vec<T>,
    /// `(1/(MK)) sum_m |y_m[n]|²`.
    pub f_hat_raw: Vec<T>,
    /// `‖ã‖² sigma² / K`.
    pub correction: T,
}

/// Estimates `f_n` from `M` received copies.
pub fn estimate<T: Real>(
    copies: &[SampleVector<Complex<T>>],
    filter: &ReceiveFilter<T>,
    noise_var: T,
    devices: usize,
) -> Result<FunctionEstimate<T>> {
    if copies.is_empty() {
        return Err(invalid("need at least one received copy"));
    }
    if devices == 0 {
        return Err(invalid("need at least one device"));
    }
    if noise_var.is_nan() || noise_var < T::zero() {
        return Err(invalid(format!(
            "noise variance must be >= 0, got {}",
            noise_var
        )));
    }
    let symbols = copies[0].symbols();
    if copies.iter().any(|c| c.symbols() != symbols) {
        return Err(mismatch("copies differ in symbol count"));
    }
    let mut power = vec![T::zero(); symbols];
    for v in copies {
        for (p, y) in power.iter_mut().zip(apply_filter(v, filter)?) {
            *p += y.norm_sqr();
        }
    }
    let scale = T::from_usize(copies.len() * devices).unwrap();
    let k = T::from_usize(devices).unwrap();
    let correction = filter.noise_gain() * noise_var / k;
    let f_hat_raw: Vec<T> = power.into_iter().map(|p| p / scale).collect();
    let f_hat = f_hat_raw.iter().map(|&f| f - correction).collect();
    Ok(FunctionEstimate {
        f_hat,
        f_hat_raw,
        correction,
    })
}

fn check_expectation_args<T: Real>(
    frame: &Frame<T>,
    filter: &ReceiveFilter<T>,
    g: &PulseShape<T>,
    delays: &[usize],
) -> Result<()> {
    if delays.len() != frame.devices() {
        return Err(mismatch(format!(
            "{} delays for {} devices",
            delays.len(),
            frame.devices()
        )));
    }
    if filter.len() != g.len() {
        return Err(mismatch("filter and pulse lengths differ"));
    }
    if let Some(&d) = delays.iter().find(|&&d| d >= g.len()) {
        return Err(invalid(format!(
            "delay {} must be below N_s={}",
            d,
            g.len()
        )));
    }
    Ok(())
}

/// `E[f_hat_n]` over phases and noise at fixed messages and delays.
///
/// Device `k` contributes `(c_k sqrt(x_k[n]) + r_k sqrt(x_k[n-1]))²`: both
/// symbols travel with the same phase, so the leakage adds coherently. The
/// first symbol has no predecessor.
pub fn expected_estimate<T: Real>(
    frame: &Frame<T>,
    filter: &ReceiveFilter<T>,
    g: &PulseShape<T>,
    delays: &[usize],
) -> Result<Vec<T>> {
    check_expectation_args(frame, filter, g, delays)?;
    let coeffs = delays
        .iter()
        .map(|&d| lemma1_coeffs(filter, g, d))
        .collect::<Result<Vec<_>>>()?;
    let k = T::from_usize(frame.devices()).unwrap();
    Ok((0..frame.symbols())
        .map(|n| {
            coeffs
                .iter()
                .zip(frame.messages())
                .map(|(c, x)| {
                    let mut amp = c.current * x[n].sqrt();
                    if n > 0 {
                        amp += c.previous * x[n - 1].sqrt();
                    }
                    amp * amp
                })
                .sum::<T>()
                / k
        })
        .collect())
}

/// Same quantity as [`expected_estimate`] from the explicit quadratic form
/// `(1/K) a_nᵀ (sum_k B_k √x_k √x_kᵀ B_kᵀ) a_n` with `B_k = E^{d_k} (I_N ⊗ g)`
/// materialized. `O(N_t²)` memory; for cross-checks only.
pub fn expected_estimate_explicit<T: Real>(
    frame: &Frame<T>,
    filter: &ReceiveFilter<T>,
    g: &PulseShape<T>,
    delays: &[usize],
) -> Result<Vec<T>> {
    check_expectation_args(frame, filter, g, delays)?;
    let (symbols, ns) = (frame.symbols(), g.len());
    let nt = symbols * ns;
    let gmat = pulse_matrix(g, symbols);
    let mut gram = Matrix::<T>::zeros(nt, nt);
    for (x, &d) in frame.messages().iter().zip(delays) {
        let b = shift_matrix::<T>(nt, d).matmul(&gmat)?;
        let sqrt_x: Vec<T> = x.iter().map(|v| v.sqrt()).collect();
        let bx = b.matvec(&sqrt_x)?;
        for i in 0..nt {
            for j in 0..nt {
                gram[(i, j)] += bx[i] * bx[j];
            }
        }
    }
    let k = T::from_usize(frame.devices()).unwrap();
    (0..symbols)
        .map(|n| {
            let mut a_n = vec![T::zero(); nt];
            a_n[n * ns..(n + 1) * ns].copy_from_slice(filter.taps());
            Ok(dot(&a_n, &gram.matvec(&a_n)?) / k)
        })
        .collect()
}
