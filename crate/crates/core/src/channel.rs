//! Asynchronous multiple-access channel: integer sample delays, flat Rayleigh
//! fading, superposition and circularly symmetric complex AWGN.

use num_complex::Complex;
use rand::Rng;

use crate::error::{invalid, mismatch, Result};
use crate::signal::SampleVector;
use crate::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization<T> {
    /// Delay of every device in samples, each at most `d_max`.
    pub delays: Vec<usize>,
    /// Fading coefficient of every device, flat over the frame.
    pub h: Vec<Complex<T>>,
    /// Total noise power per complex sample.
    pub noise_var: T,
    pub d_max: usize,
}

impl<T: Real> ChannelRealization<T> {
    pub fn new(delays: Vec<usize>, h: Vec<Complex<T>>, noise_var: T, d_max: usize) -> Result<Self> {
        if delays.len() != h.len() || h.is_empty() {
            return Err(mismatch(format!(
                "{} delays and {} fading coefficients",
                delays.len(),
                h.len()
            )));
        }
        if let Some(&d) = delays.iter().find(|&&d| d > d_max) {
            return Err(invalid(format!("delay {} exceeds d_max={}", d, d_max)));
        }
        if !(noise_var >= T::zero() && noise_var.is_finite()) {
            return Err(invalid(format!(
                "noise variance must be >= 0, got {}",
                noise_var
            )));
        }
        Ok(Self {
            delays,
            h,
            noise_var,
            d_max,
        })
    }

    pub fn devices(&self) -> usize {
        self.h.len()
    }

    /// `|h_k|`, known to each transmitter.
    pub fn magnitudes(&self) -> Vec<T> {
        self.h.iter().map(|h| h.norm()).collect()
    }
}

/// Draws `h_k ~ CN(0, 1)` for all devices, then delays uniform on
/// `{0, ..., d_max}`.
///
/// Delays are `floor(u (d_max + 1))` of one uniform per device, so two calls
/// on identically seeded streams with different `d_max` share the fading
/// draws and produce monotonically coupled delays.
pub fn sample_channel<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    devices: usize,
    d_max: usize,
    noise_var: T,
) -> Result<ChannelRealization<T>> {
    if devices == 0 {
        return Err(invalid("need at least one device"));
    }
    let half = T::lit(0.5).sqrt();
    let h = (0..devices)
        .map(|_| {
            let re = T::standard_normal(rng);
            let im = T::standard_normal(rng);
            Complex::new(re * half, im * half)
        })
        .collect();
    let support = d_max + 1;
    let delays = (0..devices)
        .map(|_| {
            let u = T::unit_uniform(rng).as_f64();
            ((u * support as f64) as usize).min(d_max)
        })
        .collect();
    ChannelRealization::new(delays, h, noise_var, d_max)
}

/// Noiseless superposition `sum_k h_k E^{d_k} s_k`.
pub fn superpose<T: Real>(
    waveforms: &[SampleVector<Complex<T>>],
    chan: &ChannelRealization<T>,
) -> Result<SampleVector<Complex<T>>> {
    let (symbols, ns) = check_shapes(waveforms, chan)?;
    let nt = symbols * ns;
    let mut v = vec![Complex::new(T::zero(), T::zero()); nt];
    for ((s, &h), &d) in waveforms.iter().zip(&chan.h).zip(&chan.delays) {
        for (out, &x) in v[d..].iter_mut().zip(s.samples()) {
            *out += h * x;
        }
    }
    SampleVector::new(v, symbols, ns)
}

/// Received copy `v = sum_k h_k E^{d_k} s_k + z` with fresh noise.
pub fn propagate<T: Real, R: Rng + ?Sized>(
    waveforms: &[SampleVector<Complex<T>>],
    chan: &ChannelRealization<T>,
    rng: &mut R,
) -> Result<SampleVector<Complex<T>>> {
    let mut v = superpose(waveforms, chan)?;
    add_noise(&mut v, chan.noise_var, rng);
    Ok(v)
}

/// Same as [`propagate`] applied to `rotate(baseband[k], phases[k])`, without
/// materializing the rotated waveforms.
pub fn propagate_baseband<T: Real, R: Rng + ?Sized>(
    baseband: &[SampleVector<T>],
    phases: &[T],
    chan: &ChannelRealization<T>,
    rng: &mut R,
) -> Result<SampleVector<Complex<T>>> {
    let (symbols, ns) = check_shapes(baseband, chan)?;
    if phases.len() != baseband.len() {
        return Err(mismatch(format!(
            "{} phases for {} devices",
            phases.len(),
            baseband.len()
        )));
    }
    let mut v = vec![Complex::new(T::zero(), T::zero()); symbols * ns];
    for (((s, &h), &d), &theta) in baseband.iter().zip(&chan.h).zip(&chan.delays).zip(phases) {
        let w = h * Complex::from_polar(T::one(), theta);
        for (out, &x) in v[d..].iter_mut().zip(s.samples()) {
            *out += w * x;
        }
    }
    let mut v = SampleVector::new(v, symbols, ns)?;
    add_noise(&mut v, chan.noise_var, rng);
    Ok(v)
}

fn check_shapes<S, T: Real>(
    waveforms: &[SampleVector<S>],
    chan: &ChannelRealization<T>,
) -> Result<(usize, usize)> {
    if waveforms.len() != chan.devices() {
        return Err(mismatch(format!(
            "{} waveforms for {} devices",
            waveforms.len(),
            chan.devices()
        )));
    }
    let first = &waveforms[0];
    let (symbols, ns) = (first.symbols(), first.samples_per_symbol());
    if waveforms
        .iter()
        .any(|w| w.symbols() != symbols || w.samples_per_symbol() != ns)
    {
        return Err(mismatch("waveforms differ in length"));
    }
    if let Some(&d) = chan.delays.iter().find(|&&d| d >= symbols * ns) {
        return Err(invalid(format!(
            "delay {} not shorter than the {}-sample frame",
            d,
            symbols * ns
        )));
    }
    Ok((symbols, ns))
}

/// Adds i.i.d. `CN(0, noise_var)` samples: each of the real and imaginary
/// parts has variance `noise_var / 2`.
pub fn add_noise<T: Real, R: Rng + ?Sized>(
    v: &mut SampleVector<Complex<T>>,
    noise_var: T,
    rng: &mut R,
) {
    if noise_var == T::zero() {
        return;
    }
    let sd = (noise_var / T::lit(2.0)).sqrt();
    for x in v.samples_mut() {
        let re = T::standard_normal(rng);
        let im = T::standard_normal(rng);
        *x += Complex::new(re * sd, im * sd);
    }
}
