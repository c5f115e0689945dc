//! Device side: message frames, square-root amplitude modulation with
//! channel-magnitude pre-equalization, and the `M` phase-rotated copies each
//! device sends.

use num_complex::Complex;
use rand::Rng;

use crate::error::{invalid, mismatch, Result};
use crate::signal::{pulse_shape, upsample, PulseShape, SampleVector};
use crate::Real;

/// `K x N` messages `x_k[n]`, all inside the nonnegative domain
/// `[x_min, x_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame<T> {
    messages: Vec<Vec<T>>,
    x_min: T,
    x_max: T,
}

impl<T: Real> Frame<T> {
    pub fn new(messages: Vec<Vec<T>>, x_min: T, x_max: T) -> Result<Self> {
        check_domain(x_min, x_max)?;
        let n = messages.first().map_or(0, Vec::len);
        if messages.is_empty() || n == 0 {
            return Err(invalid("frame needs K >= 1 devices and N >= 1 symbols"));
        }
        if messages.iter().any(|row| row.len() != n) {
            return Err(mismatch("every device must carry N messages"));
        }
        if let Some(bad) = messages
            .iter()
            .flatten()
            .find(|&&x| !(x >= x_min && x <= x_max))
        {
            return Err(invalid(format!(
                "message {} outside [{}, {}]",
                bad, x_min, x_max
            )));
        }
        Ok(Self {
            messages,
            x_min,
            x_max,
        })
    }

    /// I.i.d. uniform messages on `[x_min, x_max]`, drawn device by device.
    pub fn random<R: Rng + ?Sized>(
        rng: &mut R,
        devices: usize,
        symbols: usize,
        x_min: T,
        x_max: T,
    ) -> Result<Self> {
        check_domain(x_min, x_max)?;
        let span = x_max - x_min;
        let messages = (0..devices)
            .map(|_| {
                (0..symbols)
                    .map(|_| (x_min + span * T::unit_uniform(rng)).min(x_max))
                    .collect()
            })
            .collect();
        Self::new(messages, x_min, x_max)
    }

    /// The target `f_n = (1/K) sum_k x_k[n]`.
    pub fn mean(&self) -> Vec<T> {
        let k = T::from_usize(self.devices()).unwrap();
        (0..self.symbols())
            .map(|n| self.messages.iter().map(|row| row[n]).sum::<T>() / k)
            .collect()
    }

    /// Same frame with every message multiplied by `factor`; the domain is
    /// scaled along with it.
    pub fn scaled(&self, factor: T) -> Result<Self> {
        Self::new(
            self.messages
                .iter()
                .map(|row| row.iter().map(|&x| x * factor).collect())
                .collect(),
            self.x_min * factor,
            self.x_max * factor,
        )
    }
}

impl<T: Copy> Frame<T> {
    pub fn devices(&self) -> usize {
        self.messages.len()
    }

    pub fn symbols(&self) -> usize {
        self.messages[0].len()
    }

    pub fn row(&self, k: usize) -> &[T] {
        &self.messages[k]
    }

    pub fn messages(&self) -> &[Vec<T>] {
        &self.messages
    }

    pub fn domain(&self) -> (T, T) {
        (self.x_min, self.x_max)
    }
}

fn check_domain<T: Real>(x_min: T, x_max: T) -> Result<()> {
    if !(x_min >= T::zero() && x_max >= x_min && x_max.is_finite()) {
        return Err(invalid(format!(
            "message domain [{}, {}] must be a finite nonnegative interval",
            x_min, x_max
        )));
    }
    Ok(())
}

/// Per-device, per-copy transmit phases `theta[k][m]` in `[0, 2 pi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseBook<T> {
    theta: Vec<Vec<T>>,
}

impl<T: Real> PhaseBook<T> {
    pub fn new(theta: Vec<Vec<T>>) -> Result<Self> {
        let m = theta.first().map_or(0, Vec::len);
        if theta.is_empty() || m == 0 {
            return Err(invalid("phase book needs K >= 1 and M >= 1"));
        }
        if theta.iter().any(|row| row.len() != m) {
            return Err(mismatch("every device needs M phases"));
        }
        let two_pi = T::TAU();
        if theta
            .iter()
            .flatten()
            .any(|&t| !(t >= T::zero() && t < two_pi))
        {
            return Err(invalid("phases must lie in [0, 2 pi)"));
        }
        Ok(Self { theta })
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, devices: usize, copies: usize) -> Result<Self> {
        let two_pi = T::TAU();
        let theta = (0..devices)
            .map(|_| {
                (0..copies)
                    .map(|_| {
                        let t = two_pi * T::unit_uniform(rng);
                        // rounding can land exactly on 2 pi in f32
                        if t >= two_pi {
                            T::zero()
                        } else {
                            t
                        }
                    })
                    .collect()
            })
            .collect();
        Self::new(theta)
    }

    pub fn zeros(devices: usize, copies: usize) -> Result<Self> {
        Self::new(vec![vec![T::zero(); copies]; devices])
    }

    pub fn devices(&self) -> usize {
        self.theta.len()
    }

    pub fn copies(&self) -> usize {
        self.theta[0].len()
    }

    pub fn phase(&self, k: usize, m: usize) -> T {
        self.theta[k][m]
    }
}

/// `phi(x) = sqrt(x) / |h|` element-wise.
pub fn modulate<T: Real>(messages: &[T], h_mag: T) -> Result<Vec<T>> {
    if !(h_mag > T::zero() && h_mag.is_finite()) {
        return Err(invalid(format!(
            "channel magnitude must be positive, got {}",
            h_mag
        )));
    }
    messages
        .iter()
        .map(|&x| {
            if x >= T::zero() {
                Ok(x.sqrt() / h_mag)
            } else {
                Err(invalid(format!("cannot modulate negative message {}", x)))
            }
        })
        .collect()
}

/// Real baseband waveform `G phi_k` of every device, before phase rotation.
pub fn baseband<T: Real>(
    frame: &Frame<T>,
    g: &PulseShape<T>,
    h_mags: &[T],
) -> Result<Vec<SampleVector<T>>> {
    if h_mags.len() != frame.devices() {
        return Err(mismatch(format!(
            "{} channel magnitudes for {} devices",
            h_mags.len(),
            frame.devices()
        )));
    }
    frame
        .messages()
        .iter()
        .zip(h_mags)
        .map(|(row, &h)| pulse_shape(&upsample(&modulate(row, h)?, g.len())?, g))
        .collect()
}

/// Rotates a real waveform by `e^{j theta}`.
pub fn rotate<T: Real>(s: &SampleVector<T>, theta: T) -> SampleVector<Complex<T>> {
    let w = Complex::from_polar(T::one(), theta);
    s.map(|&v| w * v)
}

/// All `K x M` transmitted waveforms, `out[k][m] = G phi_k e^{j theta_{k,m}}`.
pub fn build_waveforms<T: Real>(
    frame: &Frame<T>,
    g: &PulseShape<T>,
    phases: &PhaseBook<T>,
    h_mags: &[T],
) -> Result<Vec<Vec<SampleVector<Complex<T>>>>> {
    if phases.devices() != frame.devices() {
        return Err(mismatch(format!(
            "phase book for {} devices, frame has {}",
            phases.devices(),
            frame.devices()
        )));
    }
    let base = baseband(frame, g, h_mags)?;
    Ok(base
        .iter()
        .enumerate()
        .map(|(k, s)| {
            (0..phases.copies())
                .map(|m| rotate(s, phases.phase(k, m)))
                .collect()
        })
        .collect())
}
