//! Discrete-signal algebra: pulse shapes, Hankel lifting, delay shifts,
//! upsampling and pulse shaping.
//!
//! Indexing is 0-based everywhere. The two places where the usual 1-based
//! formulas are translated are [`hankel_lift`] (entry `(r, c)` is
//! `x[d - r + c]`) and [`upsample`] (symbol `n` sits at sample `n * N_s`).
//!
//! Shift matrices and the block-diagonal pulse-shaping matrix `I_N ⊗ g` are
//! never formed by the signal path; [`shift_matrix`] and [`pulse_matrix`]
//! exist only to cross-check the index arithmetic at small sizes.

use std::ops::{Add, Mul};

use num_traits::{Num, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, mismatch, Result};
use crate::linalg::{norm2, Matrix};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PulseKind {
    Rectangular,
    Gaussian,
    Custom,
}

/// Transmit pulse `g` with `N_s` real taps.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseShape<T> {
    taps: Vec<T>,
    kind: PulseKind,
}

impl<T: Real> PulseShape<T> {
    /// Unit-energy rectangular pulse, every tap `1/sqrt(N_s)`.
    pub fn rectangular(samples_per_symbol: usize) -> Result<Self> {
        if samples_per_symbol == 0 {
            return Err(invalid("pulse needs at least one tap"));
        }
        let tap = T::one() / T::from_usize(samples_per_symbol).unwrap().sqrt();
        Ok(Self {
            taps: vec![tap; samples_per_symbol],
            kind: PulseKind::Rectangular,
        })
    }

    /// Unit-energy Gaussian pulse centred at `(N_s - 1)/2` with standard
    /// deviation `N_s/6`, i.e. the support spans +-3 sigma.
    pub fn gaussian(samples_per_symbol: usize) -> Result<Self> {
        if samples_per_symbol == 0 {
            return Err(invalid("pulse needs at least one tap"));
        }
        let ns = T::from_usize(samples_per_symbol).unwrap();
        let mu = (ns - T::one()) / T::lit(2.0);
        let sigma = ns / T::lit(6.0);
        let two_var = T::lit(2.0) * sigma * sigma;
        let raw: Vec<T> = (0..samples_per_symbol)
            .map(|i| {
                let t = T::from_usize(i).unwrap() - mu;
                (-(t * t) / two_var).exp()
            })
            .collect();
        let norm = norm2(&raw);
        Ok(Self {
            taps: raw.into_iter().map(|v| v / norm).collect(),
            kind: PulseKind::Gaussian,
        })
    }

    /// Arbitrary taps, used as given (no normalization).
    pub fn custom(taps: Vec<T>) -> Result<Self> {
        if taps.is_empty() {
            return Err(invalid("pulse needs at least one tap"));
        }
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(invalid("pulse taps must be finite"));
        }
        Ok(Self {
            taps,
            kind: PulseKind::Custom,
        })
    }

    pub fn by_kind(kind: PulseKind, samples_per_symbol: usize) -> Result<Self> {
        match kind {
            PulseKind::Rectangular => Self::rectangular(samples_per_symbol),
            PulseKind::Gaussian => Self::gaussian(samples_per_symbol),
            PulseKind::Custom => Err(invalid("custom pulses need explicit taps")),
        }
    }

    pub fn norm(&self) -> T {
        norm2(&self.taps)
    }
}

impl<T> PulseShape<T> {
    pub fn taps(&self) -> &[T] {
        &self.taps
    }

    pub fn kind(&self) -> PulseKind {
        self.kind
    }

    /// `N_s`.
    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }
}

/// `N_t = N * N_s` baseband samples carrying `N` symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleVector<S> {
    samples: Vec<S>,
    symbols: usize,
    samples_per_symbol: usize,
}

impl<S> SampleVector<S> {
    pub fn new(samples: Vec<S>, symbols: usize, samples_per_symbol: usize) -> Result<Self> {
        if symbols == 0 || samples_per_symbol == 0 {
            return Err(invalid("N and N_s must be positive"));
        }
        if samples.len() != symbols * samples_per_symbol {
            return Err(mismatch(format!(
                "{} samples for N={} x N_s={}",
                samples.len(),
                symbols,
                samples_per_symbol
            )));
        }
        Ok(Self {
            samples,
            symbols,
            samples_per_symbol,
        })
    }

    pub fn samples(&self) -> &[S] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [S] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<S> {
        self.samples
    }

    pub fn symbols(&self) -> usize {
        self.symbols
    }

    pub fn samples_per_symbol(&self) -> usize {
        self.samples_per_symbol
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Samples of symbol slot `n`.
    pub fn block(&self, n: usize) -> &[S] {
        let ns = self.samples_per_symbol;
        &self.samples[n * ns..(n + 1) * ns]
    }

    pub fn map<U>(&self, f: impl FnMut(&S) -> U) -> SampleVector<U> {
        SampleVector {
            samples: self.samples.iter().map(f).collect(),
            symbols: self.symbols,
            samples_per_symbol: self.samples_per_symbol,
        }
    }
}

impl<S: Zero + Copy> SampleVector<S> {
    /// Delayed copy, see [`shift`].
    pub fn shifted(&self, delay: usize) -> Result<Self> {
        Ok(Self {
            samples: shift(&self.samples, delay)?,
            symbols: self.symbols,
            samples_per_symbol: self.samples_per_symbol,
        })
    }
}

/// Hankel lift of a length-`L` vector: a `(d+1) x (L-d)` matrix with
/// constant anti-diagonals whose first row is `x[d..L]` and last row is
/// `x[0..L-d]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HankelMatrix<T> {
    source: Vec<T>,
    d: usize,
}

impl<T: Copy> HankelMatrix<T> {
    pub fn rows(&self) -> usize {
        self.d + 1
    }

    pub fn cols(&self) -> usize {
        self.source.len() - self.d
    }

    pub fn lag(&self) -> usize {
        self.d
    }

    pub fn source(&self) -> &[T] {
        &self.source
    }

    pub fn entry(&self, r: usize, c: usize) -> T {
        assert!(r <= self.d && c < self.cols(), "hankel index out of range");
        self.source[self.d - r + c]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows())
            .map(|r| (0..self.cols()).map(|c| self.entry(r, c)).collect())
            .collect()
    }
}

impl<T: Num + Copy> HankelMatrix<T> {
    /// `H x`, accumulated left to right along each row.
    pub fn matvec(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.cols() {
            return Err(mismatch(format!(
                "hankel with {} columns times vector of length {}",
                self.cols(),
                x.len()
            )));
        }
        Ok((0..self.rows())
            .map(|r| {
                x.iter()
                    .enumerate()
                    .fold(T::zero(), |acc, (c, &xc)| acc + self.entry(r, c) * xc)
            })
            .collect())
    }

    /// `H^T y`.
    pub fn rmatvec(&self, y: &[T]) -> Result<Vec<T>> {
        if y.len() != self.rows() {
            return Err(mismatch(format!(
                "hankel with {} rows transposed times vector of length {}",
                self.rows(),
                y.len()
            )));
        }
        Ok((0..self.cols())
            .map(|c| {
                y.iter()
                    .enumerate()
                    .fold(T::zero(), |acc, (r, &yr)| acc + self.entry(r, c) * yr)
            })
            .collect())
    }
}

impl<T: Real> HankelMatrix<T> {
    pub fn to_dense(&self) -> Matrix<T> {
        Matrix::from_fn(self.rows(), self.cols(), |r, c| self.entry(r, c))
    }
}

pub fn hankel_lift<T: Copy>(x: &[T], d: usize) -> Result<HankelMatrix<T>> {
    if d >= x.len() {
        return Err(invalid(format!(
            "hankel lag d={} needs d <= L-1 for L={}",
            d,
            x.len()
        )));
    }
    Ok(HankelMatrix {
        source: x.to_vec(),
        d,
    })
}

/// Delays `x` by `delay` samples: `out[i] = x[i - delay]` for `i >= delay`
/// and zero before. Samples pushed past the end are dropped, exactly like
/// multiplying by the lower shift matrix `E^delay`.
pub fn shift<S: Zero + Copy>(x: &[S], delay: usize) -> Result<Vec<S>> {
    if delay >= x.len() {
        return Err(invalid(format!(
            "shift of {} samples needs delay < length, got {}",
            x.len(),
            delay
        )));
    }
    Ok(delay_truncated(x, delay))
}

/// [`shift`] without the range check; a delay of at least the length gives
/// the zero vector (`E^p = 0` for `p >= len`).
pub(crate) fn delay_truncated<S: Zero + Copy>(x: &[S], delay: usize) -> Vec<S> {
    let mut out = vec![S::zero(); x.len()];
    if delay < x.len() {
        out[delay..].copy_from_slice(&x[..x.len() - delay]);
    }
    out
}

/// Transposed shift: `out[i] = x[i + p]`, zero past the end.
pub(crate) fn advance<S: Zero + Copy>(x: &[S], p: usize) -> Vec<S> {
    let mut out = vec![S::zero(); x.len()];
    if p < x.len() {
        out[..x.len() - p].copy_from_slice(&x[p..]);
    }
    out
}

/// Places symbol `n` at sample `n * N_s` and zeros elsewhere.
pub fn upsample<S: Zero + Copy>(
    symbols: &[S],
    samples_per_symbol: usize,
) -> Result<SampleVector<S>> {
    if symbols.is_empty() {
        return Err(invalid("upsample needs at least one symbol"));
    }
    if samples_per_symbol == 0 {
        return Err(invalid("N_s must be positive"));
    }
    let mut samples = vec![S::zero(); symbols.len() * samples_per_symbol];
    for (n, &s) in symbols.iter().enumerate() {
        samples[n * samples_per_symbol] = s;
    }
    SampleVector::new(samples, symbols.len(), samples_per_symbol)
}

/// Causal convolution of an upsampled train with `g`, truncated to `N_t`
/// samples. For a train from [`upsample`] this is `(I_N ⊗ g) symbols`.
pub fn pulse_shape<S, T>(u: &SampleVector<S>, g: &PulseShape<T>) -> Result<SampleVector<S>>
where
    S: Zero + Copy + Add<Output = S> + Mul<T, Output = S>,
    T: Copy,
{
    let ns = g.len();
    if u.samples_per_symbol() != ns {
        return Err(mismatch(format!(
            "train upsampled by {} but pulse has {} taps",
            u.samples_per_symbol(),
            ns
        )));
    }
    let x = u.samples();
    let mut out = vec![S::zero(); x.len()];
    for (j, o) in out.iter_mut().enumerate() {
        let mut acc = S::zero();
        for (i, &tap) in g.taps().iter().enumerate().take(j + 1) {
            acc = acc + x[j - i] * tap;
        }
        *o = acc;
    }
    SampleVector::new(out, u.symbols(), ns)
}

/// Explicit `n x n` lower shift matrix raised to `power`.
pub fn shift_matrix<T: Real>(n: usize, power: usize) -> Matrix<T> {
    Matrix::from_fn(n, n, |r, c| {
        if r >= power && r - power == c {
            T::one()
        } else {
            T::zero()
        }
    })
}

/// Explicit `N N_s x N` block-diagonal pulse matrix `I_N ⊗ g`.
pub fn pulse_matrix<T: Real>(g: &PulseShape<T>, symbols: usize) -> Matrix<T> {
    let ns = g.len();
    Matrix::from_fn(symbols * ns, symbols, |r, c| {
        if r / ns == c {
            g.taps()[r % ns]
        } else {
            T::zero()
        }
    })
}
