//! Sample-level simulation and receive-filter design for over-the-air
//! computation (OAC) over an asynchronous multiple-access channel.
//!
//! `K` devices transmit pulse-shaped, amplitude-modulated square roots of
//! their messages over a channel that applies an unknown integer delay
//! `d_k <= d < N_s` and an unknown phase per device. The fusion center
//! filters the superposition, squares the magnitude over `M` randomly
//! phase-rotated copies and subtracts the noise power to estimate the
//! arithmetic mean of the messages.
//!
//! The crate is organized bottom-up:
//!
//! * [`signal`] - Hankel lifting, delay shifts, upsampling and pulse shaping.
//! * [`transmitter`] - message frames, modulation and phase-rotated copies.
//! * [`channel`] - delays, Rayleigh fading, superposition and AWGN.
//! * [`filter`] - matched, exactly unbiased and Tikhonov receive filters.
//! * [`receiver`] - filtering, the squared-magnitude estimator and its
//!   closed-form expectation.
//! * [`experiments`] - the paired Monte-Carlo bias/MSE harness.
//!
//! The numerical modules are generic over [`Real`] (implemented for `f32`
//! and `f64`); the aliases below fix the scalar to `f64`.

pub mod channel;
pub mod error;
pub mod experiments;
pub mod filter;
pub mod linalg;
pub mod receiver;
mod scalar;
pub mod signal;
pub mod transmitter;

pub use error::{Error, Result};
pub use scalar::Real;

pub use num_complex::Complex;

pub type PulseShape64 = signal::PulseShape<f64>;
pub type SampleVector64 = signal::SampleVector<Complex<f64>>;
pub type HankelMatrix64 = signal::HankelMatrix<f64>;
pub type Frame64 = transmitter::Frame<f64>;
pub type PhaseBook64 = transmitter::PhaseBook<f64>;
pub type ChannelRealization64 = channel::ChannelRealization<f64>;
pub type ReceiveFilter64 = filter::ReceiveFilter<f64>;
pub type FunctionEstimate64 = receiver::FunctionEstimate<f64>;

pub type PulseShape32 = signal::PulseShape<f32>;
pub type ReceiveFilter32 = filter::ReceiveFilter<f32>;
