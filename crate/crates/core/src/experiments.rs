//! Paired Monte-Carlo harness: bias and MSE of the estimator versus the
//! maximum delay `d`, for the regularized ("proposed") filter against the
//! matched filter and optionally the exactly unbiased filter.
//!
//! Each trial draws messages, channel, phases and noise from four ChaCha8
//! streams keyed by `(base_seed, trial_index, component)`. The key does not
//! include `d`, so every sweep point sees the same fading, phases and
//! messages, and delays `floor(u (d + 1))` grow monotonically with `d`. All
//! filters are evaluated on the same received copies.

use std::io::Write;
use std::time::Instant;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{propagate_baseband, sample_channel, ChannelRealization};
use crate::error::{invalid, Result};
use crate::filter::{matched_filter, solve_tikhonov, solve_unbiased, ReceiveFilter};
use crate::receiver::{estimate, FunctionEstimate};
use crate::signal::{PulseShape, SampleVector};
use crate::transmitter::{baseband, Frame, PhaseBook};

/// Header of the sweep CSV.
pub const CSV_HEADER: [&str; 9] = [
    "d",
    "MSE",
    "MSE_mf",
    "bias",
    "bias_mf",
    "se_MSE",
    "se_MSE_mf",
    "se_bias",
    "se_bias_mf",
];

/// How the samples per symbol follow the maximum delay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NsRule {
    /// `N_s = slope * d + offset`.
    Affine {
        slope: usize,
        offset: usize,
    },
    Fixed {
        ns: usize,
    },
}

impl NsRule {
    pub fn samples_per_symbol(&self, d: usize) -> usize {
        match *self {
            NsRule::Affine { slope, offset } => slope * d + offset,
            NsRule::Fixed { ns } => ns,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PulseConfig {
    Rectangular,
    Gaussian,
    /// Taps used verbatim; requires a fixed `N_s` equal to their count.
    Custom {
        taps: Vec<f64>,
    },
}

impl PulseConfig {
    pub fn build(&self, ns: usize) -> Result<PulseShape<f64>> {
        match self {
            PulseConfig::Rectangular => PulseShape::rectangular(ns),
            PulseConfig::Gaussian => PulseShape::gaussian(ns),
            PulseConfig::Custom { taps } => {
                if taps.len() != ns {
                    return Err(invalid(format!(
                        "custom pulse has {} taps but N_s={}",
                        taps.len(),
                        ns
                    )));
                }
                PulseShape::custom(taps.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// `K`.
    pub devices: usize,
    /// `N`, messages per device.
    pub symbols: usize,
    /// `M`, phase-rotated copies per frame.
    pub copies: usize,
    pub d_values: Vec<usize>,
    pub ns_rule: NsRule,
    /// Regularization weight of the proposed filter.
    pub lambda: f64,
    pub noise_var: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub pulse: PulseConfig,
    /// `N_mc`.
    pub trials: usize,
    pub base_seed: u64,
    /// Draw fresh delays every trial; otherwise one delay vector per sweep
    /// point is shared by all trials.
    pub resample_delays: bool,
    /// Also evaluate the minimum-norm exactly unbiased filter.
    pub include_unbiased: bool,
}

impl ExperimentConfig {
    fn preset(offset: usize) -> Self {
        Self {
            devices: 100,
            symbols: 10,
            copies: 10,
            d_values: (0..=10).collect(),
            ns_rule: NsRule::Affine { slope: 2, offset },
            lambda: 0.1,
            noise_var: 1.0,
            x_min: 0.0,
            x_max: 3.0,
            pulse: PulseConfig::Gaussian,
            trials: 10_000,
            base_seed: 0,
            resample_delays: true,
            include_unbiased: false,
        }
    }

    /// High-delay sweep, `N_s = 2d + 2`.
    pub fn figure3() -> Self {
        Self::preset(2)
    }

    /// Low-delay sweep, `N_s = 2d + 20`.
    pub fn figure4() -> Self {
        Self::preset(20)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("devices", self.devices),
            ("symbols", self.symbols),
            ("copies", self.copies),
            ("trials", self.trials),
        ] {
            if v == 0 {
                return Err(invalid(format!("{} must be >= 1", name)));
            }
        }
        if self.d_values.is_empty() {
            return Err(invalid("d_values must not be empty"));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(invalid(format!("lambda must be > 0, got {}", self.lambda)));
        }
        if !(self.noise_var >= 0.0 && self.noise_var.is_finite()) {
            return Err(invalid(format!(
                "noise_var must be >= 0, got {}",
                self.noise_var
            )));
        }
        if !(self.x_min >= 0.0 && self.x_max >= self.x_min && self.x_max.is_finite()) {
            return Err(invalid(format!(
                "message domain [{}, {}] must be a finite nonnegative interval",
                self.x_min, self.x_max
            )));
        }
        for &d in &self.d_values {
            let ns = self.ns_rule.samples_per_symbol(d);
            if ns <= d {
                return Err(invalid(format!("N_s={} must exceed d={}", ns, d)));
            }
        }
        if matches!(self.pulse, PulseConfig::Custom { .. })
            && !matches!(self.ns_rule, NsRule::Fixed { .. })
        {
            return Err(invalid("a custom pulse needs a fixed N_s"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
enum Stream {
    Messages = 1,
    Channel = 2,
    Phases = 3,
    Noise = 4,
    FixedDelays = 5,
}

fn stream_rng(base_seed: u64, trial: u64, stream: Stream) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&base_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&(stream as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(trial);
    rng
}

fn uniform_delays<R: Rng + ?Sized>(rng: &mut R, devices: usize, d: usize) -> Vec<usize> {
    (0..devices)
        .map(|_| ((rng.random::<f64>() * (d + 1) as f64) as usize).min(d))
        .collect()
}

/// Per-trial error summary of one filter, over the `N` symbols of the frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialError {
    /// `mean_n (f_n - f_hat_n)`.
    pub mean: f64,
    /// `mean_n (f_n - f_hat_n)²`.
    pub mean_sq: f64,
}

impl TrialError {
    fn new(f: &[f64], f_hat: &[f64]) -> Self {
        let n = f.len() as f64;
        let (mut s, mut s2) = (0.0, 0.0);
        for (a, b) in f.iter().zip(f_hat) {
            let e = a - b;
            s += e;
            s2 += e * e;
        }
        Self {
            mean: s / n,
            mean_sq: s2 / n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub proposed: TrialError,
    pub matched: TrialError,
    pub unbiased: Option<TrialError>,
}

/// Everything one trial produced, for inspection.
#[derive(Debug, Clone)]
pub struct TrialTrace {
    pub frame: Frame<f64>,
    pub channel: ChannelRealization<f64>,
    pub phases: PhaseBook<f64>,
    pub copies: Vec<SampleVector<Complex<f64>>>,
    pub target: Vec<f64>,
    pub proposed: FunctionEstimate<f64>,
    pub matched: FunctionEstimate<f64>,
    pub unbiased: Option<FunctionEstimate<f64>>,
}

/// One value of `d` with its filters designed.
#[derive(Debug, Clone)]
pub struct SweepPoint<'a> {
    config: &'a ExperimentConfig,
    d: usize,
    pulse: PulseShape<f64>,
    proposed: ReceiveFilter<f64>,
    matched: ReceiveFilter<f64>,
    unbiased: Option<ReceiveFilter<f64>>,
    fixed_delays: Option<Vec<usize>>,
}

impl<'a> SweepPoint<'a> {
    pub fn new(config: &'a ExperimentConfig, d: usize) -> Result<Self> {
        config.validate()?;
        let ns = config.ns_rule.samples_per_symbol(d);
        if ns <= d {
            return Err(invalid(format!("N_s={} must exceed d={}", ns, d)));
        }
        let pulse = config.pulse.build(ns)?;
        let proposed = solve_tikhonov(&pulse, d, config.lambda)?;
        let matched = matched_filter(&pulse);
        let unbiased = if config.include_unbiased {
            Some(solve_unbiased(&pulse, d)?)
        } else {
            None
        };
        let fixed_delays = (!config.resample_delays).then(|| {
            let mut rng = stream_rng(config.base_seed, 0, Stream::FixedDelays);
            uniform_delays(&mut rng, config.devices, d)
        });
        Ok(Self {
            config,
            d,
            pulse,
            proposed,
            matched,
            unbiased,
            fixed_delays,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn pulse(&self) -> &PulseShape<f64> {
        &self.pulse
    }

    pub fn proposed(&self) -> &ReceiveFilter<f64> {
        &self.proposed
    }

    pub fn matched(&self) -> &ReceiveFilter<f64> {
        &self.matched
    }

    pub fn unbiased(&self) -> Option<&ReceiveFilter<f64>> {
        self.unbiased.as_ref()
    }

    /// Runs the full pipeline for one trial and keeps every intermediate.
    pub fn trace(&self, trial: u64) -> Result<TrialTrace> {
        let c = self.config;
        let frame = Frame::random(
            &mut stream_rng(c.base_seed, trial, Stream::Messages),
            c.devices,
            c.symbols,
            c.x_min,
            c.x_max,
        )?;
        let mut channel = sample_channel(
            &mut stream_rng(c.base_seed, trial, Stream::Channel),
            c.devices,
            self.d,
            c.noise_var,
        )?;
        if let Some(delays) = &self.fixed_delays {
            channel.delays.clone_from(delays);
        }
        let phases = PhaseBook::random(
            &mut stream_rng(c.base_seed, trial, Stream::Phases),
            c.devices,
            c.copies,
        )?;
        let base = baseband(&frame, &self.pulse, &channel.magnitudes())?;
        let mut noise = stream_rng(c.base_seed, trial, Stream::Noise);
        let copies = (0..c.copies)
            .map(|m| {
                let theta: Vec<f64> = (0..c.devices).map(|k| phases.phase(k, m)).collect();
                propagate_baseband(&base, &theta, &channel, &mut noise)
            })
            .collect::<Result<Vec<_>>>()?;
        let run = |f: &ReceiveFilter<f64>| estimate(&copies, f, c.noise_var, c.devices);
        let proposed = run(&self.proposed)?;
        let matched = run(&self.matched)?;
        let unbiased = self.unbiased.as_ref().map(run).transpose()?;
        Ok(TrialTrace {
            target: frame.mean(),
            frame,
            channel,
            phases,
            copies,
            proposed,
            matched,
            unbiased,
        })
    }

    pub fn run_trial(&self, trial: u64) -> Result<TrialOutcome> {
        let t = self.trace(trial)?;
        Ok(TrialOutcome {
            proposed: TrialError::new(&t.target, &t.proposed.f_hat),
            matched: TrialError::new(&t.target, &t.matched.f_hat),
            unbiased: t.unbiased.map(|u| TrialError::new(&t.target, &u.f_hat)),
        })
    }

    /// All trials in parallel, reduced in trial order.
    pub fn run(&self) -> Result<SweepRow> {
        let start = Instant::now();
        let outcomes = (0..self.config.trials as u64)
            .into_par_iter()
            .map(|t| self.run_trial(t))
            .collect::<Result<Vec<_>>>()?;
        let proposed: Vec<TrialError> = outcomes.iter().map(|o| o.proposed).collect();
        let matched: Vec<TrialError> = outcomes.iter().map(|o| o.matched).collect();
        let unbiased = self.unbiased.as_ref().map(|_| {
            outcomes
                .iter()
                .map(|o| o.unbiased.unwrap())
                .collect::<Vec<_>>()
        });
        Ok(SweepRow {
            d: self.d,
            n_s: self.pulse.len(),
            proposed: FilterStats::from_trials(&proposed),
            matched: FilterStats::from_trials(&matched),
            unbiased: unbiased.as_deref().map(FilterStats::from_trials),
            wall_time: start.elapsed().as_secs_f64(),
        })
    }
}

/// Neumaier-compensated sum.
fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        comp += if sum.abs() >= v.abs() {
            (sum - t) + v
        } else {
            (v - t) + sum
        };
        sum = t;
    }
    sum + comp
}

/// Sample mean and standard error of the mean.
fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = compensated_sum(values.iter().copied()) / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss = compensated_sum(values.iter().map(|v| (v - mean) * (v - mean)));
    (mean, (ss / (n - 1.0) / n).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterStats {
    /// Average over trials of the mean per-symbol error.
    pub bias: f64,
    pub se_bias: f64,
    /// Average over trials of the mean squared per-symbol error.
    pub mse: f64,
    pub se_mse: f64,
    /// Average over trials of the squared mean per-symbol error.
    pub sq_mean: f64,
    pub se_sq_mean: f64,
}

impl FilterStats {
    pub fn from_trials(trials: &[TrialError]) -> Self {
        let (bias, se_bias) = mean_and_se(&trials.iter().map(|t| t.mean).collect::<Vec<_>>());
        let (mse, se_mse) = mean_and_se(&trials.iter().map(|t| t.mean_sq).collect::<Vec<_>>());
        let (sq_mean, se_sq_mean) =
            mean_and_se(&trials.iter().map(|t| t.mean * t.mean).collect::<Vec<_>>());
        Self {
            bias,
            se_bias,
            mse,
            se_mse,
            sq_mean,
            se_sq_mean,
        }
    }

    pub fn bias_sq(&self) -> f64 {
        self.bias * self.bias
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub d: usize,
    pub n_s: usize,
    pub proposed: FilterStats,
    pub matched: FilterStats,
    pub unbiased: Option<FilterStats>,
    /// Seconds spent on this point; excluded from the CSV outputs.
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub config: ExperimentConfig,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn row(&self, d: usize) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.d == d)
    }

    /// Main table, one line per `d` with the [`CSV_HEADER`] columns.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for r in &self.rows {
            let (p, m) = (&r.proposed, &r.matched);
            w.write_record(
                std::iter::once(r.d.to_string()).chain(
                    [
                        p.mse, m.mse, p.bias, m.bias, p.se_mse, m.se_mse, p.se_bias, m.se_bias,
                    ]
                    .iter()
                    .map(f64::to_string),
                ),
            )?;
        }
        w.flush()?;
        Ok(())
    }

    /// Supplementary table: `N_s`, the square-of-mean error variant and the
    /// unbiased-filter series when present.
    pub fn write_debug_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![
            "d",
            "n_s",
            "sq_mean",
            "sq_mean_mf",
            "se_sq_mean",
            "se_sq_mean_mf",
        ];
        let with_unbiased = self.rows.iter().all(|r| r.unbiased.is_some());
        if with_unbiased {
            header.extend(["MSE_ub", "bias_ub", "se_MSE_ub", "se_bias_ub"]);
        }
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![r.d.to_string(), r.n_s.to_string()];
            rec.extend(
                [
                    r.proposed.sq_mean,
                    r.matched.sq_mean,
                    r.proposed.se_sq_mean,
                    r.matched.se_sq_mean,
                ]
                .iter()
                .map(f64::to_string),
            );
            if let (true, Some(u)) = (with_unbiased, &r.unbiased) {
                rec.extend(
                    [u.mse, u.bias, u.se_mse, u.se_bias]
                        .iter()
                        .map(f64::to_string),
                );
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Designs every sweep point first, so an infeasible `d` fails before any
/// trial runs, then evaluates them in order.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    let points = config
        .d_values
        .iter()
        .map(|&d| SweepPoint::new(config, d))
        .collect::<Result<Vec<_>>>()?;
    let rows = points
        .iter()
        .map(SweepPoint::run)
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        config: config.clone(),
        rows,
    })
}
