mod config;
mod manifest;
mod plot;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use oac_core::experiments::{run_sweep, ExperimentConfig, SweepPoint};
use oac_core::filter::{
    check_feasibility, hankel_residual, matched_filter, solve_tikhonov, solve_unbiased,
    unbiasedness_residual, verify_lemma1_random, FeasibilityReport, FilterDesign, ReceiveFilter,
};
use oac_core::receiver::apply_filter;
use oac_core::{Complex, Error as CoreError, PulseShape64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::load_config;
use crate::manifest::RunManifest;

#[derive(Parser, Debug)]
#[command(
    name = "oac",
    version,
    about = "Receive-filter design and Monte-Carlo sweeps for asynchronous over-the-air computation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Design a receive filter and print its taps.
    DesignFilter(DesignArgs),
    /// Report solvability of the unbiased design and check the symbol-coefficient identity.
    Check(CheckArgs),
    /// Run one trial and dump the received copies, filter outputs and estimates as JSON.
    Simulate(SimulateArgs),
    /// Bias/MSE sweep over the maximum delay.
    Sweep(SweepArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum PulseArg {
    #[value(alias = "rectangular")]
    Rect,
    Gaussian,
    Custom,
}

#[derive(Args, Debug)]
struct PulseArgs {
    #[arg(long, value_enum, default_value_t = PulseArg::Gaussian)]
    pulse: PulseArg,
    /// Samples per symbol (ignored for custom pulses).
    #[arg(long)]
    ns: Option<usize>,
    /// Custom pulse taps, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    taps: Vec<f64>,
}

impl PulseArgs {
    fn build(&self) -> Result<PulseShape64> {
        match self.pulse {
            PulseArg::Custom => {
                if self.taps.is_empty() {
                    bail!("--pulse custom needs --taps");
                }
                Ok(PulseShape64::custom(self.taps.clone())?)
            }
            kind => {
                let ns = self
                    .ns
                    .context("--ns is required for rect and gaussian pulses")?;
                Ok(match kind {
                    PulseArg::Rect => PulseShape64::rectangular(ns)?,
                    _ => PulseShape64::gaussian(ns)?,
                })
            }
        }
    }
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("design").args(["exact", "lambda", "matched"])))]
struct DesignArgs {
    #[command(flatten)]
    pulse: PulseArgs,
    /// Maximum delay in samples.
    #[arg(long)]
    d: usize,
    /// Minimum-norm exactly unbiased filter (default).
    #[arg(long)]
    exact: bool,
    /// Tikhonov-regularized filter with this weight.
    #[arg(long)]
    lambda: Option<f64>,
    /// Matched filter.
    #[arg(long)]
    matched: bool,
    /// Also write the taps, one per line, to this file.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Kv,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[command(flatten)]
    pulse: PulseArgs,
    #[arg(long)]
    d: Option<usize>,
    /// Brute-force the symbol-coefficient identity on random small problems.
    #[arg(long)]
    lemma1: bool,
    #[arg(long, default_value_t = 1000)]
    lemma1_trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Figure {
    #[value(name = "3")]
    High,
    #[value(name = "4")]
    Low,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// Start from a preset sweep: 3 (N_s = 2d+2) or 4 (N_s = 2d+20).
    #[arg(long, value_enum)]
    figure: Option<Figure>,
    /// TOML config overlaid on the preset (figure 3 when none is given).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Evaluate the exactly unbiased filter as an extra series.
    #[arg(long)]
    include_unbiased: bool,
    /// Keep one delay vector per sweep point instead of redrawing per trial.
    #[arg(long)]
    fixed_delays: bool,
}

impl ExperimentArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let base = match self.figure {
            Some(Figure::Low) => ExperimentConfig::figure4(),
            _ => ExperimentConfig::figure3(),
        };
        let mut config = match &self.config {
            Some(path) => load_config(path, &base)?,
            None => base,
        };
        if let Some(t) = self.trials {
            config.trials = t;
        }
        if let Some(s) = self.seed {
            config.base_seed = s;
        }
        config.include_unbiased |= self.include_unbiased;
        if self.fixed_delays {
            config.resample_delays = false;
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// Worker threads; defaults to all cores.
    #[arg(long, env = "OAC_THREADS")]
    threads: Option<usize>,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Manifest path; defaults to `<output>.manifest.json` when `--output` is set.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// SVG chart of MSE and squared bias versus d.
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Supplementary CSV with the square-of-mean errors and the unbiased series.
    #[arg(long)]
    debug_csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 0)]
    trial: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Twelve decimals (or seven significant digits in scientific notation for
/// very small or large magnitudes) with trailing zeros removed.
fn fmt_float(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{}", x);
    }
    if x.abs() < 1e-4 || x.abs() >= 1e7 {
        let s = format!("{:.6e}", x);
        let (mant, exp) = s.split_once('e').unwrap();
        return format!("{}e{}", trim_zeros(mant), exp);
    }
    let s = trim_zeros(&format!("{:.12}", x));
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

fn fmt_vec(v: &[f64]) -> String {
    format!(
        "[{}]",
        v.iter()
            .map(|&x| fmt_float(x))
            .collect::<Vec<_>>()
            .join(", ")
    )
}

fn print_report(r: &FeasibilityReport, format: Format) {
    let rows = [
        ("n_s", r.n_s.to_string()),
        ("d", r.d.to_string()),
        ("rank", r.rank.to_string()),
        ("rank_condition", r.rank_condition.to_string()),
        ("feasible", r.feasible.to_string()),
        ("residual", fmt_float(r.residual)),
        ("residual_tolerance", fmt_float(r.residual_tolerance)),
        ("delay_bound", r.delay_bound.to_string()),
        ("sufficient", r.within_delay_bound.to_string()),
    ];
    print_rows(&rows, format);
}

fn print_rows(rows: &[(&str, String)], format: Format) {
    for (k, v) in rows {
        match format {
            Format::Kv => println!("{}={}", k, v),
            Format::Human => println!("{:<24}{}", k, v),
        }
    }
}

fn design(args: &DesignArgs) -> Result<()> {
    let g = args.pulse.build()?;
    let filter = if args.matched {
        matched_filter(&g)
    } else if let Some(lambda) = args.lambda {
        solve_tikhonov(&g, args.d, lambda)?
    } else {
        solve_unbiased(&g, args.d)?
    };
    let d = args.d;
    if d >= g.len() {
        bail!("d={} must be below N_s={}", d, g.len());
    }
    let split = ReceiveFilter::custom(filter.taps().to_vec(), d)?;
    let hankel = hankel_residual(&g, d, split.trailing())?
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let label = match filter.design() {
        FilterDesign::Matched => "matched".to_string(),
        FilterDesign::UnbiasedExact => "unbiased (minimum norm)".to_string(),
        FilterDesign::Tikhonov { lambda } => format!("tikhonov (lambda={})", fmt_float(lambda)),
        FilterDesign::Custom => "custom".to_string(),
    };
    let rows = [
        ("design", label),
        ("n_s", g.len().to_string()),
        ("d", d.to_string()),
        ("taps", fmt_vec(filter.taps())),
        ("leading", fmt_vec(split.leading())),
        ("trailing", fmt_vec(split.trailing())),
        ("hankel_residual", fmt_float(hankel)),
        (
            "coefficient_residual",
            fmt_float(unbiasedness_residual(&filter, &g, d)?),
        ),
        ("noise_gain", fmt_float(filter.noise_gain())),
    ];
    print_rows(&rows, Format::Human);
    if let Some(path) = &args.output {
        let text: String = filter.taps().iter().map(|t| format!("{}\n", t)).collect();
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn check(args: &CheckArgs) -> Result<()> {
    let wants_design = args.d.is_some();
    if !wants_design && !args.lemma1 {
        bail!("nothing to check: pass --d (with a pulse) and/or --lemma1");
    }
    if let Some(d) = args.d {
        let g = args.pulse.build()?;
        print_report(&check_feasibility(&g, d)?, args.format);
    }
    if args.lemma1 {
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        let worst: f64 = verify_lemma1_random(&mut rng, args.lemma1_trials, 5, 8)?;
        print_rows(
            &[
                ("lemma1_trials", args.lemma1_trials.to_string()),
                ("lemma1_max_discrepancy", fmt_float(worst)),
                ("lemma1_ok", (worst <= 1e-12).to_string()),
            ],
            args.format,
        );
    }
    Ok(())
}

fn sweep(args: &SweepArgs) -> Result<()> {
    let config = args.experiment.resolve()?;
    let threads = args.threads.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .context("building thread pool")?;
    let result = pool.install(|| run_sweep(&config))?;

    let mut outputs = Vec::new();
    match &args.output {
        Some(path) => {
            let file = std::fs::File::create(path)
                .with_context(|| format!("creating {}", path.display()))?;
            result.write_csv(std::io::BufWriter::new(file))?;
            outputs.push(path.display().to_string());
        }
        None => {
            let stdout = std::io::stdout();
            result.write_csv(stdout.lock())?;
        }
    }
    if let Some(path) = &args.debug_csv {
        let file =
            std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        result.write_debug_csv(std::io::BufWriter::new(file))?;
        outputs.push(path.display().to_string());
    }
    if let Some(path) = &args.plot {
        std::fs::write(path, plot::render_svg(&result))
            .with_context(|| format!("writing {}", path.display()))?;
        outputs.push(path.display().to_string());
    }
    let manifest_path = args
        .manifest
        .clone()
        .or_else(|| args.output.as_ref().map(|p| sibling(p, "manifest.json")));
    if let Some(path) = manifest_path {
        RunManifest::new(&result, pool.current_num_threads(), outputs).write(&path)?;
    }
    Ok(())
}

fn sibling(path: &Path, ext: &str) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".");
    name.push(ext);
    PathBuf::from(name)
}

/// `[re, im]` for JSON.
#[derive(Debug, Serialize)]
struct ComplexPair(f64, f64);

impl From<&Complex<f64>> for ComplexPair {
    fn from(c: &Complex<f64>) -> Self {
        ComplexPair(c.re, c.im)
    }
}

#[derive(Serialize)]
struct FilterDump {
    taps: Vec<f64>,
    outputs: Vec<Vec<ComplexPair>>,
    f_hat_raw: Vec<f64>,
    correction: f64,
    f_hat: Vec<f64>,
}

#[derive(Serialize)]
struct SimulationDump {
    d: usize,
    n_s: usize,
    trial: u64,
    seed: u64,
    messages: Vec<Vec<f64>>,
    target: Vec<f64>,
    delays: Vec<usize>,
    fading: Vec<ComplexPair>,
    received: Vec<Vec<ComplexPair>>,
    proposed: FilterDump,
    matched: FilterDump,
    unbiased: Option<FilterDump>,
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let mut config = args.experiment.resolve()?;
    config.d_values = vec![args.d];
    config.validate()?;
    let point = SweepPoint::new(&config, args.d)?;
    let t = point.trace(args.trial)?;
    let dump_filter =
        |f: &ReceiveFilter<f64>, est: &oac_core::FunctionEstimate64| -> Result<FilterDump> {
            let outputs = t
                .copies
                .iter()
                .map(|v| Ok(apply_filter(v, f)?.iter().map(ComplexPair::from).collect()))
                .collect::<Result<Vec<_>>>()?;
            Ok(FilterDump {
                taps: f.taps().to_vec(),
                outputs,
                f_hat_raw: est.f_hat_raw.clone(),
                correction: est.correction,
                f_hat: est.f_hat.clone(),
            })
        };
    let dump = SimulationDump {
        d: args.d,
        n_s: point.pulse().len(),
        trial: args.trial,
        seed: config.base_seed,
        messages: t.frame.messages().to_vec(),
        target: t.target.clone(),
        delays: t.channel.delays.clone(),
        fading: t.channel.h.iter().map(ComplexPair::from).collect(),
        received: t
            .copies
            .iter()
            .map(|v| v.samples().iter().map(ComplexPair::from).collect())
            .collect(),
        proposed: dump_filter(point.proposed(), &t.proposed)?,
        matched: dump_filter(point.matched(), &t.matched)?,
        unbiased: match (point.unbiased(), &t.unbiased) {
            (Some(f), Some(e)) => Some(dump_filter(f, e)?),
            _ => None,
        },
    };
    let json = serde_json::to_string_pretty(&dump)? + "\n";
    match &args.output {
        Some(path) => {
            std::fs::write(path, json).with_context(|| format!("writing {}", path.display()))?
        }
        None => std::io::stdout().lock().write_all(json.as_bytes())?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::DesignFilter(a) => design(a),
        Command::Check(a) => check(a),
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => sweep(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let Some(CoreError::Infeasible(report)) = e.downcast_ref::<CoreError>() {
                eprintln!("error: {}", e);
                eprintln!(
                    "no filter removes the bias for N_s={} and d={} (rank={}, residual={}, tolerance={})",
                    report.n_s,
                    report.d,
                    report.rank,
                    fmt_float(report.residual),
                    fmt_float(report.residual_tolerance)
                );
                return ExitCode::from(2);
            }
            eprintln!("error: {:#}", e);
            ExitCode::from(1)
        }
    }
}
