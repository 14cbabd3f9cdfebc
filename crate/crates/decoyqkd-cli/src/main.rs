//! Command-line front end: session simulation, attack detection on recorded
//! ledgers, intensity optimization, interferometer calibration, and
//! reference-curve emission.
//!
//! Exit codes: 0 success, 2 configuration or I/O error, 3 insufficient or
//! out-of-range data, 4 non-convergence.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use decoyqkd::{
    calibrate, calibration_csv, curve_csv, detect_pns, emit_report, json_string, mu_curve,
    noisy_calibrate_adjust, run_session, visibility, Adjustable, ClickLedger, CurveFamily, Error,
    HeraldedSourceParams, HomParams, ReportFormat, RngStream, SessionConfig, SpdParams,
};

#[derive(Parser)]
#[command(
    name = "decoyqkd",
    version,
    about = "Pulse-level simulator for quantum key distribution with photon-number decoy states"
)]
struct Cli {
    /// Cap the rayon worker pool (default: one worker per core). Output is
    /// identical for any worker count.
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct OutputArgs {
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a full Monte Carlo session from a TOML config and report the
    /// click ledger, detection verdict, and throughput figures.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Override the seed in the config file.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Test a recorded click ledger (CSV: tag,sent,clicked) for
    /// photon-number-splitting signatures.
    Detect {
        /// Ledger CSV path.
        ledger: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Sweep a channel-parameter grid and report the merit-optimal weak
    /// pulse intensity at each point.
    OptimizeMu {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Tune interferometer delay and bandwidth to the coincidence dip,
    /// exactly or from simulated noisy counts.
    Calibrate {
        #[arg(long)]
        config: PathBuf,
        /// Override the seed in the config file (noisy mode only).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Emit the reference curve CSVs: heralded photon-number distributions,
    /// visibility versus bandwidth ratio, and optimal intensity versus
    /// channel efficiency and versus attack ratio.
    Curves {
        /// Directory to write the four CSV files into.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidParam(_) | Error::Config(_) | Error::Io(_) => 2,
        Error::InsufficientData(_) | Error::OutOfRange { .. } => 3,
        Error::NonConvergence(_) => 4,
    }
}

fn read_to_string(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

fn parse_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Error> {
    toml::from_str(&read_to_string(path)?)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn deliver(text: &str, out: &OutputArgs) -> Result<(), Error> {
    match &out.out {
        Some(path) => std::fs::write(path, text).map_err(Error::Io),
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

/// Detection settings: the source and detector that produced the ledger,
/// plus the significance level.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DetectConfig {
    alpha: f64,
    src: HeraldedSourceParams,
    spd: SpdParams,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSpec {
    start: f64,
    stop: f64,
    points: usize,
    #[serde(default)]
    log_spacing: bool,
}

impl GridSpec {
    fn build(&self) -> Result<Vec<f64>, Error> {
        if self.points < 2 {
            return Err(Error::Config("grid needs at least 2 points".into()));
        }
        if self.log_spacing && (self.start <= 0.0 || self.stop <= 0.0) {
            return Err(Error::Config("log-spaced grid needs positive endpoints".into()));
        }
        let n = self.points;
        Ok((0..n)
            .map(|i| {
                let frac = i as f64 / (n - 1) as f64;
                if self.log_spacing {
                    (self.start.ln() + frac * (self.stop.ln() - self.start.ln())).exp()
                } else {
                    self.start + frac * (self.stop - self.start)
                }
            })
            .collect())
    }
}

/// Intensity-sweep settings: which channel family to walk and over what
/// grid. `family = "loss"` sweeps the channel efficiency; `family =
/// "attack_ratio"` sweeps the single-to-multiphoton transmittivity ratio at
/// fixed kappa_m.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OptimizeMuConfig {
    family: String,
    kappa_m: Option<f64>,
    grid: GridSpec,
}

impl OptimizeMuConfig {
    fn family(&self) -> Result<CurveFamily, Error> {
        match self.family.as_str() {
            "loss" => {
                if self.kappa_m.is_some() {
                    return Err(Error::Config("kappa_m applies to attack_ratio only".into()));
                }
                Ok(CurveFamily::Loss)
            }
            "attack_ratio" => Ok(CurveFamily::AttackRatio {
                kappa_m: self.kappa_m.unwrap_or(1.0),
            }),
            other => Err(Error::Config(format!(
                "unknown family `{other}` (expected loss or attack_ratio)"
            ))),
        }
    }
}

/// Calibration settings. With `counts_per_point` absent the exact rate is
/// optimized; present, every evaluation is a binomial draw of that many
/// coincidence trials.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CalibrateConfig {
    initial: HomParams,
    adjust: Option<Adjustable>,
    counts_per_point: Option<u64>,
    seed: Option<u64>,
}

fn cmd_simulate(config: &Path, seed: Option<u64>, format: Format, out: &OutputArgs) -> Result<(), Error> {
    let mut cfg = SessionConfig::load(config)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let report = run_session(&cfg)?;
    let text = match format {
        Format::Json => emit_report(&report, ReportFormat::Json)?,
        Format::Csv => emit_report(&report, ReportFormat::Csv)?,
    };
    deliver(&text, out)
}

fn cmd_detect(ledger: &Path, config: &Path, format: Format, out: &OutputArgs) -> Result<(), Error> {
    let cfg: DetectConfig = parse_toml(config)?;
    let ledger = ClickLedger::from_csv(&read_to_string(ledger)?)?;
    let verdict = detect_pns(&ledger, &cfg.src, &cfg.spd, cfg.alpha)?;
    let text = match format {
        Format::Json => json_string(&verdict)?,
        Format::Csv => {
            let mut s = String::from("field,value\n");
            s.push_str(&format!("attack_detected,{}\n", verdict.attack_detected));
            s.push_str(&format!("eta1_low,{:e}\n", verdict.eta1_interval.0));
            s.push_str(&format!("eta1_high,{:e}\n", verdict.eta1_interval.1));
            s.push_str(&format!("eta2_low,{:e}\n", verdict.eta2_interval.0));
            s.push_str(&format!("eta2_high,{:e}\n", verdict.eta2_interval.1));
            s.push_str(&format!("alpha,{:e}\n", verdict.alpha));
            s
        }
    };
    deliver(&text, out)
}

fn cmd_optimize_mu(config: &Path, format: Format, out: &OutputArgs) -> Result<(), Error> {
    let cfg: OptimizeMuConfig = parse_toml(config)?;
    let points = mu_curve(&cfg.family()?, &cfg.grid.build()?)?;
    let text = match format {
        Format::Json => json_string(&points)?,
        Format::Csv => curve_csv(&points),
    };
    deliver(&text, out)
}

fn cmd_calibrate(config: &Path, seed: Option<u64>, format: Format, out: &OutputArgs) -> Result<(), Error> {
    let cfg: CalibrateConfig = parse_toml(config)?;
    let adjust = cfg.adjust.unwrap_or(Adjustable::BOTH);
    let outcome = match cfg.counts_per_point {
        None => calibrate(&cfg.initial, adjust)?,
        Some(counts) => {
            let seed = seed.or(cfg.seed).unwrap_or(0);
            let mut rng = RngStream::new(seed, "calibrate", 0);
            noisy_calibrate_adjust(&cfg.initial, adjust, counts, &mut rng)?
        }
    };
    let text = match format {
        Format::Json => json_string(&outcome)?,
        Format::Csv => calibration_csv(&outcome.trace),
    };
    deliver(&text, out)
}

fn cmd_curves(out_dir: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(out_dir).map_err(Error::Io)?;

    // Heralded photon-number distributions for three source settings.
    let mut herald = String::from("eta_a,lambda_sq,herald_k,n,prob\n");
    for (eta_a, lambda_sq) in [(0.8, 0.25), (0.1, 0.01), (0.1, 0.25)] {
        let src = HeraldedSourceParams { lambda_sq, eta_a };
        let dist = decoyqkd::conditional_distribution(&src, 1)?;
        for (n, &p) in dist.probs().iter().enumerate().take(9) {
            herald.push_str(&format!("{eta_a},{lambda_sq},1,{n},{p:e}\n"));
        }
    }
    std::fs::write(out_dir.join("herald_distributions.csv"), herald)?;

    // Two-photon interference visibility against the bandwidth ratio.
    let mut vis = String::from("bandwidth_ratio,visibility\n");
    for i in 0..=200 {
        let s = 10f64.powf(-2.0 + 4.0 * i as f64 / 200.0);
        let p = HomParams { sigma1: s, sigma2: 1.0, omega1: 0.0, omega2: 0.0, t: 0.0 };
        vis.push_str(&format!("{s:e},{:e}\n", visibility(&p)));
    }
    std::fs::write(out_dir.join("visibility_vs_bandwidth_ratio.csv"), vis)?;

    // Optimal intensity against channel efficiency (pure loss).
    let loss_grid: Vec<f64> = (0..=100).map(|i| 1e-6 + (1.0 - 1e-6) * i as f64 / 100.0).collect();
    let loss_points = mu_curve(&CurveFamily::Loss, &loss_grid)?;
    std::fs::write(out_dir.join("optimal_mu_vs_loss.csv"), curve_csv(&loss_points))?;

    // Optimal intensity against the transmittivity ratio under a
    // block-and-boost attack with lossless multiphoton forwarding.
    let ratio_grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    let attack_points = mu_curve(&CurveFamily::AttackRatio { kappa_m: 1.0 }, &ratio_grid)?;
    std::fs::write(
        out_dir.join("optimal_mu_vs_attack_ratio.csv"),
        curve_csv(&attack_points),
    )?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    if let Some(workers) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    }
    match &cli.command {
        Command::Simulate { config, seed, format, output } => {
            cmd_simulate(config, *seed, *format, output)
        }
        Command::Detect { ledger, config, format, output } => {
            cmd_detect(ledger, config, *format, output)
        }
        Command::OptimizeMu { config, format, output } => cmd_optimize_mu(config, *format, output),
        Command::Calibrate { config, seed, format, output } => {
            cmd_calibrate(config, *seed, *format, output)
        }
        Command::Curves { out } => cmd_curves(out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
