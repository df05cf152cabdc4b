use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use smrs_core::{
    check_unique_columns, reconstruct, ChannelConfig, DetectorConfig, GridLayout, GridSpec,
    SolveConfig,
};
use smrs_harness::spectra_io::parse_spectra;
use smrs_harness::{parse_rates, run_sweep, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "smrs",
    version,
    about = "Multirate sub-Nyquist spectrum reconstruction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo sweep and write results.csv and trials.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// Use a 5 MHz grid and 1000 trials per point.
        #[arg(long)]
        full_scale: bool,
    },
    /// Reconstruct one spectrum from a spectra file.
    Solve {
        /// Channel rates, e.g. `0.95G,1G,1.05G`; must match the file.
        #[arg(long)]
        channels: String,
        #[arg(long)]
        input: PathBuf,
        /// Energy-threshold detection, widened blocks and the rank stop rule.
        #[arg(long)]
        noisy: bool,
        /// Write `l re im` lines here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Report whether the channel set gives unique columns up to f_max.
    Check {
        #[arg(long)]
        channels: String,
        #[arg(long)]
        fmax: f64,
        #[arg(long, default_value_t = 5e6)]
        delta_f: f64,
        /// Two-sided grid for real signals.
        #[arg(long)]
        real: bool,
    },
}

fn run(config: PathBuf, out_dir: PathBuf, full_scale: bool) -> anyhow::Result<ExitCode> {
    let mut cfg =
        ExperimentConfig::load(&config).with_context(|| format!("loading {}", config.display()))?;
    if full_scale {
        cfg = cfg.with_full_scale();
        cfg.validate()?;
    }
    let result = run_sweep(&cfg)?;
    result.write_outputs(&out_dir)?;
    println!("ratio\tlandau_hz\tsuccess\till_posed\tmean_runtime_s\tmax_condition\tmax_support_condition");
    for p in &result.points {
        println!(
            "{:.3}\t{:e}\t{:.3}\t{:.3}\t{:.3e}\t{:.3}\t{:.3}",
            p.ratio,
            p.landau_hz,
            p.success_rate,
            p.ill_posed_rate,
            p.mean_runtime_s,
            p.max_condition,
            p.max_support_condition
        );
    }
    eprintln!("wrote {}", out_dir.join("results.csv").display());
    Ok(ExitCode::SUCCESS)
}

fn solve(
    channels: String,
    input: PathBuf,
    noisy: bool,
    output: Option<PathBuf>,
) -> anyhow::Result<ExitCode> {
    let text =
        std::fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
    let file = parse_spectra(&text)?;
    let rates = parse_rates(&channels)?;
    let expected: Vec<usize> = rates
        .iter()
        .map(|&r| ChannelConfig::from_rate(r, file.delta_f).map(|c| c.bins_per_period()))
        .collect::<Result<_, _>>()?;
    let found: Vec<usize> = file
        .channels
        .iter()
        .map(|c| c.config().bins_per_period())
        .collect();
    if expected != found {
        bail!("--channels gives M = {expected:?} but the file holds M = {found:?}");
    }
    let (detector, solver) = if noisy {
        (DetectorConfig::noisy(), SolveConfig::noisy())
    } else {
        (DetectorConfig::default(), SolveConfig::default())
    };
    let report = reconstruct(&file.channels, file.grid()?, &detector, &solver)?;
    eprintln!(
        "{:?}: {} x {} system, condition {:.4e}, {} iteration(s), residual {:.3e}{}",
        report.posedness,
        report.rows,
        report.columns,
        report.condition_number,
        report.iterations,
        report.residual_norm,
        if report.converged {
            ""
        } else {
            ", not converged"
        },
    );
    let mut out: Box<dyn Write> = match output {
        Some(path) => Box::new(std::io::BufWriter::new(std::fs::File::create(path)?)),
        None => Box::new(std::io::stdout().lock()),
    };
    for l in report.mask.bins() {
        let v = report.spectrum.get(l);
        writeln!(out, "{l} {:e} {:e}", v.re, v.im)?;
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn check(channels: String, fmax: f64, delta_f: f64, real: bool) -> anyhow::Result<ExitCode> {
    let rates = parse_rates(&channels)?;
    let configs = rates
        .iter()
        .map(|&r| ChannelConfig::from_rate(r, delta_f))
        .collect::<Result<Vec<_>, _>>()?;
    let (layout, span) = if real {
        (GridLayout::Real, 2.0 * fmax)
    } else {
        (GridLayout::Complex, fmax)
    };
    let grid = GridSpec::from_span(layout, span, delta_f)?;
    for c in &configs {
        c.check_layout(layout)?;
    }
    let verdict = check_unique_columns(&configs, grid)?;
    let ms: Vec<usize> = configs.iter().map(ChannelConfig::bins_per_period).collect();
    println!("M_i = {ms:?}, grid M = {}", grid.m_total());
    println!(
        "lcm = {} bins = {:e} Hz",
        verdict.lcm,
        verdict.max_span_hz(delta_f)
    );
    if verdict.ok {
        println!("unique: yes");
        Ok(ExitCode::SUCCESS)
    } else {
        match verdict.duplicate {
            Some((a, b)) => println!("unique: no (columns {a} and {b} coincide)"),
            None => println!("unique: no"),
        }
        Ok(ExitCode::from(2))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            out_dir,
            full_scale,
        } => run(config, out_dir, full_scale),
        Command::Solve {
            channels,
            input,
            noisy,
            output,
        } => solve(channels, input, noisy, output),
        Command::Check {
            channels,
            fmax,
            delta_f,
            real,
        } => check(channels, fmax, delta_f, real),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::FAILURE
    })
}
