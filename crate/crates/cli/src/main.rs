use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::error::ErrorKind;
use clap::Parser;
use irs_swipt_cli::{parse_config, run_sweep, write_csv, Preset, SweepSpec};

/// Sweeps average harvested energy and outage probability over IRS size and
/// correlation, pairing closed forms with Monte Carlo estimates.
#[derive(Debug, Parser)]
#[command(name = "irs-swipt", version)]
struct Args {
    /// JSON sweep configuration.
    #[arg(long, value_name = "PATH", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in sweep: fig1 (energy) or fig2 (outage).
    #[arg(long, value_name = "NAME")]
    preset: Option<Preset>,
    /// Output CSV file [default: stdout].
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Monte Carlo trials per cell [default: 1000000, or the config value].
    #[arg(long, value_name = "N")]
    trials: Option<u64>,
    /// RNG seed [default: 1, or the config value].
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Skip Monte Carlo and emit closed forms only.
    #[arg(long)]
    analytic_only: bool,
}

fn spec_from(args: &Args) -> anyhow::Result<SweepSpec> {
    let mut spec = match (&args.config, args.preset) {
        (Some(path), _) => parse_config(path)?,
        (None, Some(preset)) => preset.spec(),
        (None, None) => SweepSpec::default(),
    };
    if let Some(trials) = args.trials {
        anyhow::ensure!(
            trials >= irs_swipt::montecarlo::MIN_TRIALS,
            "--trials must be at least {}",
            irs_swipt::montecarlo::MIN_TRIALS
        );
        spec.trials = trials;
    }
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    spec.analytic_only |= args.analytic_only;
    Ok(spec)
}

fn run(args: Args) -> anyhow::Result<()> {
    let spec = spec_from(&args)?;
    let rows = run_sweep(&spec)?;
    match &args.out {
        Some(path) => {
            let file =
                File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
            let mut w = BufWriter::new(file);
            write_csv(&rows, &mut w)?;
            w.flush()
                .with_context(|| format!("cannot write {}", path.display()))?;
        }
        None => write_csv(&rows, io::stdout().lock())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            e.exit()
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("{}", first.trim());
            return ExitCode::from(2);
        }
    };
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
