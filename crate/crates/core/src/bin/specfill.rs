use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use specfill::experiment::{
    default_workers, exit_code, run, ConfigFile, ExperimentConfig, FillingChoice, Mode, Overrides,
    EXIT_CONFIG,
};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Spectrum,
    Verify,
    FourthMoment,
    ReproduceFig1,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Spectrum => Mode::Spectrum,
            ModeArg::Verify => Mode::Verify,
            ModeArg::FourthMoment => Mode::FourthMoment,
            ModeArg::ReproduceFig1 => Mode::ReproduceFig1,
        }
    }
}

/// Spectra of symmetric random matrices filled from a stochastic process.
///
/// Exit codes: 0 success, 1 a verification check failed, 2 invalid config,
/// 3 runtime failure. Worker count is capped by SPECFILL_WORKERS.
#[derive(Debug, Parser)]
#[command(name = "specfill", version)]
struct Cli {
    mode: ModeArg,
    /// JSON config file; command-line flags win over its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Use a binary chain with this stay probability.
    #[arg(long)]
    p: Option<f64>,
    /// diagonal, rowwise or custom:PATH
    #[arg(long)]
    filling: Option<FillingChoice>,
    #[arg(long)]
    kmax: Option<u32>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mode = Mode::from(cli.mode);
    let file = match cli.config.as_deref().map(ConfigFile::load).transpose() {
        Ok(f) => f.unwrap_or_default(),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    let overrides = Overrides {
        n: cli.n,
        trials: cli.trials,
        seed: cli.seed,
        output: cli.out,
        p: cli.p,
        filling: cli.filling,
        k_max: cli.kmax,
    };
    let config = match ExperimentConfig::resolve(mode, file, overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    let result = run(&config, default_workers());
    match &result {
        Ok(outcome) => {
            print!("{}", outcome.text);
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
        }
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(exit_code(&result) as u8)
}
