use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::Parser;
use qscissor_cli::{exit_code, experiment_from_arg, experiments, load_config, output, ConfigError};

#[derive(Parser, Debug)]
#[command(
    name = "qscissor",
    version,
    about = "Quantum scissor amplifier simulations",
    after_help = "Experiments: scissor, gain-sweep, fringes, negativity, hom, sobol.\n\
                  Use `qscissor validate --config <file>` to check a config without running it."
)]
struct Cli {
    /// Experiment name, or `validate`.
    command: String,
    /// TOML config file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Seed for stochastic experiments; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// With `validate`: the experiment the config must describe.
    #[arg(long)]
    experiment: Option<String>,
}

fn run(cli: Cli) -> Result<()> {
    if cli.command == "validate" {
        let requested = cli.experiment.as_deref().map(experiment_from_arg).transpose()?;
        let mut config = load_config(&cli.config, requested)?;
        if let Some(w) = config.apply_seed(cli.seed) {
            eprintln!("{w}");
        }
        if let Some(mut e) = config.missing_seed() {
            e.source_name = cli.config.display().to_string();
            return Err(e.into());
        }
        println!("{}: ok ({})", cli.config.display(), config.experiment);
        return Ok(());
    }
    let experiment = experiment_from_arg(&cli.command)?;
    let mut config = load_config(&cli.config, Some(experiment))?;
    if let Some(w) = config.apply_seed(cli.seed) {
        eprintln!("{w}");
    }
    if let Some(mut e) = config.missing_seed() {
        e.source_name = cli.config.display().to_string();
        return Err(e.into());
    }
    let table = experiments::run(&config)?;
    let written = output::write(&cli.out, &config, &table)?;
    eprintln!("wrote {} rows to {}", table.rows.len(), written.csv.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            if err.downcast_ref::<ConfigError>().is_some() {
                eprintln!("error: {err}");
            } else {
                eprintln!("error: {err:#}");
            }
            ExitCode::from(exit_code(&err))
        }
    }
}
