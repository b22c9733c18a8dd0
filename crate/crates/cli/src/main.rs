//! `dressed` — reproducible ground-state, propagation and table workflows.
//!
//! ```text
//! dressed <gs|prop|fig1|fig2|suppv|check> [--config PATH] [--out DIR] [--override key=value]...
//! ```

use clap::{Parser, ValueEnum};
use dressed_core::config::parse_config_with;
use dressed_core::run::{execute, Command};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Subcommand {
    /// Ground state of the configured solver.
    Gs,
    /// Single time propagation with residual diagnostics.
    Prop,
    /// Two-site dipole comparison of exact, dressed and standard KS.
    Fig1,
    /// Helium photon fluctuations and densities.
    Fig2,
    /// Ground-state fluctuation table of the dressed two-particle systems.
    Suppv,
    /// Quick invariant suite; exits non-zero on any failure.
    Check,
}

impl From<Subcommand> for Command {
    fn from(s: Subcommand) -> Self {
        match s {
            Subcommand::Gs => Command::Gs,
            Subcommand::Prop => Command::Prop,
            Subcommand::Fig1 => Command::Fig1,
            Subcommand::Fig2 => Command::Fig2,
            Subcommand::Suppv => Command::Suppv,
            Subcommand::Check => Command::Check,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "dressed", version, about = "Dressed-orbital cavity QED laboratory")]
struct Cli {
    #[arg(value_enum)]
    command: Subcommand,
    /// TOML run configuration; missing keys take the subcommand defaults.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (overrides `output.directory`).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Dotted key assignment applied after the file, e.g. `model.lambda=0.05`.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn run(cli: Cli) -> Result<bool, String> {
    let command = Command::from(cli.command);
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?,
        None => String::new(),
    };
    let config = parse_config_with(&text, &command.default_config(), &cli.overrides).map_err(|e| match &cli.config {
        Some(path) => format!("{}: {e}", path.display()),
        None => e.to_string(),
    })?;
    let out = cli.out.unwrap_or_else(|| PathBuf::from(&config.output.directory));
    let report = execute(command, &config, &out).map_err(|e| e.to_string())?;
    for line in &report.lines {
        println!("{line}");
    }
    println!("wrote {} files to {}", report.files.len(), out.display());
    Ok(report.passed)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
