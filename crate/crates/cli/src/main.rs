use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use assurance_cli::output::{emit, Format, OutputOptions};
use assurance_cli::{run, Command, McFlags, RunConfig};

/// Bayesian assurance and power calculations for sample-size planning.
#[derive(Parser)]
#[command(name = "assurance", version)]
struct Cli {
    command: Command,
    /// TOML file with a section named after the command.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Set or override a key, e.g. `-p n=20` or `-p 'n=[10,20,30]'`.
    #[arg(short = 'p', long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo iterations per sample size.
    #[arg(long = "iter")]
    mc_iter: Option<usize>,
    /// Outer datasets for the unknown-variance estimator.
    #[arg(long)]
    datasets: Option<usize>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out_csv: Option<PathBuf>,
    #[arg(long)]
    out_svg: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let flags = McFlags {
        seed: cli.seed,
        mc_iter: cli.mc_iter,
        datasets: cli.datasets,
        workers: cli.workers,
    };
    let opts = OutputOptions {
        out_csv: cli.out_csv,
        out_svg: cli.out_svg,
        format: cli.format,
    };
    let result = RunConfig::load(cli.command, cli.config.as_deref(), &cli.params, flags)
        .and_then(|config| run(&config))
        .and_then(|bundle| emit(&bundle, &opts, &mut std::io::stdout().lock()));
    match result {
        Ok(notes) => {
            for note in notes {
                eprintln!("note: {note}");
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("assurance: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
