use clap::{Parser, Subcommand};
use nielsen_cli::commands::{cmd_charges, cmd_curve, cmd_cvpbench, cmd_qspectrum, cmd_rmt, output_dir, Context};
use nielsen_cli::{CliError, Result, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "nielsen", version, about = "Complexity bounds for spin-chain evolution")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides run.output_dir)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides run.seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Use the long time window [5e7, 6e7] with step 1e4
    #[arg(long, global = true)]
    long_run: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Bounded and bi-invariant complexity over the time window
    Curve,
    /// Q spectrum and kernel over a locality sweep
    Qspectrum,
    /// Conserved laws from the kernel of Q
    Charges,
    /// Haar-basis checks of the Q moments and the four-point function
    Rmt,
    /// CVP heuristics against exact enumeration on random lattices
    Cvpbench,
}

fn run(cli: Cli) -> Result<Vec<PathBuf>> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    let mut config = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.run.seed = seed;
    }
    if cli.long_run {
        config.apply_long_run();
    }
    let out = output_dir(cli.out.as_deref(), &config);
    let ctx = Context::new(config, out)?;
    match cli.command {
        Command::Curve => cmd_curve(&ctx),
        Command::Qspectrum => cmd_qspectrum(&ctx),
        Command::Charges => cmd_charges(&ctx),
        Command::Rmt => cmd_rmt(&ctx),
        Command::Cvpbench => cmd_cvpbench(&ctx),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
