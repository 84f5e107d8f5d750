use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fmflow::commands::{run, write_run, Command, RunOptions};
use fmflow::config::Config;
use fmflow::formats::TableFormat;
use fmflow::verify::Suite;
use fmflow::CliError;

#[derive(Parser)]
#[command(name = "fmflow", version, about = "Spectral-measure experiments for the active turbulence model")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Phase diagram over the configured (Γ₀, α, Γ₂, β) sweep.
    Classify(Common),
    /// Dispersion curve σ(k) with marked zero crossings.
    Dispersion(Common),
    /// Measured vs predicted growth rate of a seeded plane wave.
    Growth(Common),
    /// Nonlinear evolution: diagnostics, snapshots and a manifest.
    Evolve(Common),
    /// Built-in verification suites.
    Verify {
        #[arg(value_enum, default_value = "all")]
        suite: SuiteArg,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// TOML config; every key has a default.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "fmflow-out")]
    out: PathBuf,
    /// Overrides seed.value from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores). Does not change any output.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Jsonl,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Algebra,
    Symbols,
    Maxreg,
    Oracle,
    All,
}

fn execute(cmd: Command, c: Common) -> Result<i32, CliError> {
    let cfg = match &c.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let format = match c.format {
        FormatArg::Csv => TableFormat::Csv,
        FormatArg::Jsonl => TableFormat::Jsonl,
    };
    let opts = RunOptions { seed: c.seed, threads: c.threads, format };
    let pool =
        rayon::ThreadPoolBuilder::new().num_threads(c.threads).build().map_err(|e| CliError::Usage(e.to_string()))?;
    let res = pool.install(|| run(cmd, cfg, &opts, Some(&c.out)))?;
    write_run(&res, &c.out)?;
    println!("{}", res.report);
    println!("manifest {} -> {}", res.manifest.config_hash, c.out.display());
    Ok(res.exit_code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, common) = match cli.command {
        Sub::Classify(c) => (Command::Classify, c),
        Sub::Dispersion(c) => (Command::Dispersion, c),
        Sub::Growth(c) => (Command::Growth, c),
        Sub::Evolve(c) => (Command::Evolve, c),
        Sub::Verify { suite, common } => {
            let s = match suite {
                SuiteArg::Algebra => Suite::Algebra,
                SuiteArg::Symbols => Suite::Symbols,
                SuiteArg::Maxreg => Suite::Maxreg,
                SuiteArg::Oracle => Suite::Oracle,
                SuiteArg::All => Suite::All,
            };
            (Command::Verify(s), common)
        }
    };
    match execute(cmd, common) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("fmflow: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
