//! `esrsim` command line: run pulse programs over thermal spin ensembles,
//! inspect the resonance-line spectrum, drive the smallest-element and
//! dominant-answer readouts, and run the verification suites.
//!
//! Exit codes: 0 ok, 2 usage, 3 config, 4 runtime, 5 verification failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;

use commands::ShorInput;
use esrsim::protocols::RegisterPurity;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Config(String),
    Runtime(String),
    Verification(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Config(_) => 3,
            CliError::Runtime(_) => 4,
            CliError::Verification(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m)
            | CliError::Config(m)
            | CliError::Runtime(m)
            | CliError::Verification(m) => m,
        }
    }
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration (defaults apply when omitted).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Report output path (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for the seeded suites and sampled modes.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the gradient-averaging mode: `exact` or `sampled:<grid>`.
    #[arg(long, global = true)]
    mode: Option<String>,
}

#[derive(Debug, Parser)]
#[command(name = "esrsim", version, about = "pulse-level spin-chain ensemble simulator")]
struct Cli {
    #[command(flatten)]
    common: Common,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Execute a pulse program over the configured thermal ensemble.
    Run {
        /// Pulse program file.
        program: PathBuf,
    },
    /// Emit the resonance-line table and addressability report.
    Spectrum,
    /// Build a periodic (or shifted-periodic) register state and run the
    /// smallest-element readout.
    Shor {
        /// First-register width in bits (periodic state).
        #[arg(long)]
        w_bits: Option<usize>,
        /// Period of the first register (periodic state).
        #[arg(long)]
        period: Option<u32>,
        /// Base for the shifted-periodic state.
        #[arg(long)]
        x: Option<u64>,
        /// Modulus for the shifted-periodic state.
        #[arg(long)]
        modulus: Option<u64>,
        /// Shift depth for the shifted-periodic state.
        #[arg(long, default_value_t = 0)]
        shift: u64,
        /// Descent strategy: all, exhaustive_scan, unwind_each, cumulative.
        #[arg(long)]
        strategy: Option<String>,
        /// Register load: dephased (traced second register) or pure.
        #[arg(long, default_value = "dephased")]
        purity: String,
    },
    /// Build a dominant-answer state, run the bit-descent readout and the
    /// small-angle probe.
    Grover {
        /// Answer pattern over {0,1}, big-endian from spin 2.
        #[arg(long)]
        answer: String,
        /// Squared weight of the answer, in (0.5, 1].
        #[arg(long)]
        weight: f64,
    },
    /// Run the oracle differential and truth-table suites.
    Verify {
        /// Check that the comparison harness detects an injected deviation.
        #[arg(long)]
        self_check: bool,
    },
}

fn apply_mode_override(cfg: &mut config::RunConfig, mode: &str, seed: u64) -> Result<(), CliError> {
    if mode == "exact" {
        cfg.mode = config::ModeConfig::Exact;
        return Ok(());
    }
    if let Some(grid) = mode.strip_prefix("sampled:") {
        let grid: usize = grid
            .parse()
            .map_err(|_| CliError::Usage(format!("bad grid in mode `{mode}`")))?;
        cfg.mode = config::ModeConfig::Sampled { grid, seed };
        return Ok(());
    }
    Err(CliError::Usage(format!(
        "mode must be `exact` or `sampled:<grid>`, got `{mode}`"
    )))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = config::load_config(cli.common.config.as_deref()).map_err(CliError::Config)?;
    let seed = cli.common.seed.unwrap_or(42);
    if let Some(mode) = &cli.common.mode {
        apply_mode_override(&mut cfg, mode, seed)?;
    }
    let out = cli.common.out.as_deref();

    match cli.command {
        Command::Run { program } => commands::cmd_run(&cfg, &program, out, cli.common.seed),
        Command::Spectrum => commands::cmd_spectrum(&cfg, out),
        Command::Shor {
            w_bits,
            period,
            x,
            modulus,
            shift,
            strategy,
            purity,
        } => {
            let purity = match purity.as_str() {
                "pure" => RegisterPurity::Pure,
                "dephased" => RegisterPurity::Dephased,
                other => {
                    return Err(CliError::Usage(format!(
                        "purity must be `pure` or `dephased`, got `{other}`"
                    )))
                }
            };
            let input = match (w_bits, period, x, modulus) {
                (Some(w), Some(t), None, None) => ShorInput::Periodic { w_bits: w, period: t },
                (Some(w), None, Some(x), Some(m)) => ShorInput::Shifted {
                    x,
                    modulus: m,
                    shift,
                    w_bits: w,
                },
                _ => {
                    return Err(CliError::Usage(
                        "shor needs either --w-bits and --period, or --w-bits, --x and --modulus"
                            .into(),
                    ))
                }
            };
            commands::cmd_shor(&cfg, input, strategy.as_deref(), purity, out)
        }
        Command::Grover { answer, weight } => commands::cmd_grover(&cfg, &answer, weight, out),
        Command::Verify { self_check } => commands::cmd_verify(&cfg, seed, self_check, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
