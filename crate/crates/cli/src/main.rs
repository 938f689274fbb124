//! `ordaudit` - transaction-ordering forensics from the command line.
//!
//! Exit codes: 0 success, 1 validation/data failure, 2 usage error.

mod commands;
mod fmt;
mod sink;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use commands::{CliFailure, SynthGenerateArgs};
use ordaudit::stats::{TestKind, TestMethod};
use sink::{Format, Sink};

#[derive(Parser)]
#[command(
    name = "ordaudit",
    version,
    about = "Audit blockchain transaction ordering: norms, deviation metrics, prioritization tests, bundles, and synthetic ground truth"
)]
struct Cli {
    /// Dataset directory holding transactions.jsonl, blocks.jsonl, snapshots.jsonl
    #[arg(long, global = true, env = "ORDAUDIT_DATA", default_value = ".")]
    data: PathBuf,

    /// Report encoding
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Write reports into this directory under fixed names instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Accel,
    Decel,
}

impl From<KindArg> for TestKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Accel => TestKind::Acceleration,
            KindArg::Decel => TestKind::Deceleration,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Exact,
    Normal,
}

impl From<MethodArg> for TestMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Exact => TestMethod::Exact,
            MethodArg::Normal => TestMethod::NormalApprox,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check dataset invariants and referential integrity
    Validate,
    /// Per-block position prediction error
    Ppe,
    /// Signed position prediction error of a cohort within one miner's blocks
    Sppe {
        #[arg(long)]
        miner: String,
        /// Cohort file: JSON Lines of {"cohort", "txid"}
        #[arg(long)]
        cohort: PathBuf,
    },
    /// Differential-prioritization hypothesis test
    Test {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long, value_enum)]
        method: MethodArg,
        #[arg(long)]
        miner: String,
        #[arg(long)]
        cohort: PathBuf,
        /// Split the chain into height windows of this size and combine
        /// per-window p-values with Fisher's method
        #[arg(long)]
        fisher_window: Option<u64>,
        /// Significance level
        #[arg(long, default_value_t = 0.01)]
        alpha: f64,
    },
    /// Transactions whose signed position error clears a threshold
    DetectAccelerated {
        /// Threshold in percent
        #[arg(long, default_value = "99")]
        threshold: String,
    },
    /// Child-pays-for-parent transactions per block
    Cpfp,
    /// Selection-norm violation pairs per mempool snapshot
    Violations {
        /// Seconds added to the earlier arrival before it counts as earlier
        #[arg(long, default_value_t = 0)]
        epsilon: u64,
        /// Keep CPFP transactions in the pair universe
        #[arg(long)]
        include_cpfp: bool,
        /// Audit only this many snapshots, sampled uniformly
        #[arg(long)]
        sample: Option<usize>,
        #[arg(long, default_value_t = 0)]
        sample_seed: u64,
    },
    /// Private-relay bundle analysis
    Bundles {
        #[command(subcommand)]
        action: BundlesCmd,
    },
    /// Mempool size series with congestion bins
    Congestion,
    /// Commit delay in blocks per committed transaction
    Delays,
    /// Share of block revenue coming from fees
    FeeShare,
    /// Miner wallet addresses extracted from coinbases
    Wallets,
    /// Build the self-interest cohort of a miner (JSON Lines cohort file)
    SelfInterest {
        #[arg(long)]
        miner: String,
    },
    /// Synthetic ground-truth chains
    Synth {
        #[command(subcommand)]
        action: SynthCmd,
    },
}

#[derive(Subcommand)]
enum BundlesCmd {
    /// Classify each bundle with the size-2/size-3 heuristics
    Classify {
        /// Bundle ingest file (JSON Lines, one transaction per row)
        #[arg(long)]
        bundles: PathBuf,
    },
    /// Corpus aggregates
    Stats {
        #[arg(long)]
        bundles: PathBuf,
    },
}

#[derive(Subcommand)]
enum SynthCmd {
    /// Generate a norm-following chain into --out
    Generate {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        blocks: u64,
        /// Comma-separated NAME:SHARE pairs; shares must sum to 1
        #[arg(long, default_value = "M0:0.2,M1:0.2,M2:0.2,M3:0.2,M4:0.2")]
        miners: String,
        /// Block capacity in vbytes
        #[arg(long, default_value_t = 20_000)]
        capacity: u64,
        /// Mean transaction arrivals per block interval
        #[arg(long, default_value_t = 80.0)]
        rate: f64,
        /// ln-space mean of the fee-rate distribution (ln sat/vB)
        #[arg(long, default_value_t = 2.995732273553991)]
        feerate_mu_ln: f64,
        #[arg(long, default_value_t = 1.2)]
        feerate_sigma_ln: f64,
        /// Snapshot every k-th block (0 disables snapshots)
        #[arg(long, default_value_t = 10)]
        snapshot_every: u64,
    },
    /// Inject accelerated transactions into an existing synthetic chain
    Inject {
        #[arg(long)]
        seed: u64,
        /// Comma-separated accelerating miner names
        #[arg(long)]
        miners: String,
        /// How many pending low-fee transactions to accelerate
        #[arg(long)]
        count: u64,
    },
}

fn run(cli: Cli) -> Result<u8, CliFailure> {
    let sink = Sink::new(cli.format, cli.out.clone());
    match &cli.command {
        Command::Validate => {
            let ds = commands::load_dataset(&cli.data)?;
            commands::cmd_validate(&sink, &ds)
        }
        Command::Ppe => {
            let ds = commands::load_dataset(&cli.data)?;
            commands::cmd_ppe(&sink, &ds)
        }
        Command::Sppe { miner, cohort } => {
            let ds = commands::load_dataset(&cli.data)?;
            commands::cmd_sppe(&sink, &ds, miner, cohort)
        }
        Command::Test { kind, method, miner, cohort, fisher_window, alpha } => {
            let ds = commands::load_dataset(&cli.data)?;
            commands::cmd_test(
                &sink,
                &ds,
                (*kind).into(),
                (*method).into(),
                miner,
                cohort,
                *fisher_window,
                *alpha,
            )
        }
        Command::DetectAccelerated { threshold } => {
            let ds = commands::load_dataset(&cli.data)?;
            let t = fmt::parse_decimal(threshold).map_err(CliFailure::usage)?;
            if t > num_rational::Ratio::new(100, 1) {
                return Err(CliFailure::usage("--threshold must be within [0, 100]"));
            }
            let threshold = num_rational::Rational64::new(*t.numer() as i64, *t.denom() as i64);
            commands::cmd_detect_accelerated(&sink, &ds, threshold)
        }
        Command::Cpfp => {
            let ds = commands::load_dataset(&cli.data)?;
            commands::cmd_cpfp(&sink, &ds)
        }
        Command::Violations { epsilon, include_cpfp, sample, sample_seed } => {
            let ds = commands::load_dataset(&cli.data)?;
            commands::cmd_violations(&sink, &ds, *epsilon, *include_cpfp, *sample, *sample_seed)
        }
        Command::Bundles { action } => match action {
            BundlesCmd::Classify { bundles } => commands::cmd_bundles_classify(&sink, bundles),
            BundlesCmd::Stats { bundles } => commands::cmd_bundles_stats(&sink, bundles),
        },
        Command::Congestion => {
            let ds = commands::load_dataset(&cli.data)?;
            commands::cmd_congestion(&sink, &ds)
        }
        Command::Delays => {
            let ds = commands::load_dataset(&cli.data)?;
            commands::cmd_delays(&sink, &ds)
        }
        Command::FeeShare => {
            let ds = commands::load_dataset(&cli.data)?;
            commands::cmd_fee_share(&sink, &ds)
        }
        Command::Wallets => {
            let ds = commands::load_dataset(&cli.data)?;
            commands::cmd_wallets(&sink, &ds)
        }
        Command::SelfInterest { miner } => {
            let ds = commands::load_dataset(&cli.data)?;
            commands::cmd_self_interest(&sink, &ds, miner)
        }
        Command::Synth { action } => match action {
            SynthCmd::Generate {
                seed,
                blocks,
                miners,
                capacity,
                rate,
                feerate_mu_ln,
                feerate_sigma_ln,
                snapshot_every,
            } => commands::cmd_synth_generate(
                cli.out.as_ref(),
                &SynthGenerateArgs {
                    seed: *seed,
                    blocks: *blocks,
                    miners: miners.clone(),
                    capacity: *capacity,
                    rate: *rate,
                    feerate_mu_ln: *feerate_mu_ln,
                    feerate_sigma_ln: *feerate_sigma_ln,
                    snapshot_every: *snapshot_every,
                },
            ),
            SynthCmd::Inject { seed, miners, count } => {
                commands::cmd_synth_inject(&cli.data, cli.out.as_ref(), *seed, miners, *count)
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
