mod commands;
mod fail;
mod store;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fail::Failure;

/// Pseudonymous crowd-sensing with certificateless aggregate signatures.
///
/// State lives in plain files under --dir; each subcommand runs one
/// protocol phase and leaves its artifact there.
#[derive(Debug, Parser)]
#[command(name = "mhcs", version)]
struct Cli {
    /// State directory.
    #[arg(long, global = true, env = "MHCS_DIR", default_value = "mhcs-state")]
    dir: PathBuf,

    /// Seed for reproducible randomness. Omit to use system entropy.
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate the group parameters and the MS and DC key pairs.
    Setup {
        /// Security level in bits: 128 (bls12-381) or 80 (type-a-512).
        #[arg(long, default_value_t = 128)]
        level: u32,
        /// Output directory (defaults to --dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overwrite existing keys.
        #[arg(long)]
        force: bool,
    },
    /// Enroll a participant: fresh user key, partial key and pseudonym from the MS.
    Register {
        #[arg(long)]
        id: String,
    },
    /// Sign a message file and queue the submission.
    Sign {
        #[arg(long)]
        id: String,
        /// File holding the raw message bytes.
        #[arg(long)]
        message: PathBuf,
        /// Unix timestamp (defaults to now).
        #[arg(long)]
        time: Option<u64>,
        /// Write the submission here instead of appending to the outbox.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Open queued submissions at the DC and fold them into a slot.
    Submit {
        #[arg(long)]
        slot: u64,
        /// JSONL submissions (defaults to the outbox, which is then cleared).
        #[arg(long)]
        input: Option<PathBuf>,
        /// Slot start when creating it (defaults to slot * duration).
        #[arg(long)]
        start: Option<u64>,
        /// Slot length in seconds when creating it.
        #[arg(long, default_value_t = 60)]
        duration: u64,
    },
    /// Print the folded aggregate of a slot.
    Aggregate {
        #[arg(long)]
        slot: u64,
    },
    /// Verify a slot with two pairings; exit 0 iff verified.
    BatchVerify {
        #[arg(long)]
        slot: u64,
    },
    /// MS lookup of the identity behind a pseudonym index (hex).
    Trace {
        #[arg(long)]
        index: String,
    },
    /// Run a full slot in memory, optionally with one tampered submission.
    Simulate {
        /// JSON scenario config; flags below override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        participants: Option<usize>,
        /// Slot length in seconds.
        #[arg(long)]
        duration: Option<u64>,
        #[arg(long)]
        message_bits: Option<u64>,
        /// field:index with field in m, u, v, sn_enc, t and a 1-based index.
        #[arg(long)]
        tamper: Option<String>,
        #[arg(long, default_value_t = 128)]
        level: u32,
        /// Also write the outcome JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Count operations per phase and compare with the predicted costs.
    Bench {
        /// Comma-separated participant counts.
        #[arg(long, value_delimiter = ',', default_value = "1,10,100,1000")]
        participants: Vec<u64>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
        /// Leave wall-clock fields out of the JSON.
        #[arg(long)]
        no_timings: bool,
        /// Worker threads for per-participant phases.
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, default_value_t = 160)]
        message_bits: u64,
        /// Security level; defaults to the one in --dir, else 128.
        #[arg(long)]
        level: Option<u32>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure { code, error }) => {
            eprintln!("mhcs: {error:#}");
            ExitCode::from(code)
        }
    }
}
