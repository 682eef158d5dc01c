//! `appeval` command-line front end.

mod cls;
mod ctds;
mod pose;
mod report;
mod synth;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Exit status 1: the inputs or the model failed. Exit status 2: the command line was wrong.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

impl From<appeval::Error> for Failure {
    fn from(e: appeval::Error) -> Self {
        Failure::Data(e.into())
    }
}

pub type CmdResult = Result<(), Failure>;

pub fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

#[derive(Parser, Debug)]
#[command(name = "appeval", version, about = "Application-specific evaluation of camera-trap and posture pipelines")]
struct Cli {
    /// Worker threads for data-parallel loops (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Density and abundance per filter scenario and detection function.
    Ctds(ctds::CtdsArgs),
    /// Keypoint metrics and head-rotation errors of 3D posture predictions.
    Pose(pose::PoseArgs),
    /// Per-class average precision and macro mAP of classifier scores.
    Clsmetrics(cls::ClsArgs),
    /// Generate synthetic data with known truth.
    #[command(subcommand)]
    Synth(SynthCommand),
}

#[derive(Subcommand, Debug)]
enum SynthCommand {
    /// A camera-trap survey.
    Ctds(SynthArgs),
    /// A multi-camera recording of rigid heads.
    Rig(SynthArgs),
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Truth record (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the seed in the truth record.
    #[arg(long)]
    seed: Option<u64>,
}

fn configure_threads(threads: Option<usize>) -> CmdResult {
    let Some(n) = threads else { return Ok(()) };
    if n == 0 {
        return Err(usage("--threads must be at least 1"));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Data(e.into()))?;
    Ok(())
}

fn run(cli: Cli) -> CmdResult {
    configure_threads(cli.threads)?;
    match cli.command {
        Command::Ctds(a) => ctds::run(a),
        Command::Pose(a) => pose::run(a),
        Command::Clsmetrics(a) => cls::run(a),
        Command::Synth(SynthCommand::Ctds(a)) => synth::run_ctds(a),
        Command::Synth(SynthCommand::Rig(a)) => synth::run_rig(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
