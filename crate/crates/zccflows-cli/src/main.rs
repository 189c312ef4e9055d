//! Command-line harness for the zccflows experiments.
//!
//! Exit codes: 0 when the experiment passes, 1 when a verification fails or
//! an integration blows up, 2 on usage or config errors.

mod config;
mod output;
mod run;

use clap::{Parser, Subcommand};

#[derive(Debug)]
pub struct CliError {
    message: String,
    exit_code: i32,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            message: message.into(),
            exit_code: 2,
        }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        CliError {
            message: message.into(),
            exit_code: 1,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "zccflows",
    version,
    about = "Lax flows and zero-curvature experiments on matrix Lie algebras"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the word identity w(p)_+ = w(p_+)' over Lyndon trees at random
    /// points.
    VerifyTheorem(run::VerifyTheoremArgs),
    /// Flow a pair in both orders and measure the commutation defect.
    ZccCheck(run::ZccCheckArgs),
    /// Evaluate commutator-ideal words in the promoted fields, numerically
    /// and analytically.
    WordCriterion(run::WordCriterionArgs),
    /// Integrate the coupled (a, y) system and write the trajectory as CSV.
    Flow(run::FlowArgs),
    /// Reproduce the closed-form sl3 example end to end, writing per-quantity
    /// CSV comparisons.
    Sl3Demo(run::Sl3DemoArgs),
}

fn main() {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::VerifyTheorem(args) => run::verify_theorem(args),
        Command::ZccCheck(args) => run::zcc_check_cmd(args),
        Command::WordCriterion(args) => run::word_criterion_cmd(args),
        Command::Flow(args) => run::flow_cmd(args),
        Command::Sl3Demo(args) => run::sl3_demo(args),
    };
    let code = match outcome {
        Ok(true) => 0,
        Ok(false) => {
            eprintln!("verification failed");
            1
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.exit_code
        }
    };
    std::process::exit(code);
}
