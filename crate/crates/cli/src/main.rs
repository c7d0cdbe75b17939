#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod report;

#[derive(Parser, Debug)]
#[command(
    name = "chronoflip",
    version,
    about = "Quantum operations with indefinite time direction"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Print the full report as JSON on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    /// Seed for every random draw.
    #[arg(long, global = true, env = "CHRONOFLIP_SEED", default_value_t = 42)]
    pub seed: u64,
    /// Number of random trials, where a command samples.
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Numeric tolerance for predicates and checks.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// Print extra progress information on stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Report CPTP, bistochastic and span predicates of a channel.
    Check {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Apply the transpose or adjoint input-output inversion.
    Invert {
        #[arg(long, default_value = "transpose")]
        kind: String,
        #[arg(long = "in")]
        input: PathBuf,
        /// Write the inverted channel here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply the quantum time flip to a bistochastic channel.
    Flip {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply one of the bipartite supermaps s1, s2 (switch) or s3.
    Supermap {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate the teleportation circuit that realizes the time flip.
    Teleport {
        /// Gate as a JSON matrix; a Haar-random gate of dimension --d otherwise.
        #[arg(long)]
        u: Option<PathBuf>,
        /// Target state as a JSON list of [re, im]; Haar-random otherwise.
        #[arg(long)]
        psi: Option<PathBuf>,
        /// Control amplitude on |0⟩, as `re` or `re,im`.
        #[arg(long, default_value = "0.7071067811865476", allow_hyphen_values = true)]
        alpha: String,
        /// Control amplitude on |1⟩, as `re` or `re,im`.
        #[arg(long, default_value = "0.7071067811865476", allow_hyphen_values = true)]
        beta: String,
        #[arg(long, default_value_t = 2)]
        d: usize,
    },
    /// Play the discrimination game on one pair or on the built-in sets.
    Game {
        #[arg(long, required_unless_present = "builtin", requires = "v")]
        u: Option<PathBuf>,
        #[arg(long, requires = "u")]
        v: Option<PathBuf>,
        #[arg(long, conflicts_with_all = ["u", "v"])]
        builtin: bool,
    },
    /// Lower bound on the error of definite-time-direction strategies.
    Bound {
        #[command(subcommand)]
        action: BoundAction,
    },
    /// Numerical checks of the Haar-measure and supermap identities.
    Verify {
        #[command(subcommand)]
        check: VerifyCheck,
    },
    /// Run every acceptance criterion and print a pass/fail table.
    ReproduceAll {
        /// Run only these criteria (1-12).
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
        /// Multiply every pinned tolerance by this factor.
        #[arg(long, default_value_t = 1.0)]
        tolerance_scale: f64,
        /// Also write the JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum BoundAction {
    /// Solve the minimax tester SDP.
    Solve {
        /// Relative duality gap at which the solver stops.
        #[arg(long, default_value_t = 1e-5)]
        eps: f64,
        /// Feasibility tolerance.
        #[arg(long, default_value_t = 1e-7)]
        feas: f64,
        #[arg(long, default_value_t = 200_000)]
        max_iter: usize,
        /// Also write the JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum VerifyCheck {
    /// Frame operator against its closed form.
    Frame {
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// `design` (d = 2 only) or `weingarten`.
        #[arg(long)]
        method: Option<String>,
    },
    /// The operator inequalities used in the bound for d = 2 and 3.
    AppendixD {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Normalization of the time-flip supermap.
    SupermapNorm {
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// Exchange the input and output of the inner channel first.
        #[arg(long)]
        exchange: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match commands::run(&cli) {
        Ok(out) => {
            if cli.global.json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&out.report).expect("report serializes")
                );
            } else {
                print!("{}", out.text);
            }
            ExitCode::from(if out.ok { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn seed_defaults_to_42() {
        let cli = Cli::try_parse_from(["chronoflip", "verify", "frame"]).unwrap();
        assert_eq!(cli.global.seed, 42);
        assert!(!cli.global.json);
    }

    #[test]
    fn game_needs_both_gates_or_builtin() {
        assert!(Cli::try_parse_from(["chronoflip", "game"]).is_err());
        assert!(Cli::try_parse_from(["chronoflip", "game", "--u", "a.json"]).is_err());
        assert!(Cli::try_parse_from(["chronoflip", "game", "--builtin", "--u", "a.json"]).is_err());
        assert!(Cli::try_parse_from(["chronoflip", "game", "--builtin"]).is_ok());
    }
}
