use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use entropy_cli::report::Report;
use entropy_cli::run::{run, trial_line, RunOptions};
use entropy_cli::scenario::{parse_float, parse_scenario, MonomialSpec, Scenario, TaskOp, TaskSpec};
use etale_entropy::etale::{replay_trial, EvalConfig, GeneratorParams};
use etale_entropy::symbolic::SymbolicCaps;

/// Entropy of non-compact systems through compactified étale covers.
#[derive(Parser)]
#[command(name = "entropy", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the tasks of a scenario file in file order.
    Compute {
        #[arg(long)]
        scenario: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Seeded checks of the basic properties on random shifts.
    Suite {
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Seeded search for shifts beating a compactified cover; prints one
    /// replayable line per trial.
    Conjecture1 {
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        /// Rebuild a single trial of the run and print its line.
        #[arg(long)]
        replay: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Dynamical degrees of the monomial map with the given integer matrix.
    Degrees {
        /// Rows separated by `/`, e.g. "2 0 / 0 3".
        #[arg(long)]
        matrix: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct Common {
    /// Master seed for sampled checks and seeded suites.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    report: Format,
    /// Bowen horizon for metric systems that do not set one.
    #[arg(long, default_value_t = 14)]
    horizon: u32,
    /// Bowen scale for metric systems that do not set one; accepts `2^-10`.
    #[arg(long, default_value = "2^-10", value_parser = parse_float)]
    epsilon: f64,
    /// Grid spacing 2^-GRID for metric systems that do not set one.
    #[arg(long, default_value_t = 16)]
    grid: u32,
    /// Sample points for sampled cover and embedding checks.
    #[arg(long, default_value_t = 10_000)]
    sample_budget: usize,
    /// Fiber sizes above this count as infinite.
    #[arg(long, default_value_t = 64)]
    fiber_bound: u64,
    /// Most symbol subsets enumerated for internal entropy.
    #[arg(long, default_value_t = 4096)]
    max_subsets: usize,
    /// Largest state count of a constructed shift or word list.
    #[arg(long, default_value_t = 4096)]
    max_states: usize,
    /// Largest alphabet of a constructed shift.
    #[arg(long, default_value_t = 64)]
    max_alphabet: usize,
    /// Smallest state count of generated shifts.
    #[arg(long, default_value_t = 2)]
    gen_min_states: usize,
    /// Largest state count of generated shifts.
    #[arg(long, default_value_t = 5)]
    gen_max_states: usize,
    /// Largest group order of generated extensions.
    #[arg(long, default_value_t = 3)]
    gen_max_order: u64,
    /// Worker threads for scenario tasks.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

impl Common {
    fn options(&self) -> RunOptions {
        let mut cfg = EvalConfig::default();
        cfg.bowen.horizon = self.horizon;
        cfg.bowen.eps = self.epsilon;
        cfg.bowen.grid_bits = self.grid;
        cfg.sample_budget = self.sample_budget;
        cfg.fiber_bound = self.fiber_bound;
        cfg.max_subsets = self.max_subsets;
        cfg.caps = SymbolicCaps { max_states: self.max_states, max_alphabet: self.max_alphabet, ..SymbolicCaps::default() };
        let params = GeneratorParams {
            min_states: self.gen_min_states,
            max_states: self.gen_max_states,
            max_order: self.gen_max_order,
            ..GeneratorParams::default()
        };
        RunOptions { cfg, seed: self.seed, params, jobs: self.jobs }
    }

    fn emit(&self, report: &Report) -> ExitCode {
        match self.report {
            Format::Text => print!("{report}"),
            Format::Json => print!("{}", report.to_json()),
        }
        if report.passed() {
            ExitCode::SUCCESS
        } else {
            ExitCode::from(1)
        }
    }
}

fn single(id: &str, op: TaskOp) -> Scenario {
    Scenario { tasks: vec![TaskSpec { id: id.to_string(), op }], ..Scenario::default() }
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Compute { scenario, common } => {
            let text = match std::fs::read_to_string(&scenario) {
                Ok(t) => t,
                Err(e) => return fail(format!("{}: {e}", scenario.display())),
            };
            match parse_scenario(&text) {
                Ok(sc) => common.emit(&run(&sc, &common.options())),
                Err(e) => fail(format!("{}: {e}", scenario.display())),
            }
        }
        Command::Suite { trials, common } => {
            if trials == 0 {
                return fail("--trials must be positive");
            }
            common.emit(&run(&single("suite", TaskOp::Suite { trials }), &common.options()))
        }
        Command::Conjecture1 { trials, replay, common } => {
            let opts = common.options();
            if let Some(t) = replay {
                return match replay_trial(&opts.params, opts.seed, t, &opts.config()) {
                    Ok(rec) => {
                        println!("{}", trial_line(&rec));
                        if rec.violation {
                            ExitCode::from(1)
                        } else {
                            ExitCode::SUCCESS
                        }
                    }
                    Err(e) => fail(e),
                };
            }
            if trials == 0 {
                return fail("--trials must be positive");
            }
            common.emit(&run(&single("conjecture1", TaskOp::Conjecture1 { trials }), &opts))
        }
        Command::Degrees { matrix, common } => {
            let matrix = match matrix.parse() {
                Ok(m) => m,
                Err(e) => return fail(format!("malformed matrix: {e}")),
            };
            let mut sc = single("degrees", TaskOp::Degrees { monomial: "m".into() });
            sc.monomials.push(MonomialSpec { id: "m".into(), matrix });
            common.emit(&run(&sc, &common.options()))
        }
    }
}
