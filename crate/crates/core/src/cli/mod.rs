//! Scenario registry, experiment runner and the command-line interface.
//!
//! Artifacts go to `--out`, else `$BLACKWELL_OUT`, else `./blackwell-out`.
//! CSV headers:
//!
//! - `approach_<scenario>.csv`: `t, phi_0..phi_{d-1}, dist, tau_t, example_found, slack`
//! - `avoid_<scenario>.csv`: `t, phi_0..phi_{d-1}, dist, rind, drive_start`
//! - `peel_<scenario>_hausdorff.csv`: `stage, hausdorff`
//! - `stochastic_<scenario>.csv`: `run, t, emp_0.., exp_0.., emp_dev`
//!
//! Exit codes: 0 on success, 2 when a check fails, 1 on errors.

pub mod output;
pub mod run;
pub mod scenario;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use output::{Output, OUT_ENV};
pub use run::RunReport;
pub use scenario::{builtin, load_scenario, parse_scenario, Scenario, BUILTINS};

use crate::error::Result;
use crate::forcing::Player;
use crate::play::Order;
use crate::stochastic::hoeffding_horizon;

#[derive(Debug, Parser)]
#[command(
    name = "blackwell",
    version,
    about = "Approachability experiments for vector-payoff repeated games"
)]
pub struct Cli {
    /// Artifact directory (overrides $BLACKWELL_OUT).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Repeated play of the approach or avoidance strategy.
    Simulate {
        #[command(subcommand)]
        kind: SimulateKind,
    },
    /// Onion decomposition of a scenario target.
    Peel(PeelCmd),
    /// Approachable, avoidable or undecided.
    Classify(PeelCmd),
    /// Forcing queries.
    Force {
        #[command(subcommand)]
        kind: ForceKind,
    },
    /// Linear programs.
    Lp {
        #[command(subcommand)]
        kind: LpKind,
    },
    /// Scalar matrix games.
    Game {
        #[command(subcommand)]
        kind: GameKind,
    },
    /// Sampled play and the Hoeffding horizon.
    Stochastic {
        #[command(subcommand)]
        kind: StochasticKind,
    },
    /// Built-in scenarios.
    Scenario {
        #[command(subcommand)]
        kind: ScenarioKind,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum OrderArg {
    XFirst,
    YFirst,
}

impl From<OrderArg> for Order {
    fn from(o: OrderArg) -> Self {
        match o {
            OrderArg::XFirst => Order::XFirst,
            OrderArg::YFirst => Order::YFirst,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum PlayerArg {
    X,
    Y,
}

#[derive(Debug, Args)]
pub struct SimCommon {
    /// Built-in name or scenario file.
    #[arg(long)]
    pub scenario: String,
    /// Named target (defaults to the scenario binding).
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long, default_value_t = 1000)]
    pub rounds: usize,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = OrderArg::XFirst)]
    pub order: OrderArg,
}

#[derive(Debug, Subcommand)]
pub enum SimulateKind {
    Approach {
        #[command(flatten)]
        common: SimCommon,
        /// random | bestresponse | hstar | script:FILE
        #[arg(long)]
        adversary: Option<String>,
    },
    Avoid {
        #[command(flatten)]
        common: SimCommon,
        /// random | bestresponse | gstar | script:FILE
        #[arg(long)]
        approacher: Option<String>,
    },
}

#[derive(Debug, Args)]
pub struct PeelCmd {
    #[arg(long)]
    pub scenario: String,
    #[arg(long)]
    pub target: Option<String>,
    /// Stage budget.
    #[arg(long)]
    pub stages: Option<usize>,
    /// Direction grid size.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Cloud resolution for sampled targets.
    #[arg(long)]
    pub h: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum ForceKind {
    Check {
        #[arg(long)]
        scenario: Option<String>,
        /// Game descriptor file.
        #[arg(long)]
        game: Option<PathBuf>,
        /// `λ_1,…,λ_d,c` for `{z : ⟨λ,z⟩ ≤ c}`.
        #[arg(long, allow_hyphen_values = true)]
        halfspace: Option<String>,
        /// Target name from the scenario, or a target descriptor in JSON.
        #[arg(long)]
        set: Option<String>,
        #[arg(long, default_value_t = 1)]
        order: u8,
        #[arg(long, value_enum, default_value_t = PlayerArg::X)]
        player: PlayerArg,
    },
}

#[derive(Debug, Subcommand)]
pub enum LpKind {
    Solve { file: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum GameKind {
    Value {
        /// JSON matrix; the row player minimizes.
        file: Option<PathBuf>,
        #[arg(long)]
        scenario: Option<String>,
        /// Scalarization direction for the scenario game.
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
pub enum StochasticKind {
    Run {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        target: Option<String>,
        #[arg(long, default_value_t = 900)]
        rounds: usize,
        /// Half-open seed range `a..b`.
        #[arg(long, default_value = "0..200")]
        seeds: String,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long)]
        adversary: Option<String>,
    },
    Horizon {
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = 2)]
        d: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum ScenarioKind {
    List,
    Show { name: String },
}

/// What a command produced: a report with artifacts, or plain text for stdout.
#[derive(Debug)]
pub enum Outcome {
    Report(RunReport),
    Text(String),
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::Report(r) if !r.pass => 2,
            _ => 0,
        }
    }
}

fn sim_args(c: SimCommon, opponent: Option<String>) -> run::SimulateArgs {
    run::SimulateArgs {
        scenario: c.scenario,
        target: c.target,
        rounds: c.rounds,
        epsilon: c.epsilon,
        opponent,
        seed: c.seed,
        order: c.order.into(),
    }
}

fn peel_args(p: PeelCmd) -> run::PeelArgs {
    run::PeelArgs {
        scenario: p.scenario,
        target: p.target,
        stages: p.stages,
        grid: p.grid,
        h: p.h,
    }
}

pub fn execute(cli: Cli) -> Result<Outcome> {
    let out = Output::resolve(cli.out.as_deref());
    let report = match cli.command {
        Command::Simulate {
            kind: SimulateKind::Approach { common, adversary },
        } => run::simulate_approach(&out, &sim_args(common, adversary))?,
        Command::Simulate {
            kind: SimulateKind::Avoid { common, approacher },
        } => run::simulate_avoid(&out, &sim_args(common, approacher))?,
        Command::Peel(p) => run::run_peel(&out, &peel_args(p))?,
        Command::Classify(p) => run::run_classify(&out, &peel_args(p))?,
        Command::Force {
            kind:
                ForceKind::Check {
                    scenario,
                    game,
                    halfspace,
                    set,
                    order,
                    player,
                },
        } => {
            let player = match player {
                PlayerArg::X => Player::X,
                PlayerArg::Y => Player::Y,
            };
            run::force_check(
                &out,
                &run::ForceArgs {
                    scenario,
                    game,
                    halfspace,
                    set,
                    order,
                    player,
                },
            )?
        }
        Command::Lp {
            kind: LpKind::Solve { file },
        } => run::lp_solve(&out, &file)?,
        Command::Game {
            kind:
                GameKind::Value {
                    file,
                    scenario,
                    lambda,
                },
        } => run::game_value(
            &out,
            &run::GameValueArgs {
                matrix: file,
                scenario,
                lambda,
            },
        )?,
        Command::Stochastic {
            kind:
                StochasticKind::Run {
                    scenario,
                    target,
                    rounds,
                    seeds,
                    epsilon,
                    adversary,
                },
        } => {
            let seeds = run::parse_seed_range(&seeds)?;
            run::stochastic_run(
                &out,
                &run::StochasticArgs {
                    scenario,
                    target,
                    rounds,
                    seeds,
                    epsilon,
                    adversary,
                },
            )?
        }
        Command::Stochastic {
            kind: StochasticKind::Horizon { epsilon, gamma, d },
        } => {
            return Ok(Outcome::Text(
                hoeffding_horizon(epsilon, gamma, d)?.to_string(),
            ));
        }
        Command::Scenario {
            kind: ScenarioKind::List,
        } => return Ok(Outcome::Text(BUILTINS.join("\n"))),
        Command::Scenario {
            kind: ScenarioKind::Show { name },
        } => {
            let (sc, _) = load_scenario(&name)?;
            return Ok(Outcome::Text(sc.to_json()));
        }
    };
    Ok(Outcome::Report(report))
}

/// Parses `args`, runs the command, prints the result and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(outcome) => {
            match &outcome {
                Outcome::Text(t) => println!("{t}"),
                Outcome::Report(r) => println!(
                    "{}",
                    serde_json::to_string_pretty(r).expect("report serializes")
                ),
            }
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
