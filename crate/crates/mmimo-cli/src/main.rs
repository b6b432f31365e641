//! Command-line front end: experiments to CSV, scalar bound/power/tradeoff
//! queries, and the geometric intercell estimate.

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use mmimo_cli::experiments::{
    bounds_params, default_params, parse_csi, parse_detector, required_power_params,
    run_bounds, run_experiment, run_required_power, run_tradeoff, tradeoff_params,
    ExperimentSpec, EXPERIMENTS,
};
use mmimo_cli::params::Params;

#[derive(Parser)]
#[command(
    name = "mmimo-cli",
    version,
    about = "Uplink capacity bounds, power-scaling sweeps, and efficiency tradeoffs for very large multiuser MIMO"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Base RNG seed; every stochastic result is reproducible for a fixed
    /// seed regardless of thread count
    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Override the Monte-Carlo trial or sample count
    #[arg(long)]
    trials: Option<usize>,

    /// Output CSV path; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,

    /// Parameter override as key=value; repeatable, wins over --config
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Flat key = value config file merged over the defaults
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Common {
    fn resolve(&self, mut params: Params) -> Result<Params> {
        if let Some(path) = &self.config {
            params.apply_config(path)?;
        }
        params.apply_overrides(&self.set)?;
        Ok(params)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a registered experiment and emit its CSV dataset
    Run {
        /// One of: fig1..fig8, table1, beta-intercell, reference-mode
        experiment: String,
        #[command(flatten)]
        common: Common,
    },
    /// Closed-form per-user rate bounds for one detector and CSI mode
    Bounds {
        /// mrc, zf, or mmse
        detector: String,
        /// perfect or imperfect
        csi: String,
        #[command(flatten)]
        common: Common,
    },
    /// Transmit power required for a per-user rate target, by bound inversion
    RequiredPower {
        #[command(flatten)]
        common: Common,
    },
    /// Jointly optimized energy/spectral-efficiency operating point
    Tradeoff {
        #[command(flatten)]
        common: Common,
    },
    /// Geometric estimate of the intercell interference factor
    BetaIntercell {
        #[command(flatten)]
        common: Common,
    },
    /// Single-antenna single-user baseline with optimized pilot length
    ReferenceMode {
        #[command(flatten)]
        common: Common,
    },
}

fn run_named_experiment(name: &str, common: &Common) -> Result<()> {
    let params = common.resolve(default_params(name)?)?;
    run_experiment(&ExperimentSpec {
        name: name.to_string(),
        params,
        seed: common.seed,
        trials: common.trials,
        out: common.out.clone(),
    })
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run { experiment, common } => {
            if !EXPERIMENTS.contains(&experiment.as_str()) {
                anyhow::bail!(
                    "unknown experiment '{experiment}' (known: {})",
                    EXPERIMENTS.join(", ")
                );
            }
            run_named_experiment(experiment, common)
        }
        Command::Bounds { detector, csi, common } => {
            let kind = parse_detector(detector)?;
            let mode = parse_csi(csi)?;
            let params = common.resolve(bounds_params())?;
            run_bounds(kind, mode, &params, &common.out)
        }
        Command::RequiredPower { common } => {
            let params = common.resolve(required_power_params())?;
            run_required_power(&params, &common.out)
        }
        Command::Tradeoff { common } => {
            let params = common.resolve(tradeoff_params())?;
            run_tradeoff(&params, &common.out)
        }
        Command::BetaIntercell { common } => run_named_experiment("beta-intercell", common),
        Command::ReferenceMode { common } => run_named_experiment("reference-mode", common),
    }
}

fn main() {
    if let Err(err) = run() {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
