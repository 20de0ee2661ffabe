// Copyright 2026 the pottsmeta authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Command-line entry point. Logs go to stderr, data to files or stdout;
//! exit codes: 0 ok, 2 config error, 3 numeric/domain error, 4 size guard.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pottsmeta::cli::{self, CommandKind, ExperimentConfig, SizeSpec};

#[derive(Debug, Parser)]
#[command(
    name = "pottsmeta",
    about = "Metastability experiments for the mean-field q-colour model",
    version
)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand; values given here override the
/// config file.
#[derive(Debug, clap::Args)]
struct Common {
    /// Experiment config file (JSON); flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of colours
    #[arg(long)]
    q: Option<usize>,
    /// Inverse temperature
    #[arg(long)]
    beta: Option<f64>,
    /// System size, either a number or an inclusive grid start:stop:step
    #[arg(long = "N", visible_alias = "n")]
    n: Option<String>,
    /// Coupling law: one | ber:p | pois:p | gauss:v
    #[arg(long)]
    dist: Option<String>,
    /// Base seed for every random stream
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo sample count
    #[arg(long)]
    samples: Option<usize>,
    /// Number of coupling realisations
    #[arg(long)]
    realizations: Option<usize>,
    /// Transition to study: metastable | tunnelling
    #[arg(long)]
    transition: Option<String>,
    /// Functional for tail reports: log_z_capacity | log_harmonic_sum |
    /// log_hitting_time
    #[arg(long)]
    functional: Option<String>,
    /// Step budget per simulated sample
    #[arg(long)]
    step_cap: Option<u64>,
    /// Slack added to asymptotic windows
    #[arg(long)]
    slack: Option<f64>,
    /// Half-width of the localization window
    #[arg(long)]
    localization_delta: Option<f64>,
    /// Output stem; writes <out>.json and, when tabular, <out>.csv
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also export the chain as an edge list to this path
    #[arg(long)]
    export_edges: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Critical points, temperatures and the regime table at (q, beta)
    Landscape(Common),
    /// Capacity and hitting-time record on the order-parameter chain
    LumpedCap(Common),
    /// Exact potential-theory solve on the full spin chain
    MicroExact(Common),
    /// Seeded Monte Carlo hitting times on the spin chain
    MicroSim(Common),
    /// Annealed identity and uniform-gap checks for a coupling law
    DisorderCheck(Common),
    /// Quenched ensemble with empirical tail/bound comparison
    Concentration(Common),
    /// Metastability certificate over an N grid
    RatioExperiment(Common),
    /// Hitting-time scaling table with barrier extrapolation
    Scaling(Common),
}

impl Command {
    fn kind(&self) -> CommandKind {
        match self {
            Command::Landscape(_) => CommandKind::Landscape,
            Command::LumpedCap(_) => CommandKind::LumpedCap,
            Command::MicroExact(_) => CommandKind::MicroExact,
            Command::MicroSim(_) => CommandKind::MicroSim,
            Command::DisorderCheck(_) => CommandKind::DisorderCheck,
            Command::Concentration(_) => CommandKind::Concentration,
            Command::RatioExperiment(_) => CommandKind::RatioExperiment,
            Command::Scaling(_) => CommandKind::Scaling,
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Landscape(c)
            | Command::LumpedCap(c)
            | Command::MicroExact(c)
            | Command::MicroSim(c)
            | Command::DisorderCheck(c)
            | Command::Concentration(c)
            | Command::RatioExperiment(c)
            | Command::Scaling(c) => c,
        }
    }
}

fn parse_n(text: &str) -> SizeSpec {
    match text.parse::<u64>() {
        Ok(v) => SizeSpec::Single(v),
        Err(_) => SizeSpec::Grid(text.to_string()),
    }
}

fn resolve(command: &Command) -> Result<ExperimentConfig, pottsmeta::Error> {
    let common = command.common();
    let mut cfg = match &common.config {
        Some(path) => {
            let file_cfg = ExperimentConfig::from_file(path)?;
            if file_cfg.command != command.kind() {
                return Err(pottsmeta::Error::Config(format!(
                    "config file is for {:?}, command line says {:?}",
                    file_cfg.command,
                    command.kind()
                )));
            }
            file_cfg
        }
        None => ExperimentConfig {
            command: command.kind(),
            q: None,
            beta: None,
            n: None,
            dist: None,
            seed: None,
            samples: None,
            realizations: None,
            t_grid: None,
            slack: None,
            localization_delta: None,
            transition: None,
            functional: None,
            step_cap: None,
            out: None,
            export_edges: None,
        },
    };
    // flags win over file values
    if common.q.is_some() {
        cfg.q = common.q;
    }
    if common.beta.is_some() {
        cfg.beta = common.beta;
    }
    if let Some(n) = &common.n {
        cfg.n = Some(parse_n(n));
    }
    if common.dist.is_some() {
        cfg.dist = common.dist.clone();
    }
    if common.seed.is_some() {
        cfg.seed = common.seed;
    }
    if common.samples.is_some() {
        cfg.samples = common.samples;
    }
    if common.realizations.is_some() {
        cfg.realizations = common.realizations;
    }
    if common.transition.is_some() {
        cfg.transition = common.transition.clone();
    }
    if common.functional.is_some() {
        cfg.functional = common.functional.clone();
    }
    if common.step_cap.is_some() {
        cfg.step_cap = common.step_cap;
    }
    if common.slack.is_some() {
        cfg.slack = common.slack;
    }
    if common.localization_delta.is_some() {
        cfg.localization_delta = common.localization_delta;
    }
    if common.out.is_some() {
        cfg.out = common.out.clone();
    }
    if common.export_edges.is_some() {
        cfg.export_edges = common.export_edges.clone();
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let config = match resolve(&args.command) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match cli::run(&config) {
        Ok(artifacts) => {
            if let Some(text) = &artifacts.text {
                println!("{text}");
            }
            match &config.out {
                None => match serde_json::to_string_pretty(&artifacts.json) {
                    Ok(s) => println!("{s}"),
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(3);
                    }
                },
                Some(out) => eprintln!("wrote {}", out.display()),
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            // structured error report on stderr
            let doc = serde_json::json!({
                "error": e.to_string(),
                "exit_code": e.exit_code(),
            });
            eprintln!("{doc}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
