//! `navlearn`: generate worlds, record oracle demonstrations, train reward
//! models, plan, run trials and serve a workspace.
//!
//! Failures print `error: <code>: <message>` on stderr and exit with status 1.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use navlearn_core::environment::Environment;
use navlearn_core::eval::{format_table, summarize};
use navlearn_core::features::{FeatureSchema, SchemaPreset};
use navlearn_core::geometry::Point;
use navlearn_core::irl::{reward_map, train, BehaviorModel, Budget, DemoRecord, Init, TrainOptions};
use navlearn_core::planner::{plan_baseline_cells, plan_ioc_cells, BaselineParams, Provenance, Trajectory};
use navlearn_core::scenario::{generate_environment, oracle_record, run_trials, Behavior, ScenarioSpec, TrialOptions, TrialReport};
use navlearn_core::{worlds, Error};
use serde_json::json;

#[derive(Parser)]
#[command(name = "navlearn", version, about = "Learn traversal rewards from demonstrated paths")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum World {
    Road,
    Covert,
    Zod,
    ZodTraining,
}

#[derive(Subcommand)]
enum Command {
    /// Build an environment from a scenario spec or a built-in world.
    GenEnv {
        #[arg(long, required_unless_present = "world", conflicts_with = "world")]
        spec: Option<PathBuf>,
        #[arg(long, value_enum)]
        world: Option<World>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the scenario spec (useful with --world).
        #[arg(long)]
        spec_out: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Record an oracle demonstration between two world points (`x,y` in meters).
    Demo {
        #[arg(long)]
        env: PathBuf,
        #[arg(long)]
        oracle: Behavior,
        #[arg(long)]
        from: Coord,
        #[arg(long)]
        to: Coord,
        #[arg(long)]
        out: PathBuf,
        /// Defaults to the output file stem.
        #[arg(long)]
        id: Option<String>,
    },
    /// Fit reward weights to demonstrations.
    Train {
        #[arg(long, num_args = 1.., required = true)]
        demos: Vec<PathBuf>,
        /// Required for random starts; must match the model for warm starts.
        #[arg(long)]
        schema: Option<SchemaPreset>,
        /// `random` or `warm:<model file>`.
        #[arg(long, default_value = "random")]
        init: InitArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        budget_s: Option<f64>,
        #[arg(long, default_value_t = Budget::default().max_iterations)]
        max_iterations: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Plan a path with a learned model or the baseline planner.
    Plan {
        #[arg(long)]
        env: PathBuf,
        #[arg(long, required_unless_present = "baseline")]
        model: Option<PathBuf>,
        #[arg(long)]
        from: Coord,
        #[arg(long)]
        to: Coord,
        #[arg(long)]
        baseline: bool,
        /// Write the trajectory as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the trial protocol and write a report directory.
    Trial {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Summarize a report directory as a mean/median/best table.
    Eval {
        #[arg(long)]
        report: PathBuf,
    },
    /// Serve a workspace over HTTP.
    Serve {
        #[arg(long, env = navlearn_service::WORKSPACE_ENV)]
        workspace: PathBuf,
        #[arg(long, default_value_t = navlearn_service::DEFAULT_PORT)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
    },
}

#[derive(Clone, Copy, Debug)]
struct Coord(Point);

impl FromStr for Coord {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (x, y) = s.split_once(',').ok_or("expected `x,y`")?;
        let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
        Ok(Coord(Point::new(parse(x)?, parse(y)?)))
    }
}

#[derive(Clone, Debug)]
enum InitArg {
    Random,
    Warm(PathBuf),
}

impl FromStr for InitArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.split_once(':') {
            None if s == "random" => Ok(InitArg::Random),
            Some(("warm", m)) if !m.is_empty() => Ok(InitArg::Warm(m.into())),
            _ => Err("expected `random` or `warm:<model>`".into()),
        }
    }
}

/// A failure with a stable code for the error line.
struct Failure {
    code: &'static str,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: e.code(), message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

impl From<navlearn_service::ServiceError> for Failure {
    fn from(e: navlearn_service::ServiceError) -> Self {
        Failure { code: e.code(), message: e.to_string() }
    }
}

fn read_to_string(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure {
        code: "io",
        message: format!("{}: {e}", path.display()),
    })
}

fn load_env(path: &Path) -> Result<Environment, Failure> {
    Ok(Environment::from_json(&read_to_string(path)?)?)
}

fn load_model(path: &Path) -> Result<BehaviorModel, Failure> {
    Ok(BehaviorModel::from_json(&read_to_string(path)?)?)
}

fn print(v: serde_json::Value) {
    println!("{v}");
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::GenEnv { spec, world, seed, spec_out, out } => {
            let spec = match (spec, world) {
                (Some(p), _) => ScenarioSpec::from_json(&read_to_string(&p)?)?,
                (None, Some(World::Road)) => worlds::road_world(seed),
                (None, Some(World::Covert)) => worlds::covert_world(seed, Behavior::Covert),
                (None, Some(World::Zod)) => worlds::zod_world(seed),
                (None, Some(World::ZodTraining)) => worlds::zod_training_world(seed),
                (None, None) => unreachable!("clap requires --spec or --world"),
            };
            let env = generate_environment(&spec)?;
            env.save(&out)?;
            if let Some(p) = spec_out {
                spec.save(&p)?;
            }
            let g = env.geometry();
            print(json!({"environment": out, "width": g.width, "height": g.height, "resolution_m": g.resolution}));
        }
        Command::Demo { env, oracle, from, to, out, id } => {
            let env = load_env(&env)?;
            let g = env.geometry();
            let id = id.unwrap_or_else(|| out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default());
            let rec = oracle_record(&env, oracle, g.cell_of(from.0), g.cell_of(to.0), id)?;
            std::fs::write(&out, rec.to_json()?)?;
            print(json!({"demo": rec.id, "cells": rec.path.len()}));
        }
        Command::Train { demos, schema, init, seed, budget_s, max_iterations, out } => {
            let requested = schema.map(FeatureSchema::preset);
            let (schema, init) = match init {
                InitArg::Random => {
                    let schema = requested.ok_or_else(|| Failure {
                        code: "bad_request",
                        message: "a random start needs --schema".into(),
                    })?;
                    (schema, Init::Random { seed })
                }
                InitArg::Warm(p) => {
                    let m = load_model(&p)?;
                    if let Some(s) = requested.filter(|s| *s != m.schema) {
                        return Err(Error::SchemaMismatch(format!(
                            "warm model has {} features, --schema has {}",
                            m.schema.dim(),
                            s.dim()
                        ))
                        .into());
                    }
                    (m.schema, Init::Warm(m.theta))
                }
            };
            let demos = demos
                .iter()
                .map(|p| DemoRecord::from_json(&read_to_string(p)?)?.bind(&schema).map_err(Failure::from))
                .collect::<Result<Vec<_>, _>>()?;
            let budget = Budget {
                max_iterations,
                wall_clock: budget_s.map(std::time::Duration::from_secs_f64),
                ..Budget::default()
            };
            let model = train(&demos, &schema, init, budget, TrainOptions::default(), Default::default())?;
            model.save(&out)?;
            let m = &model.meta;
            print(json!({
                "model": out,
                "demo_ids": m.demo_ids,
                "iterations": m.iterations,
                "stop_reason": m.stop_reason,
                "log_likelihood": m.log_likelihood,
                "wall_clock_s": m.wall_clock_s,
            }));
        }
        Command::Plan { env, model, from, to, baseline, out } => {
            let env = load_env(&env)?;
            let g = *env.geometry();
            let (from, to) = (g.cell_of(from.0), g.cell_of(to.0));
            let (path, provenance) = if baseline {
                (plan_baseline_cells(&env.opacity(), from, to, &BaselineParams::default())?, Provenance::Baseline)
            } else {
                let m = load_model(model.as_deref().expect("clap requires --model"))?;
                (plan_ioc_cells(&reward_map(&m, &env.stack(&m.schema)?)?, from, to)?, Provenance::Ioc)
            };
            let traj = Trajectory::from_cells(&g, &path.cells, provenance)?;
            if let Some(p) = &out {
                traj.save_csv(p)?;
            }
            print(json!({"planner": provenance, "cells": path.cells.len(), "cost": path.cost, "length_m": traj.length()}));
        }
        Command::Trial { spec, model, out } => {
            let spec = ScenarioSpec::from_json(&read_to_string(&spec)?)?;
            let model = load_model(&model)?;
            let env = generate_environment(&spec)?;
            let report = run_trials(&spec, &env, &model, &TrialOptions::default())?;
            report.write_dir(&out)?;
            print!("{}", format_table(&summarize(&report.metrics)?));
        }
        Command::Eval { report } => {
            let rows = TrialReport::read_metrics(&report)?;
            print!("{}", format_table(&summarize(&rows)?));
        }
        Command::Serve { workspace, port, host } => {
            let addr = SocketAddr::new(host, port);
            let rt = tokio::runtime::Runtime::new()?;
            eprintln!("serving {} on http://{addr}", workspace.display());
            rt.block_on(navlearn_service::serve(workspace, addr))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let message = f.message.replace('\n', " ");
            eprintln!("error: {}: {message}", f.code);
            ExitCode::FAILURE
        }
    }
}
