use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use heatdispatch_core::config::{load_config, validate_scenario, RunObjective, ScenarioConfig};
use heatdispatch_core::error::{Error, Result};
use heatdispatch_core::formulation::Unit;
use heatdispatch_core::report::{prepare_scenario, run_scenario, write_demand, RunReport};

#[derive(Parser)]
#[command(name = "heatdispatch", version, about = "District-heating dispatch optimisation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a scenario and write its report directory.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        objective: Option<ObjectiveArg>,
        /// Number of Pareto points.
        #[arg(long)]
        points: Option<usize>,
        /// Hours per timestep.
        #[arg(long)]
        step: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replace an existing output directory.
        #[arg(long)]
        overwrite: bool,
    },
    /// Check a scenario file and its inputs without solving.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write the demand profiles of a scenario.
    Demand {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Cost,
    Emissions,
    Pareto,
}

impl From<ObjectiveArg> for RunObjective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::Cost => RunObjective::Cost,
            ObjectiveArg::Emissions => RunObjective::Emissions,
            ObjectiveArg::Pareto => RunObjective::Pareto,
        }
    }
}

fn revalidate(config: &ScenarioConfig) -> Result<()> {
    let v = validate_scenario(config);
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::Config(v.join("; ")))
    }
}

fn print_summary(report: &RunReport, out: &std::path::Path) {
    let sol = &report.solution;
    let t = &sol.totals;
    let config = &report.prepared.config;
    println!("scenario {} ({})", config.scenario.id, config.scenario.name);
    for u in Unit::ALL {
        println!(
            "  {:<9} heat {:>9.2} GWh  electricity {:>9.2} GWh",
            u.plant(),
            t.heat_delivered(u) / 1e3,
            t.electricity(u) / 1e3
        );
    }
    println!("  curtailed {:.2} GWh", t.heat_curtailed / 1e3);
    println!("  cost {:.0} CHF", sol.cost);
    println!(
        "  emissions {:.1} t (network) + {:.1} t (background) = {:.1} t",
        sol.emissions,
        report.background.emissions,
        report.total_emissions()
    );
    if let Some(front) = &report.front {
        println!("  pareto front with {} points", front.points.len());
    }
    println!("  written to {}", out.display());
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            objective,
            points,
            step,
            out,
            overwrite,
        } => {
            let mut c = load_config(&config)?;
            if let Some(o) = objective {
                c.run.objective = o.into();
            }
            if let Some(n) = points {
                c.run.n_pareto_points = n;
            }
            if let Some(s) = step {
                c.run.step_hours = s;
            }
            revalidate(&c)?;
            let out = out.unwrap_or_else(|| c.run.output_dir.clone());
            let report = run_scenario(&c, &out, overwrite)?;
            print_summary(&report, &out);
        }
        Command::Validate { config } => {
            let c = load_config(&config)?;
            let prepared = prepare_scenario(&c)?;
            println!(
                "{}: valid, {} steps of {} h",
                config.display(),
                prepared.problem.horizon(),
                prepared.problem.step
            );
        }
        Command::Demand { config, out } => {
            let c = load_config(&config)?;
            let prepared = prepare_scenario(&c)?;
            write_demand(&prepared, &out)?;
            println!("demand profiles written to {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
