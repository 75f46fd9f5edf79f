//! Scenario orchestration and report files.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, Timelike};
use serde::Serialize;

use crate::config::{BackgroundSection, RunObjective, ScenarioConfig};
use crate::demand::{
    apply_dhn_share, apply_network_losses, block_average, degree_weights, load_weather, synth_electricity,
    synth_heat, DemandConfig, DemandProfile, TemperatureSeries,
};
use crate::error::{Error, Result};
use crate::formulation::{
    balance_residuals, storage_closure, unsaturated_curtailment, validate_solution, DispatchProblem,
    DispatchSolution, Unit,
};
use crate::moo::{DispatchModel, Objective, ParetoFront, SweepOptions};

pub const FILES: [&str; 7] = [
    "dispatch_hourly.csv",
    "daily.csv",
    "annual_totals.csv",
    "pareto.csv",
    "background.csv",
    "report.json",
    "config.toml",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CityDemand {
    /// MWh per year.
    pub total: f64,
    pub space_heating: f64,
    pub dhw: f64,
}

/// City heat demand whose network share equals `target_dhn_annual`.
pub fn calibrate_city_demand(target_dhn_annual: f64, share: f64, space_heating_fraction: f64) -> Result<CityDemand> {
    if !(share > 0.0 && share <= 1.0) {
        return Err(Error::Domain(format!("DHN share {share} is outside (0, 1]")));
    }
    if !(target_dhn_annual > 0.0 && target_dhn_annual.is_finite()) {
        return Err(Error::Domain(format!("calibration target {target_dhn_annual} must be positive")));
    }
    if !(0.0..=1.0).contains(&space_heating_fraction) {
        return Err(Error::Domain(format!("space heating fraction {space_heating_fraction} is outside [0, 1]")));
    }
    let total = target_dhn_annual / share;
    Ok(CityDemand {
        total,
        space_heating: total * space_heating_fraction,
        dhw: total * (1.0 - space_heating_fraction),
    })
}

/// Demand, weather and plant of one scenario at its run resolution.
#[derive(Debug, Clone)]
pub struct PreparedScenario {
    pub config: ScenarioConfig,
    pub start: NaiveDateTime,
    pub demand: DemandConfig,
    /// Whole-city heat demand over the horizon at the run step.
    pub city_heat: DemandProfile,
    pub problem: DispatchProblem,
}

fn weather(config: &ScenarioConfig) -> Result<TemperatureSeries> {
    let w = &config.weather;
    let series = match &w.csv {
        Some(path) => {
            let file = File::open(path).map_err(|e| Error::io(path, e))?;
            load_weather(std::io::BufReader::new(file)).map_err(|e| e.context(&path.display().to_string()))?
        }
        None => w.synthetic.generate(w.start_time()?, w.hours, w.seed),
    };
    if series.step != 1 {
        return Err(Error::Data(format!("weather must be hourly, found a {} h step", series.step)));
    }
    Ok(series)
}

fn truncate(profile: DemandProfile, hours: usize) -> DemandProfile {
    DemandProfile {
        values: profile.values[..hours].to_vec(),
        ..profile
    }
}

pub fn prepare_scenario(config: &ScenarioConfig) -> Result<PreparedScenario> {
    let d = &config.demand;
    let city = match (&d.calibration, d.city_annual_heat) {
        (Some(c), _) => calibrate_city_demand(c.target_dhn_annual, c.share, d.space_heating_fraction)?,
        (None, Some(total)) => CityDemand {
            total,
            space_heating: total * d.space_heating_fraction,
            dhw: total * (1.0 - d.space_heating_fraction),
        },
        (None, None) => return Err(Error::Config("no city heat demand configured".into())),
    };
    let demand = DemandConfig {
        annual_space_heating: city.space_heating,
        annual_dhw: city.dhw,
        annual_electricity: d.annual_electricity,
        base_temperature: d.base_temperature,
        dhn_share: d.dhn_share,
        electricity_shape: d.electricity_shape.clone(),
        network_loss_factor: d.network_loss_factor,
    };
    let temps = weather(config)?;
    let hours = temps.values.len();
    let horizon = config.run.horizon_hours.unwrap_or(hours);
    if horizon > hours {
        return Err(Error::Config(format!("horizon of {horizon} h exceeds the {hours} h of weather")));
    }
    let step = config.run.step_hours as usize;
    if step == 0 || horizon % step != 0 {
        return Err(Error::Config(format!("a {horizon} h horizon cannot be split into {step} h steps")));
    }

    let city_heat = synth_heat(&demand, &degree_weights(&temps, demand.base_temperature), 1.0)?;
    let dhn = apply_network_losses(&apply_dhn_share(&city_heat, demand.dhn_share)?, demand.network_loss_factor)?;
    let first_day = temps.start.ordinal0() as f64 + temps.start.hour() as f64 / 24.0;
    let electricity = synth_electricity(&demand, hours, 1.0, first_day)?;

    let at_step = |p: DemandProfile| block_average(&truncate(p, horizon), step);
    let city_heat = at_step(city_heat)?;
    let problem = DispatchProblem {
        step: step as f64,
        wte: config.technology(Unit::Wte)?,
        gas_turbine: config.technology(Unit::GasTurbine)?,
        wood_boiler: config.technology(Unit::WoodBoiler)?,
        steam_turbine: config.steam_turbine(),
        storage: config.storage_spec(),
        storage_required: config.requires_storage(),
        heat_demand: at_step(dhn)?,
        electricity_demand: at_step(electricity)?,
        grid: config.grid(),
        fuel_caps_active: config.fuel_caps_active(),
        allow_steam_dump: config.run.allow_steam_dump,
    };
    Ok(PreparedScenario {
        config: config.clone(),
        start: temps.start,
        demand,
        city_heat,
        problem,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DailyRow {
    pub date: NaiveDate,
    /// MWh delivered by unit.
    pub heat: [f64; 3],
    pub storage_charge: f64,
    pub storage_discharge: f64,
    pub curtailment: f64,
    pub heat_demand: f64,
}

/// Sums the dispatch per calendar day.
pub fn aggregate_daily(solution: &DispatchSolution, heat_demand: &[f64], start: NaiveDateTime) -> Vec<DailyRow> {
    let dt = solution.step;
    let mut rows: Vec<DailyRow> = Vec::new();
    for (t, acc) in solution.accounts.iter().enumerate() {
        let date = (start + Duration::seconds((t as f64 * dt * 3600.0).round() as i64)).date();
        if rows.last().is_none_or(|r| r.date != date) {
            rows.push(DailyRow {
                date,
                heat: [0.0; 3],
                storage_charge: 0.0,
                storage_discharge: 0.0,
                curtailment: 0.0,
                heat_demand: 0.0,
            });
        }
        let row = rows.last_mut().expect("a row was just pushed");
        for k in 0..3 {
            row.heat[k] += acc.heat_delivered[k] * dt;
        }
        row.storage_charge += solution.flows.charge_at(t) * dt;
        row.storage_discharge += solution.flows.discharge_at(t) * dt;
        row.curtailment += solution.flows.heat_curtail[t] * dt;
        row.heat_demand += heat_demand[t] * dt;
    }
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeaterRow {
    pub heater: String,
    pub fraction: f64,
    /// MWh.
    pub heat: f64,
    /// MWh of fuel or electricity.
    pub input: f64,
    /// t CO₂-eq.
    pub emissions: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct BackgroundReport {
    pub rows: Vec<HeaterRow>,
    pub heat: f64,
    pub emissions: f64,
}

/// Heat outside the network split over decentralised heaters.
pub fn background_supply_report(mix: &BackgroundSection, share: f64, city_heat: &DemandProfile) -> BackgroundReport {
    let outside = (1.0 - share) * city_heat.values.iter().sum::<f64>() * city_heat.step;
    if outside <= 0.0 {
        return BackgroundReport::default();
    }
    let rows: Vec<HeaterRow> = mix
        .heaters()
        .iter()
        .map(|(name, h)| {
            let heat = outside * h.fraction;
            let input = heat / h.efficiency;
            HeaterRow {
                heater: name.to_string(),
                fraction: h.fraction,
                heat,
                input,
                emissions: input * h.intensity_t_per_mwh,
            }
        })
        .collect();
    BackgroundReport {
        heat: rows.iter().map(|r| r.heat).sum(),
        emissions: rows.iter().map(|r| r.emissions).sum(),
        rows,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Checks {
    pub violations: usize,
    pub max_heat_residual: f64,
    pub max_electricity_residual: f64,
    /// MWh; absent without storage.
    pub storage_closure: Option<f64>,
    /// Steps with curtailment while storage could still absorb heat.
    pub unsaturated_curtailment_steps: usize,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub prepared: PreparedScenario,
    pub objective: RunObjective,
    /// Dispatch in the tables; the emissions optimum for Pareto runs.
    pub solution: DispatchSolution,
    pub daily: Vec<DailyRow>,
    pub background: BackgroundReport,
    pub front: Option<ParetoFront>,
    pub checks: Checks,
}

impl RunReport {
    pub fn problem(&self) -> &DispatchProblem {
        &self.prepared.problem
    }

    pub fn total_emissions(&self) -> f64 {
        self.solution.emissions + self.background.emissions
    }
}

/// Solves a prepared scenario without touching the filesystem.
pub fn solve_scenario(prepared: PreparedScenario) -> Result<RunReport> {
    let config = &prepared.config;
    let ctx = format!("scenario {} ({})", config.scenario.id, config.scenario.name);
    let problem = &prepared.problem;
    let model = DispatchModel::new(problem).map_err(|e| e.context(&ctx))?;
    let objective = config.run.objective;
    let (solution, front) = match objective {
        RunObjective::Cost => (model.solve(Objective::Cost), None),
        RunObjective::Emissions => (model.solve(Objective::Emissions), None),
        RunObjective::Pareto => {
            let options = SweepOptions {
                warm_start: config.run.warm_start,
            };
            match model.pareto_front(config.run.n_pareto_points, &options) {
                Ok(f) => (Ok(f.emissions_optimal.clone()), Some(f)),
                Err(e) => (Err(e), None),
            }
        }
    };
    let solution = solution.map_err(|e| e.context(&ctx))?;
    let (heat_res, el_res) = balance_residuals(&solution, problem);
    let checks = Checks {
        violations: validate_solution(&solution, problem).len(),
        max_heat_residual: heat_res,
        max_electricity_residual: el_res,
        storage_closure: storage_closure(&solution, problem),
        unsaturated_curtailment_steps: unsaturated_curtailment(&solution, problem, 1e-6).len(),
    };
    let daily = aggregate_daily(&solution, &problem.heat_demand.values, prepared.start);
    let background = background_supply_report(&config.background, config.demand.dhn_share, &prepared.city_heat);
    drop(model);
    Ok(RunReport {
        prepared,
        objective,
        solution,
        daily,
        background,
        front,
        checks,
    })
}

pub fn compute_scenario(config: &ScenarioConfig) -> Result<RunReport> {
    let ctx = format!("scenario {} ({})", config.scenario.id, config.scenario.name);
    solve_scenario(prepare_scenario(config).map_err(|e| e.context(&ctx))?)
}

/// Computes the scenario and writes its output directory.
pub fn run_scenario(config: &ScenarioConfig, out_dir: &Path, overwrite: bool) -> Result<RunReport> {
    if out_dir.exists() && !overwrite {
        return Err(Error::Config(format!(
            "output directory {} exists; pass --overwrite to replace it",
            out_dir.display()
        )));
    }
    let report = compute_scenario(config)?;
    write_report(&report, out_dir, overwrite)?;
    Ok(report)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Data(format!("csv output: {e}"))
}

fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn s(v: f64) -> String {
    v.to_string()
}

fn gwh(mwh: f64) -> f64 {
    mwh / 1000.0
}

fn write_hourly(report: &RunReport, path: &Path) -> Result<()> {
    let sol = &report.solution;
    let problem = report.problem();
    let f = &sol.flows;
    let start = report.prepared.start;
    let has_storage = !f.soc.is_empty();
    let rows = sol.accounts.iter().enumerate().map(|(t, acc)| {
        let time = start + Duration::seconds((t as f64 * sol.step * 3600.0).round() as i64);
        vec![
            t.to_string(),
            time.format("%Y-%m-%dT%H:%M:%S").to_string(),
            s(problem.heat_demand.values[t]),
            s(problem.electricity_demand.values[t]),
            s(f.fuel[0][t]),
            s(f.fuel[1][t]),
            s(f.fuel[2][t]),
            s(acc.heat_delivered[0]),
            s(acc.heat_delivered[1]),
            s(acc.heat_delivered[2]),
            s(acc.electricity[0]),
            s(acc.electricity[1]),
            s(acc.electricity[2]),
            s(f.steam_dump[t]),
            s(f.heat_curtail[t]),
            s(f.charge_at(t)),
            s(f.discharge_at(t)),
            if has_storage { s(f.soc[t + 1]) } else { String::new() },
            s(f.grid_import[t]),
            s(f.grid_export[t]),
            s(acc.cost_rate * sol.step),
            s(acc.emission_rate * sol.step),
        ]
    });
    write_csv(
        path,
        &[
            "timestep",
            "start",
            "heat_demand_mw",
            "electricity_demand_mw",
            "fuel_wte_mw",
            "fuel_gt_mw",
            "fuel_wb_mw",
            "heat_wte_chp_mw",
            "heat_ccgt_mw",
            "heat_wood_chp_mw",
            "el_wte_chp_mw",
            "el_ccgt_mw",
            "el_wood_chp_mw",
            "steam_dump_mw",
            "heat_curtail_mw",
            "storage_charge_mw",
            "storage_discharge_mw",
            "soc_end_mwh",
            "grid_import_mw",
            "grid_export_mw",
            "cost_chf",
            "emissions_tco2",
        ],
        rows,
    )
}

fn write_daily(report: &RunReport, path: &Path) -> Result<()> {
    let rows = report.daily.iter().map(|r| {
        vec![
            r.date.format("%Y-%m-%d").to_string(),
            s(r.heat[0]),
            s(r.heat[1]),
            s(r.heat[2]),
            s(r.storage_charge),
            s(r.storage_discharge),
            s(r.curtailment),
            s(r.heat_demand),
        ]
    });
    write_csv(
        path,
        &[
            "date",
            "wte_chp_mwh",
            "ccgt_mwh",
            "wood_chp_mwh",
            "storage_charge_mwh",
            "storage_discharge_mwh",
            "curtailment_mwh",
            "heat_demand_mwh",
        ],
        rows,
    )
}

fn write_annual(report: &RunReport, path: &Path) -> Result<()> {
    let t = &report.solution.totals;
    let mut rows: Vec<Vec<String>> = Unit::ALL
        .iter()
        .map(|&u| {
            vec![
                u.plant().to_string(),
                s(gwh(t.heat_delivered(u))),
                s(gwh(t.electricity(u))),
                s(gwh(t.fuel(u))),
            ]
        })
        .collect();
    for (name, heat, el, fuel) in [
        ("storage_charge", t.storage_charged, 0.0, 0.0),
        ("storage_discharge", t.storage_discharged, 0.0, 0.0),
        ("curtailment", t.heat_curtailed, 0.0, 0.0),
        ("steam_dump", 0.0, 0.0, t.steam_dumped),
        ("grid_import", 0.0, t.grid_import, 0.0),
        ("grid_export", 0.0, t.grid_export, 0.0),
    ] {
        rows.push(vec![name.to_string(), s(gwh(heat)), s(gwh(el)), s(gwh(fuel))]);
    }
    write_csv(path, &["technology", "heat_gwh", "electricity_gwh", "fuel_gwh"], rows)
}

fn write_background(report: &RunReport, path: &Path) -> Result<()> {
    let rows = report.background.rows.iter().map(|r| {
        vec![
            r.heater.clone(),
            s(r.fraction),
            s(gwh(r.heat)),
            s(gwh(r.input)),
            s(r.emissions),
        ]
    });
    write_csv(path, &["heater", "fraction", "heat_gwh", "input_gwh", "emissions_tco2"], rows)
}

#[derive(Serialize)]
struct StorageSummary {
    charged_gwh: f64,
    discharged_gwh: f64,
    min_soc_mwh: f64,
    max_soc_mwh: f64,
    final_soc_mwh: f64,
}

#[derive(Serialize)]
struct FrontPoint {
    epsilon_tco2: f64,
    cost_chf: f64,
    emissions_tco2: f64,
    solution_id: usize,
}

#[derive(Serialize)]
struct Summary<'a> {
    scenario_id: u32,
    scenario_name: &'a str,
    objective: RunObjective,
    start: String,
    step_hours: f64,
    timesteps: usize,
    cost_chf: f64,
    emissions_dhn_tco2: f64,
    emissions_background_tco2: f64,
    emissions_total_tco2: f64,
    dhn_heat_demand_gwh: f64,
    electricity_demand_gwh: f64,
    heat_gwh: BTreeMap<&'static str, f64>,
    electricity_gwh: BTreeMap<&'static str, f64>,
    fuel_gwh: BTreeMap<&'static str, f64>,
    curtailment_gwh: f64,
    steam_dump_gwh: f64,
    grid_import_gwh: f64,
    grid_export_gwh: f64,
    storage: Option<StorageSummary>,
    background_heat_gwh: f64,
    checks: &'a Checks,
    pareto: Option<Vec<FrontPoint>>,
    files: [&'static str; 7],
}

fn summary(report: &RunReport) -> Summary<'_> {
    let sol = &report.solution;
    let t = &sol.totals;
    let config = &report.prepared.config;
    let per_unit = |f: &dyn Fn(Unit) -> f64| Unit::ALL.iter().map(|&u| (u.plant(), gwh(f(u)))).collect();
    let soc = &sol.flows.soc;
    Summary {
        scenario_id: config.scenario.id,
        scenario_name: &config.scenario.name,
        objective: report.objective,
        start: report.prepared.start.format("%Y-%m-%dT%H:%M:%S").to_string(),
        step_hours: sol.step,
        timesteps: sol.horizon(),
        cost_chf: sol.cost,
        emissions_dhn_tco2: sol.emissions,
        emissions_background_tco2: report.background.emissions,
        emissions_total_tco2: report.total_emissions(),
        dhn_heat_demand_gwh: gwh(t.heat_demand),
        electricity_demand_gwh: gwh(t.electricity_demand),
        heat_gwh: per_unit(&|u| t.heat_delivered(u)),
        electricity_gwh: per_unit(&|u| t.electricity(u)),
        fuel_gwh: per_unit(&|u| t.fuel(u)),
        curtailment_gwh: gwh(t.heat_curtailed),
        steam_dump_gwh: gwh(t.steam_dumped),
        grid_import_gwh: gwh(t.grid_import),
        grid_export_gwh: gwh(t.grid_export),
        storage: (!soc.is_empty()).then(|| StorageSummary {
            charged_gwh: gwh(t.storage_charged),
            discharged_gwh: gwh(t.storage_discharged),
            min_soc_mwh: soc.iter().copied().fold(f64::INFINITY, f64::min),
            max_soc_mwh: soc.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            final_soc_mwh: soc[soc.len() - 1],
        }),
        background_heat_gwh: gwh(report.background.heat),
        checks: &report.checks,
        pareto: report.front.as_ref().map(|f| {
            f.points
                .iter()
                .map(|p| FrontPoint {
                    epsilon_tco2: p.epsilon,
                    cost_chf: p.cost,
                    emissions_tco2: p.emissions,
                    solution_id: p.solution_id,
                })
                .collect()
        }),
        files: FILES,
    }
}

fn write_files(report: &RunReport, dir: &Path) -> Result<()> {
    write_hourly(report, &dir.join("dispatch_hourly.csv"))?;
    write_daily(report, &dir.join("daily.csv"))?;
    write_annual(report, &dir.join("annual_totals.csv"))?;
    let pareto = dir.join("pareto.csv");
    match &report.front {
        Some(f) => {
            let file = File::create(&pareto).map_err(|e| Error::io(&pareto, e))?;
            f.write_csv(BufWriter::new(file))?;
        }
        None => write_csv(
            &pareto,
            &["epsilon_tco2", "cost_chf", "emissions_tco2", "solution_id"],
            std::iter::empty::<Vec<String>>(),
        )?,
    }
    write_background(report, &dir.join("background.csv"))?;
    let json = serde_json::to_string_pretty(&summary(report))
        .map_err(|e| Error::Consistency(format!("report serialisation: {e}")))?;
    let path = dir.join("report.json");
    std::fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    let path = dir.join("config.toml");
    std::fs::write(&path, report.prepared.config.to_toml()?).map_err(|e| Error::io(&path, e))?;
    Ok(())
}

/// Writes every report file into a fresh directory next to `out_dir` and
/// moves it into place, so a failed run leaves nothing behind.
pub fn write_report(report: &RunReport, out_dir: &Path, overwrite: bool) -> Result<()> {
    if out_dir.exists() && !overwrite {
        return Err(Error::Config(format!(
            "output directory {} exists; pass --overwrite to replace it",
            out_dir.display()
        )));
    }
    let parent = match out_dir.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => std::path::PathBuf::from("."),
    };
    std::fs::create_dir_all(&parent).map_err(|e| Error::io(&parent, e))?;
    let staging = tempfile::Builder::new()
        .prefix(".heatdispatch-")
        .tempdir_in(&parent)
        .map_err(|e| Error::io(&parent, e))?;
    write_files(report, staging.path())?;
    if out_dir.exists() {
        std::fs::remove_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    }
    std::fs::rename(staging.path(), out_dir).map_err(|e| Error::io(out_dir, e))?;
    Ok(())
}

/// Writes the run-resolution demand profiles only.
pub fn write_demand(prepared: &PreparedScenario, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    for (name, profile) in [
        ("heat_demand.csv", &prepared.problem.heat_demand),
        ("electricity_demand.csv", &prepared.problem.electricity_demand),
        ("city_heat_demand.csv", &prepared.city_heat),
    ] {
        let path = out_dir.join(name);
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut w = BufWriter::new(file);
        crate::demand::write_profile_csv(profile, &mut w)?;
        w.flush().map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}
