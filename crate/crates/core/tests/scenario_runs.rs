use std::path::PathBuf;

use heatdispatch_core::config::{load_config, RunObjective, ScenarioConfig};
use heatdispatch_core::error::Error;
use heatdispatch_core::formulation::Unit;
use heatdispatch_core::report::{compute_scenario, run_scenario, write_demand, prepare_scenario, FILES};

fn shipped(n: u32) -> ScenarioConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../../configs/scenario{n}.toml"));
    load_config(&path).unwrap()
}

fn week(n: u32) -> ScenarioConfig {
    let mut c = shipped(n);
    c.run.horizon_hours = Some(168);
    c.run.step_hours = 1;
    c
}

fn read_csv(path: &std::path::Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let k = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[k].parse().unwrap()).collect()
}

#[test]
fn shipped_configs_parse() {
    let c1 = shipped(1);
    assert_eq!(c1.demand.dhn_share, 0.18);
    assert!(c1.storage.is_none());
    let c2 = shipped(2);
    assert!(c2.storage.is_some());
    let c3 = shipped(3);
    assert_eq!(c3.demand.dhn_share, 0.5);
    let wood = |c: &ScenarioConfig| c.technology(Unit::WoodBoiler).unwrap().thermal_capacity.unwrap();
    assert!(wood(&c3) > wood(&c1));
}

#[test]
fn calibrated_network_demand_is_189_gwh() {
    let p = prepare_scenario(&shipped(1)).unwrap();
    let total: f64 = p.problem.heat_demand.values.iter().sum::<f64>() * p.problem.step;
    assert!((total - 189_000.0).abs() < 1e-6 * 189_000.0);
    let p3 = prepare_scenario(&shipped(3)).unwrap();
    let total3: f64 = p3.problem.heat_demand.values.iter().sum::<f64>() * p3.problem.step;
    assert!((total3 / total - 0.5 / 0.18).abs() < 1e-9);
}

#[test]
fn report_files_are_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let mut c = week(2);
    c.run.objective = RunObjective::Pareto;
    c.run.n_pareto_points = 4;
    let report = run_scenario(&c, &out, false).unwrap();
    for f in FILES {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let leftovers: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(leftovers.len(), 1, "staging directory left behind");

    let (h, rows) = read_csv(&out.join("dispatch_hourly.csv"));
    assert_eq!(rows.len(), 168);
    let cost: f64 = column(&h, &rows, "cost_chf").iter().sum();
    let em: f64 = column(&h, &rows, "emissions_tco2").iter().sum();
    assert!((cost - report.solution.cost).abs() <= 1e-6 * report.solution.cost.abs());
    assert!((em - report.solution.emissions).abs() <= 1e-6 * report.solution.emissions);

    let (dh, daily) = read_csv(&out.join("daily.csv"));
    assert_eq!(daily.len(), 7);
    let (ah, annual) = read_csv(&out.join("annual_totals.csv"));
    for (u, hourly_col, daily_col) in [
        (0, "heat_wte_chp_mw", "wte_chp_mwh"),
        (1, "heat_ccgt_mw", "ccgt_mwh"),
        (2, "heat_wood_chp_mw", "wood_chp_mwh"),
    ] {
        let hourly: f64 = column(&h, &rows, hourly_col).iter().sum();
        let days: f64 = column(&dh, &daily, daily_col).iter().sum();
        let year = column(&ah, &annual, "heat_gwh")[u] * 1000.0;
        let scale = hourly.abs().max(1.0);
        assert!((hourly - days).abs() <= 1e-9 * scale);
        assert!((hourly - year).abs() <= 1e-6 * scale);
    }

    let (ph, pareto) = read_csv(&out.join("pareto.csv"));
    assert_eq!(ph, ["epsilon_tco2", "cost_chf", "emissions_tco2", "solution_id"]);
    assert!(!pareto.is_empty());
    let em = column(&ph, &pareto, "emissions_tco2");
    assert!(em.windows(2).all(|w| w[0] < w[1]));

    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["checks"]["violations"], 0);
    assert_eq!(json["scenario_id"], 2);

    let copy = load_config(&out.join("config.toml")).unwrap();
    assert_eq!(copy, c);
}

#[test]
fn existing_output_is_refused_without_overwrite() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    std::fs::create_dir(&out).unwrap();
    std::fs::write(out.join("keep.txt"), "x").unwrap();
    let err = run_scenario(&week(1), &out, false).unwrap_err();
    assert!(matches!(err, Error::Config(_)));
    assert!(out.join("keep.txt").exists());
    run_scenario(&week(1), &out, true).unwrap();
    assert!(!out.join("keep.txt").exists());
    assert!(out.join("report.json").exists());
}

#[test]
fn failed_runs_leave_no_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let mut c = week(1);
    c.grid.import_cap_mw = Some(0.0);
    c.grid.export_cap_mw = Some(0.0);
    let err = run_scenario(&c, &out, false).unwrap_err();
    assert!(matches!(err, Error::Infeasible(_)), "{err}");
    assert_eq!(err.exit_code(), 1);
    assert!(!out.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn identical_runs_write_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run_scenario(&week(2), &a, false).unwrap();
    run_scenario(&week(2), &b, false).unwrap();
    for f in FILES {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f} differs");
    }
}

#[test]
fn background_shrinks_with_the_network_share() {
    let r1 = compute_scenario(&week(1)).unwrap();
    let mut c3 = week(3);
    c3.run.objective = RunObjective::Emissions;
    let r3 = compute_scenario(&c3).unwrap();
    let ratio = r3.background.emissions / r1.background.emissions;
    assert!((ratio - 0.5 / 0.82).abs() < 1e-9);
}

#[test]
fn weather_csv_drives_the_demand() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("timestamp,temperature_c\n");
    for h in 0..48 {
        text.push_str(&format!("2023-01-{:02}T{:02}:00:00,{}\n", 1 + h / 24, h % 24, if h < 24 { -5.0 } else { 5.0 }));
    }
    std::fs::write(dir.path().join("weather.csv"), text).unwrap();
    let mut c = shipped(1);
    c.weather.csv = Some(dir.path().join("weather.csv"));
    c.run.step_hours = 1;
    let p = prepare_scenario(&c).unwrap();
    assert_eq!(p.problem.horizon(), 48);
    assert!(p.problem.heat_demand.values[0] > p.problem.heat_demand.values[30]);
    write_demand(&p, &dir.path().join("demand")).unwrap();
    let (h, rows) = read_csv(&dir.path().join("demand/heat_demand.csv"));
    assert_eq!(h, ["timestep", "mw"]);
    assert_eq!(rows.len(), 48);
}
