use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn shipped(n: u32) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../../configs/scenario{n}.toml"));
    std::fs::read_to_string(path).unwrap()
}

/// A shipped scenario shortened to one hourly week.
fn week(n: u32, extra: &[(&str, &str)]) -> String {
    let mut text = shipped(n).replace("step_hours = 3", "step_hours = 1\nhorizon_hours = 168");
    for (section, line) in extra {
        text = text.replace(&format!("[{section}]\n"), &format!("[{section}]\n{line}\n"));
    }
    text
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn heatdispatch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heatdispatch")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s2.toml", &week(2, &[]));
    let out = dir.path().join("out");
    let o = heatdispatch(&["run", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("scenario 2"), "{stdout}");
    for f in ["dispatch_hourly.csv", "daily.csv", "annual_totals.csv", "pareto.csv", "background.csv", "report.json", "config.toml"] {
        assert!(out.join(f).is_file(), "{f}");
    }

    let again = heatdispatch(&["run", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(code(&again), 2);
    let forced = heatdispatch(&["run", "--config", s(&cfg), "--out", s(&out), "--overwrite"]);
    assert_eq!(code(&forced), 0);
}

#[test]
fn pareto_override_fills_the_front() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s1.toml", &week(1, &[]));
    let out = dir.path().join("out");
    let o = heatdispatch(&[
        "run", "--config", s(&cfg), "--objective", "pareto", "--points", "3", "--out", s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let pareto = std::fs::read_to_string(out.join("pareto.csv")).unwrap();
    assert_eq!(pareto.lines().next().unwrap(), "epsilon_tco2,cost_chf,emissions_tco2,solution_id");
    assert!(pareto.lines().count() >= 3);
}

#[test]
fn infeasible_scenario_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.toml",
        &week(1, &[("grid", "import_cap_mw = 0.0\nexport_cap_mw = 0.0")]),
    );
    let out = dir.path().join("out");
    let o = heatdispatch(&["run", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!out.exists());
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let share = write(dir.path(), "share.toml", &week(1, &[]).replace("dhn_share = 0.18", "dhn_share = 1.5"));
    let o = heatdispatch(&["validate", "--config", s(&share)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("dhn_share"));

    let unknown = write(dir.path(), "unknown.toml", &week(1, &[("run", "colour = \"red\"")]));
    assert_eq!(code(&heatdispatch(&["validate", "--config", s(&unknown)])), 2);

    let cfg = write(dir.path(), "ok.toml", &week(1, &[]));
    let o = heatdispatch(&["run", "--config", s(&cfg), "--step", "5", "--out", s(&dir.path().join("x"))]);
    assert_eq!(code(&o), 2);
}

#[test]
fn missing_inputs_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = heatdispatch(&["validate", "--config", s(&dir.path().join("absent.toml"))]);
    assert_eq!(code(&o), 3);

    write(dir.path(), "weather.csv", "timestamp,temperature_c\n2023-01-01T00:00:00,not-a-number\n");
    let cfg = write(dir.path(), "s1.toml", &week(1, &[("weather", "csv = \"weather.csv\"")]));
    let o = heatdispatch(&["validate", "--config", s(&cfg)]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn validate_and_demand() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/scenario3.toml");
    let o = heatdispatch(&["validate", "--config", s(&cfg)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("2920 steps of 3 h"));

    let out = dir.path().join("demand");
    let o = heatdispatch(&["demand", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let heat = std::fs::read_to_string(out.join("heat_demand.csv")).unwrap();
    assert_eq!(heat.lines().count(), 2921);
}
