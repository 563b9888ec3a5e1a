use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn offhub(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_offhub"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn offhub")
}

fn read(p: impl AsRef<Path>) -> String {
    fs::read_to_string(p).unwrap()
}

fn kv(summary: &str, key: &str) -> String {
    summary
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("{key} missing"))
        .to_string()
}

#[test]
fn default_run_writes_identical_files_twice() {
    let tmp = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let o = offhub(tmp.path(), &["run", "--out", out]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    // the echoed output.dir is the only line allowed to differ
    let without_dir = |s: String| s.lines().filter(|l| !l.contains("output.dir")).collect::<Vec<_>>().join("\n");
    for f in ["trace.csv", "summary.txt", "kpis.csv", "config.toml"] {
        let (a, b) = (tmp.path().join("a/S1").join(f), tmp.path().join("b/S1").join(f));
        assert_eq!(without_dir(read(&a)), without_dir(read(&b)), "{f}");
    }
    let summary = read(tmp.path().join("a/S1/summary.txt"));
    assert_eq!(kv(&summary, "design.wind_mw"), "64");
    assert_eq!(kv(&summary, "run.steps"), "7200");
    assert_eq!(read(tmp.path().join("a/S1/trace.csv")).lines().count(), 7201);
}

#[test]
fn override_is_echoed_and_config_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let o = offhub(tmp.path(), &["run", "--set", "design.bess_mw=30", "--set", "scenario.duration=600"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = read(tmp.path().join("out/S1/summary.txt"));
    assert_eq!(kv(&summary, "design.bess_mw"), "30");
    assert_eq!(kv(&summary, "config.design.bess_mw"), "30.0");

    // the echoed config alone reproduces the run
    fs::copy(tmp.path().join("out/S1/config.toml"), tmp.path().join("echo.toml")).unwrap();
    let o = offhub(tmp.path(), &["run", "--config", "echo.toml", "--out", "again"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        fs::read(tmp.path().join("out/S1/trace.csv")).unwrap(),
        fs::read(tmp.path().join("again/S1/trace.csv")).unwrap()
    );
    assert_eq!(read(tmp.path().join("again/S1/config.toml")), read(tmp.path().join("echo.toml")).replace("output.dir = \"out\"", "output.dir = \"again\""));
}

#[test]
fn config_errors_exit_2_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("bad.toml"), "[design]\nbess_mw = 20\nbogus = 3\n").unwrap();
    let o = offhub(tmp.path(), &["run", "--config", "bad.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.toml:3"));

    fs::write(tmp.path().join("syntax.toml"), "design.bess_mw = = 1\n").unwrap();
    let o = offhub(tmp.path(), &["run", "--config", "syntax.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));

    for args in [
        &["run", "--set", "design.nope=1"][..],
        &["run", "--config", "missing.toml"],
        &["year", "design9"],
        &["sweep", "--factors", "0.5,1.0"],
        &["run", "--set", "design.bess_mwh=0"],
    ] {
        let o = offhub(tmp.path(), args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn suite_reports_the_expected_ordering() {
    let tmp = tempfile::tempdir().unwrap();
    let o = offhub(tmp.path(), &["suite", "--jobs", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(tmp.path().join("out/suite/report.csv"));
    let peak = |case: &str| {
        let row = csv.lines().find(|l| l.starts_with(&format!("{case},"))).unwrap();
        let cols: Vec<f64> = row.split(',').skip(1).take(2).map(|x| x.parse().unwrap()).collect();
        cols[0].max(cols[1])
    };
    assert!(peak("S1") > peak("S2") && peak("S2") > peak("S3"));
    assert!(peak("S5") > peak("S3"));
    for case in ["S1", "S4", "S7"] {
        assert!(tmp.path().join("out").join(case).join("trace.csv").exists());
    }
    // one worker gives the same report
    let o = offhub(tmp.path(), &["suite", "--jobs", "1", "--out", "serial"]);
    assert!(o.status.success());
    assert_eq!(csv, read(tmp.path().join("serial/suite/report.csv")));
}

#[test]
fn year_and_sweep_agree_at_factor_one() {
    let tmp = tempfile::tempdir().unwrap();
    let o = offhub(tmp.path(), &["year", "design1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = read(tmp.path().join("out/design1/summary.txt"));
    assert_eq!(kv(&summary, "design.fc_mw"), "30");
    let net: f64 = kv(&summary, "kpi.h2.net_kg").parse().unwrap();
    assert!(net < 0.0);

    let o = offhub(tmp.path(), &["sweep", "--factors", "1.0,1.8"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = read(tmp.path().join("out/sweep/summary.txt"));
    assert_eq!(kv(&s, "sweep.1.wind_mw"), "88");
    assert_eq!(kv(&s, "sweep.1.ely_mw"), "63");
    let net_sweep: f64 = kv(&s, "sweep.0.net_h2_kg").parse().unwrap();
    assert!((net_sweep - net).abs() <= 1e-6 * net.abs(), "{net_sweep} vs {net}");
}
