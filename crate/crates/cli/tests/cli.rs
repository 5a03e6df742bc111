use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn rskcap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rskcap"))
        .args(args)
        .env_remove("RSKCAP_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = rskcap(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn parse_cell(s: &str) -> Option<f64> {
    match s {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok(),
    }
}

/// Compares two CSV texts cell by cell: text cells exactly, numbers to a
/// relative tolerance that absorbs libm differences between platforms.
fn assert_csv_matches(actual: &str, expected: &str) {
    let a: Vec<&str> = actual.lines().collect();
    let e: Vec<&str> = expected.lines().collect();
    assert_eq!(a.len(), e.len(), "row count");
    assert_eq!(a[0], e[0], "header");
    for (i, (ra, re)) in a.iter().zip(&e).enumerate().skip(1) {
        let ca: Vec<&str> = ra.split(',').collect();
        let ce: Vec<&str> = re.split(',').collect();
        assert_eq!(ca.len(), ce.len(), "row {i}");
        for (x, y) in ca.iter().zip(&ce) {
            match (parse_cell(x), parse_cell(y)) {
                (Some(x), Some(y)) if x.is_finite() && y.is_finite() => {
                    assert!((x - y).abs() <= 1e-10 * y.abs().max(1e-300), "row {i}: {x} vs {y}")
                }
                _ => assert_eq!(x, y, "row {i}"),
            }
        }
    }
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let idx = lines.next().unwrap().split(',').position(|c| c == name).unwrap();
    lines.map(|l| parse_cell(l.split(',').nth(idx).unwrap()).unwrap()).collect()
}

#[test]
fn capacity_config_golden() {
    let cfg = golden("capacity.toml");
    let out = stdout(&["capacity", "--config", cfg.to_str().unwrap()]);
    assert_csv_matches(&out, &std::fs::read_to_string(golden("capacity.csv")).unwrap());
}

#[test]
fn oid_golden() {
    let out = stdout(&[
        "oid", "--scheme", "rsk-sub,csk", "--gamma", "0.2,5", "--nr", "500", "--alpha-grid", "0:1:lin11",
        "--c-grid", "0.01:100:log9", "--cmax", "100",
    ]);
    assert_csv_matches(&out, &std::fs::read_to_string(golden("oid.csv")).unwrap());
}

#[test]
fn reproduce_golden() {
    let dir = tempfile::tempdir().unwrap();
    for fig in ["fig1c", "fig2c"] {
        let out = rskcap(&["reproduce", fig, "--out-dir", dir.path().to_str().unwrap()]);
        assert!(out.status.success(), "{}", stderr(&out));
        let csv = std::fs::read_to_string(dir.path().join(format!("{fig}.csv"))).unwrap();
        assert_csv_matches(&csv, &std::fs::read_to_string(golden(&format!("{fig}.csv"))).unwrap());
    }
}

#[test]
fn output_is_identical_across_runs_and_thread_counts() {
    let base = ["capacity", "--scheme", "rsk-opt,rsk-sub,csk", "--gamma", "1:100:log12", "--nr", "100,1000"];
    let one = stdout(&[&base[..], &["--jobs", "1"]].concat());
    let four = stdout(&[&base[..], &["--jobs", "4"]].concat());
    let again = stdout(&base);
    assert_eq!(one, four);
    assert_eq!(one, again);

    let sim = ["simulate", "--alpha", "0.2,0.7", "--trials", "300", "--nr", "200", "--seed", "42"];
    assert_eq!(stdout(&[&sim[..], &["--jobs", "1"]].concat()), stdout(&[&sim[..], &["--jobs", "3"]].concat()));
}

#[test]
fn reported_capacity_is_clamped_raw_value() {
    let out = stdout(&["capacity", "--scheme", "rsk-opt,rsk-sub,csk", "--gamma", "1:20:log15", "--nr", "10,100,1000"]);
    let cap = column(&out, "capacity_bits");
    let raw = column(&out, "raw_bits");
    assert!(raw.iter().any(|r| *r < 0.0));
    for (c, r) in cap.iter().zip(&raw) {
        assert!(*c >= 0.0);
        assert_eq!(*c, r.max(0.0));
    }
}

#[test]
fn json_format() {
    let out = stdout(&["capacity", "--gamma", "5", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["command"], "capacity");
    assert_eq!(v["parameters"]["gamma"], "5");
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert!((rows[0]["capacity_bits"].as_f64().unwrap() - 3.5180306642652472).abs() < 1e-9);
}

#[test]
fn oid_mirror_symmetry() {
    let out = stdout(&["oid", "--scheme", "rsk-opt,rsk-sub", "--gamma", "0.2,5", "--alpha-grid", "0:1:lin21"]);
    let rows: Vec<Vec<&str>> = out.lines().skip(1).map(|l| l.split(',').collect()).collect();
    for scheme in ["rsk-opt", "rsk-sub"] {
        let dens = |g: &str| -> Vec<f64> {
            rows.iter()
                .filter(|r| r[0] == scheme && r[1] == g)
                .map(|r| parse_cell(r[5]).unwrap())
                .collect()
        };
        let low = dens("0.2");
        let mut high = dens("5.0");
        high.reverse();
        assert_eq!(low.len(), 21);
        for (a, b) in low.iter().zip(&high) {
            assert!(a == b || (a - b).abs() < 1e-8 * b.abs(), "{scheme}: {a} vs {b}");
        }
    }
}

#[test]
fn invalid_values_exit_2_naming_the_key() {
    for (args, key) in [
        (vec!["capacity", "--gamma", "-1"], "gamma"),
        (vec!["capacity", "--nr", "0"], "nr"),
        (vec!["oid", "--alpha-grid", "0:1.5:lin3"], "alpha-grid"),
        (vec!["simulate", "--trials", "many"], "trials"),
        (vec!["capacity", "--format", "xml"], "format"),
        (vec!["ba", "--scheme", "rsk-opt"], "scheme"),
    ] {
        let out = rskcap(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(stderr(&out).contains(&format!("'{key}'")), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "gamma = 5\nbogus_key = 1\n").unwrap();
    let out = rskcap(&["capacity", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("bogus_key"), "{}", stderr(&out));
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "gamma = 2\nnr = 100\n").unwrap();
    let out = stdout(&["capacity", "--config", cfg.to_str().unwrap(), "--gamma", "5"]);
    let row: Vec<&str> = out.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(&row[..3], &["rsk-opt", "5.0", "100"]);
}

#[test]
fn blahut_arimoto_exit_codes() {
    let out = rskcap(&["ba", "--inputs", "41", "--max-iter", "1"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("not converged"));
    // The summary is still written before failing.
    assert!(String::from_utf8_lossy(&out.stdout).contains("converged"));

    let out = stdout(&["ba", "--scheme", "rsk-sub,csk", "--inputs", "41", "--nr", "100"]);
    assert!(column(&out, "ba_upper_bits").iter().zip(column(&out, "ba_lower_bits")).all(|(u, l)| u - l <= 1e-6));
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_rskcap"))
        .args(["capacity", "--gamma", "5", "--out", "sub.csv"])
        .env("RSKCAP_OUT_DIR", dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    assert!(dir.path().join("sub.csv").exists());

    let status = Command::new(env!("CARGO_BIN_EXE_rskcap"))
        .args(["reproduce", "fig1c"])
        .env("RSKCAP_OUT_DIR", dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    assert!(dir.path().join("fig1c.csv").exists());
    assert!(dir.path().join("fig1c.manifest.json").exists());
}

#[test]
fn manifest_describes_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = rskcap(&["reproduce", "fig1b", "--out-dir", dir.path().to_str().unwrap(), "--seed", "7"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(dir.path().join("fig1b.manifest.json")).unwrap();
    let m: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(m["schema_version"], 1);
    assert_eq!(m["tool_version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(m["seed"], 7);
    assert_eq!(m["csv"], "fig1b.csv");
    assert!(m["parameters"].is_object());
    let csv = std::fs::read_to_string(dir.path().join("fig1b.csv")).unwrap();
    assert_eq!(m["rows"], csv.lines().count() as u64 - 1);
    let columns: Vec<&str> = m["columns"].as_array().unwrap().iter().map(|c| c.as_str().unwrap()).collect();
    assert_eq!(columns.join(","), csv.lines().next().unwrap());
}
