use std::path::Path;
use std::process::{Command, Output};

fn qot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qot"))
        .args(args)
        .env_remove("QOT_LOG")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Value of a `key = value` line.
fn field(out: &Output, key: &str) -> String {
    stdout(out)
        .lines()
        .find_map(|l| {
            let (k, v) = l.rsplit_once(" = ")?;
            (k.trim_end() == key).then(|| v.to_string())
        })
        .unwrap_or_else(|| panic!("no {key} in\n{}", stdout(out)))
}

fn write_pair(dir: &Path) -> String {
    let path = dir.join("pair.json");
    std::fs::write(
        &path,
        r#"{"x": {"hbar": 1, "points": [[-1, 0], [1, 0.5]], "weights": [0.3, 0.7]},
            "y": {"hbar": 1, "points": [[0, 0], [2, -1], [0.5, 1]], "weights": [0.2, 0.5, 0.3]}}"#,
    )
    .unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn equal_mass_reports_equality() {
    let out = qot(&["equal-mass", "--a", "1", "--b", "2", "--hbar", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert_eq!(field(&out, "C_q = C_c"), "yes");
    assert_eq!(field(&out, "witness bound"), "1");
    let cq: f64 = field(&out, "C_q").parse().unwrap();
    assert!((cq - 1.0).abs() < 1e-6);
}

#[test]
fn unequal_mass_is_cheaper() {
    let out = qot(&["unequal-mass", "--a", "1", "--eta", "0.5", "--hbar", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert_eq!(field(&out, "C_c"), "1");
    assert_eq!(field(&out, "trace(C Q_eps)"), "0.98747858858");
    assert_eq!(field(&out, "quantum strictly cheaper"), "yes");
}

#[test]
fn numbers_have_twelve_significant_digits() {
    let out = qot(&["unequal-mass", "--a", "1", "--eta", "0.5", "--hbar", "1"]);
    let v = field(&out, "max feasible eps");
    let digits = v.trim_start_matches("0.").trim_start_matches('0');
    assert!(digits.len() <= 12, "{v}");
}

#[test]
fn w2_writes_plan_and_cost() {
    let dir = tempfile::tempdir().unwrap();
    let pair = write_pair(dir.path());
    let plan = dir.path().join("plan.csv");
    let cost = dir.path().join("cost.csv");
    let out = qot(&[
        "w2",
        "--config",
        &pair,
        "--plan-csv",
        plan.to_str().unwrap(),
        "--cost-csv",
        cost.to_str().unwrap(),
        "--pivot",
        "block-search",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(field(&out, "W2^2"), "2.25");
    let plan = std::fs::read_to_string(plan).unwrap();
    assert_eq!(plan, "row,0,1,2\n0,0.2,0,0.1\n1,0,0.5,0.2\n");
    assert!(std::fs::read_to_string(cost)
        .unwrap()
        .starts_with("row,0,1,2\n"));
}

#[test]
fn two_single_configuration_files() {
    let dir = tempfile::tempdir().unwrap();
    let x = dir.path().join("x.json");
    let y = dir.path().join("y.json");
    std::fs::write(&x, r#"{"hbar": 0.5, "points": [[0, 0]], "weights": [1]}"#).unwrap();
    std::fs::write(&y, r#"{"hbar": 0.5, "points": [[1, 1]], "weights": [1]}"#).unwrap();
    let out = qot(&[
        "mk2",
        "--config",
        x.to_str().unwrap(),
        "--config",
        y.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    // coherent states differ from their centres only by the shift
    let v: f64 = field(&out, "MK2^2").parse().unwrap();
    assert!((v - 2.0).abs() < 1e-6, "{v}");
}

#[test]
fn mk2_outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let pair = write_pair(dir.path());
    let run = |tag: &str| {
        let files: Vec<String> = ["trace.csv", "coupling.json", "witness.json"]
            .iter()
            .map(|f| {
                dir.path()
                    .join(format!("{tag}-{f}"))
                    .to_str()
                    .unwrap()
                    .to_string()
            })
            .collect();
        let out = qot(&[
            "mk2",
            "--config",
            &pair,
            "--trace-csv",
            &files[0],
            "--coupling-json",
            &files[1],
            "--witness-json",
            &files[2],
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
        let mut blobs = vec![out.stdout];
        blobs.extend(files.iter().map(|f| std::fs::read(f).unwrap()));
        blobs
    };
    let first = run("a");
    assert_eq!(first, run("b"));

    let coupling: serde_json::Value = serde_json::from_slice(&first[2]).unwrap();
    assert_eq!(coupling["matrix"]["rows"], 6);
    assert_eq!(coupling["basis_y"]["weights"].as_array().unwrap().len(), 3);
    let pair0 = &coupling["matrix"]["data"][0];
    assert_eq!(pair0.as_array().unwrap().len(), 2);
    let witness: serde_json::Value = serde_json::from_slice(&first[3]).unwrap();
    assert_eq!(witness["valid"], true);
    let trace = String::from_utf8(first[1].clone()).unwrap();
    assert!(trace.starts_with("iteration,primal,dual,primal_residual,dual_residual,penalty\n"));
}

#[test]
fn sweep_csv_is_ordered_and_complete() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let args = [
        "sweep",
        "--scenario",
        "unequal-mass",
        "--a",
        "1",
        "--eta",
        "0.25,0.5",
        "--hbar",
        "0.5,1",
        "--output",
        path.to_str().unwrap(),
    ];
    let out = qot(&args);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "scenario,a,b,eta,hbar,eps,c_classical,c_quantum,gap,dual_gap,iterations"
    );
    assert_eq!(lines.len(), 5);
    let keys: Vec<(String, String)> = lines[1..]
        .iter()
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            assert_eq!(f.len(), 11);
            assert_eq!(f[2], "");
            (f[3].to_string(), f[4].to_string())
        })
        .collect();
    assert_eq!(
        keys,
        [("0.25", "0.5"), ("0.25", "1"), ("0.5", "0.5"), ("0.5", "1")]
            .map(|(a, b)| (a.to_string(), b.to_string()))
    );
    assert_eq!(qot(&args).status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&path).unwrap(), text);
}

#[test]
fn sweep_equal_mass_to_stdout() {
    let out = qot(&[
        "sweep",
        "--scenario",
        "equal-mass",
        "--a",
        "1",
        "--b",
        "2,3",
        "--hbar",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][3], "");
    assert_eq!(rows[0][5], "");
    assert_eq!(rows[1][6], "4");
}

#[test]
fn husimi_bound_holds() {
    let out = qot(&[
        "husimi-bound",
        "--a",
        "1",
        "--b",
        "2",
        "--hbar",
        "1",
        "--step",
        "0.2",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert_eq!(field(&out, "bound holds"), "yes");
}

#[test]
fn uncovered_grid_is_an_input_error() {
    let out = qot(&[
        "husimi-bound",
        "--a",
        "1",
        "--b",
        "2",
        "--hbar",
        "1",
        "--half-width",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solver_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let pair = write_pair(dir.path());
    let out = qot(&["mk2", "--config", &pair, "--max-iterations", "5"]);
    assert_eq!(out.status.code(), Some(1));
    let out = qot(&["mk2", "--config", &pair, "--gap-tolerance", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(field(&out, "certified"), "no");
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"hbar": 1, "points": [[0, 0]], "weights": [0.5]}"#).unwrap();
    let single = bad.to_str().unwrap();
    assert_eq!(
        qot(&["w2", "--config", "missing.json"]).status.code(),
        Some(2)
    );
    assert_eq!(qot(&["w2", "--config", single]).status.code(), Some(2));
    assert_eq!(
        qot(&["w2", "--config", single, "--config", single])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        qot(&["equal-mass", "--a", "-1", "--b", "2", "--hbar", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        qot(&["unequal-mass", "--a", "1", "--eta", "1.5", "--hbar", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(qot(&["equal-mass", "--a", "1"]).status.code(), Some(2));

    let x = dir.path().join("x.json");
    let y = dir.path().join("y.json");
    std::fs::write(&x, r#"{"hbar": 1, "points": [[0, 0]], "weights": [1]}"#).unwrap();
    std::fs::write(&y, r#"{"hbar": 2, "points": [[0, 0]], "weights": [1]}"#).unwrap();
    let out = qot(&[
        "mk2",
        "--config",
        x.to_str().unwrap(),
        "--config",
        y.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn log_level_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_qot"))
        .args(["equal-mass", "--a", "1", "--b", "2", "--hbar", "1"])
        .env("QOT_LOG", "debug")
        .output()
        .unwrap();
    assert!(String::from_utf8_lossy(&out.stderr).contains("DEBUG"));
    assert!(qot(&["equal-mass", "--a", "1", "--b", "2", "--hbar", "1"])
        .stderr
        .is_empty());
}

#[test]
fn verify_passes() {
    let out = qot(&["verify", "--json"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let checks: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let checks = checks.as_array().unwrap();
    assert!(checks.len() > 10);
    assert!(checks.iter().all(|c| c["passed"] == true));
}
