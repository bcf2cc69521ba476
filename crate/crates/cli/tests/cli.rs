use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const FOUR_FIRMS: &str = r#"{"A": 20, "costs": [0, 0, 0, 0], "init": [10, 10, 10, 10]}"#;

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        Workspace {
            dir: TempDir::new().unwrap(),
        }
    }

    fn file(&self, name: &str, body: &str) -> PathBuf {
        let path = self.dir.path().join(name);
        fs::write(&path, body).unwrap();
        path
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn cournot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cournot"))
        .args(args)
        .output()
        .unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(bytes)))
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect()
}

fn rows(v: &Value) -> Vec<Vec<f64>> {
    v.as_array().unwrap().iter().map(floats).collect()
}

#[test]
fn simulate_four_symmetric_firms() {
    let ws = Workspace::new();
    let spec = ws.file("game.json", FOUR_FIRMS);
    let csv = ws.path("traj.csv");
    let out = cournot(&["simulate", "--input", p(&spec), "--output", p(&csv)]);
    assert_eq!(out.status.code(), Some(0));
    let outcome = json(&out.stdout);
    assert_eq!(outcome["kind"], "two_cycle");
    assert_eq!(rows(&outcome["rows"]), vec![vec![10.0; 4], vec![0.0; 4]]);
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("round,q_1,q_2,q_3,q_4"));
    assert_eq!(lines.next(), Some("0,10,10,10,10"));
    assert_eq!(lines.next(), Some("1,0,0,0,0"));
}

#[test]
fn simulate_single_firm() {
    let ws = Workspace::new();
    let spec = ws.file("game.json", r#"{"A": 8, "costs": [2]}"#);
    let outcome = ws.path("outcome.json");
    let out = cournot(&["simulate", "--input", p(&spec), "--outcome", p(&outcome)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .starts_with("round,q_1\n"));
    let outcome = json(&fs::read(outcome).unwrap());
    assert_eq!(outcome["kind"], "equilibrium");
    assert_eq!(floats(&outcome["witness"]), vec![3.0]);
}

#[test]
fn simulate_equal_costs_random_start_cycles() {
    let ws = Workspace::new();
    let spec = ws.file("game.json", r#"{"A": 12, "costs": [1, 1, 1]}"#);
    for seed in ["1", "2", "3"] {
        let out = cournot(&[
            "simulate",
            "--input",
            p(&spec),
            "--seed",
            seed,
            "--output",
            p(&ws.path("t.csv")),
        ]);
        assert_eq!(out.status.code(), Some(0));
        assert_eq!(json(&out.stdout)["kind"], "two_cycle", "seed {seed}");
    }
}

#[test]
fn simulate_reports_undecided_with_exit_zero() {
    let ws = Workspace::new();
    let spec = ws.file(
        "game.json",
        r#"{"A": 12, "costs": [1, 1, 1], "init": [0, 1, 2]}"#,
    );
    let out = cournot(&[
        "simulate",
        "--input",
        p(&spec),
        "--steps",
        "3",
        "--output",
        p(&ws.path("t.csv")),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let outcome = json(&out.stdout);
    // Three steps are too few to trust any period.
    assert_eq!(outcome["kind"], "undecided");
}

#[test]
fn simulate_csv_round_trips() {
    let ws = Workspace::new();
    let spec = ws.file(
        "game.json",
        r#"{"A": 37.3, "costs": [5.1, 0.7, 3.3], "init": [1.1, 9.7, 2.3]}"#,
    );
    let csv = ws.path("t.csv");
    let out = cournot(&[
        "simulate",
        "--input",
        p(&spec),
        "--output",
        p(&csv),
        "--steps",
        "40",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let params = cournot_core::GameParams::new(37.3, vec![5.1, 0.7, 3.3]).unwrap();
    let text = fs::read_to_string(&csv).unwrap();
    let states: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').skip(1).map(|x| x.parse().unwrap()).collect())
        .collect();
    for w in states.windows(2) {
        let prev = cournot_core::QuantityVector::new(params.from_user_order(&w[0])).unwrap();
        let next = cournot_core::step(&params, &prev).unwrap();
        assert_eq!(params.to_user_order(next.values()), w[1]);
    }
}

#[test]
fn simulate_dimension_mismatch_exits_3() {
    let ws = Workspace::new();
    let spec = ws.file("game.json", r#"{"A": 10, "costs": [0, 0], "init": [1]}"#);
    assert_eq!(
        cournot(&["simulate", "--input", p(&spec)]).status.code(),
        Some(3)
    );
    let spec = ws.file(
        "names.json",
        r#"{"A": 10, "costs": [0, 0], "names": ["a"]}"#,
    );
    assert_eq!(
        cournot(&["equilibrium", "--input", p(&spec)]).status.code(),
        Some(3)
    );
}

#[test]
fn malformed_specs_exit_2() {
    let ws = Workspace::new();
    for (name, body) in [
        ("typo.json", r#"{"A": 10, "cost": [0, 0]}"#),
        ("negative_a.json", r#"{"A": -1, "costs": [0]}"#),
        ("negative_cost.json", r#"{"A": 10, "costs": [0, -1]}"#),
        ("no_firms.json", r#"{"A": 10, "costs": []}"#),
        (
            "negative_init.json",
            r#"{"A": 10, "costs": [0], "init": [-1]}"#,
        ),
        ("text.json", "not json"),
    ] {
        let spec = ws.file(name, body);
        let out = cournot(&["equilibrium", "--input", p(&spec)]);
        assert_eq!(out.status.code(), Some(2), "{name}");
        assert!(!out.stderr.is_empty());
    }
    assert_eq!(
        cournot(&["equilibrium", "--input", p(&ws.path("missing.json"))])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        cournot(&["sweep", "--trials", "lots"]).status.code(),
        Some(2)
    );
    assert_eq!(
        cournot(&["sweep", "--n-min", "5", "--n-max", "2"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn equilibrium_examples() {
    let ws = Workspace::new();
    let cases = [
        (r#"{"A": 12, "costs": [0, 0]}"#, vec![4.0, 4.0], 2),
        (r#"{"A": 1, "costs": [2, 3]}"#, vec![0.0, 0.0], 0),
        (r#"{"A": 10, "costs": [3, 0, 3]}"#, vec![1.0, 4.0, 1.0], 3),
    ];
    for (body, q_star, support) in cases {
        let spec = ws.file("game.json", body);
        let out = cournot(&["equilibrium", "--input", p(&spec)]);
        assert_eq!(out.status.code(), Some(0));
        let eq = json(&out.stdout);
        assert_eq!(floats(&eq["q_star"]), q_star, "{body}");
        assert_eq!(eq["support_size"], support);
        let total: f64 = q_star.iter().sum();
        assert_eq!(eq["total"].as_f64(), Some(total));
    }
}

#[test]
fn equilibrium_output_reingests_exactly() {
    let ws = Workspace::new();
    let spec = ws.file(
        "game.json",
        r#"{"A": 97.13, "costs": [3.7, 12.9, 1.1, 40.3]}"#,
    );
    let out = cournot(&["equilibrium", "--input", p(&spec)]);
    let q_star = floats(&json(&out.stdout)["q_star"]);
    let params = cournot_core::GameParams::new(97.13, vec![3.7, 12.9, 1.1, 40.3]).unwrap();
    let direct = cournot_core::nash_equilibrium(&params);
    assert_eq!(params.from_user_order(&q_star), direct.q_star.values());
    let spec = ws.file(
        "again.json",
        &format!(
            r#"{{"A": 97.13, "costs": [3.7, 12.9, 1.1, 40.3], "init": {}}}"#,
            json_list(&q_star)
        ),
    );
    let out = cournot(&[
        "simulate",
        "--input",
        p(&spec),
        "--output",
        p(&ws.path("t.csv")),
    ]);
    let outcome = json(&out.stdout);
    assert_eq!(outcome["kind"], "equilibrium");
    for (w, q) in floats(&outcome["witness"]).iter().zip(&q_star) {
        assert!((w - q).abs() < 1e-12);
    }
}

fn json_list(values: &[f64]) -> String {
    serde_json::to_string(values).unwrap()
}

#[test]
fn oscillations_report_symmetric_case1() {
    let ws = Workspace::new();
    let spec = ws.file("game.json", FOUR_FIRMS);
    let out = cournot(&["oscillations", "--input", p(&spec)]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out.stdout);
    let list = report["oscillations"].as_array().unwrap();
    let case1 = list
        .iter()
        .find(|o| o["case"] == 1)
        .expect("case 1 reported");
    assert_eq!(rows(&case1["rows"]), vec![vec![0.0; 4], vec![10.0; 4]]);
    assert!(list.iter().all(|o| o["verified"] == true));
    assert_eq!(floats(&report["equilibrium"]["q_star"]), vec![4.0; 4]);
}

#[test]
fn oscillations_case3_with_delta() {
    let ws = Workspace::new();
    let spec = ws.file("game.json", r#"{"A": 12, "costs": [0, 0, 0]}"#);
    let out = cournot(&[
        "oscillations",
        "--input",
        p(&spec),
        "--case",
        "3",
        "--delta-a",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out.stdout);
    let only = &report["oscillations"][0];
    assert_eq!(rows(&only["rows"]), vec![vec![2.0; 3], vec![4.0; 3]]);
    assert_eq!(only["family"]["parameter"], "delta_a");
    assert_eq!(only["family"]["upper"].as_f64(), Some(6.0));
    assert_eq!(report["oscillations"].as_array().unwrap().len(), 1);
}

#[test]
fn oscillations_case2_in_user_order() {
    let ws = Workspace::new();
    let spec = ws.file("game.json", r#"{"A": 10, "costs": [3, 0, 3]}"#);
    let out = cournot(&[
        "oscillations",
        "--input",
        p(&spec),
        "--case",
        "2",
        "--k1",
        "1",
        "--k2",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let only = &json(&out.stdout)["oscillations"][0];
    assert_eq!(
        rows(&only["rows"]),
        vec![vec![0.0, 3.0, 0.0], vec![2.0, 5.0, 2.0]]
    );
}

#[test]
fn oscillations_infeasible_shapes_exit_4() {
    let ws = Workspace::new();
    let spec = ws.file("game.json", r#"{"A": 10, "costs": [0, 0]}"#);
    let out = cournot(&["oscillations", "--input", p(&spec), "--case", "1"]);
    assert_eq!(out.status.code(), Some(4));
    let message = String::from_utf8(out.stderr).unwrap();
    assert!(
        message.contains("(k-3)A + 3c_1 - sum_{i<=k} c_i >= 0"),
        "{message}"
    );

    let spec = ws.file("three.json", r#"{"A": 12, "costs": [0, 0, 0]}"#);
    let out = cournot(&[
        "oscillations",
        "--input",
        p(&spec),
        "--case",
        "3",
        "--delta-a",
        "7",
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8(out.stderr).unwrap().contains("delta_a"));
}

#[test]
fn oscillations_flag_misuse_exits_2() {
    let ws = Workspace::new();
    let spec = ws.file("game.json", r#"{"A": 12, "costs": [0, 0, 0]}"#);
    assert_eq!(
        cournot(&["oscillations", "--input", p(&spec), "--case", "2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        cournot(&["oscillations", "--input", p(&spec), "--case", "4"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        cournot(&["oscillations", "--input", p(&spec), "--k1", "1"])
            .status
            .code(),
        Some(2)
    );
    let out = cournot(&[
        "oscillations",
        "--input",
        p(&spec),
        "--case",
        "1",
        "--delta-a",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_examples() {
    let ws = Workspace::new();
    let spec = ws.file("game.json", FOUR_FIRMS);
    let good = ws.file("good.json", r#"{"rows": [[10, 10, 10, 10], [0, 0, 0, 0]]}"#);
    let out = cournot(&["verify", "--input", p(&spec), "--matrix", p(&good)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out.stdout)["max_residual"].as_f64(), Some(0.0));

    let eq = ws.file("eq.json", r#"{"rows": [[4, 4, 4, 4], [4, 4, 4, 4]]}"#);
    assert_eq!(
        cournot(&["verify", "--input", p(&spec), "--matrix", p(&eq)])
            .status
            .code(),
        Some(0)
    );

    let bad = ws.file("bad.json", r#"{"rows": [[10, 10, 10, 10], [0, 0, 1, 0]]}"#);
    let out = cournot(&["verify", "--input", p(&spec), "--matrix", p(&bad)]);
    assert_eq!(out.status.code(), Some(5));
    let report = json(&out.stdout);
    assert_eq!(report["valid"], false);
    assert_eq!(report["worst"]["row"], 2);
    assert_eq!(report["worst"]["firm"], 3);
    assert_eq!(report["max_residual"].as_f64(), Some(1.0));
}

#[test]
fn verify_matrix_width_mismatch_exits_3() {
    let ws = Workspace::new();
    let spec = ws.file("game.json", FOUR_FIRMS);
    let narrow = ws.file("narrow.json", r#"{"rows": [[10, 10, 10], [0, 0, 0]]}"#);
    assert_eq!(
        cournot(&["verify", "--input", p(&spec), "--matrix", p(&narrow)])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn sweep_default_passes() {
    let ws = Workspace::new();
    let report = ws.path("report.json");
    let out = cournot(&[
        "sweep",
        "--trials",
        "1000",
        "--seed",
        "42",
        "--report",
        p(&report),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&fs::read(report).unwrap());
    assert_eq!(report["trials"], 1000);
    assert_eq!(report["total_failures"], 0);
    assert_eq!(report["properties"]["period_at_most_two"]["failed"], 0);
}

#[test]
fn sweep_zero_trials_is_empty() {
    let out = cournot(&["sweep", "--trials", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out.stdout);
    assert_eq!(report["trials"], 0);
    assert_eq!(report["counterexamples"].as_array().unwrap().len(), 0);
}

#[test]
fn sweep_catches_broken_engines() {
    for mutation in ["no-clamp", "wrong-slope"] {
        let out = cournot(&[
            "sweep",
            "--trials",
            "30",
            "--steps",
            "300",
            "--mutation",
            mutation,
        ]);
        assert_ne!(out.status.code(), Some(0), "{mutation}");
        assert!(json(&out.stdout)["total_failures"].as_u64().unwrap() > 0);
    }
}

#[test]
fn falsify_finds_nothing() {
    let out = cournot(&["falsify", "--trials", "100"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out.stdout)["total_failures"], 0);
}

#[test]
fn reduce_averages_survivors() {
    let ws = Workspace::new();
    let spec = ws.file(
        "game.json",
        r#"{"A": 10, "costs": [2, 1, 6], "init": [1, 2, 3]}"#,
    );
    let out = cournot(&["reduce", "--input", p(&spec)]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = json(&out.stdout);
    assert_eq!(report["n_bar"], 2);
    assert_eq!(floats(&report["reduced_costs"]), vec![1.5, 1.5, 6.0]);
    assert!(report["max_residual"].as_f64().unwrap() < 1e-9);
}

#[test]
fn reduce_rejects_a_window_with_idle_firms() {
    let ws = Workspace::new();
    let spec = ws.file("game.json", FOUR_FIRMS);
    let out = cournot(&[
        "reduce",
        "--input",
        p(&spec),
        "--n-bar",
        "4",
        "--window-start",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(
        cournot(&["reduce", "--input", p(&spec), "--n-bar", "9"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn identical_flags_give_identical_bytes() {
    let ws = Workspace::new();
    let spec = ws.file("game.json", r#"{"A": 50, "costs": [1, 4, 9, 16, 25]}"#);
    let run = |tag: &str| {
        let csv = ws.path(&format!("{tag}.csv"));
        let out = cournot(&[
            "simulate",
            "--input",
            p(&spec),
            "--seed",
            "7",
            "--output",
            p(&csv),
        ]);
        (out.stdout, fs::read(csv).unwrap())
    };
    assert_eq!(run("a"), run("b"));
}
