use std::path::Path;
use std::process::{Command, Output};

fn oac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oac"))
        .args(args)
        .env_remove("OAC_THREADS")
        .output()
        .expect("spawn oac")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn field(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| {
            let (k, v) = l
                .split_once(char::is_whitespace)
                .or_else(|| l.split_once('='))?;
            (k == key).then(|| v.trim().to_string())
        })
        .unwrap_or_else(|| panic!("no {} in\n{}", key, text))
}

#[test]
fn design_exact_rect() {
    let dir = tempfile::tempdir().unwrap();
    let taps = dir.path().join("taps.txt");
    let o = oac(&[
        "design-filter",
        "--pulse",
        "rect",
        "--ns",
        "4",
        "--d",
        "2",
        "--exact",
        "--output",
        taps.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(field(&out, "taps"), "[0, 0, 1, 1]");
    assert_eq!(field(&out, "leading"), "[0, 0]");
    assert_eq!(field(&out, "noise_gain"), "2");
    let written: Vec<f64> = std::fs::read_to_string(&taps)
        .unwrap()
        .lines()
        .map(|l| l.parse().unwrap())
        .collect();
    assert_eq!(written.len(), 4);
    assert!((written[3] - 1.0).abs() < 1e-12);
}

#[test]
fn design_tikhonov_rect() {
    let o = oac(&[
        "design-filter",
        "--pulse",
        "rect",
        "--ns",
        "4",
        "--d",
        "2",
        "--lambda",
        "0.1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(field(&stdout(&o), "taps"), "[0, 0, 0.9375, 0.9375]");
}

#[test]
fn design_matched_and_custom() {
    let o = oac(&[
        "design-filter",
        "--pulse",
        "custom",
        "--taps",
        "0.6,0.8",
        "--d",
        "0",
        "--matched",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(field(&stdout(&o), "taps"), "[0.6, 0.8]");
}

#[test]
fn infeasible_design_exits_with_two() {
    let o = oac(&[
        "design-filter",
        "--pulse",
        "gaussian",
        "--ns",
        "4",
        "--d",
        "3",
        "--exact",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("infeasible"), "{}", err);
    assert!(err.contains("rank=1"), "{}", err);
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(oac(&[]).status.code(), Some(1));
    assert_eq!(oac(&["design-filter", "--ns", "4"]).status.code(), Some(1));
    assert_eq!(
        oac(&[
            "design-filter",
            "--ns",
            "4",
            "--d",
            "1",
            "--exact",
            "--matched"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(oac(&["check"]).status.code(), Some(1));
    assert_eq!(oac(&["--version"]).status.code(), Some(0));
    assert_eq!(oac(&["sweep", "--help"]).status.code(), Some(0));
}

#[test]
fn check_reports() {
    let o = oac(&[
        "check", "--pulse", "rect", "--ns", "8", "--d", "7", "--format", "kv",
    ]);
    let out = stdout(&o);
    assert_eq!(field(&out, "feasible"), "true");
    assert_eq!(field(&out, "rank"), "1");

    let o = oac(&[
        "check", "--pulse", "gaussian", "--ns", "21", "--d", "10", "--format", "kv",
    ]);
    let out = stdout(&o);
    assert_eq!(field(&out, "delay_bound"), "10");
    assert_eq!(field(&out, "sufficient"), "true");

    let o = oac(&["check", "--lemma1", "--format", "kv"]);
    let out = stdout(&o);
    let worst: f64 = field(&out, "lemma1_max_discrepancy").parse().unwrap();
    assert!(worst <= 1e-12);
    assert_eq!(field(&out, "lemma1_ok"), "true");
}

fn csv_rows(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(String::from)
        .collect()
}

#[test]
fn preset_sweep_writes_csv_manifest_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("fig3.csv");
    let svg = dir.path().join("fig3.svg");
    let o = oac(&[
        "sweep",
        "--figure",
        "3",
        "--trials",
        "1000",
        "--seed",
        "7",
        "--output",
        csv.to_str().unwrap(),
        "--plot",
        svg.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&csv);
    assert_eq!(
        rows[0],
        "d,MSE,MSE_mf,bias,bias_mf,se_MSE,se_MSE_mf,se_bias,se_bias_mf"
    );
    assert_eq!(rows.len(), 12);
    let d: Vec<&str> = rows[1..]
        .iter()
        .map(|r| r.split(',').next().unwrap())
        .collect();
    assert_eq!(d, (0..=10).map(|d| d.to_string()).collect::<Vec<_>>());

    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("fig3.csv.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["config"]["trials"], 1000);
    assert_eq!(manifest["config"]["ns_rule"]["offset"], 2);
    assert!(manifest["version"].is_string());

    let plot = std::fs::read_to_string(&svg).unwrap();
    assert!(plot.starts_with("<svg") && plot.trim_end().ends_with("</svg>"));
    assert_eq!(plot.matches("<polyline").count(), 4);
}

#[test]
fn config_sweep_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "devices = 8\nsymbols = 4\ncopies = 3\nd_values = [0, 2]\ntrials = 30\ninclude_unbiased = true\n\n[ns_rule]\nkind = \"fixed\"\nns = 6\n\n[pulse]\nkind = \"rectangular\"\n",
    )
    .unwrap();
    let csv = dir.path().join("out.csv");
    let manifest = dir.path().join("m.json");
    let debug = dir.path().join("dbg.csv");
    let o = oac(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "3",
        "--output",
        csv.to_str().unwrap(),
        "--manifest",
        manifest.to_str().unwrap(),
        "--debug-csv",
        debug.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(csv_rows(&csv).len(), 3);
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(m["config"]["devices"], 8);
    assert_eq!(m["config"]["base_seed"], 3);
    assert_eq!(m["outputs"].as_array().unwrap().len(), 2);
    assert!(csv_rows(&debug)[0].contains("MSE_ub"));
}

#[test]
fn unknown_config_keys_are_listed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "trails = 10\nnoise = 1.0\n").unwrap();
    let o = oac(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("trails") && err.contains("noise"), "{}", err);
}

#[test]
fn sweep_is_byte_identical() {
    let a = oac(&[
        "sweep",
        "--figure",
        "4",
        "--trials",
        "20",
        "--seed",
        "1",
        "--threads",
        "1",
    ]);
    let b = oac(&[
        "sweep",
        "--figure",
        "4",
        "--trials",
        "20",
        "--seed",
        "1",
        "--threads",
        "3",
    ]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn simulate_dumps_one_trial() {
    let o = oac(&[
        "simulate", "--figure", "3", "--d", "2", "--trial", "5", "--seed", "11",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["n_s"], 6);
    assert_eq!(v["received"].as_array().unwrap().len(), 10);
    assert_eq!(v["received"][0].as_array().unwrap().len(), 60);
    assert_eq!(v["matched"]["f_hat"].as_array().unwrap().len(), 10);
    assert!(v["delays"]
        .as_array()
        .unwrap()
        .iter()
        .all(|d| d.as_u64().unwrap() <= 2));
    assert!(v["unbiased"].is_null());
}
