use std::path::Path;
use std::process::{Command, Output};

use mfb_core::sim::{simulate, DgpSpec, Model};
use serde_json::Value;

fn mfb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mfb"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(
        o.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_series(dir: &Path, name: &str, model: Model, len: usize, seed: u64) -> String {
    let y = simulate(&DgpSpec::new(model, len), seed).unwrap();
    let text: String = y.values().iter().map(|v| format!("{v}\n")).collect();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn reports(json: &str) -> Vec<Value> {
    let v: Value = serde_json::from_str(json).unwrap();
    v["reports"].as_array().unwrap().clone()
}

#[test]
fn battery_json_schema_on_white_noise() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_series(dir.path(), "noise.csv", Model::N1, 500, 1);
    let out = stdout(&mfb(&[
        "test",
        &path,
        "--out",
        "json",
        "--ljung-box",
        "5,10",
    ]));
    let rows = reports(&out);
    assert_eq!(rows.len(), 5 * 3 + 2 + 1);
    for r in &rows {
        let obj = r.as_object().unwrap();
        let mut keys: Vec<&str> = obj.keys().map(String::as_str).collect();
        keys.sort_unstable();
        assert_eq!(
            keys,
            [
                "df",
                "m_or_K",
                "notes",
                "p_value",
                "reject_at_05",
                "statistic",
                "test",
                "variant",
                "wavelet"
            ]
        );
    }
    // 15 joint cells under the null: a handful of rejections at most
    let rejections = rows[..15]
        .iter()
        .filter(|r| r["reject_at_05"] == true)
        .count();
    assert!(rejections <= 4, "{rejections} rejections");
}

#[test]
fn strong_dependence_is_rejected_at_every_scale() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_series(
        dir.path(),
        "ar.csv",
        Model::Ar { lag: 1, beta: 0.5 },
        1000,
        2,
    );
    let out = stdout(&mfb(&[
        "test",
        &path,
        "--variant",
        "g",
        "--no-aq",
        "--out",
        "json",
    ]));
    let rows = reports(&out);
    assert_eq!(rows.len(), 5);
    for r in rows {
        assert!(r["p_value"].as_f64().unwrap() < 1e-3, "{r}");
    }
}

#[test]
fn prices_with_dates_and_log_returns() {
    let dir = tempfile::tempdir().unwrap();
    let y = simulate(&DgpSpec::new(Model::N1, 80), 3).unwrap();
    let mut text = String::from("date,close\n");
    let mut price = 100.0f64;
    let start = chrono::NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
    for (i, e) in y.values().iter().enumerate() {
        price *= (0.01 * e).exp();
        text.push_str(&format!(
            "{},{price}\n",
            start + chrono::Days::new(i as u64)
        ));
    }
    let path = dir.path().join("prices.csv");
    std::fs::write(&path, text).unwrap();
    let p = path.to_str().unwrap();
    let all = stdout(&mfb(&[
        "test",
        p,
        "--transform",
        "log_return_100",
        "--out",
        "json",
    ]));
    let v: Value = serde_json::from_str(&all).unwrap();
    assert_eq!(v["observations"], 79);
    let window = stdout(&mfb(&[
        "test",
        p,
        "--transform",
        "log_return_100",
        "--start",
        "2020-01-11",
        "--end",
        "2020-02-19",
        "--out",
        "json",
    ]));
    let v: Value = serde_json::from_str(&window).unwrap();
    assert_eq!(v["observations"], 39);
    let empty = mfb(&["test", p, "--start", "2030-01-01"]);
    assert!(!empty.status.success());
    assert!(String::from_utf8_lossy(&empty.stderr).contains("no observations left"));
}

#[test]
fn malformed_input_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    let mut text: String = (0..40).map(|i| format!("{i}.5\n")).collect();
    text.push_str("oops\n");
    std::fs::write(&path, text).unwrap();
    let o = mfb(&["test", path.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(
        String::from_utf8_lossy(&o.stderr).contains("line 41"),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn table_output_is_rendered_from_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_series(dir.path(), "noise.csv", Model::N2, 300, 4);
    let json_path = dir.path().join("report.json");
    let table = stdout(&mfb(&[
        "test",
        &path,
        "--json",
        json_path.to_str().unwrap(),
        "--scale",
        "1-3",
    ]));
    let saved: mfb_cli::battery::BatteryReport =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(mfb_cli::render::battery_table(&saved), table);
}

const SIZE_CONFIG: &str = r#"
replications = 120
seed = 11
lengths = [100]
models = ["N1", "N2", "N10"]
tests = ["mfb:haar:2:g", "mfb:d4:2:e", "gsm:haar:2:g", "q:5", "aq"]
"#;

#[test]
fn size_study_is_worker_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("size.toml");
    std::fs::write(&cfg, SIZE_CONFIG).unwrap();
    let c = cfg.to_str().unwrap();
    let runs: Vec<String> = ["1", "4", "16"]
        .iter()
        .map(|w| {
            stdout(&mfb(&[
                "simulate",
                "--study",
                "size",
                "--config",
                c,
                "--workers",
                w,
                "--out",
                "csv",
            ]))
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
    assert_eq!(runs[0].lines().count(), 1 + 3 * 5);
    let reseeded = stdout(&mfb(&[
        "simulate", "--study", "size", "--config", c, "--seed", "12", "--out", "csv",
    ]));
    assert_ne!(reseeded, runs[0]);

    let outdir = dir.path().join("out");
    let table = stdout(&mfb(&[
        "simulate",
        "--study",
        "size",
        "--config",
        c,
        "--output-dir",
        outdir.to_str().unwrap(),
    ]));
    assert!(table.starts_with("model"));
    assert_eq!(
        std::fs::read_to_string(outdir.join("size.csv")).unwrap(),
        runs[0]
    );
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(outdir.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["master_seed"], 11);
    assert_eq!(manifest["rng"], "ChaCha8");
}

#[test]
fn power_and_sweep_studies_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("power.toml");
    std::fs::write(
        &cfg,
        r#"
replications = 100
null_replications = 400
lengths = [100]
tests = ["mfb:haar:2:g", "gsm:haar:2:g", "aq"]
models = ["A3(0.2,0.1)"]

[grid]
family = "A1"
beta1 = [0.0]
beta2 = [0.0, 0.3]

[sweep]
lag = 5
betas = [0.0, 0.4]
scales = [1, 4]
"#,
    )
    .unwrap();
    let c = cfg.to_str().unwrap();
    let power: Value = serde_json::from_str(&stdout(&mfb(&[
        "simulate", "--study", "power", "--config", c, "--out", "json",
    ])))
    .unwrap();
    assert_eq!(power["results"].as_array().unwrap().len(), 3 * 3);
    assert_eq!(power["relative"].as_array().unwrap().len(), 3 * 2);
    assert_eq!(power["manifest"]["null_replications"], 400);
    let sweep = stdout(&mfb(&[
        "simulate", "--study", "sweep", "--config", c, "--out", "csv",
    ]));
    assert_eq!(sweep.lines().next(), Some("lag,beta,T,scale,test,power"));
    assert_eq!(sweep.lines().count(), 1 + 2 * 2 * 2);
}

#[test]
fn operational_errors_exit_nonzero() {
    assert!(!mfb(&[
        "simulate",
        "--study",
        "size",
        "--config",
        "/nonexistent.toml"
    ])
    .status
    .success());
    assert!(!mfb(&["filters", "--wavelet", "sym4"]).status.success());
    assert!(!mfb(&["test", "/nonexistent.csv"]).status.success());
}

#[test]
fn filter_dump() {
    let csv = stdout(&mfb(&[
        "filters",
        "--wavelet",
        "haar",
        "--scale",
        "2",
        "--out",
        "csv",
    ]));
    assert!(csv.contains("packet,3,3,"));
    let table = stdout(&mfb(&["filters", "--wavelet", "d10", "--scale", "3"]));
    assert!(table.starts_with("d10 scale 3: 8 bands of 64 taps"));
}
