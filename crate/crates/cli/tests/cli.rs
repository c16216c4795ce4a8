use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_decimarket"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

fn run(config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin()
        .arg("run")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const BASE: &str = r#"
version = 1

[market]
outcomes = [2, 2]
liquidity = 1.0
allow_short = false

[[trades]]
trader = "t"
deltas = [[2.0, 0.0], [0.0, 1.0]]

[decision]
kind = "fixed"
phi = [0.5, 0.5]

[settlement]
seed = 3
draws = 200
"#;

fn write_config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn reference_example_emits_every_table() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let o = run(&scenario("reference_example.toml"), &out, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in [
        "trades.csv",
        "settlement.csv",
        "worst_case.csv",
        "expectations.csv",
        "table3.csv",
        "table4.csv",
        "table5.csv",
        "table6.csv",
        "figure1.csv",
    ] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let t3 = fs::read_to_string(out.join("table3.csv")).unwrap();
    assert!(t3.contains("0,0,2,0.8807970779778823"));
    let t6 = fs::read_to_string(out.join("table6.csv")).unwrap();
    assert!(t6.contains("0,1,0,-2"));
    let fig = fs::read_to_string(out.join("figure1.csv")).unwrap();
    assert_eq!(fig.lines().count(), 100);
}

#[test]
fn identical_seed_gives_identical_bytes() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = run(&scenario("softmax_liability_free.toml"), out, &[]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for f in [
        "trades.csv",
        "settlement.csv",
        "worst_case.csv",
        "expectations.csv",
    ] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f} differs"
        );
    }
}

#[test]
fn seed_flag_overrides_config() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "s.toml", BASE);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run(&cfg, &a, &[]).status.success());
    assert!(run(&cfg, &b, &["--seed", "4"]).status.success());
    assert_eq!(
        fs::read(a.join("trades.csv")).unwrap(),
        fs::read(b.join("trades.csv")).unwrap()
    );
    assert_ne!(
        fs::read(a.join("settlement.csv")).unwrap(),
        fs::read(b.join("settlement.csv")).unwrap()
    );
}

#[test]
fn trade_log_replays_to_identical_settlements() {
    let dir = TempDir::new().unwrap();
    let first = dir.path().join("first");
    let o = run(&scenario("softmax_liability_free.toml"), &first, &[]);
    assert!(o.status.success(), "{}", stderr(&o));

    let original = fs::read_to_string(scenario("softmax_liability_free.toml")).unwrap();
    let mut replay = String::new();
    let mut skipping = false;
    for line in original.lines() {
        if line.starts_with('[') {
            skipping = line == "[[trades]]";
        }
        if !skipping {
            replay.push_str(line);
            replay.push('\n');
        }
    }
    let log = first.join("trades.csv");
    let replay = replay.replacen(
        "version = 1\n",
        &format!("version = 1\nreplay_log = {:?}\n", log.to_str().unwrap()),
        1,
    );
    let cfg = write_config(&dir, "replay.toml", &replay);
    let second = dir.path().join("second");
    let o = run(&cfg, &second, &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["trades.csv", "settlement.csv", "worst_case.csv"] {
        assert_eq!(
            fs::read(first.join(f)).unwrap(),
            fs::read(second.join(f)).unwrap(),
            "{f} differs after replay"
        );
    }
}

#[test]
fn zero_probability_action_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "z.toml", &BASE.replace("[0.5, 0.5]", "[1.0, 0.0]"));
    let o = run(&cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(
        stderr(&o).contains("decision rule must have full support"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn liability_free_needs_shorting() {
    let dir = TempDir::new().unwrap();
    let text = BASE.replace(
        "deltas = [[2.0, 0.0], [0.0, 1.0]]",
        "deltas = [[2.0, 0.0], [0.0, 1.0]]\ntransform = \"liability_free\"",
    );
    let cfg = write_config(&dir, "lf.toml", &text);
    let o = run(&cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("transform requires short selling"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn short_sale_in_no_short_market_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "s.toml", &BASE.replace("[2.0, 0.0]", "[-2.0, 0.0]"));
    let o = run(&cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn syntax_error_reports_line() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "bad.toml",
        &BASE.replace("liquidity = 1.0", "liquidity = ="),
    );
    let o = run(&cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 6"), "{}", stderr(&o));
}

#[test]
fn unknown_field_is_a_parse_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "bad.toml", &BASE.replace("draws", "drawz"));
    let o = run(&cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("drawz"), "{}", stderr(&o));
}

#[test]
fn missing_config_fails() {
    let dir = TempDir::new().unwrap();
    let o = run(&dir.path().join("nope.toml"), &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(1));
}

fn verify(args: &[&str]) -> Output {
    bin().arg("verify").args(args).output().unwrap()
}

#[test]
fn verify_suite_passes() {
    let o = verify(&["--seed", "42", "--instances", "500"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
}

#[test]
fn unscaled_payout_reports_residual() {
    let o = verify(&["--seed", "42", "--instances", "20", "--unscaled-payout"]);
    assert_eq!(o.status.code(), Some(1));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = 0;
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let residual = v["residual"].as_f64().unwrap();
        let term_a = v["check"]["term_a"].as_f64().unwrap();
        assert!((residual - term_a).abs() < 1e-9);
        assert!(v["instance"]["spec"].is_object());
        lines += 1;
    }
    assert!(lines > 0);
}

#[test]
fn zero_instances_is_a_usage_error() {
    assert_eq!(verify(&["--instances", "0"]).status.code(), Some(2));
}
