// Copyright 2026 The kaonbell Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn kaonbell(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kaonbell")).args(args).env_remove("KAONBELL_OUT_DIR").output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn json(out: &Output) -> Value {
    assert_eq!(code(out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stdout(out: &Output) -> String {
    assert_eq!(code(out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

// significant digits of a plain or exponent-form decimal
fn significant_digits(token: &str) -> usize {
    let mantissa = token.trim_start_matches('-').split(['e', 'E']).next().unwrap();
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let digits = digits.trim_start_matches('0');
    let digits = if mantissa.contains('.') { digits } else { digits.trim_end_matches('0') };
    digits.len()
}

fn numbers_in(text: &str) -> Vec<String> {
    text.split(|c: char| !(c.is_ascii_digit() || matches!(c, '.' | '-' | 'e' | 'E' | '+')))
        .filter(|t| t.parse::<f64>().is_ok())
        .map(str::to_string)
        .collect()
}

#[test]
fn json_outputs_carry_metadata() {
    let v = json(&kaonbell(&["bell-eval", "--state", "chi"]));
    let meta = &v["metadata"];
    assert_eq!(meta["command"], "bell-eval");
    assert_eq!(meta["preset"], "kaon-paper");
    assert_eq!(meta["delta_m"], 0.5);
    assert!(meta["version"].is_string() && meta["seed"].is_u64());
    let s = v["result"]["S"].as_f64().unwrap();
    assert!((s - 2.1596).abs() < 0.03, "{s}");
    assert_eq!(v["result"]["violation"], true);
}

#[test]
fn csv_outputs_start_with_metadata() {
    let text = stdout(&kaonbell(&["trajectory", "--state", "psi-", "--t-end", "1", "--step", "0.25"]));
    let (header, body): (Vec<&str>, Vec<&str>) = text.lines().partition(|l| l.starts_with('#'));
    assert!(header.contains(&"# command: trajectory"));
    assert!(header.contains(&"# state: psi-"));
    assert_eq!(body[0], "t,purity_norm,concurrence_raw,concurrence_renorm");
    assert_eq!(body.len(), 6);
    assert!(text.starts_with("# tool: kaonbell"));
}

#[test]
fn numbers_have_at_most_twelve_significant_digits() {
    for args in [
        &["evolve-single", "--initial", "k0bar", "--t", "3.3"][..],
        &["concurrence", "--state", "chi", "--t-l", "0.7", "--t-r", "1.9"],
        &["curves", "--which", "mems", "--points", "7"],
        &["purity-scan", "--initial", "ks", "--t-end", "1", "--step", "0.1"],
    ] {
        let text = stdout(&kaonbell(args));
        for n in numbers_in(&text) {
            assert!(significant_digits(&n) <= 12, "{args:?}: {n}");
        }
    }
}

#[test]
fn outputs_are_byte_identical_for_the_same_seed() {
    let args = ["bell-optimize", "--free-phases", "--starts", "8", "--budget", "2000", "--seed", "5"];
    let a = stdout(&kaonbell(&args));
    let b = stdout(&kaonbell(&[&args[..], &["--threads", "1"]].concat()));
    let c = stdout(&kaonbell(&[&args[..], &["--threads", "3"]].concat()));
    assert_eq!(a, b);
    assert_eq!(a, c);
    let other = stdout(&kaonbell(&[
        "bell-optimize",
        "--free-phases",
        "--starts",
        "8",
        "--budget",
        "2000",
        "--seed",
        "6",
    ]));
    assert_ne!(a, other);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&kaonbell(&[])), 2);
    assert_eq!(code(&kaonbell(&["no-such-command"])), 2);
    assert_eq!(code(&kaonbell(&["--preset", "kaon-x", "concurrence"])), 2);
    assert_eq!(code(&kaonbell(&["--preset", "custom", "concurrence"])), 2);
    assert_eq!(code(&kaonbell(&["bell-eval", "--times", "1,2"])), 2);
    assert_eq!(code(&kaonbell(&["bell-eval", "--state", "psi-"])), 2);
    assert_eq!(code(&kaonbell(&["expectation", "--left", "k0"])), 2);
    assert_eq!(code(&kaonbell(&["--threads", "0", "concurrence"])), 2);
    // numerical domain violations
    assert_eq!(code(&kaonbell(&["concurrence", "--t-l", "-1"])), 1);
    assert_eq!(code(&kaonbell(&["trajectory", "--step", "0"])), 1);
    assert_eq!(code(&kaonbell(&["--delta-m", "-0.5", "concurrence"])), 2);
    assert_eq!(code(&kaonbell(&["--help"])), 0);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.toml", "preset = \"b-meson\"\nseed = 9\n");
    let v = json(&kaonbell(&["--config", &cfg, "concurrence"]));
    assert_eq!(v["metadata"]["preset"], "b-meson");
    assert_eq!(v["metadata"]["seed"], 9);
    assert_eq!(v["metadata"]["delta_m"], 0.77);

    let v = json(&kaonbell(&["--config", &cfg, "--preset", "kaon-pdg", "--seed", "1", "concurrence"]));
    assert_eq!(v["metadata"]["preset"], "kaon-pdg");
    assert_eq!(v["metadata"]["seed"], 1);

    let v = json(&kaonbell(&["--config", &cfg, "--delta-m", "0.5", "concurrence"]));
    assert_eq!(v["metadata"]["preset"], "b-meson+overrides");

    let bad = write(dir.path(), "bad.toml", "preset = \"b-meson\"\ncolour = 3\n");
    assert_eq!(code(&kaonbell(&["--config", &bad, "concurrence"])), 2);
    let nested = write(dir.path(), "nested.toml", "[physics]\ndelta_m = 0.5\n");
    assert_eq!(code(&kaonbell(&["--config", &nested, "concurrence"])), 2);
    assert_eq!(code(&kaonbell(&["--config", "/nonexistent/run.toml", "concurrence"])), 2);
}

#[test]
fn output_directory_from_env_overrides_config() {
    let env_dir = tempfile::tempdir().unwrap();
    let cfg_dir = tempfile::tempdir().unwrap();
    let cfg = write(cfg_dir.path(), "run.toml", &format!("out_dir = {:?}\n", cfg_dir.path().join("out")));

    let run = |env: Option<&Path>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_kaonbell"));
        cmd.args(["--config", &cfg, "curves", "--which", "werner", "--points", "5", "--out", "sub/w.csv"]);
        match env {
            Some(dir) => cmd.env("KAONBELL_OUT_DIR", dir),
            None => cmd.env_remove("KAONBELL_OUT_DIR"),
        };
        let out = cmd.output().unwrap();
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        assert!(out.stdout.is_empty());
    };

    run(None);
    let from_cfg = std::fs::read_to_string(cfg_dir.path().join("out/sub/w.csv")).unwrap();
    run(Some(env_dir.path()));
    let from_env = std::fs::read_to_string(env_dir.path().join("sub/w.csv")).unwrap();
    assert_eq!(from_cfg, from_env);
    assert!(from_env.contains("# curve: werner"));
}

#[test]
fn reproduce_strict_fails_on_failed_checks() {
    let dir = tempfile::tempdir().unwrap();
    // a starved optimizer cannot reach the reference violation
    let cfg = write(dir.path(), "tiny.toml", "starts = 1\nbudget = 10\nsamples = 5\n");
    let lax = kaonbell(&["--config", &cfg, "reproduce"]);
    assert_eq!(code(&lax), 0);
    assert!(String::from_utf8_lossy(&lax.stdout).contains("FAIL"));
    assert_eq!(code(&kaonbell(&["--config", &cfg, "reproduce", "--strict"])), 1);
}

#[test]
fn matrix_and_closed_paths_agree() {
    let base =
        ["expectation", "--r", "0.3,-0.5,0.2,0.7", "--phi=0.4,-1.1,0.9,0", "--t-l", "1.3", "--t-r", "0.4"];
    let closed = json(&kaonbell(&base));
    let matrix = json(&kaonbell(&[&base[..], &["--path", "matrix"]].concat()));
    let (a, b) = (closed["result"]["E"].as_f64().unwrap(), matrix["result"]["E"].as_f64().unwrap());
    assert!((a - b).abs() < 1e-10);
}

#[test]
fn s_curve_uses_reference_or_optimized_times() {
    let text = stdout(&kaonbell(&["curves", "--which", "s", "--state", "xi", "--points", "4"]));
    assert!(text.contains("# times_opt: 0,0,5.77,5.77"));
    let text = stdout(&kaonbell(&["curves", "--which", "s", "--state", "phi-", "--points", "4"]));
    assert!(text.contains("# times_origin: optimized"));
    let last = text.lines().last().unwrap();
    assert_eq!(last.split(',').count(), 6);
}

// Keeps docs/output.schema.json in step with the emitted keys.
#[test]
fn outputs_match_the_schema_property_lists() {
    let schema: Value =
        serde_json::from_str(include_str!("../../../docs/output.schema.json")).expect("schema is valid JSON");
    let defs = &schema["$defs"];
    let keys = |v: &Value| -> Vec<String> {
        let mut k: Vec<String> = v.as_object().unwrap().keys().cloned().collect();
        k.sort();
        k
    };
    let required = |v: &Value| -> Vec<String> {
        let mut k: Vec<String> =
            v["required"].as_array().unwrap().iter().map(|x| x.as_str().unwrap().into()).collect();
        k.sort();
        k
    };
    for (def, args) in [
        ("evolveSingle", &["evolve-single"][..]),
        ("expectation", &["expectation"]),
        ("concurrence", &["concurrence"]),
        ("bellEval", &["bell-eval"]),
        ("bellOptimize", &["bell-optimize", "--starts", "2", "--budget", "100"]),
    ] {
        let doc = json(&kaonbell(args));
        assert_eq!(keys(&doc), ["metadata", "result"]);
        assert_eq!(keys(&doc["result"]), required(&defs[def]), "{def}");
        assert_eq!(keys(&doc["result"]), keys(&defs[def]["properties"]), "{def}");
        let meta = keys(&doc["metadata"]);
        assert!(required(&defs["metadata"]).iter().all(|k| meta.contains(k)), "{def}");
    }
}

#[test]
fn alternative_flag_spellings() {
    let dir = tempfile::tempdir().unwrap();
    let file =
        write(dir.path(), "state.json", r#"{"r": [-0.8335, -0.2446, -0.2446, 0.4308], "phi": [0, 0, 0, 0]}"#);
    let from_file = json(&kaonbell(&["expectation", "--state", &file, "--tl", "1", "--tr", "2"]));
    let named = json(&kaonbell(&["expectation", "--state", "xi", "--t-l", "1", "--t-r", "2"]));
    assert_eq!(from_file["result"], named["result"]);
    let broken = write(dir.path(), "broken.json", r#"{"r": [1, 0, 0]}"#);
    assert_eq!(code(&kaonbell(&["expectation", "--state", &broken])), 2);

    let a = json(&kaonbell(&["evolve-single", "--initial", "K0bar", "--offdiag", "formal-X"]));
    assert_eq!(a["metadata"]["mode"], "formal-x");
    let custom = ["evolve-single", "--initial", "custom", "--rho-ss", "0.5", "--rho-sl=0.2,-0.1"];
    assert_eq!(json(&kaonbell(&custom))["result"]["total_trace"], 1.0);
    assert_eq!(code(&kaonbell(&["evolve-single", "--initial", "custom"])), 2);

    let by_steps = stdout(&kaonbell(&["purity-scan", "--t-max", "2", "--steps", "4"]));
    let by_step = stdout(&kaonbell(&["purity-scan", "--t-end", "2", "--step", "0.5"]));
    assert_eq!(by_steps, by_step);
    assert_eq!(by_step.lines().filter(|l| !l.starts_with('#')).count(), 6);

    let w = json(&kaonbell(&["concurrence", "--state", "chi", "--tl", "0.5", "--method", "closed"]));
    assert!(
        (w["result"]["concurrence"].as_f64().unwrap() - w["result"]["concurrence_raw"].as_f64().unwrap())
            .abs()
            < 1e-10
    );
}
