use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_genus-weil"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn read(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn gen_instance_reports_inventory_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "gen-instance",
        "--supersingular",
        "101",
        "--plant",
        "--seed",
        "7",
    ];
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let mut full = args.to_vec();
        full.extend(["--out", path.to_str().unwrap()]);
        assert_eq!(code(&run(&full, dir.path())), 0);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let v = read(&a);
    assert_eq!(v["instance"]["D"], "404");
    assert_eq!(
        v["inventory"]["assigned"],
        serde_json::json!(["chi_101", "delta"])
    );
    assert_eq!(v["inventory"]["usable"], serde_json::json!(["delta"]));
}

#[test]
fn infeasible_parameters_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&run(
            &["gen-instance", "--supersingular", "103"],
            dir.path()
        )),
        2
    );
    let out = run(
        &[
            "gen-instance",
            "--ordinary",
            "--q-min",
            "101",
            "--q-max",
            "103",
            "--chars",
            "chi_47,chi_43",
            "--budget",
            "20",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 2);
}

#[test]
fn eval_char_matches_planted_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let pair = dir.path().join("pair.json");
    let out = run(
        &[
            "gen-instance",
            "--supersingular",
            "1009",
            "--plant",
            "--seed",
            "4",
            "--out",
            "pair.json",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let res = dir.path().join("res.json");
    let out = run(
        &[
            "eval-char",
            "--config",
            pair.to_str().unwrap(),
            "--out",
            res.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let v = read(&res);
    let results = v["results"].as_array().unwrap();
    assert_eq!(results.len(), 1);
    assert_eq!(results[0]["matches_oracle"], true);

    // The identity pair gives +1.
    let mut p = read(&pair);
    p["target"] = p["instance"].clone();
    let same = dir.path().join("same.json");
    fs::write(&same, p.to_string()).unwrap();
    let out = run(
        &["eval-char", "--config", "same.json", "--json"],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["results"][0]["value"], 1);
}

#[test]
fn non_coprime_modulus_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    run(
        &[
            "gen-instance",
            "--supersingular",
            "101",
            "--plant",
            "--out",
            "pair.json",
        ],
        dir.path(),
    );
    let out = run(
        &["eval-char", "--config", "pair.json", "--chars", "chi_101"],
        dir.path(),
    );
    assert_eq!(code(&out), 3);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("not coprime"), "{err}");
}

#[test]
fn ddh_experiment_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    run(
        &[
            "gen-instance",
            "--supersingular",
            "101",
            "--out",
            "inst.json",
        ],
        dir.path(),
    );
    let mut reports = Vec::new();
    for name in ["r1.json", "r2.json"] {
        let out = run(
            &[
                "ddh-experiment",
                "--config",
                "inst.json",
                "--trials",
                "24",
                "--seed",
                "5",
                "--csv",
                "log.csv",
                "--out",
                name,
            ],
            dir.path(),
        );
        assert_eq!(code(&out), 0);
        reports.push(fs::read(dir.path().join(name)).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
    let v: Value = serde_json::from_slice(&reports[0]).unwrap();
    assert_eq!(v["false_negatives"], "0");
    assert_eq!(v["oracle_mismatches"], "0");
    let log = fs::read_to_string(dir.path().join("log.csv")).unwrap();
    assert_eq!(log.lines().count(), 25);
    assert!(log.starts_with("trial,mode,guess,oracle,delta_a"));
}

#[test]
fn ddh_rejects_only_trivial_characters() {
    let dir = tempfile::tempdir().unwrap();
    run(
        &[
            "gen-instance",
            "--supersingular",
            "101",
            "--out",
            "inst.json",
        ],
        dir.path(),
    );
    // chi_3 is not assigned for D = 404, so it cannot be evaluated; an
    // empty list is degenerate.
    let out = run(
        &["ddh-experiment", "--config", "inst.json", "--chars", ""],
        dir.path(),
    );
    assert_eq!(code(&out), 2);
}

#[test]
fn sqrt_recover_finds_the_planted_class() {
    let dir = tempfile::tempdir().unwrap();
    run(
        &[
            "gen-instance",
            "--supersingular",
            "1009",
            "--plant",
            "--seed",
            "2",
            "--out",
            "pair.json",
        ],
        dir.path(),
    );
    let out = run(
        &["sqrt-recover", "--config", "pair.json", "--json"],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["correct"], true);
}

#[test]
fn selftest_passes_and_catches_faults() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["selftest"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let out = run(
        &["selftest", "--inject-fault", "inverted-pairing"],
        dir.path(),
    );
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("pairing_matches_line_functions"));
    let out = run(&["selftest", "--inject-fault", "delta-formula"], dir.path());
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("attack_matches_norm_oracle"));
}
