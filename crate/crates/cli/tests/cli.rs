use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn woldkit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_woldkit"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(name)).unwrap()).unwrap()
}

fn fixture(dir: &Path, out: &str, extra: &[&str]) {
    let mut args = vec!["fixture", "--out", out];
    args.extend_from_slice(extra);
    let res = woldkit(dir, &args);
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
}

fn nonzero_blocks(report: &Value) -> Vec<(Vec<u64>, u64)> {
    report["blocks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|b| b["dim"].as_u64().unwrap() > 0)
        .map(|b| {
            let label = b["label"]
                .as_array()
                .unwrap()
                .iter()
                .map(|x| x.as_u64().unwrap())
                .collect();
            (label, b["dim"].as_u64().unwrap())
        })
        .collect()
}

#[test]
fn polydisc_manifest_passes_check() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    fixture(
        dir,
        "p.json",
        &["--preset", "polydisc", "--e", "1", "--D", "3", "--n", "2"],
    );
    assert_eq!(json(dir, "p.json")["ambient_dim"], 9);
    let out = woldkit(dir, &["check", "p.json", "--json", "c.json"]);
    assert_eq!(code(&out), 0);
    let report = json(dir, "c.json");
    assert_eq!(report["status"], "accepted");
    assert!(report["defects"]["double_commutation_defect"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn repeated_shift_is_rejected_everywhere() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    fixture(dir, "r.json", &["--preset", "repeated-shift", "--D", "3", "--n", "2"]);
    let out = woldkit(dir, &["check", "r.json", "--json", "c.json"]);
    assert_eq!(code(&out), 2);
    let dc = json(dir, "c.json")["defects"]["double_commutation_defect"]
        .as_f64()
        .unwrap();
    assert!((dc - 1.0).abs() <= 1e-12, "{dc}");

    let out = woldkit(dir, &["decompose", "r.json", "--json", "d.json"]);
    assert_eq!(code(&out), 2);
    let report = json(dir, "d.json");
    assert_eq!(report["status"], "rejected");
    assert!(report["blocks"].as_array().unwrap().is_empty());

    let out = woldkit(dir, &["verify", "r.json", "--suite", "identities"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stdout).contains("suite skipped"));
}

#[test]
fn malformed_inputs_exit_with_parse_code() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    std::fs::write(dir.join("bad.json"), "{ not json").unwrap();
    assert_eq!(code(&woldkit(dir, &["check", "bad.json"])), 3);
    assert_eq!(code(&woldkit(dir, &["check", "missing.json"])), 3);

    std::fs::write(
        dir.join("ragged.json"),
        r#"{"schema_version":"woldkit/1","ambient_dim":2,"operators":[{"inline":[[[1,0],[0,0]],[[0,0]]]}]}"#,
    )
    .unwrap();
    assert_eq!(code(&woldkit(dir, &["check", "ragged.json"])), 3);

    std::fs::write(
        dir.join("extra.json"),
        r#"{"schema_version":"woldkit/1","ambient_dim":1,"operators":[{"inline":[[[1,0]]]}],"colour":1}"#,
    )
    .unwrap();
    assert_eq!(code(&woldkit(dir, &["check", "extra.json"])), 3);

    std::fs::write(
        dir.join("ext.json"),
        r#"{"schema_version":"woldkit/1","ambient_dim":2,"operators":[{"file":"nowhere.mtx"}]}"#,
    )
    .unwrap();
    assert_eq!(code(&woldkit(dir, &["check", "ext.json"])), 3);
}

#[test]
fn usage_errors_exit_with_parse_code() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    fixture(
        dir,
        "p.json",
        &["--preset", "polydisc", "--e", "1", "--D", "2", "--n", "2"],
    );
    assert_eq!(code(&woldkit(dir, &["decompose", "p.json", "--depth", "0"])), 3);
    assert_eq!(code(&woldkit(dir, &["decompose", "p.json", "--depth", "3"])), 3);
    assert_eq!(code(&woldkit(dir, &["decompose", "p.json", "--residual-tol", "-1"])), 3);
    assert_eq!(code(&woldkit(dir, &["frobnicate"])), 3);
    assert_eq!(code(&woldkit(dir, &["--help"])), 0);
}

#[test]
fn shift_times_unitary_has_one_block() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    fixture(
        dir,
        "su.json",
        &[
            "--preset",
            "shift-unitary",
            "--D",
            "3",
            "--u",
            "2",
            "--seed",
            "4",
            "--scramble",
        ],
    );
    let out = woldkit(dir, &["decompose", "su.json", "--method", "both", "--json", "d.json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let report = json(dir, "d.json");
    assert_eq!(nonzero_blocks(&report), vec![(vec![1], 6)]);
    let worst = report["agreement"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| a["max_angle"].as_f64().unwrap())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-8, "{worst:e}");
    assert!(report.get("timing_ms").is_none());

    let out = woldkit(dir, &["verify", "su.json", "--suite", "identities", "--json", "v.json"]);
    assert_eq!(code(&out), 0);
    let rows = json(dir, "v.json")["rows"].as_array().unwrap().clone();
    for row in &rows {
        let name = row["name"].as_str().unwrap();
        if name.starts_with("condition ") {
            assert_eq!(row["passed"], false, "{name}");
            assert_eq!(row["informational"], true, "{name}");
        } else if row["informational"] == false {
            assert_eq!(row["passed"], true, "{name}");
        }
    }
}

#[test]
fn depth_one_runs_the_classical_decomposition() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    fixture(dir, "m.json", &["--preset", "slocinski-mixed", "--oracle", "o.json"]);
    let out = woldkit(
        dir,
        &[
            "decompose",
            "m.json",
            "--depth",
            "1",
            "--oracle",
            "o.json",
            "--json",
            "d.json",
        ],
    );
    assert_eq!(code(&out), 0);
    let report = json(dir, "d.json");
    assert_eq!(report["method"], "wold");
    assert_eq!(nonzero_blocks(&report), vec![(vec![], 3), (vec![1], 6)]);
    assert_eq!(report["oracle"]["matches"], true);
}

#[test]
fn all_unitary_tuple_is_a_single_block() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let spec = r#"{"n":2,"blocks":[{"label":[],"atoms":[
        {"unitary":{"dim":3,"unitary":{"kind":"circular"}}},
        {"unitary":{"dim":2,"unitary":{"kind":"random","seed":7}}}],"multiplicity":1}]}"#;
    std::fs::write(dir.join("spec.json"), spec).unwrap();
    fixture(dir, "u.json", &["--spec", "spec.json"]);
    let out = woldkit(dir, &["decompose", "u.json", "--json", "d.json"]);
    assert_eq!(code(&out), 0);
    assert_eq!(nonzero_blocks(&json(dir, "d.json")), vec![(vec![], 6)]);
}

#[test]
fn oracle_mismatch_is_unresolved() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    fixture(dir, "m.json", &["--preset", "slocinski-mixed", "--oracle", "o.json"]);
    let mut oracle = json(dir, "o.json");
    let blocks = oracle["blocks"].as_array_mut().unwrap();
    let (a, b) = (blocks[0]["dim"].clone(), blocks[1]["dim"].clone());
    blocks[0]["dim"] = b;
    blocks[1]["dim"] = a;
    std::fs::write(dir.join("wrong.json"), oracle.to_string()).unwrap();
    let out = woldkit(
        dir,
        &["decompose", "m.json", "--oracle", "wrong.json", "--json", "d.json"],
    );
    assert_eq!(code(&out), 4);
    let report = json(dir, "d.json");
    assert_eq!(report["status"], "unresolved");
    assert_eq!(report["oracle"]["matches"], false);
}

#[test]
fn dimension_cap_exits_five_without_writing() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let out = woldkit(
        dir,
        &[
            "fixture",
            "--preset",
            "polydisc",
            "--e",
            "2",
            "--D",
            "4",
            "--n",
            "3",
            "--dim-cap",
            "100",
            "--out",
            "big.json",
            "--oracle",
            "o.json",
        ],
    );
    assert_eq!(code(&out), 5);
    assert!(!dir.join("big.json").exists());
    assert!(!dir.join("o.json").exists());
}

#[test]
fn polydisc_satisfies_every_equivalence_condition() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    fixture(
        dir,
        "p.json",
        &[
            "--preset",
            "polydisc",
            "--e",
            "2",
            "--D",
            "3",
            "--n",
            "2",
            "--scramble",
            "--seed",
            "8",
        ],
    );
    let out = woldkit(dir, &["verify", "p.json", "--suite", "equivalence", "--json", "v.json"]);
    assert_eq!(code(&out), 0);
    let rows = json(dir, "v.json")["rows"].as_array().unwrap().clone();
    let conditions: Vec<&Value> = rows
        .iter()
        .filter(|r| r["name"].as_str().unwrap().starts_with("condition "))
        .collect();
    assert_eq!(conditions.len(), 5);
    assert!(conditions.iter().all(|r| r["passed"] == true));

    for suite in ["wold", "multi", "identities"] {
        let out = woldkit(dir, &["verify", "p.json", "--suite", suite]);
        assert_eq!(code(&out), 0, "{suite}: {}", String::from_utf8_lossy(&out.stdout));
    }
}

#[test]
fn fixtures_are_byte_deterministic() {
    let tmp = TempDir::new().unwrap();
    for run in ["a", "b"] {
        let dir = tmp.path().join(run);
        std::fs::create_dir(&dir).unwrap();
        fixture(
            &dir,
            "m.json",
            &[
                "--preset",
                "random",
                "--n",
                "2",
                "--seed",
                "12",
                "--scramble",
                "--matrix-format",
                "array",
                "--oracle",
                "o.json",
            ],
        );
    }
    for name in ["m.json", "o.json", "m.v1.mtx", "m.v2.mtx", "m.interior.mtx"] {
        let a = std::fs::read(tmp.path().join("a").join(name)).unwrap();
        let b = std::fs::read(tmp.path().join("b").join(name)).unwrap();
        assert!(a == b, "{name} differs");
    }
    assert_eq!(
        json(&tmp.path().join("a"), "m.json")["operators"][0]["file"],
        "m.v1.mtx"
    );
}
