use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psl2rig"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON on stdout")
}

fn keys(v: &Value) -> Vec<&str> {
    let mut k: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    k.sort();
    k
}

fn temp_rep(body: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(body.as_bytes()).unwrap();
    f
}

#[test]
fn rot_of_quarter_turn_is_pi() {
    let out = run(&["rot", "--matrix", "0,1,-1,0"]);
    assert_eq!(code(&out), 0);
    let v: f64 = stdout(&out).trim().parse().unwrap();
    assert!((v - std::f64::consts::PI).abs() < 1e-12);
    let out = run(&["rot", "--matrix", "0,1,-1,0", "--json"]);
    assert!((json(&out)["rotation_number"].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-12);
}

#[test]
fn check_same_file_certifies_with_identity() {
    let base = fixture("base.json");
    let out = run(&["check", "--rep1", &base, "--rep2", &base, "--json"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert_eq!(doc["verdict"]["kind"], "certificate");
    let g = &doc["verdict"]["g"];
    let id = [[1.0, 0.0], [0.0, 1.0]];
    for i in 0..2 {
        for j in 0..2 {
            assert!((g[i][j].as_f64().unwrap() - id[i][j]).abs() < 1e-8);
        }
    }
}

#[test]
fn check_recovers_planted_conjugator() {
    let out = run(&[
        "check",
        "--rep1",
        &fixture("base.json"),
        "--rep2",
        &fixture("conjugated.json"),
        "--json",
    ]);
    assert_eq!(code(&out), 0);
    let g = &json(&out)["verdict"]["g"];
    let k = [[1.0, 1.0], [0.0, 1.0]];
    for i in 0..2 {
        for j in 0..2 {
            assert!((g[i][j].as_f64().unwrap() - k[i][j]).abs() < 1e-8);
        }
    }
}

#[test]
fn exit_codes_partition_outcomes() {
    let base = fixture("base.json");
    let witness = run(&["check", "--rep1", &base, "--rep2", &fixture("different.json"), "--json"]);
    assert_eq!(code(&witness), 1);
    let doc = json(&witness);
    assert_eq!(doc["verdict"]["kind"], "witness");
    assert_eq!(doc["verdict"]["word"], "ab");

    let para = fixture("parabolic.json");
    let inconclusive = run(&["check", "--rep1", &para, "--rep2", &para]);
    assert_eq!(code(&inconclusive), 2);
    assert!(stdout(&inconclusive).starts_with("inconclusive"));

    let singular = run(&["classify", "--rep1", &fixture("singular.json"), "--word", "a"]);
    assert_eq!(code(&singular), 3);
    assert!(String::from_utf8_lossy(&singular.stderr).contains("generators[0].matrix"));

    assert_eq!(code(&run(&["check", "--rep1", "/nonexistent.json", "--rep2", &base])), 3);
    assert_eq!(code(&run(&["rot", "--matrix", "1,2,3"])), 3);
    assert_eq!(code(&run(&["rot", "--bogus"])), 3);
    assert_eq!(code(&run(&["fuzz", "--mode", "sideways"])), 3);
    assert_eq!(code(&run(&["rot", "--rep1", &base, "--word", "c"])), 3);
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
}

#[test]
fn tracecheck_exit_codes() {
    let base = fixture("base.json");
    assert_eq!(code(&run(&["tracecheck", "--rep1", &base, "--rep2", &fixture("conjugated.json")])), 0);
    let out = run(&[
        "tracecheck",
        "--rep1",
        &base,
        "--rep2",
        &fixture("different.json"),
        "--word",
        "a",
        "--json",
    ]);
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["within_tolerance"], false);
}

#[test]
fn renormalize_flag_scales_files() {
    let f = temp_rep(r#"{"name": "scalar", "generators": [{"label": "a", "matrix": [[2, 0], [0, 2]]}]}"#);
    let path = f.path().to_str().unwrap();
    assert_eq!(code(&run(&["classify", "--rep1", path, "--word", "a"])), 3);
    let out = run(&["classify", "--rep1", path, "--word", "a", "--renormalize", "--json"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["classification"]["kind"], "identity");
}

#[test]
fn malformed_file_reports_line() {
    let f = temp_rep("{\n  \"name\": \"x\",\n  \"generators\": [\n    {\"label\": \"a\", \"matrix\": [[1, 1], [0, 1]], \"colour\": 1}\n  ]\n}\n");
    let out = run(&["spectrum", "--rep1", f.path().to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains(":4:"), "{err}");
    assert!(err.contains("colour"), "{err}");
}

#[test]
fn fuzz_planted_certifies_every_trial() {
    let out = run(&["fuzz", "--seed", "7", "--count", "100", "--mode", "planted", "--json"]);
    assert_eq!(code(&out), 0);
    let doc = json(&out);
    assert_eq!(doc["certificates"], 100);
    assert_eq!(doc["expectations_met"], 100);
    assert_eq!(doc["trials"].as_array().unwrap().len(), 100);
}

#[test]
fn fuzz_negative_modes_meet_expectations() {
    for mode in ["perturbed", "reflected"] {
        let out = run(&["fuzz", "--seed", "3", "--count", "20", "--mode", mode, "--json"]);
        assert_eq!(code(&out), 0, "{mode}");
        let doc = json(&out);
        assert_eq!(doc["certificates"], 0);
        if mode == "reflected" {
            for t in doc["trials"].as_array().unwrap() {
                assert_eq!(t["direct_solve"], "orientation_reversing");
            }
        }
    }
}

#[test]
fn json_output_is_byte_identical_across_runs() {
    let base = fixture("base.json");
    let runs: [&[&str]; 3] = [
        &["fuzz", "--seed", "11", "--count", "10", "--mode", "perturbed", "--json"],
        &["check", "--rep1", &base, "--rep2", &fixture("conjugated.json"), "--json"],
        &["spectrum", "--rep1", &base, "--radius", "3", "--json"],
    ];
    for args in runs {
        assert_eq!(run(args).stdout, run(args).stdout, "{args:?}");
    }
}

#[test]
fn verdict_document_has_the_documented_fields_and_round_trips() {
    let out = run(&["check", "--rep1", &fixture("base.json"), "--rep2", &fixture("conjugated.json"), "--json"]);
    let text = stdout(&out);
    let doc: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(keys(&doc), ["provenance", "verdict"]);
    assert_eq!(
        keys(&doc["verdict"]),
        ["corpus_radius", "g", "kind", "max_corpus_trace_deviation", "max_generator_residual"]
    );
    assert_eq!(keys(&doc["provenance"]), ["corpus_radius", "gamma0_word", "params", "theta"]);
    assert_eq!(
        keys(&doc["provenance"]["params"]),
        ["corpus_radius", "irrational_delta", "irrational_q", "search_radius", "tol"]
    );
    let again: Value = serde_json::from_str(&serde_json::to_string(&doc).unwrap()).unwrap();
    assert_eq!(again, doc);
}

#[test]
fn other_subcommands() {
    let base = fixture("base.json");
    let out = run(&["jorgensen", "--matrix", "1,2,0,1", "--matrix", "1,0,2,1"]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim(), "16");
    assert_eq!(code(&run(&["jorgensen", "--rep1", &fixture("parabolic.json")])), 3);

    let out = run(&["find-elliptic", "--rep1", &base, "--json"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["word"], "a");
    assert_eq!(code(&run(&["find-elliptic", "--rep1", &fixture("parabolic.json")])), 2);

    let out = run(&["elementary", "--rep1", &base, "--json"]);
    assert_eq!(json(&out)["kind"], "non_elementary");

    let out = run(&["oracle", "--matrix", "0.5,1,-0.75,0.5", "--iters", "20000", "--json"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["agrees"], true);

    let out = run(&["spectrum", "--rep1", &base, "--radius", "1"]);
    let lines: Vec<String> = stdout(&out).lines().map(String::from).collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[0].starts_with("1\t"));
}
