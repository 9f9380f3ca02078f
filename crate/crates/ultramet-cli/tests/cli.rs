//! End-to-end runs of the binary: worked examples, exit code classes, the
//! schema contract for --json output, and re-parseability of printed values.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use ultramet::io;
use ultramet::magnitude::Magnitude;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ultramet"))
}

fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, content).unwrap();
    path
}

/// Runs the binary with `args`, returning (exit code, stdout, stderr).
fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().unwrap();
    (
        out.status.code().expect("no exit code"),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn schema() -> jsonschema::Validator {
    let text = fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/report.schema.json"),
    )
    .unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

fn check_schema(validator: &jsonschema::Validator, doc: &Value) {
    if let Err(e) = validator.validate(doc) {
        panic!("schema violation: {e}\nin {doc}");
    }
}

/// Standard fixture files shared by the tests below.
fn fixtures(dir: &Path) {
    write(dir, "std1.json", r#"{"field":{"backend":"padic","prime":2},"weights":["1"]}"#);
    write(dir, "w.json", r#"{"field":{"backend":"padic","prime":2},"weights":["1","2^-1/2"]}"#);
    write(dir, "v.json", r#"[["1","0"],["0","1"]]"#);
    write(dir, "probe.json", r#"[["3","5"]]"#);
    write(dir, "sub.json", r#"{"span":[["1","1"]]}"#);
    write(dir, "x1.json", r#"{"span":[["1","0"]]}"#);
    write(dir, "y2.json", r#"{"span":[["1","0"],["0","1"]]}"#);
    write(dir, "im.json", r#"[["1","0"],["0","2"]]"#);
    write(dir, "z.json", r#"[["1","0"],["0","3"]]"#);
    write(
        dir,
        "h.json",
        r#"{"field":{"backend":"hahn","prime":2,"tail_order":"6"},"weights":["1","2^-1/2","1"]}"#,
    );
    write(dir, "hx.json", r#"{"span":[["t^(0)","0","0"]]}"#);
    // Q_2^2 -> Q_2^3 patching instance: f(a, b) = (a, 2a, b), j(e1) = e1
    write(dir, "q22.json", r#"{"field":{"backend":"padic","prime":2},"weights":["1","1"]}"#);
    write(dir, "q23.json", r#"{"field":{"backend":"padic","prime":2},"weights":["1","1","1"]}"#);
    write(dir, "fim.json", r#"[["1","2","0"],["0","0","1"]]"#);
    write(dir, "jb.json", r#"[["1","0"]]"#);
    write(dir, "jim.json", r#"[["1","0","0"]]"#);
}

#[test]
fn gap_worked_example_yields_the_pinned_certificate() {
    let dir = tempfile::tempdir().unwrap();
    fixtures(dir.path());
    let std1 = dir.path().join("std1.json");
    let (code, stdout, _) = run(&[
        "certify-gap", "--prime", "2", "--s", "3/4", "--epsilon", "1/4",
        "--space", std1.to_str().unwrap(), "--json",
    ]);
    assert_eq!(code, 0);
    let doc: Value = serde_json::from_str(&stdout).unwrap();
    check_schema(&schema(), &doc);
    assert_eq!(doc["status"], "ok");
    let cert = &doc["result"]["Certificate"];
    assert_eq!(cert["gap"], serde_json::json!(["2^-1", "1"]));
    assert_eq!(cert["interval"], serde_json::json!(["2^-4*3^2", "2^-4*3^1*5^1"]));

    // the same request over the densely valued backend finds no gap
    let (code, stdout, _) = run(&[
        "certify-gap", "--prime", "2", "--backend", "hahn", "--s", "3/4",
        "--epsilon", "1/4", "--json",
    ]);
    assert_eq!(code, 0);
    let doc: Value = serde_json::from_str(&stdout).unwrap();
    check_schema(&schema(), &doc);
    assert!(doc["result"]["NoGap"].is_object(), "{doc}");
}

#[test]
fn defect_of_the_unit_base_is_one() {
    let dir = tempfile::tempdir().unwrap();
    fixtures(dir.path());
    let (code, stdout, _) = run(&[
        "defect",
        "--space", dir.path().join("w.json").to_str().unwrap(),
        "--vectors", dir.path().join("v.json").to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(stdout.trim(), "t* = 1");
}

#[test]
fn verify_report_file_matches_the_library_golden() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let (code, stdout, _) = run(&[
        "verify", "--suite", "l-ort", "--seed", "42", "--cases", "12",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("suite l-ort: 12/12 passed"));

    let mut written: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    check_schema(&schema(), &written);
    written[0]["wall_ms"] = 0.into();
    let golden_path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../ultramet/tests/golden/l-ort-seed42.json");
    let golden: Value =
        serde_json::from_str(&fs::read_to_string(golden_path).unwrap()).unwrap();
    assert_eq!(written[0], golden);
}

#[test]
fn exit_codes_separate_the_error_classes() {
    let dir = tempfile::tempdir().unwrap();
    fixtures(dir.path());
    let p = |n: &str| dir.path().join(n).to_string_lossy().into_owned();

    // 2: malformed input
    let bad = write(dir.path(), "bad.json", "not json");
    let (code, _, stderr) = run(&["norm", "--space", bad.to_str().unwrap(), "--vectors", &p("v.json")]);
    assert_eq!(code, 2, "{stderr}");

    // 2: usage errors from the argument parser
    let (code, _, _) = run(&["frobnicate"]);
    assert_eq!(code, 2);

    // 3: truncated-series cancellation
    write(dir.path(), "htail.json", r#"{"field":{"backend":"hahn","prime":2,"tail_order":"2"},"weights":["1"]}"#);
    write(dir.path(), "hspan.json", r#"{"span":[["t^(0)+t^(1)+O(t^(2))"]]}"#);
    write(dir.path(), "hv.json", r#"[["t^(0)+t^(1)+O(t^(2))"]]"#);
    let (code, _, stderr) = run(&[
        "dist", "--space", &p("htail.json"), "--vectors", &p("hv.json"),
        "--subspace", &p("hspan.json"),
    ]);
    assert_eq!(code, 3, "{stderr}");

    // 4: hypothesis violations, with a schema-conforming error envelope
    let (code, stdout, _) = run(&[
        "eps-iso", "--space", &p("w.json"), "--subspace", &p("x1.json"),
        "--epsilon", "1/4", "--json",
    ]);
    assert_eq!(code, 4);
    let doc: Value = serde_json::from_str(&stdout).unwrap();
    check_schema(&schema(), &doc);
    assert_eq!(doc["status"], "error");
    assert_eq!(doc["error"]["class"], "hypothesis");
    assert_eq!(doc["error"]["exit"], 4);
}

#[test]
fn printed_values_reparse_identically() {
    let dir = tempfile::tempdir().unwrap();
    fixtures(dir.path());
    let p = |n: &str| dir.path().join(n).to_string_lossy().into_owned();
    let space = io::parse_space(&fs::read_to_string(dir.path().join("w.json")).unwrap()).unwrap();

    let (code, stdout, _) = run(&["norm", "--space", &p("w.json"), "--vectors", &p("probe.json")]);
    assert_eq!(code, 0);
    for line in stdout.trim().lines() {
        let m: Magnitude = line.parse().unwrap();
        assert_eq!(m.to_string(), line);
    }

    let (code, stdout, _) = run(&[
        "orth", "--space", &p("w.json"), "--vectors", &p("v.json"), "--json",
    ]);
    assert_eq!(code, 0);
    let doc: Value = serde_json::from_str(&stdout).unwrap();
    let base = serde_json::to_string(&doc["result"]["base"]).unwrap();
    let reparsed = io::parse_vectors(&base, &space).unwrap();
    assert_eq!(io::vectors_json(&reparsed).split_whitespace().collect::<String>(),
        base.split_whitespace().collect::<String>());
}

#[test]
fn every_subcommand_emits_a_schema_conforming_envelope() {
    let dir = tempfile::tempdir().unwrap();
    fixtures(dir.path());
    let p = |n: &str| dir.path().join(n).to_string_lossy().into_owned();
    let report = p("report.json");
    let stream = write(dir.path(), "stream.json", r#"["2^-1/4","2^-1/3","2^-3/8","2^-2/5","2^-5/12"]"#);

    let invocations: Vec<Vec<String>> = vec![
        vec!["norm".into(), "--space".into(), p("w.json"), "--vectors".into(), p("v.json")],
        vec!["orth".into(), "--space".into(), p("w.json"), "--vectors".into(), p("v.json")],
        vec!["dist".into(), "--space".into(), p("w.json"), "--vectors".into(), p("probe.json"), "--subspace".into(), p("sub.json")],
        vec!["defect".into(), "--space".into(), p("w.json"), "--vectors".into(), p("v.json")],
        vec!["extend-base".into(), "--space".into(), p("w.json"), "--vectors".into(), p("x1span.json"), "--t".into(), "1".into()],
        vec!["opnorm".into(), "--space".into(), p("w.json"), "--images".into(), p("im.json")],
        vec!["certify-isometry".into(), "--space".into(), p("w.json"), "--images".into(), p("im.json")],
        vec!["eps-iso".into(), "--space".into(), p("h.json"), "--subspace".into(), p("hx.json"), "--epsilon".into(), "1/4".into()],
        vec!["certify-gap".into(), "--prime".into(), "2".into(), "--s".into(), "3/4".into(), "--epsilon".into(), "1/4".into(), "--space".into(), p("std1.json")],
        vec!["patch".into(), "--space".into(), p("q22.json"), "--codomain".into(), p("q23.json"), "--j-base".into(), p("jb.json"), "--j-images".into(), p("jim.json"), "--f-images".into(), p("fim.json")],
        vec!["split".into(), "--space".into(), p("w.json"), "--y".into(), p("y2.json"), "--x".into(), p("sub.json")],
        vec!["perturb-check".into(), "--space".into(), p("w.json"), "--xs".into(), p("v.json"), "--zs".into(), p("z.json"), "--t".into(), "1".into()],
        vec!["embed-eu".into(), "--space".into(), p("w.json"), "--subspace".into(), p("y2.json")],
        vec!["extend".into(), "--stage".into(), p("w.json"), "--subspace".into(), p("x1.json")],
        vec!["extend".into(), "--stage".into(), p("w.json"), "--subspace".into(), p("x1.json"), "--mode".into(), "approx".into(), "--substage-dim".into(), "1".into(), "--t".into(), "1".into()],
        vec!["classify".into(), "--space".into(), p("q22.json"), "--other".into(), p("w.json")],
        vec!["demo".into(), "shrinking-balls".into(), "--cases".into(), "4".into(), "--stream".into(), stream.to_string_lossy().into_owned()],
        vec!["demo".into(), "shrinking-balls".into(), "--cases".into(), "4".into()],
        vec!["verify".into(), "--suite".into(), "orth".into(), "--seed".into(), "7".into(), "--cases".into(), "6".into(), "--out".into(), report.clone()],
    ];
    write(dir.path(), "x1span.json", r#"[["1","0"]]"#);

    let validator = schema();
    for args in &invocations {
        let mut full: Vec<&str> = args.iter().map(String::as_str).collect();
        full.push("--json");
        let (code, stdout, stderr) = run(&full);
        assert_eq!(code, 0, "{args:?}\n{stdout}\n{stderr}");
        let doc: Value = serde_json::from_str(&stdout).unwrap_or_else(|e| {
            panic!("{args:?} printed invalid json ({e}):\n{stdout}")
        });
        check_schema(&validator, &doc);
        assert_eq!(doc["status"], "ok", "{args:?}");
        assert_eq!(doc["tool"], "ultramet");
    }
}
