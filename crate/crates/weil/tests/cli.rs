use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn weil(session: &Path, args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["weil", "--session", session.to_str().unwrap()];
    argv.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = weil::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(session: &Path, args: &[&str]) -> (i32, Value) {
    let mut a = vec!["--json"];
    a.extend_from_slice(args);
    let (code, out, err) = weil(session, &a);
    let v = serde_json::from_str(&out).unwrap_or_else(|e| panic!("{e}: {out} {err}"));
    (code, v)
}

fn session() -> (tempfile::TempDir, std::path::PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("session.json");
    (dir, path)
}

#[test]
fn algebra_show_dual() {
    let (_d, s) = session();
    let (code, v) = json(&s, &["algebra", "show", "dual"]);
    assert_eq!(code, 0);
    assert_eq!(v["dim"], 2);
    assert_eq!(v["nilpotency_index"], 2);
    assert_eq!(v["basis"], serde_json::json!(["1", "x0"]));
    assert_eq!(v["format_version"], 1);
}

#[test]
fn algebra_tensor_registers_and_persists() {
    let (_d, s) = session();
    let (code, v) = json(&s, &["algebra", "tensor", "dual", "dual", "as", "TT"]);
    assert_eq!(code, 0);
    assert_eq!(v["dim"], 4);
    let (code, v) = json(&s, &["algebra", "show", "TT"]);
    assert_eq!((code, v["dim"].clone()), (0, 4.into()));
    let (code, _, err) = weil(&s, &["algebra", "tensor", "dual", "jet2", "as", "TT"]);
    assert_eq!(code, 2);
    assert!(err.contains("already registered"));
}

#[test]
fn algebra_list_shows_presets_and_definitions() {
    let (_d, s) = session();
    json(&s, &["algebra", "tensor", "jet2", "dual", "as", "JD"]);
    let (code, v) = json(&s, &["algebra", "list"]);
    assert_eq!(code, 0);
    assert_eq!(v["presets"][1], "dual");
    assert_eq!(v["algebras"], serde_json::json!(["JD"]));
}

#[test]
fn algebra_define_rejects_non_local() {
    let (d, s) = session();
    let file = d.path().join("bad.json");
    std::fs::write(&file, r#"{"format_version":1,"generators":1,"relations":["x0^2 - x0"]}"#).unwrap();
    let (code, _, err) = weil(&s, &["algebra", "define", file.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("not local"), "{err}");
}

#[test]
fn algebra_define_then_export_round_trips() {
    let (d, s) = session();
    let file = d.path().join("cusp.json");
    let text = "{\n  \"format_version\": 1,\n  \"generators\": 2,\n  \"relations\": [\n    \"x0^2 - x1^3\",\n    \"x0*x1\"\n  ]\n}\n";
    std::fs::write(&file, text).unwrap();
    let (code, v) = json(&s, &["algebra", "define", file.to_str().unwrap()]);
    assert_eq!(code, 0, "{v}");
    let out = d.path().join("out.json");
    let (code, _, _) = weil(&s, &["algebra", "export", "cusp", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(std::fs::read_to_string(out).unwrap(), text);
}

#[test]
fn eval_cubic_on_dual() {
    let (_d, s) = session();
    let (code, v) = json(&s, &["eval", "x0^3", "dual", "--point", "2 + x0"]);
    assert_eq!(code, 0);
    assert_eq!(v["mode"], "exact");
    assert_eq!(v["outputs"], serde_json::json!([["8", "12"]]));
}

#[test]
fn eval_mixed_partial_on_tensor() {
    let (_d, s) = session();
    let (code, v) = json(
        &s,
        &["eval", "sin(x0)*exp(x1)", "dual⊗dual", "--point", "0.3 + x0, -0.2 + x1", "--extract", "hessian"],
    );
    assert_eq!(code, 0);
    let oracle = 0.3f64.cos() * (-0.2f64).exp();
    let h = &v["hessian"][0];
    assert!((h[0][1].as_f64().unwrap() - oracle).abs() < 1e-12);
    assert!((h[1][0].as_f64().unwrap() - oracle).abs() < 1e-12);
    assert!(h[0][0].is_null());
}

#[test]
fn eval_identity_on_r() {
    let (_d, s) = session();
    let (code, out, _) = weil(&s, &["eval", "x0", "R", "--point", "5"]);
    assert_eq!(code, 0);
    assert!(out.contains("[5]"), "{out}");
}

#[test]
fn eval_jet_and_gradient() {
    let (_d, s) = session();
    let (_, v) = json(&s, &["eval", "x0^3", "jet3", "--point", "2 + x0", "--extract", "jet"]);
    let derivs: Vec<&str> = v["jet"][0].as_array().unwrap().iter().map(|t| t["derivative"].as_str().unwrap()).collect();
    assert_eq!(derivs, ["8", "12", "12", "6"]);
    let (_, v) = json(
        &s,
        &["eval", "x0*x1; x0 + x1^2", "Dn2", "--point", "2 + x0, 3 + x1", "--extract", "gradient"],
    );
    assert_eq!(v["gradient"], serde_json::json!([["3", "2"], ["1", "6"]]));
}

#[test]
fn eval_errors_are_user_errors() {
    let (_d, s) = session();
    assert_eq!(weil(&s, &["eval", "log(x0)", "dual", "--point", "x0"]).0, 2);
    assert_eq!(weil(&s, &["eval", "x0 +", "dual", "--point", "1"]).0, 2);
    assert_eq!(weil(&s, &["eval", "x1", "dual", "--point", "1"]).0, 2);
    assert_eq!(weil(&s, &["eval", "x0", "nope", "--point", "1"]).0, 2);
    assert_eq!(weil(&s, &["eval", "x0", "dual", "--point", "1", "--extract", "hessian"]).0, 2);
    assert_eq!(weil(&s, &["frobnicate"]).0, 2);
}

#[test]
fn morphisms_define_and_show() {
    let (_d, s) = session();
    let (code, v) = json(&s, &["morphism", "define", "trunc", "jet2", "dual", "--images", "x0"]);
    assert_eq!(code, 0);
    assert_eq!(v["matrix"], serde_json::json!([["1", "0", "0"], ["0", "1", "0"]]));
    let (code, _, err) = weil(&s, &["morphism", "define", "bad", "dual", "jet2", "--images", "x0"]);
    assert_eq!(code, 2);
    assert!(err.contains("does not map to zero"), "{err}");
    assert_eq!(weil(&s, &["morphism", "show", "aug[jet2]"]).0, 0);
}

#[test]
fn laws_small_run_passes_and_reports() {
    let (d, s) = session();
    let report = d.path().join("report.json");
    let args = [
        "laws", "composition", "--trials", "2", "--maps", "2", "--family", "R,dual,jet2", "--report",
        report.to_str().unwrap(),
    ];
    let (code, out, _) = weil(&s, &args);
    assert_eq!(code, 0, "{out}");
    let first = std::fs::read(&report).unwrap();
    let v: Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(v["format_version"], 1);
    assert_eq!(v["passed"], true);
    for r in v["reports"].as_array().unwrap() {
        assert_eq!(r["status"], "pass");
        assert_eq!(r["seed"], 42);
    }
    weil(&s, &args);
    assert_eq!(std::fs::read(&report).unwrap(), first, "reports are byte-deterministic");
}

#[test]
fn limits_compute_builtins() {
    let (_d, s) = session();
    let (code, v) = json(&s, &["limits", "compute", "pullback-D2"]);
    assert_eq!(code, 0);
    assert_eq!(v["dim"], 3);
    assert_eq!(v["is_limit"], true);
    let (code, v) = json(&s, &["limits", "compute", "equalizer-vertical"]);
    assert_eq!((code, v["dim"].clone()), (0, 1.into()));
    assert_eq!(weil(&s, &["limits", "compute", "no-such-diagram"]).0, 2);
}

#[test]
fn limits_compute_from_document() {
    let (d, s) = session();
    let file = d.path().join("d.json");
    std::fs::write(
        &file,
        r#"{"format_version":1,"nodes":["jet2","dual"],
            "edges":[{"source":0,"target":1,"images":["x0"]}]}"#,
    )
    .unwrap();
    let (code, v) = json(&s, &["limits", "compute", file.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["dim"], 3);
    std::fs::write(&file, r#"{"format_version":1,"nodes":["dual","R"],"edges":[]}"#).unwrap();
    let (code, _, err) = weil(&s, &["limits", "compute", file.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("not connected"));
}

#[test]
fn limits_microlinear_and_transversal() {
    let (d, s) = session();
    for chart in ["R1", "R2", "(0,1)^1"] {
        let (code, out, _) = weil(&s, &["limits", "microlinear", "--chart", chart, "--diagram", "pullback-D2"]);
        assert_eq!(code, 0, "{chart}: {out}");
    }
    let (code, _, _) = weil(&s, &["limits", "transversal", "--product", "1,1", "--probes", "R,dual,jet2", "--trials", "3"]);
    assert_eq!(code, 0);
    let cone = d.path().join("cone.json");
    std::fs::write(
        &cone,
        r#"{"format_version":1,"apex":"R0","nodes":["R1","R1"],"legs":[["0"],["0"]]}"#,
    )
    .unwrap();
    let (code, out, _) = weil(&s, &["limits", "transversal", "--cone", cone.to_str().unwrap(), "--probes", "R"]);
    assert_eq!(code, 1, "{out}");
}

#[test]
fn limits_vertical_dual() {
    let (_d, s) = session();
    let (code, v) = json(&s, &["limits", "vertical", "--base", "1", "--fiber", "2", "--algebra", "dual", "--trials", "3"]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["carrier_dim"], 5);
    assert_eq!(v["nilpotent_dim"], 2);
    assert_eq!(v["is_equalizer"], true);
}

#[test]
fn binary_exit_codes() {
    let (_d, s) = session();
    let bin = env!("CARGO_BIN_EXE_weil");
    let run = |args: &[&str]| {
        Command::new(bin)
            .arg("--session")
            .arg(&s)
            .args(args)
            .status()
            .unwrap()
            .code()
            .unwrap()
    };
    assert_eq!(run(&["algebra", "show", "jet2"]), 0);
    assert_eq!(run(&["algebra", "show", "x0^2"]), 2);
    assert_eq!(run(&["--help"]), 0);
    assert_eq!(run(&["--inject-fault", "no-such-fault", "algebra", "show", "R"]), 2);
}
