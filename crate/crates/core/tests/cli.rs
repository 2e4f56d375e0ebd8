use qatom::cli::run;

fn qatom(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("qatom").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn validate_bundled() {
    let (code, out, _) = qatom(&["validate", "@s4_async"]);
    assert_eq!(code, 0);
    assert!(out.contains("well-formed: true"), "{out}");
    assert!(out.contains("14 local"), "{out}");
}

#[test]
fn missing_file_and_unknown_bundle_are_usage_errors() {
    assert_eq!(qatom(&["validate", "/nonexistent/x.json"]).0, 2);
    assert_eq!(qatom(&["validate", "@nope"]).0, 2);
    assert_eq!(qatom(&["frobnicate"]).0, 2);
    assert_eq!(qatom(&["--help"]).0, 0);
}

#[test]
fn malformed_scenario_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{\"qubits\": [\"q\"], \"processes\": [], \"extra\": 1}").unwrap();
    let (code, _, err) = qatom(&["validate", p.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("extra"), "{err}");
}

#[test]
fn simulate_reports_ties_on_the_overlap_demo() {
    let (code, out, err) = qatom(&["simulate", "@nonlocal_overlap", "--ties"]);
    assert_eq!(code, 0);
    assert!(err.contains("warning"), "{err}");
    assert!(out.contains("tie-order divergence"), "{out}");
    let (_, out, err) = qatom(&["simulate", "@s1", "--ties", "--json"]);
    assert!(err.is_empty(), "{err}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v["tie_divergence"].as_f64().unwrap() < 1e-12);
    assert!((v["trace"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn measured_outcomes_sum_to_one() {
    let mut args = vec!["measure", "@s4", "--json"];
    let sets: Vec<String> = (0..8).map(|i| format!("D{},E{},F{}", i >> 2, (i >> 1) & 1, i & 1)).collect();
    for s in &sets {
        args.extend(["--anchors", s.as_str()]);
    }
    let (code, out, _) = qatom(&args);
    assert_eq!(code, 0);
    let v: Vec<serde_json::Value> = serde_json::from_str(&out).unwrap();
    let total: f64 = v.iter().map(|r| r["mu"].as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9, "{total}");
}

#[test]
fn two_anchors_in_one_process_are_rejected() {
    assert_eq!(qatom(&["measure", "@s4", "--anchors", "D0,D1"]).0, 2);
}

#[test]
fn atomize_then_equiv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let m = dir.path().join("m.json");
    let (code, _, err) = qatom(&["atomize", "@s3_async", "-o", a.to_str().unwrap(), "--map", m.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let (code, out, _) = qatom(&["equiv", "@s3_async", a.to_str().unwrap(), "--map", m.to_str().unwrap(), "--json"]);
    assert_eq!(code, 0, "{out}");
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["equivalent"], true);
    let (_, out, _) = qatom(&["validate", a.to_str().unwrap()]);
    assert!(out.contains("well-formed: true"));
}

#[test]
fn equiv_rejects_a_non_isomorphic_pair() {
    // Same shape, different random unitaries.
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = qatom(&["generate", "--out", dir.path().to_str().unwrap(), "--seed", "8"]);
    assert_eq!(code, 0);
    let other = dir.path().join("s1.json");
    let (code, _, err) = qatom(&["equiv", "@s1", other.to_str().unwrap()]);
    assert_eq!(code, 1, "{err}");
    assert!(err.contains("not an isomorphism"), "{err}");
}

#[test]
fn diagram_formats() {
    let (_, out, _) = qatom(&["diagram", "@s4"]);
    assert!(out.contains("fork A2 -> D0 | D1"), "{out}");
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("d.svg");
    assert_eq!(qatom(&["diagram", "@s4", "--format", "svg", "-o", p.to_str().unwrap()]).0, 0);
    let svg = std::fs::read_to_string(p).unwrap();
    assert!(svg.starts_with("<svg") && svg.matches("<rect").count() == 17);
}

#[test]
fn axioms_pass_on_bundled_scene() {
    let (code, out, _) = qatom(&["axioms", "@s2_async", "--schedule", "midpoint"]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(out.matches("PASS").count(), 4);
}

#[test]
fn corrupted_map_is_an_isomorphism_failure() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.json");
    let a = dir.path().join("a.json");
    qatom(&["atomize", "@s1", "-o", a.to_str().unwrap(), "--map", m.to_str().unwrap()]);
    let text = std::fs::read_to_string(&m).unwrap().replace("\"A2\"", "\"B1\"");
    std::fs::write(&m, text).unwrap();
    let (code, _, err) = qatom(&["equiv", "@s1", a.to_str().unwrap(), "--map", m.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("error"), "{err}");
}

#[test]
fn simulate_at_zero_returns_the_input() {
    let (code, out, _) = qatom(&["simulate", "@s1", "--time", "0", "--state", "10", "--json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["probabilities"][0]["state"], "|10⟩");
    assert_eq!(v["probabilities"][0]["p"].as_f64().unwrap(), 1.0);
    assert_eq!(qatom(&["simulate", "@s1", "--state", "1"]).0, 2);
}

#[test]
fn validate_flags_sequentiality_and_shared_environment() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("x.json");
    let child_overlap = r#"{"qubits": ["q"], "processes": [{"name": "A", "root":
        {"id": "a", "interval": [0, 2], "register": ["q"], "op": {"gate": "H"},
         "children": [{"id": "b", "interval": ["1", "3"], "register": ["q"], "op": {"gate": "X"}}]}}]}"#;
    std::fs::write(&p, child_overlap).unwrap();
    let (code, out, _) = qatom(&["validate", p.to_str().unwrap()]);
    assert_eq!(code, 1, "{out}");
    let shared = r#"{"qubits": ["q", "r"], "processes": [
        {"name": "A", "root": {"id": "a", "interval": [0, 1], "register": ["q"], "op": {"gate": "MEASURE_Z(0)"}, "environment": ["m"]}},
        {"name": "B", "root": {"id": "b", "interval": [0, 1], "register": ["r"], "op": {"gate": "MEASURE_Z(0)"}, "environment": ["m"]}}]}"#;
    std::fs::write(&p, shared).unwrap();
    let (code, out, _) = qatom(&["validate", p.to_str().unwrap()]);
    assert_eq!(code, 1, "{out}");
}
