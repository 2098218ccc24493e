use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use zerocap::model::{matrix_from_json, matrix_to_json, GraphSpec, JsonMatrix};
use zerocap::nosig::{check_ns, NsCorrelation};

fn example(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../examples").join(name)
}

fn zerocap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zerocap")).args(args).env_remove("ZEROCAP_GAP_TOL").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn row<'a>(report: &'a Value, quantity: &str) -> &'a Value {
    report["rows"].as_array().unwrap().iter().find(|r| r["quantity"] == quantity).unwrap()
}

fn write_spec(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

/// Exit code and the one-line `error code=<kind> exit=<n>: ...` on stderr.
fn assert_error(o: &Output, code: i32, kind: &str) {
    assert_eq!(o.status.code(), Some(code), "stderr: {}", stderr(o));
    let err = stderr(o);
    let lines: Vec<_> = err.lines().collect();
    assert_eq!(lines.len(), 1, "{err}");
    assert!(lines[0].starts_with(&format!("error code={kind} exit={code}: ")), "{err}");
}

#[test]
fn capacity_of_two_state_example() {
    let o = zerocap(&["capacity", example("two_state_075.json").to_str().unwrap(), "--json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = json(&o);
    let u = row(&report, "upsilon");
    assert!((u["value"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert_eq!(u["integer_part"], 1);
    assert_eq!(u["status"], "optimal");
    assert_eq!(row(&report, "positive_capacity")["integer_part"], 1);
    let sd = row(&report, "superdense_bound")["value"].as_f64().unwrap();
    assert!((sd - 4.0 / 3.0).abs() < 1e-9);
}

#[test]
fn theta_of_pentagon_as_csv() {
    let o = zerocap(&["theta", example("c5.json").to_str().unwrap(), "--csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("quantity,value,integer_part,bits,gap,status,seconds"));
    let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(fields[0], "theta");
    assert!((fields[1].parse::<f64>().unwrap() - 2.2360679).abs() < 1e-6);
    assert_eq!(fields[2], "2");
    assert_eq!(fields[5], "optimal");
    assert!(lines.next().is_none());
}

#[test]
fn sweep_has_three_monotone_rows() {
    let o = zerocap(&["sweep", "two_state", "--points", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("beta_sq,log_aram,cmin_e,log_sigma"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 3);
    for r in &rows {
        let (b2, log_a, cmin, log_s) = (r[0], r[1], r[2], r[3]);
        let a2 = 1.0 - b2;
        assert!(log_a <= cmin + 1e-9 && cmin <= log_s + 1e-9, "{r:?}");
        assert!((log_a + a2.log2()).abs() < 1e-6);
        assert!((log_s - (1.0 + 2.0 * (a2 * b2).sqrt()).log2()).abs() < 1e-6);
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_spec(&dir, "bad.json", r#"{"type": "nope"}"#);
    assert_error(&zerocap(&["capacity", &bad]), 2, "spec_parse");
    let ragged = write_spec(&dir, "ragged.json", r#"{"type": "kraus", "kraus": [[[1, 0], [0]]]}"#);
    assert_error(&zerocap(&["packing", &ragged]), 2, "spec_parse");
    assert_error(&zerocap(&["theta", "/nonexistent/spec.json"]), 2, "spec_parse");
    assert_error(&zerocap(&["frobnicate"]), 2, "usage");
    assert_error(&zerocap(&["theta", &bad, "--json", "--csv"]), 2, "usage");

    let two_state = example("two_state_075.json");
    let two_state = two_state.to_str().unwrap();
    assert_error(&zerocap(&["verify", two_state, "-M", "2"]), 3, "infeasible");
    assert_error(&zerocap(&["verify", two_state, "-M", "1", "--simulate"]), 3, "infeasible");
    assert_error(&zerocap(&["power", two_state, "-n", "4", "aram"]), 3, "infeasible");
}

#[test]
fn gap_tolerance_from_environment() {
    let c5 = example("c5.json");
    let run = |tol: &str| {
        Command::new(env!("CARGO_BIN_EXE_zerocap"))
            .args(["theta", c5.to_str().unwrap(), "--json"])
            .env("ZEROCAP_GAP_TOL", tol)
            .output()
            .unwrap()
    };
    assert!(run("1e-6").status.success());
    assert_error(&run("not-a-number"), 2, "usage");
    assert_error(&run("-1"), 2, "spec_parse");
}

fn assert_finite(v: &Value) {
    match v {
        Value::Number(n) => assert!(n.as_f64().unwrap().is_finite()),
        Value::Array(a) => a.iter().for_each(assert_finite),
        Value::Object(o) => o.values().for_each(assert_finite),
        _ => {}
    }
}

#[test]
fn reports_are_finite_and_carry_status() {
    let dir = tempfile::tempdir().unwrap();
    let damping = write_spec(&dir, "ad.json", r#"{"type": "amplitude_damping", "r": 0.5}"#);
    for cmd in ["capacity", "simcost", "packing"] {
        let o = zerocap(&[cmd, &damping, "--json"]);
        assert!(o.status.success(), "{cmd}: {}", stderr(&o));
        let report = json(&o);
        assert_finite(&report);
        for r in report["rows"].as_array().unwrap() {
            assert!(r["status"].is_string());
            assert!(r["quantity"].is_string());
        }
    }
    let o = zerocap(&["simcost", &damping, "--json"]);
    let report = json(&o);
    let sigma = row(&report, "sigma_channel")["value"].as_f64().unwrap();
    let hmin = row(&report, "hmin")["value"].as_f64().unwrap();
    assert!((hmin + sigma.log2()).abs() < 1e-12);
}

#[test]
fn packing_product_is_one_for_cq() {
    let o = zerocap(&["packing", example("two_state_075.json").to_str().unwrap(), "--json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = json(&o);
    let product = row(&report, "aram_times_aram_hat")["value"].as_f64().unwrap();
    assert!((product - 1.0).abs() < 1e-6);
}

#[test]
fn alphastar_of_pentagon_channel() {
    let dir = tempfile::tempdir().unwrap();
    let rows: Vec<String> = (0..5)
        .map(|i| {
            let r: Vec<&str> = (0..5).map(|j| if j == i || j == (i + 1) % 5 { "0.5" } else { "0" }).collect();
            format!("[{}]", r.join(","))
        })
        .collect();
    let spec = write_spec(&dir, "c5.json", &format!(r#"{{"type": "classical", "matrix": [{}]}}"#, rows.join(",")));
    let o = zerocap(&["alphastar", &spec, "--json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&o)["rows"][0]["value"].as_f64().unwrap();
    assert!((v - 2.5).abs() < 1e-6);
}

fn reparse_matrix(m: &Value) -> JsonMatrix {
    let parsed: JsonMatrix = serde_json::from_value(m.clone()).unwrap();
    let again = matrix_to_json(&matrix_from_json(&parsed).unwrap());
    assert_eq!(again, parsed);
    parsed
}

#[test]
fn witness_dump_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("w.json");
    let o = zerocap(&[
        "packing",
        example("two_state_075.json").to_str().unwrap(),
        "--json",
        "--dump-witness",
        dump.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = json(&o);
    assert_eq!(report["rows"][0]["witness_file"], dump.to_str().unwrap());

    let text = std::fs::read_to_string(&dump).unwrap();
    let doc: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::from_str::<Value>(&serde_json::to_string(&doc).unwrap()).unwrap(), doc);
    let quantities = doc["quantities"].as_array().unwrap();
    assert_eq!(quantities.len(), 3);
    for (q, r) in quantities.iter().zip(report["rows"].as_array().unwrap()) {
        assert_eq!(q["quantity"], r["quantity"]);
        assert_eq!(q["value"], r["value"]);
        let witnesses: Vec<&Value> = ["primal", "dual"].iter().flat_map(|s| q[*s].as_array().unwrap()).collect();
        assert!(!witnesses.is_empty());
        for w in witnesses {
            assert!(w["label"].is_string());
            reparse_matrix(&w["matrix"]);
        }
    }
}

#[test]
fn correlation_dump_reparses_to_a_no_signalling_correlation() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(&dir, "q.json", r#"{"type": "noiseless_quantum", "l": 2}"#);
    let dump = dir.path().join("omega.json");
    for args in [vec!["-M", "4"], vec!["-M", "4", "--simulate"]] {
        let mut full = vec!["verify", spec.as_str()];
        full.extend(args);
        full.extend(["--json", "--dump-witness", dump.to_str().unwrap()]);
        let o = zerocap(&full);
        assert!(o.status.success(), "{}", stderr(&o));
        assert_eq!(json(&o)["rows"][0]["status"], "passed");

        let doc: Value = serde_json::from_str(&std::fs::read_to_string(&dump).unwrap()).unwrap();
        let c = &doc["correlation"];
        let dims: Vec<usize> = serde_json::from_value(c["dims"].clone()).unwrap();
        let omega = matrix_from_json(&reparse_matrix(&c["omega"])).unwrap();
        let ns = NsCorrelation::new((dims[0], dims[1], dims[2], dims[3]), omega).unwrap();
        assert!(check_ns(&ns).unwrap().max_residual() < 1e-7);
    }
}

#[test]
fn tensor_spec_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let emitted = dir.path().join("t.json");
    let base = example("two_state_075.json");
    let o = zerocap(&["power", base.to_str().unwrap(), "-n", "2", "upsilon", "--emit-spec", emitted.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let spec = GraphSpec::from_json(&std::fs::read_to_string(&emitted).unwrap()).unwrap();
    let original = GraphSpec::from_json(&std::fs::read_to_string(&base).unwrap()).unwrap();
    assert_eq!(spec, GraphSpec::Tensor { factors: vec![original], power: Some(2) });
    assert_eq!(GraphSpec::from_json(&spec.to_json()).unwrap(), spec);

    // the emitted spec is itself a valid input
    let o = zerocap(&["capacity", emitted.to_str().unwrap(), "--json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let u = row(&json(&o), "upsilon").clone();
    let (a2, b2) = (0.75f64, 0.25f64);
    let value = u["value"].as_f64().unwrap();
    assert!(value >= 1.0 / (a2 * a2 + b2 * b2) - 1e-6 && value <= 1.0 / (a2 * a2) + 1e-6);
    assert_eq!(u["integer_part"], 1);
}

#[test]
fn regress_passes() {
    let o = zerocap(&["regress"]);
    assert_eq!(o.status.code(), Some(0), "{}\n{}", stdout(&o), stderr(&o));
    let out = stdout(&o);
    let passes = out.lines().filter(|l| l.starts_with("criterion") && l.contains(" PASS ")).count();
    assert_eq!(passes, 11, "{out}");
}
