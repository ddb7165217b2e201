use serde_json::Value;

use jetsym_cli::{run, Outcome};

fn invoke(args: &[&str], stdin: &str) -> Outcome {
    let mut argv = vec!["jetsym"];
    argv.extend_from_slice(args);
    run(argv, &mut stdin.as_bytes())
}

fn json(args: &[&str], stdin: &str) -> Value {
    let mut a = args.to_vec();
    a.extend(["--format", "json"]);
    let out = invoke(&a, stdin);
    assert_eq!(out.code, 0, "{}", out.stderr);
    serde_json::from_str(&out.stdout).unwrap()
}

const FLAT11: &str = r#"{"n": 1, "m": 1, "entries": []}"#;

#[test]
fn flat_algebra_reports_dimension() {
    let v = json(&["flat-algebra", "--n", "1", "--m", "1"], "");
    assert_eq!(v["dimension"], 8);
    assert_eq!(v["generators"][0]["name"], "U1");
    let v = json(&["flat-algebra", "--n", "2", "--m", "2"], "");
    assert_eq!(v["dimension"], 24);
}

#[test]
fn involutive_reads_stdin() {
    let v = json(&["involutive", "--system", "-"], FLAT11);
    assert_eq!(v["involutive"], true);
    let bad = r#"{"n": 2, "m": 1, "entries": [{"k": 1, "i": 1, "j": 1, "F": "x2"}]}"#;
    let v = json(&["involutive", "--system", bad], "");
    assert_eq!(v["involutive"], false);
    assert_eq!(v["failures"][0]["l"], 2);
}

#[test]
fn cr_aut_dimension() {
    let v = json(&["cr-aut", "--signature", "++"], "");
    assert_eq!(v["real_dimension"], 15);
    assert_eq!(v["totally_real"], true);
    let v = json(&["totally-real", "--signature", "+"], "");
    assert_eq!(v["totally_real"], true);
}

#[test]
fn symmetry_algebra_and_determining() {
    let v = json(&["symmetry-algebra", "--system", FLAT11], "");
    assert_eq!(v["dimension"], 8);
    let v = json(&["determining", "--system", FLAT11, "--order", "2"], "");
    assert_eq!(v["equations"].as_array().unwrap().len(), 4);
    assert_eq!(v["unknowns"].as_array().unwrap().len(), 12);
    assert_eq!(v["equations"][1]["equation"], "-theta1_x1x1 + 2*eta1_x1u1 = 0");
}

#[test]
fn symmetry_check_and_bracket() {
    let dx = r#"{"n": 1, "m": 1, "theta": ["1"], "eta": ["0"]}"#;
    let proj = r#"{"n": 1, "m": 1, "theta": ["x1^2"], "eta": ["x1*u1"]}"#;
    let v = json(&["symmetry-check", "--system", FLAT11, "--field", proj], "");
    assert_eq!(v["symmetric"], true);
    let x2 = r#"{"n": 1, "m": 1, "theta": ["0"], "eta": ["x1^2"]}"#;
    let v = json(&["symmetry-check", "--system", FLAT11, "--field", x2], "");
    assert_eq!(v["symmetric"], false);
    assert_eq!(v["residuals"][0]["residual"]["expr"], "2");
    let v = json(&["bracket", "--left", dx, "--right", proj], "");
    assert_eq!(v["bracket"]["text"], "(2*x1) d/dx1 + (u1) d/du1");
}

#[test]
fn closure_of_fields() {
    let v = json(&["closure", "--n", "1", "--m", "1"], "");
    assert_eq!(v["closes"], true);
    let fields = r#"{"n": 1, "m": 1, "fields": [{"theta": ["1"], "eta": ["0"]}, {"theta": ["x1^2"], "eta": ["0"]}]}"#;
    let v = json(&["closure", "--fields", fields], "");
    assert_eq!(v["closes"], false);
    assert_eq!(v["residual"]["text"], "(2*x1) d/dx1");
}

#[test]
fn taylor_from_omega() {
    // γ = (2, 0): the projective field x^2 d/dx + x u d/du
    let omega = r#"["0","0","0","0","2","0","0","0"]"#;
    let v = json(&["taylor", "--system", FLAT11, "--omega", omega], "");
    assert_eq!(v["field"]["text"], "(x1^2) d/dx1 + (x1*u1) d/du1");
    let out = invoke(&["taylor", "--system", FLAT11, "--omega", r#"["1"]"#], "");
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("initial data"), "{}", out.stderr);
}

#[test]
fn segre_output_is_a_system_file() {
    let v = json(&["segre-derive", "--signature", "+", "--r", "x1^2*zeta1^2", "--truncation", "6"], "");
    assert_eq!(v["involutive"], true);
    let text = serde_json::to_string(&v).unwrap();
    let again = json(&["involutive", "--system", &text], "");
    assert_eq!(again["involutive"], true);
    let hq = json(&["segre-derive", "--signature", "+-"], "");
    assert_eq!(hq["entries"].as_array().unwrap().len(), 0);
}

#[test]
fn exit_codes() {
    assert_eq!(invoke(&["nonsense"], "").code, 2);
    assert_eq!(invoke(&["flat-algebra", "--n", "1"], "").code, 2);
    assert_eq!(invoke(&["cr-aut", "--signature", "+x"], "").code, 2);
    assert_eq!(invoke(&["flat-algebra", "--n", "0", "--m", "1"], "").code, 1);
    let out = invoke(&["involutive", "--system", r#"{"n": 1, "m": 1, "entries": [{"k": 1, "i": 1, "j": 1, "F": "x1 + "}]}"#], "");
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("offset 5"), "{}", out.stderr);
    assert_eq!(invoke(&["--help"], "").code, 0);
}

#[test]
fn json_output_is_stable() {
    let a = invoke(&["closure", "--n", "2", "--m", "1", "--format", "json"], "");
    let b = invoke(&["closure", "--n", "2", "--m", "1", "--format", "json"], "");
    assert_eq!(a, b);
}

#[test]
fn nonzero_base_point() {
    let v = json(&["symmetry-algebra", "--system", FLAT11, "--point", "1,-1/2"], "");
    assert_eq!(v["dimension"], 8);
    assert_eq!(invoke(&["symmetry-algebra", "--system", FLAT11, "--point", "1"], "").code, 1);
}
