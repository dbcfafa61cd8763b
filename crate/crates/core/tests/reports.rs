use serde_json::Value;

use arrzeta::io::{parse_arrangement, run, Command, ExitStatus, Mode, Options, SCHEMA_JSON};

const THREE_LINES: &str = "dim: 2\nhyperplane: 1 0\nhyperplane: 1 1\nhyperplane: 1 -1\n";
const BRAID: &str = "dim: 3\nhyperplane: 1 0 0\nhyperplane: 0 1 0\nhyperplane: 0 0 1\nhyperplane: 1 -1 0\nhyperplane: 0 1 -1\nhyperplane: 1 0 -1\n";
const CROSS: &str = "dim: 2\nhyperplane: 1 0\nhyperplane: 0 1\n";

fn validator() -> jsonschema::Validator {
    let schema: Value = serde_json::from_str(SCHEMA_JSON).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

fn report(text: &str, command: Command, opts: &Options) -> Value {
    let file = parse_arrangement(text).unwrap();
    let r = run(command, &file, opts).unwrap();
    serde_json::from_str(&r.to_json()).unwrap()
}

fn assert_valid(v: &Value) {
    let errors: Vec<String> = validator().iter_errors(v).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}\n{v:#}");
}

/// Every object with a `value` number also carries an `error`.
fn measured_pairs_complete(v: &Value) -> bool {
    match v {
        Value::Object(m) => {
            let paired = !(m.get("value").is_some_and(Value::is_f64)) || m.get("error").is_some_and(Value::is_number);
            paired && m.values().all(measured_pairs_complete)
        }
        Value::Array(a) => a.iter().all(measured_pairs_complete),
        _ => true,
    }
}

#[test]
fn combinatorial_reports_validate() {
    let opts = Options { b: Some(vec![3, 1, 1]), ..Options::default() };
    for command in [
        Command::Lattice,
        Command::Dense,
        Command::Resolution,
        Command::Lct,
        Command::Candidates,
        Command::GoodTuple,
        Command::Topzeta,
    ] {
        let v = report(THREE_LINES, command, &opts);
        assert_valid(&v);
        assert_eq!(v["command"], command.name());
        assert_eq!(v["exit_code"], 0);
        assert!(v["quadrature"].is_null());
        assert!(v["assumptions"].as_array().unwrap().is_empty());
    }
}

#[test]
fn lattice_of_three_lines() {
    let v = report(THREE_LINES, Command::Lattice, &Options::default());
    let edges = v["results"]["edges"].as_array().unwrap();
    assert_eq!(edges.len(), 4);
    let codims: Vec<u64> = edges.iter().map(|e| e["codim"].as_u64().unwrap()).collect();
    assert_eq!(codims, [1, 1, 1, 2]);
}

#[test]
fn higher_dimensional_bounds_carry_assumptions() {
    let opts = Options { mode: Mode::Combinatorial, ..Options::default() };
    for command in [Command::Candidates, Command::VerifyNd] {
        let v = report(BRAID, command, &opts);
        assert_valid(&v);
        assert!(!v["assumptions"].as_array().unwrap().is_empty(), "{command:?}");
    }
}

#[test]
fn numerical_reports_pair_values_with_errors() {
    let opts = Options { b: Some(vec![3, 1, 1]), samples: 3, ..Options::default() };
    for command in [Command::Residue, Command::VerifySection4, Command::VerifyNd] {
        let v = report(THREE_LINES, command, &opts);
        assert_valid(&v);
        assert!(v["quadrature"].is_object());
        assert!(measured_pairs_complete(&v["results"]), "{command:?}");
    }
    let v = report(THREE_LINES, Command::Residue, &opts);
    assert_eq!(v["results"]["sign_verdict"], "negative");
    assert!(v["results"]["analysis"]["residue"]["value"].as_f64().unwrap() < 0.0);
}

#[test]
fn verify_nd_pipeline() {
    let opts = Options { b: Some(vec![1, 1, 1]), ..Options::default() };
    let v = report(THREE_LINES, Command::VerifyNd, &opts);
    assert_eq!(v["results"]["combinatorial"]["good_tuple"], true);
    assert_eq!(v["results"]["numeric2d"]["sign_verdict"], "positive");
    assert!(v["verdict"].as_str().unwrap().starts_with("holds"));

    let opts = Options { b: Some(vec![3, 1, 1]), ..Options::default() };
    let v = report(THREE_LINES, Command::VerifyNd, &opts);
    assert_eq!(v["results"]["combinatorial"]["good_tuple"], false);
    assert_eq!(v["results"]["numeric2d"]["sign_verdict"], "negative");
    assert!(v["verdict"].as_str().unwrap().starts_with("holds"));
    assert_eq!(v["exit_code"], 0);
}

#[test]
fn order_two_case_is_reported() {
    let opts = Options { b: Some(vec![2, 1, 1]), mode: Mode::Numeric2d, ..Options::default() };
    let v = report(THREE_LINES, Command::VerifyNd, &opts);
    assert_valid(&v);
    assert_eq!(v["results"]["numeric2d"]["sign_verdict"], "order-two");
}

#[test]
fn decomposable_input_fails_hypotheses() {
    let v = report(CROSS, Command::VerifyNd, &Options::default());
    assert_valid(&v);
    assert_eq!(v["status"], "hypotheses-not-met");
    assert_eq!(v["exit_code"], ExitStatus::HypothesesNotMet.code());
    assert_eq!(v["verdict"], "hypotheses not met: indecomposable=false");
}

#[test]
fn numeric_mode_needs_the_plane() {
    let file = parse_arrangement(BRAID).unwrap();
    let opts = Options { mode: Mode::Numeric2d, ..Options::default() };
    assert!(run(Command::VerifyNd, &file, &opts).is_err());
}
