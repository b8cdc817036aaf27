//! End-to-end tests of the binary: exit codes, report schema, determinism.

use std::path::Path;
use std::process::{Command, Output};

fn wittkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wittkit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn jacobi_clean_catalog_algebra_exits_zero() {
    let out = wittkit(&["jacobi", "--alg", "w_abs", "--a", "1", "--b", "-1", "--imin", "-3", "--imax", "3"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let doc = stdout_json(&out);
    assert_eq!(doc["verb"], "jacobi");
    assert_eq!(doc["algebra"]["name"], "w_abs");
    assert_eq!(doc["result"]["report"]["violations"].as_array().unwrap().len(), 0);
    assert!(doc["result"]["report"]["triples_checked"].as_u64().unwrap() > 0);
}

#[test]
fn halfder_solve_finds_only_identity_off_the_special_parameter() {
    let out = wittkit(&[
        "halfder-solve", "--alg", "w_ab", "--a", "0", "--b", "2", "--shift", "0",
        "--imin", "-4", "--imax", "4", "--out-pad", "4",
    ]);
    assert_eq!(exit_code(&out), 0);
    let doc = stdout_json(&out);
    let interior = &doc["result"]["interior"];
    assert_eq!(interior["dimension"], 1);
    assert_eq!(interior["fitted"][0]["shift_type"], true);
    // the lone interior map is the identity on both families
    let terms = interior["fitted"][0]["map"]["terms"].as_array().unwrap();
    assert!(terms.iter().all(|t| t["i_shift"] == 0 && t["source"] == t["target"]));
}

#[test]
fn tps_check_reports_compatibility_witness_and_exits_one() {
    let out = wittkit(&[
        "tps-check", "--alg", "w_ab", "--a", "0", "--b", "0", "--product", "plain-W",
        "--imin", "-3", "--imax", "3",
    ]);
    assert_eq!(exit_code(&out), 1);
    let doc = stdout_json(&out);
    let report = &doc["result"]["report"];
    assert_eq!(report["commutative"], true);
    assert_eq!(report["associative"], true);
    assert_eq!(report["compatible"], false);
    let witness = &report["witnesses"]["compatible"];
    assert_eq!(witness["inputs"].as_array().unwrap().len(), 3);
    assert_ne!(witness["lhs"]["text"], witness["rhs"]["text"]);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let args = [
        "tps-solve", "--alg", "wn_g", "--n", "2", "--gen", "1", "--gen-bound", "1",
        "--imin", "-2", "--imax", "2", "--shift-bound", "1",
    ];
    let first = wittkit(&args);
    let second = wittkit(&args);
    assert_eq!(exit_code(&first), 0);
    assert_eq!(first.stdout, second.stdout);
    assert!(!first.stdout.is_empty());
}

#[test]
fn mutation_passes_tps_and_reports_poisson_failures() {
    let out = wittkit(&[
        "mutation", "--alg", "w_ab", "--a", "1", "--b", "-1", "--imin", "-3", "--imax", "3",
        "--w", "I(0)",
    ]);
    assert_eq!(exit_code(&out), 0);
    let doc = stdout_json(&out);
    assert_eq!(doc["result"]["tps"]["compatible"], true);
    assert!(doc["result"]["poisson"]["failures"].as_u64().unwrap() > 0);
}

#[test]
fn hwn_solve_returns_only_the_trivial_product() {
    let out = wittkit(&[
        "tps-solve", "--alg", "hwn_g", "--n", "1", "--gen", "1", "--gen-bound", "1",
        "--imin", "-3", "--imax", "3", "--shift-bound", "1", "--kmin", "-17", "--kmax", "17",
    ]);
    assert_eq!(exit_code(&out), 0);
    let doc = stdout_json(&out);
    let outcome = &doc["result"]["outcome"];
    assert_eq!(outcome["dimension"], 0);
    assert_eq!(outcome["solutions"].as_array().unwrap().len(), 1);
    assert_eq!(outcome["solutions"][0]["trivial"], true);
}

#[test]
fn halfder_family_truncated_check_is_clean() {
    let out = wittkit(&[
        "halfder-family", "--alg", "hwn_g", "--n", "1", "--gen", "1", "--gen-bound", "1",
        "--imin", "-1", "--imax", "1", "--seeds", "1:0:1", "--kmin", "-5", "--kmax", "5",
    ]);
    assert_eq!(exit_code(&out), 0);
    let doc = stdout_json(&out);
    assert_eq!(doc["result"]["report"]["failures"].as_array().unwrap().len(), 0);
    assert!(doc["result"]["output_window"].is_object());
}

#[test]
fn halfder_check_flags_a_non_half_derivation() {
    // L -> I with unit coefficient is not a half-derivation of w_ab(1, 0)
    let out = wittkit(&[
        "halfder-check", "--alg", "w_ab", "--a", "1", "--b", "0", "--imin", "-2", "--imax", "2",
        "--term", "L:I:0:1",
    ]);
    assert_eq!(exit_code(&out), 1);
    let doc = stdout_json(&out);
    assert!(!doc["result"]["report"]["failures"].as_array().unwrap().is_empty());
}

#[test]
fn usage_errors_exit_two_without_reports() {
    // missing required catalog parameter
    let out = wittkit(&["jacobi", "--alg", "w_ab", "--a", "1", "--imin", "-2", "--imax", "2"]);
    assert_eq!(exit_code(&out), 2);
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("b"));

    // malformed scalar (the grammar rejects a double slash)
    let out = wittkit(&["jacobi", "--alg", "w_ab", "--a", "1//2", "--b", "-1", "--imin", "-2", "--imax", "2"]);
    assert_eq!(exit_code(&out), 2);
    assert!(out.stdout.is_empty());

    // neither --alg nor --file
    let out = wittkit(&["jacobi", "--imin", "-2", "--imax", "2"]);
    assert_eq!(exit_code(&out), 2);

    // nontrivial family request on a parameter where only trivial maps exist
    let out = wittkit(&[
        "halfder-family", "--alg", "w_ab", "--a", "0", "--b", "2", "--imin", "-2", "--imax", "2",
        "--betas", "1:1",
    ]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn parse_errors_carry_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.liealg");
    std::fs::write(&path, "algebra x() {\n    family L offset 0 grade (0, 1);\n    bracket [L(m), M(n)] = 0;\n}\n").unwrap();
    let out = wittkit(&["alg-parse", "--file", path.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("3:20"), "stderr: {stderr}");
    assert!(stderr.contains("unknown family"), "stderr: {stderr}");
}

#[test]
fn alg_parse_round_trips_shipped_files() {
    let algebras = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../algebras");
    for file in ["witt.liealg", "w_ab.liealg", "w_abs.liealg", "wn_g.liealg", "hwn_g.liealg"] {
        let path = algebras.join(file);
        let out = wittkit(&["alg-parse", "--file", path.to_str().unwrap()]);
        assert_eq!(exit_code(&out), 0, "{file}: {}", String::from_utf8_lossy(&out.stderr));
        let doc = stdout_json(&out);
        let canonical = doc["result"]["canonical"].as_str().unwrap();

        // the canonical rendering is itself a valid definition file
        let dir = tempfile::tempdir().unwrap();
        let echo = dir.path().join("echo.liealg");
        std::fs::write(&echo, canonical).unwrap();
        let again = wittkit(&["alg-parse", "--file", echo.to_str().unwrap()]);
        assert_eq!(exit_code(&again), 0, "{file} re-parse");
        assert_eq!(stdout_json(&again)["result"]["canonical"].as_str().unwrap(), canonical);
    }
}

#[test]
fn bracket_verb_handles_files_and_output_path() {
    let algebras = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../algebras");
    let path = algebras.join("w_ab.liealg");
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = wittkit(&[
        "bracket", "--file", path.to_str().unwrap(), "--x", "L(1)", "--y", "2*I(0) - L(2)",
        "--out", report.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);
    assert!(out.stdout.is_empty());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    // [L_1, 2 I_0] = 2(0 - 1 + 1) I_1 = 0; [L_1, -L_2] = -(2-1) L_3
    assert_eq!(doc["result"]["bracket"]["text"], "-L(3)");
}

#[test]
fn alg_list_names_every_catalog_algebra() {
    let out = wittkit(&["alg-list"]);
    assert_eq!(exit_code(&out), 0);
    let doc = stdout_json(&out);
    let names: Vec<&str> = doc["result"]["algebras"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, vec!["hwn_g", "w_ab", "w_abs", "witt", "wn_g"]);
}
