use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_higgsalg"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn higgsalg")
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().unwrap()
}

fn stdout(args: &[&str]) -> String {
    String::from_utf8(run(args).stdout).unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["--version"]), 0);
    assert_eq!(code(&["verify", "--help"]), 0);
}

#[test]
fn usage_errors() {
    assert_eq!(code(&[]), 64);
    assert_eq!(code(&["frobnicate"]), 64);
    assert_eq!(code(&["verify", "--c1", "x", "--c3", "1", "--j2", "3"]), 64);
    assert_eq!(code(&["verify", "--c1", "1", "--c3", "1"]), 64);
}

#[test]
fn domain_errors_exit_65() {
    let out = run(&[
        "build", "--kind", "villain", "--form", "2", "--c1", "1", "--c3", "-1", "--j2", "2",
        "--dim", "16",
    ]);
    assert_eq!(out.status.code(), Some(65));
    assert!(String::from_utf8_lossy(&out.stderr).contains("form 2 requires C3 > 0"));
    assert_eq!(
        code(&["build", "--kind", "generic-unitary", "--k", "3", "--c1", "1", "--c3", "1", "--j2", "3", "--dim", "6"]),
        65
    );
    assert_eq!(
        code(&["build", "--kind", "villain", "--field", "exact", "--c1", "1", "--c3", "1", "--j2", "2", "--dim", "16"]),
        65
    );
}

#[test]
fn io_errors_exit_74() {
    assert_eq!(code(&["export", "--input", "/nonexistent/realization.json"]), 74);
}

#[test]
fn verify_exit_codes() {
    assert_eq!(code(&["verify", "--c1", "2", "--c3", "0", "--j2", "3", "--dim", "16"]), 0);
    assert_eq!(code(&["verify", "--kind", "dyson", "--c1", "1", "--c3", "1", "--j2", "3", "--dim", "16"]), 0);
    // vacuous only: block too small for every check
    assert_eq!(code(&["verify", "--c1", "2", "--c3", "0", "--j2", "3", "--dim", "3"]), 2);
    // step 2 fails [J3, J±] = ±J±
    assert_eq!(code(&["verify", "--k", "2", "--c1", "2", "--c3", "0", "--j2", "3", "--dim", "16"]), 1);
}

#[test]
fn verify_json_is_parseable() {
    let text = stdout(&["verify", "--c1", "1", "--c3", "1", "--j2", "3", "--dim", "12", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let checks = v[0]["checks"].as_array().unwrap();
    assert!(checks.iter().any(|c| c["name"] == "casimir/eigenvalue"));
    assert!(checks.iter().all(|c| c["pass"] == true));
}

#[test]
fn output_is_deterministic() {
    let args = ["verify", "--kind", "dyson", "--field", "float", "--c1", "3", "--c3", "-1", "--j2", "4", "--dim", "24"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let sweep = ["sweep", "--dim", "12", "--format", "json"];
    let a = bin().args(sweep).env("HIGGSALG_THREADS", "1").output().unwrap();
    let b = bin().args(sweep).env("HIGGSALG_THREADS", "4").output().unwrap();
    assert_eq!(a.status.code(), b.status.code());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn build_export_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("hp.json");
    let p = path.to_str().unwrap();
    assert_eq!(
        code(&["build", "--c1", "1", "--c3", "1", "--j2", "3", "--dim", "6", "--output", p]),
        0
    );
    let original = std::fs::read_to_string(&path).unwrap();
    let again = stdout(&["export", "--input", p, "--format", "json"]);
    let a: serde_json::Value = serde_json::from_str(&original).unwrap();
    let b: serde_json::Value = serde_json::from_str(&again).unwrap();
    assert_eq!(a, b);
    let csv = stdout(&["export", "--input", p, "--format", "csv"]);
    assert!(csv.starts_with("operator,row,col,value"));
    assert!(csv.contains("sqrt("));
}

#[test]
fn sweep_with_grid_file() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.json");
    std::fs::write(&grid, r#"[{"c1": "2", "c3": "0", "j2": 3}, {"c1": "1/2", "c3": 1, "j2": 4}]"#).unwrap();
    let out = dir.path().join("report.txt");
    let status = code(&[
        "sweep", "--grid", grid.to_str().unwrap(), "--kinds", "hp:1,dyson:1", "--dim", "16",
        "--output", out.to_str().unwrap(),
    ]);
    assert_eq!(status, 0);
    let text = std::fs::read_to_string(&out).unwrap();
    let headers = text.lines().filter(|l| l.contains(" dim=16 ")).count();
    assert_eq!(headers, 4, "{text}");
}

#[test]
fn malformed_grid_is_a_domain_or_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.json");
    std::fs::write(&grid, r#"[{"c1": "a/b"}]"#).unwrap();
    let c = code(&["sweep", "--grid", grid.to_str().unwrap()]);
    assert!(c == 64 || c == 65, "exit {c}");
}

#[test]
fn tables() {
    let csv = stdout(&["table", "--c1", "-2", "--c3", "1", "--j2", "2"]);
    assert!(csv.starts_with("# C1=-2\n# C3=1\n# j=1\nn,j3,plus,minus,admissible\n"), "{csv}");
    for content in ["product", "s1", "s1-closed", "boundaries", "constants"] {
        let out = run(&["table", "--content", content, "--c1", "3", "--c3", "-1", "--j2", "4"]);
        assert_eq!(out.status.code(), Some(0), "{content}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stdout.is_empty(), "{content}");
    }
}

#[test]
fn every_kind_is_reachable() {
    let dir = tempfile::tempdir().unwrap();
    for (kind, extra) in [
        ("hp", vec!["--k", "1"]),
        ("dyson", vec!["--k", "2"]),
        ("generic-unitary", vec!["--k", "3"]),
        ("generic-dyson", vec!["--k", "4"]),
        ("villain", vec!["--form", "1"]),
        ("villain", vec!["--form", "2"]),
    ] {
        let path = dir.path().join(format!("{kind}.json"));
        let mut args = vec!["build", "--kind", kind, "--c1", "1", "--c3", "1", "--j2", "4", "--dim", "16"];
        args.extend(extra);
        args.extend(["--output", path.to_str().unwrap()]);
        assert_eq!(code(&args), 0, "{kind}");
        assert!(Path::new(&path).exists());
        assert_eq!(code(&["export", "--input", path.to_str().unwrap(), "--format", "text"]), 0, "{kind}");
    }
}
