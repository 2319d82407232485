use std::path::{Path, PathBuf};
use std::process::Command;

fn run(args: &[&str]) -> (Option<i32>, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_biharmonic"))
        .args(args)
        .output()
        .expect("spawn biharmonic");
    (out.status.code(), String::from_utf8(out.stdout).unwrap())
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../schemas")
        .join(format!("{name}.schema.json"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

fn assert_valid(name: &str, text: &str) {
    let doc: serde_json::Value = serde_json::from_str(text).unwrap();
    let validator = schema(name);
    let errors: Vec<String> = validator.iter_errors(&doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{name}: {errors:?}\n{text}");
}

fn field_file() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("biharmonic-schemas-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("field.csv");
    let (code, _) = run(&[
        "shoot",
        "--n",
        "13",
        "--p",
        "3",
        "--a",
        "1",
        "--r-max",
        "20",
        "--csv",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, Some(0));
    path
}

#[test]
fn exponents_output_matches_its_schema() {
    for (n, p) in [("13", "3"), ("12", "5"), ("4", "2")] {
        let (code, text) = run(&["exponents", "--n", n, "--p", p, "--json"]);
        assert_eq!(code, Some(0));
        assert_valid("exponents", &text);
    }
}

#[test]
fn shoot_output_matches_its_schema() {
    let (_, text) = run(&["shoot", "--n", "13", "--p", "3", "--a", "1", "--r-max", "20"]);
    assert_valid("shoot", &text);
    let (_, text) = run(&[
        "shoot", "--n", "13", "--p", "3", "--a", "1", "--b", "-2", "--r-max", "20",
    ]);
    assert_valid("shoot", &text);
}

#[test]
fn field_commands_match_their_schemas() {
    let field = field_file();
    let f = field.to_str().unwrap();
    let common = ["--input", f, "--n", "13", "--p", "3"];
    let with = |cmd: &str, extra: &[&str]| {
        let mut args = vec![cmd];
        args.extend_from_slice(&common);
        args.extend_from_slice(extra);
        run(&args).1
    };
    assert_valid("energy", &with("energy", &["--radii", "0.5:10:50"]));
    assert_valid("blowdown", &with("blowdown", &["--lambdas", "1,2,4"]));
    assert_valid("pohozaev", &with("pohozaev", &["--R", "1,5"]));
}

#[test]
fn branch_and_verify_match_their_schemas() {
    let (_, text) = run(&["branch", "--n", "6", "--p", "3", "--grid", "30"]);
    assert_valid("branch", &text);
    let (code, text) = run(&["verify-all", "--n", "6", "--p", "3", "--grid", "40", "--json"]);
    assert!(code.is_some());
    assert_valid("verify", &text);
}

#[test]
fn schemas_reject_foreign_documents() {
    let validator = schema("energy");
    assert!(!validator.is_valid(&serde_json::json!({"monotone": true})));
    assert!(!validator.is_valid(&serde_json::json!({
        "monotone": true, "satisfiesLowerBound": true, "minDefect": "huge", "samples": 3
    })));
    assert!(validator.is_valid(&serde_json::json!({
        "monotone": true, "satisfiesLowerBound": true, "minDefect": "inf", "samples": 3
    })));
}
