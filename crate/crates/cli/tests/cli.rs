use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_secants"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("secants-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn solve_exit_codes() {
    let dir = scratch("exit");
    let ok = run(&["solve", "builtin:M0", "--out", "s.json"], &dir);
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(String::from_utf8_lossy(&ok.stderr).contains("census 10,0,0,10"));
    assert!(dir.join("s.json.manifest.json").exists());

    std::fs::write(dir.join("id.json"), r#"{"rows": [[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]}"#).unwrap();
    assert_eq!(code(&run(&["solve", "id.json"], &dir)), 2);

    std::fs::write(dir.join("bad.json"), "{\"rows\": [[1,0,0,0],[0,1").unwrap();
    assert_eq!(code(&run(&["solve", "bad.json"], &dir)), 1);

    std::fs::write(dir.join("field.json"), r#"{"rows": [[1,0,0,0],[0,1,0,0],[0,0,"x",0],[0,0,0,1]]}"#).unwrap();
    let named = run(&["solve", "field.json"], &dir);
    assert_eq!(code(&named), 1);
    assert!(String::from_utf8_lossy(&named.stderr).contains("rows[2][2]"));

    assert_eq!(code(&run(&["solve", "missing.json"], &dir)), 1);
    assert_eq!(code(&run(&["frobnicate"], &dir)), 1);
    assert_eq!(code(&run(&["--help"], &dir)), 0);
}

#[test]
fn classify_and_certify_a_solution_file() {
    let dir = scratch("certify");
    assert_eq!(code(&run(&["solve", "builtin:example:8", "--out", "s.json"], &dir)), 0);
    let classified = run(&["classify", "s.json"], &dir);
    assert_eq!(code(&classified), 0);
    assert!(String::from_utf8_lossy(&classified.stdout).starts_with("3,0,1,4,"));
    let certified = run(&["certify", "s.json", "--out", "c.json"], &dir);
    assert_eq!(code(&certified), 0, "{}", String::from_utf8_lossy(&certified.stderr));
    let file: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("c.json")).unwrap()).unwrap();
    assert!(file["census_certified"].as_str().unwrap().starts_with("3,0,1,4,"));
    assert_eq!(file["points"].as_array().unwrap().len(), 40);
}

#[test]
fn uncertifiable_points_exit_with_three() {
    let dir = scratch("incomplete");
    assert_eq!(code(&run(&["solve", "builtin:M0", "--out", "s.json"], &dir)), 0);
    // Certify the base solutions against a different matrix: nothing is a zero there.
    let o = run(&["certify", "s.json", "--matrix", "builtin:example:11", "--out", "c.json"], &dir);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    let file: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("c.json")).unwrap()).unwrap();
    assert!(file["census_certified"].is_null());
    assert_eq!(file["undetermined"].as_array().unwrap().len(), 10);
}

#[test]
fn monodromy_order_and_loop() {
    let dir = scratch("monodromy");
    let o = run(&["monodromy", "--order", "(1)(2 6)(3 10 5)(4 8 9)(7)", "(1 8 9 3 10 5 7 2)(4 6)"], &dir);
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "3628800");
    let o = run(&["monodromy", "--order", "(1 2)"], &dir);
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "2");
    let o = run(&["monodromy", "--loop", "builtin:gamma1"], &dir);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.contains("edge 2: -208.4283+22.1148i"), "{text}");
}

#[test]
fn report_checks_parity_and_handles_empty_input() {
    let dir = scratch("report");
    std::fs::write(dir.join("empty.csv"), "index,n_t,n_p,n_m,n_R,status,certified\n").unwrap();
    let o = run(&["report", "empty.csv"], &dir);
    assert_eq!(code(&o), 0);
    std::fs::write(
        dir.join("odd.csv"),
        "index,n_t,n_p,n_m,n_R,status,certified\n0,1,0,0,1,ok,false\n",
    )
    .unwrap();
    assert_eq!(code(&run(&["report", "odd.csv"], &dir)), 1);
    let hist = run(&["sample", "--count", "20", "--out", "r.csv"], &dir);
    assert_eq!(code(&hist), 0);
    let o = run(&["report", "r.csv", "--out", "h.csv"], &dir);
    assert_eq!(code(&o), 0);
    let h = std::fs::read_to_string(dir.join("h.csv")).unwrap();
    assert_eq!(h.lines().count(), 7, "header plus six bars");
}

#[test]
fn example_suites() {
    let dir = scratch("examples");
    assert_eq!(code(&run(&["examples", "--suite", "admissible"], &dir)), 0);
    let o = run(&["examples", "--suite", "totally-real"], &dir);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(String::from_utf8_lossy(&o.stdout).matches("ok   example").count(), 11);
}
