use std::path::PathBuf;
use std::process::{Command, Output};

fn sumsq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sumsq")).args(args).output().expect("binary runs")
}

fn corpus(file: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "corpus", file].iter().collect();
    p.to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn classify_exit_codes_follow_status() {
    assert_eq!(sumsq(&["classify", &corpus("or_p2_q5.op")]).status.code(), Some(0));
    assert_eq!(sumsq(&["classify", &corpus("neg_dependent_off_x1.op")]).status.code(), Some(2));
    assert_eq!(sumsq(&["classify", &corpus("neg_sigma_p_empty.op")]).status.code(), Some(2));
    assert_eq!(sumsq(&["classify", &corpus("neg_needs_coordinates.op")]).status.code(), Some(3));
}

#[test]
fn classify_json_to_stdout_and_file() {
    let o = sumsq(&["classify", &corpus("or_p3_q4.op"), "--json", "-"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).expect("valid json");
    assert_eq!(v["case"], "I");
    assert_eq!((v["p"].as_u64(), v["q"].as_u64(), v["r"].as_u64()), (Some(3), Some(4), Some(0)));
    assert_eq!((v["threshold"]["num"].as_i64(), v["threshold"]["den"].as_i64()), (Some(4), Some(3)));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let o = sumsq(&["classify", &corpus("or_p3_q4.op"), "--json", path.to_str().unwrap()]);
    assert!(stdout(&o).contains("gevrey threshold: 4/3"));
    let written: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(written, v);
}

#[test]
fn parse_errors_exit_4_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.op");
    std::fs::write(&path, "X1 = D1\nX2 = x1*D2*D3\nX3 = x1^2*D3\n").unwrap();
    let o = sumsq(&["classify", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains(":2:"), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn missing_file_exits_1() {
    assert_eq!(sumsq(&["classify", "/nonexistent/x.op"]).status.code(), Some(1));
}

#[test]
fn corpus_directory_passes() {
    let o = sumsq(&["corpus", &corpus("")]);
    let out = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{out}");
    assert!(!out.contains("FAIL"));
    assert!(out.lines().last().unwrap().ends_with("passed"));
}

#[test]
fn bracket_and_stratify() {
    let o = sumsq(&["bracket", &corpus("or_p2_q3.op"), "--word", "1,1,3"]);
    assert!(stdout(&o).contains("(2)*D3"), "{}", stdout(&o));
    let o = sumsq(&["stratify", &corpus("or_p2_q5.op"), "--max-level", "5"]);
    let out = stdout(&o);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(out.lines().count(), 5);
    assert!(out.lines().last().unwrap().contains("zero section"), "{out}");
}

#[test]
fn expand_and_basis() {
    let o = sumsq(&["expand", &corpus("case1_ex1_p2_q3.op"), "-j", "2", "-m", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("fitted C"));
    let o = sumsq(&["basis", &corpus("or_p2_q3.op"), "--target", "x1*D2 + x1^2*D3"]);
    let out = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.contains("a = 0") && out.contains("b = 1") && out.contains("c = 1"), "{out}");
    assert!(out.contains("residual below degree 8: 0"));
}

#[test]
fn estimate_sim_json_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.txt");
    let o = sumsq(&["estimate-sim", "-p", "2", "-q", "3", "-r", "10", "--json", "--trace", trace.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["weight"].as_u64(), Some(15));
    let text = std::fs::read_to_string(&trace).unwrap();
    assert!(text.starts_with("# p=2 q=3 r=10"), "{text}");
    let o = sumsq(&["estimate-sim", "-p", "2", "-q", "3", "-r", "10", "--mode", "exhaustive"]);
    assert!(stdout(&o).contains("max K+L = 15"));
}
