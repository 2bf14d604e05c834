use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_softguess")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&stdout(o)).unwrap()
}

fn temp_file(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("softguess-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn dyadic_file() -> String {
    let p = temp_file("dyadic.json", r#"{"probs": [0.5, 0.25, 0.125, 0.125]}"#);
    format!("file:{}", p.display())
}

#[test]
fn entropy_of_uniform() {
    let v = json(&run(&["entropy", "--pmf", "uniform:4", "--alpha", "0.5", "--eps", "0"]));
    assert_eq!(v["smooth_renyi"], 2.0);
    assert_eq!(v["renyi"], 2.0);
}

#[test]
fn entropy_matches_library() {
    let v = json(&run(&["entropy", "--pmf", &dyadic_file(), "--alpha", "0.5", "--eps", "0.125"]));
    let p = softguess::Pmf::new(&[0.5, 0.25, 0.125, 0.125]).unwrap();
    let order = softguess::entropy::EntropyOrder::new(0.5).unwrap();
    let lib = softguess::entropy::smooth_renyi(&p, order, 0.125).unwrap();
    assert_eq!(v["smooth_renyi"].as_f64().unwrap().to_string(), softguess::fmt::g12(lib));
}

#[test]
fn entropy_rejects_bad_order() {
    let o = run(&["entropy", "--pmf", "uniform:4", "--alpha", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha"));
}

#[test]
fn entropy_of_joint() {
    let m = temp_file("joint.csv", "0.25,0.25\n0.25,0.25\n");
    let v = json(&run(&["entropy", "--joint", &format!("file:{}", m.display()), "--alpha", "0.5"]));
    assert_eq!(v["arimoto_renyi"], 1.0);
    assert_eq!(v["conditional_shannon"], 1.0);
}

#[test]
fn moment_of_dyadic() {
    let v = json(&run(&["moment", "--pmf", &dyadic_file(), "--rho", "1", "--D", "1", "--eps", "0.125", "--oracle"]));
    assert_eq!(v["moment"], 1.0);
    assert_eq!(v["error_prob"], 0.125);
    assert_eq!(v["oracle_match"], true);
    assert_eq!(v["cutoff"], 2);
}

#[test]
fn list_size_flag_matches_distortion() {
    let a = stdout(&run(&["moment", "--pmf", "random:7:3", "--L", "2", "--eps", "0.1"]));
    let b = stdout(&run(&["moment", "--pmf", "random:7:3", "--D", "1", "--eps", "0.1"]));
    assert_eq!(a, b);
    let o = run(&["moment", "--pmf", "uniform:3", "--L", "2", "--D", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn moment_rejects_full_budget() {
    let o = run(&["moment", "--pmf", "uniform:4", "--eps", "1.0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oracle_size_limit_is_a_budget_error() {
    let o = run(&["moment", "--pmf", "uniform:9", "--oracle"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn input_source_is_required_and_exclusive() {
    assert_eq!(run(&["moment"]).status.code(), Some(2));
    let o = run(&["moment", "--pmf", "uniform:2", "--joint", "randjoint:2:2:1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn side_information_moment() {
    let v = json(&run(&["moment", "--joint", "randjoint:2:4:3", "--D", "1", "--eps", "0.1", "--oracle"]));
    assert_eq!(v["oracle_match"], true);
    assert_eq!(v["eps_y"].as_array().unwrap().len(), 2);
}

#[test]
fn code_of_dyadic() {
    let v = json(&run(&["code", "--pmf", &dyadic_file(), "--rho", "1", "--D", "1", "--eps", "0", "--emit-strings"]));
    assert!((v["lambda"].as_f64().unwrap() - 0.32193).abs() < 1e-5);
    assert_eq!(v["codewords"], serde_json::json!(["", "0"]));
    assert_eq!(v["excess_prob"], 0.0);
}

#[test]
fn figure_table() {
    let o = run(&["figure", "--case", "1b", "--grid", "0.1:10:100"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("rho,new_upper,old_upper,lambda_exact"));
    assert_eq!(lines.count(), 100);
}

#[test]
fn figure_is_deterministic() {
    let a = stdout(&run(&["figure", "--case", "1c", "--seed", "7"]));
    let b = stdout(&run(&["figure", "--case", "1c", "--seed", "7"]));
    assert_eq!(a, b);
    let c = stdout(&run(&["figure", "--case", "1c", "--seed", "8"]));
    assert_ne!(a, c);
    assert_eq!(run(&["figure", "--case", "3a"]).status.code(), Some(2));
}

#[test]
fn asymptotics_table() {
    let o = run(&["asymptotics", "--pmf", "bernoulli:0.2", "--n", "4..14", "--D", "0.2", "--eps", "0.1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("n,exact_per_symbol,predicted,residual\n"));
    assert_eq!(text.lines().count(), 12);
    let alt = stdout(&run(&["asymptotics", "--pmf", "bernoulli:0.2", "--n", "4:14", "--D", "0.2", "--eps", "0.1"]));
    assert_eq!(text, alt);
}

#[test]
fn asymptotics_domain_and_budget() {
    let o = run(&["asymptotics", "--pmf", "bernoulli:0.2", "--n", "4..6", "--D", "0.8"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("admissible range"));
    let o = run(&["asymptotics", "--pmf", "uniform:2", "--n", "50", "--D", "0.1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("budget"));
}

#[test]
fn single_letter_row_matches_moment() {
    let a = run(&["asymptotics", "--pmf", "random:5:2", "--n", "1", "--D", "0.5", "--eps", "0.2", "--format", "json"]);
    let m = json(&run(&["moment", "--pmf", "random:5:2", "--D", "0.5", "--eps", "0.2"]));
    let row = &json(&a)[0];
    let exact = row["exact_per_symbol"].as_f64().unwrap();
    assert!((exact - m["moment"].as_f64().unwrap().log2()).abs() < 1e-10);
}

#[test]
fn output_file() {
    let dir = std::env::temp_dir().join(format!("softguess-cli-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("fig.csv");
    let o = run(&["figure", "--case", "2a", "--grid", "1:2:3", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(path).unwrap().lines().count(), 4);
}

#[test]
fn selftest_quick() {
    let v = json(&run(&["selftest", "--quick"]));
    assert_eq!(v["pass"], true);
    assert_eq!(v["criteria"].as_array().unwrap().len(), 11);
}

#[test]
fn selftest_rejects_corrupt_input_first() {
    let bad = temp_file("bad.json", "{\"probs\": [0.5, 0.2");
    let o = run(&["selftest", "--pmf", &format!("file:{}", bad.display())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    assert!(!String::from_utf8_lossy(&o.stderr).contains("PASS"));
}
