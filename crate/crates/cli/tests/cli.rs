use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn qss(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qss")).args(args).output().expect("binary runs")
}

fn qss_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_qss"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn write_fixture(dir: &Path, name: &str) -> String {
    let out = qss(&["fixture", name]);
    assert!(out.status.success());
    let path = dir.join(format!("{name}.txt"));
    std::fs::write(&path, &out.stdout).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn fixture_piped_into_scheme_k() {
    let fixture = qss(&["fixture", "rs747"]);
    let out = qss_stdin(&["scheme-k", "--dealer", "0", "-"], &String::from_utf8(fixture.stdout).unwrap());
    assert!(out.status.success());
    let report = json(&out);
    assert_eq!(report["command"], "scheme-k");
    assert_eq!(report["result"]["k"], 4);
    assert_eq!(report["result"]["n_players"], 7);
}

#[test]
fn star_pair_is_accessible_and_dealer_is_dropped() {
    let dir = tempfile::tempdir().unwrap();
    let g = write_fixture(dir.path(), "star3");
    let out = qss(&["access", &g, "--dealer", "0", "--set", "1,2", "--payload-only"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["quantum"], "Accessible");

    let out = qss(&["access", &g, "--dealer", "0", "--set", "0,2,1", "--payload-only"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("dealer 0 removed"));
    assert_eq!(json(&out)["B"], serde_json::json!([1, 2]));

    let out = qss(&["access", &g, "--dealer", "0", "--set", "1", "--payload-only"]);
    assert_eq!(json(&out)["quantum"], "Partial");
}

#[test]
fn bounds_csv_has_one_row_per_prime() {
    let out = qss(&["bounds", "--qmin", "2", "--qmax", "31"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("q,alpha_lower,alpha_random_threshold"));
    let qs: Vec<u32> = lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(qs, [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(qss(&["access", "--bogus"]).status.code(), Some(1));
    assert_eq!(qss(&["sample", "--n", "5", "--q", "3", "--alpha", "0.8", "--trials", "5"]).status.code(), Some(1), "seed is required");

    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "q 3\nn 3\ne 0 1\n").unwrap();
    let out = qss(&["scheme-k", bad.to_str().unwrap(), "--dealer", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());

    let isolated = dir.path().join("iso.txt");
    std::fs::write(&isolated, "q 3\nn 3\ne 1 2 1\n").unwrap();
    assert_eq!(qss(&["scheme-k", isolated.to_str().unwrap(), "--dealer", "0"]).status.code(), Some(2));
    assert_eq!(qss(&["finite-bound", "--n", "10", "--q", "4"]).status.code(), Some(2));

    let rs = write_fixture(dir.path(), "rs747");
    let out = qss(&["oracle-verify", &rs, "--dealer", "0", "--set", "1,2,3,4"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}

#[test]
fn sample_is_reproducible_across_workers() {
    let base = ["sample", "--n", "6", "--q", "3", "--alpha", "0.8", "--trials", "40", "--seed", "9", "--payload-only"];
    let one = qss(&[&base[..], &["--workers", "1"]].concat());
    let four = qss(&[&base[..], &["--workers", "4"]].concat());
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(json(&one)["trials"], 40);
}

#[test]
fn inputs_echo_reruns_to_the_same_payload() {
    let dir = tempfile::tempdir().unwrap();
    let g = write_fixture(dir.path(), "star3");
    let first = json(&qss(&["cq-round", &g, "--dealer", "0", "--set", "1,2", "--t", "2", "--rounds", "6", "--seed", "11"]));
    let i = &first["inputs"];
    let set = i["set"].as_array().unwrap().iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
    let args: Vec<String> = vec![
        "cq-round".into(),
        i["graph"].as_str().unwrap().into(),
        "--dealer".into(),
        i["dealer"].to_string(),
        "--set".into(),
        set,
        "--t".into(),
        i["t"].to_string(),
        "--rounds".into(),
        i["rounds"].to_string(),
        "--seed".into(),
        i["seed"].to_string(),
        "--amplitudes".into(),
        i["amplitudes"].to_string(),
    ];
    let again = json(&qss(&args.iter().map(String::as_str).collect::<Vec<_>>()));
    assert_eq!(first["result"], again["result"]);
    assert_eq!(first["seed"], 11);
    assert_eq!(first["result"]["agreeing"], 6);
}

#[test]
fn search_resumes_from_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let cp = dir.path().join("search.cp");
    let cp = cp.to_str().unwrap();
    let direct = json(&qss(&["search", "--n", "5", "--q", "2", "--k", "3", "--budget", "2000", "--payload-only"]));
    assert_eq!(direct["status"], "found");

    let mut last = Value::Null;
    for round in 0..200 {
        let out = qss(&["search", "--n", "5", "--q", "2", "--k", "3", "--budget", "7", "--workers", "2", "--checkpoint", cp, "--payload-only"]);
        last = json(&out);
        if last["status"] != "budget_exceeded" {
            assert!(out.status.success(), "round {round}");
            break;
        }
        assert_eq!(out.status.code(), Some(3));
        assert!(std::fs::read_to_string(cp).unwrap().starts_with("# search n=5 q=2 k=3"));
    }
    assert_eq!(last["status"], "found");
    assert_eq!(last["index"], direct["index"]);
    assert_eq!(last["graph"], direct["graph"]);
}

#[test]
fn oracle_verify_star_agrees() {
    let dir = tempfile::tempdir().unwrap();
    let g = write_fixture(dir.path(), "star3");
    let out = qss(&["oracle-verify", &g, "--dealer", "0", "--payload-only"]);
    assert!(out.status.success());
    let r = json(&out);
    assert_eq!(r["checked"], 3);
    assert_eq!(r["disagreements"], 0);
    assert!(r["rows"].as_array().unwrap().iter().all(|row| row["agrees"] == true));
}

#[test]
fn qq_decode_recovers_and_rejects_partial_sets() {
    let dir = tempfile::tempdir().unwrap();
    let g = write_fixture(dir.path(), "star3");
    let out = qss(&["qq-decode", &g, "--dealer", "0", "--set", "1,2", "--seed", "4", "--payload-only"]);
    assert!(out.status.success());
    let r = json(&out);
    assert!(r["fidelity"].as_f64().unwrap() > 1.0 - 1e-9);
    let out = qss(&["qq-decode", &g, "--dealer", "0", "--set", "2", "--seed", "4"]);
    assert_eq!(out.status.code(), Some(2));
}
