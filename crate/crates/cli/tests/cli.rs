use std::process::{Command, Output};

use proptest::prelude::*;
use serde_json::Value;

fn dowry(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dowry"))
        .args(args)
        .env_remove("DOWRY_SEED")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let out = dowry(&all);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Wins of a `(k_1, ..., k_s)`-strategy over all orders, by Heap's algorithm.
fn enumerate_wins(n: usize, ks: &[usize]) -> u64 {
    fn wins(perm: &[usize], ks: &[usize]) -> bool {
        let (mut best, mut made) = (0, 0);
        for (i, &v) in perm.iter().enumerate() {
            if v > best {
                best = v;
                if made < ks.len() && i + 1 > ks[made] {
                    made += 1;
                    if v == perm.len() {
                        return true;
                    }
                }
            }
        }
        false
    }
    fn heap(k: usize, a: &mut Vec<usize>, ks: &[usize], acc: &mut u64) {
        if k <= 1 {
            *acc += wins(a, ks) as u64;
            return;
        }
        for i in 0..k {
            heap(k - 1, a, ks, acc);
            let j = if k.is_multiple_of(2) { i } else { 0 };
            if i + 1 < k {
                a.swap(j, k - 1);
            }
        }
    }
    let mut a: Vec<usize> = (1..=n).collect();
    let mut acc = 0;
    heap(n, &mut a, ks, &mut acc);
    acc
}

#[test]
fn threshold_examples() {
    for (n, s, k, p) in [("4", "2", [0, 1].as_slice(), "17/24"), ("4", "1", &[1], "11/24"), ("1", "1", &[0], "1/1")] {
        let doc = json(&["thresholds", "--n", n, "--s", s]);
        assert_eq!(doc["probability"]["fraction"], p);
        let got: Vec<usize> = serde_json::from_value(doc["k"].clone()).unwrap();
        assert_eq!(got, k);
        let mut a = got.clone();
        a.reverse();
        assert_eq!(doc["a"], serde_json::to_value(a).unwrap());
    }
}

#[test]
fn winprob_examples() {
    assert_eq!(json(&["winprob", "--n", "4", "--k", "0,1"])["probability"]["fraction"], "17/24");
    assert_eq!(json(&["winprob", "--n", "4", "--k", "1"])["probability"]["fraction"], "11/24");
    let doc = json(&["winprob", "--n", "6", "--k", "1,2"]);
    assert_eq!(doc["permutations"], "720");
    assert_eq!(doc["wins"], enumerate_wins(6, &[1, 2]).to_string());
}

#[test]
fn asymptotic_examples() {
    let one = json(&["asymptotic", "--s", "1"]);
    assert!((one["x"][0].as_f64().unwrap() - 0.3678794412).abs() < 1e-10);
    assert!((one["p"][0].as_f64().unwrap() - 0.3678794412).abs() < 1e-10);
    let two = json(&["asymptotic", "--s", "2", "--tolerance", "1e-12"]);
    assert!((two["x"][1].as_f64().unwrap() - (-1.5_f64).exp()).abs() < 1e-10);
    let table = dowry(&["asymptotic", "--s", "5"]);
    let text = String::from_utf8(table.stdout).unwrap();
    for v in ["0.3678794412", "0.2231301601", "0.5910096013", "0.0594292419", "0.8825499146"] {
        assert!(text.contains(v), "{v} missing from\n{text}");
    }
}

#[test]
fn usage_errors_exit_two() {
    let out = dowry(&["winprob", "--n", "4", "--k", "2,1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("thresholds must be non-decreasing"));
    let out = dowry(&["simulate", "--n", "10", "--k", "3,1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("thresholds must be non-decreasing"));
    for args in [
        &["thresholds", "--n", "0", "--s", "1"][..],
        &["thresholds", "--n", "4"],
        &["tree", "--n", "3", "--s", "1", "--format", "csv"],
        &["winprob", "--n", "4", "--k", "1", "--format", "dot"],
        &["simulate", "--n", "10", "--s", "1", "--k", "2"],
        &["bogus"],
    ] {
        assert_eq!(dowry(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn verify_exit_status_and_anchors() {
    let out = dowry(&["verify", "--n-max", "6", "--s-max", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(String::from_utf8_lossy(&out.stdout).contains("all checks passed"));

    let doc = json(&["verify", "--n-max", "4", "--s-max", "2"]);
    assert_eq!(doc["passed"], true);
    let text = doc.to_string();
    assert!(text.contains("11/24") && text.contains("17/24"));

    // Beyond the enumeration caps.
    assert_eq!(dowry(&["verify", "--n-max", "20"]).status.code(), Some(2));
}

#[test]
fn output_formats() {
    let csv = dowry(&["winprob", "--n", "4", "--k", "0,1", "--format", "csv"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "n,k,wins,permutations,probability,decimal,path");
    assert!(lines.next().unwrap().starts_with("4,\"(0,1)\",17,24,17/24,"));

    let table = String::from_utf8(dowry(&["thresholds", "--n", "4", "--s", "2"]).stdout).unwrap();
    assert!(table.contains("17/24") && table.contains("(0,1)"));

    let dot = String::from_utf8(dowry(&["tree", "--n", "4", "--s", "2"]).stdout).unwrap();
    assert!(dot.starts_with("digraph"));
    let tree = json(&["tree", "--n", "4", "--s", "2"]);
    assert_eq!(tree["optimal"], "17/24");

    let sim = json(&["simulate", "--n", "20", "--s", "2", "--trials", "500", "--seed", "7"]);
    assert_eq!(sim["seed"], 7);
    assert_eq!(sim["results"].as_array().unwrap().len(), 2);
}

#[test]
fn output_file_and_seed_env() {
    let path = std::env::temp_dir().join(format!("dowry-cli-{}.json", std::process::id()));
    let p = path.to_str().unwrap();
    let out = dowry(&["simulate", "--n", "30", "--s", "1", "--trials", "1000", "--format", "json", "--output", p]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let written: Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_eq!(written["seed"], 2024);

    let env = Command::new(env!("CARGO_BIN_EXE_dowry"))
        .args(["simulate", "--n", "30", "--s", "1", "--trials", "1000", "--format", "json"])
        .env("DOWRY_SEED", "31")
        .output()
        .unwrap();
    let doc: Value = serde_json::from_slice(&env.stdout).unwrap();
    assert_eq!(doc["seed"], 31);
    let explicit = json(&["simulate", "--n", "30", "--s", "1", "--trials", "1000", "--seed", "31"]);
    assert_eq!(doc, explicit);
}

#[test]
fn repeated_runs_are_identical() {
    let args = ["esr-sweep", "--n", "200", "--s-max", "3", "--trials", "4000", "--seed", "5", "--format", "csv"];
    let first = dowry(&args).stdout;
    assert!(!first.is_empty());
    assert_eq!(first, dowry(&args).stdout);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn winprob_matches_enumeration(n in 1usize..=7, a in 0usize..7, b in 0usize..7) {
        let (lo, hi) = (a.min(b).min(n - 1), a.max(b).min(n - 1));
        let k = format!("{lo},{hi}");
        let doc = json(&["winprob", "--n", &n.to_string(), "--k", &k]);
        prop_assert_eq!(doc["wins"].as_str().unwrap(), enumerate_wins(n, &[lo, hi]).to_string());
    }
}
