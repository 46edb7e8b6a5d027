use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn aon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aon")).args(args).output().expect("spawn aon")
}

fn stdout(args: &[&str]) -> String {
    let o = aon(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)).unwrap()
}

fn scratch(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("aon-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

#[test]
fn threshold_goldens() {
    let cases = [
        (&["--pattern", "sun:5", "--n", "100", "--q-grid", "0:1:13"][..], "sun5_n100_thresholds.csv"),
        (&["--pattern", "cliques:8,4,4,4,4", "--n", "1e6", "--q-grid", "0,1/4,1/2,3/4,1"][..], "cliques8_4x4_n1e6_thresholds.csv"),
        (&["--pattern", "clique:4", "--n", "10"][..], "k4_n10_thresholds.csv"),
    ];
    for (args, file) in cases {
        let mut full = vec!["thresholds", "--format", "csv"];
        full.extend_from_slice(args);
        assert_eq!(stdout(&full), golden(file), "{file}");
    }
}

#[test]
fn overlap_and_classify_goldens() {
    assert_eq!(stdout(&["overlap", "--pattern", "clique:3", "--n", "4"]), golden("k3_n4_overlap.csv"));
    assert_eq!(stdout(&["overlap", "--pattern", "matching:4", "--n", "4"]), golden("matching4_n4_overlap.csv"));
    assert_eq!(
        stdout(&["classify", "--pattern", "cycle-out:6", "--n", "1e6", "--format", "csv"]),
        golden("cycle_out6_n1e6_classify.csv")
    );
    assert_eq!(
        stdout(&["classify", "--pattern", "cliques:12,4", "--n", "1e6", "--format", "csv"]),
        golden("cliques12_4_n1e6_classify.csv")
    );
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(aon(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(aon(&["generate", "matching", "--n", "7"]).status.code(), Some(1));
    assert_eq!(aon(&["thresholds", "--pattern", "clique:4"]).status.code(), Some(1));
    assert_eq!(aon(&["thresholds", "--pattern", "blob:4", "--n", "10"]).status.code(), Some(1));
    assert_eq!(aon(&["simulate", "--pattern", "clique:3", "--n", "6", "--p-grid", "0:2:3"]).status.code(), Some(1));
    assert_eq!(aon(&["--help"]).status.code(), Some(0));
}

#[test]
fn budget_overflow_exits_2_and_alpha_only_recovers() {
    let base = ["thresholds", "--pattern", "sun:8", "--n", "20", "--set", "search_nodes=100", "--format", "csv"];
    let o = aon(&base);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha-only"));

    let mut args = base.to_vec();
    args.push("--alpha-only");
    let csv = stdout(&args);
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("q,min_edges,psi,lambda,alpha"));
    for row in lines {
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!((f[2], f[3]), ("", ""), "{row}");
        assert!(!f[4].is_empty());
    }

    let o = aon(&["simulate", "--pattern", "clique:3", "--n", "40", "--p-grid", "0.5", "--trials", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_suites_pass() {
    for suite in ["oracle", "identities", "paper-examples"] {
        let out = stdout(&["verify", suite]);
        assert!(!out.is_empty() && !out.contains("FAIL"), "{suite}:\n{out}");
    }
}

#[test]
fn simulate_endpoints_and_determinism() {
    let args = ["simulate", "--pattern", "clique:3", "--n", "6", "--p-grid", "0,1", "--trials", "50", "--seed", "5", "--format", "csv"];
    let a = stdout(&args);
    assert_eq!(a, stdout(&args));
    let rows: Vec<Vec<&str>> = a.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][1], "0");
    // K(1 - K/N) with K = 3, N = 15
    assert_eq!(rows[1][1], "2.4");
    assert!((rows[1][2].parse::<f64>().unwrap() - 0.8).abs() < 1e-15);
}

#[test]
fn manifest_hashes_match_files() {
    let dir = scratch("manifest");
    let d = dir.to_str().unwrap();
    let o = aon(&["simulate", "--pattern", "path:3", "--n", "5", "--p-grid", "0:1:5", "--trials", "100", "--out", d]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["input_sha256"].as_str().unwrap().len(), 64);
    let files = manifest["files"].as_array().unwrap();
    let names: Vec<&str> = files.iter().map(|f| f["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["curve.csv", "curve.svg", "curve.json"]);
    for f in files {
        let bytes = std::fs::read(dir.join(f["name"].as_str().unwrap())).unwrap();
        assert_eq!(f["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = scratch("config");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, "# K4 landscape\npattern = clique:4\nn = 10\nq_grid = 0,1\n").unwrap();
    let c = cfg.to_str().unwrap();
    let from_file = stdout(&["thresholds", "--config", c, "--format", "csv"]);
    assert_eq!(from_file.lines().count(), 3);
    let overridden = stdout(&["thresholds", "--config", c, "--format", "csv", "--q-grid", "0:1:11"]);
    assert_eq!(overridden, golden("k4_n10_thresholds.csv"));
    std::fs::write(&cfg, "pattern = clique:4\nbogus line\n").unwrap();
    let o = aon(&["thresholds", "--config", c]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn generate_round_trips_through_file_patterns() {
    let dir = scratch("generate");
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("sun5.txt");
    let o = aon(&["generate", "sun", "--k", "5", "--out", file.to_str().unwrap()]);
    assert!(o.status.success());
    let spec = format!("file:{}", file.display());
    let a = stdout(&["thresholds", "--pattern", &spec, "--n", "100", "--q-grid", "0:1:13", "--format", "csv"]);
    assert_eq!(a, golden("sun5_n100_thresholds.csv"));
    std::fs::remove_dir_all(&dir).unwrap();
}
