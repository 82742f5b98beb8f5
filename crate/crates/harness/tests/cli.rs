use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_projfgd"))
}

#[test]
fn verify_gram_bound_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["verify", "--suite", "gram-bound", "--seed", "1", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("PASS gram_bound"));
    let json = std::fs::read_to_string(dir.path().join("verify_report.json")).unwrap();
    assert!(json.contains("\"violations\": 0"));
}

#[test]
fn run_on_missing_file_names_it() {
    let out = bin().args(["run", "--data", "/no/such/dataset.txt"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/no/such/dataset.txt"));
}

#[test]
fn usage_errors_exit_one() {
    let out = bin().args(["run", "--frobnicate"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
    assert_eq!(bin().output().unwrap().status.code(), Some(1));
    assert_eq!(bin().arg("--help").output().unwrap().status.code(), Some(0));
}

#[test]
fn generate_then_run() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = bin()
        .args(["generate", "--n", "4", "--r", "2", "--c-sam", "8", "--seed", "3", "--out"])
        .arg(d)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let trace = d.join("trace.csv");
    let out = bin()
        .args(["run", "--rank", "2", "--data"])
        .arg(d.join("dataset.txt"))
        .arg("--truth")
        .arg(d.join("truth.factor"))
        .arg("--trace-out")
        .arg(&trace)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(summary["rel_frob_error"].as_f64().unwrap() < 1e-3);
    assert!(std::fs::read_to_string(trace).unwrap().starts_with("iter,time_s,"));
}

#[test]
fn bench_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tiny.toml");
    std::fs::write(
        &cfg,
        "name = \"tiny\"\nn = [4]\nr = [1]\nc_sam = 6.0\nalgorithms = [\"projfgd\", \"rsvp\"]\ntrials = 2\nmax_iters = 200\n",
    )
    .unwrap();
    let res = dir.path().join("res");
    let out = bin().arg("bench").arg("--config").arg(&cfg).arg("--out").arg(&res).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["results.json", "table.txt", "table.csv", "traces", "plots"] {
        assert!(res.join(f).exists(), "{f}");
    }
    let out = bin().arg("report").arg("--dir").arg(&res).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 4);

    std::fs::write(&cfg, "name = \"bad\"\ntrials = 0\n").unwrap();
    let out = bin().arg("bench").arg("--config").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn shipped_configs_parse() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.extension().is_some_and(|x| x == "toml") {
            projfgd_harness::ExperimentConfig::load(&p).unwrap();
            seen += 1;
        }
    }
    assert!(seen >= 5);
}
