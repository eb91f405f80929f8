use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lcoal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lcoal")).args(args).output().expect("run lcoal")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn classify_kingman_text() {
    let out = lcoal(&["classify", "--measure", "kingman"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("class: ComesDownFromInfinity"));
}

#[test]
fn classify_json_is_machine_readable() {
    let out = lcoal(&["classify", "--measure", "bolthausen-sznitman", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["class"], "DustFreeStaysInfinite");
}

#[test]
fn atom_at_one_is_a_validation_error() {
    let out = lcoal(&["classify", "--measure", "atom:1.0,0.3"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("atom"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&lcoal(&["classify"])), 1);
    assert_eq!(code(&lcoal(&["classify", "--measure", "kingman", "--no-such-flag"])), 1);
    assert_eq!(code(&lcoal(&["frobnicate"])), 1);
    assert_eq!(code(&lcoal(&["--help"])), 0);
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let out = lcoal(&["simulate", "--measure", "beta:1,1", "--n", "30", "--seed", "11", "--replicates", "3", "--out", p(d)]);
        assert_eq!(code(&out), 0);
    }
    for r in 0..3 {
        let name = format!("history_{r:04}.json");
        let x = std::fs::read(a.join(&name)).unwrap();
        assert_eq!(x, std::fs::read(b.join(&name)).unwrap());
    }
    let m = manifest(&a);
    assert_eq!(m["outputs"].as_array().unwrap().len(), 3);
    assert_eq!(m["config"]["seed"], 11);
}

#[test]
fn simulate_single_leaf_is_empty() {
    let out = lcoal(&["simulate", "--measure", "kingman", "--n", "1"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["events"].as_array().unwrap().len(), 0);
}

#[test]
fn simulate_csv_to_stdout() {
    let out = lcoal(&["simulate", "--measure", "kingman", "--n", "4", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let s = stdout(&out);
    assert!(s.starts_with("time,new_block,merged\n"));
    assert_eq!(s.lines().count(), 4);
}

#[test]
fn poisson_with_atom_at_zero_notes_superposition() {
    let dir = tempfile::tempdir().unwrap();
    let out = lcoal(&[
        "simulate", "--measure", "atom:0,0.5+uniform:0.25,1", "--scheme", "poisson", "--n", "8", "--out", p(dir.path()),
    ]);
    assert_eq!(code(&out), 0);
    let notes = manifest(dir.path())["notes"].to_string();
    assert!(notes.contains("kingman superposition"), "{notes}");
}

#[test]
fn report_verdicts_on_default_grid() {
    for (measure, verdict) in
        [("kingman", "consistent-with-compact"), ("bolthausen-sznitman", "consistent-with-not-locally-compact")]
    {
        let dir = tempfile::tempdir().unwrap();
        let out = lcoal(&["report", "--measure", measure, "--out", p(dir.path())]);
        assert_eq!(code(&out), 0, "{measure}");
        let report: Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
        assert_eq!(report["verdict"], verdict);
        let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
        assert!(csv.starts_with("statistic,n,eps,delta,eta,replicates,seed,"));
    }
}

#[test]
fn dust_report_carries_warning() {
    let out = lcoal(&["report", "--measure", "power:1", "--replicates", "10", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["verdict"], "dust-validity-warning");
    assert!(!v["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn output_directory_is_created_or_reported() {
    let dir = tempfile::tempdir().unwrap();
    let nested = dir.path().join("x/y/z");
    assert_eq!(code(&lcoal(&["classify", "--measure", "kingman", "--out", p(&nested)])), 0);
    assert!(nested.join("classification.json").exists());
    assert!(nested.join("manifest.json").exists());

    let file = dir.path().join("plain");
    std::fs::write(&file, "x").unwrap();
    let out = lcoal(&["classify", "--measure", "kingman", "--out", p(&file.join("sub"))]);
    assert_ne!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot create output directory"));
}

#[test]
fn config_file_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "measure = \"kingman\"\nn = 5\nseed = 7\nreplicates = 2\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = lcoal(&["simulate", "--config", p(&cfg), "--seed", "9", "--out", p(&out_dir)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(&out_dir);
    assert_eq!(m["config"]["seed"], 9);
    assert_eq!(m["config"]["n"], serde_json::json!([5]));
    assert_eq!(m["config"]["replicates"], 2);
    assert_eq!(m["config"]["scheme"], "gillespie");

    std::fs::write(&cfg, "measure = \"kingman\"\nbogus = 1\n").unwrap();
    assert_eq!(code(&lcoal(&["simulate", "--config", p(&cfg)])), 2);
}

#[test]
fn reproduce_every_command() {
    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 4] = [
        &["classify", "--measure", "beta:0.5,1.5", "--bmax", "2000"],
        &["simulate", "--measure", "bolthausen-sznitman", "--n", "50", "--replicates", "2", "--seed", "5"],
        &["analyze", "--measure", "kingman", "--n", "20,40", "--replicates", "8", "--seed", "3"],
        &["report", "--measure", "bolthausen-sznitman", "--n", "50,100", "--replicates", "20", "--jobs", "2"],
    ];
    for (i, args) in runs.iter().enumerate() {
        let out_dir = dir.path().join(format!("run{i}"));
        let mut full = args.to_vec();
        full.extend(["--out", p(&out_dir)]);
        assert_eq!(code(&lcoal(&full)), 0, "{args:?}");
        let again = dir.path().join(format!("again{i}"));
        let out = lcoal(&["reproduce", p(&out_dir.join("manifest.json")), "--out", p(&again)]);
        assert_eq!(code(&out), 0, "{args:?}: {}", stdout(&out));
        assert!(!stdout(&out).contains("DIFFERENT"));
        for f in manifest(&out_dir)["outputs"].as_array().unwrap() {
            let name = f["path"].as_str().unwrap();
            assert_eq!(std::fs::read(out_dir.join(name)).unwrap(), std::fs::read(again.join(name)).unwrap());
        }
    }
}

#[test]
fn reproduce_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&lcoal(&["simulate", "--measure", "kingman", "--n", "6", "--out", p(dir.path())])), 0);
    let path = dir.path().join("manifest.json");
    let mut m = manifest(dir.path());
    m["outputs"][0]["sha256"] = Value::String("0".repeat(64));
    std::fs::write(&path, serde_json::to_string(&m).unwrap()).unwrap();
    let out = lcoal(&["reproduce", p(&path)]);
    assert_eq!(code(&out), 4);
    assert!(stdout(&out).contains("DIFFERENT"));
}

#[test]
fn analyze_saved_history() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    assert_eq!(code(&lcoal(&["simulate", "--measure", "kingman", "--n", "40", "--seed", "2", "--out", p(&sim)])), 0);
    let history = sim.join("history_0000.json");
    let an = dir.path().join("an");
    let out = lcoal(&["analyze", "--input", p(&history), "--eps-grid", "0.05,0.2", "--out", p(&an)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rows: Value = serde_json::from_str(&std::fs::read_to_string(an.join("analyze.json")).unwrap()).unwrap();
    let xi = |eps: f64| {
        rows.as_array()
            .unwrap()
            .iter()
            .find(|r| r["statistic"] == "xi" && r["eps"] == eps)
            .unwrap()["value"]
            .as_f64()
            .unwrap()
    };
    assert!(xi(0.05) >= xi(0.2));
    assert_eq!(manifest(&an)["inputs"].as_array().unwrap().len(), 1);

    // A changed input makes reproduction fail.
    std::fs::write(&history, std::fs::read_to_string(&history).unwrap().replace("\"seed\"", "\"seed\" ")).unwrap();
    assert_eq!(code(&lcoal(&["reproduce", p(&an.join("manifest.json"))])), 4);
}
