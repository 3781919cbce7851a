use std::path::Path;
use std::process::{Command, Output};

fn fednod(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fednod"))
        .args(args)
        .current_dir(cwd)
        .env_remove("FEDNOD_SEED")
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn print_config_applies_overrides_and_seed_variable() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_fednod"))
        .args(["train", "--print-config", "--clients", "8", "--lr", "0.01"])
        .env("FEDNOD_SEED", "77")
        .current_dir(dir.path())
        .output()
        .unwrap();
    let cfg: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(cfg["master_seed"], 77);
    assert_eq!(cfg["nbr_clients"], 8);
    assert_eq!(cfg["hyper"]["learning_rate"], 0.01);
    assert_eq!(cfg["model"], "DDD-2D");
    assert_eq!(cfg["runs"], 5);
}

#[test]
fn synth_then_train_on_folder_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = fednod(&["synth", "--output", "data", "--n-per-class", "12", "--resolution", "64"], d);
    assert!(stdout(&o).contains("36 frames"));
    assert_eq!(std::fs::read_dir(d.join("data/yawning")).unwrap().count(), 12);

    let args = [
        "train", "--dataset", "data", "--rounds", "1", "--runs", "2", "--batch-size", "8", "--output", "out",
    ];
    let listed = stdout(&fednod(&args, d));
    assert!(listed.lines().any(|l| l.ends_with("summary.json")));
    let rounds = std::fs::read_to_string(d.join("out/rounds.csv")).unwrap();
    assert_eq!(rounds.lines().count(), 3);

    let report = stdout(&fednod(&["report", "out"], d));
    assert!(report.contains("ddd2d_r64_k2_lr0.001_m0.9_b8_wd0.0001"), "{report}");
    assert!(report.contains("     2  "), "{report}");
}

#[test]
fn errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let o = fednod(&["train", "--batch-size", "12", "--rounds", "1"], dir.path());
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("outside the search space"));
    let o = fednod(&["report", "nowhere"], dir.path());
    assert!(!o.status.success());
}
