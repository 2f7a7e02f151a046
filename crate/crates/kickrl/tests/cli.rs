//! Drives the compiled binary through the full train / compare / plot
//! workflow on a small configuration.

use std::path::Path;
use std::process::{Command, Output};

fn kickrl(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kickrl"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn print_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = kickrl(&["print-config"], dir.path());
    assert!(out.status.success());
    let cfg = kickrl::harness::parse_config(&stdout(&out)).unwrap();
    assert_eq!(cfg, kickrl::harness::ExperimentConfig::default());
}

#[test]
fn check_frames_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = kickrl(&["check-frames"], dir.path());
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("geometry-oracle: PASS"));
    assert!(text.contains("frame-invariance: PASS"));
}

#[test]
fn bad_config_fails_with_one_line_reason() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.cfg"), "sim.gravity = 9.8\n").unwrap();
    let out = kickrl(&["train", "--config", "bad.cfg"], dir.path());
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "single-line reason, got: {err}");
    assert!(err.contains("unknown key"));
}

#[test]
fn train_compare_plot_workflow() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("tiny.cfg"),
        "episodes = 40\nseeds = 5,6\noutput_dir = runs\n\
         moving_average_window = 10\nagent.warmup_transitions = 100\n\
         agent.batch_size = 16\nagent.hidden_width = 16\nagent.replay_capacity = 2000\n",
    )
    .unwrap();

    for encoding in ["rcs", "rcs+2"] {
        let out = kickrl(
            &["train", "--config", "tiny.cfg", "--encoding", encoding],
            dir.path(),
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(dir.path().join("runs").join(encoding).join("episodes.csv").exists());
        assert!(dir.path().join("runs").join(encoding).join("config.txt").exists());
    }

    // Retraining reproduces the artifacts byte for byte.
    let csv_path = dir.path().join("runs/rcs/episodes.csv");
    let first = std::fs::read(&csv_path).unwrap();
    let out = kickrl(
        &["train", "--config", "tiny.cfg", "--encoding", "rcs"],
        dir.path(),
    );
    assert!(out.status.success());
    assert_eq!(first, std::fs::read(&csv_path).unwrap());

    let out = kickrl(
        &[
            "compare",
            "--runs",
            "runs/rcs",
            "runs/rcs+2",
            "--threshold",
            "-4",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = stdout(&out);
    assert!(report.contains("rcs"));
    assert!(report.contains("rcs+2"));
    assert!(report.contains("threshold -4"));

    let out = kickrl(
        &["plot", "--runs", "runs/rcs", "runs/rcs+2", "--out", "curves.svg"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let svg = std::fs::read_to_string(dir.path().join("curves.svg")).unwrap();
    let doc = roxmltree::Document::parse(&svg).expect("well-formed SVG");
    let polylines = doc
        .descendants()
        .filter(|n| n.has_tag_name("polyline"))
        .count();
    assert_eq!(polylines, 2);
}

#[test]
fn seeds_override_applies() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("tiny.cfg"),
        "episodes = 5\nseeds = 1,2,3\noutput_dir = runs\nmoving_average_window = 3\n\
         agent.warmup_transitions = 50\nagent.batch_size = 8\nagent.hidden_width = 8\n",
    )
    .unwrap();
    let out = kickrl(
        &["train", "--config", "tiny.cfg", "--seeds", "9"],
        dir.path(),
    );
    assert!(out.status.success());
    let rows = kickrl::harness::read_csv(&dir.path().join("runs/rcs/episodes.csv")).unwrap();
    assert!(rows.iter().all(|r| r.seed == 9));
    assert_eq!(rows.len(), 5);
}
