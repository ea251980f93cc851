//! End-to-end tests of the command-line tool: every subcommand is exercised
//! through a real process, checking outputs, file effects, and exit codes
//! (0 success, 1 validation, 2 runtime).

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use genosil::config::{GenerateSection, RunConfig, CONFIG_VERSION};
use genosil::env::EnvKind;
use genosil::eval::CompareReport;
use genosil::scenario::ScenarioRanges;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_genosil"))
}

fn tiny_dataset() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/tiny_vehicle.jsonl")
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("spawn the tool")
}

fn assert_code(out: &Output, expected: i32) {
    assert_eq!(
        out.status.code(),
        Some(expected),
        "stdout:\n{}\nstderr:\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn generate_is_byte_identical_across_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    for path in [&a, &b] {
        let out = run(bin()
            .args(["generate", "--env", "vehicle", "--n", "3", "--seed", "11"])
            .arg("--out")
            .arg(path));
        assert_code(&out, 0);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(
        std::fs::read(a.with_extension("manifest.json")).unwrap(),
        std::fs::read(b.with_extension("manifest.json")).unwrap()
    );
}

#[test]
fn generate_with_invalid_ranges_fails_without_writing() {
    let dir = tempfile::tempdir().unwrap();
    let mut ranges = ScenarioRanges::defaults(EnvKind::Vehicle);
    ranges.radius = (0.8, 0.3); // lo > hi
    let config = RunConfig {
        generate: Some(GenerateSection {
            ranges: Some(ranges),
            ..GenerateSection::default()
        }),
        ..RunConfig::empty()
    };
    let config_path = dir.path().join("bad.json");
    std::fs::write(&config_path, serde_json::to_string(&config).unwrap()).unwrap();

    let out_path = dir.path().join("never.jsonl");
    let out = run(bin()
        .args(["generate", "--env", "vehicle", "--n", "3", "--seed", "1"])
        .arg("--out")
        .arg(&out_path)
        .arg("--config")
        .arg(&config_path));
    assert_code(&out, 1);
    assert!(!out_path.exists(), "no dataset may be written on invalid input");
    assert!(!out_path.with_extension("manifest.json").exists());
}

#[test]
fn train_smoke_then_inspect_shows_the_run_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("smoke.json");
    let out = run(bin()
        .args(["train", "--method", "genosil", "--epochs", "2", "--seed", "3"])
        .arg("--dataset")
        .arg(tiny_dataset())
        .arg("--out")
        .arg(&ckpt));
    assert_code(&out, 0);
    assert!(ckpt.exists());
    assert!(
        ckpt.with_extension("log.jsonl").exists(),
        "training log lands next to the checkpoint"
    );

    let out = run(bin().arg("inspect").arg(&ckpt));
    assert_code(&out, 0);
    let text = String::from_utf8_lossy(&out.stdout).into_owned();
    for needle in [
        "method:      genosil",
        "environment: vehicle",
        "latent dim:  8",
        "trained:     2 epochs",
        "beta_max 0.01",
    ] {
        assert!(text.contains(needle), "inspect output missing {needle:?}:\n{text}");
    }
}

#[test]
fn train_with_missing_dataset_fails() {
    let out = run(bin().args([
        "train",
        "--dataset",
        "/nonexistent/nowhere.jsonl",
        "--out",
        "/tmp/should_not_appear.json",
    ]));
    assert_code(&out, 1);
    assert!(!Path::new("/tmp/should_not_appear.json").exists());
}

#[test]
fn eval_report_orders_metrics_and_echoes_the_preset() {
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("gcbc.json");
    let out = run(bin()
        .args(["train", "--method", "gcbc", "--epochs", "1", "--seed", "5"])
        .arg("--dataset")
        .arg(tiny_dataset())
        .arg("--out")
        .arg(&ckpt));
    assert_code(&out, 0);

    let report_path = dir.path().join("report.json");
    let traj_dir = dir.path().join("trajectories");
    let out = run(bin()
        .args([
            "eval",
            "--include-expert",
            "--preset",
            "shifted-speed",
            "--trials",
            "10",
            "--seed",
            "21",
        ])
        .arg("--checkpoint")
        .arg(&ckpt)
        .arg("--out")
        .arg(&report_path)
        .arg("--export-trajectories")
        .arg(&traj_dir));
    assert_code(&out, 0);

    let report: CompareReport =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report.methods.len(), 2, "checkpoint row plus expert row");
    for row in &report.methods {
        assert!(
            row.reach_rate <= row.safety_rate,
            "{}: reach {} > safety {}",
            row.label,
            row.reach_rate,
            row.safety_rate
        );
        assert_eq!(row.trials.len(), 10);
    }

    // The preset scales the obstacle speed range and nothing else.
    let defaults = ScenarioRanges::defaults(EnvKind::Vehicle);
    let echoed = &report.config.ranges;
    assert_eq!(echoed.speed.1, defaults.speed.1 * 1.5);
    assert_eq!(echoed.radius, defaults.radius);
    assert_eq!(echoed.start_box, defaults.start_box);
    assert_eq!(echoed.goal_box, defaults.goal_box);

    // One trajectory file per trial per method.
    let files: Vec<_> = std::fs::read_dir(&traj_dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert_eq!(files.len(), 20);
    assert_eq!(files.iter().filter(|f| f.starts_with("gcbc-trial-")).count(), 10);
    assert_eq!(files.iter().filter(|f| f.starts_with("expert-trial-")).count(), 10);
}

#[test]
fn eval_without_methods_is_a_usage_error() {
    let out = run(bin().args(["eval", "--trials", "5", "--env", "vehicle"]));
    assert_code(&out, 1);
}

#[test]
fn inspect_rejects_a_corrupted_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mangled.json");
    std::fs::write(&path, "{\"version\": 1, \"env\": \"vehicle\"").unwrap();
    let out = run(bin().arg("inspect").arg(&path));
    assert_code(&out, 1);
    let text = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(text.contains("error"), "stderr should carry a diagnostic: {text}");
}

#[test]
fn inspect_missing_file_names_the_path() {
    let out = run(bin().args(["inspect", "/nonexistent/ckpt.json"]));
    assert_code(&out, 1);
    let text = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(text.contains("ckpt.json"), "{text}");
}

#[test]
fn help_exits_zero_and_unknown_flags_exit_one() {
    let out = run(bin().arg("--help"));
    assert_code(&out, 0);
    let text = String::from_utf8_lossy(&out.stdout).into_owned();
    for sub in ["generate", "train", "eval", "inspect"] {
        assert!(text.contains(sub), "help must list {sub}");
    }

    let out = run(bin().args(["generate", "--definitely-not-a-flag"]));
    assert_code(&out, 1);

    let out = run(bin().arg("--version"));
    assert_code(&out, 0);
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("extra.json");
    std::fs::write(
        &config_path,
        format!("{{\"version\": {CONFIG_VERSION}, \"striide\": 1}}"),
    )
    .unwrap();
    let out = run(bin()
        .args(["generate", "--env", "vehicle", "--n", "1", "--seed", "1"])
        .arg("--out")
        .arg(dir.path().join("x.jsonl"))
        .arg("--config")
        .arg(&config_path));
    assert_code(&out, 1);
}

#[test]
fn workers_flag_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("w.jsonl");
    let out = run(bin()
        .args(["generate", "--env", "vehicle", "--n", "2", "--seed", "4", "--workers", "2"])
        .arg("--out")
        .arg(&out_path));
    assert_code(&out, 0);
    assert!(out_path.exists());

    let out = run(bin().args(["generate", "--env", "vehicle", "--n", "1", "--workers", "0"]));
    assert_code(&out, 1);
}
