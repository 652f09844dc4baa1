//! End-to-end checks of the command-line surface: flags, exit codes, and
//! the documented dataset sizes.

use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_quanv")
}

fn tmp() -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn help_documents_the_flag_surface() {
    for (subcommand, expected) in [
        ("generate", vec!["--kind", "--seed", "--out", "--fractions"]),
        (
            "train",
            vec![
                "--dataset",
                "--frontend",
                "--ansatz",
                "--seed",
                "--epochs",
                "--noisy",
                "--static-frontend",
                "--out",
                "--batch-size",
                "--gamma",
                "--spsa-all",
                "--backend",
                "--train-limit",
            ],
        ),
        (
            "evaluate",
            vec![
                "--checkpoint",
                "--checkpoints",
                "--dataset",
                "--split",
                "--difficulty",
                "--out",
                "--csv",
            ],
        ),
        ("compare", vec!["--manifest", "--jobs", "--out"]),
    ] {
        let output = Command::new(bin())
            .args([subcommand, "--help"])
            .output()
            .unwrap();
        assert!(output.status.success());
        let help = String::from_utf8_lossy(&output.stdout);
        for flag in expected {
            assert!(
                help.contains(flag),
                "`{subcommand} --help` does not document {flag}"
            );
        }
    }
}

#[test]
fn usage_errors_exit_with_code_two() {
    // Unknown flag (clap) and semantic usage errors both map to 2.
    let output = Command::new(bin())
        .args(["train", "--no-such-flag"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));

    let dir = tmp();
    let output = Command::new(bin())
        .current_dir(&dir)
        .args([
            "train",
            "--dataset",
            "missing.jsonl",
            "--frontend",
            "classical",
            "--seed",
            "1",
        ])
        .output()
        .unwrap();
    assert_eq!(
        output.status.code(),
        Some(2),
        "missing sidecar should be a usage error"
    );

    // Quantum front end without an ansatz.
    let output = Command::new(bin())
        .current_dir(&dir)
        .args([
            "generate", "--kind", "hard", "--seed", "1", "--out", "d.jsonl",
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let output = Command::new(bin())
        .current_dir(&dir)
        .args([
            "train",
            "--dataset",
            "d.jsonl",
            "--frontend",
            "quantum",
            "--seed",
            "1",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn io_errors_exit_with_code_three() {
    let dir = tmp();
    let output = Command::new(bin())
        .current_dir(&dir)
        .args([
            "evaluate",
            "--checkpoint",
            "nope/checkpoint.json",
            "--dataset",
            "also-missing.jsonl",
        ])
        .output()
        .unwrap();
    // The dataset sidecar is diagnosed first as usage; a missing checkpoint
    // with a valid dataset is I/O.
    assert!(output.status.code() == Some(2) || output.status.code() == Some(3));

    let output = Command::new(bin())
        .current_dir(&dir)
        .args([
            "generate", "--kind", "hard", "--seed", "2", "--out", "io.jsonl",
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let output = Command::new(bin())
        .current_dir(&dir)
        .args([
            "evaluate",
            "--checkpoint",
            "nope/checkpoint.json",
            "--dataset",
            "io.jsonl",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
}

#[test]
fn generate_mixed_writes_1150_records() {
    let dir = tmp();
    let out = dir.join("mixed7.jsonl");
    let output = Command::new(bin())
        .args(["generate", "--kind", "mixed", "--seed", "7", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 1150);
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("1150"));
    assert!(stdout.contains("train 919 / val 116 / test 115"));

    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("mixed7.split.json")).unwrap())
            .unwrap();
    assert_eq!(sidecar["train"].as_array().unwrap().len(), 919);
    assert_eq!(sidecar["val"].as_array().unwrap().len(), 116);
    assert_eq!(sidecar["test"].as_array().unwrap().len(), 115);
}

#[test]
fn classical_smoke_run_completes_quickly() {
    let dir = tmp();
    let output = Command::new(bin())
        .current_dir(&dir)
        .args([
            "generate",
            "--kind",
            "hard",
            "--seed",
            "9",
            "--out",
            "smoke.jsonl",
        ])
        .output()
        .unwrap();
    assert!(output.status.success());

    let started = Instant::now();
    let output = Command::new(bin())
        .current_dir(&dir)
        .args([
            "train",
            "--dataset",
            "smoke.jsonl",
            "--frontend",
            "classical",
            "--seed",
            "1",
            "--epochs",
            "5",
            "--train-limit",
            "50",
            "--out",
            "smoke-run",
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    assert!(started.elapsed().as_secs_f64() < 60.0);
    for file in ["checkpoint.json", "run.json", "epochs.csv"] {
        assert!(dir.join("smoke-run").join(file).exists(), "{file} missing");
    }

    // Static front end leaves the kernel untouched.
    let output = Command::new(bin())
        .current_dir(&dir)
        .args([
            "train",
            "--dataset",
            "smoke.jsonl",
            "--frontend",
            "classical",
            "--seed",
            "1",
            "--epochs",
            "2",
            "--train-limit",
            "50",
            "--static-frontend",
            "--out",
            "static-run",
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let ckpt: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.join("static-run/checkpoint.json")).unwrap(),
    )
    .unwrap();
    // Reproduce the initialization and compare the stored kernel to it.
    let weights: Vec<f64> = ckpt["params"]["frontend_weights"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    use quanv_core::model::{Model, OutputActivation};
    use quanv_core::trainer::TrainConfig;
    let config = TrainConfig {
        seed: 1,
        ..TrainConfig::default()
    };
    let fresh = Model::new_classical(OutputActivation::Logistic, &mut config.init_rng());
    assert_eq!(weights, fresh.params.frontend_weights);
}

#[test]
fn unpaired_seeds_are_a_usage_error() {
    let dir = tmp();
    let output = Command::new(bin())
        .current_dir(&dir)
        .args([
            "generate",
            "--kind",
            "hard",
            "--seed",
            "4",
            "--out",
            "pair.jsonl",
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let manifest = serde_json::json!({
        "format_version": 1,
        "dataset": "pair.jsonl",
        "output_dir": "pair-runs",
        "training": { "epochs": 1, "train_limit": 20 },
        "runs": [
            { "name": "c1", "frontend": "classical", "seed": 1 },
            { "name": "q2", "frontend": "quantum", "ansatz": "td", "seed": 2 }
        ]
    });
    std::fs::write(
        dir.join("pair.json"),
        serde_json::to_string(&manifest).unwrap(),
    )
    .unwrap();
    let output = Command::new(bin())
        .current_dir(&dir)
        .args(["compare", "--manifest", "pair.json"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("unpaired"));
}
