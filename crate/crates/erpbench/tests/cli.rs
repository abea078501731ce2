use std::path::Path;
use std::process::{Command, Output};

use erpbench::io::{read_erpb, read_features, read_json, write_json, write_recording, ResultsFile};
use erpbench_core::harness::{SplitPlan, SynthSpec};
use erpbench_core::signal::{EventMarker, Recording};

fn erpbench(args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_erpbench"))
        .args(args)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "erpbench {args:?} failed:\n{}\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn synth_extract_split_train() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SynthSpec {
        n_subjects: 6,
        trials_per_subject: 10,
        n_channels: 2,
        ..Default::default()
    };
    let (spec_path, data) = (dir.path().join("spec.json"), dir.path().join("data"));
    write_json(&spec_path, &spec).unwrap();
    erpbench(&[
        "synth",
        "--spec",
        s(&spec_path),
        "--seed",
        "3",
        "--out",
        s(&data),
    ]);
    let (_, ts) = read_erpb(&data).unwrap();
    assert_eq!(ts.n_trials(), 60);

    let feats = dir.path().join("feats.bin");
    erpbench(&[
        "extract",
        "--in",
        s(&data),
        "--out",
        s(&feats),
        "--set",
        "both",
    ]);
    let (_, m) = read_features(&feats).unwrap();
    assert_eq!(m.n_cols(), 2 * (31 + 91));

    let split = dir.path().join("split.json");
    erpbench(&[
        "split",
        "--data",
        s(&data),
        "--seed",
        "41",
        "--out",
        s(&split),
    ]);
    let plan: SplitPlan = read_json(&split).unwrap();
    assert_eq!(
        plan.train_subjects.len() + plan.valid_subjects.len() + plan.test_subjects.len(),
        6
    );

    let model = dir.path().join("model.bin");
    let out = erpbench(&[
        "train",
        "--features",
        s(&feats),
        "--split",
        s(&split),
        "--out",
        s(&model),
    ]);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["test"]["auroc"].as_f64().unwrap().is_finite());
    assert!(model.exists());
}

#[test]
fn run_writes_results_and_ranks_read_them() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SynthSpec {
        n_subjects: 6,
        trials_per_subject: 10,
        n_channels: 2,
        ..Default::default()
    };
    let spec_path = dir.path().join("spec.json");
    write_json(&spec_path, &spec).unwrap();
    erpbench(&[
        "synth",
        "--spec",
        s(&spec_path),
        "--out",
        s(&dir.path().join("toy")),
    ]);
    let config = serde_json::json!({
        "datasets": ["toy"],
        "seeds": [1, 2],
        "train": { "max_epochs": 10, "patience": 3, "lr": 0.01 }
    });
    let cfg_path = dir.path().join("exp.json");
    write_json(&cfg_path, &config).unwrap();
    let results = dir.path().join("results.json");
    erpbench(&[
        "--threads",
        "2",
        "run",
        "--config",
        s(&cfg_path),
        "--out",
        s(&results),
    ]);
    let r: ResultsFile = read_json(&results).unwrap();
    assert_eq!(r.runs.len(), 2);
    assert_eq!(r.aggregate[0].method, "EEG Features");
    let out = erpbench(&["ranks", "--results", s(&results)]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("EEG Features"));
}

#[test]
fn preprocess_builds_a_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let recs = dir.path().join("recs");
    for subject in ["sub-01", "sub-02"] {
        let n = 5000;
        let data: Vec<Vec<f64>> = (0..4)
            .map(|c| {
                (0..n)
                    .map(|i| ((i * (c + 3)) as f64 * 0.05).sin() * 10.0 + c as f64)
                    .collect()
            })
            .collect();
        let events = (1..9)
            .map(|k| EventMarker {
                sample_index: k * 500,
                label: if k % 2 == 0 { "target" } else { "standard" }.into(),
            })
            .collect();
        let labels = vec!["Fz".into(), "Cz".into(), "Pz".into(), "VEOG".into()];
        let rec = Recording::new(data, 500.0, labels, events, subject).unwrap();
        write_recording(
            &recs.join(format!("{subject}.json")),
            &rec,
            &["VEOG".into()],
            &["Pz".into()],
        )
        .unwrap();
    }
    let out_dir = dir.path().join("erpb");
    erpbench(&[
        "preprocess",
        "--in",
        s(&recs),
        "--out",
        s(&out_dir),
        "--notch",
        "50",
        "--band",
        "0.5",
        "45",
        "--fs",
        "200",
        "--epoch",
        "-0.2",
        "0.8",
        "--baseline",
        "-0.2",
        "0",
        "--classes",
        "standard,target",
    ]);
    let (m, ts) = read_erpb(&out_dir).unwrap();
    assert_eq!(ts.n_trials(), 16);
    assert_eq!(ts.n_samples(), 200);
    assert_eq!(m.channel_labels, ["Fz", "Cz", "Pz"]);
    assert_eq!(m.class_names, ["standard", "target"]);
}

#[test]
fn layout_and_gradcheck() {
    let out = erpbench(&["extract", "--print-layout", "--set", "erp"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("erp91: 91 features per channel"));
    assert!(text.contains("pyramid: 75"));
    let out = erpbench(&["gradcheck", "--strategy", "whole", "--seed", "2"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("ok"));
}
