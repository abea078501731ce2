use std::fs;
use std::path::Path;

use erpbench::io::{
    load_fixture, read_erpb, read_features, read_linear_model, read_patch_model, read_recording,
    write_erpb, write_features, write_linear_model, write_patch_model, write_recording, Error,
    DATA_FILE, MANIFEST_FILE,
};
use erpbench_core::classify::LinearModel;
use erpbench_core::features::{extract_features, FeatureSet, PyramidSpec};
use erpbench_core::harness::{synth_dataset, Metric, SynthSpec};
use erpbench_core::patchlab::{gradcheck_config, PatchModel, Strategy};
use erpbench_core::signal::{EventMarker, Recording, TrialSet};
use erpbench_core::spectral::SpectralConfig;

fn small_set() -> TrialSet {
    let spec = SynthSpec {
        n_subjects: 5,
        trials_per_subject: 10,
        n_channels: 2,
        ..Default::default()
    };
    let ts = synth_dataset(&spec, 1).unwrap();
    // Round to f32 so that the stored values are exact.
    let data = ts.data().iter().map(|&v| f64::from(v as f32)).collect();
    TrialSet::new(
        data,
        ts.n_channels(),
        ts.n_samples(),
        ts.labels().to_vec(),
        ts.subject_ids().to_vec(),
        ts.fs(),
        ts.class_names().to_vec(),
        ts.channel_labels().to_vec(),
    )
    .unwrap()
}

fn fixture() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/paper_tables.json")
}

#[test]
fn erpb_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let ts = small_set();
    let m = write_erpb(&ts, "toy", dir.path()).unwrap();
    assert_eq!(m.trials[1].byte_offset, m.record_bytes());
    let (m2, back) = read_erpb(dir.path()).unwrap();
    assert_eq!(m, m2);
    assert_eq!(back, ts);
    assert_eq!(
        fs::metadata(dir.path().join(DATA_FILE)).unwrap().len(),
        m.data_bytes()
    );
}

#[test]
fn empty_set_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let ts = TrialSet::empty(
        3,
        10,
        200.0,
        vec!["a".into(), "b".into()],
        vec!["x".into(), "y".into(), "z".into()],
    );
    let m = write_erpb(&ts, "empty", dir.path()).unwrap();
    assert!(m.trials.is_empty());
    assert_eq!(fs::metadata(dir.path().join(DATA_FILE)).unwrap().len(), 0);
    assert_eq!(read_erpb(dir.path()).unwrap().1, ts);
}

#[test]
fn truncated_data_is_corrupt() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_erpb(&small_set(), "toy", dir.path()).unwrap();
    let path = dir.path().join(DATA_FILE);
    let bytes = fs::read(&path).unwrap();
    fs::write(&path, &bytes[..bytes.len() - 6]).unwrap();
    match read_erpb(dir.path()) {
        Err(Error::Corrupt {
            expected, actual, ..
        }) => {
            assert_eq!(expected, m.data_bytes());
            assert_eq!(actual, m.data_bytes() - 6);
        }
        other => panic!("expected corruption error, got {other:?}"),
    }
}

#[test]
fn unknown_version_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    write_erpb(&small_set(), "toy", dir.path()).unwrap();
    let path = dir.path().join(MANIFEST_FILE);
    let text = fs::read_to_string(&path)
        .unwrap()
        .replace("\"format_version\": 1", "\"format_version\": 99");
    fs::write(&path, text).unwrap();
    assert!(matches!(
        read_erpb(dir.path()),
        Err(Error::Version {
            found: 99,
            supported: 1,
            ..
        })
    ));
}

#[test]
fn misaligned_offsets_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_erpb(&small_set(), "toy", dir.path()).unwrap();
    let path = dir.path().join(MANIFEST_FILE);
    let from = format!("\"byte_offset\": {}", m.record_bytes());
    let text = fs::read_to_string(&path)
        .unwrap()
        .replacen(&from, "\"byte_offset\": 4", 1);
    fs::write(&path, text).unwrap();
    assert!(matches!(read_erpb(dir.path()), Err(Error::Format { .. })));
}

#[test]
fn fixture_holds_published_values() {
    let f = load_fixture(&fixture()).unwrap();
    assert_eq!(f.n_cells(), 540);
    assert_eq!(f.get("CESCA-VODD", Metric::F1, "EEGConformer"), Some(69.64));
    assert_eq!(f.get("RLPD", Metric::Auroc, "LaBraM"), Some(84.82));
}

#[test]
fn fixture_with_missing_cell_is_rejected() {
    let mut json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(fixture()).unwrap()).unwrap();
    json["RLPD"]["AUROC"]
        .as_object_mut()
        .unwrap()
        .remove("LaBraM");
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    fs::write(&path, json.to_string()).unwrap();
    assert!(matches!(load_fixture(&path), Err(Error::Coverage(_))));
}

#[test]
fn feature_file_round_trip() {
    let ts = small_set();
    let m = extract_features(
        &ts,
        FeatureSet::Erp91,
        &SpectralConfig::default(),
        &PyramidSpec::default(),
    )
    .unwrap();
    let m = erpbench_core::features::FeatureMatrix::new(
        m.values().iter().map(|&v| f64::from(v as f32)).collect(),
        m.n_cols(),
        m.labels().to_vec(),
        m.subject_ids().to_vec(),
        m.class_names.clone(),
    )
    .unwrap()
    .with_layout(FeatureSet::Erp91.layout())
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("feats.bin");
    write_features(&path, &m, ts.channel_labels()).unwrap();
    let (h, back) = read_features(&path).unwrap();
    assert_eq!(back, m);
    assert_eq!(h.channel_labels, ts.channel_labels());

    let bytes = fs::read(&path).unwrap();
    fs::write(&path, &bytes[..bytes.len() - 4]).unwrap();
    assert!(matches!(read_features(&path), Err(Error::Corrupt { .. })));
}

#[test]
fn model_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mut lin = LinearModel::zeros(3, 2);
    lin.weights = vec![0.5, -1.25, 2.0, 0.0, 0.75, -0.5];
    lin.bias = vec![0.25, -0.25];
    lin.feature_std = vec![1.0, 2.0, 4.0];
    let path = dir.path().join("linear.bin");
    write_linear_model(&path, &lin, &["a".into(), "b".into()]).unwrap();
    let (back, names) = read_linear_model(&path).unwrap();
    assert_eq!(back, lin);
    assert_eq!(names, ["a", "b"]);
    assert!(read_patch_model(&path).is_err());

    let model = PatchModel::init(&gradcheck_config(Strategy::Uni), 4).unwrap();
    let path = dir.path().join("patch.bin");
    write_patch_model(&path, &model).unwrap();
    let back = read_patch_model(&path).unwrap();
    assert_eq!(back.cfg, model.cfg);
    for (a, b) in back.params.tensors().iter().zip(model.params.tensors()) {
        assert!(a
            .iter()
            .zip(b.iter())
            .all(|(x, y)| *x == f64::from(*y as f32)));
    }
}

#[test]
fn recording_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = vec![vec![1.0, 2.5, -3.0, 4.0], vec![0.0, 0.5, 0.25, -1.0]];
    let events = vec![EventMarker {
        sample_index: 2,
        label: "target".into(),
    }];
    let rec = Recording::new(
        data,
        100.0,
        vec!["Cz".into(), "EOG".into()],
        events,
        "sub-01",
    )
    .unwrap();
    let path = dir.path().join("sub-01.json");
    write_recording(&path, &rec, &["EOG".into()], &[]).unwrap();
    let (m, back) = read_recording(&path).unwrap();
    assert_eq!(back, rec);
    assert_eq!(m.non_eeg_channels, ["EOG"]);
}
