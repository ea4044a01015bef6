mod common;

use common::{dir_bytes, phaselock, study_spec, write};
use phaselock_cli::{cmd_simulate, Manifest, EXIT_CONFIG};

const LOCKED_PAIR: &str = "\
[recording]
trials = 4
tag = \"IS/hello/task\"
basename = \"pair\"
epochs_csv = true

[recording.coupling]
n_channels = 2
carrier_hz = 10.0
seed = 1
couplings = [{ a = 0, b = 1, kappa = \"inf\" }]
";

#[test]
fn locked_pair_manifest_lists_unit_plv() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(&dir.path().join("spec.toml"), LOCKED_PAIR);
    let out = dir.path().join("out");
    let Manifest::Recording(manifest) = cmd_simulate(&spec, &out).unwrap() else {
        panic!("recording manifest expected");
    };
    assert_eq!(manifest.ground_truth.pairs.len(), 1);
    assert_eq!(manifest.ground_truth.pairs[0].expected_plv, 1.0);
    assert_eq!(
        manifest.files,
        ["pair.vhdr", "pair.eeg", "pair.vmrk", "pair_epochs.csv", "manifest.json"]
    );
    let json: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(json["kind"], "recording");
    assert_eq!(json["ground_truth"]["pairs"][0]["kappa"], "inf");
    assert_eq!(json["ground_truth"]["pairs"][0]["expected_plv"], 1.0);
}

#[test]
fn repeated_seed_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        &dir.path().join("spec.toml"),
        &study_spec("subjects = 2\ntrials_per_class = 2\nparadigms = [\"VI\"]"),
    );
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    cmd_simulate(&spec, &a).unwrap();
    cmd_simulate(&spec, &b).unwrap();
    assert_eq!(dir_bytes(&a), dir_bytes(&b));
}

#[test]
fn default_64_channel_recording_writes_triplet_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        &dir.path().join("spec.toml"),
        "[recording]\ntrials = 3\n[recording.coupling]\nn_channels = 64\ncarrier_hz = 10.0\nseed = 3\n",
    );
    let out = dir.path().join("out");
    let result = phaselock(&["simulate", "--spec", spec.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    let names: Vec<String> = dir_bytes(&out).into_iter().map(|(n, _)| n).collect();
    assert_eq!(names, ["manifest.json", "simulated.eeg", "simulated.vhdr", "simulated.vmrk"]);
    let recording = phaselock::load_recording(&out.join("simulated.vhdr")).unwrap();
    assert_eq!(recording.n_channels(), 64);
    assert_eq!(recording.channel_labels()[0], phaselock::ingest::DEFAULT_64_CHANNELS[0]);
    assert_eq!(recording.markers().len(), 3);
}

#[test]
fn study_manifest_orders_rest_above_task() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        &dir.path().join("spec.toml"),
        &study_spec("subjects = 2\ntrials_per_class = 2\nparadigms = [\"IS\"]"),
    );
    let out = dir.path().join("out");
    let Manifest::Study(manifest) = cmd_simulate(&spec, &out).unwrap() else {
        panic!("study manifest expected");
    };
    assert_eq!(manifest.subjects.len(), 2);
    assert_eq!(manifest.hub_pairs, ["B-V", "B-A", "B-M", "B-P", "B-S"]);
    for subject in &manifest.subjects {
        for pair in &manifest.hub_pairs {
            assert!(subject.task[pair] < subject.rest[pair], "{} {pair}", subject.subject);
        }
    }
    assert!(out.join("analyze.toml").is_file());
    assert!(out.join("S01_imagined_speech.vhdr").is_file());
}

#[test]
fn bad_specs_exit_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    for (name, text) in [
        ("both.toml", format!("{LOCKED_PAIR}\n[study]\nseed = 1\n")),
        ("unknown.toml", study_spec("colour = \"blue\"")),
        ("nyquist.toml", study_spec("carrier_hz = 200.0")),
        ("syntax.toml", "[study\n".to_string()),
    ] {
        let spec = write(&dir.path().join(name), &text);
        let result = phaselock(&["simulate", "--spec", spec.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(result.status.code(), Some(EXIT_CONFIG), "{name}");
        assert!(String::from_utf8_lossy(&result.stderr).starts_with("error:"), "{name}");
    }
    assert!(!out.exists());
}

#[test]
fn every_study_problem_is_listed() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        &dir.path().join("spec.toml"),
        &study_spec("subjects = 1\ntrials_per_class = 0\nparadigms = [\"XX\"]\ncoupled_pairs = [\"B-B\"]"),
    );
    let result = phaselock(&["simulate", "--spec", spec.to_str().unwrap(), "--out", "unused"]);
    assert_eq!(result.status.code(), Some(EXIT_CONFIG));
    let stderr = String::from_utf8_lossy(&result.stderr);
    for needle in ["subjects", "trials_per_class", "paradigms", "coupled_pairs"] {
        assert!(stderr.contains(needle), "{needle} missing from:\n{stderr}");
    }
}

#[test]
fn out_dir_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(&dir.path().join("spec.toml"), LOCKED_PAIR);
    let out = dir.path().join("from_env");
    let result = std::process::Command::new(env!("CARGO_BIN_EXE_phaselock"))
        .args(["simulate", "--spec", spec.to_str().unwrap()])
        .env("PHASELOCK_OUT_DIR", &out)
        .output()
        .unwrap();
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    assert!(out.join("manifest.json").is_file());
}
