mod common;

use common::{read_csv, study_spec, write};
use phaselock_cli::{cmd_analyze, cmd_simulate, Manifest};

#[test]
fn locked_study_reports_manifest_values() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        &dir.path().join("spec.toml"),
        &study_spec(
            "subjects = 3\ntrials_per_class = 3\nparadigms = [\"IS\"]\nnoise_sigma = 0.0\n\
             subject_kappa_spread = 0.0\nwithin_kappa = \"inf\"\ntask_kappa = \"inf\"\nrest_kappa = \"inf\"",
        ),
    );
    let out = dir.path().join("study");
    let Manifest::Study(manifest) = cmd_simulate(&spec, &out).unwrap() else {
        panic!("study manifest expected");
    };
    cmd_analyze(&out.join("analyze.toml"), None).unwrap();

    let report = read_csv(&out.join("results/imagined_speech_region_report.csv"));
    assert_eq!(report.len(), 16);
    for row in &report[1..] {
        for subject in &manifest.subjects {
            assert_eq!(subject.task[&row[0]], 1.0);
            assert_eq!(subject.rest[&row[0]], 1.0);
        }
        assert_eq!(&row[1..], ["1.00", "1.00", "0.000", "1.000", "2", "no"], "{}", row[0]);
    }

    let table = read_csv(&out.join("results/imagined_speech_class_table.csv"));
    assert_eq!(table.len(), 1 + 3 + 2);
    assert_eq!(table[1][0], "S1");
    for subject in &manifest.subjects {
        // All-pair values include unassigned channels, whose finite-trial
        // PLV sits above their population value of 0.
        let expected = subject.task["ALL-ALL"];
        let row = table.iter().find(|r| r[0] == subject.subject).unwrap();
        for cell in &row[1..] {
            let measured: f64 = cell.parse().unwrap();
            assert!(measured + 0.005 >= expected, "{} {cell} vs {expected}", subject.subject);
        }
    }
}

#[test]
fn coupled_study_keeps_rest_above_task() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        &dir.path().join("spec.toml"),
        &study_spec("subjects = 4\ntrials_per_class = 12\nparadigms = [\"VI\"]"),
    );
    let out = dir.path().join("study");
    cmd_simulate(&spec, &out).unwrap();
    cmd_analyze(&out.join("analyze.toml"), Some(&dir.path().join("results"))).unwrap();
    let report = read_csv(&dir.path().join("results/visual_imagery_region_report.csv"));
    for row in &report[1..] {
        let t: f64 = row[3].parse().unwrap();
        assert!(t < 0.0, "{row:?}");
        assert_eq!(row[5], "3");
    }
}
