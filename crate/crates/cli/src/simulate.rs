//! `simulate`: synthetic recordings with a ground-truth manifest.
//!
//! A spec file holds exactly one of two tables:
//!
//! * `[recording]` writes one BrainVision triplet (optionally an epoch CSV)
//!   from a single [`CouplingSpec`];
//! * `[study]` writes one triplet per subject and paradigm holding every
//!   class, plus an `analyze.toml` that analyzes them.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use phaselock::connectivity::region_pairs;
use phaselock::ingest::{write_brainvision, write_epochs_csv, Montage, WriteOptions, DEFAULT_64_CHANNELS};
use phaselock::synth::{
    derive_seed, gen_coupled_epochs_with, gen_recording, synthetic_labels, CouplingSpec,
    GroundTruth, RecordingBlock,
};
use phaselock::{ClassLabel, EpochMeta, EpochWindow, EventTag, Paradigm, Region};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSpec {
    pub recording: Option<RecordingSim>,
    pub study: Option<StudySim>,
}

fn default_fs() -> f64 {
    250.0
}

fn default_trial_seconds() -> f64 {
    2.0
}

fn default_basename() -> String {
    "simulated".into()
}

fn default_tag() -> String {
    "IS/Rest/rest".into()
}

/// One continuous recording of `trials` back-to-back trials.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecordingSim {
    #[serde(default = "default_fs")]
    pub sampling_rate: f64,
    pub trials: usize,
    #[serde(default = "default_trial_seconds")]
    pub trial_seconds: f64,
    /// Event tag written on every trial marker.
    #[serde(default = "default_tag")]
    pub tag: String,
    /// Defaults to the standard 64-channel labels for 64 channels and
    /// `ch1..chN` otherwise.
    pub labels: Option<Vec<String>>,
    #[serde(default = "default_basename")]
    pub basename: String,
    /// Also write `<basename>_epochs.csv`.
    #[serde(default)]
    pub epochs_csv: bool,
    pub coupling: CouplingSpec,
}

fn default_subjects() -> usize {
    16
}

fn default_trials_per_class() -> usize {
    50
}

fn default_paradigms() -> Vec<String> {
    vec!["IS".into(), "VI".into()]
}

fn default_carrier() -> f64 {
    10.0
}

fn default_amplitude() -> f64 {
    10.0
}

fn default_noise() -> f64 {
    2.0
}

fn default_within() -> f64 {
    8.0
}

fn default_task_kappa() -> f64 {
    1.0
}

fn default_rest_kappa() -> f64 {
    4.0
}

fn default_spread() -> f64 {
    0.2
}

fn default_pairs() -> Vec<String> {
    Region::report_pairs()
        .iter()
        .map(|(a, b)| format!("{a}-{b}"))
        .collect()
}

fn default_analysis_bands() -> Vec<String> {
    vec!["alpha".into()]
}

/// A multi-subject study on the standard 64-channel montage.
///
/// Each region's channels couple to the region's first channel (its hub)
/// at `within_kappa`. Hubs of the `coupled_pairs` regions couple at
/// `task_kappa` in word trials and `rest_kappa` in rest trials; pairs that
/// would close a cycle are skipped. Per subject and paradigm both hub
/// concentrations are scaled by `exp(subject_kappa_spread * z)`, z ~ N(0, 1).
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySim {
    #[serde(default = "default_subjects")]
    pub subjects: usize,
    #[serde(default = "default_trials_per_class")]
    pub trials_per_class: usize,
    #[serde(default = "default_fs")]
    pub sampling_rate: f64,
    #[serde(default = "default_trial_seconds")]
    pub trial_seconds: f64,
    #[serde(default = "default_paradigms")]
    pub paradigms: Vec<String>,
    #[serde(default = "default_carrier")]
    pub carrier_hz: f64,
    #[serde(default = "default_amplitude")]
    pub amplitude_uv: f64,
    #[serde(default = "default_noise")]
    pub noise_sigma: f64,
    #[serde(default = "default_within", deserialize_with = "kappa::deserialize")]
    pub within_kappa: f64,
    #[serde(default = "default_task_kappa", deserialize_with = "kappa::deserialize")]
    pub task_kappa: f64,
    #[serde(default = "default_rest_kappa", deserialize_with = "kappa::deserialize")]
    pub rest_kappa: f64,
    #[serde(default = "default_spread")]
    pub subject_kappa_spread: f64,
    #[serde(default = "default_pairs")]
    pub coupled_pairs: Vec<String>,
    /// Bands listed in the generated `analyze.toml`.
    #[serde(default = "default_analysis_bands")]
    pub analysis_bands: Vec<String>,
    pub seed: u64,
}

mod kappa {
    use serde::{Deserialize, Deserializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Number(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Number(v) => Ok(v),
            Raw::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("invalid concentration `{t}`"))),
        }
    }
}

/// What `simulate` wrote, also serialized as `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Manifest {
    Recording(RecordingManifest),
    Study(StudyManifest),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecordingManifest {
    pub files: Vec<String>,
    pub sampling_rate: f64,
    pub trials: usize,
    pub channel_labels: Vec<String>,
    pub ground_truth: GroundTruth,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyManifest {
    pub files: Vec<String>,
    pub sampling_rate: f64,
    pub trials_per_class: usize,
    /// Hub couplings actually used, as region pairs.
    pub hub_pairs: Vec<String>,
    pub subjects: Vec<SubjectTruth>,
}

/// Noise-free population PLV (infinite trials) for one subject and paradigm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubjectTruth {
    pub subject: String,
    pub paradigm: String,
    pub recording: String,
    #[serde(serialize_with = "serialize_kappa")]
    pub task_kappa: f64,
    #[serde(serialize_with = "serialize_kappa")]
    pub rest_kappa: f64,
    /// Region-pair label (`B-V`, ..., and `ALL-ALL`) to expected PLV.
    pub task: BTreeMap<String, f64>,
    pub rest: BTreeMap<String, f64>,
}

fn serialize_kappa<S: serde::Serializer>(kappa: &f64, s: S) -> Result<S::Ok, S::Error> {
    if kappa.is_infinite() {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*kappa)
    }
}

pub fn load_simulation_spec(path: &Path) -> Result<SimulationSpec, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    let spec: SimulationSpec =
        toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    match (&spec.recording, &spec.study) {
        (Some(_), None) | (None, Some(_)) => Ok(spec),
        _ => Err(CliError::config(format!(
            "{}: exactly one of [recording] or [study] is required",
            path.display()
        ))),
    }
}

/// Reads the spec file and writes the simulation into `out_dir`.
pub fn cmd_simulate(spec_path: &Path, out_dir: &Path) -> Result<Manifest, CliError> {
    let spec = load_simulation_spec(spec_path)?;
    simulate(&spec, out_dir)
}

pub fn simulate(spec: &SimulationSpec, out_dir: &Path) -> Result<Manifest, CliError> {
    let manifest = match (&spec.recording, &spec.study) {
        (Some(rec), None) => Manifest::Recording(simulate_recording(rec, out_dir)?),
        (None, Some(study)) => Manifest::Study(simulate_study(study, out_dir)?),
        _ => return Err(CliError::config("exactly one of [recording] or [study] is required")),
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    let path = out_dir.join("manifest.json");
    fs::write(&path, json).map_err(CliError::io(&path))?;
    Ok(manifest)
}

fn trial_samples(sampling_rate: f64, trial_seconds: f64) -> Result<usize, CliError> {
    let n = (sampling_rate * trial_seconds).round();
    if !(sampling_rate > 0.0 && trial_seconds > 0.0 && n >= 2.0) {
        return Err(CliError::config(format!(
            "trial of {trial_seconds} s at {sampling_rate} Hz has fewer than 2 samples"
        )));
    }
    Ok(n as usize)
}

fn default_labels(n_channels: usize) -> Vec<String> {
    if n_channels == DEFAULT_64_CHANNELS.len() {
        DEFAULT_64_CHANNELS.iter().map(|s| s.to_string()).collect()
    } else {
        synthetic_labels(n_channels)
    }
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(CliError::io(dir))
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

fn simulate_recording(sim: &RecordingSim, out_dir: &Path) -> Result<RecordingManifest, CliError> {
    let tag: EventTag = sim
        .tag
        .parse()
        .map_err(|e| CliError::config(format!("recording.tag: {e}")))?;
    let labels = sim
        .labels
        .clone()
        .unwrap_or_else(|| default_labels(sim.coupling.n_channels));
    if labels.len() != sim.coupling.n_channels {
        return Err(CliError::config(format!(
            "recording.labels has {} entries for {} channels",
            labels.len(),
            sim.coupling.n_channels
        )));
    }
    if sim.trials == 0 {
        return Err(CliError::config("recording.trials must be positive"));
    }
    let samples = trial_samples(sim.sampling_rate, sim.trial_seconds)?;
    sim.coupling
        .validate(sim.sampling_rate)
        .map_err(|e| CliError::config(format!("recording.coupling: {e}")))?;

    create_dir(out_dir)?;
    let block = RecordingBlock {
        tag,
        spec: sim.coupling.clone(),
        n_trials: sim.trials,
    };
    let recording = gen_recording(&[block], labels.clone(), sim.sampling_rate, samples)?;
    let paths = write_brainvision(out_dir, &sim.basename, &recording, &WriteOptions::default())?;
    let mut files = vec![file_name(&paths.header), file_name(&paths.data), file_name(&paths.markers)];
    if sim.epochs_csv {
        let window = EpochWindow {
            start_offset_s: 0.0,
            duration_s: sim.trial_seconds,
        };
        let meta = EpochMeta::new(tag.paradigm, tag.class_label, window);
        let epochs = gen_coupled_epochs_with(&sim.coupling, sim.trials, samples, sim.sampling_rate, labels.clone(), meta)?;
        let path = out_dir.join(format!("{}_epochs.csv", sim.basename));
        write_epochs_csv(&path, &epochs)?;
        files.push(file_name(&path));
    }
    files.push("manifest.json".into());
    Ok(RecordingManifest {
        files,
        sampling_rate: sim.sampling_rate,
        trials: sim.trials,
        channel_labels: labels,
        ground_truth: sim.coupling.ground_truth(),
    })
}

fn parse_region_pair(text: &str) -> Result<(Region, Region), String> {
    let (a, b) = text
        .split_once('-')
        .ok_or_else(|| format!("region pair `{text}` is not of the form X-Y"))?;
    let a: Region = a.parse().map_err(|e| format!("{e}"))?;
    let b: Region = b.parse().map_err(|e| format!("{e}"))?;
    if a == b || a == Region::All || b == Region::All {
        return Err(format!("region pair `{text}` must name two distinct specific regions"));
    }
    Ok((a, b))
}

/// Study layout on the default montage: hub per region, region members
/// coupled to their hub, and the hub edges kept after cycle removal.
struct StudyDesign {
    labels: Vec<String>,
    montage: Montage,
    within: Vec<(usize, usize)>,
    hub_edges: Vec<(usize, usize)>,
    hub_pairs: Vec<(Region, Region)>,
}

impl StudyDesign {
    fn new(coupled_pairs: &[(Region, Region)]) -> Result<Self, CliError> {
        let labels = default_labels(DEFAULT_64_CHANNELS.len());
        let montage = Montage::default_for(&labels)?;
        let mut hubs = BTreeMap::new();
        let mut within = Vec::new();
        for region in Region::SPECIFIC {
            let members = montage.channels_in(region);
            if let Some((&hub, rest)) = members.split_first() {
                hubs.insert(region, hub);
                within.extend(rest.iter().map(|&c| (hub, c)));
            }
        }
        let mut component: BTreeMap<Region, Region> = Region::SPECIFIC.iter().map(|&r| (r, r)).collect();
        fn find(component: &BTreeMap<Region, Region>, mut r: Region) -> Region {
            while component[&r] != r {
                r = component[&r];
            }
            r
        }
        let mut hub_edges = Vec::new();
        let mut hub_pairs = Vec::new();
        for &(a, b) in coupled_pairs {
            let (Some(&ha), Some(&hb)) = (hubs.get(&a), hubs.get(&b)) else {
                continue;
            };
            let (ra, rb) = (find(&component, a), find(&component, b));
            if ra != rb {
                component.insert(ra, rb);
                hub_edges.push((ha, hb));
                hub_pairs.push((a, b));
            }
        }
        Ok(StudyDesign {
            labels,
            montage,
            within,
            hub_edges,
            hub_pairs,
        })
    }

    fn spec(&self, sim: &StudySim, hub_kappa: f64, seed: u64) -> CouplingSpec {
        let mut spec = CouplingSpec::new(self.labels.len(), sim.carrier_hz, seed);
        spec.amplitude_uv = sim.amplitude_uv;
        spec.noise_sigma = sim.noise_sigma;
        for &(a, b) in &self.within {
            spec = spec.couple(a, b, sim.within_kappa);
        }
        for &(a, b) in &self.hub_edges {
            spec = spec.couple(a, b, hub_kappa);
        }
        spec
    }

    /// Region-pair and all-pair averages of the spec's population PLV.
    fn expected(&self, spec: &CouplingSpec) -> Result<BTreeMap<String, f64>, CliError> {
        let mut out = BTreeMap::new();
        let mut groups: Vec<(String, Region, Region)> = Region::report_pairs()
            .into_iter()
            .map(|(a, b)| (format!("{a}-{b}"), a, b))
            .collect();
        groups.push(("ALL-ALL".into(), Region::All, Region::All));
        for (name, a, b) in groups {
            let pairs = region_pairs(&self.montage, a, b);
            if pairs.is_empty() {
                continue;
            }
            let mut sum = 0.0;
            for &(i, k) in &pairs {
                sum += spec.expected_pair_plv(i, k)?;
            }
            out.insert(name, sum / pairs.len() as f64);
        }
        Ok(out)
    }
}

fn simulate_study(sim: &StudySim, out_dir: &Path) -> Result<StudyManifest, CliError> {
    let mut problems = Vec::new();
    let paradigms: Vec<Paradigm> = sim
        .paradigms
        .iter()
        .filter_map(|p| p.parse().map_err(|e| problems.push(format!("study.paradigms: {e}"))).ok())
        .collect();
    let coupled: Vec<(Region, Region)> = sim
        .coupled_pairs
        .iter()
        .filter_map(|p| parse_region_pair(p).map_err(|e| problems.push(format!("study.coupled_pairs: {e}"))).ok())
        .collect();
    if sim.subjects < 2 {
        problems.push("study.subjects must be at least 2".into());
    }
    if sim.trials_per_class < 2 {
        problems.push("study.trials_per_class must be at least 2".into());
    }
    if paradigms.is_empty() {
        problems.push("study.paradigms is empty".into());
    }
    for (name, k) in [
        ("within_kappa", sim.within_kappa),
        ("task_kappa", sim.task_kappa),
        ("rest_kappa", sim.rest_kappa),
    ] {
        if k.is_nan() || k < 0.0 {
            problems.push(format!("study.{name} must be non-negative"));
        }
    }
    if !(sim.subject_kappa_spread >= 0.0 && sim.subject_kappa_spread.is_finite()) {
        problems.push("study.subject_kappa_spread must be non-negative".into());
    }
    let samples = match trial_samples(sim.sampling_rate, sim.trial_seconds) {
        Ok(n) => Some(n),
        Err(e) => {
            problems.push(e.to_string());
            None
        }
    };
    let design = StudyDesign::new(&coupled)?;
    if let Err(e) = design.spec(sim, sim.rest_kappa, sim.seed).validate(sim.sampling_rate) {
        problems.push(format!("study: {e}"));
    }
    if !problems.is_empty() {
        return Err(CliError::Config(crate::error::ConfigProblems(problems)));
    }
    let samples = samples.expect("validated");

    create_dir(out_dir)?;
    let mut files = Vec::new();
    let mut subjects = Vec::new();
    let mut analyze_subjects = String::new();
    for s in 0..sim.subjects {
        let id = format!("S{}", s + 1);
        let mut recordings = Vec::new();
        for &paradigm in &paradigms {
            let paradigm_index = Paradigm::ALL.iter().position(|p| *p == paradigm).expect("known paradigm") as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(sim.seed, &[s as u64, paradigm_index]));
            let z: f64 = StandardNormal.sample(&mut rng);
            let scale = (sim.subject_kappa_spread * z).exp();
            let task_kappa = sim.task_kappa * scale;
            let rest_kappa = sim.rest_kappa * scale;

            let blocks: Vec<RecordingBlock> = ClassLabel::all()
                .iter()
                .enumerate()
                .map(|(c, &class)| {
                    let kappa = if class.is_rest() { rest_kappa } else { task_kappa };
                    let seed = derive_seed(sim.seed, &[s as u64, paradigm_index, c as u64]);
                    RecordingBlock {
                        tag: EventTag::new(paradigm, class),
                        spec: design.spec(sim, kappa, seed),
                        n_trials: sim.trials_per_class,
                    }
                })
                .collect();
            let recording = gen_recording(&blocks, design.labels.clone(), sim.sampling_rate, samples)?;
            let basename = format!("S{:02}_{}", s + 1, paradigm.file_stem());
            let paths = write_brainvision(out_dir, &basename, &recording, &WriteOptions::default())?;
            drop(recording);
            files.extend([file_name(&paths.header), file_name(&paths.data), file_name(&paths.markers)]);
            recordings.push((paradigm, file_name(&paths.header)));

            subjects.push(SubjectTruth {
                subject: id.clone(),
                paradigm: paradigm.code().to_string(),
                recording: file_name(&paths.header),
                task_kappa,
                rest_kappa,
                task: design.expected(&design.spec(sim, task_kappa, 0))?,
                rest: design.expected(&design.spec(sim, rest_kappa, 0))?,
            });
        }
        analyze_subjects.push_str(&format!("\n[[ingest.subjects]]\nid = \"{id}\"\n[ingest.subjects.recordings]\n"));
        for (paradigm, header) in recordings {
            analyze_subjects.push_str(&format!("{} = \"{header}\"\n", paradigm.code()));
        }
    }

    let analyze = analyze_config_text(sim, &paradigms, &analyze_subjects);
    let analyze_path = out_dir.join("analyze.toml");
    fs::write(&analyze_path, analyze).map_err(CliError::io(&analyze_path))?;
    files.push("analyze.toml".into());
    files.push("manifest.json".into());

    Ok(StudyManifest {
        files,
        sampling_rate: sim.sampling_rate,
        trials_per_class: sim.trials_per_class,
        hub_pairs: design.hub_pairs.iter().map(|(a, b)| format!("{a}-{b}")).collect(),
        subjects,
    })
}

fn analyze_config_text(sim: &StudySim, paradigms: &[Paradigm], subjects: &str) -> String {
    let quoted = |items: &mut dyn Iterator<Item = String>| {
        items.map(|s| format!("\"{s}\"")).collect::<Vec<_>>().join(", ")
    };
    format!(
        "# Generated by `phaselock simulate`; paths are relative to this file.\n\
         [ingest]\n\
         paradigms = [{}]\n\
         window_start_s = 0.0\n\
         window_duration_s = {}\n\
         \n\
         [bands]\n\
         include = [{}]\n\
         report_band = \"mean\"\n\
         \n\
         [output]\n\
         dir = \"results\"\n\
         {subjects}",
        quoted(&mut paradigms.iter().map(|p| p.code().to_string())),
        float_literal(sim.trial_seconds),
        quoted(&mut sim.analysis_bands.iter().cloned()),
    )
}

fn float_literal(v: f64) -> String {
    let text = format!("{v}");
    if text.contains('.') || text.contains('e') {
        text
    } else {
        format!("{text}.0")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn region_pair_parsing() {
        assert_eq!(parse_region_pair("B-A").unwrap(), (Region::B, Region::A));
        assert!(parse_region_pair("B-B").is_err());
        assert!(parse_region_pair("B").is_err());
        assert!(parse_region_pair("B-ALL").is_err());
        assert!(parse_region_pair("B-Q").is_err());
    }

    #[test]
    fn default_design_is_a_star_on_broca_hub() {
        let design = StudyDesign::new(&Region::report_pairs()).unwrap();
        let names: Vec<String> = design.hub_pairs.iter().map(|(a, b)| format!("{a}-{b}")).collect();
        assert_eq!(names, ["B-V", "B-A", "B-M", "B-P", "B-S"]);
        // 46 regional channels in six trees joined into one
        assert_eq!(design.within.len(), 46 - 6);
    }

    #[test]
    fn study_expectations_order_rest_above_task() {
        let design = StudyDesign::new(&Region::report_pairs()).unwrap();
        let sim: StudySim = toml::from_str("seed = 1").unwrap();
        let task = design.expected(&design.spec(&sim, 1.0, 0)).unwrap();
        let rest = design.expected(&design.spec(&sim, 4.0, 0)).unwrap();
        assert_eq!(task.len(), 16);
        for (pair, t) in &task {
            assert!(*t < rest[pair], "{pair}");
        }
    }

    #[test]
    fn float_literals_stay_floats() {
        assert_eq!(float_literal(2.0), "2.0");
        assert_eq!(float_literal(1.5), "1.5");
    }
}
