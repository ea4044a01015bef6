//! `analyze`: class tables and region reports from per-subject inputs.
//!
//! Config schema (TOML, paths relative to the config file):
//!
//! ```toml
//! [ingest]
//! paradigms = ["IS", "VI"]        # default: both
//! window_start_s = 0.0            # epoch start relative to each marker
//! window_duration_s = 2.0
//! csv_sampling_rate = 250.0       # required when any subject uses epoch_dirs
//!
//! [[ingest.subjects]]
//! id = "S1"
//! recordings = { IS = "S01_imagined_speech.vhdr" }   # BrainVision header per paradigm
//! epoch_dirs = { VI = "S01/visual_imagery" }         # or <class>.csv files per paradigm
//!
//! [bands]
//! include = ["theta", "alpha", "beta", "gamma"]       # default: all four
//! custom = [{ name = "mu", low_hz = 8.0, high_hz = 12.0 }]
//! report_band = "mean"            # or one band name
//!
//! [regions]
//! montage = "montage.txt"         # default: bundled 64-channel assignment
//!
//! [stats]
//! edge_exclusion_s = 0.1          # default: ceil(fs / 10) samples
//! significance = 0.05
//!
//! [output]
//! dir = "results"
//! decimals = 2
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use phaselock::connectivity::{class_table, plv_matrix, region_average};
use phaselock::ingest::brainvision::parse_brainvision_header;
use phaselock::ingest::epochs_csv::{load_epochs_csv, EpochLayout};
use phaselock::ingest::montage::{load_montage, Montage};
use phaselock::ingest::load_recording;
use phaselock::preprocess::{analytic_phase, bandpass, default_edge_exclusion, extract_epochs};
use phaselock::stats::{format_fixed, format_p, mean, region_report, RegionGrid, RegionPairResult};
use phaselock::{ClassLabel, EpochMeta, EpochSet, EpochWindow, FrequencyBand, Paradigm, Region};
use serde::Deserialize;

use crate::error::{CliError, ConfigProblems};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeConfig {
    pub ingest: IngestSection,
    #[serde(default)]
    pub bands: BandsSection,
    #[serde(default)]
    pub regions: RegionsSection,
    #[serde(default)]
    pub stats: StatsSection,
    #[serde(default)]
    pub output: OutputSection,
}

fn default_paradigms() -> Vec<String> {
    vec!["IS".into(), "VI".into()]
}

fn default_duration() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IngestSection {
    #[serde(default = "default_paradigms")]
    pub paradigms: Vec<String>,
    #[serde(default)]
    pub window_start_s: f64,
    #[serde(default = "default_duration")]
    pub window_duration_s: f64,
    pub csv_sampling_rate: Option<f64>,
    #[serde(default)]
    pub subjects: Vec<SubjectInput>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubjectInput {
    pub id: String,
    #[serde(default)]
    pub recordings: BTreeMap<String, PathBuf>,
    #[serde(default)]
    pub epoch_dirs: BTreeMap<String, PathBuf>,
}

fn default_band_names() -> Vec<String> {
    FrequencyBand::defaults().into_iter().map(|b| b.name).collect()
}

fn default_report_band() -> String {
    "mean".into()
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandsSection {
    #[serde(default = "default_band_names")]
    pub include: Vec<String>,
    #[serde(default)]
    pub custom: Vec<FrequencyBand>,
    #[serde(default = "default_report_band")]
    pub report_band: String,
}

impl Default for BandsSection {
    fn default() -> Self {
        BandsSection {
            include: default_band_names(),
            custom: Vec::new(),
            report_band: default_report_band(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionsSection {
    pub montage: Option<PathBuf>,
}

fn default_significance() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsSection {
    pub edge_exclusion_s: Option<f64>,
    #[serde(default = "default_significance")]
    pub significance: f64,
}

impl Default for StatsSection {
    fn default() -> Self {
        StatsSection {
            edge_exclusion_s: None,
            significance: default_significance(),
        }
    }
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("results")
}

fn default_decimals() -> u32 {
    2
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_decimals")]
    pub decimals: u32,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: default_out_dir(),
            decimals: default_decimals(),
        }
    }
}

/// Where one subject's data for one paradigm comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Recording(PathBuf),
    EpochDir(PathBuf),
}

/// A validated analysis: every input exists and every parameter checks out.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisPlan {
    pub paradigms: Vec<Paradigm>,
    pub subjects: Vec<String>,
    /// `sources[subject][paradigm]`, in `paradigms` order.
    pub sources: Vec<Vec<Source>>,
    pub window: EpochWindow,
    pub csv_sampling_rate: Option<f64>,
    pub bands: Vec<FrequencyBand>,
    /// `None` averages across bands.
    pub report_band: Option<usize>,
    pub montage: Option<PathBuf>,
    pub edge_exclusion_s: Option<f64>,
    pub significance: f64,
    pub out_dir: PathBuf,
    pub decimals: u32,
}

/// Output file names for one paradigm.
pub fn output_files(paradigm: Paradigm) -> [String; 2] {
    [
        format!("{}_class_table.csv", paradigm.file_stem()),
        format!("{}_region_report.csv", paradigm.file_stem()),
    ]
}

pub fn load_config(path: &Path) -> Result<AnalyzeConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

fn class_csv(dir: &Path, class: ClassLabel) -> PathBuf {
    dir.join(format!("{}.csv", class.file_stem()))
}

/// Checks everything that can be checked without numeric work and lists
/// every problem found. `out_override` replaces `[output].dir`.
pub fn plan(config: &AnalyzeConfig, base_dir: &Path, out_override: Option<&Path>) -> Result<AnalysisPlan, CliError> {
    let mut problems = Vec::new();
    let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base_dir.join(p) };

    let mut paradigms = Vec::new();
    for p in &config.ingest.paradigms {
        match p.parse::<Paradigm>() {
            Ok(p) if paradigms.contains(&p) => problems.push(format!("ingest.paradigms lists {p} twice")),
            Ok(p) => paradigms.push(p),
            Err(e) => problems.push(format!("ingest.paradigms: {e}")),
        }
    }
    if config.ingest.paradigms.is_empty() {
        problems.push("ingest.paradigms is empty".into());
    }

    let window = EpochWindow {
        start_offset_s: config.ingest.window_start_s,
        duration_s: config.ingest.window_duration_s,
    };
    if !(window.duration_s > 0.0 && window.duration_s.is_finite() && window.start_offset_s.is_finite()) {
        problems.push(format!(
            "ingest window ({} s, {} s) is invalid",
            window.start_offset_s, window.duration_s
        ));
    }

    let subjects = &config.ingest.subjects;
    if subjects.len() < 2 {
        problems.push(format!(
            "ingest.subjects lists {} subject(s); the paired test needs at least 2",
            subjects.len()
        ));
    }
    let mut seen_ids = BTreeSet::new();
    let mut sampling_rates: Vec<(String, f64)> = Vec::new();
    let mut sources = Vec::new();
    let mut uses_csv = false;
    let mut missing = Vec::new();
    for subject in subjects {
        if !seen_ids.insert(subject.id.as_str()) {
            problems.push(format!("subject id `{}` appears twice", subject.id));
        }
        for key in subject.recordings.keys().chain(subject.epoch_dirs.keys()) {
            match key.parse::<Paradigm>() {
                Ok(p) if !paradigms.contains(&p) => problems.push(format!(
                    "subject {}: input for paradigm {p} which ingest.paradigms does not list",
                    subject.id
                )),
                Ok(_) => {}
                Err(e) => problems.push(format!("subject {}: {e}", subject.id)),
            }
        }
        let mut row = Vec::new();
        for &paradigm in &paradigms {
            let find = |map: &BTreeMap<String, PathBuf>| {
                map.iter()
                    .find(|(k, _)| k.parse::<Paradigm>().ok() == Some(paradigm))
                    .map(|(_, v)| resolve(v))
            };
            match (find(&subject.recordings), find(&subject.epoch_dirs)) {
                (Some(_), Some(_)) => {
                    problems.push(format!(
                        "subject {}: both a recording and an epoch directory for {paradigm}",
                        subject.id
                    ));
                }
                (None, None) => {
                    missing.push(format!("subject {}: no input for {paradigm}", subject.id));
                }
                (Some(header), None) => {
                    match check_recording(&header) {
                        Ok(fs) => sampling_rates.push((header.display().to_string(), fs)),
                        Err(errs) => missing.extend(errs),
                    }
                    row.push(Source::Recording(header));
                }
                (None, Some(dir)) => {
                    uses_csv = true;
                    for class in ClassLabel::all() {
                        let file = class_csv(&dir, class);
                        if !file.is_file() {
                            missing.push(format!("missing input {}", file.display()));
                        }
                    }
                    row.push(Source::EpochDir(dir));
                }
            }
        }
        sources.push(row);
    }
    problems.extend(missing);

    let csv_sampling_rate = config.ingest.csv_sampling_rate;
    match csv_sampling_rate {
        Some(fs) if !(fs > 0.0 && fs.is_finite()) => {
            problems.push(format!("ingest.csv_sampling_rate {fs} is not positive"))
        }
        Some(fs) => sampling_rates.push(("epoch CSV inputs".into(), fs)),
        None if uses_csv => problems.push("ingest.csv_sampling_rate is required for epoch_dirs inputs".into()),
        None => {}
    }

    let defaults = FrequencyBand::defaults();
    let mut bands: Vec<FrequencyBand> = Vec::new();
    for name in &config.bands.include {
        match defaults.iter().find(|b| b.name.eq_ignore_ascii_case(name)) {
            Some(b) => bands.push(b.clone()),
            None => problems.push(format!(
                "bands.include: unknown band `{name}` (known: theta, alpha, beta, gamma)"
            )),
        }
    }
    for band in &config.bands.custom {
        match FrequencyBand::new(band.name.clone(), band.low_hz, band.high_hz) {
            Ok(b) => bands.push(b),
            Err(e) => problems.push(format!("bands.custom: {e}")),
        }
    }
    let mut band_names = BTreeSet::new();
    for band in &bands {
        if !band_names.insert(band.name.to_ascii_lowercase()) {
            problems.push(format!("band `{}` is defined twice", band.name));
        }
        for (source, fs) in &sampling_rates {
            if let Err(e) = band.validate_for(*fs) {
                problems.push(format!("{source}: {e}"));
            }
        }
    }
    if config.bands.include.is_empty() && config.bands.custom.is_empty() {
        problems.push("no frequency bands configured".into());
    }
    let report_band = if config.bands.report_band.eq_ignore_ascii_case("mean") {
        None
    } else {
        let found = bands
            .iter()
            .position(|b| b.name.eq_ignore_ascii_case(&config.bands.report_band));
        if found.is_none() {
            problems.push(format!(
                "bands.report_band `{}` is neither `mean` nor a configured band",
                config.bands.report_band
            ));
        }
        found
    };

    let montage = config.regions.montage.as_deref().map(resolve);
    if let Some(path) = &montage {
        if !path.is_file() {
            problems.push(format!("missing montage {}", path.display()));
        }
    }

    if let Some(edge) = config.stats.edge_exclusion_s {
        if !(edge >= 0.0 && edge.is_finite() && 2.0 * edge < window.duration_s) {
            problems.push(format!(
                "stats.edge_exclusion_s {edge} must be non-negative and under half the window"
            ));
        }
    }
    let significance = config.stats.significance;
    if !(significance > 0.0 && significance < 1.0) {
        problems.push(format!("stats.significance {significance} must lie in (0, 1)"));
    }
    if config.output.decimals > 6 {
        problems.push(format!("output.decimals {} exceeds 6", config.output.decimals));
    }

    if !problems.is_empty() {
        return Err(CliError::Config(ConfigProblems(problems)));
    }
    Ok(AnalysisPlan {
        paradigms,
        subjects: subjects.iter().map(|s| s.id.clone()).collect(),
        sources,
        window,
        csv_sampling_rate,
        bands,
        report_band,
        montage,
        edge_exclusion_s: config.stats.edge_exclusion_s,
        significance,
        out_dir: out_override.map(Path::to_path_buf).unwrap_or_else(|| resolve(&config.output.dir)),
        decimals: config.output.decimals,
    })
}

/// Parses the header and checks the files it references; returns the
/// sampling rate.
fn check_recording(header: &Path) -> Result<f64, Vec<String>> {
    let text = fs::read(header).map_err(|_| vec![format!("missing input {}", header.display())])?;
    let text = String::from_utf8_lossy(&text);
    let parsed = parse_brainvision_header(&text).map_err(|e| vec![format!("{}: {e}", header.display())])?;
    let dir = header.parent().unwrap_or(Path::new("."));
    let mut missing = Vec::new();
    let referenced = std::iter::once(&parsed.data_file).chain(parsed.marker_file.as_ref());
    for file in referenced {
        let path = dir.join(file);
        if !path.is_file() {
            missing.push(format!("missing input {} (referenced by {})", path.display(), header.display()));
        }
    }
    if missing.is_empty() {
        Ok(parsed.sampling_rate())
    } else {
        Err(missing)
    }
}

/// Per-paradigm results before formatting.
#[derive(Debug, Clone, PartialEq)]
pub struct ParadigmResult {
    pub paradigm: Paradigm,
    /// `class_values[subject][word]`: all-pair PLV.
    pub class_values: Vec<Vec<f64>>,
    pub report: Vec<RegionPairResult>,
}

/// Runs the analysis described by the config file and writes the reports.
pub fn cmd_analyze(config_path: &Path, out_override: Option<&Path>) -> Result<Vec<PathBuf>, CliError> {
    let config = load_config(config_path)?;
    let base = config_path.parent().unwrap_or(Path::new("."));
    let plan = plan(&config, base, out_override)?;
    let results = run(&plan)?;
    write_outputs(&plan, &results)
}

/// Region values for one class: all-pair value, then the 15 region pairs.
fn class_values(plan: &AnalysisPlan, epochs: &EpochSet, montage: &Montage) -> Result<Vec<f64>, CliError> {
    let fs = epochs.sampling_rate();
    let edge = match plan.edge_exclusion_s {
        Some(s) => (s * fs).round() as usize,
        None => default_edge_exclusion(fs),
    };
    let mut groups = vec![(Region::All, Region::All)];
    groups.extend(Region::report_pairs());
    let mut per_band = Vec::with_capacity(plan.bands.len());
    for band in &plan.bands {
        let filtered = bandpass(epochs, band)?;
        let phases = analytic_phase(&filtered);
        let matrix = plv_matrix(&phases, edge)?;
        let values = groups
            .iter()
            .map(|&(a, b)| region_average(&matrix, montage, a, b).map(|r| r.value))
            .collect::<Result<Vec<_>, _>>()?;
        per_band.push(values);
    }
    Ok(match plan.report_band {
        Some(b) => per_band.swap_remove(b),
        None => (0..groups.len())
            .map(|g| mean(&per_band.iter().map(|v| v[g]).collect::<Vec<_>>()))
            .collect::<Result<_, _>>()?,
    })
}

fn montage_for(plan: &AnalysisPlan, labels: &[String]) -> Result<Montage, CliError> {
    Ok(match &plan.montage {
        Some(path) => load_montage(path, labels)?,
        None => Montage::default_for(labels)?,
    })
}

/// Computes every paradigm's class table and region report.
pub fn run(plan: &AnalysisPlan) -> Result<Vec<ParadigmResult>, CliError> {
    let classes = ClassLabel::all();
    let mut results = Vec::new();
    for (p, &paradigm) in plan.paradigms.iter().enumerate() {
        let mut class_rows = Vec::new();
        let mut task_rows = Vec::new();
        let mut rest_rows = Vec::new();
        for s in 0..plan.subjects.len() {
            // values[class][group]
            let values: Vec<Vec<f64>> = match &plan.sources[s][p] {
                Source::Recording(header) => {
                    let recording = load_recording(header)?;
                    let montage = montage_for(plan, recording.channel_labels())?;
                    classes
                        .iter()
                        .map(|&class| {
                            let epochs = extract_epochs(&recording, paradigm, class, class.condition(), plan.window)?;
                            class_values(plan, &epochs, &montage)
                        })
                        .collect::<Result<_, CliError>>()?
                }
                Source::EpochDir(dir) => {
                    let fs = plan.csv_sampling_rate.expect("validated");
                    let mut montage: Option<Montage> = None;
                    classes
                        .iter()
                        .map(|&class| {
                            let layout = EpochLayout {
                                sampling_rate: fs,
                                meta: EpochMeta::new(paradigm, class, plan.window),
                            };
                            let epochs = load_epochs_csv(&class_csv(dir, class), &layout)?;
                            if montage.as_ref().map(|m| m.labels() != epochs.channel_labels()).unwrap_or(true) {
                                montage = Some(montage_for(plan, epochs.channel_labels())?);
                            }
                            class_values(plan, &epochs, montage.as_ref().expect("set above"))
                        })
                        .collect::<Result<_, CliError>>()?
                }
            };
            let words = &values[..12];
            class_rows.push(words.iter().map(|v| Some(v[0])).collect::<Vec<_>>());
            task_rows.push(
                (1..16)
                    .map(|g| mean(&words.iter().map(|v| v[g]).collect::<Vec<_>>()))
                    .collect::<Result<Vec<_>, _>>()?,
            );
            rest_rows.push(values[12][1..].to_vec());
        }
        let table = class_table(&class_rows)?;
        let pairs = Region::report_pairs();
        let task = RegionGrid {
            pairs: pairs.clone(),
            values: task_rows,
        };
        let rest = RegionGrid { pairs, values: rest_rows };
        results.push(ParadigmResult {
            paradigm,
            class_values: table.cells,
            report: region_report(&task, &rest)?,
        });
    }
    Ok(results)
}

fn write_csv(path: &Path, rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    for row in rows {
        writer
            .write_record(row)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    }
    writer.flush().map_err(CliError::io(path))
}

/// Class-table rows: header, one row per subject, then `Avg.` and `Std.`.
pub fn class_table_rows(plan: &AnalysisPlan, result: &ParadigmResult) -> Result<Vec<Vec<String>>, CliError> {
    let d = plan.decimals;
    let grid: Vec<Vec<Option<f64>>> = result
        .class_values
        .iter()
        .map(|row| row.iter().copied().map(Some).collect())
        .collect();
    let table = class_table(&grid)?;
    let mut rows = Vec::new();
    let mut header = vec!["subject".to_string()];
    header.extend(ClassLabel::WORDS.iter().map(|c| c.name().to_string()));
    rows.push(header);
    for (subject, cells) in plan.subjects.iter().zip(&table.cells) {
        let mut row = vec![subject.clone()];
        row.extend(cells.iter().map(|v| format_fixed(*v, d)));
        rows.push(row);
    }
    let mut avg = vec!["Avg.".to_string()];
    avg.extend(table.means().iter().map(|v| format_fixed(*v, d)));
    rows.push(avg);
    let mut std = vec!["Std.".to_string()];
    std.extend(table.stds().iter().map(|v| v.map(|v| format_fixed(v, d)).unwrap_or_default()));
    rows.push(std);
    Ok(rows)
}

/// Region-report rows: header and the 15 pairs in report order.
pub fn region_report_rows(plan: &AnalysisPlan, result: &ParadigmResult) -> Vec<Vec<String>> {
    let d = plan.decimals;
    let mut rows = vec![["pair", "task_mean", "rest_mean", "t", "p", "df", "significant"]
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()];
    for r in &result.report {
        rows.push(vec![
            r.label(),
            format_fixed(r.mean_task, d),
            format_fixed(r.mean_rest, d),
            format_fixed(r.t, 3),
            format_p(r.p),
            r.df.to_string(),
            if r.p < plan.significance { "yes" } else { "no" }.to_string(),
        ]);
    }
    rows
}

fn write_outputs(plan: &AnalysisPlan, results: &[ParadigmResult]) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(&plan.out_dir).map_err(CliError::io(&plan.out_dir))?;
    let mut written = Vec::new();
    for result in results {
        let [class_name, report_name] = output_files(result.paradigm);
        let class_path = plan.out_dir.join(class_name);
        write_csv(&class_path, &class_table_rows(plan, result)?)?;
        let report_path = plan.out_dir.join(report_name);
        write_csv(&report_path, &region_report_rows(plan, result))?;
        written.extend([class_path, report_path]);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal(extra: &str) -> AnalyzeConfig {
        toml::from_str(&format!(
            "[ingest]\n[[ingest.subjects]]\nid = \"S1\"\n[[ingest.subjects]]\nid = \"S2\"\n{extra}"
        ))
        .unwrap()
    }

    #[test]
    fn defaults_fill_every_optional_key() {
        let c = minimal("");
        assert_eq!(c.ingest.paradigms, ["IS", "VI"]);
        assert_eq!(c.ingest.window_duration_s, 2.0);
        assert_eq!(c.bands.include, ["theta", "alpha", "beta", "gamma"]);
        assert_eq!(c.bands.report_band, "mean");
        assert_eq!(c.stats.significance, 0.05);
        assert_eq!(c.output.dir, PathBuf::from("results"));
        assert_eq!(c.output.decimals, 2);
    }

    #[test]
    fn validation_lists_every_problem() {
        let mut c = minimal("");
        c.bands.include = vec!["delta".into()];
        c.bands.report_band = "mu".into();
        c.stats.significance = 1.5;
        let dir = tempfile::tempdir().unwrap();
        let CliError::Config(ConfigProblems(problems)) = plan(&c, dir.path(), None).unwrap_err() else {
            panic!("expected config error");
        };
        // 2 subjects x 2 paradigms without inputs, unknown band,
        // unknown report band, bad significance
        assert_eq!(problems.len(), 7, "{problems:#?}");
        assert!(problems.iter().any(|p| p.contains("no input for")));
    }

    #[test]
    fn missing_files_are_enumerated() {
        let mut c = minimal("");
        c.ingest.paradigms = vec!["IS".into()];
        c.ingest.csv_sampling_rate = Some(250.0);
        for s in &mut c.ingest.subjects {
            s.epoch_dirs.insert("IS".into(), PathBuf::from(format!("{}/is", s.id)));
        }
        let dir = tempfile::tempdir().unwrap();
        let CliError::Config(ConfigProblems(problems)) = plan(&c, dir.path(), None).unwrap_err() else {
            panic!("expected config error");
        };
        assert_eq!(problems.len(), 2 * 13);
        assert!(problems.iter().any(|p| p.ends_with("help_me.csv")));
    }

    #[test]
    fn output_names() {
        assert_eq!(
            output_files(Paradigm::VisualImagery),
            ["visual_imagery_class_table.csv".to_string(), "visual_imagery_region_report.csv".to_string()]
        );
    }
}
