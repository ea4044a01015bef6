//! Long-format epoch tables: one row per `(trial, channel, sample)` cell.
//!
//! ```text
//! trial,channel,sample,value_uv
//! 0,C3,0,1.25
//! ```
//!
//! Trials and samples are zero-based and must be dense. Channels are ordered
//! by first appearance.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use ndarray::Array3;

use crate::error::IngestError;
use crate::preprocess::{EpochMeta, EpochSet};

const HEADER: [&str; 4] = ["trial", "channel", "sample", "value_uv"];

/// Metadata the CSV itself does not carry.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochLayout {
    pub sampling_rate: f64,
    pub meta: EpochMeta,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IngestError + '_ {
    move |source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(line: usize, err: impl std::fmt::Display) -> IngestError {
    IngestError::Syntax {
        line,
        message: err.to_string(),
    }
}

pub fn load_epochs_csv(path: &Path, layout: &EpochLayout) -> Result<EpochSet, IngestError> {
    let file = File::open(path).map_err(io_err(path))?;
    read_epochs_csv(BufReader::new(file), layout)
}

pub fn read_epochs_csv<R: std::io::Read>(reader: R, layout: &EpochLayout) -> Result<EpochSet, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header = rdr.headers().map_err(|e| csv_err(1, e))?.clone();
    if header.len() != HEADER.len() || header.iter().zip(HEADER).any(|(a, b)| a.trim() != b) {
        return Err(csv_err(
            1,
            format!("expected header `{}`", HEADER.join(",")),
        ));
    }

    let mut labels: Vec<String> = Vec::new();
    let mut cells: Vec<(usize, usize, usize, f64)> = Vec::new();
    for (n, record) in rdr.records().enumerate() {
        let line = n + 2;
        let record = record.map_err(|e| csv_err(line, e))?;
        if record.len() != 4 {
            return Err(csv_err(line, format!("expected 4 fields, found {}", record.len())));
        }
        let field = |i: usize| record[i].trim();
        let trial: usize = field(0)
            .parse()
            .map_err(|_| csv_err(line, format!("bad trial `{}`", field(0))))?;
        let label = field(1);
        let sample: usize = field(2)
            .parse()
            .map_err(|_| csv_err(line, format!("bad sample `{}`", field(2))))?;
        let value: f64 = field(3)
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| csv_err(line, format!("bad value `{}`", field(3))))?;
        let channel = match labels.iter().position(|l| l == label) {
            Some(c) => c,
            None => {
                labels.push(label.to_string());
                labels.len() - 1
            }
        };
        cells.push((trial, channel, sample, value));
    }
    if cells.is_empty() {
        return Err(IngestError::MissingCells("no data rows".into()));
    }

    let n_trials = cells.iter().map(|c| c.0).max().unwrap_or(0) + 1;
    let n_samples = cells.iter().map(|c| c.2).max().unwrap_or(0) + 1;
    let n_channels = labels.len();
    let mut data = Array3::<f64>::zeros((n_trials, n_channels, n_samples));
    let mut filled = vec![false; n_trials * n_channels * n_samples];
    for &(trial, channel, sample, value) in &cells {
        let flat = (trial * n_channels + channel) * n_samples + sample;
        if std::mem::replace(&mut filled[flat], true) {
            return Err(IngestError::DuplicateCell {
                trial,
                channel: labels[channel].clone(),
                sample,
            });
        }
        data[[trial, channel, sample]] = value;
    }
    if let Some(flat) = filled.iter().position(|f| !f) {
        let sample = flat % n_samples;
        let channel = (flat / n_samples) % n_channels;
        let trial = flat / (n_samples * n_channels);
        return Err(IngestError::MissingCells(format!(
            "trial {trial}, channel `{}`, sample {sample} is absent ({} of {} cells present)",
            labels[channel],
            cells.len(),
            filled.len()
        )));
    }

    EpochSet::new(data, layout.sampling_rate, labels, layout.meta)
        .map_err(|e| IngestError::InvalidRecording(e.to_string()))
}

pub fn write_epochs_csv(path: &Path, epochs: &EpochSet) -> Result<(), IngestError> {
    let file = File::create(path).map_err(io_err(path))?;
    write_epochs(BufWriter::new(file), epochs).map_err(io_err(path))
}

pub fn write_epochs<W: std::io::Write>(writer: W, epochs: &EpochSet) -> std::io::Result<()> {
    let mut wtr = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    wtr.write_record(HEADER)?;
    let (n_trials, n_channels, n_samples) = epochs.data().dim();
    for trial in 0..n_trials {
        for channel in 0..n_channels {
            let label = &epochs.channel_labels()[channel];
            for sample in 0..n_samples {
                wtr.write_record([
                    trial.to_string().as_str(),
                    label,
                    sample.to_string().as_str(),
                    epochs.data()[[trial, channel, sample]].to_string().as_str(),
                ])?;
            }
        }
    }
    wtr.flush()
}
