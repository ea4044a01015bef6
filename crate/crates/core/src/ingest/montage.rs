//! Channel-to-region assignment.
//!
//! File format: one `LABEL,TAG` per line, `TAG` in `B V A M P S NONE`;
//! `#` starts a comment. Channels not listed are assigned `NONE`.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::domain::Region;
use crate::error::IngestError;

/// Labels of the default 64-channel 10-10 layout, in recording order.
pub const DEFAULT_64_CHANNELS: [&str; 64] = [
    "Fp1", "Fpz", "Fp2", "AF7", "AF3", "AF4", "AF8", "F7", "F5", "F3", "F1", "Fz", "F2", "F4",
    "F6", "F8", "FT9", "FT7", "FC5", "FC3", "FC1", "FC2", "FC4", "FC6", "FT8", "FT10", "T7", "C5",
    "C3", "C1", "Cz", "C2", "C4", "C6", "T8", "TP9", "TP7", "CP5", "CP3", "CP1", "CPz", "CP2",
    "CP4", "CP6", "TP8", "TP10", "P7", "P5", "P3", "P1", "Pz", "P2", "P4", "P6", "P8", "PO7",
    "PO3", "POz", "PO4", "PO8", "O1", "Oz", "O2", "Iz",
];

/// Contents of the bundled default montage file.
pub const DEFAULT_64_MONTAGE: &str = include_str!("../../data/default_montage_64.txt");

/// Region membership for every channel of a recording, in channel order.
/// `None` marks channels outside the six specific regions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Montage {
    labels: Vec<String>,
    regions: Vec<Option<Region>>,
}

impl Montage {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n_channels(&self) -> usize {
        self.labels.len()
    }

    pub fn region_of(&self, channel: usize) -> Option<Region> {
        self.regions[channel]
    }

    /// Channel indices belonging to `region`, ascending. `All` yields every channel.
    pub fn channels_in(&self, region: Region) -> Vec<usize> {
        match region {
            Region::All => (0..self.labels.len()).collect(),
            r => self
                .regions
                .iter()
                .enumerate()
                .filter(|(_, tag)| **tag == Some(r))
                .map(|(i, _)| i)
                .collect(),
        }
    }

    /// The bundled assignment applied to the given channel labels.
    pub fn default_for(channel_labels: &[String]) -> Result<Self, IngestError> {
        parse_montage_lenient(DEFAULT_64_MONTAGE, channel_labels)
    }
}

struct Entry {
    label: String,
    region: Option<Region>,
}

fn parse_entries(text: &str) -> Result<Vec<Entry>, IngestError> {
    let mut entries = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((label, tag)) = line.split_once(',') else {
            return Err(IngestError::Syntax {
                line: n + 1,
                message: format!("expected LABEL,REGION, found `{line}`"),
            });
        };
        let tag = tag.trim();
        let region = if tag.eq_ignore_ascii_case("NONE") {
            None
        } else {
            match tag.parse::<Region>() {
                Ok(Region::All) | Err(_) => {
                    return Err(IngestError::Syntax {
                        line: n + 1,
                        message: format!("unknown region tag `{tag}`"),
                    })
                }
                Ok(r) => Some(r),
            }
        };
        entries.push(Entry {
            label: label.trim().to_string(),
            region,
        });
    }
    Ok(entries)
}

fn build(entries: Vec<Entry>, channel_labels: &[String], strict: bool) -> Result<Montage, IngestError> {
    let index: HashMap<&str, usize> = channel_labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let mut regions = vec![None; channel_labels.len()];
    let mut assigned = vec![false; channel_labels.len()];
    for entry in entries {
        let Some(&ch) = index.get(entry.label.as_str()) else {
            if strict {
                return Err(IngestError::UnknownChannel(entry.label));
            }
            continue;
        };
        if std::mem::replace(&mut assigned[ch], true) {
            return Err(IngestError::DuplicateAssignment(entry.label));
        }
        regions[ch] = entry.region;
    }
    for region in Region::SPECIFIC {
        let count = regions.iter().filter(|r| **r == Some(region)).count();
        if count == 1 {
            return Err(IngestError::RegionTooSmall { region, count });
        }
    }
    Ok(Montage {
        labels: channel_labels.to_vec(),
        regions,
    })
}

/// Parses montage text against a recording's channel labels. Every label in
/// the text must exist in the recording.
pub fn parse_montage(text: &str, channel_labels: &[String]) -> Result<Montage, IngestError> {
    build(parse_entries(text)?, channel_labels, true)
}

/// Like [`parse_montage`] but skips labels the recording lacks.
pub fn parse_montage_lenient(text: &str, channel_labels: &[String]) -> Result<Montage, IngestError> {
    build(parse_entries(text)?, channel_labels, false)
}

pub fn load_montage(path: &Path, channel_labels: &[String]) -> Result<Montage, IngestError> {
    let text = fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_montage(&text, channel_labels)
}
