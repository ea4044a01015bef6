//! BrainVision triplet: `.vhdr` header, `.eeg` little-endian binary samples,
//! `.vmrk` markers.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;

use super::ini::IniDocument;
use super::{Marker, Recording};
use crate::error::IngestError;

const HEADER_BANNER: &str = "Brain Vision Data Exchange Header File Version 1.0";
const MARKER_BANNER: &str = "Brain Vision Data Exchange Marker File, Version 1.0";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataOrientation {
    /// Sample-major: all channels of sample 0, then sample 1, ...
    Multiplexed,
    /// Channel-major: all samples of channel 1, then channel 2, ...
    Vectorized,
}

impl DataOrientation {
    fn keyword(self) -> &'static str {
        match self {
            DataOrientation::Multiplexed => "MULTIPLEXED",
            DataOrientation::Vectorized => "VECTORIZED",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleType {
    Int16,
    Float32,
}

impl SampleType {
    pub fn size(self) -> usize {
        match self {
            SampleType::Int16 => 2,
            SampleType::Float32 => 4,
        }
    }

    fn keyword(self) -> &'static str {
        match self {
            SampleType::Int16 => "INT_16",
            SampleType::Float32 => "IEEE_FLOAT_32",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelInfo {
    pub label: String,
    pub reference: String,
    /// Resolution per stored unit, expressed in `unit`.
    pub resolution: f64,
    pub unit: String,
}

impl ChannelInfo {
    /// Resolution converted to microvolts per stored unit.
    pub fn resolution_uv(&self) -> Result<f64, IngestError> {
        let scale = match self.unit.as_str() {
            "" | "µV" | "μV" | "uV" => 1.0,
            "nV" => 1e-3,
            "mV" => 1e3,
            "V" => 1e6,
            other => {
                return Err(IngestError::Unsupported(format!(
                    "channel `{}` unit `{other}`",
                    self.label
                )))
            }
        };
        Ok(self.resolution * scale)
    }
}

/// Everything a `.vhdr` file declares that is needed to decode the data.
#[derive(Debug, Clone, PartialEq)]
pub struct BrainVisionHeader {
    pub data_file: String,
    pub marker_file: Option<String>,
    pub orientation: DataOrientation,
    pub sample_type: SampleType,
    /// Microseconds between samples.
    pub sampling_interval_us: f64,
    pub channels: Vec<ChannelInfo>,
}

impl BrainVisionHeader {
    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn sampling_rate(&self) -> f64 {
        1e6 / self.sampling_interval_us
    }

    /// Canonical header text. Parsing the output yields `self` again.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{HEADER_BANNER}");
        let _ = writeln!(out, "; Data written by phaselock");
        let _ = writeln!(out);
        let _ = writeln!(out, "[Common Infos]");
        let _ = writeln!(out, "Codepage=UTF-8");
        let _ = writeln!(out, "DataFile={}", self.data_file);
        if let Some(marker_file) = &self.marker_file {
            let _ = writeln!(out, "MarkerFile={marker_file}");
        }
        let _ = writeln!(out, "DataFormat=BINARY");
        let _ = writeln!(out, "DataOrientation={}", self.orientation.keyword());
        let _ = writeln!(out, "NumberOfChannels={}", self.channels.len());
        let _ = writeln!(out, "SamplingInterval={}", self.sampling_interval_us);
        let _ = writeln!(out);
        let _ = writeln!(out, "[Binary Infos]");
        let _ = writeln!(out, "BinaryFormat={}", self.sample_type.keyword());
        let _ = writeln!(out);
        let _ = writeln!(out, "[Channel Infos]");
        let _ = writeln!(
            out,
            "; Each entry: Ch<Channel number>=<Name>,<Reference channel name>,"
        );
        let _ = writeln!(out, "; <Resolution in \"Unit\">,<Unit>");
        for (n, ch) in self.channels.iter().enumerate() {
            let _ = writeln!(
                out,
                "Ch{}={},{},{},{}",
                n + 1,
                escape(&ch.label),
                escape(&ch.reference),
                ch.resolution,
                ch.unit
            );
        }
        out
    }
}

// BrainVision stores commas inside fields as `\1`.
fn escape(field: &str) -> String {
    field.replace(',', "\\1")
}

fn unescape(field: &str) -> String {
    field.replace("\\1", ",")
}

fn parse_number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, IngestError> {
    value.trim().parse().map_err(|_| IngestError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
    })
}

pub fn parse_brainvision_header(header_text: &str) -> Result<BrainVisionHeader, IngestError> {
    let doc = IniDocument::parse(header_text)?;
    match doc.banner.as_deref() {
        Some(b) if b.contains("Vision Data Exchange Header File") => {}
        _ => {
            return Err(IngestError::Syntax {
                line: 1,
                message: "not a BrainVision header (missing identification line)".into(),
            })
        }
    }

    let common = doc.require_section("Common Infos")?;
    let data_file = common.require("DataFile")?.to_string();
    let marker_file = common
        .get("MarkerFile")
        .filter(|v| !v.is_empty())
        .map(str::to_string);

    let format = common.require("DataFormat")?;
    if !format.eq_ignore_ascii_case("BINARY") {
        return Err(IngestError::Unsupported(format!("DataFormat={format}")));
    }
    let orientation = match common.require("DataOrientation")?.to_ascii_uppercase().as_str() {
        "MULTIPLEXED" => DataOrientation::Multiplexed,
        "VECTORIZED" => DataOrientation::Vectorized,
        other => return Err(IngestError::Unsupported(format!("DataOrientation={other}"))),
    };
    let n_channels: usize = parse_number("NumberOfChannels", common.require("NumberOfChannels")?)?;
    if n_channels == 0 {
        return Err(IngestError::InvalidValue {
            key: "NumberOfChannels".into(),
            value: "0".into(),
        });
    }
    let sampling_interval_us: f64 =
        parse_number("SamplingInterval", common.require("SamplingInterval")?)?;
    if !(sampling_interval_us.is_finite() && sampling_interval_us > 0.0) {
        return Err(IngestError::InvalidValue {
            key: "SamplingInterval".into(),
            value: sampling_interval_us.to_string(),
        });
    }

    let binary = doc.require_section("Binary Infos")?;
    let sample_type = match binary.require("BinaryFormat")?.to_ascii_uppercase().as_str() {
        "INT_16" => SampleType::Int16,
        "IEEE_FLOAT_32" => SampleType::Float32,
        other => return Err(IngestError::Unsupported(format!("BinaryFormat={other}"))),
    };

    let infos = doc.require_section("Channel Infos")?;
    let mut channels = Vec::with_capacity(n_channels);
    for n in 1..=n_channels {
        let key = format!("Ch{n}");
        let entry = infos.require(&key)?;
        let fields: Vec<&str> = entry.split(',').collect();
        let label = unescape(fields[0].trim());
        if label.is_empty() {
            return Err(IngestError::InvalidValue {
                key,
                value: entry.to_string(),
            });
        }
        let reference = fields.get(1).map(|r| unescape(r.trim())).unwrap_or_default();
        let resolution = match fields.get(2).map(|r| r.trim()) {
            None | Some("") => 1.0,
            Some(r) => parse_number::<f64>(&key, r)?,
        };
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(IngestError::InvalidValue {
                key,
                value: entry.to_string(),
            });
        }
        let unit = fields.get(3).map(|u| u.trim().to_string()).unwrap_or_else(|| "µV".into());
        channels.push(ChannelInfo {
            label,
            reference,
            resolution,
            unit,
        });
    }

    Ok(BrainVisionHeader {
        data_file,
        marker_file,
        orientation,
        sample_type,
        sampling_interval_us,
        channels,
    })
}

/// Parses `.vmrk` text. Positions in the file are one-based.
pub fn parse_markers(marker_text: &str) -> Result<Vec<Marker>, IngestError> {
    let doc = IniDocument::parse(marker_text)?;
    match doc.banner.as_deref() {
        Some(b) if b.contains("Vision Data Exchange Marker File") => {}
        _ => {
            return Err(IngestError::Syntax {
                line: 1,
                message: "not a BrainVision marker file (missing identification line)".into(),
            })
        }
    }
    let infos = doc.require_section("Marker Infos")?;
    let mut numbered = Vec::with_capacity(infos.entries.len());
    for (key, value) in &infos.entries {
        let Some(number) = key
            .strip_prefix("Mk")
            .and_then(|n| n.parse::<usize>().ok())
        else {
            return Err(IngestError::InvalidValue {
                key: key.clone(),
                value: value.clone(),
            });
        };
        let fields: Vec<&str> = value.split(',').collect();
        if fields.len() < 3 {
            return Err(IngestError::InvalidValue {
                key: key.clone(),
                value: value.clone(),
            });
        }
        let position: usize = parse_number(key, fields[2])?;
        if position == 0 {
            return Err(IngestError::InvalidValue {
                key: key.clone(),
                value: value.clone(),
            });
        }
        let size = match fields.get(3).map(|s| s.trim()) {
            None | Some("") => 1,
            Some(s) => parse_number(key, s)?,
        };
        let channel = match fields.get(4).map(|s| s.trim()) {
            None | Some("") => 0,
            Some(s) => parse_number(key, s)?,
        };
        numbered.push((
            number,
            Marker {
                sample_index: position - 1,
                kind: unescape(fields[0].trim()),
                description: unescape(fields[1].trim()),
                size,
                channel,
            },
        ));
    }
    numbered.sort_by_key(|(n, _)| *n);
    if numbered.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(IngestError::Syntax {
            line: 0,
            message: "duplicate marker number".into(),
        });
    }
    Ok(numbered.into_iter().map(|(_, m)| m).collect())
}

pub fn markers_to_text(data_file: &str, markers: &[Marker]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MARKER_BANNER}");
    let _ = writeln!(out);
    let _ = writeln!(out, "[Common Infos]");
    let _ = writeln!(out, "Codepage=UTF-8");
    let _ = writeln!(out, "DataFile={data_file}");
    let _ = writeln!(out);
    let _ = writeln!(out, "[Marker Infos]");
    let _ = writeln!(
        out,
        "; Each entry: Mk<Marker number>=<Type>,<Description>,<Position in data points>,"
    );
    let _ = writeln!(
        out,
        "; <Size in data points>, <Channel number (0 = marker is related to all channels)>"
    );
    for (n, m) in markers.iter().enumerate() {
        let _ = writeln!(
            out,
            "Mk{}={},{},{},{},{}",
            n + 1,
            escape(&m.kind),
            escape(&m.description),
            m.sample_index + 1,
            m.size,
            m.channel
        );
    }
    out
}

fn read_text(path: &Path) -> Result<String, IngestError> {
    fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Decodes raw samples to a channels x samples matrix in microvolts.
pub fn decode_samples(header: &BrainVisionHeader, bytes: &[u8]) -> Result<Array2<f64>, IngestError> {
    let n_channels = header.n_channels();
    let size = header.sample_type.size();
    let frame = n_channels * size;
    if !bytes.len().is_multiple_of(frame) {
        return Err(IngestError::Truncated {
            len: bytes.len() as u64,
            frame,
        });
    }
    let n_samples = bytes.len() / frame;
    let scales = header
        .channels
        .iter()
        .map(ChannelInfo::resolution_uv)
        .collect::<Result<Vec<_>, _>>()?;

    let mut data = Array2::<f64>::zeros((n_channels, n_samples));
    let raw = |offset: usize| -> f64 {
        match header.sample_type {
            SampleType::Int16 => i16::from_le_bytes([bytes[offset], bytes[offset + 1]]) as f64,
            SampleType::Float32 => f32::from_le_bytes([
                bytes[offset],
                bytes[offset + 1],
                bytes[offset + 2],
                bytes[offset + 3],
            ]) as f64,
        }
    };
    for (ch, &scale) in scales.iter().enumerate() {
        let mut row = data.row_mut(ch);
        for (s, value) in row.iter_mut().enumerate() {
            let item = match header.orientation {
                DataOrientation::Multiplexed => s * n_channels + ch,
                DataOrientation::Vectorized => ch * n_samples + s,
            };
            *value = raw(item * size) * scale;
        }
    }
    Ok(data)
}

/// Reads a header and the data and marker files it links to.
pub fn read_brainvision(header_path: &Path) -> Result<(BrainVisionHeader, Recording), IngestError> {
    let header = parse_brainvision_header(&read_text(header_path)?)?;
    let dir = header_path.parent().unwrap_or_else(|| Path::new("."));

    let data_path = dir.join(&header.data_file);
    let bytes = fs::read(&data_path).map_err(|source| IngestError::Io {
        path: data_path.clone(),
        source,
    })?;
    let data = decode_samples(&header, &bytes)?;

    let markers = match &header.marker_file {
        Some(name) => parse_markers(&read_text(&dir.join(name))?)?,
        None => Vec::new(),
    };
    let labels = header.channels.iter().map(|c| c.label.clone()).collect();
    let recording = Recording::new(labels, header.sampling_rate(), data, markers)?;
    Ok((header, recording))
}

pub fn load_recording(header_path: &Path) -> Result<Recording, IngestError> {
    read_brainvision(header_path).map(|(_, rec)| rec)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WriteOptions {
    pub sample_type: SampleType,
    pub orientation: DataOrientation,
    /// Microvolts per stored unit, applied to every channel.
    pub resolution_uv: f64,
}

impl Default for WriteOptions {
    fn default() -> Self {
        WriteOptions {
            sample_type: SampleType::Int16,
            orientation: DataOrientation::Multiplexed,
            resolution_uv: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BrainVisionPaths {
    pub header: PathBuf,
    pub data: PathBuf,
    pub markers: PathBuf,
}

/// Header describing `recording` as it would be written under `basename`.
pub fn header_for(recording: &Recording, basename: &str, opts: &WriteOptions) -> BrainVisionHeader {
    BrainVisionHeader {
        data_file: format!("{basename}.eeg"),
        marker_file: Some(format!("{basename}.vmrk")),
        orientation: opts.orientation,
        sample_type: opts.sample_type,
        sampling_interval_us: 1e6 / recording.sampling_rate(),
        channels: recording
            .channel_labels()
            .iter()
            .map(|label| ChannelInfo {
                label: label.clone(),
                reference: String::new(),
                resolution: opts.resolution_uv,
                unit: "µV".into(),
            })
            .collect(),
    }
}

/// Encodes samples to little-endian bytes. Int16 storage rounds to the
/// nearest multiple of the resolution and rejects values out of range.
pub fn encode_samples(recording: &Recording, opts: &WriteOptions) -> Result<Vec<u8>, IngestError> {
    if !(opts.resolution_uv.is_finite() && opts.resolution_uv > 0.0) {
        return Err(IngestError::InvalidValue {
            key: "resolution".into(),
            value: opts.resolution_uv.to_string(),
        });
    }
    let data = recording.data();
    let (n_channels, n_samples) = data.dim();
    let mut bytes = Vec::with_capacity(n_channels * n_samples * opts.sample_type.size());
    let mut push = |ch: usize, s: usize| -> Result<(), IngestError> {
        let scaled = data[[ch, s]] / opts.resolution_uv;
        match opts.sample_type {
            SampleType::Int16 => {
                let q = scaled.round();
                if !(q >= i16::MIN as f64 && q <= i16::MAX as f64) {
                    return Err(IngestError::InvalidRecording(format!(
                        "value {} µV on channel {} does not fit INT_16 at resolution {}",
                        data[[ch, s]],
                        recording.channel_labels()[ch],
                        opts.resolution_uv
                    )));
                }
                bytes.extend_from_slice(&(q as i16).to_le_bytes());
            }
            SampleType::Float32 => bytes.extend_from_slice(&(scaled as f32).to_le_bytes()),
        }
        Ok(())
    };
    match opts.orientation {
        DataOrientation::Multiplexed => {
            for s in 0..n_samples {
                for ch in 0..n_channels {
                    push(ch, s)?;
                }
            }
        }
        DataOrientation::Vectorized => {
            for ch in 0..n_channels {
                for s in 0..n_samples {
                    push(ch, s)?;
                }
            }
        }
    }
    Ok(bytes)
}

/// Writes `<basename>.vhdr`, `.eeg` and `.vmrk` into `dir`.
pub fn write_brainvision(
    dir: &Path,
    basename: &str,
    recording: &Recording,
    opts: &WriteOptions,
) -> Result<BrainVisionPaths, IngestError> {
    let header = header_for(recording, basename, opts);
    let bytes = encode_samples(recording, opts)?;
    let paths = BrainVisionPaths {
        header: dir.join(format!("{basename}.vhdr")),
        data: dir.join(&header.data_file),
        markers: dir.join(format!("{basename}.vmrk")),
    };
    let write = |path: &Path, contents: &[u8]| {
        fs::write(path, contents).map_err(|source| IngestError::Io {
            path: path.to_path_buf(),
            source,
        })
    };
    write(&paths.header, header.to_text().as_bytes())?;
    write(&paths.data, &bytes)?;
    write(
        &paths.markers,
        markers_to_text(&header.data_file, recording.markers()).as_bytes(),
    )?;
    Ok(paths)
}
