//! Reading EEG recordings, epoch tables and montage files.

pub mod brainvision;
pub mod epochs_csv;
mod ini;
pub mod montage;

use std::collections::HashSet;

use ndarray::Array2;

use crate::domain::EventTag;
use crate::error::IngestError;

pub use brainvision::{
    load_recording, parse_brainvision_header, read_brainvision, write_brainvision,
    BrainVisionHeader, BrainVisionPaths, ChannelInfo, DataOrientation, SampleType, WriteOptions,
};
pub use epochs_csv::{load_epochs_csv, write_epochs_csv, EpochLayout};
pub use montage::{load_montage, parse_montage, Montage, DEFAULT_64_CHANNELS};

/// An event marker. `sample_index` is zero-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Marker {
    pub sample_index: usize,
    pub kind: String,
    pub description: String,
    /// Extent in samples, as stored in the marker file.
    pub size: usize,
    /// Channel number the marker refers to; 0 means all channels.
    pub channel: usize,
}

impl Marker {
    pub fn stimulus(sample_index: usize, description: impl Into<String>) -> Self {
        Marker {
            sample_index,
            kind: "Stimulus".to_string(),
            description: description.into(),
            size: 1,
            channel: 0,
        }
    }

    /// The event tag encoded in the description, if it is one.
    pub fn event_tag(&self) -> Option<EventTag> {
        self.description.parse().ok()
    }
}

/// Continuous multichannel EEG, values in microvolts.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    channel_labels: Vec<String>,
    sampling_rate: f64,
    data: Array2<f64>,
    markers: Vec<Marker>,
}

impl Recording {
    /// `data` is channels x samples.
    pub fn new(
        channel_labels: Vec<String>,
        sampling_rate: f64,
        data: Array2<f64>,
        markers: Vec<Marker>,
    ) -> Result<Self, IngestError> {
        if data.nrows() != channel_labels.len() {
            return Err(IngestError::InvalidRecording(format!(
                "{} data rows for {} channel labels",
                data.nrows(),
                channel_labels.len()
            )));
        }
        let mut seen = HashSet::new();
        for label in &channel_labels {
            if !seen.insert(label.as_str()) {
                return Err(IngestError::InvalidRecording(format!(
                    "duplicate channel label `{label}`"
                )));
            }
        }
        if !(sampling_rate.is_finite() && sampling_rate > 0.0) {
            return Err(IngestError::InvalidRecording(format!(
                "sampling rate {sampling_rate} is not positive"
            )));
        }
        let n_samples = data.ncols();
        if let Some(m) = markers.iter().find(|m| m.sample_index >= n_samples) {
            return Err(IngestError::InvalidRecording(format!(
                "marker `{}` at sample {} beyond {} samples",
                m.description, m.sample_index, n_samples
            )));
        }
        Ok(Recording {
            channel_labels,
            sampling_rate,
            data,
            markers,
        })
    }

    pub fn channel_labels(&self) -> &[String] {
        &self.channel_labels
    }

    pub fn sampling_rate(&self) -> f64 {
        self.sampling_rate
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn markers(&self) -> &[Marker] {
        &self.markers
    }

    pub fn n_channels(&self) -> usize {
        self.channel_labels.len()
    }

    pub fn n_samples(&self) -> usize {
        self.data.ncols()
    }

    pub fn channel_index(&self, label: &str) -> Option<usize> {
        self.channel_labels.iter().position(|l| l == label)
    }
}
