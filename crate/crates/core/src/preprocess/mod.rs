//! Epoch extraction, zero-phase band-pass filtering and instantaneous phase.

pub mod filter;
pub mod hilbert;

use ndarray::{Array3, Axis};
use rayon::prelude::*;

use crate::domain::{ClassLabel, Condition, EventTag, FrequencyBand, Paradigm};
use crate::error::PreprocessError;
use crate::ingest::Recording;

pub use filter::{BandpassFilter, Biquad};
pub use hilbert::{analytic_signal, wrap_phase, AnalyticSignal};

/// Epoch placement relative to its marker, in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochWindow {
    pub start_offset_s: f64,
    pub duration_s: f64,
}

impl Default for EpochWindow {
    /// Two seconds starting at the marker (the task onset).
    fn default() -> Self {
        EpochWindow {
            start_offset_s: 0.0,
            duration_s: 2.0,
        }
    }
}

impl EpochWindow {
    pub fn n_samples(&self, sampling_rate: f64) -> usize {
        (self.duration_s * sampling_rate).round() as usize
    }

    pub fn offset_samples(&self, sampling_rate: f64) -> i64 {
        (self.start_offset_s * sampling_rate).round() as i64
    }
}

/// Provenance carried alongside epoch tensors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochMeta {
    pub paradigm: Paradigm,
    pub class_label: ClassLabel,
    pub condition: Condition,
    pub window: EpochWindow,
}

impl EpochMeta {
    /// Condition follows from the class (`Rest` is rest, words are tasks).
    pub fn new(paradigm: Paradigm, class_label: ClassLabel, window: EpochWindow) -> Self {
        EpochMeta {
            paradigm,
            class_label,
            condition: class_label.condition(),
            window,
        }
    }

    pub fn tag(&self) -> EventTag {
        EventTag {
            paradigm: self.paradigm,
            class_label: self.class_label,
            condition: self.condition,
        }
    }
}

/// Trials x channels x samples, in microvolts.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochSet {
    data: Array3<f64>,
    sampling_rate: f64,
    channel_labels: Vec<String>,
    meta: EpochMeta,
    band: Option<FrequencyBand>,
}

impl EpochSet {
    pub fn new(
        data: Array3<f64>,
        sampling_rate: f64,
        channel_labels: Vec<String>,
        meta: EpochMeta,
    ) -> Result<Self, PreprocessError> {
        let (trials, channels, samples) = data.dim();
        if trials == 0 || channels == 0 || samples == 0 {
            return Err(PreprocessError::Shape(format!(
                "empty epoch tensor {trials}x{channels}x{samples}"
            )));
        }
        if channels != channel_labels.len() {
            return Err(PreprocessError::Shape(format!(
                "{channels} channels but {} labels",
                channel_labels.len()
            )));
        }
        if !(sampling_rate.is_finite() && sampling_rate > 0.0) {
            return Err(PreprocessError::Shape(format!(
                "sampling rate {sampling_rate} is not positive"
            )));
        }
        Ok(EpochSet {
            data: data.as_standard_layout().into_owned(),
            sampling_rate,
            channel_labels,
            meta,
            band: None,
        })
    }

    pub fn data(&self) -> &Array3<f64> {
        &self.data
    }

    pub fn sampling_rate(&self) -> f64 {
        self.sampling_rate
    }

    pub fn channel_labels(&self) -> &[String] {
        &self.channel_labels
    }

    pub fn meta(&self) -> &EpochMeta {
        &self.meta
    }

    /// Band the data was filtered to, if any.
    pub fn band(&self) -> Option<&FrequencyBand> {
        self.band.as_ref()
    }

    pub fn n_trials(&self) -> usize {
        self.data.len_of(Axis(0))
    }

    pub fn n_channels(&self) -> usize {
        self.data.len_of(Axis(1))
    }

    pub fn n_samples(&self) -> usize {
        self.data.len_of(Axis(2))
    }

    fn lanes_mut(&mut self) -> rayon::slice::ChunksMut<'_, f64> {
        let n = self.n_samples();
        self.data
            .as_slice_mut()
            .expect("epoch data is kept in standard layout")
            .par_chunks_mut(n)
    }
}

/// Instantaneous phase, radians in (-pi, pi], aligned with an [`EpochSet`].
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseEpochs {
    phase: Array3<f64>,
    sampling_rate: f64,
    channel_labels: Vec<String>,
    meta: EpochMeta,
    band: Option<FrequencyBand>,
}

impl PhaseEpochs {
    /// Wraps an existing phase tensor; every value must lie in (-pi, pi].
    pub fn new(
        phase: Array3<f64>,
        sampling_rate: f64,
        channel_labels: Vec<String>,
        meta: EpochMeta,
        band: Option<FrequencyBand>,
    ) -> Result<Self, PreprocessError> {
        use std::f64::consts::PI;
        let epochs = EpochSet::new(phase, sampling_rate, channel_labels, meta)?;
        if let Some(bad) = epochs.data.iter().find(|&&p| !(-PI < p && p <= PI)) {
            return Err(PreprocessError::Shape(format!(
                "phase {bad} outside (-pi, pi]"
            )));
        }
        Ok(PhaseEpochs {
            phase: epochs.data,
            sampling_rate,
            channel_labels: epochs.channel_labels,
            meta,
            band,
        })
    }

    /// Wraps a bare phase tensor with placeholder labels (`ch0`, `ch1`, ...)
    /// and metadata.
    pub fn from_tensor(phase: Array3<f64>) -> Result<Self, PreprocessError> {
        let channels = phase.len_of(Axis(1));
        let labels = (0..channels).map(|c| format!("ch{c}")).collect();
        PhaseEpochs::new(
            phase,
            250.0,
            labels,
            EpochMeta::new(Paradigm::ImaginedSpeech, ClassLabel::Rest, EpochWindow::default()),
            None,
        )
    }

    pub fn phase(&self) -> &Array3<f64> {
        &self.phase
    }

    pub fn sampling_rate(&self) -> f64 {
        self.sampling_rate
    }

    pub fn channel_labels(&self) -> &[String] {
        &self.channel_labels
    }

    pub fn meta(&self) -> &EpochMeta {
        &self.meta
    }

    pub fn band(&self) -> Option<&FrequencyBand> {
        self.band.as_ref()
    }

    pub fn n_trials(&self) -> usize {
        self.phase.len_of(Axis(0))
    }

    pub fn n_channels(&self) -> usize {
        self.phase.len_of(Axis(1))
    }

    pub fn n_samples(&self) -> usize {
        self.phase.len_of(Axis(2))
    }
}

/// Number of samples trimmed from each epoch edge before time-averaging:
/// `ceil(0.1 * sampling_rate)`.
pub fn default_edge_exclusion(sampling_rate: f64) -> usize {
    (sampling_rate / 10.0).ceil() as usize
}

/// Cuts one epoch per matching marker, ordered by time, and removes each
/// channel's per-trial mean.
pub fn extract_epochs(
    recording: &Recording,
    paradigm: Paradigm,
    class_label: ClassLabel,
    condition: Condition,
    window: EpochWindow,
) -> Result<EpochSet, PreprocessError> {
    let tag = EventTag {
        paradigm,
        class_label,
        condition,
    };
    let fs = recording.sampling_rate();
    if !(window.duration_s.is_finite() && window.duration_s > 0.0 && window.start_offset_s.is_finite()) {
        return Err(PreprocessError::InvalidWindow(format!("{window:?}")));
    }
    let n_samples = window.n_samples(fs);
    if n_samples == 0 {
        return Err(PreprocessError::InvalidWindow(format!(
            "{} s at {fs} Hz is shorter than one sample",
            window.duration_s
        )));
    }
    let offset = window.offset_samples(fs);

    let mut onsets: Vec<usize> = recording
        .markers()
        .iter()
        .filter(|m| m.event_tag() == Some(tag))
        .map(|m| m.sample_index)
        .collect();
    if onsets.is_empty() {
        return Err(PreprocessError::NoMatchingMarkers(tag));
    }
    onsets.sort_unstable();

    let len = recording.n_samples();
    for &marker in &onsets {
        let start = marker as i64 + offset;
        let end = start + n_samples as i64;
        if start < 0 || end > len as i64 {
            return Err(PreprocessError::WindowOutOfBounds {
                marker,
                start,
                end,
                len,
            });
        }
    }

    let n_channels = recording.n_channels();
    let source = recording.data();
    let mut data = Array3::<f64>::zeros((onsets.len(), n_channels, n_samples));
    for (trial, &marker) in onsets.iter().enumerate() {
        let start = (marker as i64 + offset) as usize;
        for ch in 0..n_channels {
            let src = source.row(ch);
            let mut dst = data.slice_mut(ndarray::s![trial, ch, ..]);
            dst.assign(&src.slice(ndarray::s![start..start + n_samples]));
            let mean = dst.sum() / n_samples as f64;
            dst.mapv_inplace(|v| v - mean);
        }
    }
    EpochSet::new(
        data,
        fs,
        recording.channel_labels().to_vec(),
        EpochMeta {
            paradigm,
            class_label,
            condition,
            window,
        },
    )
}

/// Zero-phase Butterworth band-pass of every trial and channel.
pub fn bandpass(epochs: &EpochSet, band: &FrequencyBand) -> Result<EpochSet, PreprocessError> {
    bandpass_with_order(epochs, band, filter::DEFAULT_ORDER)
}

pub fn bandpass_with_order(
    epochs: &EpochSet,
    band: &FrequencyBand,
    order: usize,
) -> Result<EpochSet, PreprocessError> {
    band.validate_for(epochs.sampling_rate)?;
    let design = BandpassFilter::butterworth(order, band.low_hz, band.high_hz, epochs.sampling_rate);
    let mut out = epochs.clone();
    out.band = Some(band.clone());
    out.lanes_mut()
        .for_each_init(Vec::new, |scratch, lane| design.filtfilt_into(lane, scratch));
    Ok(out)
}

/// Instantaneous phase of the analytic signal of every trial and channel.
pub fn analytic_phase(epochs: &EpochSet) -> PhaseEpochs {
    let n = epochs.n_samples();
    let transform = AnalyticSignal::new(n);
    let mut phase = Array3::<f64>::zeros(epochs.data.dim());
    let src = epochs
        .data
        .as_slice()
        .expect("epoch data is kept in standard layout");
    phase
        .as_slice_mut()
        .expect("fresh array is contiguous")
        .par_chunks_mut(n)
        .zip(src.par_chunks(n))
        .for_each_init(Vec::new, |buf, (dst, lane)| transform.phase_into(lane, buf, dst));
    PhaseEpochs {
        phase,
        sampling_rate: epochs.sampling_rate,
        channel_labels: epochs.channel_labels.clone(),
        meta: epochs.meta,
        band: epochs.band.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Marker;
    use ndarray::Array2;
    use std::f64::consts::PI;

    fn recording_with(markers: Vec<Marker>, len: usize, value: impl Fn(usize, usize) -> f64) -> Recording {
        let labels = vec!["C3".to_string(), "C4".to_string(), "Cz".to_string()];
        let data = Array2::from_shape_fn((3, len), |(c, s)| value(c, s));
        Recording::new(labels, 250.0, data, markers).unwrap()
    }

    #[test]
    fn ten_markers_give_ten_trials() {
        let markers = (0..10)
            .map(|k| Marker::stimulus(100 + 600 * k, "IS/Hello/task"))
            .chain([Marker::stimulus(50, "IS/Rest/rest")])
            .collect();
        let rec = recording_with(markers, 7000, |c, s| (c * s) as f64);
        let e = extract_epochs(&rec, Paradigm::ImaginedSpeech, ClassLabel::Hello, Condition::Task, EpochWindow::default()).unwrap();
        assert_eq!(e.data().dim(), (10, 3, 500));
        assert_eq!(e.meta().class_label, ClassLabel::Hello);
    }

    #[test]
    fn trials_are_time_ordered_and_demeaned() {
        let markers = vec![
            Marker::stimulus(600, "VI/Clock/task"),
            Marker::stimulus(0, "VI/Clock/task"),
        ];
        let rec = recording_with(markers, 1200, |_, s| s as f64);
        let window = EpochWindow { start_offset_s: 0.0, duration_s: 0.02 };
        let e = extract_epochs(&rec, Paradigm::VisualImagery, ClassLabel::Clock, Condition::Task, window).unwrap();
        assert_eq!(e.n_samples(), 5);
        // ramp 0..5 demeaned
        assert_eq!(e.data()[[0, 0, 0]], -2.0);
        assert_eq!(e.data()[[1, 0, 4]], 2.0);
    }

    #[test]
    fn constant_channels_demean_to_zero() {
        let rec = recording_with(vec![Marker::stimulus(10, "IS/Yes/task")], 600, |c, _| 7.5 + c as f64);
        let e = extract_epochs(&rec, Paradigm::ImaginedSpeech, ClassLabel::Yes, Condition::Task, EpochWindow::default()).unwrap();
        assert!(e.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn window_past_the_end_is_an_error() {
        // marker 0.5 s before the end with a 2 s window
        let rec = recording_with(vec![Marker::stimulus(1000 - 125, "IS/Pain/task")], 1000, |_, _| 0.0);
        let err = extract_epochs(&rec, Paradigm::ImaginedSpeech, ClassLabel::Pain, Condition::Task, EpochWindow::default()).unwrap_err();
        assert!(matches!(err, PreprocessError::WindowOutOfBounds { .. }));
        let window = EpochWindow { start_offset_s: -10.0, duration_s: 0.1 };
        assert!(extract_epochs(&rec, Paradigm::ImaginedSpeech, ClassLabel::Pain, Condition::Task, window).is_err());
    }

    #[test]
    fn no_matching_markers_is_an_error() {
        let rec = recording_with(vec![Marker::stimulus(0, "IS/Pain/task")], 1000, |_, _| 0.0);
        let err = extract_epochs(&rec, Paradigm::VisualImagery, ClassLabel::Pain, Condition::Task, EpochWindow::default()).unwrap_err();
        assert!(matches!(err, PreprocessError::NoMatchingMarkers(_)));
    }

    #[test]
    fn band_above_nyquist_is_rejected() {
        let rec = recording_with(vec![Marker::stimulus(0, "IS/Pain/task")], 1000, |_, s| s as f64);
        let e = extract_epochs(&rec, Paradigm::ImaginedSpeech, ClassLabel::Pain, Condition::Task, EpochWindow::default()).unwrap();
        let band = FrequencyBand::new("high", 100.0, 130.0).unwrap();
        assert!(matches!(bandpass(&e, &band).unwrap_err(), PreprocessError::Domain(_)));
    }

    #[test]
    fn phase_is_wrapped() {
        let data = Array3::from_shape_fn((2, 2, 100), |(t, c, s)| ((s * (c + 1)) as f64 * 0.37 + t as f64).sin());
        let e = EpochSet::new(data, 250.0, vec!["a".into(), "b".into()], EpochMeta::new(Paradigm::ImaginedSpeech, ClassLabel::Rest, EpochWindow::default())).unwrap();
        let p = analytic_phase(&e);
        assert!(p.phase().iter().all(|&v| -PI < v && v <= PI));
    }

    #[test]
    fn edge_exclusion_default() {
        assert_eq!(default_edge_exclusion(250.0), 25);
        assert_eq!(default_edge_exclusion(1000.0), 100);
        assert_eq!(default_edge_exclusion(256.0), 26);
    }
}
