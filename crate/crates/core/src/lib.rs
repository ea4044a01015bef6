//! Phase-locking-value (PLV) connectivity analysis for multichannel EEG.
//!
//! The pipeline runs from BrainVision recordings to epochs, band-pass
//! filtering and Hilbert phase, then to PLV matrices, region averages and
//! paired task-versus-rest statistics. [`synth`] generates coupled
//! oscillators with analytically known PLV for end-to-end checks.

pub mod connectivity;
pub mod domain;
pub mod error;
pub mod ingest;
pub mod preprocess;
pub mod stats;
pub mod synth;

pub use connectivity::{
    class_table, plv_matrix, plv_pair, plv_timeseries, region_average, region_pairs, ClassTable,
    PlvMatrix, RegionConnectivity,
};
pub use domain::{ClassLabel, Condition, EventTag, FrequencyBand, Paradigm, Region};
pub use error::{Error, Result};
pub use ingest::{load_epochs_csv, load_montage, load_recording, Marker, Montage, Recording};
pub use preprocess::{
    analytic_phase, bandpass, default_edge_exclusion, extract_epochs, EpochMeta, EpochSet,
    EpochWindow, PhaseEpochs,
};
pub use stats::{paired_t_test, region_report, summarize, PairedTTest, RegionPairResult, Summary};
pub use synth::{expected_plv, gen_coupled_epochs, gen_pink_noise, CouplingSpec};
