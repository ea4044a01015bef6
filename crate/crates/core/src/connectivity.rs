//! Phase-locking value across trials, channel-pair matrices and
//! region-level grand averages.
//!
//! For channels `i`, `k` and sample `t` over `N` trials:
//!
//! ```text
//! PLV(t) = | (1/N) * sum_n exp(j * (phi_i(t, n) - phi_k(t, n))) |
//! ```
//!
//! Scalars are the arithmetic mean of `PLV(t)` over interior samples.

use rayon::prelude::*;

use crate::domain::{FrequencyBand, Region};
use crate::error::ConnectivityError;
use crate::ingest::Montage;
use crate::preprocess::{EpochMeta, PhaseEpochs};
use crate::stats::{summarize, Summary};

fn check_channels(phases: &PhaseEpochs, i: usize, k: usize) -> Result<(), ConnectivityError> {
    let channels = phases.n_channels();
    for index in [i, k] {
        if index >= channels {
            return Err(ConnectivityError::ChannelOutOfRange { index, channels });
        }
    }
    if phases.n_trials() < 2 {
        return Err(ConnectivityError::InsufficientTrials(phases.n_trials()));
    }
    Ok(())
}

fn check_exclusion(samples: usize, exclusion: usize) -> Result<(), ConnectivityError> {
    if 2 * exclusion >= samples {
        return Err(ConnectivityError::EdgeExclusionTooLarge { exclusion, samples });
    }
    Ok(())
}

/// Per-sample PLV between channels `i` and `k`.
pub fn plv_timeseries(phases: &PhaseEpochs, i: usize, k: usize) -> Result<Vec<f64>, ConnectivityError> {
    check_channels(phases, i, k)?;
    Ok(timeseries_unchecked(phases, i, k, 0, phases.n_samples()))
}

fn timeseries_unchecked(phases: &PhaseEpochs, i: usize, k: usize, from: usize, to: usize) -> Vec<f64> {
    let phase = phases.phase();
    let n = phases.n_trials() as f64;
    (from..to)
        .map(|t| {
            let (mut re, mut im) = (0.0, 0.0);
            for trial in 0..phases.n_trials() {
                let theta = phase[[trial, i, t]] - phase[[trial, k, t]];
                re += theta.cos();
                im += theta.sin();
            }
            (re.hypot(im) / n).min(1.0)
        })
        .collect()
}

/// Mean PLV over samples `[edge_exclusion, T - edge_exclusion)`.
pub fn plv_pair(
    phases: &PhaseEpochs,
    i: usize,
    k: usize,
    edge_exclusion: usize,
) -> Result<f64, ConnectivityError> {
    check_channels(phases, i, k)?;
    let samples = phases.n_samples();
    check_exclusion(samples, edge_exclusion)?;
    let series = timeseries_unchecked(phases, i, k, edge_exclusion, samples - edge_exclusion);
    Ok(series.iter().sum::<f64>() / series.len() as f64)
}

/// Symmetric channel x channel PLV matrix with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct PlvMatrix {
    n_channels: usize,
    values: Vec<f64>,
    band: Option<FrequencyBand>,
    meta: EpochMeta,
}

impl PlvMatrix {
    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.values[i * self.n_channels + k]
    }

    /// Row-major values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn band(&self) -> Option<&FrequencyBand> {
        self.band.as_ref()
    }

    pub fn meta(&self) -> &EpochMeta {
        &self.meta
    }

    /// Builds a matrix from row-major values, checking symmetry, unit
    /// diagonal and range.
    pub fn from_values(
        n_channels: usize,
        values: Vec<f64>,
        band: Option<FrequencyBand>,
        meta: EpochMeta,
    ) -> Result<Self, ConnectivityError> {
        let ok = values.len() == n_channels * n_channels
            && (0..n_channels).all(|i| {
                values[i * n_channels + i] == 1.0
                    && (0..n_channels).all(|k| {
                        let v = values[i * n_channels + k];
                        (0.0..=1.0).contains(&v) && v == values[k * n_channels + i]
                    })
            });
        if !ok {
            return Err(ConnectivityError::InvalidMatrix(format!(
                "{} values are not a symmetric {n_channels}x{n_channels} matrix in [0, 1] with unit diagonal",
                values.len()
            )));
        }
        Ok(PlvMatrix {
            n_channels,
            values,
            band,
            meta,
        })
    }
}

/// Unit phasors laid out channel-major, then sample, then trial, so the
/// trial sum for one (channel, sample) reads contiguous memory.
struct Phasors {
    cos: Vec<f64>,
    sin: Vec<f64>,
    trials: usize,
    samples: usize,
}

impl Phasors {
    fn new(phases: &PhaseEpochs, from: usize, to: usize) -> Self {
        let phase = phases.phase();
        let (trials, channels, _) = phase.dim();
        let samples = to - from;
        let mut cos = vec![0.0; channels * samples * trials];
        let mut sin = vec![0.0; channels * samples * trials];
        for ch in 0..channels {
            for (s, t) in (from..to).enumerate() {
                let base = (ch * samples + s) * trials;
                for trial in 0..trials {
                    let (sv, cv) = phase[[trial, ch, t]].sin_cos();
                    cos[base + trial] = cv;
                    sin[base + trial] = sv;
                }
            }
        }
        Phasors {
            cos,
            sin,
            trials,
            samples,
        }
    }

    fn lane(&self, ch: usize, s: usize) -> (&[f64], &[f64]) {
        let base = (ch * self.samples + s) * self.trials;
        (
            &self.cos[base..base + self.trials],
            &self.sin[base..base + self.trials],
        )
    }

    /// Time-averaged PLV for one pair. Fixed summation order: four
    /// interleaved partial sums over trials, combined pairwise.
    fn pair(&self, i: usize, k: usize) -> f64 {
        let n = self.trials as f64;
        let mut total = 0.0;
        for s in 0..self.samples {
            let (ci, si) = self.lane(i, s);
            let (ck, sk) = self.lane(k, s);
            let mut re = [0.0f64; 4];
            let mut im = [0.0f64; 4];
            let chunks = self.trials / 4;
            for c in 0..chunks {
                for l in 0..4 {
                    let idx = 4 * c + l;
                    re[l] += ci[idx] * ck[idx] + si[idx] * sk[idx];
                    im[l] += si[idx] * ck[idx] - ci[idx] * sk[idx];
                }
            }
            for idx in 4 * chunks..self.trials {
                re[0] += ci[idx] * ck[idx] + si[idx] * sk[idx];
                im[0] += si[idx] * ck[idx] - ci[idx] * sk[idx];
            }
            let re = (re[0] + re[1]) + (re[2] + re[3]);
            let im = (im[0] + im[1]) + (im[2] + im[3]);
            total += (re.hypot(im) / n).min(1.0);
        }
        total / self.samples as f64
    }
}

/// PLV for every unordered channel pair. Pairs are evaluated independently
/// (in parallel when a pool is available) and the result does not depend
/// on scheduling.
pub fn plv_matrix(phases: &PhaseEpochs, edge_exclusion: usize) -> Result<PlvMatrix, ConnectivityError> {
    let channels = phases.n_channels();
    if phases.n_trials() < 2 {
        return Err(ConnectivityError::InsufficientTrials(phases.n_trials()));
    }
    let samples = phases.n_samples();
    check_exclusion(samples, edge_exclusion)?;
    let phasors = Phasors::new(phases, edge_exclusion, samples - edge_exclusion);

    let pairs: Vec<(usize, usize)> = (0..channels)
        .flat_map(|i| (i + 1..channels).map(move |k| (i, k)))
        .collect();
    let pair_values: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, k)| phasors.pair(i, k))
        .collect();

    let mut values = vec![0.0; channels * channels];
    for i in 0..channels {
        values[i * channels + i] = 1.0;
    }
    for (&(i, k), &v) in pairs.iter().zip(&pair_values) {
        values[i * channels + k] = v;
        values[k * channels + i] = v;
    }
    Ok(PlvMatrix {
        n_channels: channels,
        values,
        band: phases.band().cloned(),
        meta: *phases.meta(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionConnectivity {
    pub pair: (Region, Region),
    pub value: f64,
}

/// Channel pairs averaged by [`region_average`], in summation order.
pub fn region_pairs(montage: &Montage, a: Region, b: Region) -> Vec<(usize, usize)> {
    let left = montage.channels_in(a);
    if a == b {
        left.iter()
            .enumerate()
            .flat_map(|(n, &i)| left[n + 1..].iter().map(move |&k| (i, k)))
            .collect()
    } else {
        let right = montage.channels_in(b);
        left.iter()
            .flat_map(|&i| right.iter().filter(move |&&k| k != i).map(move |&k| (i, k)))
            .collect()
    }
}

/// Grand average over the channel pairs within `a` (when `a == b`) or
/// between `a` and `b`.
pub fn region_average(
    matrix: &PlvMatrix,
    montage: &Montage,
    a: Region,
    b: Region,
) -> Result<RegionConnectivity, ConnectivityError> {
    if montage.n_channels() != matrix.n_channels() {
        return Err(ConnectivityError::MontageMismatch {
            montage: montage.n_channels(),
            matrix: matrix.n_channels(),
        });
    }
    let pairs = region_pairs(montage, a, b);
    if pairs.is_empty() {
        return Err(ConnectivityError::EmptyRegion(a, b));
    }
    let sum: f64 = pairs.iter().map(|&(i, k)| matrix.get(i, k)).sum();
    Ok(RegionConnectivity {
        pair: (a, b),
        value: sum / pairs.len() as f64,
    })
}

/// Subjects x classes grid with per-column mean and sample standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassTable {
    pub cells: Vec<Vec<f64>>,
    pub columns: Vec<Summary>,
}

impl ClassTable {
    pub fn n_subjects(&self) -> usize {
        self.cells.len()
    }

    pub fn means(&self) -> Vec<f64> {
        self.columns.iter().map(|s| s.mean).collect()
    }

    /// Column standard deviations; `None` where only one subject exists.
    pub fn stds(&self) -> Vec<Option<f64>> {
        self.columns.iter().map(|s| s.std).collect()
    }
}

/// Summarises a complete subject x class grid. Any `None` cell is an error.
pub fn class_table(grid: &[Vec<Option<f64>>]) -> Result<ClassTable, ConnectivityError> {
    let Some(first) = grid.first() else {
        return Err(ConnectivityError::EmptyTable);
    };
    let n_columns = first.len();
    let mut cells = Vec::with_capacity(grid.len());
    for (subject, row) in grid.iter().enumerate() {
        let mut out = Vec::with_capacity(n_columns);
        for column in 0..n_columns.max(row.len()) {
            match row.get(column).copied().flatten() {
                Some(v) if column < n_columns => out.push(v),
                _ => return Err(ConnectivityError::MissingCell { subject, column }),
            }
        }
        cells.push(out);
    }
    let columns = (0..n_columns)
        .map(|c| {
            let column: Vec<f64> = cells.iter().map(|row| row[c]).collect();
            summarize(&column)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ClassTable { cells, columns })
}
