//! Descriptive summaries, paired Student-t tests and the task-versus-rest
//! region report.

pub mod special;

use crate::domain::Region;
use crate::error::StatsError;

pub use special::{ln_gamma, regularized_incomplete_beta, student_t_two_tailed};

/// Mean and sample standard deviation (`n - 1` denominator).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    /// `None` for a single value.
    pub std: Option<f64>,
}

/// Arithmetic mean, accumulated as offsets from the first value so that
/// equal inputs return that value exactly.
pub fn mean(values: &[f64]) -> Result<f64, StatsError> {
    let Some(&first) = values.first() else {
        return Err(StatsError::TooFewValues { needed: 1, got: 0 });
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    Ok(first + values.iter().map(|v| v - first).sum::<f64>() / values.len() as f64)
}

pub fn sample_std(values: &[f64]) -> Result<f64, StatsError> {
    if values.len() < 2 {
        return Err(StatsError::TooFewValues {
            needed: 2,
            got: values.len(),
        });
    }
    let m = mean(values)?;
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    Ok((ss / (values.len() - 1) as f64).sqrt())
}

pub fn summarize(values: &[f64]) -> Result<Summary, StatsError> {
    let m = mean(values)?;
    let std = if values.len() >= 2 {
        Some(sample_std(values)?)
    } else {
        None
    };
    Ok(Summary {
        n: values.len(),
        mean: m,
        std,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedTTest {
    pub t: f64,
    pub p: f64,
    pub df: usize,
}

/// Two-tailed paired t-test on `a - b`.
///
/// All-zero differences give `t = 0, p = 1`; constant nonzero differences
/// are a [`StatsError::DegenerateVariance`].
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<PairedTTest, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch(a.len(), b.len()));
    }
    let n = a.len();
    if n < 2 {
        return Err(StatsError::TooFewValues { needed: 2, got: n });
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let m = mean(&diffs)?;
    let sd = sample_std(&diffs)?;
    let df = n - 1;
    if sd == 0.0 {
        if m == 0.0 {
            return Ok(PairedTTest { t: 0.0, p: 1.0, df });
        }
        return Err(StatsError::DegenerateVariance(m));
    }
    let t = m / (sd / (n as f64).sqrt());
    Ok(PairedTTest {
        t,
        p: student_t_two_tailed(t, df as f64),
        df,
    })
}

/// One row of the task-versus-rest comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionPairResult {
    pub pair: (Region, Region),
    pub mean_task: f64,
    pub mean_rest: f64,
    pub t: f64,
    pub p: f64,
    pub df: usize,
}

impl RegionPairResult {
    pub fn label(&self) -> String {
        format!("{}-{}", self.pair.0, self.pair.1)
    }
}

/// Per-subject values for each region pair: `values[subject][pair]`, with
/// pairs in `pairs` order.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionGrid {
    pub pairs: Vec<(Region, Region)>,
    pub values: Vec<Vec<f64>>,
}

/// Paired task-versus-rest test for every region pair of the grids. Both
/// grids must list the same pairs and the same number of subjects.
pub fn region_report(task: &RegionGrid, rest: &RegionGrid) -> Result<Vec<RegionPairResult>, StatsError> {
    if task.pairs != rest.pairs {
        return Err(StatsError::LengthMismatch(task.pairs.len(), rest.pairs.len()));
    }
    if task.values.len() != rest.values.len() {
        return Err(StatsError::LengthMismatch(task.values.len(), rest.values.len()));
    }
    let column = |grid: &RegionGrid, c: usize| -> Result<Vec<f64>, StatsError> {
        grid.values
            .iter()
            .map(|row| {
                row.get(c).copied().ok_or(StatsError::LengthMismatch(row.len(), grid.pairs.len()))
            })
            .collect()
    };
    task.pairs
        .iter()
        .enumerate()
        .map(|(c, &pair)| {
            let a = column(task, c)?;
            let b = column(rest, c)?;
            let test = paired_t_test(&a, &b)?;
            Ok(RegionPairResult {
                pair,
                mean_task: mean(&a)?,
                mean_rest: mean(&b)?,
                t: test.t,
                p: test.p,
                df: test.df,
            })
        })
        .collect()
}

/// Rounds half away from zero at `decimals` places. Values within 1e-9 of a
/// tie (in units of the last place) count as ties, so decimal inputs such as
/// 0.285 round up despite their binary representation.
pub fn round_half_up(value: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    let scaled = value * scale;
    let nudged = scaled + scaled.signum() * 1e-9;
    nudged.round() / scale
}

/// Fixed-point display with half-up rounding; never prints `-0.00`.
pub fn format_fixed(value: f64, decimals: u32) -> String {
    let rounded = round_half_up(value, decimals);
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    format!("{:.*}", decimals as usize, rounded)
}

/// p-values at three decimals; anything below 0.001 prints as `0.000`.
pub fn format_p(p: f64) -> String {
    if p < 0.001 {
        "0.000".to_string()
    } else {
        format_fixed(p, 3)
    }
}
