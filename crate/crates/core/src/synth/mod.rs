//! Synthetic multichannel EEG with known phase-locking ground truth.
//!
//! Coupled channels share a sinusoidal carrier. Couplings form a forest:
//! each tree root takes a per-trial phase, and every other member takes its
//! parent's phase plus a von Mises(0, κ) offset drawn per trial. The expected
//! PLV of a coupled pair is then `I1(κ)/I0(κ)`, and along a tree path it is
//! the product of the edge ratios.
//!
//! Every trial draws from its own ChaCha8 stream (`seed`, stream = trial
//! index), so output is independent of generation order and thread count.

mod bessel;
mod pink;
mod vonmises;

use std::collections::VecDeque;
use std::f64::consts::PI;

use ndarray::{Array2, Array3, ArrayViewMut2, Axis};
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{ClassLabel, EventTag, Paradigm};
use crate::error::SynthError;
use crate::ingest::{Marker, Recording};
use crate::preprocess::{EpochMeta, EpochSet, EpochWindow};

pub use bessel::expected_plv;
pub use pink::{gen_pink_noise, PinkNoise};
pub use vonmises::VonMises;

/// One coupled channel pair. `kappa = inf` locks the pair exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coupling {
    pub a: usize,
    pub b: usize,
    #[serde(with = "kappa_serde")]
    pub kappa: f64,
}

fn default_amplitude() -> f64 {
    10.0
}

fn default_true() -> bool {
    true
}

/// Parameters of a coupled-oscillator simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSpec {
    pub n_channels: usize,
    #[serde(default)]
    pub couplings: Vec<Coupling>,
    pub carrier_hz: f64,
    /// Carrier amplitude in µV.
    #[serde(default = "default_amplitude")]
    pub amplitude_uv: f64,
    /// Randomize the tree-root phase per trial; otherwise roots start at 0.
    #[serde(default = "default_true")]
    pub trial_jitter: bool,
    /// RMS of the additive pink noise in µV.
    #[serde(default)]
    pub noise_sigma: f64,
    pub seed: u64,
}

impl CouplingSpec {
    pub fn new(n_channels: usize, carrier_hz: f64, seed: u64) -> Self {
        CouplingSpec {
            n_channels,
            couplings: Vec::new(),
            carrier_hz,
            amplitude_uv: default_amplitude(),
            trial_jitter: true,
            noise_sigma: 0.0,
            seed,
        }
    }

    pub fn couple(mut self, a: usize, b: usize, kappa: f64) -> Self {
        self.couplings.push(Coupling { a, b, kappa });
        self
    }

    pub fn validate(&self, sampling_rate: f64) -> Result<(), SynthError> {
        self.forest().map(|_| ())?;
        if !(self.carrier_hz > 0.0 && self.carrier_hz.is_finite()) {
            return Err(SynthError::InvalidParameter(format!(
                "carrier {} Hz",
                self.carrier_hz
            )));
        }
        if !(sampling_rate.is_finite() && sampling_rate > 2.0 * self.carrier_hz) {
            return Err(SynthError::Nyquist {
                carrier_hz: self.carrier_hz,
                fs: sampling_rate,
            });
        }
        if !(self.amplitude_uv >= 0.0 && self.amplitude_uv.is_finite()) {
            return Err(SynthError::InvalidParameter(format!(
                "amplitude {} µV",
                self.amplitude_uv
            )));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(SynthError::InvalidParameter(format!(
                "noise sigma {} µV",
                self.noise_sigma
            )));
        }
        Ok(())
    }

    /// Parent links (`parent[c] = Some((p, κ))`) and a breadth-first order
    /// in which every parent precedes its children.
    fn forest(&self) -> Result<Forest, SynthError> {
        let n = self.n_channels;
        if n == 0 {
            return Err(SynthError::InvalidParameter("no channels".into()));
        }
        let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut root: Vec<usize> = (0..n).collect();
        fn find(root: &mut [usize], mut x: usize) -> usize {
            while root[x] != x {
                root[x] = root[root[x]];
                x = root[x];
            }
            x
        }
        for c in &self.couplings {
            for index in [c.a, c.b] {
                if index >= n {
                    return Err(SynthError::ChannelOutOfRange { index, channels: n });
                }
            }
            if c.kappa.is_nan() || c.kappa < 0.0 {
                return Err(SynthError::InvalidKappa(c.kappa));
            }
            let (ra, rb) = (find(&mut root, c.a), find(&mut root, c.b));
            if ra == rb {
                return Err(SynthError::CouplingCycle(c.a, c.b));
            }
            root[ra] = rb;
            adjacency[c.a].push((c.b, c.kappa));
            adjacency[c.b].push((c.a, c.kappa));
        }
        let mut parent = vec![None; n];
        let mut coupled = vec![false; n];
        let mut order = Vec::new();
        let mut visited = vec![false; n];
        for start in 0..n {
            if visited[start] || adjacency[start].is_empty() {
                continue;
            }
            visited[start] = true;
            coupled[start] = true;
            let mut queue = VecDeque::from([start]);
            while let Some(node) = queue.pop_front() {
                for &(next, kappa) in &adjacency[node] {
                    if !visited[next] {
                        visited[next] = true;
                        coupled[next] = true;
                        parent[next] = Some((node, kappa));
                        order.push(next);
                        queue.push_back(next);
                    }
                }
            }
        }
        Ok(Forest {
            parent,
            coupled,
            order,
        })
    }

    /// Population PLV between channels `i` and `k`: the product of edge
    /// ratios along their tree path, 1 for `i == k`, 0 if unconnected.
    pub fn expected_pair_plv(&self, i: usize, k: usize) -> Result<f64, SynthError> {
        let forest = self.forest()?;
        for index in [i, k] {
            if index >= self.n_channels {
                return Err(SynthError::ChannelOutOfRange {
                    index,
                    channels: self.n_channels,
                });
            }
        }
        let ancestors = |mut c: usize| {
            let mut path = vec![(c, 1.0)];
            let mut acc = 1.0;
            while let Some((p, kappa)) = forest.parent[c] {
                acc *= expected_plv(kappa);
                path.push((p, acc));
                c = p;
            }
            path
        };
        let up_i = ancestors(i);
        let up_k = ancestors(k);
        for &(node_i, plv_i) in &up_i {
            if let Some(&(_, plv_k)) = up_k.iter().find(|(node_k, _)| *node_k == node_i) {
                return Ok(plv_i * plv_k);
            }
        }
        Ok(0.0)
    }

    /// Expected PLV of each declared coupling.
    pub fn ground_truth(&self) -> GroundTruth {
        GroundTruth {
            pairs: self
                .couplings
                .iter()
                .map(|c| PairTruth {
                    a: c.a,
                    b: c.b,
                    kappa: c.kappa,
                    expected_plv: expected_plv(c.kappa),
                })
                .collect(),
        }
    }
}

struct Forest {
    parent: Vec<Option<(usize, f64)>>,
    coupled: Vec<bool>,
    order: Vec<usize>,
}

/// Expected PLV of one coupled pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairTruth {
    pub a: usize,
    pub b: usize,
    #[serde(with = "kappa_serde")]
    pub kappa: f64,
    pub expected_plv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub pairs: Vec<PairTruth>,
}

/// Generates trials of a [`CouplingSpec`] at a fixed length and rate.
pub struct CoupledGenerator {
    spec: CouplingSpec,
    omega: f64,
    n_samples: usize,
    parent: Vec<Option<(usize, VonMises)>>,
    coupled: Vec<bool>,
    order: Vec<usize>,
    pink: Option<PinkNoise>,
    phases: Vec<f64>,
}

impl CoupledGenerator {
    pub fn new(spec: &CouplingSpec, n_samples: usize, sampling_rate: f64) -> Result<Self, SynthError> {
        spec.validate(sampling_rate)?;
        if n_samples < 2 {
            return Err(SynthError::InvalidParameter(format!(
                "{n_samples} samples per trial"
            )));
        }
        let forest = spec.forest()?;
        let parent = forest
            .parent
            .iter()
            .map(|link| {
                link.map(|(p, kappa)| VonMises::new(0.0, kappa).map(|vm| (p, vm)))
                    .transpose()
            })
            .collect::<Result<_, _>>()?;
        Ok(CoupledGenerator {
            omega: 2.0 * PI * spec.carrier_hz / sampling_rate,
            n_samples,
            parent,
            coupled: forest.coupled,
            order: forest.order,
            pink: (spec.noise_sigma > 0.0).then(|| PinkNoise::new(n_samples)),
            phases: vec![0.0; spec.n_channels],
            spec: spec.clone(),
        })
    }

    pub fn n_channels(&self) -> usize {
        self.spec.n_channels
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    /// Writes trial `trial` (channels x samples) into `out`.
    pub fn trial_into(&mut self, trial: u64, mut out: ArrayViewMut2<f64>) {
        assert_eq!(out.dim(), (self.spec.n_channels, self.n_samples), "trial buffer shape");
        let mut rng = ChaCha8Rng::seed_from_u64(self.spec.seed);
        rng.set_stream(trial);

        for (c, phase) in self.phases.iter_mut().enumerate() {
            let uniform = PI * (2.0 * rng.random::<f64>() - 1.0);
            let is_root = self.coupled[c] && self.parent[c].is_none();
            *phase = if is_root && !self.spec.trial_jitter { 0.0 } else { uniform };
        }
        for &c in &self.order {
            let (p, vm) = self.parent[c].expect("ordered nodes have parents");
            self.phases[c] = self.phases[p] + vm.sample(&mut rng);
        }

        let amplitude = self.spec.amplitude_uv;
        for (c, mut row) in out.axis_iter_mut(Axis(0)).enumerate() {
            let row = row.as_slice_mut().expect("contiguous trial rows");
            let phase = self.phases[c];
            match &mut self.pink {
                Some(pink) => pink.fill(&mut rng, self.spec.noise_sigma, row),
                None => row.fill(0.0),
            }
            for (t, v) in row.iter_mut().enumerate() {
                *v += amplitude * (self.omega * t as f64 + phase).cos();
            }
        }
    }
}

/// Mixes `parts` into `base` with SplitMix64 steps, giving independent
/// seeds for nested simulation units (subject, paradigm, class, ...).
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    fn splitmix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    parts.iter().fold(splitmix(base), |acc, &p| splitmix(acc ^ splitmix(p)))
}

/// Channel labels `ch1..chN` used for unnamed synthetic data.
pub fn synthetic_labels(n_channels: usize) -> Vec<String> {
    (1..=n_channels).map(|i| format!("ch{i}")).collect()
}

/// Trials x channels x samples of coupled oscillators with generic labels.
pub fn gen_coupled_epochs(
    spec: &CouplingSpec,
    n_trials: usize,
    n_samples: usize,
    sampling_rate: f64,
) -> Result<EpochSet, SynthError> {
    let window = EpochWindow {
        start_offset_s: 0.0,
        duration_s: n_samples as f64 / sampling_rate,
    };
    let meta = EpochMeta::new(Paradigm::ImaginedSpeech, ClassLabel::Rest, window);
    gen_coupled_epochs_with(spec, n_trials, n_samples, sampling_rate, synthetic_labels(spec.n_channels), meta)
}

/// As [`gen_coupled_epochs`] with explicit labels and provenance.
pub fn gen_coupled_epochs_with(
    spec: &CouplingSpec,
    n_trials: usize,
    n_samples: usize,
    sampling_rate: f64,
    channel_labels: Vec<String>,
    meta: EpochMeta,
) -> Result<EpochSet, SynthError> {
    if n_trials == 0 {
        return Err(SynthError::InvalidParameter("zero trials".into()));
    }
    if channel_labels.len() != spec.n_channels {
        return Err(SynthError::InvalidParameter(format!(
            "{} labels for {} channels",
            channel_labels.len(),
            spec.n_channels
        )));
    }
    // validates once up front; workers below build their own generators
    CoupledGenerator::new(spec, n_samples, sampling_rate)?;
    let mut data = Array3::zeros((n_trials, spec.n_channels, n_samples));
    let shape = (spec.n_channels, n_samples);
    data.as_slice_mut()
        .expect("fresh standard-layout tensor")
        .par_chunks_mut(shape.0 * shape.1)
        .enumerate()
        .for_each_init(
            || CoupledGenerator::new(spec, n_samples, sampling_rate).expect("validated spec"),
            |generator, (trial, chunk)| {
                let out = ArrayViewMut2::from_shape(shape, chunk).expect("trial chunk shape");
                generator.trial_into(trial as u64, out);
            },
        );
    EpochSet::new(data, sampling_rate, channel_labels, meta)
        .map_err(|e| SynthError::InvalidParameter(e.to_string()))
}

/// A run of consecutive trials sharing one event tag and coupling spec.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordingBlock {
    pub tag: EventTag,
    pub spec: CouplingSpec,
    pub n_trials: usize,
}

/// Continuous recording made of back-to-back trials, one stimulus marker
/// (description = event tag) at the first sample of each trial.
pub fn gen_recording(
    blocks: &[RecordingBlock],
    channel_labels: Vec<String>,
    sampling_rate: f64,
    trial_samples: usize,
) -> Result<Recording, SynthError> {
    let n_channels = channel_labels.len();
    if let Some(b) = blocks.iter().find(|b| b.spec.n_channels != n_channels) {
        return Err(SynthError::InvalidParameter(format!(
            "block {} has {} channels, recording has {n_channels}",
            b.tag, b.spec.n_channels
        )));
    }
    let total_trials: usize = blocks.iter().map(|b| b.n_trials).sum();
    if total_trials == 0 {
        return Err(SynthError::InvalidParameter("zero trials".into()));
    }
    let mut data = Array2::zeros((n_channels, total_trials * trial_samples));
    let mut markers = Vec::with_capacity(total_trials);
    let mut trial_buffer = Array2::zeros((n_channels, trial_samples));
    let mut start = 0;
    for block in blocks {
        let mut generator = CoupledGenerator::new(&block.spec, trial_samples, sampling_rate)?;
        let description = block.tag.to_string();
        for trial in 0..block.n_trials {
            generator.trial_into(trial as u64, trial_buffer.view_mut());
            data.slice_mut(ndarray::s![.., start..start + trial_samples])
                .assign(&trial_buffer);
            markers.push(Marker::stimulus(start, description.clone()));
            start += trial_samples;
        }
    }
    Recording::new(channel_labels, sampling_rate, data, markers)
        .map_err(|e| SynthError::InvalidParameter(e.to_string()))
}

/// Concentrations serialize as numbers, with infinity as the string `"inf"`
/// so the value survives JSON.
mod kappa_serde {
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};
    use std::fmt;

    pub fn serialize<S: Serializer>(kappa: &f64, serializer: S) -> Result<S::Ok, S::Error> {
        if kappa.is_infinite() && *kappa > 0.0 {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_f64(*kappa)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<f64, D::Error> {
        struct KappaVisitor;
        impl Visitor<'_> for KappaVisitor {
            type Value = f64;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a non-negative number or \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
                Ok(v)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
                Ok(v as f64)
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
                Ok(v as f64)
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
                match v {
                    "inf" | "infinity" | "+inf" => Ok(f64::INFINITY),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }
        deserializer.deserialize_any(KappaVisitor)
    }
}
