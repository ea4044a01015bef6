use std::f64::consts::PI;

use ndarray::Array3;
use phaselock::preprocess::wrap_phase;
use phaselock::{plv_matrix, plv_pair, plv_timeseries, PhaseEpochs};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Per-element reference: explicit complex sum for each sample, then the
/// plain mean over the interior.
fn naive_plv(phase: &Array3<f64>, i: usize, k: usize, edge: usize) -> f64 {
    let (n, _, t_len) = phase.dim();
    let mut total = 0.0;
    for t in edge..t_len - edge {
        let mut sum = num_complex::Complex64::new(0.0, 0.0);
        for trial in 0..n {
            sum += num_complex::Complex64::from_polar(1.0, phase[[trial, i, t]] - phase[[trial, k, t]]);
        }
        total += sum.norm() / n as f64;
    }
    total / (t_len - 2 * edge) as f64
}

fn random_phases(rng: &mut ChaCha8Rng, n: usize, c: usize, t: usize) -> Array3<f64> {
    Array3::from_shape_fn((n, c, t), |_| wrap_phase(rng.random_range(-PI..PI)))
}

fn tensor_strategy() -> impl Strategy<Value = (Array3<f64>, usize)> {
    (2usize..=5, 1usize..=4, 3usize..=16, any::<u64>()).prop_map(|(n, c, t, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let edge = rng.random_range(0..=(t - 1) / 2);
        (random_phases(&mut rng, n, c, t), edge)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn matrix_matches_naive_reference((phase, edge) in tensor_strategy()) {
        let c = phase.dim().1;
        let phases = PhaseEpochs::from_tensor(phase.clone()).unwrap();
        let m = plv_matrix(&phases, edge).unwrap();
        for i in 0..c {
            for k in 0..c {
                let expected = if i == k { 1.0 } else { naive_plv(&phase, i, k, edge) };
                prop_assert!((m.get(i, k) - expected).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn bounds_self_and_symmetry((phase, edge) in tensor_strategy()) {
        let c = phase.dim().1;
        let phases = PhaseEpochs::from_tensor(phase).unwrap();
        for i in 0..c {
            prop_assert_eq!(plv_pair(&phases, i, i, edge).unwrap(), 1.0);
            for k in 0..c {
                let v = plv_pair(&phases, i, k, edge).unwrap();
                prop_assert!((0.0..=1.0).contains(&v));
                prop_assert_eq!(v.to_bits(), plv_pair(&phases, k, i, edge).unwrap().to_bits());
            }
        }
        let m = plv_matrix(&phases, edge).unwrap();
        prop_assert!(m.values().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn global_rotation_invariance((phase, edge) in tensor_strategy(), offset in -PI..PI, channel in 0usize..4) {
        let c = phase.dim().1;
        let channel = channel % c;
        let mut rotated = phase.clone();
        rotated
            .index_axis_mut(ndarray::Axis(1), channel)
            .mapv_inplace(|p| wrap_phase(p + offset));
        let before = PhaseEpochs::from_tensor(phase).unwrap();
        let after = PhaseEpochs::from_tensor(rotated).unwrap();
        for k in 0..c {
            let a = plv_pair(&before, channel, k, edge).unwrap();
            let b = plv_pair(&after, channel, k, edge).unwrap();
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn trial_permutation_invariance((phase, _edge) in tensor_strategy(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let (n, c, _) = phase.dim();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let shuffled = phase.select(ndarray::Axis(0), &order);
        let before = PhaseEpochs::from_tensor(phase).unwrap();
        let after = PhaseEpochs::from_tensor(shuffled).unwrap();
        for i in 0..c {
            for k in 0..c {
                let a = plv_timeseries(&before, i, k).unwrap();
                let b = plv_timeseries(&after, i, k).unwrap();
                for (x, y) in a.iter().zip(&b) {
                    prop_assert!((x - y).abs() <= 1e-12);
                }
            }
        }
    }
}

fn two_channel(diffs: &[f64]) -> PhaseEpochs {
    let n = diffs.len();
    let phase = Array3::from_shape_fn((n, 2, 1), |(trial, ch, _)| if ch == 0 { wrap_phase(diffs[trial]) } else { 0.0 });
    PhaseEpochs::from_tensor(phase).unwrap()
}

#[test]
fn hand_examples() {
    let opposing = two_channel(&[0.0, PI]);
    assert!(plv_timeseries(&opposing, 0, 1).unwrap()[0] < 1e-15);

    let quadrants = two_channel(&[0.0, PI / 2.0, PI, 3.0 * PI / 2.0]);
    assert!(plv_timeseries(&quadrants, 0, 1).unwrap()[0] < 1e-15);

    let half = two_channel(&[0.0, 0.0, PI / 2.0, PI / 2.0]);
    let v = plv_timeseries(&half, 0, 1).unwrap()[0];
    assert!((v - 2f64.sqrt() / 2.0).abs() < 1e-15);
}

#[test]
fn identical_channels_lock_perfectly() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let base = random_phases(&mut rng, 6, 1, 40);
    let phase = Array3::from_shape_fn((6, 2, 40), |(n, _, t)| base[[n, 0, t]]);
    let phases = PhaseEpochs::from_tensor(phase).unwrap();
    assert!(plv_timeseries(&phases, 0, 1).unwrap().iter().all(|&v| (v - 1.0).abs() < 1e-15));
    assert_eq!(plv_matrix(&phases, 0).unwrap().values(), &[1.0, 1.0, 1.0, 1.0]);
}

#[test]
fn uniform_phases_give_rayleigh_mean() {
    // Expected resultant length of N random unit vectors, large-N limit.
    let n = 120;
    let expected = (PI / (4.0 * n as f64)).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let phases = PhaseEpochs::from_tensor(random_phases(&mut rng, n, 2, 10_000)).unwrap();
    let v = plv_pair(&phases, 0, 1, 0).unwrap();
    assert!((v - expected).abs() < 0.01, "{v} vs {expected}");
}

#[test]
fn invalid_inputs_are_errors() {
    let phases = PhaseEpochs::from_tensor(Array3::zeros((1, 2, 10))).unwrap();
    assert!(plv_timeseries(&phases, 0, 1).is_err());
    let phases = PhaseEpochs::from_tensor(Array3::zeros((3, 2, 10))).unwrap();
    assert!(plv_pair(&phases, 0, 2, 0).is_err());
    assert!(plv_pair(&phases, 0, 1, 5).is_err());
    assert!(PhaseEpochs::from_tensor(Array3::from_elem((2, 1, 3), -PI)).is_err());
}
