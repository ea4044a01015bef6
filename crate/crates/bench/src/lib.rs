//! Fixtures shared by the pipeline benchmarks.

use phaselock::synth::{gen_coupled_epochs, CouplingSpec};
use phaselock::EpochSet;

/// Noisy coupled epochs: pairs (0,1), (2,3), ... coupled at κ = 2.
pub fn coupled_epochs(n_channels: usize, n_trials: usize, n_samples: usize) -> EpochSet {
    let mut spec = CouplingSpec::new(n_channels, 10.0, 7);
    spec.noise_sigma = 2.0;
    for a in (0..n_channels.saturating_sub(1)).step_by(2) {
        spec = spec.couple(a, a + 1, 2.0);
    }
    gen_coupled_epochs(&spec, n_trials, n_samples, 250.0).expect("valid benchmark spec")
}
