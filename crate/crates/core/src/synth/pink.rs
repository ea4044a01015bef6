//! 1/f noise by spectral shaping of Gaussian white noise.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};

/// Reusable generator for pink noise series of a fixed length.
pub struct PinkNoise {
    len: usize,
    ifft: Arc<dyn Fft<f64>>,
    spectrum: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl PinkNoise {
    /// # Panics
    /// If `len < 2`.
    pub fn new(len: usize) -> Self {
        assert!(len >= 2, "pink noise needs at least 2 samples");
        let ifft = FftPlanner::new().plan_fft_inverse(len);
        let scratch = vec![Complex64::default(); ifft.get_inplace_scratch_len()];
        PinkNoise {
            len,
            ifft,
            spectrum: vec![Complex64::default(); len],
            scratch,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Writes a zero-mean series with RMS `sigma` and power ∝ 1/f into `out`.
    ///
    /// The white spectrum is drawn as independent complex Gaussians per
    /// positive-frequency bin, scaled by `1/√k`, and mirrored to keep the
    /// inverse transform real. The DC bin is zero.
    pub fn fill<R: Rng + ?Sized>(&mut self, rng: &mut R, sigma: f64, out: &mut [f64]) {
        assert_eq!(out.len(), self.len, "output length mismatch");
        let n = self.len;
        let half = n / 2;
        self.spectrum.fill(Complex64::default());
        for k in 1..=half {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = if 2 * k == n { 0.0 } else { rng.sample(StandardNormal) };
            let bin = Complex64::new(re, im) / (k as f64).sqrt();
            self.spectrum[k] = bin;
            self.spectrum[n - k] = bin.conj();
        }
        if sigma == 0.0 {
            out.fill(0.0);
            return;
        }
        self.ifft.process_with_scratch(&mut self.spectrum, &mut self.scratch);
        let rms = (self.spectrum.iter().map(|c| c.re * c.re).sum::<f64>() / n as f64).sqrt();
        let gain = if rms > 0.0 { sigma / rms } else { 0.0 };
        for (o, c) in out.iter_mut().zip(&self.spectrum) {
            *o = c.re * gain;
        }
    }
}

/// Pink noise series of `n_samples` values with RMS `sigma`, seeded.
///
/// # Panics
/// If `n_samples < 2` or `sigma` is negative.
pub fn gen_pink_noise(n_samples: usize, sigma: f64, seed: u64) -> Vec<f64> {
    assert!(sigma >= 0.0, "sigma must be non-negative");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![0.0; n_samples];
    PinkNoise::new(n_samples).fill(&mut rng, sigma, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_scaled() {
        let a = gen_pink_noise(500, 3.0, 42);
        assert_eq!(a, gen_pink_noise(500, 3.0, 42));
        assert_ne!(a, gen_pink_noise(500, 3.0, 43));
        let rms = (a.iter().map(|v| v * v).sum::<f64>() / 500.0).sqrt();
        assert!((rms - 3.0).abs() < 1e-12);
        assert!((a.iter().sum::<f64>() / 500.0).abs() < 1e-12);
        assert!(gen_pink_noise(77, 0.0, 1).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn odd_and_tiny_lengths() {
        for n in [2, 3, 5, 101] {
            let v = gen_pink_noise(n, 1.0, 9);
            assert_eq!(v.len(), n);
            assert!(v.iter().all(|x| x.is_finite()));
        }
    }
}
