//! Butterworth band-pass design as cascaded biquads, and zero-phase
//! (forward-backward) application.

use std::f64::consts::PI;

use num_complex::Complex64;

/// Order of the low-pass prototype. The band-pass has twice as many poles.
pub const DEFAULT_ORDER: usize = 4;

/// Second-order section, `b0 + b1 z^-1 + b2 z^-2` over `1 + a1 z^-1 + a2 z^-2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    fn response(&self, z_inv: Complex64) -> Complex64 {
        let z2 = z_inv * z_inv;
        let num = self.b[0] + self.b[1] * z_inv + self.b[2] * z2;
        let den = 1.0 + self.a[0] * z_inv + self.a[1] * z2;
        num / den
    }

    fn dc_gain(&self) -> f64 {
        (self.b[0] + self.b[1] + self.b[2]) / (1.0 + self.a[0] + self.a[1])
    }

    /// Transposed direct form II state after an infinitely long input of `x`.
    fn steady_state(&self, x: f64) -> [f64; 2] {
        let y = self.dc_gain() * x;
        let z2 = self.b[2] * x - self.a[1] * y;
        let z1 = self.b[1] * x - self.a[0] * y + z2;
        [z1, z2]
    }

    #[inline]
    fn run(&self, signal: &mut [f64], mut state: [f64; 2]) {
        let [b0, b1, b2] = self.b;
        let [a1, a2] = self.a;
        for v in signal.iter_mut() {
            let x = *v;
            let y = b0 * x + state[0];
            state[0] = b1 * x - a1 * y + state[1];
            state[1] = b2 * x - a2 * y;
            *v = y;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandpassFilter {
    sections: Vec<Biquad>,
    sampling_rate: f64,
}

impl BandpassFilter {
    /// Butterworth band-pass between `low_hz` and `high_hz` via the bilinear
    /// transform with pre-warped edges. Each section is scaled to unit gain
    /// at the geometric centre of the pre-warped band.
    pub fn butterworth(order: usize, low_hz: f64, high_hz: f64, sampling_rate: f64) -> Self {
        assert!(order >= 1);
        assert!(0.0 < low_hz && low_hz < high_hz && high_hz < sampling_rate / 2.0);
        let fs2 = 2.0 * sampling_rate;
        let warp = |hz: f64| fs2 * (PI * hz / sampling_rate).tan();
        let (w_lo, w_hi) = (warp(low_hz), warp(high_hz));
        let bw = w_hi - w_lo;
        let w0_sq = w_lo * w_hi;

        let mut poles = Vec::with_capacity(2 * order);
        for m in 0..order {
            let theta = PI * (2 * m + order + 1) as f64 / (2 * order) as f64;
            let proto = Complex64::from_polar(1.0, theta);
            let pb = proto * bw;
            let disc = (pb * pb - 4.0 * w0_sq).sqrt();
            for s in [(pb + disc) / 2.0, (pb - disc) / 2.0] {
                poles.push((fs2 + s) / (fs2 - s));
            }
        }
        let mut upper: Vec<Complex64> = poles.into_iter().filter(|p| p.im > 0.0).collect();
        upper.sort_by(|x, y| x.arg().total_cmp(&y.arg()));
        debug_assert_eq!(upper.len(), order);

        let centre = 2.0 * (w0_sq.sqrt() / fs2).atan();
        let z_inv = Complex64::from_polar(1.0, -centre);
        let sections = upper
            .into_iter()
            .map(|p| {
                let mut sec = Biquad {
                    b: [1.0, 0.0, -1.0],
                    a: [-2.0 * p.re, p.norm_sqr()],
                };
                let g = 1.0 / sec.response(z_inv).norm();
                sec.b = [g, 0.0, -g];
                sec
            })
            .collect();
        BandpassFilter {
            sections,
            sampling_rate,
        }
    }

    pub fn sections(&self) -> &[Biquad] {
        &self.sections
    }

    /// Single-pass complex response at `hz`.
    pub fn response(&self, hz: f64) -> Complex64 {
        let z_inv = Complex64::from_polar(1.0, -2.0 * PI * hz / self.sampling_rate);
        self.sections
            .iter()
            .map(|s| s.response(z_inv))
            .product()
    }

    /// Magnitude response of forward-backward application: `|H|^2`.
    pub fn zero_phase_gain(&self, hz: f64) -> f64 {
        self.response(hz).norm_sqr()
    }

    /// Odd-extension length used at each edge for `n` samples.
    pub fn pad_len(&self, n: usize) -> usize {
        (3 * (2 * self.sections.len() + 1)).min(n.saturating_sub(1))
    }

    fn run_cascade(&self, signal: &mut [f64]) {
        // each section starts in the steady state for a constant input equal
        // to the first sample, propagated through the cascade's DC gains
        let mut x = signal[0];
        for sec in &self.sections {
            sec.run(signal, sec.steady_state(x));
            x *= sec.dc_gain();
        }
    }

    /// Forward-backward filtering with odd-extension padding and
    /// steady-state initial conditions. `scratch` is reused between calls.
    pub fn filtfilt_into(&self, signal: &mut [f64], scratch: &mut Vec<f64>) {
        let n = signal.len();
        if n == 0 {
            return;
        }
        let pad = self.pad_len(n);
        scratch.clear();
        scratch.reserve(n + 2 * pad);
        let (first, last) = (signal[0], signal[n - 1]);
        scratch.extend((1..=pad).rev().map(|i| 2.0 * first - signal[i]));
        scratch.extend_from_slice(signal);
        scratch.extend((1..=pad).map(|i| 2.0 * last - signal[n - 1 - i]));

        self.run_cascade(scratch);
        scratch.reverse();
        self.run_cascade(scratch);
        scratch.reverse();
        signal.copy_from_slice(&scratch[pad..pad + n]);
    }

    pub fn filtfilt(&self, signal: &[f64]) -> Vec<f64> {
        let mut out = signal.to_vec();
        self.filtfilt_into(&mut out, &mut Vec::new());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    // Analytic magnitude of the Butterworth band-pass after the bilinear map:
    // |H|^2 = 1 / (1 + W^(2N)), W = (w^2 - w0^2) / (w * bw) with pre-warped w.
    fn analytic_single_pass_gain_sq(order: usize, lo: f64, hi: f64, fs: f64, hz: f64) -> f64 {
        let warp = |f: f64| 2.0 * fs * (PI * f / fs).tan();
        let (wl, wh, w) = (warp(lo), warp(hi), warp(hz));
        let big_w = (w * w - wl * wh) / (w * (wh - wl));
        1.0 / (1.0 + big_w.powi(2 * order as i32))
    }

    #[test]
    fn response_matches_analytic_prototype() {
        let f = BandpassFilter::butterworth(4, 8.0, 13.0, 250.0);
        assert_eq!(f.sections().len(), 4);
        for hz in [1.0, 4.0, 8.0, 9.0, 10.0, 11.5, 13.0, 20.0, 50.0, 100.0] {
            let expected = analytic_single_pass_gain_sq(4, 8.0, 13.0, 250.0, hz);
            assert_abs_diff_eq!(f.response(hz).norm_sqr(), expected, epsilon = 1e-9);
        }
    }

    #[test]
    fn band_edges_are_half_power_after_filtfilt() {
        let f = BandpassFilter::butterworth(4, 8.0, 13.0, 250.0);
        assert_abs_diff_eq!(f.zero_phase_gain(8.0), 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(f.zero_phase_gain(13.0), 0.5, epsilon = 1e-9);
        assert!(f.zero_phase_gain(10.0) > 0.999);
        // stopband at 50 Hz is far beyond 40 dB
        assert!(10.0 * f.zero_phase_gain(50.0).log10() < -40.0);
    }

    #[test]
    fn sections_are_stable() {
        for (lo, hi) in [(4.0, 8.0), (8.0, 13.0), (13.0, 30.0), (30.0, 45.0), (1.0, 120.0)] {
            let f = BandpassFilter::butterworth(4, lo, hi, 250.0);
            for s in f.sections() {
                // poles inside the unit circle: |a2| < 1, |a1| < 1 + a2
                assert!(s.a[1].abs() < 1.0);
                assert!(s.a[0].abs() < 1.0 + s.a[1]);
            }
        }
    }

    #[test]
    fn zero_input_gives_zero_output() {
        let f = BandpassFilter::butterworth(4, 8.0, 13.0, 250.0);
        assert!(f.filtfilt(&[0.0; 64]).iter().all(|&v| v == 0.0));
        assert!(f.filtfilt(&[]).is_empty());
        assert_eq!(f.filtfilt(&[3.0]).len(), 1);
    }
}
