//! FFT-based analytic signal.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Reusable forward/inverse transforms for one signal length.
pub struct AnalyticSignal {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    len: usize,
}

impl AnalyticSignal {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        AnalyticSignal {
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
            len,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Writes the analytic signal of `signal` into `out` (resized to fit):
    /// negative frequencies zeroed, positive doubled, DC and Nyquist kept.
    pub fn compute(&self, signal: &[f64], out: &mut Vec<Complex64>) {
        assert_eq!(signal.len(), self.len, "signal length differs from plan");
        let n = self.len;
        out.clear();
        out.extend(signal.iter().map(|&v| Complex64::new(v, 0.0)));
        if n == 0 {
            return;
        }
        self.forward.process(out);
        let half = n / 2;
        for (k, bin) in out.iter_mut().enumerate().skip(1) {
            if n.is_multiple_of(2) && k == half {
                continue;
            }
            if k <= (n - 1) / 2 {
                *bin *= 2.0;
            } else {
                *bin = Complex64::new(0.0, 0.0);
            }
        }
        self.inverse.process(out);
        let scale = 1.0 / n as f64;
        for v in out.iter_mut() {
            *v *= scale;
        }
    }

    /// Instantaneous phase in (-pi, pi].
    pub fn phase_into(&self, signal: &[f64], buf: &mut Vec<Complex64>, phase: &mut [f64]) {
        self.compute(signal, buf);
        for (p, z) in phase.iter_mut().zip(buf.iter()) {
            *p = wrap_phase(z.im.atan2(z.re));
        }
    }
}

/// Maps an angle into (-pi, pi].
pub fn wrap_phase(theta: f64) -> f64 {
    let mut t = theta;
    if !(-PI < t && t <= PI) {
        t = (t + PI).rem_euclid(2.0 * PI) - PI;
        if t <= -PI {
            t += 2.0 * PI;
        }
    }
    t
}

/// One-shot analytic signal.
pub fn analytic_signal(signal: &[f64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(signal.len());
    AnalyticSignal::new(signal.len()).compute(signal, &mut out);
    out
}
