//! von Mises sampling (Best & Fisher, 1979).

use std::f64::consts::PI;

use rand::distr::Distribution;
use rand::Rng;

use crate::error::SynthError;

/// Below this concentration draws are uniform on the circle.
const UNIFORM_BELOW: f64 = 1e-6;

/// von Mises distribution on `(-π, π]` with mean `mu` and concentration
/// `kappa`. `kappa = +∞` is the point mass at `mu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VonMises {
    mu: f64,
    kappa: f64,
    r: f64,
}

impl VonMises {
    pub fn new(mu: f64, kappa: f64) -> Result<Self, SynthError> {
        if kappa.is_nan() || kappa < 0.0 {
            return Err(SynthError::InvalidKappa(kappa));
        }
        if !mu.is_finite() {
            return Err(SynthError::InvalidParameter(format!("von Mises mean {mu}")));
        }
        let r = if kappa.is_finite() && kappa >= UNIFORM_BELOW {
            let tau = 1.0 + (1.0 + 4.0 * kappa * kappa).sqrt();
            let rho = (tau - (2.0 * tau).sqrt()) / (2.0 * kappa);
            (1.0 + rho * rho) / (2.0 * rho)
        } else {
            f64::NAN
        };
        Ok(VonMises { mu, kappa, r })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }
}

impl Distribution<f64> for VonMises {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.kappa.is_infinite() {
            return crate::preprocess::wrap_phase(self.mu);
        }
        if self.kappa < UNIFORM_BELOW {
            return crate::preprocess::wrap_phase(self.mu + PI * (2.0 * rng.random::<f64>() - 1.0));
        }
        let (r, kappa) = (self.r, self.kappa);
        let f = loop {
            let u1: f64 = rng.random();
            let u2: f64 = rng.random();
            let z = (PI * u1).cos();
            let f = (1.0 + r * z) / (r + z);
            let c = kappa * (r - f);
            if c * (2.0 - c) - u2 > 0.0 || (c / u2).ln() + 1.0 - c >= 0.0 {
                break f;
            }
        };
        let theta = f.clamp(-1.0, 1.0).acos();
        let signed = if rng.random::<f64>() < 0.5 { -theta } else { theta };
        crate::preprocess::wrap_phase(self.mu + signed)
    }
}
