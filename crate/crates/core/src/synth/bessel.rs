//! Modified Bessel ratio `I1(κ) / I0(κ)`, the mean resultant length of a
//! von Mises distribution.

const ASYMPTOTIC_FROM: f64 = 100.0;

/// Expected PLV of phase differences drawn von Mises with concentration
/// `kappa`: `I1(κ) / I0(κ)`. `κ = +∞` gives 1.
///
/// # Panics
/// If `kappa` is negative or NaN.
pub fn expected_plv(kappa: f64) -> f64 {
    assert!(kappa >= 0.0, "kappa must be non-negative, got {kappa}");
    if kappa == 0.0 {
        return 0.0;
    }
    if kappa.is_infinite() {
        return 1.0;
    }
    if kappa >= ASYMPTOTIC_FROM {
        let inv = 1.0 / kappa;
        return 1.0
            - inv
                * (0.5
                    + inv * (0.125 + inv * (0.125 + inv * (25.0 / 128.0 + inv * (13.0 / 32.0)))));
    }
    // r_n = I_n / I_{n-1} = 1 / (2n / κ + r_{n+1}), run downward from far
    // above κ where r_n is negligible.
    let top = 60 + 2 * kappa.ceil() as usize;
    let mut r = 0.0;
    for n in (1..=top).rev() {
        r = 1.0 / (2.0 * n as f64 / kappa + r);
    }
    r
}
