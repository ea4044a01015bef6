use phaselock::stats::{format_fixed, paired_t_test, student_t_two_tailed, summarize};
use proptest::prelude::*;

/// Two-tailed p by Simpson integration of the Student-t density over
/// `[0, |t|]`, normalized with a Stirling-series log-gamma. Shares no code
/// with the incomplete-beta path.
fn quadrature_p(t: f64, df: f64) -> f64 {
    let log_gamma = |x: f64| -> f64 {
        // Stirling series with shift; accurate to ~1e-13 for x >= 0.5.
        let mut shift = 0.0;
        let mut x = x;
        while x < 10.0 {
            shift -= x.ln();
            x += 1.0;
        }
        let inv = 1.0 / x;
        let inv2 = inv * inv;
        shift + (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln()
            + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))
    };
    let c = (log_gamma((df + 1.0) / 2.0) - log_gamma(df / 2.0)).exp() / (df * std::f64::consts::PI).sqrt();
    let density = |x: f64| c * (1.0 + x * x / df).powf(-(df + 1.0) / 2.0);
    let steps = 20_000;
    let h = t.abs() / steps as f64;
    let mut sum = density(0.0) + density(t.abs());
    for i in 1..steps {
        sum += density(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    1.0 - 2.0 * sum * h / 3.0
}

#[test]
fn published_critical_value() {
    assert!((student_t_two_tailed(2.131, 15.0) - 0.05).abs() < 5e-4);
    assert!((student_t_two_tailed(12.706, 1.0) - 0.05).abs() < 5e-4);
    assert!((student_t_two_tailed(2.947, 15.0) - 0.01).abs() < 5e-4);
}

#[test]
fn hand_computed_example() {
    let r = paired_t_test(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap();
    assert!((r.t - -3.4641).abs() < 1e-4);
    assert_eq!(r.df, 2);
}

#[test]
fn ambulance_column_summary() {
    let column = [
        0.27, 0.46, 0.26, 0.30, 0.24, 0.25, 0.31, 0.33, 0.22, 0.24, 0.30, 0.27, 0.23, 0.23, 0.26, 0.31,
    ];
    let s = summarize(&column).unwrap();
    assert_eq!(format_fixed(s.mean, 2), "0.28");
    assert_eq!(format_fixed(s.std.unwrap(), 2), "0.06");
}

fn paired_samples() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (2usize..30).prop_flat_map(|n| {
        (
            prop::collection::vec(0.0..1.0f64, n),
            prop::collection::vec(0.0..1.0f64, n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn p_matches_quadrature(t in -8.0..8.0f64, df in 1usize..40) {
        let p = student_t_two_tailed(t, df as f64);
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!((p - quadrature_p(t, df as f64)).abs() < 1e-8);
    }

    #[test]
    fn p_decreases_with_abs_t(a in 0.0..10.0f64, b in 0.0..10.0f64, df in 1usize..40) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(student_t_two_tailed(hi, df as f64) <= student_t_two_tailed(lo, df as f64));
    }

    #[test]
    fn antisymmetry((a, b) in paired_samples()) {
        let ab = paired_t_test(&a, &b).unwrap();
        let ba = paired_t_test(&b, &a).unwrap();
        prop_assert_eq!(ab.t, -ba.t);
        prop_assert_eq!(ab.p, ba.p);
        prop_assert_eq!(ab.df, a.len() - 1);
    }

    #[test]
    fn location_invariance((a, b) in paired_samples(), c in -1.0..1.0f64) {
        let base = paired_t_test(&a, &b).unwrap();
        let a2: Vec<f64> = a.iter().map(|x| x + c).collect();
        let b2: Vec<f64> = b.iter().map(|x| x + c).collect();
        let moved = paired_t_test(&a2, &b2).unwrap();
        // Adding c rounds each difference by at most one ulp of |x + c|.
        let tol = 1e-12 * base.t.abs().max(1.0);
        prop_assert!((base.t - moved.t).abs() <= tol, "{} vs {}", base.t, moved.t);
        prop_assert!((base.p - moved.p).abs() <= 1e-12);
    }

    #[test]
    fn scale_invariance((a, b) in paired_samples(), k in 0.01..100.0f64) {
        let base = paired_t_test(&a, &b).unwrap();
        let a2: Vec<f64> = a.iter().map(|x| x * k).collect();
        let b2: Vec<f64> = b.iter().map(|x| x * k).collect();
        let scaled = paired_t_test(&a2, &b2).unwrap();
        prop_assert!((base.t - scaled.t).abs() <= 1e-9 * base.t.abs().max(1.0));
        prop_assert!((base.p - scaled.p).abs() <= 1e-9);
    }

    #[test]
    fn t_sign_follows_mean_difference((a, b) in paired_samples()) {
        let r = paired_t_test(&a, &b).unwrap();
        let diff: f64 = a.iter().zip(&b).map(|(x, y)| x - y).sum();
        if r.t != 0.0 {
            prop_assert_eq!(r.t.signum(), diff.signum());
        }
    }
}
