use bose2d::special_fns::{li2, li2_deficit_exp, li2_exp_difference, ZETA2};
use proptest::prelude::*;
use std::f64::consts::PI;

/// Li₂ through the Bernoulli expansion in `u = −ln(1−z)`, with the Bernoulli
/// numbers written via ζ(2k). Independent of the production series.
fn li2_bernoulli(z: f64) -> f64 {
    let u = -(1.0 - z).ln();
    let mut sum = u - u * u / 4.0;
    let mut upow = 1.0;
    for k in 1..60 {
        let kk = 2 * k;
        let zeta = match k {
            1 => PI.powi(2) / 6.0,
            2 => PI.powi(4) / 90.0,
            3 => PI.powi(6) / 945.0,
            4 => PI.powi(8) / 9450.0,
            _ => (1..2000).map(|n| (n as f64).powi(-(kk as i32))).sum(),
        };
        upow *= u * u / (2.0 * PI * 2.0 * PI);
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let term = sign * 2.0 * zeta * upow * u / (kk as f64 + 1.0);
        sum += term;
        if term.abs() < 1e-18 {
            break;
        }
    }
    sum
}

#[test]
fn li2_half_matches_direct_series() {
    let direct: f64 = (1..200).map(|n| 0.5f64.powi(n) / (n * n) as f64).sum();
    assert!((li2(0.5).unwrap() - direct).abs() < 1e-14);
    let closed = PI * PI / 12.0 - 0.5 * std::f64::consts::LN_2.powi(2);
    assert!((li2(0.5).unwrap() - closed).abs() < 1e-14);
}

#[test]
fn li2_matches_bernoulli_oracle() {
    for i in 1..=95 {
        let z = i as f64 / 100.0;
        let want = li2_bernoulli(z);
        assert!((li2(z).unwrap() - want).abs() < 1e-13, "z = {z}: {} vs {want}", li2(z).unwrap());
    }
}

#[test]
fn reflection_identity_on_grid() {
    for i in 1..=100 {
        let z = i as f64 / 101.0;
        let lhs = li2(z).unwrap() + li2(1.0 - z).unwrap();
        let rhs = ZETA2 - z.ln() * (1.0 - z).ln();
        assert!((lhs - rhs).abs() < 1e-12);
    }
}

#[test]
fn deficit_and_difference_agree_with_plain_li2() {
    for &t in &[0.01, 0.3, 0.69, 0.7, 2.0, 10.0] {
        let want = ZETA2 - li2((-t as f64).exp()).unwrap();
        assert!((li2_deficit_exp(t) - want).abs() < 1e-14);
    }
    let d = li2_exp_difference(300.0, 301.0);
    let want = (-300.0f64).exp() - (-301.0f64).exp();
    assert!((d / want - 1.0).abs() < 1e-12);
}

proptest! {
    #[test]
    fn li2_monotone_and_above_identity(a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(li2(lo).unwrap() <= li2(hi).unwrap());
        prop_assert!(li2(lo).unwrap() >= lo);
    }

    #[test]
    fn li2_reflection(z in 0.001f64..0.999) {
        let lhs = li2(z).unwrap() + li2(1.0 - z).unwrap();
        prop_assert!((lhs - (ZETA2 - z.ln() * (1.0 - z).ln())).abs() < 1e-12);
    }
}
