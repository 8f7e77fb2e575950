//! Dilogarithm on the unit interval and logarithms of the form `ln(1 - e^{-t})`.

use crate::error::{domain, Result};
use std::f64::consts::PI;

/// ζ(2) = π²/6.
pub const ZETA2: f64 = PI * PI / 6.0;

fn li2_series(z: f64) -> f64 {
    let mut sum = 0.0;
    let mut zn = z;
    let mut n = 1.0;
    loop {
        let term = zn / (n * n);
        sum += term;
        if term < 1e-16 * sum.max(1e-300) || term == 0.0 {
            break;
        }
        zn *= z;
        n += 1.0;
    }
    sum
}

/// Dilogarithm `Li₂(z) = −∫₀ᶻ ln(1−t)/t dt` for `z ∈ [0, 1]`.
pub fn li2(z: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&z) {
        return Err(domain(format!("li2 requires 0 <= z <= 1, got {z}")));
    }
    Ok(li2_unchecked(z))
}

pub(crate) fn li2_unchecked(z: f64) -> f64 {
    if z == 0.0 {
        0.0
    } else if z == 1.0 {
        ZETA2
    } else if z <= 0.5 {
        li2_series(z)
    } else {
        let w = 1.0 - z;
        ZETA2 - z.ln() * w.ln() - li2_series(w)
    }
}

/// `ln(1 − e^{−t})` for `t > 0` without cancellation at either end.
pub fn ln_one_minus_exp(t: f64) -> f64 {
    if t < std::f64::consts::LN_2 {
        (-(-t).exp_m1()).ln()
    } else {
        (-(-t).exp()).ln_1p()
    }
}

/// `π²/6 − Li₂(e^{−t})` for `t ≥ 0`, accurate for small and large `t`.
pub fn li2_deficit_exp(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= std::f64::consts::LN_2 {
        ZETA2 - li2_series((-t).exp())
    } else {
        let q = -(-t).exp_m1();
        li2_series(q) - t * q.ln()
    }
}

/// `Li₂(e^{−t₁}) − Li₂(e^{−t₂})`, with relative accuracy kept when both arguments are tiny.
pub fn li2_exp_difference(t1: f64, t2: f64) -> f64 {
    if t1 >= std::f64::consts::LN_2 && t2 >= std::f64::consts::LN_2 {
        li2_series((-t1).exp()) - li2_series((-t2).exp())
    } else {
        li2_deficit_exp(t2) - li2_deficit_exp(t1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints() {
        assert_eq!(li2(0.0).unwrap(), 0.0);
        assert!((li2(1.0).unwrap() - 1.6449340668482264).abs() < 1e-15);
    }

    #[test]
    fn rejects_outside_unit_interval() {
        assert!(li2(-0.1).is_err());
        assert!(li2(1.0001).is_err());
        assert!(li2(f64::NAN).is_err());
    }

    #[test]
    fn ln_one_minus_exp_matches_naive_in_the_middle() {
        for &t in &[0.1, 0.5, 1.0, 3.0] {
            let naive = (1.0 - (-t as f64).exp()).ln();
            assert!((ln_one_minus_exp(t) - naive).abs() < 1e-14);
        }
        assert!((ln_one_minus_exp(50.0) + (-50.0f64).exp()).abs() < 1e-35);
        assert!((ln_one_minus_exp(1e-10) - (1e-10f64).ln()).abs() < 1e-9);
    }

    #[test]
    fn deficit_branches_agree_near_switch() {
        let a = li2_deficit_exp(std::f64::consts::LN_2 * (1.0 - 1e-12));
        let b = li2_deficit_exp(std::f64::consts::LN_2 * (1.0 + 1e-12));
        assert!((a - b).abs() < 1e-11);
    }
}
