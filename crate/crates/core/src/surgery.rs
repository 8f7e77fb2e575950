//! Potential surgery: range cutoff and integral capping, each with a certified
//! inequality between the old and new scattering lengths.

use crate::error::{domain, precondition, Error, Result};
use crate::quadrature::bisect;
use crate::scattering::{log_moment, scattering_length, RadialPotential};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Relative slack allowed when comparing the two sides of a certified bound.
pub const CERTIFY_RTOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstructionCase {
    RangeCutoff,
    CapCase1Tail,
    CapCase2Shave,
}

/// Choice of the shaving width `δ` for the capping construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum DeltaChoice {
    Value(f64),
    /// `δ = √(ln(R/a)/φ)`.
    PaperPreset,
}

impl Default for DeltaChoice {
    fn default() -> Self {
        DeltaChoice::Value(0.5)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurgeryParameters {
    pub phi: Option<f64>,
    pub delta: Option<f64>,
    /// Cut radius `s` (case 1), core radius `t` (case 2) or the new range (cutoff).
    pub s_or_t: f64,
    pub tau: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurgeryReport {
    pub original_a: f64,
    pub modified_a: f64,
    pub bound_lhs: f64,
    pub bound_rhs: f64,
    pub construction_case: ConstructionCase,
    pub parameters: SurgeryParameters,
    /// `∫_{ℝ²} ṽ` of the modified potential.
    pub modified_integral: f64,
    /// `4πφ` for the capping construction.
    pub integral_budget: Option<f64>,
    /// `(φ_ṽ(s), 1/√(φ ln(R/a)))` in the tail case.
    pub profile_check: Option<(f64, f64)>,
    pub certified: bool,
    pub notes: Vec<String>,
}

fn geq(lhs: f64, rhs: f64) -> bool {
    lhs >= rhs - CERTIFY_RTOL * rhs.abs().max(lhs.abs())
}

/// Cut `v` off at `r0_new` and certify
/// `1/ln(R/a_{R₀}) ≥ (ln(R/a) + (1/4π)∫_{|x|>R₀} v ln²(|x|/a_{R₀}))⁻¹`.
pub fn cutoff_range(v: &RadialPotential, r0_new: f64, r: f64) -> Result<(RadialPotential, SurgeryReport)> {
    if !(r0_new > 0.0) {
        return Err(domain(format!("cutoff radius must be positive, got {r0_new}")));
    }
    if !(r > v.range()) {
        return Err(precondition(format!("R = {r} must exceed the range {}", v.range())));
    }
    let cut = v.truncate(r0_new)?;
    if cut.is_zero() {
        return Err(Error::Degenerate("the cut potential vanishes identically".into()));
    }
    let orig = scattering_length(v, r)?;
    let new = scattering_length(&cut, r)?;
    let tail = log_moment(v, new.a, r0_new)?;
    let lhs = 1.0 / (r / new.a).ln();
    let rhs = 1.0 / ((r / orig.a).ln() + tail / (4.0 * PI));
    let mut notes = Vec::new();
    if r0_new >= v.range() {
        notes.push("cut radius beyond the support: potential unchanged".into());
    }
    let report = SurgeryReport {
        original_a: orig.a,
        modified_a: new.a,
        bound_lhs: lhs,
        bound_rhs: rhs,
        construction_case: ConstructionCase::RangeCutoff,
        parameters: SurgeryParameters { phi: None, delta: None, s_or_t: r0_new.min(v.range()), tau: None },
        modified_integral: cut.integral_2d(),
        integral_budget: None,
        profile_check: None,
        certified: geq(lhs, rhs) && new.a <= orig.a * (1.0 + CERTIFY_RTOL),
        notes,
    };
    Ok((cut, report))
}

/// Replace `v` by `0 ≤ ṽ ≤ v` with `∫ṽ ≤ 4πφ` and certify
/// `1/ln(R/ã) ≥ (1/ln(R/a))(1 − 1/√(φ ln(R/a)) + ln(1−δ)/ln(R/a))`.
pub fn cap_integral(v: &RadialPotential, phi: f64, delta: DeltaChoice, r: f64) -> Result<(RadialPotential, SurgeryReport)> {
    if !(phi > 0.0) || !phi.is_finite() {
        return Err(domain(format!("phi must be positive, got {phi}")));
    }
    if !(r > v.range()) {
        return Err(precondition(format!("R = {r} must exceed the range {}", v.range())));
    }
    let orig = scattering_length(v, r)?;
    if orig.degenerate {
        return Err(Error::Degenerate("zero potential has a = 0".into()));
    }
    let ln_ra = (r / orig.a).ln();
    let delta = match delta {
        DeltaChoice::Value(d) => d,
        DeltaChoice::PaperPreset => (ln_ra / phi).sqrt(),
    };
    if !(delta > 0.0 && delta < 1.0) {
        return Err(domain(format!("delta must lie in (0, 1), got {delta}")));
    }
    let r0 = v.range();
    let t = v.core_radius();
    let tail = v.moment1(t, r0);
    let mut notes = vec!["case split evaluated on the piecewise-linear interpolant".to_string()];
    let (modified, case, s_or_t, tau) = if tail >= 2.0 * phi {
        let s = if tail == 2.0 * phi {
            t
        } else {
            bisect(|s| v.moment1(s, r0) - 2.0 * phi, t, r0, 1e-12)?
        };
        let m = if s <= 0.0 { v.clone() } else { v.remove_inner(s)? };
        (m, ConstructionCase::CapCase1Tail, s, None)
    } else if t == 0.0 {
        notes.push("integrable potential within budget: unchanged".into());
        (v.clone(), ConstructionCase::CapCase2Shave, 0.0, None)
    } else {
        let target = 2.0 * phi - tail;
        let lo_r = (1.0 - delta) * t;
        let shave = |tau: f64| v.capped_on(lo_r, t, tau).map(|p| p.moment1(lo_r, t)).unwrap_or(f64::NAN);
        let mut hi = 1.0;
        let mut guard = 0;
        while shave(hi) < target {
            hi *= 2.0;
            guard += 1;
            if guard > 2000 || !hi.is_finite() {
                return Err(Error::Solver("cannot bracket the shaving level".into()));
            }
        }
        let tau = bisect(|x| shave(x) - target, 0.0, hi, 1e-12)?;
        let m = v.capped_on(lo_r, t, tau)?.zero_below(lo_r)?;
        (m, ConstructionCase::CapCase2Shave, t, Some(tau))
    };
    let new = scattering_length(&modified, r)?;
    let lhs = if new.degenerate { 0.0 } else { 1.0 / (r / new.a).ln() };
    let rhs = (1.0 - 1.0 / (phi * ln_ra).sqrt() + (1.0 - delta).ln() / ln_ra) / ln_ra;
    let integral = modified.integral_2d();
    let budget = 4.0 * PI * phi;
    let profile_check = if case == ConstructionCase::CapCase1Tail && s_or_t > 0.0 && !new.degenerate {
        Some((new.profile_at(s_or_t), 1.0 / (phi * ln_ra).sqrt()))
    } else {
        None
    };
    let profile_ok = profile_check.map(|(a, b)| a <= b * (1.0 + 1e-8)).unwrap_or(true);
    let certified = geq(lhs, rhs) && integral <= budget * (1.0 + 1e-10) && profile_ok;
    let report = SurgeryReport {
        original_a: orig.a,
        modified_a: new.a,
        bound_lhs: lhs,
        bound_rhs: rhs,
        construction_case: case,
        parameters: SurgeryParameters { phi: Some(phi), delta: Some(delta), s_or_t, tau },
        modified_integral: integral,
        integral_budget: Some(budget),
        profile_check,
        certified,
        notes,
    };
    Ok((modified, report))
}
