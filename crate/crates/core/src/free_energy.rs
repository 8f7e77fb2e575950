//! Critical data, the two-term lower bound, the variational principle and the error budget.
//!
//! Budget quantities are dimensionless: lengths in units of `ρ^{−1/2}`, and every
//! error term is divided by the interaction scale `|Λ|ρ²/σ`.

use crate::error::{domain, precondition, Result};
use crate::ideal_gas::{beta_mu0, f0, f0_difference, ThermoPoint};
use crate::quadrature::golden_min;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalData {
    pub beta_c: f64,
    pub rho_s: f64,
    /// `βp̃_c²`.
    pub tilde_pc_sq_beta: f64,
    pub sigma: f64,
}

fn sigma_of(p: &ThermoPoint) -> Result<f64> {
    let sigma = p
        .sigma()
        .ok_or_else(|| precondition("the state needs a scattering length (sigma)"))?;
    if !(sigma > 1.0) {
        return Err(domain(format!("need a^2 rho < 1/e (sigma > 1), got sigma = {sigma}")));
    }
    Ok(sigma)
}

/// `βp̃_c² = (1/σ − e^{−4πx})₊/(1 − e^{−4πx})`, the overflow-free form of the explicit display.
pub fn tilde_pc_sq_beta(sigma: f64, x: f64) -> f64 {
    let e = (-4.0 * PI * x).exp();
    ((1.0 / sigma - e) / (1.0 - e)).max(0.0)
}

/// `β_c = ln σ/(4πρ)`, `ρ_s = ρ[1 − β_c/β]₊` and `βp̃_c²`.
pub fn critical_data(p: &ThermoPoint) -> Result<CriticalData> {
    let sigma = sigma_of(p)?;
    let beta_c = sigma.ln() / (4.0 * PI * p.rho);
    Ok(CriticalData {
        beta_c,
        rho_s: p.rho * (1.0 - beta_c / p.beta).max(0.0),
        tilde_pc_sq_beta: tilde_pc_sq_beta(sigma, p.beta_rho()),
        sigma,
    })
}

/// `2 − [1 − β_c/β]₊²`, between 1 and 2.
pub fn correction_factor(p: &ThermoPoint) -> Result<f64> {
    let c = critical_data(p)?;
    let t = (1.0 - c.beta_c / p.beta).max(0.0);
    Ok(2.0 - t * t)
}

/// `(4πρ²/σ)(2 − [1 − β_c/β]₊²)`.
pub fn correction_term(p: &ThermoPoint) -> Result<f64> {
    let sigma = sigma_of(p)?;
    Ok(4.0 * PI * p.rho * p.rho / sigma * correction_factor(p)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Subcritical,
    Nearcritical,
    Supercritical,
    Groundstate,
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Regime::Subcritical => "subcritical",
            Regime::Nearcritical => "nearcritical",
            Regime::Supercritical => "supercritical",
            Regime::Groundstate => "groundstate",
        }
    }
}

/// Regime switch points in `βρ`, in increasing order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// `ln(σ/(ln σ)³⁰)/(4π)`.
    pub sub_near: f64,
    /// `σ^{1/59}`.
    pub near_super: f64,
    /// `σ^{233/580}`.
    pub super_ground: f64,
}

pub fn thresholds(sigma: f64) -> Thresholds {
    let l = sigma.ln();
    Thresholds {
        sub_near: (l - 30.0 * l.ln()) / (4.0 * PI),
        near_super: (l / 59.0).exp(),
        super_ground: (233.0 * l / 580.0).exp(),
    }
}

/// Regime of `(σ, βρ)`; a point on a threshold belongs to the lower regime.
pub fn regime(sigma: f64, x: f64) -> Regime {
    let t = thresholds(sigma);
    if x <= t.sub_near {
        Regime::Subcritical
    } else if x <= t.near_super {
        Regime::Nearcritical
    } else if x <= t.super_ground {
        Regime::Supercritical
    } else {
        Regime::Groundstate
    }
}

/// Prefactors of the unspecified constants; all default to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BudgetConstants {
    /// Multiplies the total-error row.
    pub rate: f64,
    /// Multiplies `Z⁽¹⁾ … Z⁽⁵⁾`.
    pub z: [f64; 5],
    /// `δ` in `κ' = (1+δ)s²β⁻¹ ln σ`.
    pub delta: f64,
    /// Override for `φ` (default `√(βρ)/σ`).
    pub phi: Option<f64>,
    /// Override for `C` (default `√σ`).
    pub c: Option<f64>,
}

impl Default for BudgetConstants {
    fn default() -> Self {
        BudgetConstants { rate: 1.0, z: [1.0; 5], delta: 1.0, phi: None, c: None }
    }
}

/// Parameter choices of the regime, in units `ρ = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BudgetParams {
    pub r: f64,
    pub s: f64,
    pub kappa: f64,
    pub b: f64,
    pub phi: f64,
    pub c: f64,
    pub epsilon: f64,
    pub tau: f64,
    pub tilde_tau: f64,
    pub d: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    pub sigma: f64,
    pub beta_rho: f64,
    pub regime: Regime,
    /// `βp_c²`.
    pub pc_sq_beta: f64,
    pub params: BudgetParams,
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    /// Active row of the total-error table (leading order, may be negative at small σ).
    pub row: f64,
    /// Named contributions to `Z⁽¹⁾ … Z⁽⁵⁾`.
    pub z_terms: BTreeMap<String, f64>,
    pub o1_bound: f64,
    pub vacuous: bool,
}

/// `ln(x³⁰/(στ̃))`, the logarithm appearing in the nearcritical choice.
fn near_log(sigma: f64, x: f64, tilde_tau: f64) -> f64 {
    30.0 * x.ln() - sigma.ln() - tilde_tau.ln()
}

/// The active row of the total-error table.
pub fn total_error_row(regime: Regime, sigma: f64, x: f64) -> f64 {
    let l = sigma.ln();
    match regime {
        Regime::Subcritical => (l / x).powf(2.0 / 7.0) * (x * x / (-sigma * beta_mu0(x))).powf(1.0 / 28.0),
        Regime::Nearcritical => {
            let tt = tilde_pc_sq_beta(sigma, x) - beta_mu0(x);
            let big = near_log(sigma, x, tt);
            let lg = big.abs().max(f64::MIN_POSITIVE).ln();
            let pc = nearcritical_pc(x, l, lg);
            (big - 28.0 * lg) / x + pc * pc * sigma / (x * x)
        }
        Regime::Supercritical => (58.0 / 57.0 * x.ln() + 28.0 / 57.0 * l) / x + (x * x / sigma).powf(1.0 / 57.0),
        Regime::Groundstate => sigma.powf(0.8) / (x * x) + sigma.powf(-0.2) + sigma.powf(0.1) * l.sqrt() / x.sqrt(),
    }
}

/// `βp_c² = x³⁰/(σ|L|²⁸)` with `ln|L| = lg`, capped at the thermal scale `βp_c² ≤ 1`.
fn nearcritical_pc(x: f64, ln_sigma: f64, lg: f64) -> f64 {
    (30.0 * x.ln() - ln_sigma - 28.0 * lg).exp().min(1.0)
}

/// Select the regime, fix `p_c` and the remaining parameters, and evaluate all error terms.
pub fn error_budget(sigma: f64, x: f64, k: &BudgetConstants) -> Result<ErrorBudget> {
    if !(sigma > std::f64::consts::E) || !sigma.is_finite() {
        return Err(domain(format!("error budget needs sigma > e, got {sigma}")));
    }
    if !(x >= 1.0) || !x.is_finite() {
        return Err(domain(format!("error budget needs beta rho >= 1, got {x}")));
    }
    let l = sigma.ln();
    let reg = regime(sigma, x);
    let minus_bmu = -beta_mu0(x);
    let tpc = tilde_pc_sq_beta(sigma, x);
    let tilde_tau = tpc + minus_bmu;
    let pc = match reg {
        Regime::Subcritical => 0.0,
        Regime::Nearcritical => {
            let big = near_log(sigma, x, tilde_tau);
            nearcritical_pc(x, l, big.abs().max(f64::MIN_POSITIVE).ln())
        }
        Regime::Supercritical | Regime::Groundstate => (x * x / sigma).powf(29.0 / 57.0).min(1.0),
    }
    .max(tpc);
    let tau = pc + minus_bmu;
    let d = 1.0 + (l / x).cbrt();
    let a1 = if pc > 0.0 { (tau / tilde_tau).ln() / x } else { 0.0 };
    let a2 = pc * pc * sigma / (x * x);
    let a3 = d.powf(6.0 / 7.0) * (x * x / (tau * sigma)).powf(1.0 / 28.0);

    let phi = k.phi.unwrap_or(x.sqrt() / sigma);
    let c = k.c.unwrap_or(sigma.sqrt());
    let params = if reg == Regime::Groundstate {
        let r = sigma.powf(-0.1);
        let s = (x / (2.0 * k.delta * sigma.powf(0.2) * l)).sqrt();
        BudgetParams { r, s, kappa: sigma.powf(-0.2), b: (sigma / tau).powf(0.25), phi, c, epsilon: 1.0 / s, tau, tilde_tau, d }
    } else {
        let r2_third = x.powf(1.0 / 14.0) / (d.powf(1.0 / 7.0) * (tau * sigma).powf(1.0 / 28.0));
        let r = r2_third.powf(1.5);
        let s = (x * r / l).cbrt();
        let kappa = (1.0 + k.delta) * s * s / x * l;
        BudgetParams { r, s, kappa, b: (sigma / tau).powf(0.25), phi, c, epsilon: r / s, tau, tilde_tau, d }
    };

    let mut z = BTreeMap::new();
    let p = params;
    let pc_over = pc / (x * tau);
    let ins = |z: &mut BTreeMap<String, f64>, name: &str, i: usize, v: f64| {
        z.insert(name.to_string(), k.z[i] * v);
    };
    ins(&mut z, "z1_kinetic", 0, pc * tau * sigma / (4.0 * PI * x * x));
    ins(&mut z, "z1_phi", 0, 2.0 * p.phi * sigma * pc / x);
    ins(&mut z, "z1_c", 0, 2.0 * p.c / PI * pc * pc / (x * x) * (1.0 + p.phi * sigma / p.c).powi(2));
    ins(&mut z, "z2", 1, sigma * p.phi * (4.0 * PI * pc_over * pc_over + 8.0 * PI * pc_over * (1.0 + 2.0 / p.c.sqrt())));
    ins(&mut z, "z3", 2, 1.0 / ((sigma * tau).sqrt() * p.r * p.r));
    ins(&mut z, "z4_kappa", 3, p.kappa);
    ins(&mut z, "z4_r_over_s", 3, p.r / p.s);
    ins(&mut z, "z4_cutoff", 3, x.sqrt() / p.r.powi(4) / (tau * sigma).powf(0.25));
    ins(&mut z, "z4_r2rho", 3, (p.r * p.r).cbrt());
    ins(&mut z, "z4_pc_r", 3, (pc / x).sqrt() * p.r);
    ins(&mut z, "z4_phi", 3, 1.0 / (p.phi * sigma).sqrt());
    ins(&mut z, "z5_c", 4, 1.0 / p.c);
    ins(&mut z, "z5_log", 4, a1);
    ins(&mut z, "z5_log_sq", 4, a1 * a1);

    let row = total_error_row(reg, sigma, x);
    let o1_bound = k.rate
        * match reg {
            Regime::Groundstate => row,
            _ => row.max(a1 + a2 + a3),
        };
    Ok(ErrorBudget {
        sigma,
        beta_rho: x,
        regime: reg,
        pc_sq_beta: pc,
        params,
        a1,
        a2,
        a3,
        row,
        z_terms: z,
        o1_bound,
        vacuous: o1_bound >= 1.0,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBound {
    pub f0: f64,
    pub correction: f64,
    pub f_lower: f64,
    /// `f_lower − f₀`, kept separately since it is far below the resolution of `f₀` for large σ.
    pub excess: f64,
    pub budget: ErrorBudget,
}

/// `f₀ + correction·(1 − o1_bound)`.
pub fn lower_bound(p: &ThermoPoint, k: &BudgetConstants) -> Result<LowerBound> {
    let sigma = sigma_of(p)?;
    if p.beta_rho() < 1.0 {
        return Err(precondition(format!("the bound needs beta rho >= 1, got {}", p.beta_rho())));
    }
    let budget = error_budget(sigma, p.beta_rho(), k)?;
    let f = f0(p);
    let corr = correction_term(p)?;
    let excess = corr * (1.0 - budget.o1_bound);
    Ok(LowerBound { f0: f, correction: corr, f_lower: f + excess, excess, budget })
}

/// `σ/ρ² · [f₀(β, ρ(1−y)) − f₀(β, ρ)] + 4π(2 − y²)`, the variational functional in units of `ρ²/σ`.
pub fn variational_objective(sigma: f64, x: f64, y: f64) -> f64 {
    sigma * f0_difference(x, 1.0 - y, 1.0) + 4.0 * PI * (2.0 - y * y)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationalMin {
    pub rho0_star: f64,
    /// `inf_{ρ₀} f₀(β, ρ−ρ₀) + (4π/σ)(2ρ² − ρ₀²)`.
    pub value: f64,
}

/// Minimise over `0 ≤ ρ₀ ≤ ρ` on a 10⁴-point grid, then refine by golden section.
pub fn variational_min(p: &ThermoPoint) -> Result<VariationalMin> {
    let sigma = sigma_of(p)?;
    let x = p.beta_rho();
    let g = |y: f64| variational_objective(sigma, x, y);
    let n = 10_000;
    let (mut best, mut best_val) = (0usize, f64::INFINITY);
    for i in 0..=n {
        let v = g(i as f64 / n as f64);
        if v < best_val {
            best = i;
            best_val = v;
        }
    }
    let lo = best.saturating_sub(1) as f64 / n as f64;
    let hi = (best + 1).min(n) as f64 / n as f64;
    let (mut y, mut val) = golden_min(g, lo, hi, 1e-14);
    for end in [lo, hi] {
        if g(end) < val {
            y = end;
            val = g(end);
        }
    }
    let scale = p.rho * p.rho / sigma;
    Ok(VariationalMin { rho0_star: y * p.rho, value: f0(p) + val * scale })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds_are_ordered_for_large_sigma() {
        let t = thresholds(1e300);
        assert!(t.sub_near < t.near_super && t.near_super < t.super_ground);
    }

    #[test]
    fn tie_goes_to_lower_regime() {
        let s = 200f64.exp();
        let t = thresholds(s);
        assert_eq!(regime(s, t.sub_near), Regime::Subcritical);
        assert_eq!(regime(s, t.near_super), Regime::Nearcritical);
        assert_eq!(regime(s, t.super_ground), Regime::Supercritical);
    }
}
