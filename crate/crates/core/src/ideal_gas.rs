//! Free energy, chemical potential and density of the ideal Bose gas in two dimensions.
//!
//! All quantities are closed forms in `x = βρ`; the chemical potential is
//! `βμ₀ = ln(1 − e^{−4πx})` and the free energy per unit area is
//! `f₀ = −(π²/6 − Li₂(e^{−4πβρ}))/(4πβ²)`.

use crate::error::{domain, Result};
use crate::special_fns::{li2_deficit_exp, li2_exp_difference, ln_one_minus_exp};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// A thermodynamic state `(β, ρ)` with an optional gas parameter.
///
/// The gas parameter is stored as `ln(a²ρ)` so that states with
/// `σ = |ln a²ρ|` far beyond the floating-point range of `a` stay representable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThermoPoint {
    pub beta: f64,
    pub rho: f64,
    ln_a2rho: Option<f64>,
}

impl ThermoPoint {
    /// Ideal-gas state without a scattering length.
    pub fn new(beta: f64, rho: f64) -> Result<Self> {
        check_positive(beta, rho)?;
        Ok(ThermoPoint { beta, rho, ln_a2rho: None })
    }

    /// State with scattering length `a`; requires `a²ρ < 1`.
    pub fn with_a(beta: f64, rho: f64, a: f64) -> Result<Self> {
        check_positive(beta, rho)?;
        if !(a > 0.0) || !(a * a * rho < 1.0) {
            return Err(domain(format!("need a > 0 and a^2 rho < 1, got a = {a}, rho = {rho}")));
        }
        Ok(ThermoPoint { beta, rho, ln_a2rho: Some((a * a * rho).ln()) })
    }

    /// State specified through `σ = |ln a²ρ| > 0`.
    pub fn with_sigma(beta: f64, rho: f64, sigma: f64) -> Result<Self> {
        check_positive(beta, rho)?;
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(domain(format!("sigma must be positive and finite, got {sigma}")));
        }
        Ok(ThermoPoint { beta, rho, ln_a2rho: Some(-sigma) })
    }

    /// Dimensionless `βρ`.
    pub fn beta_rho(&self) -> f64 {
        self.beta * self.rho
    }

    /// `σ = |ln a²ρ|`, if a scattering length is attached.
    pub fn sigma(&self) -> Option<f64> {
        self.ln_a2rho.map(|l| -l)
    }

    /// Scattering length (may underflow to zero for very large σ).
    pub fn a(&self) -> Option<f64> {
        self.ln_a2rho.map(|l| (0.5 * (l - self.rho.ln())).exp())
    }
}

fn check_positive(beta: f64, rho: f64) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) || !(rho > 0.0 && rho.is_finite()) {
        return Err(domain(format!("beta and rho must be positive and finite, got beta = {beta}, rho = {rho}")));
    }
    Ok(())
}

/// `βμ₀ = ln(1 − e^{−4πβρ})` as a function of `x = βρ`.
pub fn beta_mu0(x: f64) -> f64 {
    ln_one_minus_exp(4.0 * PI * x)
}

/// Chemical potential `μ₀(β, ρ) = β⁻¹ ln(1 − e^{−4πβρ})`.
pub fn mu0(p: &ThermoPoint) -> f64 {
    beta_mu0(p.beta_rho()) / p.beta
}

/// Free energy per unit area of the ideal gas.
pub fn f0(p: &ThermoPoint) -> f64 {
    f0_raw(p.beta, p.rho)
}

pub(crate) fn f0_raw(beta: f64, rho: f64) -> f64 {
    -li2_deficit_exp(4.0 * PI * beta * rho) / (4.0 * PI * beta * beta)
}

/// Dimensionless free energy `f₀(x, 1)`; `f₀(β, ρ) = ρ² f₀(βρ, 1)`.
pub fn f0_scaled(x: f64) -> f64 {
    f0_raw(x, 1.0)
}

/// `f₀(β, ρ₁) − f₀(β, ρ₂)` evaluated without cancellation.
pub fn f0_difference(beta: f64, rho1: f64, rho2: f64) -> f64 {
    li2_exp_difference(4.0 * PI * beta * rho1, 4.0 * PI * beta * rho2) / (4.0 * PI * beta * beta)
}

/// Inverse of [`mu0`]: `ρ = −(4πβ)⁻¹ ln(1 − e^{βμ})` for `μ < 0`.
pub fn density_from_mu(beta: f64, mu: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(domain(format!("beta must be positive, got {beta}")));
    }
    if !(mu <= 0.0) {
        return Err(domain(format!("density_from_mu requires mu <= 0, got {mu}")));
    }
    if mu == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-ln_one_minus_exp(-beta * mu) / (4.0 * PI * beta))
}
