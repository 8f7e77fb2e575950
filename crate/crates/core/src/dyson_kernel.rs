//! Soft potentials, torus fields and the discretised Dyson operator inequality.
//!
//! The torus `Λ = [0, L)²` is sampled on an `N × N` grid. Kinetic terms are
//! Fourier multipliers applied with FFTs; potentials act diagonally in position.

use crate::error::{domain, precondition, Error, Result};
use crate::linalg::{lanczos_lowest, signed_index, EigenEstimate, Fft2};
use crate::quadrature::{integrate, integrate_to_infinity, integrate_with_breaks, Tolerance};
use crate::scattering::RadialPotential;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub type Point = [f64; 2];

/// Periodic square grid with side `L` and `N` nodes per direction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    pub l: f64,
    pub n: usize,
}

impl TorusGrid {
    pub fn new(l: f64, n: usize) -> Result<Self> {
        if !(l > 0.0) || !l.is_finite() {
            return Err(domain(format!("torus side must be positive, got {l}")));
        }
        if n < 16 || !n.is_power_of_two() {
            return Err(domain(format!("grid size must be a power of two >= 16, got {n}")));
        }
        Ok(TorusGrid { l, n })
    }

    pub fn dx(&self) -> f64 {
        self.l / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn node(&self, idx: usize) -> Point {
        let (i, j) = (idx / self.n, idx % self.n);
        [i as f64 * self.dx(), j as f64 * self.dx()]
    }

    /// `d(x, y) = min_{k ∈ ℤ²} |x − y − kL|`.
    pub fn dist(&self, x: Point, y: Point) -> f64 {
        let w = |d: f64| {
            let r = d - self.l * (d / self.l).round();
            r.abs()
        };
        w(x[0] - y[0]).hypot(w(x[1] - y[1]))
    }

    /// Nearest grid node of `p`, as grid indices.
    pub fn snap(&self, p: Point) -> (usize, usize) {
        let idx = |c: f64| {
            let k = (c / self.dx()).round() as i64;
            k.rem_euclid(self.n as i64) as usize
        };
        (idx(p[0]), idx(p[1]))
    }

    /// Momentum `(2π/L) k` for storage position `(a, b)`.
    pub fn momentum(&self, a: usize, b: usize) -> Point {
        let c = 2.0 * PI / self.l;
        [c * signed_index(a, self.n) as f64, c * signed_index(b, self.n) as f64]
    }
}

/// How the cutoff `χ(p) = ν(s|p|)` is realised.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CutoffProfile {
    /// Smooth step between `|q| = 1` and `|q| = 2`.
    #[default]
    Smooth,
    /// `χ = 1` on every nonzero mode (the `s → 0` surrogate).
    Saturated,
}

/// Which centres enter the nearest-neighbour term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NearestSet {
    #[default]
    All,
    /// Only centres selected by the `R/5`-separation rule.
    Separated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DysonParams {
    pub r: f64,
    pub s: f64,
    pub epsilon: f64,
    /// Kinetic fraction reserved before the inequality is applied; `0` gives the bare statement.
    pub kappa: f64,
    pub r0: f64,
    pub centers: Vec<Point>,
    #[serde(default)]
    pub nearest: NearestSet,
    #[serde(default)]
    pub cutoff: CutoffProfile,
    /// Diagonal value standing in for hard cores; defaults to `10⁶/L²`.
    #[serde(default)]
    pub hardcore_penalty: Option<f64>,
}

impl DysonParams {
    pub fn validate(&self, grid: &TorusGrid) -> Result<()> {
        if !(self.r0 > 0.0 && self.r0 < self.r && self.r <= self.s && self.s < grid.l / 2.0) {
            return Err(precondition(format!(
                "need 0 < R0 < R <= s < L/2, got R0 = {}, R = {}, s = {}, L = {}",
                self.r0, self.r, self.s, grid.l
            )));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(domain(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        if !(self.kappa >= 0.0 && self.kappa < 1.0) {
            return Err(domain(format!("kappa must lie in [0, 1), got {}", self.kappa)));
        }
        Ok(())
    }

    pub fn penalty(&self, grid: &TorusGrid) -> f64 {
        self.hardcore_penalty.unwrap_or(1e6 / (grid.l * grid.l))
    }
}

fn psi(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// Smooth radial step: `0` for `|q| ≤ 1`, `1` for `|q| ≥ 2`, `C^∞` in between.
pub fn nu(q: f64) -> f64 {
    if q <= 1.0 {
        0.0
    } else if q >= 2.0 {
        1.0
    } else {
        let a = psi(q - 1.0);
        a / (a + psi(2.0 - q))
    }
}

/// `χ(p) = ν(s|p|)` for the chosen profile.
pub fn chi(profile: CutoffProfile, s: f64, p: Point) -> f64 {
    let q = p[0].hypot(p[1]);
    match profile {
        CutoffProfile::Smooth => nu(s * q),
        CutoffProfile::Saturated => {
            if q == 0.0 {
                0.0
            } else {
                1.0
            }
        }
    }
}

/// Overlap kernel `j(t) = (16/π)(arccos t − t√(1−t²))` on `[0, 1]`, zero beyond.
pub fn j_overlap(t: f64) -> f64 {
    if t >= 1.0 {
        return 0.0;
    }
    let t = t.max(0.0);
    16.0 / PI * (t.acos() - t * (1.0 - t * t).sqrt())
}

/// `Ũ_R(t) = j(t/R)/(R² ln(R/ã))`.
pub fn soft_potential_tilde(r: f64, a_tilde: f64, t: f64) -> f64 {
    j_overlap(t / r) / (r * r * (r / a_tilde).ln())
}

/// `U_R(t) = Ũ_R(t) θ(t − R₀)`.
pub fn soft_potential(r: f64, r0: f64, a_tilde: f64, t: f64) -> f64 {
    if t < r0 {
        0.0
    } else {
        soft_potential_tilde(r, a_tilde, t)
    }
}

fn check_soft(r: f64, r0: f64, a_tilde: f64) -> Result<()> {
    if !(a_tilde > 0.0 && a_tilde < r0 && r0 < r) {
        return Err(precondition(format!("need 0 < a~ < R0 < R, got a~ = {a_tilde}, R0 = {r0}, R = {r}")));
    }
    Ok(())
}

/// `∫_{R₀}^{R} U_R(t) ln(t/ã) t dt`, which must not exceed one.
pub fn u_r_condition_integral(r: f64, r0: f64, a_tilde: f64) -> Result<f64> {
    check_soft(r, r0, a_tilde)?;
    let q = integrate(
        |t| soft_potential_tilde(r, a_tilde, t) * (t / a_tilde).ln() * t,
        r0,
        r,
        Tolerance::new(1e-15, 1e-13),
    )?;
    Ok(q.value)
}

/// `∫ U_R(t) t dt`.
pub fn u_r_moment(r: f64, r0: f64, a_tilde: f64) -> Result<f64> {
    check_soft(r, r0, a_tilde)?;
    let q = integrate(|t| soft_potential_tilde(r, a_tilde, t) * t, r0, r, Tolerance::new(1e-15, 1e-13))?;
    Ok(q.value)
}

/// The fields `h`, `f_R` and `w_R` on the grid (row-major, origin at index 0).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TorusFields {
    pub h: Vec<f64>,
    pub f_r: Vec<f64>,
    pub w_r: Vec<f64>,
    /// `∫ f_R`.
    pub f_integral: f64,
    /// Search radius used for the discrete supremum (`R` plus one cell).
    pub search_radius: f64,
    /// Set when `f_R` vanishes identically.
    pub degenerate: bool,
}

/// Grid offsets `(di, dj)` with `|(di, dj)|·dx ≤ radius`.
fn offsets(grid: &TorusGrid, radius: f64) -> Vec<(i64, i64)> {
    let k = (radius / grid.dx()).floor() as i64;
    let mut out = Vec::new();
    for di in -k..=k {
        for dj in -k..=k {
            if ((di * di + dj * dj) as f64).sqrt() * grid.dx() <= radius * (1.0 + 1e-12) {
                out.push((di, dj));
            }
        }
    }
    out
}

/// `h(x) = L⁻² Σ_p (1 − χ(p)) e^{−ipx}` on the grid.
pub fn h_field(grid: &TorusGrid, s: f64, profile: CutoffProfile) -> Result<Vec<f64>> {
    if profile == CutoffProfile::Smooth && (grid.n as f64) < 8.0 * grid.l / s {
        return Err(precondition(format!(
            "grid does not resolve the cutoff: need N >= 8 L / s = {}, got {}",
            8.0 * grid.l / s,
            grid.n
        )));
    }
    let n = grid.n;
    let mut data: Vec<Complex64> = (0..n * n)
        .map(|idx| {
            let p = grid.momentum(idx / n, idx % n);
            Complex64::new(1.0 - chi(profile, s, p), 0.0)
        })
        .collect();
    Fft2::new(n).forward(&mut data);
    let vol = grid.l * grid.l;
    Ok(data.iter().map(|c| c.re / vol).collect())
}

/// Compute `h`, `f_R(x) = sup_{|y| ≤ R} |h(x−y) − h(x)|` and `w_R = (2/π) f_R ∫f_R`.
pub fn torus_fields(grid: &TorusGrid, params: &DysonParams) -> Result<TorusFields> {
    params.validate(grid)?;
    let h = h_field(grid, params.s, params.cutoff)?;
    let search_radius = params.r + grid.dx();
    let offs = offsets(grid, search_radius);
    let n = grid.n as i64;
    let f_r: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let (i, j) = ((idx as i64) / n, (idx as i64) % n);
            let hx = h[idx];
            offs.iter()
                .map(|&(di, dj)| {
                    let k = ((i - di).rem_euclid(n) * n + (j - dj).rem_euclid(n)) as usize;
                    (h[k] - hx).abs()
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let cell = grid.dx() * grid.dx();
    let f_integral: f64 = f_r.iter().sum::<f64>() * cell;
    let w_r = f_r.iter().map(|f| 2.0 / PI * f * f_integral).collect();
    let degenerate = f_r.iter().all(|&f| f <= 1e-14 * h.iter().fold(0.0f64, |m, x| m.max(x.abs())));
    Ok(TorusFields { h, f_r, w_r, f_integral, search_radius, degenerate })
}

/// A smooth function supported in `[−2, 2]²` with known derivative bounds.
pub trait TestFunction: Sync {
    /// Value at `q` (complex in general).
    fn eval(&self, q: Point) -> Complex64;
    /// `max_{|α| = order} ‖∂^α o‖_∞`.
    fn max_derivative(&self, order: usize) -> f64;
}

/// `o(q) = b(q₁) b(q₂)` with `b(t) = cos^{2m}(πt/4)` on `[−2, 2]`.
#[derive(Clone, Debug)]
pub struct ProductBump {
    pub m: usize,
    sup: Vec<f64>,
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl ProductBump {
    pub fn new(m: usize) -> Self {
        let mut b = ProductBump { m, sup: Vec::new() };
        let samples = 20001;
        b.sup = (0..=2 * m)
            .map(|a| {
                (0..samples)
                    .map(|i| b.deriv_1d(-2.0 + 4.0 * i as f64 / (samples - 1) as f64, a).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        b
    }

    /// `a`-th derivative of `b` using `cos^{2m}θ = 4^{−m}[C(2m,m) + 2Σ_k C(2m,m−k) cos 2kθ]`.
    pub fn deriv_1d(&self, t: f64, a: usize) -> f64 {
        if t.abs() >= 2.0 {
            return 0.0;
        }
        let m = self.m;
        let theta = PI * t / 4.0;
        let mut sum = if a == 0 { binom(2 * m, m) } else { 0.0 };
        for k in 1..=m {
            let w = k as f64 * PI / 2.0;
            sum += 2.0 * binom(2 * m, m - k) * w.powi(a as i32) * (2.0 * k as f64 * theta + a as f64 * PI / 2.0).cos();
        }
        sum / 4f64.powi(m as i32)
    }
}

impl TestFunction for ProductBump {
    fn eval(&self, q: Point) -> Complex64 {
        Complex64::new(self.deriv_1d(q[0], 0) * self.deriv_1d(q[1], 0), 0.0)
    }

    fn max_derivative(&self, order: usize) -> f64 {
        (0..=order)
            .filter(|&a| a < self.sup.len() && order - a < self.sup.len())
            .map(|a| self.sup[a] * self.sup[order - a])
            .fold(0.0, f64::max)
    }
}

/// `o(q) = −i q₁ (1 − ν(|q|))`, the symbol of `s ∂₁ h`.
#[derive(Clone, Debug)]
pub struct GradientSymbol {
    sup: Vec<f64>,
}

impl GradientSymbol {
    /// Derivative norms up to `max_order` by spectral differentiation on `[−4, 4]²`.
    pub fn new(max_order: usize) -> Self {
        let sup = spectral_derivative_sup(|q| q[0] * (1.0 - nu(q[0].hypot(q[1]))), 4.0, 512, max_order);
        GradientSymbol { sup }
    }
}

impl TestFunction for GradientSymbol {
    fn eval(&self, q: Point) -> Complex64 {
        Complex64::new(0.0, -q[0] * (1.0 - nu(q[0].hypot(q[1]))))
    }

    fn max_derivative(&self, order: usize) -> f64 {
        self.sup.get(order).copied().unwrap_or(f64::INFINITY)
    }
}

/// `max_{|α| = k} sup |∂^α f|` for `k = 0..=max_order`, with `f` sampled on
/// `[−half, half)²` (it must vanish near the boundary) and differentiated spectrally.
pub fn spectral_derivative_sup<F: Fn(Point) -> f64>(f: F, half: f64, m: usize, max_order: usize) -> Vec<f64> {
    let h = 2.0 * half / m as f64;
    let fft = Fft2::new(m);
    let mut base: Vec<Complex64> = (0..m * m)
        .map(|idx| Complex64::new(f([-half + (idx / m) as f64 * h, -half + (idx % m) as f64 * h]), 0.0))
        .collect();
    fft.forward(&mut base);
    let kfac = 2.0 * PI / (2.0 * half);
    (0..=max_order)
        .map(|order| {
            (0..=order)
                .map(|a| {
                    let b = order - a;
                    let mut d: Vec<Complex64> = base
                        .iter()
                        .enumerate()
                        .map(|(idx, c)| {
                            let (r, s) = (idx / m, idx % m);
                            // the Nyquist mode has no well-defined derivative
                            if (a % 2 == 1 && r == m / 2) || (b % 2 == 1 && s == m / 2) {
                                return Complex64::new(0.0, 0.0);
                            }
                            let k1 = Complex64::new(0.0, kfac * signed_index(r, m) as f64);
                            let k2 = Complex64::new(0.0, kfac * signed_index(s, m) as f64);
                            c * k1.powu(a as u32) * k2.powu(b as u32)
                        })
                        .collect();
                    fft.inverse(&mut d);
                    d.iter().map(|c| c.re.abs() / (m * m) as f64).fold(0.0, f64::max)
                })
                .fold(0.0, f64::max)
        })
        .collect()
}

/// `u(x) = L⁻² Σ_p o(sp) e^{−ipx}` by direct summation over the lattice points in the support.
pub fn lattice_sum(o: &dyn TestFunction, s: f64, l: f64, x: Point) -> Complex64 {
    let c = 2.0 * PI / l;
    let kmax = (2.0 / (s * c)).floor() as i64;
    let mut sum = Complex64::new(0.0, 0.0);
    for k1 in -kmax..=kmax {
        for k2 in -kmax..=kmax {
            let p = [c * k1 as f64, c * k2 as f64];
            let val = o.eval([s * p[0], s * p[1]]);
            if val == Complex64::new(0.0, 0.0) {
                continue;
            }
            sum += val * Complex64::from_polar(1.0, -(p[0] * x[0] + p[1] * x[1]));
        }
    }
    sum / (l * l)
}

/// `Cₙ = (π²/2)ⁿ`: each second difference costs `(2π/L)²` times a second
/// derivative, two directions and the factor `L²` give `8π²`, and `16ⁿ` comes
/// from `2L²(2 − cos − cos) ≥ 16 d²`.
pub fn decay_constant(n: usize) -> f64 {
    (PI * PI / 2.0).powi(n as i32)
}

/// Right-hand side `(s/d)^{2n} Cₙ max‖∂^α o‖ (2/(πs) + (2n+1)/L)²`.
pub fn fourier_decay_rhs(o: &dyn TestFunction, s: f64, l: f64, n: usize, d: f64) -> f64 {
    let dist = if n == 0 { 1.0 } else { (s / d).powi(2 * n as i32) };
    let count = 2.0 / (PI * s) + (2 * n + 1) as f64 / l;
    dist * decay_constant(n) * o.max_derivative(2 * n) * count * count
}

/// `(|u(x)|, bound)` for the Fourier-decay estimate.
pub fn fourier_decay_bound(o: &dyn TestFunction, s: f64, l: f64, n: usize, x: Point) -> (f64, f64) {
    let grid_dist = {
        let w = |c: f64| (c - l * (c / l).round()).abs();
        w(x[0]).hypot(w(x[1]))
    };
    let u = lattice_sum(o, s, l, x).norm();
    (u, fourier_decay_rhs(o, s, l, n, grid_dist))
}

/// Majorant for `w_R` built from the Fourier-decay bound on `∇h`:
/// `f_R(x) ≤ R'·(√2/s)·B(max(d(x,0) − R', 0))` with `B(d) = min_n RHSₙ(d)` and `R'`
/// the search radius.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayMajorant {
    pub s: f64,
    pub l: f64,
    pub r: f64,
    pub search_radius: f64,
    pub f_integral: f64,
    pub derivative_norms: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayCheck {
    /// `max_x w_R(x) / ((R²/s⁴) g(d(x,0)/s))`; at most one when the bound holds.
    pub max_ratio: f64,
    pub violations: usize,
    pub description: String,
}

impl DecayMajorant {
    pub fn new(grid: &TorusGrid, params: &DysonParams, fields: &TorusFields) -> Self {
        let sym = GradientSymbol::new(6);
        DecayMajorant {
            s: params.s,
            l: grid.l,
            r: params.r,
            search_radius: fields.search_radius,
            f_integral: fields.f_integral,
            derivative_norms: (0..=6).map(|k| sym.max_derivative(k)).collect(),
        }
    }

    fn gradient_bound(&self, d: f64) -> f64 {
        (0..=3)
            .filter(|&n| n == 0 || d > 0.0)
            .map(|n| {
                let dist = if n == 0 { 1.0 } else { (self.s / d).powi(2 * n as i32) };
                let count = 2.0 / (PI * self.s) + (2 * n + 1) as f64 / self.l;
                dist * decay_constant(n) * self.derivative_norms[2 * n] * count * count
            })
            .fold(f64::INFINITY, f64::min)
            * std::f64::consts::SQRT_2
            / self.s
    }

    /// Bound on `f_R` at torus distance `d` from the origin.
    pub fn f_bound(&self, d: f64) -> f64 {
        self.search_radius * self.gradient_bound((d - self.search_radius).max(0.0))
    }

    /// The rapidly decaying profile `g` in `w_R(x) ≤ (R²/s⁴) g(d(x,0)/s)`.
    pub fn g(&self, t: f64) -> f64 {
        self.s.powi(4) / (self.r * self.r) * 2.0 / PI * self.f_integral * self.f_bound(t * self.s)
    }

    pub fn check(&self, grid: &TorusGrid, fields: &TorusFields) -> DecayCheck {
        let mut max_ratio: f64 = 0.0;
        let mut violations = 0;
        for idx in 0..grid.len() {
            let d = grid.dist(grid.node(idx), [0.0, 0.0]);
            let bound = self.r * self.r / self.s.powi(4) * self.g(d / self.s);
            let w = fields.w_r[idx];
            if w > 0.0 {
                let ratio = w / bound;
                max_ratio = max_ratio.max(ratio);
                if ratio > 1.0 + 1e-9 {
                    violations += 1;
                }
            }
        }
        DecayCheck {
            max_ratio,
            violations,
            description: "g from the Fourier-decay bound on grad h (orders 0..3), shifted by the search radius".into(),
        }
    }
}

/// Indices forming `J_j`: centres whose nearest neighbour (excluding `j`) is at
/// least `R/5` away, completed greedily in lexicographic order to a maximal
/// `R/5`-separated set.
pub fn select_jj(points: &[Point], j: usize, r: f64, grid: &TorusGrid) -> Vec<usize> {
    select_separated(points, Some(j), r, grid)
}

pub(crate) fn select_separated(points: &[Point], exclude: Option<usize>, r: f64, grid: &TorusGrid) -> Vec<usize> {
    let sep = r / 5.0;
    let others: Vec<usize> = (0..points.len()).filter(|&i| Some(i) != exclude).collect();
    let mut chosen: Vec<usize> = others
        .iter()
        .copied()
        .filter(|&i| others.iter().all(|&k| k == i || grid.dist(points[i], points[k]) >= sep))
        .collect();
    let mut rest: Vec<usize> = others.iter().copied().filter(|i| !chosen.contains(i)).collect();
    rest.sort_by(|&a, &b| points[a][0].total_cmp(&points[b][0]).then(points[a][1].total_cmp(&points[b][1])));
    for i in rest {
        if chosen.iter().all(|&k| grid.dist(points[i], points[k]) >= sep) {
            chosen.push(i);
        }
    }
    chosen.sort_unstable();
    chosen
}

/// Self-adjoint operator `F⁻¹ M F + V` on the torus grid.
pub struct TorusOperator {
    pub grid: TorusGrid,
    pub multiplier: Vec<f64>,
    pub diagonal: Vec<f64>,
    fft: Fft2,
}

impl TorusOperator {
    pub fn new(grid: TorusGrid, multiplier: Vec<f64>, diagonal: Vec<f64>) -> Self {
        let fft = Fft2::new(grid.n);
        TorusOperator { grid, multiplier, diagonal, fft }
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let nn = self.grid.len() as f64;
        let mut d: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft.forward(&mut d);
        for (c, m) in d.iter_mut().zip(&self.multiplier) {
            *c *= m / nn;
        }
        self.fft.inverse(&mut d);
        for i in 0..x.len() {
            y[i] = d[i].re + self.diagonal[i] * x[i];
        }
    }

    /// `max M + max |V|`, an upper bound on the operator norm.
    pub fn norm_bound(&self) -> f64 {
        let m = self.multiplier.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        let v = self.diagonal.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        m + v
    }

    /// Lowest eigenvalue, converged to a residual of `rtol · norm_bound`.
    pub fn lowest_eigenvalue(&self, rtol: f64) -> Result<EigenEstimate> {
        let tol = rtol * self.norm_bound().max(1e-300);
        lanczos_lowest(|x, y| self.apply(x, y), self.grid.len(), tol, 7)
    }

    /// Dense matrix, for small grids only.
    pub fn dense(&self) -> nalgebra::DMatrix<f64> {
        let n = self.grid.len();
        let mut m = nalgebra::DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            self.apply(&e, &mut col);
            for i in 0..n {
                m[(i, j)] = col[i];
            }
            e[j] = 0.0;
        }
        m
    }
}

/// Outcome of the discretised operator inequality.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DysonMargin {
    /// Lowest eigenvalue of LHS − RHS.
    pub margin: f64,
    pub operator_norm: f64,
    pub residual: f64,
    pub iterations: usize,
    pub tolerance: f64,
    pub certified: bool,
    /// Centres after snapping to grid nodes.
    pub centers: Vec<Point>,
    /// Centres used in the nearest-neighbour and `w_R` terms.
    pub selected: Vec<usize>,
    pub u_r_condition: f64,
    pub w_prefactor: f64,
}

/// Relative tolerance in `margin ≥ −tol·‖LHS − RHS‖`.
pub const MARGIN_RTOL: f64 = 1e-6;

/// Assemble LHS − RHS: kinetic `(1−κ) p²χ(p)²` plus the diagonal
/// `½Σv − (1−ε)(1−κ) U_R(d(x, y_NN)) + ε⁻¹ ∫U_R t dt Σ w_R(x − yᵢ)`.
pub fn dyson_operator(
    grid: &TorusGrid,
    v: &RadialPotential,
    params: &DysonParams,
    a_tilde: f64,
) -> Result<(TorusOperator, DysonMargin)> {
    params.validate(grid)?;
    if params.r0 < v.range() {
        return Err(precondition(format!("R0 = {} is below the potential range {}", params.r0, v.range())));
    }
    let cond = u_r_condition_integral(params.r, params.r0, a_tilde)?;
    let moment = u_r_moment(params.r, params.r0, a_tilde)?;
    let fields = torus_fields(grid, params)?;
    let n = grid.n;
    let centers: Vec<(usize, usize)> = params.centers.iter().map(|&c| grid.snap(c)).collect();
    let snapped: Vec<Point> = centers.iter().map(|&(i, j)| [i as f64 * grid.dx(), j as f64 * grid.dx()]).collect();
    let selected = match params.nearest {
        NearestSet::All => (0..snapped.len()).collect::<Vec<_>>(),
        NearestSet::Separated => select_separated(&snapped, None, params.r, grid),
    };
    let penalty = params.penalty(grid);
    let keep = 1.0 - params.kappa;
    let w_pref = moment / params.epsilon;
    let diagonal: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let x = grid.node(idx);
            let mut val = 0.0;
            for y in &snapped {
                let vv = v.eval(grid.dist(x, *y));
                val += 0.5 * if vv.is_finite() { vv } else { penalty };
            }
            if let Some(dmin) = selected.iter().map(|&i| grid.dist(x, snapped[i])).min_by(f64::total_cmp) {
                val -= (1.0 - params.epsilon) * keep * soft_potential(params.r, params.r0, a_tilde, dmin);
            }
            let (i, j) = (idx / n, idx % n);
            for &k in &selected {
                let (ci, cj) = centers[k];
                let si = (i + n - ci) % n;
                let sj = (j + n - cj) % n;
                val += w_pref * fields.w_r[si * n + sj];
            }
            val
        })
        .collect();
    let multiplier: Vec<f64> = (0..grid.len())
        .map(|idx| {
            let p = grid.momentum(idx / n, idx % n);
            let c = chi(params.cutoff, params.s, p);
            keep * (p[0] * p[0] + p[1] * p[1]) * c * c
        })
        .collect();
    let op = TorusOperator::new(*grid, multiplier, diagonal);
    let info = DysonMargin {
        margin: f64::NAN,
        operator_norm: op.norm_bound(),
        residual: f64::NAN,
        iterations: 0,
        tolerance: MARGIN_RTOL * op.norm_bound(),
        certified: false,
        centers: snapped,
        selected,
        u_r_condition: cond,
        w_prefactor: w_pref,
    };
    Ok((op, info))
}

/// Lowest eigenvalue of the discretised `LHS − RHS` of the Dyson inequality.
pub fn dyson_inequality_margin(
    grid: &TorusGrid,
    v: &RadialPotential,
    params: &DysonParams,
    a_tilde: f64,
) -> Result<DysonMargin> {
    let (op, mut info) = dyson_operator(grid, v, params, a_tilde)?;
    let est = op.lowest_eigenvalue(1e-8)?;
    info.margin = est.value;
    info.residual = est.residual;
    info.iterations = est.iterations;
    info.certified = est.value >= -info.tolerance;
    Ok(info)
}

/// `m(r) = −(r/16) ∫₀^∞ g'''(√(r² + u²)) du` and derived constants for a radial profile `g`.
pub struct KernelDecomposition<G: Fn(f64) -> f64 + Sync> {
    pub g3: G,
}

impl<G: Fn(f64) -> f64 + Sync> KernelDecomposition<G> {
    pub fn m(&self, r: f64) -> Result<f64> {
        let q = integrate_to_infinity(|u| (self.g3)((r * r + u * u).sqrt()), 0.0, Tolerance::new(1e-14, 1e-12))?;
        Ok(-r / 16.0 * q.value)
    }

    /// `∫_t^∞ m(r) j(t/r) dr`, which reproduces `g(t)`.
    pub fn reconstruct(&self, t: f64) -> Result<f64> {
        let f = |r: f64| self.m(r).map(|m| m * j_overlap(t / r)).unwrap_or(f64::NAN);
        let q = if t > 0.0 {
            integrate_to_infinity(f, t, Tolerance::new(1e-12, 1e-10))?
        } else {
            integrate_to_infinity(|r| self.m(r).unwrap_or(f64::NAN) * 8.0, 0.0, Tolerance::new(1e-12, 1e-10))?
        };
        if !q.value.is_finite() {
            return Err(Error::Solver("kernel reconstruction produced a non-finite value".into()));
        }
        Ok(q.value)
    }

    /// `c = ∫₀¹ |m| + ∫₁^∞ |m| t⁴`.
    pub fn c_constant(&self) -> Result<f64> {
        let inner = integrate_with_breaks(|r| self.m(r).unwrap_or(f64::NAN).abs(), &[0.0, 0.5, 1.0], Tolerance::new(1e-12, 1e-10))?;
        let outer = integrate_to_infinity(|r| self.m(r).unwrap_or(f64::NAN).abs() * r.powi(4), 1.0, Tolerance::new(1e-12, 1e-10))?;
        Ok(inner.value + outer.value)
    }

    /// `J(x) = ∫_x^∞ |m(r)| r² dr`.
    pub fn big_j(&self, x: f64) -> Result<f64> {
        let q = integrate_to_infinity(|r| self.m(r).unwrap_or(f64::NAN).abs() * r * r, x, Tolerance::new(1e-13, 1e-10))?;
        Ok(q.value)
    }
}

/// The Gaussian profile `g(t) = e^{−t²}` with `g'''(t) = (12t − 8t³) e^{−t²}`.
pub fn gaussian_decomposition() -> KernelDecomposition<fn(f64) -> f64> {
    fn g3(t: f64) -> f64 {
        (12.0 * t - 8.0 * t * t * t) * (-t * t).exp()
    }
    KernelDecomposition { g3: g3 as fn(f64) -> f64 }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nu_plateaus() {
        assert_eq!(nu(0.5), 0.0);
        assert_eq!(nu(1.0), 0.0);
        assert_eq!(nu(2.0), 1.0);
        assert!((nu(1.5) - 0.5).abs() < 1e-15);
        assert!(nu(1.2) < nu(1.3));
    }

    #[test]
    fn torus_metric_wraps() {
        let g = TorusGrid::new(10.0, 16).unwrap();
        assert!((g.dist([0.5, 0.5], [9.5, 9.5]) - 2f64.sqrt()).abs() < 1e-12);
        assert!((g.dist([0.0, 0.0], [5.0, 0.0]) - 5.0).abs() < 1e-12);
        assert!(TorusGrid::new(10.0, 24).is_err());
    }

    #[test]
    fn j_values() {
        assert!((j_overlap(0.0) - 8.0).abs() < 1e-14);
        assert_eq!(j_overlap(1.5), 0.0);
        let want = 16.0 / PI * (PI / 3.0 - 3f64.sqrt() / 4.0);
        assert!((j_overlap(0.5) - want).abs() < 1e-14);
    }
}
