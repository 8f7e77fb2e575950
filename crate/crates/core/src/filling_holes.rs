//! Shallow wells: radial ground energies and the torus "filling holes" bound.

use crate::dyson_kernel::{Point, TorusGrid, TorusOperator, MARGIN_RTOL};
use crate::error::{domain, precondition, Error, Result};
use crate::scattering::{integrate_interval, ProfileSample};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// The well `−depth·θ(R₀ − |x|)` with outer scale `R`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WellSpec {
    pub r0: f64,
    pub r: f64,
    /// Defaults to `1/(R₀² ln(R/R₀))`.
    pub depth: f64,
    /// Defaults to `R/10`.
    pub domain_radius: f64,
}

impl WellSpec {
    pub fn new(r0: f64, r: f64) -> Result<Self> {
        if !(r0 > 0.0 && r.is_finite()) {
            return Err(domain(format!("radii must be positive and finite, got R0 = {r0}, R = {r}")));
        }
        if r0 >= r / 10.0 {
            return Err(precondition(format!("need R0 < R/10, got R0 = {r0}, R = {r}")));
        }
        Ok(WellSpec { r0, r, depth: 1.0 / (r0 * r0 * (r / r0).ln()), domain_radius: r / 10.0 })
    }

    pub fn with_depth(mut self, depth: f64) -> Result<Self> {
        if !(depth >= 0.0 && depth.is_finite()) {
            return Err(domain(format!("depth must be non-negative, got {depth}")));
        }
        self.depth = depth;
        Ok(self)
    }
}

/// Lowest eigenvalue of a radial problem.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialGround {
    pub energy: f64,
    /// Normalised eigenfunction value at the domain boundary (Neumann problem only).
    pub eta: Option<f64>,
    pub bisection_steps: usize,
}

/// Integrate the regular solution of `−(1/r)(r u')' − depth θ(R₀−r) u = −κ² u` from the origin to `r_end`.
fn shoot(spec: &WellSpec, kappa: f64, r_end: f64, samples: &mut Vec<ProfileSample>) -> Result<[f64; 2]> {
    let k2 = kappa * kappa;
    let inner = 2.0 * (k2 - spec.depth);
    let outer = 2.0 * k2;
    let rs = 1e-9 * spec.r0;
    let y0 = [1.0, 0.25 * inner * rs * rs];
    let mid = integrate_interval(&|_| inner, rs.ln(), spec.r0.ln(), y0, samples)?;
    if r_end <= spec.r0 {
        return Ok(mid);
    }
    integrate_interval(&|_| outer, spec.r0.ln(), r_end.ln(), mid, samples)
}

/// Bisect `ln κ` on a sign change of `f`, with `f < 0` below the root.
fn bisect_kappa<F: Fn(f64) -> Result<f64>>(f: F, mut lo: f64, mut hi: f64) -> Result<(f64, usize)> {
    for _ in 0..200 {
        if f(lo)? < 0.0 {
            break;
        }
        lo *= 1e-3;
    }
    if f(lo)? >= 0.0 || f(hi)? <= 0.0 {
        return Err(Error::Solver("could not bracket the ground state".into()));
    }
    let mut steps = 0;
    while hi / lo - 1.0 > 1e-13 && steps < 400 {
        let mid = (lo * hi).sqrt();
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        steps += 1;
    }
    Ok(((lo * hi).sqrt(), steps))
}

/// `∫ u² r dr` over the sampled range, with cubic Hermite interpolation in `ln r`.
fn weighted_norm(samples: &[ProfileSample]) -> f64 {
    const X: [f64; 5] = [-0.906_179_845_938_664, -0.538_469_310_105_683, 0.0, 0.538_469_310_105_683, 0.906_179_845_938_664];
    const W: [f64; 5] = [0.236_926_885_056_189_1, 0.478_628_670_499_366_5, 0.568_888_888_888_888_9, 0.478_628_670_499_366_5, 0.236_926_885_056_189_1];
    let mut sum = 0.0;
    for w in samples.windows(2) {
        let (t0, t1) = (w[0].r.ln(), w[1].r.ln());
        let h = t1 - t0;
        if h <= 0.0 {
            continue;
        }
        for (x, wt) in X.iter().zip(W) {
            let u = 0.5 * (x + 1.0);
            let (h00, h10, h01, h11) = (
                2.0 * u * u * u - 3.0 * u * u + 1.0,
                u * u * u - 2.0 * u * u + u,
                -2.0 * u * u * u + 3.0 * u * u,
                u * u * u - u * u,
            );
            let g = h00 * w[0].g + h10 * h * w[0].rg + h01 * w[1].g + h11 * h * w[1].rg;
            let r = (t0 + u * h).exp();
            sum += 0.5 * h * wt * g * g * r * r;
        }
    }
    sum
}

/// Lowest eigenvalue on the disk of radius `R/10` with Neumann boundary conditions.
///
/// Found by shooting from the origin and bisecting on the sign of `u'(R/10)`.
pub fn neumann_ground_energy(spec: &WellSpec) -> Result<RadialGround> {
    let rd = spec.domain_radius;
    if spec.depth == 0.0 {
        return Ok(RadialGround { energy: 0.0, eta: Some(1.0 / (PI.sqrt() * rd)), bisection_steps: 0 });
    }
    let f = |kappa: f64| -> Result<f64> {
        let mut s = Vec::new();
        Ok(shoot(spec, kappa, rd, &mut s)?[1])
    };
    let (kappa, steps) = bisect_kappa(f, 1e-3 / rd, spec.depth.sqrt())?;
    let mut samples = Vec::new();
    let end = shoot(spec, kappa, rd, &mut samples)?;
    let norm = 2.0 * PI * weighted_norm(&samples);
    Ok(RadialGround { energy: -kappa * kappa, eta: Some(end[0].abs() / norm.sqrt()), bisection_steps: steps })
}

/// Ground energy `E₀ < 0` of `−Δ − depth θ(R₀ − |x|)` on the whole plane.
///
/// Shooting to `40/κ` and bisecting on the sign of `u` there.
pub fn whole_plane_ground_energy(spec: &WellSpec) -> Result<RadialGround> {
    if spec.depth == 0.0 {
        return Err(Error::Degenerate("a zero well has no bound state".into()));
    }
    let f = |kappa: f64| -> Result<f64> {
        let mut s = Vec::new();
        Ok(shoot(spec, kappa, (40.0 / kappa).max(2.0 * spec.r0), &mut s)?[0])
    };
    let weak = (-2.0 / (spec.depth * spec.r0 * spec.r0) - 10.0).exp() / spec.r0;
    let (kappa, steps) = bisect_kappa(f, weak.max(1e-300), spec.depth.sqrt())?;
    Ok(RadialGround { energy: -kappa * kappa, eta: None, bisection_steps: steps })
}

/// `−E R⁴/R₀²`, which is of order one in the weak-coupling regime.
pub fn weak_coupling_ratio(spec: &WellSpec, energy: f64) -> f64 {
    -energy * spec.r.powi(4) / (spec.r0 * spec.r0)
}

/// `E₀(1 + (6π/5)η²R²) − (12π/5)η²`, a lower bound on the Neumann energy.
pub fn neumann_bound_from_plane(spec: &WellSpec, e0: f64, eta: f64) -> f64 {
    e0 * (1.0 + 6.0 * PI / 5.0 * eta * eta * spec.r * spec.r) - 12.0 * PI / 5.0 * eta * eta
}

/// `−121/R² (R₀/R)^{2−ε} − 240/R²`.
pub fn small_well_bound(spec: &WellSpec, eps: f64) -> f64 {
    let r2 = spec.r * spec.r;
    -121.0 / r2 * (spec.r0 / spec.r).powf(2.0 - eps) - 240.0 / r2
}

/// Default `C̃`.
pub const DEFAULT_CTILDE: f64 = 400.0;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HolesMargin {
    pub margin: f64,
    pub operator_norm: f64,
    pub residual: f64,
    pub iterations: usize,
    pub tolerance: f64,
    pub certified: bool,
    pub ctilde: f64,
    pub centers: Vec<Point>,
}

/// `−Δ − depth Σθ(R₀ − d(x,yᵢ)) + (C̃/R²) Σθ(R/10 − d(x,yᵢ))` on the torus grid.
pub fn holes_operator(grid: &TorusGrid, centers: &[Point], r0: f64, r: f64, ctilde: f64) -> Result<(TorusOperator, Vec<Point>)> {
    let spec = WellSpec::new(r0, r)?;
    if !(ctilde >= 0.0 && ctilde.is_finite()) {
        return Err(domain(format!("C~ must be non-negative, got {ctilde}")));
    }
    for (i, a) in centers.iter().enumerate() {
        for b in &centers[i + 1..] {
            if grid.dist(*a, *b) < r / 5.0 * (1.0 - 1e-9) {
                return Err(precondition(format!("centres {a:?} and {b:?} are closer than R/5")));
            }
        }
    }
    let dx = grid.dx();
    let snapped: Vec<Point> = centers
        .iter()
        .map(|&c| {
            let (i, j) = grid.snap(c);
            [i as f64 * dx, j as f64 * dx]
        })
        .collect();
    let n = grid.n;
    let diagonal = (0..grid.len())
        .map(|idx| {
            let x = grid.node(idx);
            snapped
                .iter()
                .map(|&y| {
                    let d = grid.dist(x, y);
                    let mut v = 0.0;
                    if d < r0 {
                        v -= spec.depth;
                    }
                    if d < r / 10.0 {
                        v += ctilde / (r * r);
                    }
                    v
                })
                .sum()
        })
        .collect();
    let multiplier = (0..grid.len())
        .map(|idx| {
            let p = grid.momentum(idx / n, idx % n);
            p[0] * p[0] + p[1] * p[1]
        })
        .collect();
    Ok((TorusOperator::new(*grid, multiplier, diagonal), snapped))
}

/// Lowest eigenvalue of the holes operator; certified when `≥ −10⁻⁶·‖op‖`.
pub fn holes_inequality_margin(grid: &TorusGrid, centers: &[Point], r0: f64, r: f64, ctilde: f64) -> Result<HolesMargin> {
    let (op, snapped) = holes_operator(grid, centers, r0, r, ctilde)?;
    let est = op.lowest_eigenvalue(1e-8)?;
    let norm = op.norm_bound();
    let tolerance = MARGIN_RTOL * norm;
    Ok(HolesMargin {
        margin: est.value,
        operator_norm: norm,
        residual: est.residual,
        iterations: est.iterations,
        tolerance,
        certified: est.value >= -tolerance,
        ctilde,
        centers: snapped,
    })
}
