//! Radial potentials and the two-dimensional scattering length.
//!
//! The zero-energy equation `g'' + g'/r = (v/2) g` is integrated in `t = ln r`,
//! where it reads `g_t = G`, `G_t = e^{2t} v(e^t) g / 2` with `G = r g'`.
//! Outside the range the solution is `A ln(r/a)`, which gives `a = r e^{−g/G}`.

use crate::error::{domain, precondition, Error, Result};
use crate::quadrature::{integrate_with_breaks, Tolerance};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Shape of one radial segment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SegmentKind {
    Hardcore,
    Const { value: f64 },
    /// `(r, v)` samples, linearly interpolated; the first and last radii match the segment ends.
    Tabulated { samples: Vec<[f64; 2]> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub r_lo: f64,
    pub r_hi: f64,
    #[serde(flatten)]
    pub kind: SegmentKind,
}

/// Piecewise nonnegative radial potential supported on `[0, R₀]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialPotential {
    pub segments: Vec<Segment>,
}

impl RadialPotential {
    /// Validate and wrap a list of segments.
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        let p = RadialPotential { segments };
        p.validate()?;
        Ok(p)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: RadialPotential = serde_json::from_str(text)?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("potential serialises")
    }

    pub fn hard_disk(d: f64) -> Result<Self> {
        Self::new(vec![Segment { r_lo: 0.0, r_hi: d, kind: SegmentKind::Hardcore }])
    }

    pub fn soft_disk(v0: f64, d: f64) -> Result<Self> {
        Self::new(vec![Segment { r_lo: 0.0, r_hi: d, kind: SegmentKind::Const { value: v0 } }])
    }

    /// Tabulate `f` on `n + 1` equispaced nodes of `[lo, hi]`, padded with zero on `[0, lo]`.
    pub fn tabulated<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize) -> Result<Self> {
        let samples = (0..=n)
            .map(|i| {
                let r = if i == n { hi } else { lo + (hi - lo) * i as f64 / n as f64 };
                [r, f(r)]
            })
            .collect();
        let mut segs = Vec::new();
        if lo > 0.0 {
            segs.push(Segment { r_lo: 0.0, r_hi: lo, kind: SegmentKind::Const { value: 0.0 } });
        }
        segs.push(Segment { r_lo: lo, r_hi: hi, kind: SegmentKind::Tabulated { samples } });
        Self::new(segs)
    }

    fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(domain("potential needs at least one segment"));
        }
        let mut r = 0.0;
        let mut seen_finite = false;
        for (i, s) in self.segments.iter().enumerate() {
            if s.r_lo != r {
                return Err(domain(format!("segment {i} starts at {} but previous ends at {r}", s.r_lo)));
            }
            if !(s.r_hi > s.r_lo) || !s.r_hi.is_finite() {
                return Err(domain(format!("segment {i} has empty or infinite extent")));
            }
            match &s.kind {
                SegmentKind::Hardcore => {
                    if seen_finite {
                        return Err(domain("hardcore segments must form an innermost prefix"));
                    }
                }
                SegmentKind::Const { value } => {
                    seen_finite = true;
                    if !(*value >= 0.0) || !value.is_finite() {
                        return Err(domain(format!("segment {i} value must be finite and nonnegative")));
                    }
                }
                SegmentKind::Tabulated { samples } => {
                    seen_finite = true;
                    if samples.len() < 2 {
                        return Err(domain(format!("segment {i} needs at least two samples")));
                    }
                    if samples[0][0] != s.r_lo || samples[samples.len() - 1][0] != s.r_hi {
                        return Err(domain(format!("segment {i} samples must span [r_lo, r_hi]")));
                    }
                    for w in samples.windows(2) {
                        if !(w[1][0] > w[0][0]) {
                            return Err(domain(format!("segment {i} sample radii must increase")));
                        }
                    }
                    if samples.iter().any(|s| !(s[1] >= 0.0) || !s[1].is_finite()) {
                        return Err(domain(format!("segment {i} samples must be finite and nonnegative")));
                    }
                }
            }
            r = s.r_hi;
        }
        Ok(())
    }

    /// Outer end `R₀` of the support.
    pub fn range(&self) -> f64 {
        self.segments.last().map(|s| s.r_hi).unwrap_or(0.0)
    }

    /// Radius of the hard core, zero if there is none.
    pub fn core_radius(&self) -> f64 {
        self.segments
            .iter()
            .take_while(|s| s.kind == SegmentKind::Hardcore)
            .last()
            .map(|s| s.r_hi)
            .unwrap_or(0.0)
    }

    /// True if the potential vanishes identically.
    pub fn is_zero(&self) -> bool {
        self.segments.iter().all(|s| match &s.kind {
            SegmentKind::Hardcore => false,
            SegmentKind::Const { value } => *value == 0.0,
            SegmentKind::Tabulated { samples } => samples.iter().all(|p| p[1] == 0.0),
        })
    }

    /// Value at `r`; `+∞` inside the hard core, right-continuous at segment ends.
    pub fn eval(&self, r: f64) -> f64 {
        for s in &self.segments {
            if r < s.r_hi {
                return eval_kind(&s.kind, r);
            }
        }
        0.0
    }

    /// Value at `r` taken from the left (left limit at segment ends).
    pub fn eval_left(&self, r: f64) -> f64 {
        for s in &self.segments {
            if r <= s.r_hi && r > s.r_lo {
                return eval_kind(&s.kind, r);
            }
        }
        if r <= 0.0 {
            return self.eval(0.0);
        }
        0.0
    }

    /// Segment ends and tabulation nodes, sorted.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b = vec![0.0];
        for s in &self.segments {
            if let SegmentKind::Tabulated { samples } = &s.kind {
                b.extend(samples.iter().skip(1).map(|p| p[0]));
            } else {
                b.push(s.r_hi);
            }
        }
        b.dedup();
        b
    }

    /// `∫_lo^hi r v(r) dr`, exact for the piecewise representation; `+∞` if it meets the core.
    pub fn moment1(&self, lo: f64, hi: f64) -> f64 {
        let mut total = 0.0;
        for s in &self.segments {
            let a = lo.max(s.r_lo);
            let b = hi.min(s.r_hi);
            if b <= a {
                continue;
            }
            match &s.kind {
                SegmentKind::Hardcore => return f64::INFINITY,
                SegmentKind::Const { value } => total += value * 0.5 * (b * b - a * a),
                SegmentKind::Tabulated { samples } => {
                    for w in samples.windows(2) {
                        let (x0, y0, x1, y1) = (w[0][0], w[0][1], w[1][0], w[1][1]);
                        let c = a.max(x0);
                        let d = b.min(x1);
                        if d <= c {
                            continue;
                        }
                        let slope = (y1 - y0) / (x1 - x0);
                        let icpt = y0 - slope * x0;
                        total += icpt * 0.5 * (d * d - c * c) + slope * (d * d * d - c * c * c) / 3.0;
                    }
                }
            }
        }
        total
    }

    /// `∫_{ℝ²} v(|x|) dx`.
    pub fn integral_2d(&self) -> f64 {
        2.0 * PI * self.moment1(0.0, self.range())
    }

    /// `v·θ(R₀' − r)`, keeping the representation on `[0, R₀']`.
    pub fn truncate(&self, r0: f64) -> Result<Self> {
        if !(r0 > 0.0) {
            return Err(domain("cutoff radius must be positive"));
        }
        if r0 >= self.range() {
            return Ok(self.clone());
        }
        let mut segs = Vec::new();
        for s in &self.segments {
            if s.r_lo >= r0 {
                break;
            }
            let hi = s.r_hi.min(r0);
            segs.push(Segment { r_lo: s.r_lo, r_hi: hi, kind: restrict_kind(&s.kind, s.r_lo, hi) });
        }
        Self::new(segs)
    }

    /// `v·θ(r − s)`; the part below `s` becomes zero.
    pub fn remove_inner(&self, s: f64) -> Result<Self> {
        if s <= 0.0 {
            return Ok(self.clone());
        }
        if s >= self.range() {
            return Err(domain("removing the whole support leaves the zero potential"));
        }
        let mut segs = vec![Segment { r_lo: 0.0, r_hi: s, kind: SegmentKind::Const { value: 0.0 } }];
        for seg in &self.segments {
            if seg.r_hi <= s {
                continue;
            }
            let lo = seg.r_lo.max(s);
            segs.push(Segment { r_lo: lo, r_hi: seg.r_hi, kind: restrict_kind(&seg.kind, lo, seg.r_hi) });
        }
        Self::new(segs)
    }

    /// Pointwise `min(v, cap)` on `[lo, hi)`; the potential is left unchanged elsewhere.
    pub(crate) fn capped_on(&self, lo: f64, hi: f64, cap: f64) -> Result<Self> {
        let mut cuts = vec![lo, hi];
        cuts.extend(self.breakpoints());
        cuts.retain(|&x| x >= 0.0 && x <= self.range());
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut segs = Vec::new();
        for seg in &self.segments {
            let mut inner: Vec<f64> = cuts.iter().copied().filter(|&x| x > seg.r_lo && x < seg.r_hi).collect();
            inner.insert(0, seg.r_lo);
            inner.push(seg.r_hi);
            for w in inner.windows(2) {
                let kind = restrict_kind(&seg.kind, w[0], w[1]);
                let inside = w[0] >= lo && w[1] <= hi;
                let kind = if inside {
                    match kind {
                        SegmentKind::Hardcore => SegmentKind::Const { value: cap },
                        SegmentKind::Const { value } => SegmentKind::Const { value: value.min(cap) },
                        SegmentKind::Tabulated { samples } => {
                            SegmentKind::Tabulated { samples: clip_linear(&samples, cap) }
                        }
                    }
                } else {
                    kind
                };
                segs.push(Segment { r_lo: w[0], r_hi: w[1], kind });
            }
        }
        Self::new(segs)
    }

    /// Replace everything below `lo` by zero (used after capping a hard core).
    pub(crate) fn zero_below(&self, lo: f64) -> Result<Self> {
        if lo <= 0.0 {
            return Ok(self.clone());
        }
        let mut segs = vec![Segment { r_lo: 0.0, r_hi: lo, kind: SegmentKind::Const { value: 0.0 } }];
        for seg in &self.segments {
            if seg.r_hi <= lo {
                continue;
            }
            let a = seg.r_lo.max(lo);
            segs.push(Segment { r_lo: a, r_hi: seg.r_hi, kind: restrict_kind(&seg.kind, a, seg.r_hi) });
        }
        Self::new(segs)
    }
}

fn eval_kind(kind: &SegmentKind, r: f64) -> f64 {
    match kind {
        SegmentKind::Hardcore => f64::INFINITY,
        SegmentKind::Const { value } => *value,
        SegmentKind::Tabulated { samples } => interp(samples, r),
    }
}

fn interp(samples: &[[f64; 2]], r: f64) -> f64 {
    let idx = samples.partition_point(|p| p[0] <= r);
    if idx == 0 {
        return samples[0][1];
    }
    if idx >= samples.len() {
        return samples[samples.len() - 1][1];
    }
    let (x0, y0) = (samples[idx - 1][0], samples[idx - 1][1]);
    let (x1, y1) = (samples[idx][0], samples[idx][1]);
    y0 + (y1 - y0) * (r - x0) / (x1 - x0)
}

fn restrict_kind(kind: &SegmentKind, lo: f64, hi: f64) -> SegmentKind {
    match kind {
        SegmentKind::Tabulated { samples } => {
            let mut s = vec![[lo, interp(samples, lo)]];
            s.extend(samples.iter().filter(|p| p[0] > lo && p[0] < hi).copied());
            s.push([hi, interp(samples, hi)]);
            SegmentKind::Tabulated { samples: s }
        }
        other => other.clone(),
    }
}

/// `min(f, cap)` of a piecewise linear function, inserting nodes where it crosses `cap`.
fn clip_linear(samples: &[[f64; 2]], cap: f64) -> Vec<[f64; 2]> {
    let mut out = vec![[samples[0][0], samples[0][1].min(cap)]];
    for w in samples.windows(2) {
        let (x0, y0, x1, y1) = (w[0][0], w[0][1], w[1][0], w[1][1]);
        if (y0 - cap) * (y1 - cap) < 0.0 {
            let x = x0 + (cap - y0) * (x1 - x0) / (y1 - y0);
            if x > x0 && x < x1 {
                out.push([x, cap]);
            }
        }
        out.push([x1, y1.min(cap)]);
    }
    out
}

/// One point of the zero-energy profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileSample {
    pub r: f64,
    pub g: f64,
    /// `r·g'(r)`.
    pub rg: f64,
}

/// Scattering length together with the normalised minimiser.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatteringResult {
    pub a: f64,
    pub r_used: f64,
    /// Profile normalised to `g(R) = 1`.
    pub g_samples: Vec<ProfileSample>,
    /// `2π/ln(R/a)`, the minimum of the variational functional.
    pub functional_value: f64,
    /// Set when `v ≡ 0` (then `a = 0` and `g ≡ 1`).
    pub degenerate: bool,
    /// Spread of `a` over the exterior extraction radii.
    pub a_spread: f64,
}

impl ScatteringResult {
    /// Normalised profile at `r`, by cubic Hermite interpolation in `ln r`.
    pub fn profile_at(&self, r: f64) -> f64 {
        let s = &self.g_samples;
        if r <= s[0].r {
            return s[0].g;
        }
        if r >= self.r_used {
            return s[s.len() - 1].g;
        }
        let i = s.partition_point(|p| p.r <= r).clamp(1, s.len() - 1);
        let (p0, p1) = (s[i - 1], s[i]);
        if p0.r <= 0.0 {
            let w = r / p1.r;
            return p0.g + (p1.g - p0.g) * w * w;
        }
        let (t0, t1) = (p0.r.ln(), p1.r.ln());
        let h = t1 - t0;
        if h <= 0.0 {
            return p1.g;
        }
        let u = (r.ln() - t0) / h;
        hermite(p0.g, p0.rg * h, p1.g, p1.rg * h, u)
    }
}

fn hermite(y0: f64, d0: f64, y1: f64, d1: f64, u: f64) -> f64 {
    let u2 = u * u;
    let u3 = u2 * u;
    (2.0 * u3 - 3.0 * u2 + 1.0) * y0 + (u3 - 2.0 * u2 + u) * d0 + (-2.0 * u3 + 3.0 * u2) * y1 + (u3 - u2) * d1
}

fn hermite_deriv(y0: f64, d0: f64, y1: f64, d1: f64, u: f64) -> f64 {
    let u2 = u * u;
    (6.0 * u2 - 6.0 * u) * y0 + (3.0 * u2 - 4.0 * u + 1.0) * d0 + (-6.0 * u2 + 6.0 * u) * y1 + (3.0 * u2 - 2.0 * u) * d1
}

const RTOL: f64 = 1e-10;

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrate `(g, G)` across `[t0, t1]` on which `v` is smooth; `v` is evaluated inside the interval only.
pub(crate) fn integrate_interval<F: Fn(f64) -> f64>(
    v: &F,
    t0: f64,
    t1: f64,
    mut y: [f64; 2],
    out: &mut Vec<ProfileSample>,
) -> Result<[f64; 2]> {
    let rhs = |t: f64, y: &[f64; 2]| -> [f64; 2] {
        let tc = t.clamp(t0, t1);
        let r = tc.exp();
        [y[1], 0.5 * r * r * v(r) * y[0]]
    };
    let mut t = t0;
    let mut h = ((t1 - t0) * 0.01).max(1e-6).min(t1 - t0);
    let mut steps = 0usize;
    while t < t1 {
        if t + h > t1 {
            h = t1 - t;
        }
        let mut k = [[0.0; 2]; 7];
        k[0] = rhs(t, &y);
        for s in 1..7 {
            let mut ys = y;
            for j in 0..s {
                ys[0] += h * A[s][j] * k[j][0];
                ys[1] += h * A[s][j] * k[j][1];
            }
            k[s] = rhs(t + C[s] * h, &ys);
        }
        let mut y5 = y;
        let mut y4 = y;
        for s in 0..7 {
            y5[0] += h * B5[s] * k[s][0];
            y5[1] += h * B5[s] * k[s][1];
            y4[0] += h * B4[s] * k[s][0];
            y4[1] += h * B4[s] * k[s][1];
        }
        let scale = |i: usize| 1e-300 + RTOL * y[i].abs().max(y5[i].abs()).max(1e-30 * (y[0].abs() + y[1].abs()));
        let err = ((y5[0] - y4[0]) / scale(0)).abs().max(((y5[1] - y4[1]) / scale(1)).abs());
        if err <= 1.0 || h < 1e-14 {
            t += h;
            y = y5;
            out.push(ProfileSample { r: t.exp(), g: y[0], rg: y[1] });
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= fac;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
        }
        steps += 1;
        if steps > 2_000_000 || !y[0].is_finite() || !y[1].is_finite() {
            return Err(Error::Solver("radial integration failed to meet tolerance".into()));
        }
    }
    Ok(y)
}

/// Number of exterior radii used to extract `a`.
const EXTRACTION_RADII: usize = 5;

/// Scattering length of `v` and the minimiser of the functional on the disk of radius `R`.
pub fn scattering_length(v: &RadialPotential, r: f64) -> Result<ScatteringResult> {
    let r0 = v.range();
    if !(r > r0) {
        return Err(precondition(format!("R = {r} must exceed the range R0 = {r0}")));
    }
    if v.is_zero() {
        let g_samples = vec![ProfileSample { r: 0.0, g: 1.0, rg: 0.0 }, ProfileSample { r, g: 1.0, rg: 0.0 }];
        return Ok(ScatteringResult { a: 0.0, r_used: r, g_samples, functional_value: 0.0, degenerate: true, a_spread: 0.0 });
    }
    let rc = v.core_radius();
    let breaks: Vec<f64> = v.breakpoints().into_iter().filter(|&b| b > rc).collect();
    let mut samples = Vec::new();
    let (mut y, mut r_from) = if rc > 0.0 {
        samples.push(ProfileSample { r: rc, g: 0.0, rg: rc });
        ([0.0, rc], rc)
    } else {
        let first = breaks[0];
        let r_start = first * 1e-9;
        let v0 = v.eval(0.0);
        samples.push(ProfileSample { r: 0.0, g: 1.0, rg: 0.0 });
        let g = 1.0 + v0 * r_start * r_start / 8.0;
        let gg = v0 * r_start * r_start / 4.0;
        samples.push(ProfileSample { r: r_start, g, rg: gg });
        ([g, gg], r_start)
    };
    for &b in &breaks {
        let mid = 0.5 * (r_from + b);
        let seg = v
            .segments
            .iter()
            .find(|s| mid >= s.r_lo && mid < s.r_hi)
            .map(|s| s.kind.clone())
            .unwrap_or(SegmentKind::Const { value: 0.0 });
        let f = |x: f64| eval_kind(&seg, x);
        y = integrate_interval(&f, r_from.ln(), b.ln(), y, &mut samples)?;
        if let Some(last) = samples.last_mut() {
            last.r = b;
        }
        r_from = b;
    }
    let (g0, gg0) = (y[0], y[1]);
    if !(gg0 > 0.0) {
        return Err(Error::Solver("exterior slope is not positive".into()));
    }
    // exterior: g(r) = g0 + G ln(r/R0)
    let ext = |x: f64| g0 + gg0 * (x / r0).ln();
    let mut a_vals = Vec::with_capacity(EXTRACTION_RADII);
    for k in 1..=EXTRACTION_RADII {
        let rk = r0 * (r / r0).powf(k as f64 / EXTRACTION_RADII as f64);
        a_vals.push(rk * (-ext(rk) / gg0).exp());
    }
    let a = a_vals.iter().sum::<f64>() / a_vals.len() as f64;
    let a_spread = a_vals.iter().fold(0.0f64, |m, &x| m.max((x - a).abs()));
    let n_ext = 64;
    for k in 1..=n_ext {
        let rk = if k == n_ext { r } else { r0 * (r / r0).powf(k as f64 / n_ext as f64) };
        samples.push(ProfileSample { r: rk, g: ext(rk), rg: gg0 });
    }
    let norm = ext(r);
    for s in samples.iter_mut() {
        s.g /= norm;
        s.rg /= norm;
    }
    Ok(ScatteringResult {
        a,
        r_used: r,
        g_samples: samples,
        functional_value: 2.0 * PI / (r / a).ln(),
        degenerate: false,
        a_spread,
    })
}

const GL5_X: [f64; 5] = [
    -0.906179845938663992797626878299392,
    -0.538469310105683091036314420700208,
    0.0,
    0.538469310105683091036314420700208,
    0.906179845938663992797626878299392,
];
const GL5_W: [f64; 5] = [
    0.236926885056189087514264040719917,
    0.478628670499366468041291514835638,
    0.568888888888888888888888888888889,
    0.478628670499366468041291514835638,
    0.236926885056189087514264040719917,
];

/// `∫_{B_R} |∇g|² + (v/2) g²` evaluated by quadrature on the stored profile.
pub fn functional_energy(v: &RadialPotential, res: &ScatteringResult) -> f64 {
    let s = &res.g_samples;
    let mut total = 0.0;
    for w in s.windows(2) {
        let (p0, p1) = (w[0], w[1]);
        if p1.r <= p0.r {
            continue;
        }
        if p0.r <= 0.0 {
            // regular start: the first disk has radius 1e-9 of the first feature
            continue;
        }
        let (t0, t1) = (p0.r.ln(), p1.r.ln());
        let h = t1 - t0;
        // derivative of G in t, one-sided values inside the interval
        let v0 = v.eval(p0.r);
        let v1 = v.eval_left(p1.r);
        let d0 = 0.5 * p0.r * p0.r * v0 * p0.g;
        let d1 = 0.5 * p1.r * p1.r * v1 * p1.g;
        let mut part = 0.0;
        for k in 0..5 {
            let u = 0.5 * (GL5_X[k] + 1.0);
            let t = t0 + u * h;
            let r = t.exp();
            let g = hermite(p0.g, p0.rg * h, p1.g, p1.rg * h, u);
            let gg = if v0.is_finite() && v1.is_finite() {
                hermite(p0.rg, d0 * h, p1.rg, d1 * h, u)
            } else {
                hermite_deriv(p0.g, p0.rg * h, p1.g, p1.rg * h, u) / h
            };
            let vv = v.eval(r);
            let vv = if vv.is_finite() { vv } else { 0.0 };
            part += GL5_W[k] * 0.5 * (gg * gg + 0.5 * r * r * vv * g * g);
        }
        total += part * h;
    }
    2.0 * PI * total
}

/// `2π ∫_{max(b, from)}^{R₀} v(r) ln²(r/b) r dr`.
pub fn log_moment(v: &RadialPotential, b: f64, from: f64) -> Result<f64> {
    if !(b > 0.0) {
        return Err(domain(format!("log moment needs b > 0, got {b}")));
    }
    let lo = b.max(from);
    let hi = v.range();
    if lo >= hi {
        return Ok(0.0);
    }
    if lo < v.core_radius() {
        return Ok(f64::INFINITY);
    }
    let mut brk: Vec<f64> = v.breakpoints().into_iter().filter(|&x| x > lo && x < hi).collect();
    brk.insert(0, lo);
    brk.push(hi);
    let q = integrate_with_breaks(
        |r| {
            let l = (r / b).ln();
            v.eval(r) * l * l * r
        },
        &brk,
        Tolerance::new(1e-15, 1e-12),
    )?;
    Ok(2.0 * PI * q.value)
}

/// `2π ∫_b^{R₀} v(r) ln²(r/b) r dr`.
pub fn finiteness_integral(v: &RadialPotential, b: f64) -> Result<f64> {
    log_moment(v, b, b)
}
