//! Small truncated Fock spaces for checking the coherent-state and entropy inequalities.
//!
//! Everything here is dense linear algebra on at most `13² = 169` dimensions.

use crate::error::{domain, precondition, Error, Result};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);

/// Allowed tail weight of a coherent state beyond the cutoff.
pub const LEAKAGE_TOL: f64 = 1e-8;
/// Extra levels used when exponentiating the Weyl generator.
const EXT_LEVELS: usize = 40;

/// Bosonic Fock space with `modes ≤ 2` modes, each truncated at occupation `nmax ≤ 12`.
#[derive(Clone, Debug)]
pub struct FockSpace {
    pub modes: usize,
    pub nmax: usize,
    annihilators: Vec<DMatrix<Complex64>>,
}

fn single_mode_annihilator(nmax: usize) -> DMatrix<Complex64> {
    let d = nmax + 1;
    DMatrix::from_fn(d, d, |i, j| if j == i + 1 { Complex64::from((j as f64).sqrt()) } else { C0 })
}

/// Kronecker product with the first factor as the slow index.
pub fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a.kronecker(b)
}

impl FockSpace {
    pub fn new(modes: usize, nmax: usize) -> Result<Self> {
        if !(1..=2).contains(&modes) || !(1..=12).contains(&nmax) {
            return Err(domain(format!("need 1 <= modes <= 2 and 1 <= nmax <= 12, got modes = {modes}, nmax = {nmax}")));
        }
        let a = single_mode_annihilator(nmax);
        let id = DMatrix::<Complex64>::identity(nmax + 1, nmax + 1);
        let annihilators = if modes == 1 { vec![a] } else { vec![kron(&a, &id), kron(&id, &a)] };
        Ok(FockSpace { modes, nmax, annihilators })
    }

    pub fn dim(&self) -> usize {
        (self.nmax + 1).pow(self.modes as u32)
    }

    pub fn annihilator(&self, mode: usize) -> &DMatrix<Complex64> {
        &self.annihilators[mode]
    }

    /// Total number operator.
    pub fn number(&self) -> DMatrix<Complex64> {
        self.annihilators.iter().map(|a| a.adjoint() * a).fold(DMatrix::zeros(self.dim(), self.dim()), |s, n| s + n)
    }

    /// Occupation of `mode` in basis state `index`.
    pub fn occupation(&self, index: usize, mode: usize) -> usize {
        let d = self.nmax + 1;
        if self.modes == 1 {
            index
        } else if mode == 0 {
            index / d
        } else {
            index % d
        }
    }

    /// Largest entry of `[a_i, a_j†] − δ_ij` over basis states where every mode is below the cutoff.
    pub fn ccr_defect(&self) -> f64 {
        let dim = self.dim();
        let inner: Vec<usize> = (0..dim).filter(|&k| (0..self.modes).all(|m| self.occupation(k, m) < self.nmax)).collect();
        let mut worst: f64 = 0.0;
        for (i, a) in self.annihilators.iter().enumerate() {
            for (j, b) in self.annihilators.iter().enumerate() {
                let bd = b.adjoint();
                let c = a * &bd - &bd * a;
                for &r in &inner {
                    for &s in &inner {
                        let want = if i == j && r == s { C1 } else { C0 };
                        worst = worst.max((c[(r, s)] - want).norm());
                    }
                }
            }
        }
        worst
    }

    /// Single-mode Hamiltonian `ω a†a + (g/2) a†a†aa` for mode 0.
    pub fn quartic_hamiltonian(&self, omega: f64, g: f64) -> DMatrix<Complex64> {
        let a = &self.annihilators[0];
        let ad = a.adjoint();
        let n = &ad * a;
        let pair = &ad * &ad * a * a;
        n * Complex64::from(omega) + pair * Complex64::from(0.5 * g)
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    m: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validate `m` as a density matrix to 1e-12.
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if !m.is_square() {
            return Err(domain("density matrix must be square"));
        }
        let herm = (&m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > 1e-12 {
            return Err(domain(format!("matrix is not Hermitian (defect {herm:e})")));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > 1e-12 || tr.im.abs() > 1e-12 {
            return Err(domain(format!("trace must be 1, got {tr}")));
        }
        let lo = SymmetricEigen::new(m.clone()).eigenvalues.min();
        if lo < -1e-12 {
            return Err(domain(format!("matrix has negative eigenvalue {lo:e}")));
        }
        Ok(DensityMatrix { m })
    }

    /// Normalise `m` by its trace and validate.
    pub fn from_unnormalized(m: DMatrix<Complex64>) -> Result<Self> {
        let tr = m.trace();
        let herm = (&m + m.adjoint()) * Complex64::from(0.5);
        Self::new(herm / tr)
    }

    /// `|ψ⟩⟨ψ|` for a normalised `ψ`.
    pub fn pure(psi: &DVector<Complex64>) -> Result<Self> {
        let nrm = psi.norm();
        if (nrm - 1.0).abs() > 1e-12 {
            return Err(domain(format!("state vector must be normalised, got norm {nrm}")));
        }
        Ok(DensityMatrix { m: psi * psi.adjoint() })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    /// `Tr(ρ A)`.
    pub fn expect(&self, a: &DMatrix<Complex64>) -> Complex64 {
        (&self.m * a).trace()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        SymmetricEigen::new(self.m.clone()).eigenvalues.iter().copied().collect()
    }

    /// Reduced states `(Tr₂ ρ, Tr₁ ρ)` on `d1 ⊗ d2`.
    pub fn partial_traces(&self, d1: usize, d2: usize) -> Result<(DensityMatrix, DensityMatrix)> {
        if d1 * d2 != self.dim() {
            return Err(domain(format!("{d1} x {d2} does not match dimension {}", self.dim())));
        }
        let mut r1 = DMatrix::zeros(d1, d1);
        let mut r2 = DMatrix::zeros(d2, d2);
        for i in 0..d1 {
            for k in 0..d1 {
                for j in 0..d2 {
                    r1[(i, k)] += self.m[(i * d2 + j, k * d2 + j)];
                }
            }
        }
        for j in 0..d2 {
            for l in 0..d2 {
                for i in 0..d1 {
                    r2[(j, l)] += self.m[(i * d2 + j, i * d2 + l)];
                }
            }
        }
        Ok((DensityMatrix { m: r1 }, DensityMatrix { m: r2 }))
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix { m: kron(&self.m, &other.m) }
    }
}

/// Amplitudes `e^{−|z|²/2} zⁿ/√n!` for `n = 0..=nmax`, without renormalisation.
pub fn coherent_amplitudes(nmax: usize, z: Complex64) -> DVector<Complex64> {
    let mut v = DVector::zeros(nmax + 1);
    let mut c = Complex64::from((-0.5 * z.norm_sqr()).exp());
    for n in 0..=nmax {
        v[n] = c;
        c = c * z / ((n + 1) as f64).sqrt();
    }
    v
}

fn weyl_vector(nmax: usize, z: Complex64) -> Result<DVector<Complex64>> {
    let ext = nmax + EXT_LEVELS;
    let a = single_mode_annihilator(ext);
    let gen = a.adjoint() * z - &a * z.conj();
    let u = gen.exp();
    let col = u.column(0);
    let tail: f64 = (nmax + 1..=ext).map(|n| col[n].norm_sqr()).sum();
    if tail > LEAKAGE_TOL {
        return Err(precondition(format!("coherent state |z|^2 = {} leaks {tail:e} beyond nmax = {nmax}", z.norm_sqr())));
    }
    let v = DVector::from_iterator(nmax + 1, col.iter().take(nmax + 1).copied());
    let nrm = v.norm();
    Ok(v / Complex64::from(nrm))
}

/// Coherent state vector `U(z)|0⟩`, computed by exponentiating the Weyl generator
/// on an enlarged cutoff, projected onto the space and renormalised.
pub fn coherent_vector(space: &FockSpace, z: &[Complex64]) -> Result<DVector<Complex64>> {
    if z.len() != space.modes {
        return Err(domain(format!("need {} amplitudes, got {}", space.modes, z.len())));
    }
    let total: f64 = z.iter().map(|w| w.norm_sqr()).sum();
    if total > space.nmax as f64 / 4.0 {
        return Err(precondition(format!("|z|^2 = {total} exceeds nmax/4 = {}", space.nmax as f64 / 4.0)));
    }
    let mut v = weyl_vector(space.nmax, z[0])?;
    if space.modes == 2 {
        v = v.kronecker(&weyl_vector(space.nmax, z[1])?);
    }
    Ok(v)
}

pub fn coherent_state(space: &FockSpace, z: &[Complex64]) -> Result<DensityMatrix> {
    DensityMatrix::pure(&coherent_vector(space, z)?)
}

/// Upper (anti-normally ordered) symbol of the single-mode quartic Hamiltonian.
pub fn upper_symbol(omega: f64, g: f64, r: f64) -> f64 {
    omega * (r - 1.0) + 0.5 * g * (r * r - 4.0 * r + 2.0)
}

/// Lower (normally ordered) symbol `ω|z|² + (g/2)|z|⁴`.
pub fn lower_symbol(omega: f64, g: f64, r: f64) -> f64 {
    omega * r + 0.5 * g * r * r
}

/// Gauss–Laguerre nodes and weights for `∫₀^∞ e^{−t} f(t) dt`.
pub fn gauss_laguerre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            (2 * i + 1) as f64
        } else if i + 1 == j {
            (i + 1) as f64
        } else if j + 1 == i {
            (j + 1) as f64
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| (eig.eigenvalues[k], eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Product rule for `∫ f(z) d²z/π`: Gauss–Laguerre in `|z|²` (scaled by `scale`) times the trapezoid in phase.
#[derive(Clone, Debug)]
pub struct PlaneQuadrature {
    pub radial: usize,
    pub phase: usize,
    pub scale: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl PlaneQuadrature {
    pub fn new(radial: usize, phase: usize, scale: f64) -> Result<Self> {
        if radial == 0 || phase == 0 || !(scale > 0.0) {
            return Err(domain("quadrature needs positive node counts and scale"));
        }
        let (nodes, weights) = gauss_laguerre(radial);
        Ok(PlaneQuadrature { radial, phase, scale, nodes, weights })
    }

    /// Points `(z, weight)`; the weights sum to `∫ e^{−|z|²/scale} d²z/π`.
    pub fn points(&self) -> Vec<(Complex64, f64)> {
        let mut out = Vec::with_capacity(self.radial * self.phase);
        for (t, w) in self.nodes.iter().zip(&self.weights) {
            let r = self.scale * t;
            for k in 0..self.phase {
                let th = 2.0 * PI * k as f64 / self.phase as f64;
                out.push((Complex64::from_polar(r.sqrt(), th), self.scale * w * t.exp() / self.phase as f64));
            }
        }
        out
    }

    /// `∫ f(z) d²z/π`.
    pub fn integrate<F: Fn(Complex64) -> f64>(&self, f: F) -> f64 {
        let mut sum = 0.0;
        for (t, w) in self.nodes.iter().zip(&self.weights) {
            let r = self.scale * t;
            let mut ring = 0.0;
            for k in 0..self.phase {
                let th = 2.0 * PI * k as f64 / self.phase as f64;
                ring += f(Complex64::from_polar(r.sqrt(), th));
            }
            // e^{t} f is evaluated as exp(t + ln f) to avoid overflow on the outer nodes
            if ring > 0.0 {
                sum += w * (t + (ring / self.phase as f64).ln()).exp();
            } else if ring != 0.0 {
                sum += w * t.exp() * ring / self.phase as f64;
            }
        }
        self.scale * sum
    }
}

/// `∫ |z⟩⟨z| d²z/π` restricted to the single-mode truncation.
pub fn resolution_of_identity(nmax: usize, quad: &PlaneQuadrature) -> DMatrix<Complex64> {
    let d = nmax + 1;
    let mut acc = DMatrix::zeros(d, d);
    for (z, w) in quad.points() {
        let v = coherent_amplitudes(nmax, z);
        acc += &v * v.adjoint() * Complex64::from(w);
    }
    acc
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BerezinLieb {
    pub omega: f64,
    pub g: f64,
    pub beta: f64,
    pub nmax: usize,
    /// `Tr exp(−βℍ)` on the truncation.
    pub lhs: f64,
    /// `∫ exp(−β H^s(z)) d²z/π`.
    pub rhs: f64,
    pub margin: f64,
    /// Difference between the default rule and one with doubled radial nodes.
    pub quadrature_error: f64,
    /// Boltzmann weight of the top level relative to the partition function.
    pub tail_mass: f64,
}

/// Default plane rule: 128 radial × 64 phase nodes.
pub fn default_quadrature(omega: f64, g: f64, beta: f64) -> Result<PlaneQuadrature> {
    PlaneQuadrature::new(128, 64, symbol_scale(omega, g, beta))
}

fn symbol_scale(omega: f64, g: f64, beta: f64) -> f64 {
    // decay length of exp(−β H^s) in |z|²
    let lin = beta * (omega - 2.0 * g).max(0.0);
    let quad = (0.5 * beta * g).sqrt();
    1.0 / (lin + quad).max(1e-3)
}

/// `RHS − LHS` of the Berezin–Lieb inequality for the single-mode quartic Hamiltonian.
pub fn berezin_lieb_margin(space: &FockSpace, omega: f64, g: f64, beta: f64, quad: &PlaneQuadrature) -> Result<BerezinLieb> {
    if !(beta > 0.0) || !(omega > 0.0 || g > 0.0) || g < 0.0 || omega < 0.0 {
        return Err(domain(format!("need beta > 0, omega, g >= 0 not both zero; got omega = {omega}, g = {g}, beta = {beta}")));
    }
    if space.modes != 1 {
        return Err(domain("Berezin–Lieb check is single-mode"));
    }
    let h = space.quartic_hamiltonian(omega, g);
    let levels = SymmetricEigen::new(h).eigenvalues;
    let weights: Vec<f64> = levels.iter().map(|e| (-beta * e).exp()).collect();
    let lhs: f64 = weights.iter().sum();
    let top = levels.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tail_mass = (-beta * top).exp() / lhs;
    if tail_mass > LEAKAGE_TOL {
        return Err(precondition(format!("thermal weight {tail_mass:e} at the cutoff exceeds {LEAKAGE_TOL:e}; raise nmax")));
    }
    let f = |z: Complex64| (-beta * upper_symbol(omega, g, z.norm_sqr())).exp();
    let rhs = quad.integrate(f);
    let fine = PlaneQuadrature::new(2 * quad.radial, quad.phase, quad.scale)?.integrate(f);
    let quadrature_error = (fine - rhs).abs();
    if quadrature_error > LEAKAGE_TOL * rhs.abs().max(1.0) {
        return Err(precondition(format!("z-quadrature unresolved: error {quadrature_error:e}")));
    }
    Ok(BerezinLieb { omega, g, beta, nmax: space.nmax, lhs, rhs, margin: rhs - lhs, quadrature_error, tail_mass })
}

/// `S(γ‖ω) = Tr γ(ln γ − ln ω)`; support violations are reported as an error.
pub fn relative_entropy(gamma: &DensityMatrix, omega: &DensityMatrix) -> Result<f64> {
    if gamma.dim() != omega.dim() {
        return Err(domain("relative entropy needs equal dimensions"));
    }
    const TINY: f64 = 1e-14;
    let eg = SymmetricEigen::new(gamma.m.clone());
    let s_gamma: f64 = eg.eigenvalues.iter().filter(|&&l| l > TINY).map(|&l| l * l.ln()).sum();
    let eo = SymmetricEigen::new(omega.m.clone());
    let mut cross = 0.0;
    for (k, &mu) in eo.eigenvalues.iter().enumerate() {
        let v = eo.eigenvectors.column(k);
        let p = (v.adjoint() * &gamma.m * v)[(0, 0)].re;
        if mu <= TINY {
            if p > 1e-10 {
                return Err(Error::Degenerate(format!("support violation: weight {p:e} on the kernel of omega (S = +inf)")));
            }
            continue;
        }
        cross += p * mu.ln();
    }
    Ok(s_gamma - cross)
}

/// `‖A‖₁` of a Hermitian matrix.
pub fn trace_norm(a: &DMatrix<Complex64>) -> f64 {
    SymmetricEigen::new(a.clone()).eigenvalues.iter().map(|l| l.abs()).sum()
}

/// `S(γ‖ω) − ½‖γ − ω‖₁²`.
pub fn pinsker_margin(gamma: &DensityMatrix, omega: &DensityMatrix) -> Result<f64> {
    let s = relative_entropy(gamma, omega)?;
    let t = trace_norm(&(&gamma.m - &omega.m));
    Ok(s - 0.5 * t * t)
}

/// `(S(Γ‖Ω₁⊗Ω₂), S(Γ₁‖Ω₁) + S(Γ₂‖Ω₂))` with `Γᵢ` the marginals of `Γ`.
pub fn superadditivity_check(gamma: &DensityMatrix, omega1: &DensityMatrix, omega2: &DensityMatrix) -> Result<(f64, f64)> {
    let (g1, g2) = gamma.partial_traces(omega1.dim(), omega2.dim())?;
    let lhs = relative_entropy(gamma, &omega1.tensor(omega2))?;
    let rhs = relative_entropy(&g1, omega1)? + relative_entropy(&g2, omega2)?;
    Ok((lhs, rhs))
}

/// Full-rank random state `GG†/Tr` from a complex Gaussian matrix.
pub fn random_density<R: Rng>(dim: usize, rng: &mut R) -> DensityMatrix {
    let g = DMatrix::from_fn(dim, dim, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let m = &g * g.adjoint();
    let tr = m.trace();
    DensityMatrix { m: m / tr }
}
