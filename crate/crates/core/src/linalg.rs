//! Two-dimensional FFTs on square grids and a Lanczos solver for the lowest
//! eigenvalue of a real symmetric operator given as a matrix-vector product.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Row-major `n × n` complex FFT.
pub struct Fft2 {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 { n, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) }
    }

    fn apply(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        plan.process(data);
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for c in 0..n {
            for r in 0..n {
                col[r] = data[r * n + c];
            }
            plan.process(&mut col);
            for r in 0..n {
                data[r * n + c] = col[r];
            }
        }
    }

    /// `X[k] = Σ_j x[j] e^{−2πi k·j/n}` (unnormalised).
    pub fn forward(&self, data: &mut [Complex64]) {
        self.apply(data, &self.fwd);
    }

    /// `x[j] = Σ_k X[k] e^{+2πi k·j/n}` (unnormalised).
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.apply(data, &self.inv);
    }
}

/// Signed frequency index for position `k` of an `n`-point transform.
pub fn signed_index(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EigenEstimate {
    pub value: f64,
    /// `‖A x − θ x‖` for the returned Ritz pair.
    pub residual: f64,
    pub iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Lowest eigenvalue of a real symmetric operator of dimension `n` by restarted
/// Lanczos with full reorthogonalisation. Stops once the Ritz residual drops
/// below `tol`.
pub fn lanczos_lowest<F>(apply: F, n: usize, tol: f64, seed: u64) -> Result<EigenEstimate>
where
    F: Fn(&[f64], &mut [f64]),
{
    let max_krylov = n.min(240);
    let max_restarts = 60;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut start: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
    let mut total = 0usize;
    let mut best = EigenEstimate { value: f64::INFINITY, residual: f64::INFINITY, iterations: 0 };
    for _ in 0..max_restarts {
        let nrm = norm(&start);
        let mut basis: Vec<Vec<f64>> = vec![start.iter().map(|x| x / nrm).collect()];
        let mut alpha = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        let mut w = vec![0.0; n];
        let mut ritz: Option<(f64, f64, Vec<f64>)> = None;
        for k in 0..max_krylov {
            apply(&basis[k], &mut w);
            total += 1;
            let a = dot(&w, &basis[k]);
            alpha.push(a);
            // two passes of classical Gram–Schmidt against the whole basis
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(&w, q);
                    for (wi, qi) in w.iter_mut().zip(q) {
                        *wi -= c * qi;
                    }
                }
            }
            let b = norm(&w);
            let m = alpha.len();
            let check = m == max_krylov || b < 1e-14 || m % 10 == 0 || m == n;
            if check {
                let mut t = DMatrix::<f64>::zeros(m, m);
                for i in 0..m {
                    t[(i, i)] = alpha[i];
                    if i + 1 < m {
                        t[(i, i + 1)] = beta[i];
                        t[(i + 1, i)] = beta[i];
                    }
                }
                let eig = SymmetricEigen::new(t);
                let (imin, &theta) = eig
                    .eigenvalues
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.total_cmp(b.1))
                    .expect("non-empty spectrum");
                let y = eig.eigenvectors.column(imin);
                let res = (b * y[m - 1]).abs();
                let mut x = vec![0.0; n];
                for (i, q) in basis.iter().enumerate() {
                    for (xi, qi) in x.iter_mut().zip(q) {
                        *xi += y[i] * qi;
                    }
                }
                ritz = Some((theta, res, x));
                if res <= tol || b < 1e-14 || m == n {
                    let est = EigenEstimate { value: theta, residual: res, iterations: total };
                    return Ok(est);
                }
            }
            if m == max_krylov {
                break;
            }
            basis.push(w.iter().map(|x| x / b).collect());
            beta.push(b);
        }
        let (theta, res, x) = ritz.expect("ritz pair computed at restart");
        if res < best.residual {
            best = EigenEstimate { value: theta, residual: res, iterations: total };
        }
        start = x;
    }
    Err(Error::Solver(format!(
        "Lanczos did not converge after {} products: best residual {:e} at {}",
        total, best.residual, best.value
    )))
}
