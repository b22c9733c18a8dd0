//! Reference solvers written independently of the library: dense Fock-basis
//! dynamics for the two-site model, a plain Lanczos on the finite-difference
//! helium Hamiltonian, and a dense-diagonalisation Hartree-exchange SCF.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Two-site Rabi model in the basis |config⟩ ⊗ |n⟩, n = 0..n_photons:
/// H = H_hop + ω(n + ½) − ωλ X p̂ + ½λ²X², p̂ = (a + a†)/√(2ω).
pub struct FockTwoSite {
    pub hamiltonian: DMatrix<f64>,
    pub dipole: Vec<f64>,
    pub dim: usize,
}

impl FockTwoSite {
    pub fn new(hopping: f64, omega: f64, lambda: f64, n_photons: usize) -> Self {
        let m = n_photons + 1;
        let dim = 3 * m;
        let idx = |c: usize, n: usize| c * m + n;
        let x = [-1.0, 0.0, 1.0];
        let t = -std::f64::consts::SQRT_2 * hopping;
        let mut h = DMatrix::<f64>::zeros(dim, dim);
        let mut d = vec![0.0; dim];
        for c in 0..3 {
            for n in 0..m {
                let i = idx(c, n);
                h[(i, i)] = omega * (n as f64 + 0.5) + 0.5 * lambda * lambda * x[c] * x[c];
                d[i] = x[c];
                if n + 1 < m {
                    let j = idx(c, n + 1);
                    let p = ((n + 1) as f64).sqrt() / (2.0 * omega).sqrt();
                    h[(i, j)] = -omega * lambda * x[c] * p;
                    h[(j, i)] = h[(i, j)];
                }
            }
        }
        for n in 0..m {
            for (a, b) in [(0, 1), (1, 2)] {
                h[(idx(a, n), idx(b, n))] = t;
                h[(idx(b, n), idx(a, n))] = t;
            }
        }
        Self { hamiltonian: h, dipole: d, dim }
    }

    /// Rabi initial state: doubly occupied orbital (½, √¾) ⊗ vacuum.
    pub fn initial_state(&self) -> DVector<Complex64> {
        let (a, b) = (0.5, 0.75f64.sqrt());
        let m = self.dim / 3;
        let mut v = DVector::from_element(self.dim, Complex64::new(0.0, 0.0));
        v[0] = (a * a).into();
        v[m] = (std::f64::consts::SQRT_2 * a * b).into();
        v[2 * m] = (b * b).into();
        v
    }

    /// exp(−iHτ) by scaling and squaring of a Taylor series.
    pub fn propagator(&self, tau: f64) -> DMatrix<Complex64> {
        let a = self.hamiltonian.map(|h| Complex64::new(0.0, -h * tau));
        let norm = a.iter().map(|z| z.norm()).fold(0.0, f64::max) * self.dim as f64;
        let squarings = norm.log2().ceil().max(0.0) as i32 + 1;
        let a = a / Complex64::new(2f64.powi(squarings), 0.0);
        let mut term = DMatrix::<Complex64>::identity(self.dim, self.dim);
        let mut sum = term.clone();
        for k in 1..=24 {
            term = &term * &a / Complex64::new(k as f64, 0.0);
            sum += &term;
        }
        for _ in 0..squarings {
            sum = &sum * &sum;
        }
        sum
    }

    /// ⟨X⟩ at t = 0, τ, 2τ, …, (samples − 1)τ.
    pub fn dipole_trace(&self, tau: f64, samples: usize) -> Vec<f64> {
        let u = self.propagator(tau);
        let mut psi = self.initial_state();
        let mut out = Vec::with_capacity(samples);
        for _ in 0..samples {
            out.push(psi.iter().zip(&self.dipole).map(|(z, x)| z.norm_sqr() * x).sum());
            psi = &u * psi;
        }
        out
    }
}

/// Number of eigenvalues below `x` of the symmetric tridiagonal matrix
/// (Sturm sequence count).
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let b2 = if i > 0 { off[i - 1] * off[i - 1] } else { 0.0 };
        q = diag[i] - x - if i > 0 { b2 / q } else { 0.0 };
        if q == 0.0 {
            q = -1e-300;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Lowest eigenvalue of a symmetric tridiagonal matrix by bisection.
pub fn tridiagonal_lowest(diag: &[f64], off: &[f64]) -> f64 {
    let radius = |i: usize| {
        (if i > 0 { off[i - 1].abs() } else { 0.0 }) + (if i < off.len() { off[i].abs() } else { 0.0 })
    };
    let mut lo = (0..diag.len()).map(|i| diag[i] - radius(i)).fold(f64::INFINITY, f64::min);
    let mut hi = (0..diag.len()).map(|i| diag[i] + radius(i)).fold(f64::NEG_INFINITY, f64::max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Normalised eigenvector of a symmetric tridiagonal matrix for a known
/// eigenvalue, by inverse iteration with the Thomas algorithm.
pub fn tridiagonal_vector(diag: &[f64], off: &[f64], value: f64) -> Vec<f64> {
    let n = diag.len();
    let shift = value - 1e-12 * (1.0 + value.abs());
    let mut v = vec![1.0; n];
    for _ in 0..3 {
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        for i in 0..n {
            let a = if i > 0 { off[i - 1] } else { 0.0 };
            let denom = diag[i] - shift - if i > 0 { a * c[i - 1] } else { 0.0 };
            if i + 1 < n {
                c[i] = off[i] / denom;
            }
            d[i] = (v[i] - if i > 0 { a * d[i - 1] } else { 0.0 }) / denom;
        }
        for i in (0..n - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
        v = d.iter().map(|x| x / norm).collect();
    }
    v
}

fn soft_v(x: f64) -> f64 {
    -2.0 / (x * x + 1.0).sqrt()
}

fn soft_w(x: f64) -> f64 {
    1.0 / (x * x + 1.0).sqrt()
}

/// Interior points of a hard-wall grid of `n` points on [−l, l].
pub fn interior(l: f64, n: usize) -> (Vec<f64>, f64) {
    let dx = 2.0 * l / (n - 1) as f64;
    ((1..n - 1).map(|i| -l + i as f64 * dx).collect(), dx)
}

/// Two-electron finite-difference Hamiltonian on the interior points,
/// applied to ψ(x₁, x₂) stored row-major.
fn helium_apply(x: &[f64], dx: f64, psi: &[f64], out: &mut [f64]) {
    let m = x.len();
    let c = 0.5 / (dx * dx);
    for i in 0..m {
        for j in 0..m {
            let k = i * m + j;
            let mut acc = (4.0 * c + soft_v(x[i]) + soft_v(x[j]) + soft_w(x[i] - x[j])) * psi[k];
            if i > 0 {
                acc -= c * psi[k - m];
            }
            if i + 1 < m {
                acc -= c * psi[k + m];
            }
            if j > 0 {
                acc -= c * psi[k - 1];
            }
            if j + 1 < m {
                acc -= c * psi[k + 1];
            }
            out[k] = acc;
        }
    }
}

/// Projector on exchange-symmetric states with inversion parity `sign`.
fn project(psi: &mut [f64], m: usize, sign: f64) {
    let orig = psi.to_vec();
    for i in 0..m {
        for j in 0..m {
            let swap = orig[j * m + i];
            let inv = orig[(m - 1 - i) * m + (m - 1 - j)];
            let both = orig[(m - 1 - j) * m + (m - 1 - i)];
            psi[i * m + j] = 0.25 * (orig[i * m + j] + swap + sign * (inv + both));
        }
    }
}

/// Lowest eigenvalue of the singlet helium Hamiltonian in the even
/// (`sign = 1`) or odd (`sign = −1`) inversion sector, by Lanczos with full
/// reorthogonalisation and a tridiagonal solve by nalgebra.
pub fn helium_lowest(l: f64, n: usize, sign: f64, iterations: usize) -> f64 {
    let (x, dx) = interior(l, n);
    let m = x.len();
    let dim = m * m;
    let mut v: Vec<f64> = (0..dim)
        .map(|k| {
            let (a, b) = (x[k / m], x[k % m]);
            (-(a * a + b * b) / 2.0).exp() * (1.0 + 0.3 * a + 0.2 * b + 0.1 * a * b)
        })
        .collect();
    project(&mut v, m, sign);
    let nrm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    v.iter_mut().for_each(|a| *a /= nrm);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let (mut alpha, mut beta) = (Vec::new(), Vec::new());
    let mut w = vec![0.0; dim];
    for _ in 0..iterations {
        helium_apply(&x, dx, &v, &mut w);
        project(&mut w, m, sign);
        let a: f64 = v.iter().zip(&w).map(|(p, q)| p * q).sum();
        alpha.push(a);
        basis.push(v.clone());
        for b in &basis {
            let c: f64 = b.iter().zip(&w).map(|(p, q)| p * q).sum();
            w.iter_mut().zip(b).for_each(|(q, p)| *q -= c * p);
        }
        let bnorm = w.iter().map(|a| a * a).sum::<f64>().sqrt();
        if bnorm < 1e-13 {
            break;
        }
        beta.push(bnorm);
        v = w.iter().map(|a| a / bnorm).collect();
    }
    tridiagonal_lowest(&alpha, &beta[..alpha.len() - 1])
}

/// Doubly occupied orbital of the Hartree-exchange problem
/// (−½∂² + v + ½∫n w)φ = εφ on the interior points, with n = 2|φ|²; plain
/// linear mixing of the density until the change is below `tol`. Returns
/// the density on the interior points.
pub fn hartree_exchange_density(l: f64, n: usize, tol: f64) -> Vec<f64> {
    let (x, dx) = interior(l, n);
    let m = x.len();
    let c = 0.5 / (dx * dx);
    let mut density = vec![0.0; m];
    for _ in 0..1000 {
        let diag: Vec<f64> = (0..m)
            .map(|i| 2.0 * c + soft_v(x[i]) + 0.5 * (0..m).map(|k| density[k] * soft_w(x[i] - x[k])).sum::<f64>() * dx)
            .collect();
        let off = vec![-c; m - 1];
        let phi = tridiagonal_vector(&diag, &off, tridiagonal_lowest(&diag, &off));
        let new: Vec<f64> = phi.iter().map(|p| 2.0 * p * p / dx).collect();
        let change = new.iter().zip(&density).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        density = density.iter().zip(&new).map(|(a, b)| 0.5 * a + 0.5 * b).collect();
        if change < tol {
            return new;
        }
    }
    panic!("Hartree-exchange oracle did not converge");
}
