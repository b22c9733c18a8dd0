//! Small numerical kernels shared by the solvers: Lanczos eigenpairs,
//! Krylov exponentials, a complex-symmetric conjugate-gradient solver and
//! dense symmetric eigen-decompositions of axis operators.

use crate::error::{Error, Result};
use num_complex::Complex64;

pub type C64 = Complex64;

/// Basis storage for Lanczos runs is kept in memory up to this many
/// elements; larger problems regenerate the basis in a second pass.
const STORED_BASIS_LIMIT: usize = 40_000_000;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Hermitian inner product ⟨a|b⟩ = Σ conj(aᵢ)·bᵢ.
pub fn cdot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Bilinear product aᵀb (no conjugation), used by COCG.
pub fn bdot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn cnorm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn caxpy(alpha: C64, x: &[C64], y: &mut [C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(alpha: f64, x: &mut [f64]) {
    x.iter_mut().for_each(|v| *v *= alpha);
}

/// Eigen-decomposition of a dense symmetric matrix stored row-major.
/// Returns eigenvalues in ascending order and the eigenvectors as columns
/// of a row-major `n×n` matrix.
pub fn symmetric_eigen(n: usize, matrix: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let m = faer::Mat::<f64>::from_fn(n, n, |i, j| matrix[i * n + j]);
    // faer returns eigenvalues in nondecreasing order.
    let eig = m.selfadjoint_eigendecomposition(faer::Side::Lower);
    let (s, u) = (eig.s().column_vector(), eig.u());
    let values = (0..n).map(|k| s.read(k)).collect();
    let mut vectors = vec![0.0; n * n];
    for row in 0..n {
        for col in 0..n {
            vectors[row * n + col] = u.read(row, col);
        }
    }
    (values, vectors)
}

/// `f(M)` for a dense symmetric `M` and a scalar function `f`, as a complex
/// row-major matrix.
pub fn symmetric_function(n: usize, matrix: &[f64], f: impl Fn(f64) -> C64) -> Vec<C64> {
    let (values, vectors) = symmetric_eigen(n, matrix);
    let fv: Vec<C64> = values.iter().map(|&v| f(v)).collect();
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..n {
                acc += fv[k] * (vectors[i * n + k] * vectors[j * n + k]);
            }
            out[i * n + j] = acc;
        }
    }
    out
}

/// Lowest eigenpair of a symmetric tridiagonal matrix (α on the diagonal,
/// β below it).
fn tridiagonal_lowest(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let m = alpha.len();
    let mut t = vec![0.0; m * m];
    for i in 0..m {
        t[i * m + i] = alpha[i];
        if i + 1 < m {
            t[i * m + i + 1] = beta[i];
            t[(i + 1) * m + i] = beta[i];
        }
    }
    let (values, vectors) = symmetric_eigen(m, &t);
    let s = (0..m).map(|i| vectors[i * m]).collect();
    (values[0], s)
}

#[derive(Clone, Copy, Debug)]
pub struct EigenOptions {
    /// Convergence threshold on ‖Hv − θv‖ for a unit vector v.
    pub tol: f64,
    /// Lanczos steps per restart cycle.
    pub subspace: usize,
    /// Upper bound on the number of operator applications.
    pub max_matvecs: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { tol: 1e-9, subspace: 80, max_matvecs: 40_000 }
    }
}

#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: f64,
    /// Unit vector in the Euclidean norm.
    pub vector: Vec<f64>,
    pub residual: f64,
    pub matvecs: usize,
}

/// Lowest eigenpair of a real symmetric operator by restarted Lanczos.
///
/// `project` is applied to every Krylov vector; it must be an orthogonal
/// projector commuting with the operator (symmetry sectors, deflation
/// against known eigenvectors). Each cycle restarts from the current Ritz
/// vector. The basis is stored when it fits in memory; otherwise it is
/// regenerated by a second pass of the same recurrence.
pub fn lowest_eigenpair<A, P>(
    apply: A,
    project: P,
    start: &[f64],
    opts: EigenOptions,
) -> Result<EigenPair>
where
    A: Fn(&[f64], &mut [f64]),
    P: Fn(&mut [f64]),
{
    let n = start.len();
    let mut x = start.to_vec();
    project(&mut x);
    let nx = norm(&x);
    if !(nx > 0.0) || !nx.is_finite() {
        return Err(Error::InvalidParameter {
            name: "start",
            reason: "start vector vanishes in the projected space".into(),
        });
    }
    scale(1.0 / nx, &mut x);
    let m_max = opts.subspace.max(2).min(n.max(2));
    let store = n.saturating_mul(m_max) <= STORED_BASIS_LIMIT;
    let mut matvecs = 0usize;
    let mut w = vec![0.0; n];
    loop {
        // First pass: recurrence coefficients (and the basis when stored).
        let mut alpha = Vec::with_capacity(m_max);
        let mut beta: Vec<f64> = Vec::with_capacity(m_max);
        let mut basis: Vec<Vec<f64>> = Vec::new();
        let mut v_prev = vec![0.0; n];
        let mut v = x.clone();
        for j in 0..m_max {
            apply(&v, &mut w);
            matvecs += 1;
            project(&mut w);
            let scale_hv = norm(&w);
            let a = dot(&v, &w);
            alpha.push(a);
            axpy(-a, &v, &mut w);
            if j > 0 {
                axpy(-beta[j - 1], &v_prev, &mut w);
            }
            if store {
                basis.push(v.clone());
                for b in &basis {
                    let c = dot(b, &w);
                    axpy(-c, b, &mut w);
                }
                project(&mut w);
            }
            let b = norm(&w);
            // A residual at roundoff level of ‖Hv‖ means the Krylov space is
            // invariant; continuing would normalise noise. The first step is
            // exempt so that a nearly converged restart vector can still improve.
            let invariant = b == 0.0 || (j > 0 && b <= 1e-12 * scale_hv);
            if j + 1 == m_max || invariant {
                break;
            }
            beta.push(b);
            std::mem::swap(&mut v_prev, &mut v);
            v.copy_from_slice(&w);
            scale(1.0 / b, &mut v);
        }
        let m = alpha.len();
        let (_, s) = tridiagonal_lowest(&alpha, &beta[..m - 1]);
        // Ritz vector.
        let mut y = vec![0.0; n];
        if store {
            for (sj, vj) in s.iter().zip(&basis) {
                axpy(*sj, vj, &mut y);
            }
        } else {
            let mut v_prev = vec![0.0; n];
            let mut v = x.clone();
            for j in 0..m {
                axpy(s[j], &v, &mut y);
                if j + 1 == m {
                    break;
                }
                apply(&v, &mut w);
                matvecs += 1;
                project(&mut w);
                axpy(-alpha[j], &v, &mut w);
                if j > 0 {
                    axpy(-beta[j - 1], &v_prev, &mut w);
                }
                std::mem::swap(&mut v_prev, &mut v);
                v.copy_from_slice(&w);
                scale(1.0 / beta[j], &mut v);
            }
        }
        project(&mut y);
        let ny = norm(&y);
        scale(1.0 / ny, &mut y);
        apply(&y, &mut w);
        matvecs += 1;
        project(&mut w);
        let rq = dot(&y, &w);
        axpy(-rq, &y, &mut w);
        let residual = norm(&w);
        x = y;
        if !residual.is_finite() {
            return Err(Error::NoConvergence { iterations: matvecs, residual });
        }
        if residual < opts.tol {
            return Ok(EigenPair { value: rq, vector: x, residual, matvecs });
        }
        if matvecs >= opts.max_matvecs || m < 2 {
            return Err(Error::NoConvergence { iterations: matvecs, residual });
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct KrylovOptions {
    pub max_dim: usize,
    /// Bound on the estimated error of one exponential step.
    pub tol: f64,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self { max_dim: 40, tol: 1e-13 }
    }
}

/// ψ ← exp(−i·H·dt)ψ for a Hermitian operator by the short-iterative
/// Lanczos method. The subspace grows until the a-posteriori error estimate
/// drops below `tol`; if `max_dim` is reached the step is split in halves.
/// Returns the number of operator applications.
pub fn krylov_exp_step<A>(apply: &A, psi: &mut [C64], dt: f64, opts: KrylovOptions) -> Result<usize>
where
    A: Fn(&[C64], &mut [C64]),
{
    krylov_exp_inner(apply, psi, dt, opts, 0)
}

fn krylov_exp_inner<A>(apply: &A, psi: &mut [C64], dt: f64, opts: KrylovOptions, depth: usize) -> Result<usize>
where
    A: Fn(&[C64], &mut [C64]),
{
    let n = psi.len();
    let nrm = cnorm(psi);
    if nrm == 0.0 {
        return Ok(0);
    }
    let mut basis: Vec<Vec<C64>> = vec![psi.iter().map(|z| z / nrm).collect()];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![C64::new(0.0, 0.0); n];
    let mut matvecs = 0;
    let max_dim = opts.max_dim.max(2).min(n);
    loop {
        let j = alpha.len();
        apply(&basis[j], &mut w);
        matvecs += 1;
        let a = cdot(&basis[j], &w).re;
        alpha.push(a);
        caxpy(C64::new(-a, 0.0), &basis[j], &mut w);
        if j > 0 {
            caxpy(C64::new(-beta[j - 1], 0.0), &basis[j - 1], &mut w);
        }
        for b in &basis {
            let c = cdot(b, &w);
            caxpy(-c, b, &mut w);
        }
        let b = cnorm(&w);
        let m = alpha.len();
        // Small exponential exp(−i T dt) e₁.
        let mut t = vec![0.0; m * m];
        for i in 0..m {
            t[i * m + i] = alpha[i];
            if i + 1 < m {
                t[i * m + i + 1] = beta[i];
                t[(i + 1) * m + i] = beta[i];
            }
        }
        let (values, vectors) = symmetric_eigen(m, &t);
        let coeffs: Vec<C64> = (0..m)
            .map(|i| {
                (0..m)
                    .map(|k| C64::from_polar(vectors[k] * vectors[i * m + k], -values[k] * dt))
                    .sum()
            })
            .collect();
        let invariant = b <= 1e-13 * (1.0 + a.abs());
        let err = b * coeffs[m - 1].norm();
        if invariant || err < opts.tol {
            for (z, out) in psi.iter_mut().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for (c, v) in coeffs.iter().zip(&basis) {
                    acc += c * v[z];
                }
                *out = acc * nrm;
            }
            return Ok(matvecs);
        }
        if m >= max_dim {
            if depth > 20 {
                return Err(Error::NoConvergence { iterations: matvecs, residual: err });
            }
            let half = 0.5 * dt;
            let mut used = matvecs;
            used += krylov_exp_inner(apply, psi, half, opts, depth + 1)?;
            used += krylov_exp_inner(apply, psi, half, opts, depth + 1)?;
            return Ok(used);
        }
        beta.push(b);
        let next: Vec<C64> = w.iter().map(|z| z / b).collect();
        basis.push(next);
    }
}

/// Solves `A x = b` for complex-symmetric `A` (Aᵀ = A) by the conjugate
/// orthogonal conjugate gradient method with a diagonal preconditioner.
/// `x` holds the initial guess on entry.
pub fn cocg_solve<A>(
    apply: &A,
    diagonal: &[C64],
    b: &[C64],
    x: &mut [C64],
    tol: f64,
    max_iter: usize,
) -> Result<usize>
where
    A: Fn(&[C64], &mut [C64]),
{
    let n = b.len();
    let bnorm = cnorm(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        return Ok(0);
    }
    let inv_diag: Vec<C64> = diagonal.iter().map(|d| 1.0 / d).collect();
    let mut r = vec![C64::new(0.0, 0.0); n];
    apply(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut z: Vec<C64> = r.iter().zip(&inv_diag).map(|(a, d)| a * d).collect();
    let mut p = z.clone();
    let mut rho = bdot(&r, &z);
    let mut q = vec![C64::new(0.0, 0.0); n];
    let mut res = cnorm(&r) / bnorm;
    for it in 0..max_iter {
        if res < tol {
            return Ok(it);
        }
        apply(&p, &mut q);
        let pq = bdot(&p, &q);
        if pq.norm() == 0.0 {
            break;
        }
        let a = rho / pq;
        caxpy(a, &p, x);
        caxpy(-a, &q, &mut r);
        res = cnorm(&r) / bnorm;
        if res < tol {
            return Ok(it + 1);
        }
        for ((zi, ri), d) in z.iter_mut().zip(&r).zip(&inv_diag) {
            *zi = ri * d;
        }
        let rho_new = bdot(&r, &z);
        let beta = rho_new / rho;
        rho = rho_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    if res < tol {
        return Ok(max_iter);
    }
    Err(Error::LinearSolve { iterations: max_iter, residual: res })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_matrix(n: usize) -> Vec<f64> {
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            m[i * n + i] = 2.0;
            if i + 1 < n {
                m[i * n + i + 1] = -1.0;
                m[(i + 1) * n + i] = -1.0;
            }
        }
        m
    }

    fn matvec(n: usize, m: &[f64]) -> impl Fn(&[f64], &mut [f64]) + '_ {
        move |x, y| {
            for i in 0..n {
                y[i] = (0..n).map(|j| m[i * n + j] * x[j]).sum();
            }
        }
    }

    #[test]
    fn lanczos_finds_lowest_laplacian_mode() {
        let n = 50;
        let m = laplacian_matrix(n);
        let start: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64 * 0.37).sin() * 0.1).collect();
        let pair = lowest_eigenpair(matvec(n, &m), |_| {}, &start, EigenOptions { tol: 1e-11, ..Default::default() }).unwrap();
        let exact = 2.0 - 2.0 * (std::f64::consts::PI / (n as f64 + 1.0)).cos();
        assert!((pair.value - exact).abs() < 1e-12, "{} vs {}", pair.value, exact);
    }

    #[test]
    fn lanczos_deflation_gives_second_mode() {
        let n = 40;
        let m = laplacian_matrix(n);
        let (values, vectors) = symmetric_eigen(n, &m);
        let ground: Vec<f64> = (0..n).map(|i| vectors[i * n]).collect();
        let start = vec![1.0; n];
        let project = |v: &mut [f64]| {
            let c = dot(&ground, v);
            axpy(-c, &ground, v);
        };
        let start: Vec<f64> = start.iter().enumerate().map(|(i, s)| s + i as f64 * 0.01).collect();
        let pair = lowest_eigenpair(matvec(n, &m), project, &start, EigenOptions { tol: 1e-11, ..Default::default() }).unwrap();
        assert!((pair.value - values[1]).abs() < 1e-12);
    }

    #[test]
    fn krylov_matches_dense_exponential() {
        let n = 30;
        let m = laplacian_matrix(n);
        let u = symmetric_function(n, &m, |e| C64::from_polar(1.0, -e * 0.7));
        let psi0: Vec<C64> = (0..n).map(|i| C64::new((i as f64 * 0.3).sin(), (i as f64 * 0.11).cos())).collect();
        let mut psi = psi0.clone();
        let apply = |x: &[C64], y: &mut [C64]| {
            for i in 0..n {
                y[i] = (0..n).map(|j| x[j] * m[i * n + j]).sum();
            }
        };
        krylov_exp_step(&apply, &mut psi, 0.7, KrylovOptions::default()).unwrap();
        for i in 0..n {
            let expect: C64 = (0..n).map(|j| u[i * n + j] * psi0[j]).sum();
            assert!((expect - psi[i]).norm() < 1e-11);
        }
    }

    #[test]
    fn cocg_solves_shifted_system() {
        let n = 60;
        let m = laplacian_matrix(n);
        let tau = 0.3;
        let apply = |x: &[C64], y: &mut [C64]| {
            for i in 0..n {
                let hx: C64 = (0..n).map(|j| x[j] * m[i * n + j]).sum();
                y[i] = x[i] + C64::new(0.0, tau) * hx;
            }
        };
        let diag: Vec<C64> = (0..n).map(|i| C64::new(1.0, tau * m[i * n + i])).collect();
        let b: Vec<C64> = (0..n).map(|i| C64::new(i as f64, 1.0)).collect();
        let mut x = b.clone();
        cocg_solve(&apply, &diag, &b, &mut x, 1e-14, 500).unwrap();
        let mut ax = vec![C64::new(0.0, 0.0); n];
        apply(&x, &mut ax);
        let err: f64 = ax.iter().zip(&b).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-11);
    }
}
