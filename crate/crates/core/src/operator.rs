//! Separable grid Hamiltonians `H = Σ_axes K_a + V` on row-major tensor
//! grids, and the unitary time steppers built on them.

use crate::error::{Error, Result};
use crate::grid::{axis_layout, Boundary, Grid1D};
use crate::linalg::{self, EigenOptions, KrylovOptions, C64};
use serde::{Deserialize, Serialize};
use std::ops::{AddAssign, Mul};

/// Amplitude types the operators act on.
pub trait Amplitude: Copy + Send + Sync + Default + AddAssign + Mul<f64, Output = Self> + 'static {}
impl Amplitude for f64 {}
impl Amplitude for C64 {}

/// One-axis part of a separable Hamiltonian.
#[derive(Clone, Debug)]
pub enum AxisKinetic {
    /// −½∂² by second-order central differences with both endpoints
    /// pinned to zero.
    FiniteDifference { n: usize, dx: f64 },
    /// Dense symmetric `n×n` matrix, row-major (sinc-DVR kinetic energy or
    /// a hopping matrix on a discrete basis).
    Dense { n: usize, matrix: Vec<f64> },
}

impl AxisKinetic {
    /// Kinetic energy appropriate for a grid: finite differences on hard
    /// walls, the sinc-DVR kinetic matrix on decay boxes.
    pub fn for_grid(grid: &Grid1D) -> Self {
        match grid.boundary {
            Boundary::HardWall => AxisKinetic::FiniteDifference { n: grid.n, dx: grid.dx },
            Boundary::DecayBox => AxisKinetic::Dense { n: grid.n, matrix: grid.sinc_kinetic_matrix() },
        }
    }

    pub fn len(&self) -> usize {
        match self {
            AxisKinetic::FiniteDifference { n, .. } | AxisKinetic::Dense { n, .. } => *n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn diagonal(&self, i: usize) -> f64 {
        match self {
            AxisKinetic::FiniteDifference { n, dx } => {
                if i == 0 || i + 1 == *n {
                    0.0
                } else {
                    1.0 / (dx * dx)
                }
            }
            AxisKinetic::Dense { n, matrix } => matrix[i * n + i],
        }
    }
}

#[cfg(feature = "parallel")]
fn for_each_chunk<T: Send>(data: &mut [T], chunk: usize, f: impl Fn(usize, &mut [T]) + Sync + Send) {
    use rayon::prelude::*;
    data.par_chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
}

#[cfg(not(feature = "parallel"))]
fn for_each_chunk<T: Send>(data: &mut [T], chunk: usize, f: impl Fn(usize, &mut [T]) + Sync + Send) {
    data.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
}

/// `H = Σ_a K_a ⊗ 1 + V` on a row-major grid of the given shape.
#[derive(Clone, Debug)]
pub struct SeparableOperator {
    pub shape: Vec<usize>,
    /// Per-axis kinetic part; `None` for axes without one.
    pub axes: Vec<Option<AxisKinetic>>,
    /// Diagonal (multiplicative) part.
    pub potential: Vec<f64>,
}

impl SeparableOperator {
    pub fn new(shape: Vec<usize>, axes: Vec<Option<AxisKinetic>>, potential: Vec<f64>) -> Result<Self> {
        if axes.len() != shape.len() {
            return Err(Error::RepresentationMismatch(format!("{} axes for a rank-{} grid", axes.len(), shape.len())));
        }
        for (a, (k, &n)) in axes.iter().zip(&shape).enumerate() {
            if let Some(k) = k {
                if k.len() != n {
                    return Err(Error::RepresentationMismatch(format!("axis {a}: operator size {} vs grid size {n}", k.len())));
                }
            }
        }
        let size: usize = shape.iter().product();
        if potential.len() != size {
            return Err(Error::LengthMismatch { expected: size, actual: potential.len() });
        }
        Ok(Self { shape, axes, potential })
    }

    pub fn size(&self) -> usize {
        self.potential.len()
    }

    /// `y = H x`.
    pub fn apply<T: Amplitude>(&self, x: &[T], y: &mut [T]) {
        let pot = &self.potential;
        for_each_chunk(y, 4096, |c, chunk| {
            let base = c * 4096;
            for (k, v) in chunk.iter_mut().enumerate() {
                *v = x[base + k] * pot[base + k];
            }
        });
        for (a, kin) in self.axes.iter().enumerate() {
            if let Some(kin) = kin {
                apply_axis(&self.shape, a, kin, x, y);
            }
        }
    }

    /// Diagonal of H (used for preconditioning).
    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = self.potential.clone();
        for (a, kin) in self.axes.iter().enumerate() {
            if let Some(kin) = kin {
                let (outer, n, inner) = axis_layout(&self.shape, a);
                for o in 0..outer {
                    for i in 0..n {
                        let di = kin.diagonal(i);
                        for k in 0..inner {
                            d[(o * n + i) * inner + k] += di;
                        }
                    }
                }
            }
        }
        d
    }

    /// ⟨x|H|x⟩ / ⟨x|x⟩ for a complex vector (Euclidean inner product).
    pub fn expectation(&self, x: &[C64]) -> f64 {
        let mut hx = vec![C64::new(0.0, 0.0); x.len()];
        self.apply(x, &mut hx);
        linalg::cdot(x, &hx).re / linalg::cdot(x, x).re
    }

    /// Lowest eigenpair within the subspace selected by `project`.
    pub fn lowest_eigenpair(
        &self,
        start: &[f64],
        project: impl Fn(&mut [f64]),
        opts: EigenOptions,
    ) -> Result<linalg::EigenPair> {
        linalg::lowest_eigenpair(|x, y| self.apply(x, y), project, start, opts)
    }
}

/// `y += K_axis x`.
fn apply_axis<T: Amplitude>(shape: &[usize], axis: usize, kin: &AxisKinetic, x: &[T], y: &mut [T]) {
    let (outer, n, inner) = axis_layout(shape, axis);
    let slab = n * inner;
    match kin {
        AxisKinetic::FiniteDifference { dx, .. } => {
            let c = 0.5 / (dx * dx);
            let kernel = |o: usize, i: usize, row: &mut [T]| {
                if i == 0 || i + 1 == n {
                    row.iter_mut().for_each(|v| *v = T::default());
                    return;
                }
                let base = (o * n + i) * inner;
                for k in 0..inner {
                    let mut acc = x[base + k] * (2.0 * c);
                    acc += x[base - inner + k] * (-c);
                    acc += x[base + inner + k] * (-c);
                    row[k] += acc;
                }
            };
            if outer == 1 {
                for_each_chunk(y, inner, |i, row| kernel(0, i, row));
            } else {
                for_each_chunk(y, slab, |o, s| {
                    for (i, row) in s.chunks_mut(inner).enumerate() {
                        kernel(o, i, row);
                    }
                });
            }
        }
        AxisKinetic::Dense { matrix, .. } => {
            let kernel = |o: usize, i: usize, row: &mut [T]| {
                let mrow = &matrix[i * n..(i + 1) * n];
                let base = o * slab;
                if inner == 1 {
                    let mut acc = T::default();
                    for (j, m) in mrow.iter().enumerate() {
                        acc += x[base + j] * *m;
                    }
                    row[0] += acc;
                } else {
                    for (j, m) in mrow.iter().enumerate() {
                        if *m == 0.0 {
                            continue;
                        }
                        let src = &x[base + j * inner..base + (j + 1) * inner];
                        for (r, s) in row.iter_mut().zip(src) {
                            *r += *s * *m;
                        }
                    }
                }
            };
            if outer == 1 {
                for_each_chunk(y, inner, |i, row| kernel(0, i, row));
            } else {
                for_each_chunk(y, slab, |o, s| {
                    for (i, row) in s.chunks_mut(inner).enumerate() {
                        kernel(o, i, row);
                    }
                });
            }
        }
    }
}

/// Time-stepping scheme for unitary propagation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Full Crank–Nicolson (Cayley) step, solved iteratively to 1e−14.
    CrankNicolson,
    /// Strang splitting: half potential, exact/Cayley kinetic per axis,
    /// half potential.
    Strang,
    /// Short-iterative Lanczos exponential.
    Krylov,
}

/// Exact or Cayley flow of one axis kinetic term over a fixed step.
#[derive(Clone, Debug)]
enum AxisFlow {
    /// Cayley form of the FD kinetic operator on the interior points; the
    /// tridiagonal system is solved by precomputed Thomas factors.
    Cayley { diag_rhs: C64, off_rhs: C64, off_lhs: C64, inv_denom: Vec<C64>, upper: Vec<C64> },
    /// Dense `exp(−i K dt)`.
    Exponential { matrix: Vec<C64> },
}

impl AxisFlow {
    fn new(kin: &AxisKinetic, dt: f64) -> Self {
        match kin {
            AxisKinetic::FiniteDifference { n, dx } => {
                let tau = 0.5 * dt;
                let d = 1.0 / (dx * dx);
                let o = -0.5 / (dx * dx);
                let diag_lhs = C64::new(1.0, tau * d);
                let off_lhs = C64::new(0.0, tau * o);
                let m = n - 2;
                let mut upper = vec![C64::new(0.0, 0.0); m];
                let mut inv_denom = vec![C64::new(0.0, 0.0); m];
                for i in 0..m {
                    let denom = if i == 0 { diag_lhs } else { diag_lhs - off_lhs * upper[i - 1] };
                    inv_denom[i] = 1.0 / denom;
                    upper[i] = off_lhs * inv_denom[i];
                }
                AxisFlow::Cayley {
                    diag_rhs: C64::new(1.0, -tau * d),
                    off_rhs: C64::new(0.0, -tau * o),
                    off_lhs,
                    inv_denom,
                    upper,
                }
            }
            AxisKinetic::Dense { n, matrix } => AxisFlow::Exponential {
                matrix: linalg::symmetric_function(*n, matrix, |e| C64::from_polar(1.0, -e * dt)),
            },
        }
    }

    fn apply(&self, shape: &[usize], axis: usize, psi: &mut [C64]) {
        let (_, n, inner) = axis_layout(shape, axis);
        let slab = n * inner;
        match self {
            AxisFlow::Cayley { diag_rhs, off_rhs, off_lhs, inv_denom, upper, .. } => {
                let m = n - 2;
                let run = |s: &mut [C64]| {
                    // Right-hand side on interior rows, using the pinned zeros.
                    let mut r = vec![C64::new(0.0, 0.0); m * inner];
                    for i in 0..m {
                        let row = (i + 1) * inner;
                        for k in 0..inner {
                            r[i * inner + k] =
                                *diag_rhs * s[row + k] + *off_rhs * (s[row - inner + k] + s[row + inner + k]);
                        }
                    }
                    for i in 0..m {
                        for k in 0..inner {
                            let prev = if i > 0 { r[(i - 1) * inner + k] } else { C64::new(0.0, 0.0) };
                            r[i * inner + k] = (r[i * inner + k] - *off_lhs * prev) * inv_denom[i];
                        }
                    }
                    for i in (0..m.saturating_sub(1)).rev() {
                        for k in 0..inner {
                            let next = r[(i + 1) * inner + k];
                            r[i * inner + k] -= upper[i] * next;
                        }
                    }
                    for k in 0..inner {
                        s[k] = C64::new(0.0, 0.0);
                        s[(n - 1) * inner + k] = C64::new(0.0, 0.0);
                    }
                    s[inner..(n - 1) * inner].copy_from_slice(&r);
                };
                for_each_chunk(psi, slab, |_, s| run(s));
            }
            AxisFlow::Exponential { matrix, .. } => {
                let run = |s: &mut [C64]| {
                    let src = s.to_vec();
                    for i in 0..n {
                        let mrow = &matrix[i * n..(i + 1) * n];
                        let dst = &mut s[i * inner..(i + 1) * inner];
                        dst.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
                        for (j, m) in mrow.iter().enumerate() {
                            let col = &src[j * inner..(j + 1) * inner];
                            for (d, c) in dst.iter_mut().zip(col) {
                                *d += m * c;
                            }
                        }
                    }
                };
                if slab == psi.len() && inner > 1 {
                    // A single slab: parallelise over the trailing index.
                    let src = psi.to_vec();
                    let cols = inner;
                    let out: Vec<Vec<C64>> = {
                        let mut rows = vec![vec![C64::new(0.0, 0.0); cols]; n];
                        for_each_chunk(&mut rows, 1, |i, r| {
                            let mrow = &matrix[i * n..(i + 1) * n];
                            for (j, m) in mrow.iter().enumerate() {
                                let col = &src[j * cols..(j + 1) * cols];
                                for (d, c) in r[0].iter_mut().zip(col) {
                                    *d += m * c;
                                }
                            }
                        });
                        rows
                    };
                    for (i, r) in out.into_iter().enumerate() {
                        psi[i * cols..(i + 1) * cols].copy_from_slice(&r);
                    }
                } else {
                    for_each_chunk(psi, slab, |_, s| run(s));
                }
            }
        }
    }
}

/// Unitary stepper for `iψ̇ = Hψ`. The kinetic part of the operator passed
/// to [`Stepper::step`] must match the one used at construction; the
/// potential may change from step to step (self-consistent propagation).
#[derive(Clone, Debug)]
pub struct Stepper {
    pub scheme: Scheme,
    pub dt: f64,
    flows: Vec<Option<AxisFlow>>,
    /// Cached half-step potential phases for time-independent potentials.
    phase_cache: Option<Vec<C64>>,
    pub fixed_potential: bool,
    pub solve_tol: f64,
    pub krylov: KrylovOptions,
}

impl Stepper {
    pub fn new(scheme: Scheme, op: &SeparableOperator, dt: f64) -> Self {
        let flows = match scheme {
            Scheme::Strang => op.axes.iter().map(|a| a.as_ref().map(|k| AxisFlow::new(k, dt))).collect(),
            _ => Vec::new(),
        };
        Self {
            scheme,
            dt,
            flows,
            phase_cache: None,
            fixed_potential: false,
            solve_tol: 1e-14,
            krylov: KrylovOptions::default(),
        }
    }

    /// Declares the potential time independent so Strang phases are cached.
    pub fn with_fixed_potential(mut self) -> Self {
        self.fixed_potential = true;
        self
    }

    pub fn step(&mut self, op: &SeparableOperator, psi: &mut [C64]) -> Result<()> {
        match self.scheme {
            Scheme::Strang => {
                let phases = match (&self.phase_cache, self.fixed_potential) {
                    (Some(p), true) => p.clone(),
                    _ => {
                        let p: Vec<C64> = op.potential.iter().map(|v| C64::from_polar(1.0, -0.5 * v * self.dt)).collect();
                        if self.fixed_potential {
                            self.phase_cache = Some(p.clone());
                        }
                        p
                    }
                };
                multiply(psi, &phases);
                for (a, flow) in self.flows.iter().enumerate() {
                    if let Some(flow) = flow {
                        flow.apply(&op.shape, a, psi);
                    }
                }
                multiply(psi, &phases);
                Ok(())
            }
            Scheme::CrankNicolson => {
                let tau = 0.5 * self.dt;
                let n = psi.len();
                let mut hpsi = vec![C64::new(0.0, 0.0); n];
                op.apply(psi, &mut hpsi);
                let rhs: Vec<C64> = psi.iter().zip(&hpsi).map(|(p, h)| p - C64::new(0.0, tau) * h).collect();
                let diag: Vec<C64> = op.diagonal().iter().map(|d| C64::new(1.0, tau * d)).collect();
                let apply = |x: &[C64], y: &mut [C64]| {
                    op.apply(x, y);
                    for (yi, xi) in y.iter_mut().zip(x) {
                        *yi = xi + C64::new(0.0, tau) * *yi;
                    }
                };
                // Explicit Euler predictor as the initial guess.
                let mut x: Vec<C64> = psi.iter().zip(&hpsi).map(|(p, h)| p - C64::new(0.0, self.dt) * h).collect();
                linalg::cocg_solve(&apply, &diag, &rhs, &mut x, self.solve_tol, 2000)?;
                psi.copy_from_slice(&x);
                Ok(())
            }
            Scheme::Krylov => {
                let apply = |x: &[C64], y: &mut [C64]| op.apply(x, y);
                linalg::krylov_exp_step(&apply, psi, self.dt, self.krylov)?;
                Ok(())
            }
        }
    }
}

fn multiply(psi: &mut [C64], phases: &[C64]) {
    for_each_chunk(psi, 4096, |c, chunk| {
        let base = c * 4096;
        for (k, v) in chunk.iter_mut().enumerate() {
            *v *= phases[base + k];
        }
    });
}

/// Builds an index permutation for a row-major array that swaps two
/// groups of axes of equal shape (electron exchange).
pub fn exchange_permutation(shape: &[usize], first: &[usize], second: &[usize]) -> Vec<usize> {
    let size: usize = shape.iter().product();
    let rank = shape.len();
    let mut strides = vec![1usize; rank];
    for a in (0..rank.saturating_sub(1)).rev() {
        strides[a] = strides[a + 1] * shape[a + 1];
    }
    let mut perm = vec![0usize; size];
    let mut idx = vec![0usize; rank];
    for (flat, slot) in perm.iter_mut().enumerate() {
        let mut rem = flat;
        for a in 0..rank {
            idx[a] = rem / strides[a];
            rem %= strides[a];
        }
        let mut swapped = idx.clone();
        for (&a, &b) in first.iter().zip(second) {
            swapped[a] = idx[b];
            swapped[b] = idx[a];
        }
        *slot = swapped.iter().zip(&strides).map(|(i, s)| i * s).sum();
    }
    perm
}

/// Index permutation reflecting every listed axis (i → n−1−i).
pub fn reflection_permutation(shape: &[usize], axes: &[usize]) -> Vec<usize> {
    let size: usize = shape.iter().product();
    let rank = shape.len();
    let mut strides = vec![1usize; rank];
    for a in (0..rank.saturating_sub(1)).rev() {
        strides[a] = strides[a + 1] * shape[a + 1];
    }
    (0..size)
        .map(|flat| {
            let mut rem = flat;
            let mut out = 0;
            for a in 0..rank {
                let mut i = rem / strides[a];
                rem %= strides[a];
                if axes.contains(&a) {
                    i = shape[a] - 1 - i;
                }
                out += i * strides[a];
            }
            out
        })
        .collect()
}

/// `v ← (v + sign·v∘perm)/2` — projector onto a symmetry sector of an
/// involutive index permutation.
pub fn symmetrize(v: &mut [f64], perm: &[usize], sign: f64) {
    let src = v.to_vec();
    for (i, x) in v.iter_mut().enumerate() {
        *x = 0.5 * (src[i] + sign * src[perm[i]]);
    }
}
