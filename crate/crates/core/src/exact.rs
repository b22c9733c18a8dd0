//! Exact reference solutions: eigenstates and real-time propagation of the
//! correlated two-electron-plus-photon wavefunction.

use crate::error::{Error, Result};
use crate::grid::{Boundary, Grid1D};
use crate::linalg::{self, EigenOptions, C64};
use crate::model::{self, ModelKind, ModelSystem, CONFIG_DIPOLES};
use crate::operator::{self, AxisKinetic, Scheme, SeparableOperator, Stepper};
use crate::series::{DensityLayout, ObservableRow, ObservableSeries, Recorder, Snapshot};
use std::f64::consts::SQRT_2;

/// Configuration space of an exact state. Axis orders:
/// helium `[x₁, x₂, p]`, electrons `[x₁, x₂]`, two-site
/// `[configuration, p]` with configurations {|20⟩, |11⟩, |02⟩}, dressed pair
/// `[x₁, q₁, x₂, q₂]`, photon `[p]`.
#[derive(Clone, Debug, PartialEq)]
pub enum Representation {
    HeliumGrid { x: Grid1D, p: Grid1D },
    /// The bare electronic problem (no photon coordinate).
    HeliumElectrons { x: Grid1D },
    TwoSite { p: Grid1D },
    DressedPair { x: Grid1D, q: Grid1D },
    /// The photon sector alone (a harmonic oscillator).
    Photon { p: Grid1D },
}

impl Representation {
    pub fn shape(&self) -> Vec<usize> {
        match self {
            Representation::HeliumGrid { x, p } => vec![x.n, x.n, p.n],
            Representation::HeliumElectrons { x } => vec![x.n, x.n],
            Representation::TwoSite { p } => vec![3, p.n],
            Representation::DressedPair { x, q } => vec![x.n, q.n, x.n, q.n],
            Representation::Photon { p } => vec![p.n],
        }
    }

    pub fn size(&self) -> usize {
        self.shape().iter().product()
    }

    /// Volume element of the cell quadrature.
    pub fn cell(&self) -> f64 {
        match self {
            Representation::HeliumGrid { x, p } => x.dx * x.dx * p.dx,
            Representation::HeliumElectrons { x } => x.dx * x.dx,
            Representation::TwoSite { p } => p.dx,
            Representation::DressedPair { x, q } => (x.dx * q.dx).powi(2),
            Representation::Photon { p } => p.dx,
        }
    }

    /// Electron exchange permutation, where meaningful.
    fn exchange(&self) -> Option<Vec<usize>> {
        let shape = self.shape();
        match self {
            Representation::HeliumGrid { .. } | Representation::HeliumElectrons { .. } => {
                Some(operator::exchange_permutation(&shape, &[0], &[1]))
            }
            Representation::DressedPair { .. } => Some(operator::exchange_permutation(&shape, &[0, 1], &[2, 3])),
            _ => None,
        }
    }

    /// Total inversion x → −x, p → −p (the configuration axis of the
    /// two-site basis reverses |20⟩ ↔ |02⟩).
    fn inversion(&self) -> Vec<usize> {
        let shape = self.shape();
        let axes: Vec<usize> = (0..shape.len()).collect();
        operator::reflection_permutation(&shape, &axes)
    }

    fn density_layout(&self) -> DensityLayout {
        match self {
            Representation::HeliumGrid { x, .. }
            | Representation::HeliumElectrons { x }
            | Representation::DressedPair { x, .. } => DensityLayout::Grid(x.clone()),
            _ => DensityLayout::Sites,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactState {
    pub representation: Representation,
    pub amplitudes: Vec<C64>,
}

impl ExactState {
    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.representation.cell()
    }

    pub fn normalize(&mut self) {
        let n = self.norm().sqrt();
        self.amplitudes.iter_mut().for_each(|z| *z /= n);
    }

    /// |⟨self|other⟩| under the grid quadrature.
    pub fn overlap(&self, other: &ExactState) -> C64 {
        linalg::cdot(&self.amplitudes, &other.amplitudes) * self.representation.cell()
    }

    fn from_real(representation: Representation, v: &[f64]) -> Self {
        let mut s = Self { representation, amplitudes: v.iter().map(|&a| C64::new(a, 0.0)).collect() };
        s.normalize();
        s
    }

    /// Largest deviation from exchange symmetry (0 for representations
    /// without two electron coordinates).
    pub fn exchange_asymmetry(&self) -> f64 {
        match self.representation.exchange() {
            Some(perm) => perm
                .iter()
                .enumerate()
                .map(|(i, &j)| (self.amplitudes[i] - self.amplitudes[j]).norm())
                .fold(0.0, f64::max),
            None => 0.0,
        }
    }
}

/// Tensor product of an electronic state and a photon-coordinate function:
/// helium `ψ(x₁,x₂)·g(p)`, two-site `c_config·g(p)`.
pub fn product_state(representation: Representation, electronic: &[C64], photon: &[f64]) -> Result<ExactState> {
    let shape = representation.shape();
    let np = *shape.last().unwrap();
    let ne: usize = shape[..shape.len() - 1].iter().product();
    match representation {
        Representation::HeliumGrid { .. } | Representation::TwoSite { .. } => {}
        _ => return Err(Error::RepresentationMismatch("product states need a photon axis".into())),
    }
    if electronic.len() != ne {
        return Err(Error::LengthMismatch { expected: ne, actual: electronic.len() });
    }
    if photon.len() != np {
        return Err(Error::LengthMismatch { expected: np, actual: photon.len() });
    }
    let amplitudes = electronic.iter().flat_map(|e| photon.iter().map(move |g| e * *g)).collect();
    let mut s = ExactState { representation, amplitudes };
    s.normalize();
    Ok(s)
}

/// The Rabi initial state: orbital (√¼, √¾) doubly occupied ⊗ photon
/// vacuum.
pub fn two_site_initial_state(model: &ModelSystem, p: &Grid1D) -> Result<ExactState> {
    let [a, b] = model::two_site_initial_orbital();
    let c = model::singlet_from_orbital(a, b);
    let electronic: Vec<C64> = c.iter().map(|&v| C64::new(v, 0.0)).collect();
    product_state(Representation::TwoSite { p: p.clone() }, &electronic, &model::vacuum_amplitude(p, model.omega))
}

/// Exact Hamiltonian on a grid: a separable operator plus the profile that
/// multiplies the time-dependent J̇(t)/ω term.
#[derive(Clone, Debug)]
pub struct ExactHamiltonian {
    pub model: ModelSystem,
    pub representation: Representation,
    pub op: SeparableOperator,
    /// Coordinate array (p, or (q₁+q₂)/√2) coupling to J̇(t)/ω.
    pub source: Vec<f64>,
}

impl ExactHamiltonian {
    /// Operator at time t (differs from `op` only when J̇ ≠ 0).
    pub fn operator_at(&self, t: f64) -> SeparableOperator {
        let c = self.model.current_term(t);
        let mut op = self.op.clone();
        if c != 0.0 {
            for (v, s) in op.potential.iter_mut().zip(&self.source) {
                *v += c * s;
            }
        }
        op
    }

    pub fn is_time_independent(&self) -> bool {
        self.model.jdot.is_zero()
    }
}

pub fn build_exact_hamiltonian(model: &ModelSystem, representation: &Representation) -> Result<ExactHamiltonian> {
    let flags = model.flags;
    let (w, l, s) = (model.omega, model.lambda, flags.bilinear_scale);
    let quad = if flags.include_quadratic { 1.0 } else { 0.0 };
    let inter = if flags.include_w { 1.0 } else { 0.0 };
    let shape = representation.shape();
    let size: usize = shape.iter().product();
    let mut potential = Vec::with_capacity(size);
    let mut source = Vec::with_capacity(size);
    let helium = |what: &str| -> Result<()> {
        if model.kind != ModelKind::Helium1d {
            return Err(Error::RepresentationMismatch(format!("{what} representation requires the helium model")));
        }
        Ok(())
    };
    let axes = match representation {
        Representation::HeliumGrid { x, p } => {
            helium("helium-grid")?;
            require_boundaries(x, p)?;
            let (xs, ps) = (x.points(), p.points());
            for &x1 in &xs {
                for &x2 in &xs {
                    let electronic = model::soft_coulomb_v(x1) + model::soft_coulomb_v(x2) + inter * model::soft_coulomb_w(x1, x2);
                    let d = x1 + x2;
                    for &pp in &ps {
                        potential.push(electronic + 0.5 * w * w * pp * pp - s * w * l * pp * d + quad * 0.5 * l * l * d * d);
                        source.push(pp);
                    }
                }
            }
            vec![Some(AxisKinetic::for_grid(x)), Some(AxisKinetic::for_grid(x)), Some(AxisKinetic::for_grid(p))]
        }
        Representation::HeliumElectrons { x } => {
            helium("electron-only")?;
            if x.boundary != Boundary::HardWall {
                return Err(Error::RepresentationMismatch("electron axes must be hard-wall".into()));
            }
            let xs = x.points();
            for &x1 in &xs {
                for &x2 in &xs {
                    potential.push(model::soft_coulomb_v(x1) + model::soft_coulomb_v(x2) + inter * model::soft_coulomb_w(x1, x2));
                    source.push(0.0);
                }
            }
            vec![Some(AxisKinetic::for_grid(x)), Some(AxisKinetic::for_grid(x))]
        }
        Representation::TwoSite { p } => {
            if model.kind != ModelKind::TwoSite {
                return Err(Error::RepresentationMismatch("two-site representation requires the two-site model".into()));
            }
            if p.boundary != Boundary::DecayBox {
                return Err(Error::RepresentationMismatch("photon axis must be a decay box".into()));
            }
            for d in CONFIG_DIPOLES {
                for pp in p.points() {
                    potential.push(0.5 * w * w * pp * pp - s * w * l * pp * d + quad * 0.5 * l * l * d * d);
                    source.push(pp);
                }
            }
            vec![Some(AxisKinetic::Dense { n: 3, matrix: model::singlet_hopping_matrix(model.hopping) }), Some(AxisKinetic::for_grid(p))]
        }
        Representation::DressedPair { x, q } => {
            helium("dressed-pair")?;
            require_boundaries(x, q)?;
            let pair = if flags.pair_bilinear { 1.0 } else { 0.0 };
            let (xs, qs) = (x.points(), q.points());
            let c = w / SQRT_2;
            for &x1 in &xs {
                for &q1 in &qs {
                    for &x2 in &xs {
                        for &q2 in &qs {
                            let one = model::soft_coulomb_v(x1) + model::soft_coulomb_v(x2) + 0.5 * w * w * (q1 * q1 + q2 * q2)
                                - s * c * l * (q1 * x1 + q2 * x2)
                                + quad * 0.5 * l * l * (x1 * x1 + x2 * x2);
                            let two = inter * model::soft_coulomb_w(x1, x2) - pair * c * l * (q1 * x2 + q2 * x1)
                                + quad * l * l * x1 * x2;
                            potential.push(one + two);
                            source.push((q1 + q2) / SQRT_2);
                        }
                    }
                }
            }
            let kx = AxisKinetic::for_grid(x);
            let kq = AxisKinetic::for_grid(q);
            vec![Some(kx.clone()), Some(kq.clone()), Some(kx), Some(kq)]
        }
        Representation::Photon { p } => {
            for pp in p.points() {
                potential.push(0.5 * w * w * pp * pp);
                source.push(pp);
            }
            vec![Some(AxisKinetic::for_grid(p))]
        }
    };
    let op = SeparableOperator::new(shape, axes, potential)?;
    Ok(ExactHamiltonian { model: model.clone(), representation: representation.clone(), op, source })
}

fn require_boundaries(x: &Grid1D, p: &Grid1D) -> Result<()> {
    if x.boundary != Boundary::HardWall || p.boundary != Boundary::DecayBox {
        return Err(Error::RepresentationMismatch("electron axes must be hard-wall and photon/auxiliary axes decay boxes".into()));
    }
    Ok(())
}

/// Symmetry sector for eigenstate searches.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Any,
    Even,
    Odd,
}

fn start_vector(rep: &Representation, parity: Parity) -> Vec<f64> {
    let odd = parity == Parity::Odd;
    let gauss = |x: f64| (-0.5 * x * x).exp();
    let shape = rep.shape();
    let mut v = Vec::with_capacity(rep.size());
    match rep {
        Representation::HeliumGrid { x, p } => {
            for x1 in x.points() {
                for x2 in x.points() {
                    for pp in p.points() {
                        let e = gauss(x1) * gauss(x2) * (if odd { x1 + x2 } else { 1.0 });
                        v.push(e * (-0.5 * pp * pp).exp() * (1.0 + 0.01 * pp));
                    }
                }
            }
        }
        Representation::HeliumElectrons { x } => {
            for x1 in x.points() {
                for x2 in x.points() {
                    v.push(gauss(x1) * gauss(x2) * (if odd { x1 + x2 } else { 1.0 + 0.01 * x1 }));
                }
            }
        }
        Representation::TwoSite { p } => {
            for c in 0..3 {
                for pp in p.points() {
                    let e = if odd { CONFIG_DIPOLES[c] } else { 1.0 + 0.1 * c as f64 };
                    v.push(e * (-0.5 * pp * pp).exp() * (1.0 + 0.01 * pp));
                }
            }
        }
        Representation::DressedPair { x, q } => {
            for x1 in x.points() {
                for q1 in q.points() {
                    for x2 in x.points() {
                        for q2 in q.points() {
                            let e = gauss(x1) * gauss(x2) * (if odd { x1 + x2 } else { 1.0 });
                            v.push(e * (-0.5 * (q1 * q1 + q2 * q2)).exp() * (1.0 + 0.01 * (q1 + q2)));
                        }
                    }
                }
            }
        }
        Representation::Photon { p } => {
            for pp in p.points() {
                v.push((-0.5 * pp * pp).exp() * (if odd { pp } else { 1.0 + 0.01 * pp }));
            }
        }
    }
    debug_assert_eq!(v.len(), shape.iter().product::<usize>());
    v
}

/// Default Lanczos settings for exact eigenproblems with residual `tol`.
pub fn eigen_options(tol: f64) -> EigenOptions {
    EigenOptions { tol, subspace: 80, max_matvecs: 60_000 }
}

/// Lowest exchange-symmetric eigenpair, optionally restricted to a parity
/// sector and deflated against `below`. `start` overrides the default
/// Gaussian start vector.
pub fn lowest_state(
    h: &ExactHamiltonian,
    below: &[ExactState],
    parity: Parity,
    start: Option<&[f64]>,
    tol: f64,
) -> Result<(f64, ExactState)> {
    if h.model.jdot.at(0.0) != 0.0 {
        return Err(Error::InvalidParameter { name: "jdot", reason: "eigenstates need J̇(0) = 0".into() });
    }
    let rep = &h.representation;
    let exchange = rep.exchange();
    let inversion = match parity {
        Parity::Any => None,
        _ => Some(rep.inversion()),
    };
    let sign = if parity == Parity::Odd { -1.0 } else { 1.0 };
    let deflate: Vec<Vec<f64>> = below
        .iter()
        .map(|s| {
            let mut v: Vec<f64> = s.amplitudes.iter().map(|z| z.re).collect();
            let n = linalg::norm(&v);
            linalg::scale(1.0 / n, &mut v);
            v
        })
        .collect();
    let project = |v: &mut [f64]| {
        if let Some(p) = &exchange {
            operator::symmetrize(v, p, 1.0);
        }
        if let Some(p) = &inversion {
            operator::symmetrize(v, p, sign);
        }
        for b in &deflate {
            let c = linalg::dot(b, v);
            linalg::axpy(-c, b, v);
        }
    };
    let start = match start {
        Some(s) => s.to_vec(),
        None => start_vector(rep, parity),
    };
    let pair = h.op.lowest_eigenpair(&start, project, eigen_options(tol))?;
    Ok((pair.value, ExactState::from_real(rep.clone(), &pair.vector)))
}

/// Ground state: lowest eigenpair in the exchange-symmetric sector with
/// residual ‖Hψ − Eψ‖ < tol.
pub fn ground_state(h: &ExactHamiltonian, tol: f64) -> Result<(f64, ExactState)> {
    lowest_state(h, &[], Parity::Any, None, tol)
}

/// Lowest eigenpair orthogonal to the states in `below`, within a parity
/// sector (the dipole-active helium excitation is parity odd).
pub fn excited_state(h: &ExactHamiltonian, below: &[ExactState], parity: Parity, tol: f64) -> Result<(f64, ExactState)> {
    lowest_state(h, below, parity, None, tol)
}

/// Expectation values of one exact state.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactObservables {
    pub norm: f64,
    pub energy: f64,
    /// n(x) on the electron grid, or the two site occupations.
    pub density: Vec<f64>,
    /// j(x) on the electron grid, or the site occupation rates.
    pub current: Vec<f64>,
    pub dipole: f64,
    pub p: f64,
    pub p2: f64,
    pub delta_p: f64,
    pub pdot: f64,
}

/// Photon coordinate and derivative structure of a representation:
/// returns per-point photon coordinate and applies the photon momentum.
fn photon_coordinate(rep: &Representation) -> Option<Vec<f64>> {
    let shape = rep.shape();
    match rep {
        Representation::HeliumGrid { p, .. } | Representation::TwoSite { p } | Representation::Photon { p } => {
            let ps = p.points();
            let np = p.n;
            Some((0..shape.iter().product::<usize>()).map(|i| ps[i % np]).collect())
        }
        Representation::DressedPair { q, .. } => {
            let qs = q.points();
            let nq = q.n;
            Some(
                (0..shape.iter().product::<usize>())
                    .map(|i| {
                        let q2 = qs[i % nq];
                        let q1 = qs[(i / (nq * shape[2])) % nq];
                        (q1 + q2) / SQRT_2
                    })
                    .collect(),
            )
        }
        Representation::HeliumElectrons { .. } => None,
    }
}

/// Im Σ conj(ψ)·(D ψ) along one axis with the axis' first derivative.
fn momentum_along(shape: &[usize], axis: usize, grid: &Grid1D, psi: &[C64]) -> f64 {
    let (outer, n, inner) = crate::grid::axis_layout(shape, axis);
    let d = grid.sinc_derivative_matrix();
    let mut total = 0.0;
    for o in 0..outer {
        for i in 0..n {
            for k in 0..inner {
                let idx = (o * n + i) * inner + k;
                let mut dpsi = C64::new(0.0, 0.0);
                for j in 0..n {
                    dpsi += psi[(o * n + j) * inner + k] * d[i * n + j];
                }
                total += (psi[idx].conj() * dpsi).im;
            }
        }
    }
    total
}

/// 2·Σ_rest Im(ψ*·∂ψ) along electron axis `axis` by central differences,
/// returned per x-point (the probability current of one electron times 2
/// after exchange symmetrization).
fn electron_current(shape: &[usize], axis: usize, dx: f64, psi: &[C64]) -> Vec<f64> {
    let (outer, n, inner) = crate::grid::axis_layout(shape, axis);
    let mut j = vec![0.0; n];
    for o in 0..outer {
        for (i, ji) in j.iter_mut().enumerate() {
            for k in 0..inner {
                let at = |m: usize| psi[(o * n + m) * inner + k];
                let left = if i > 0 { at(i - 1) } else { C64::new(0.0, 0.0) };
                let right = if i + 1 < n { at(i + 1) } else { C64::new(0.0, 0.0) };
                *ji += (at(i).conj() * (right - left)).im / (2.0 * dx);
            }
        }
    }
    j
}

/// Per-point reduction Σ_rest f(ψ) along axis `axis`.
fn reduce_along(shape: &[usize], axis: usize, values: &[f64]) -> Vec<f64> {
    let (outer, n, inner) = crate::grid::axis_layout(shape, axis);
    let mut out = vec![0.0; n];
    for o in 0..outer {
        for (i, oi) in out.iter_mut().enumerate() {
            let base = (o * n + i) * inner;
            *oi += values[base..base + inner].iter().sum::<f64>();
        }
    }
    out
}

pub fn exact_observables(h: &ExactHamiltonian, state: &ExactState, t: f64) -> ExactObservables {
    let rep = &state.representation;
    let shape = rep.shape();
    let psi = &state.amplitudes;
    let cell = rep.cell();
    let prob: Vec<f64> = psi.iter().map(|z| z.norm_sqr()).collect();
    let norm = prob.iter().sum::<f64>() * cell;
    let op = if h.is_time_independent() { None } else { Some(h.operator_at(t)) };
    let energy = op.as_ref().unwrap_or(&h.op).expectation(psi);
    let (density, current, dipole) = match rep {
        Representation::HeliumGrid { x, .. } | Representation::HeliumElectrons { x } | Representation::DressedPair { x, .. } => {
            let per_x = cell / x.dx;
            let density: Vec<f64> = reduce_along(&shape, 0, &prob).iter().map(|v| 2.0 * v * per_x).collect();
            let current: Vec<f64> = electron_current(&shape, 0, x.dx, psi).iter().map(|v| 2.0 * v * per_x).collect();
            let dipole = x.points().iter().zip(&density).map(|(x, n)| x * n).sum::<f64>() * x.dx;
            (density, current, dipole)
        }
        Representation::TwoSite { p } => {
            let occ = reduce_along(&shape, 0, &prob);
            let (c20, c11, c02) = (occ[0] * p.dx, occ[1] * p.dx, occ[2] * p.dx);
            let density = vec![2.0 * c20 + c11, 2.0 * c02 + c11];
            // ṅ₂ = 2 Im⟨N₂ψ|H_hop ψ⟩ with N₂ = diag(0, 1, 2).
            let h_hop = model::singlet_hopping_matrix(h.model.hopping);
            let np = p.n;
            let mut rate = 0.0;
            for c in 0..3 {
                let n2 = c as f64;
                for k in 0..np {
                    let mut hpsi = C64::new(0.0, 0.0);
                    for d in 0..3 {
                        hpsi += psi[d * np + k] * h_hop[c * 3 + d];
                    }
                    rate += n2 * (psi[c * np + k].conj() * hpsi).im;
                }
            }
            let rate = 2.0 * rate * p.dx;
            let dipole = 0.5 * (density[1] - density[0]);
            (density, vec![-rate, rate], dipole)
        }
        Representation::Photon { .. } => (Vec::new(), Vec::new(), 0.0),
    };
    let (p, p2, pdot) = match photon_coordinate(rep) {
        Some(coord) => {
            let p: f64 = coord.iter().zip(&prob).map(|(c, w)| c * w).sum::<f64>() * cell;
            let p2: f64 = coord.iter().zip(&prob).map(|(c, w)| c * c * w).sum::<f64>() * cell;
            let pdot = match rep {
                Representation::HeliumGrid { p, .. } => momentum_along(&shape, 2, p, psi) * cell,
                Representation::TwoSite { p } | Representation::Photon { p } => momentum_along(&shape, shape.len() - 1, p, psi) * cell,
                Representation::DressedPair { q, .. } => {
                    (momentum_along(&shape, 1, q, psi) + momentum_along(&shape, 3, q, psi)) * cell / SQRT_2
                }
                Representation::HeliumElectrons { .. } => 0.0,
            };
            (p, p2, pdot)
        }
        None => (0.0, 0.0, 0.0),
    };
    ExactObservables { norm, energy, density, current, dipole, p, p2, delta_p: p2 - p * p, pdot }
}

/// Pair density ρ₂(x, x′) = 2∫|Ψ(x, x′, p)|² dp (helium grids), row-major,
/// normalised to N(N−1) = 2.
pub fn pair_density(state: &ExactState) -> Result<Vec<f64>> {
    match &state.representation {
        Representation::HeliumGrid { x, p } => {
            let np = p.n;
            Ok((0..x.n * x.n)
                .map(|ij| 2.0 * state.amplitudes[ij * np..(ij + 1) * np].iter().map(|z| z.norm_sqr()).sum::<f64>() * p.dx)
                .collect())
        }
        Representation::HeliumElectrons { .. } => Ok(state.amplitudes.iter().map(|z| 2.0 * z.norm_sqr()).collect()),
        _ => Err(Error::RepresentationMismatch("pair density needs a helium grid".into())),
    }
}

/// Bilinear photon-matter force density F_lin(x) = λω⟨p n̂(x)⟩ from a
/// helium-grid state.
pub fn bilinear_force(model: &ModelSystem, state: &ExactState) -> Result<Vec<f64>> {
    match &state.representation {
        Representation::HeliumGrid { x, p } => {
            let ps = p.points();
            let (nx, np) = (x.n, p.n);
            let per_x = x.dx * p.dx;
            Ok((0..nx)
                .map(|i| {
                    let mut acc = 0.0;
                    for j in 0..nx {
                        let base = (i * nx + j) * np;
                        for (k, pk) in ps.iter().enumerate() {
                            acc += pk * state.amplitudes[base + k].norm_sqr();
                        }
                    }
                    model.lambda * model.omega * 2.0 * acc * per_x
                })
                .collect())
        }
        _ => Err(Error::RepresentationMismatch("bilinear force needs a helium grid".into())),
    }
}

/// The automatic scheme choice: Lanczos exponential for the small two-site
/// and photon problems, Strang splitting for grid problems.
pub fn auto_scheme(rep: &Representation) -> Scheme {
    match rep {
        Representation::TwoSite { .. } | Representation::Photon { .. } => Scheme::Krylov,
        _ => Scheme::Strang,
    }
}

fn record(series: &mut ObservableSeries, recorder: &Recorder, h: &ExactHamiltonian, state: &ExactState, t: f64, step: usize) -> Result<()> {
    let obs = exact_observables(h, state, t);
    if !obs.norm.is_finite() || !obs.energy.is_finite() {
        return Err(Error::NonFinite { step, time: t });
    }
    series.rows.push(ObservableRow {
        t,
        norm: obs.norm,
        energy: obs.energy,
        dipole: obs.dipole,
        p: obs.p,
        pdot: obs.pdot,
        delta_p: obs.delta_p,
        continuity_res: f64::NAN,
        maxwell_res: f64::NAN,
    });
    if recorder.densities {
        series.snapshots.push(Snapshot { t, density: obs.density, current: obs.current });
    }
    Ok(())
}

/// Real-time propagation. Records at steps 0, stride, 2·stride, … and
/// returns the final state with the series.
pub fn propagate_exact(
    state: &ExactState,
    h: &ExactHamiltonian,
    scheme: Scheme,
    dt: f64,
    steps: usize,
    recorder: Recorder,
    label: &str,
) -> Result<(ExactState, ObservableSeries)> {
    if state.representation != h.representation {
        return Err(Error::RepresentationMismatch("state and Hamiltonian live on different grids".into()));
    }
    let mut psi = state.clone();
    let mut series = ObservableSeries::new(label, h.representation.density_layout());
    let fixed = h.is_time_independent();
    let mut stepper = Stepper::new(scheme, &h.op, dt);
    if fixed {
        stepper = stepper.with_fixed_potential();
    }
    record(&mut series, &recorder, h, &psi, 0.0, 0)?;
    for step in 1..=steps {
        let t_mid = (step as f64 - 0.5) * dt;
        if fixed {
            stepper.step(&h.op, &mut psi.amplitudes)?;
        } else {
            let op = h.operator_at(t_mid);
            stepper.step(&op, &mut psi.amplitudes)?;
        }
        if step % recorder.stride.max(1) == 0 {
            record(&mut series, &recorder, h, &psi, step as f64 * dt, step)?;
        }
    }
    Ok((psi, series))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_helium_model, make_two_site_model, InteractionFlags};

    fn two_site_h(lambda: f64) -> ExactHamiltonian {
        let m = make_two_site_model(0.5, 1.0, lambda).unwrap();
        let p = Grid1D::oscillator_box(1.0, 48, 8.0).unwrap();
        build_exact_hamiltonian(&m, &Representation::TwoSite { p }).unwrap()
    }

    #[test]
    fn two_site_ground_state_matches_dense() {
        let h = two_site_h(0.01);
        let (e, _) = ground_state(&h, 1e-11).unwrap();
        // Dense diagonalization of the full operator.
        let n = h.op.size();
        let mut m = vec![0.0; n * n];
        let mut unit = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            unit[j] = 1.0;
            h.op.apply(&unit, &mut col);
            for i in 0..n {
                m[i * n + j] = col[i];
            }
            unit[j] = 0.0;
        }
        let (values, _) = linalg::symmetric_eigen(n, &m);
        assert!((e - values[0]).abs() < 1e-10, "{e} vs {}", values[0]);
    }

    #[test]
    fn two_site_uncoupled_gap() {
        let h = two_site_h(0.0);
        let (e0, g) = ground_state(&h, 1e-11).unwrap();
        let (e1, _) = excited_state(&h, &[g], Parity::Odd, 1e-11).unwrap();
        assert!((e1 - e0 - 1.0).abs() < 1e-9, "gap {}", e1 - e0);
    }

    #[test]
    fn photon_sector_is_an_oscillator() {
        let m = make_helium_model(0.58037, 0.0, InteractionFlags::physical()).unwrap();
        let p = Grid1D::oscillator_box(m.omega, 64, 8.0).unwrap();
        let h = build_exact_hamiltonian(&m, &Representation::Photon { p }).unwrap();
        let (e0, g) = ground_state(&h, 1e-11).unwrap();
        let (e1, _) = excited_state(&h, &[g.clone()], Parity::Any, 1e-11).unwrap();
        assert!((e0 - 0.5 * m.omega).abs() < 1e-10);
        assert!((e1 - e0 - m.omega).abs() < 1e-10);
        let obs = exact_observables(&h, &g, 0.0);
        assert!((obs.delta_p - 0.5 / m.omega).abs() < 1e-10);
    }

    #[test]
    fn representation_mismatch_is_rejected() {
        let m = make_two_site_model(0.5, 1.0, 0.01).unwrap();
        let x = Grid1D::new(-5.0, 5.0, 11, Boundary::HardWall).unwrap();
        assert!(build_exact_hamiltonian(&m, &Representation::HeliumElectrons { x }).is_err());
    }

    #[test]
    fn eigenstate_is_stationary() {
        let h = two_site_h(0.01);
        let (_, g) = ground_state(&h, 1e-11).unwrap();
        let (end, series) = propagate_exact(&g, &h, Scheme::Krylov, 0.01, 1000, Recorder::every(100), "gs").unwrap();
        assert!((g.overlap(&end).norm() - 1.0).abs() < 1e-8);
        let e0 = series.rows[0].energy;
        assert!(series.rows.iter().all(|r| (r.energy - e0).abs() < 1e-10));
    }
}
