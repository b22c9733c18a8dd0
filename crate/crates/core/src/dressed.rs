//! Dressed Kohn–Sham orbital φ′(x, q) (or φ′(site, q)): the doubly occupied
//! polaritonic orbital of two electrons coupled to one mode, with the Mx
//! family of mean-field-exchange potentials.

use crate::error::{Error, Result};
use crate::grid::{Boundary, Grid1D};
use crate::linalg::{EigenOptions, C64};
use crate::model::{self, ModelKind, ModelSystem, PotentialTables};
use crate::operator::{AxisKinetic, Scheme, SeparableOperator, Stepper};
use crate::series::{DensityLayout, DressedSnapshot, ObservableRow, ObservableSeries, Recorder, Snapshot};
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

/// Mean-field-exchange-correlation approximation of the dressed scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MxcApproximation {
    /// v′_Mxc = 0: only the dressed one-body potential acts.
    None,
    /// Interaction forces replaced by their Kohn–Sham values.
    Mx,
    /// Bilinear coupling scaled by N; the remaining Mxc potential is
    /// Hartree plus the λ²-mean-field term.
    Smx,
    /// Bilinear coupling scaled by √N, same Mxc potential as `Smx`.
    SqrtSmx,
}

impl MxcApproximation {
    /// Multiplier of the physical one-body bilinear coefficient −ω/√N.
    pub fn bilinear_factor(self) -> f64 {
        match self {
            MxcApproximation::None | MxcApproximation::Mx => 1.0,
            MxcApproximation::Smx => 2.0,
            MxcApproximation::SqrtSmx => SQRT_2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MxcApproximation::None => "none",
            MxcApproximation::Mx => "mx",
            MxcApproximation::Smx => "smx",
            MxcApproximation::SqrtSmx => "sqrt-smx",
        }
    }
}

/// Dressed one-body potential v′(x, q, t) including the approximation's
/// scaling of the bilinear term. `x` is a position (helium) or a site
/// dipole ±½ (two sites, where v = 0).
pub fn dressed_external_potential(model: &ModelSystem, approx: MxcApproximation, x: f64, q: f64, t: f64) -> f64 {
    let (w, l) = (model.omega, model.lambda);
    let v = match model.kind {
        ModelKind::Helium1d => model::soft_coulomb_v(x),
        ModelKind::TwoSite => 0.0,
    };
    let s = model.flags.bilinear_scale * approx.bilinear_factor();
    let quad = if model.flags.include_quadratic { 0.5 * l * l * x * x } else { 0.0 };
    v + 0.5 * w * w * q * q - s * (w / SQRT_2) * q * l * x + quad + model.jdot.at(t) * q / (SQRT_2 * w)
}

/// The dressed lift of the standard mean-field coupling:
/// [λR − ωp]λx − (ω/√2)qλR.
pub fn dressed_mean_field(model: &ModelSystem, r: f64, p: f64, x: f64, q: f64) -> f64 {
    let (w, l) = (model.omega, model.lambda);
    let quad = if model.flags.include_quadratic { 1.0 } else { 0.0 };
    (quad * l * r - w * p) * l * x - (w / SQRT_2) * q * l * r
}

/// Pointwise non-Hartree part of v′_Mxc.
pub fn mxc_coupling(model: &ModelSystem, approx: MxcApproximation, r: f64, p: f64, x: f64, q: f64) -> f64 {
    let l = model.lambda;
    let quad = if model.flags.include_quadratic { 1.0 } else { 0.0 };
    match approx {
        MxcApproximation::None => 0.0,
        MxcApproximation::Mx => 0.5 * dressed_mean_field(model, r, p, x, q),
        MxcApproximation::Smx | MxcApproximation::SqrtSmx => 0.5 * quad * l * r * l * x,
    }
}

/// Support of the dressed orbital: `[x, q]` (helium) or `[site, q]`.
#[derive(Clone, Debug, PartialEq)]
pub enum DressedLayout {
    Helium { x: Grid1D, q: Grid1D },
    TwoSite { q: Grid1D },
}

impl DressedLayout {
    pub fn q(&self) -> &Grid1D {
        match self {
            DressedLayout::Helium { q, .. } | DressedLayout::TwoSite { q } => q,
        }
    }

    /// Number of electron points (grid points or 2 sites).
    pub fn nx(&self) -> usize {
        match self {
            DressedLayout::Helium { x, .. } => x.n,
            DressedLayout::TwoSite { .. } => 2,
        }
    }

    /// Electron coordinates: grid positions or site dipoles.
    pub fn x_values(&self) -> Vec<f64> {
        match self {
            DressedLayout::Helium { x, .. } => x.points(),
            DressedLayout::TwoSite { .. } => model::SITE_DIPOLES.to_vec(),
        }
    }

    /// Electron quadrature weight (dx, or 1 for sites).
    pub fn x_weight(&self) -> f64 {
        match self {
            DressedLayout::Helium { x, .. } => x.dx,
            DressedLayout::TwoSite { .. } => 1.0,
        }
    }

    pub fn cell(&self) -> f64 {
        self.x_weight() * self.q().dx
    }

    pub fn size(&self) -> usize {
        self.nx() * self.q().n
    }

    pub fn density_layout(&self) -> DensityLayout {
        match self {
            DressedLayout::Helium { x, .. } => DensityLayout::Grid(x.clone()),
            DressedLayout::TwoSite { .. } => DensityLayout::Sites,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DressedOrbital {
    pub layout: DressedLayout,
    /// Row-major `[x, q]`, normalised to 1 under the cell quadrature.
    pub amplitudes: Vec<C64>,
}

impl DressedOrbital {
    /// Electron orbital ⊗ oscillator vacuum in q (the dressed image of a
    /// product state with both the photon and the auxiliary oscillator in
    /// their ground states).
    pub fn product(layout: DressedLayout, electron: &[C64], omega: f64) -> Result<Self> {
        if electron.len() != layout.nx() {
            return Err(Error::LengthMismatch { expected: layout.nx(), actual: electron.len() });
        }
        let g = model::vacuum_amplitude(layout.q(), omega);
        let amplitudes = electron.iter().flat_map(|e| g.iter().map(move |v| e * *v)).collect();
        let mut o = Self { layout, amplitudes };
        o.normalize();
        Ok(o)
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.layout.cell()
    }

    pub fn normalize(&mut self) {
        let n = self.norm().sqrt();
        self.amplitudes.iter_mut().for_each(|z| *z /= n);
    }

    /// Dressed density n′(x, q) = 2|φ′|², x-major.
    pub fn dressed_density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| 2.0 * z.norm_sqr()).collect()
    }

    /// Electron density n(x) = ∫n′dq (site occupations for two sites).
    pub fn density(&self) -> Vec<f64> {
        let nq = self.layout.q().n;
        let dq = self.layout.q().dx;
        self.amplitudes.chunks(nq).map(|row| 2.0 * row.iter().map(|z| z.norm_sqr()).sum::<f64>() * dq).collect()
    }
}

/// Reduced quantities the Mxc potential depends on.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityInputs {
    pub n: Vec<f64>,
    pub r: f64,
    pub p: f64,
}

impl DensityInputs {
    fn mix(&self, other: &DensityInputs, alpha: f64) -> DensityInputs {
        DensityInputs {
            n: self.n.iter().zip(&other.n).map(|(a, b)| (1.0 - alpha) * a + alpha * b).collect(),
            r: (1.0 - alpha) * self.r + alpha * other.r,
            p: (1.0 - alpha) * self.p + alpha * other.p,
        }
    }

    fn distance(&self, other: &DensityInputs) -> f64 {
        let dn = self.n.iter().zip(&other.n).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        dn.max((self.r - other.r).abs()).max((self.p - other.p).abs())
    }
}

/// Everything needed to apply the dressed KS Hamiltonian.
#[derive(Clone, Debug)]
pub struct DressedKsSystem {
    pub model: ModelSystem,
    pub approx: MxcApproximation,
    pub layout: DressedLayout,
    pub tables: PotentialTables,
    /// v′ without the J̇ term, x-major.
    pub external: Vec<f64>,
    /// q/√2 per point (coefficient of J̇(t)/ω).
    source: Vec<f64>,
    axes: Vec<Option<AxisKinetic>>,
}

impl DressedKsSystem {
    pub fn new(model: &ModelSystem, approx: MxcApproximation, layout: DressedLayout) -> Result<Self> {
        let (tables, kx) = match (&layout, model.kind) {
            (DressedLayout::Helium { x, .. }, ModelKind::Helium1d) => {
                if x.boundary != Boundary::HardWall {
                    return Err(Error::RepresentationMismatch("electron axis must be hard-wall".into()));
                }
                (model::soft_coulomb_tables(x), AxisKinetic::for_grid(x))
            }
            (DressedLayout::TwoSite { .. }, ModelKind::TwoSite) => {
                (model::two_site_tables(), AxisKinetic::Dense { n: 2, matrix: model::orbital_hopping_matrix(model.hopping) })
            }
            _ => return Err(Error::RepresentationMismatch("dressed layout does not match the model kind".into())),
        };
        let q = layout.q();
        if q.boundary != Boundary::DecayBox {
            return Err(Error::RepresentationMismatch("auxiliary axis must be a decay box".into()));
        }
        let mut statics = model.clone();
        statics.jdot = model::Jdot::zero();
        let xs = layout.x_values();
        let qs = q.points();
        let mut external = Vec::with_capacity(layout.size());
        let mut source = Vec::with_capacity(layout.size());
        for &x in &xs {
            for &qq in &qs {
                external.push(dressed_external_potential(&statics, approx, x, qq, 0.0));
                source.push(qq / SQRT_2);
            }
        }
        let axes = vec![Some(kx), Some(AxisKinetic::for_grid(q))];
        Ok(Self { model: model.clone(), approx, layout, tables, external, source, axes })
    }

    fn hartree(&self, n: &[f64]) -> Vec<f64> {
        match (&self.layout, self.model.flags.include_w) {
            (DressedLayout::Helium { x, .. }, true) => self.tables.hartree(x, n),
            _ => vec![0.0; self.layout.nx()],
        }
    }

    /// v′_Mxc on the (x, q) grid.
    pub fn mxc_potential(&self, inputs: &DensityInputs) -> Vec<f64> {
        if self.approx == MxcApproximation::None {
            return vec![0.0; self.layout.size()];
        }
        let h = self.hartree(&inputs.n);
        let xs = self.layout.x_values();
        let qs = self.layout.q().points();
        let mut out = Vec::with_capacity(self.layout.size());
        for (i, &x) in xs.iter().enumerate() {
            for &q in &qs {
                out.push(0.5 * h[i] + mxc_coupling(&self.model, self.approx, inputs.r, inputs.p, x, q));
            }
        }
        out
    }

    /// Full KS potential v′ + v′_Mxc at time t.
    pub fn ks_potential(&self, inputs: &DensityInputs, t: f64) -> Vec<f64> {
        let c = self.model.current_term(t);
        let mxc = self.mxc_potential(inputs);
        self.external
            .iter()
            .zip(&mxc)
            .zip(&self.source)
            .map(|((v, m), s)| v + m + c * s)
            .collect()
    }

    pub fn operator(&self, potential: Vec<f64>) -> Result<SeparableOperator> {
        SeparableOperator::new(vec![self.layout.nx(), self.layout.q().n], self.axes.clone(), potential)
    }

    pub fn inputs(&self, orbital: &DressedOrbital) -> DensityInputs {
        let n = orbital.density();
        let w = self.layout.x_weight();
        let r = self.layout.x_values().iter().zip(&n).map(|(x, n)| x * n).sum::<f64>() * w;
        let qs = self.layout.q().points();
        let nq = qs.len();
        let cell = self.layout.cell();
        let p = SQRT_2
            * orbital.amplitudes.iter().enumerate().map(|(i, z)| qs[i % nq] * z.norm_sqr()).sum::<f64>()
            * cell;
        DensityInputs { n, r, p }
    }

    /// Mxc energy whose functional derivative is [`Self::mxc_potential`].
    pub fn mxc_energy(&self, inputs: &DensityInputs) -> f64 {
        let (w, l) = (self.model.omega, self.model.lambda);
        let quad = if self.model.flags.include_quadratic { 1.0 } else { 0.0 };
        let hartree = match &self.layout {
            DressedLayout::Helium { x, .. } if self.model.flags.include_w => {
                let h = self.hartree(&inputs.n);
                0.25 * h.iter().zip(&inputs.n).map(|(a, b)| a * b).sum::<f64>() * x.dx
            }
            _ => 0.0,
        };
        match self.approx {
            MxcApproximation::None => 0.0,
            MxcApproximation::Mx => hartree + quad * 0.25 * l * l * inputs.r * inputs.r - 0.5 * w * l * inputs.p * inputs.r,
            MxcApproximation::Smx | MxcApproximation::SqrtSmx => hartree + quad * 0.25 * l * l * inputs.r * inputs.r,
        }
    }

    /// Total energy 2⟨φ′|T′ + v′|φ′⟩ + E_Mxc at time t.
    pub fn energy(&self, orbital: &DressedOrbital, t: f64) -> Result<f64> {
        let c = self.model.current_term(t);
        let pot: Vec<f64> = self.external.iter().zip(&self.source).map(|(v, s)| v + c * s).collect();
        let op = self.operator(pot)?;
        let one_body = 2.0 * op.expectation(&orbital.amplitudes);
        Ok(one_body + self.mxc_energy(&self.inputs(orbital)))
    }
}

/// Observables of a dressed orbital.
#[derive(Clone, Debug, PartialEq)]
pub struct DressedObservables {
    pub norm: f64,
    pub n: Vec<f64>,
    /// n′(x, q), x-major.
    pub n_prime: Vec<f64>,
    pub r: f64,
    pub p: f64,
    /// ∫(q²/2)n′ − p²/2, the single-orbital reduction of the dressed
    /// fluctuation formula.
    pub delta_p: f64,
    pub pdot: f64,
    pub flin: Vec<f64>,
}

pub fn dressed_observables(system: &DressedKsSystem, orbital: &DressedOrbital) -> DressedObservables {
    let layout = &orbital.layout;
    let q = layout.q();
    let qs = q.points();
    let nq = q.n;
    let cell = layout.cell();
    let inputs = system.inputs(orbital);
    let n_prime = orbital.dressed_density();
    let q2: f64 = n_prime.iter().enumerate().map(|(i, n)| 0.5 * qs[i % nq] * qs[i % nq] * n).sum::<f64>() * cell;
    let d = q.sinc_derivative_matrix();
    let mut mom = 0.0;
    for row in orbital.amplitudes.chunks(nq) {
        for i in 0..nq {
            let dphi: C64 = (0..nq).map(|j| row[j] * d[i * nq + j]).sum();
            mom += (row[i].conj() * dphi).im;
        }
    }
    let pdot = SQRT_2 * mom * cell;
    DressedObservables {
        norm: orbital.norm(),
        flin: crate::diagnostics::flin_dressed(&n_prime, q, &system.model),
        n: inputs.n,
        n_prime,
        r: inputs.r,
        p: inputs.p,
        delta_p: q2 - 0.5 * inputs.p * inputs.p,
        pdot,
    }
}

/// Currents of the dressed orbital: along x (or site occupation rates)
/// and along q, each on the (x, q) grid.
pub fn dressed_currents(system: &DressedKsSystem, orbital: &DressedOrbital) -> (Vec<f64>, Vec<f64>) {
    let layout = &orbital.layout;
    let q = layout.q();
    let nq = q.n;
    let nx = layout.nx();
    let phi = &orbital.amplitudes;
    let mut jx = vec![0.0; nx * nq];
    match layout {
        DressedLayout::Helium { x, .. } => {
            for i in 0..nx {
                for k in 0..nq {
                    let at = |m: usize| phi[m * nq + k];
                    let left = if i > 0 { at(i - 1) } else { C64::new(0.0, 0.0) };
                    let right = if i + 1 < nx { at(i + 1) } else { C64::new(0.0, 0.0) };
                    jx[i * nq + k] = 2.0 * (at(i).conj() * (right - left)).im / (2.0 * x.dx);
                }
            }
        }
        DressedLayout::TwoSite { .. } => {
            let t = system.model.hopping;
            for s in 0..2 {
                for k in 0..nq {
                    let other = phi[(1 - s) * nq + k];
                    jx[s * nq + k] = 2.0 * 2.0 * (phi[s * nq + k].conj() * (-t * other)).im;
                }
            }
        }
    }
    let d = q.sinc_derivative_matrix();
    let mut jq = vec![0.0; nx * nq];
    for i in 0..nx {
        let row = &phi[i * nq..(i + 1) * nq];
        for a in 0..nq {
            let dphi: C64 = (0..nq).map(|b| row[b] * d[a * nq + b]).sum();
            jq[i * nq + a] = 2.0 * (row[a].conj() * dphi).im;
        }
    }
    (jx, jq)
}

/// Electron current j(x) = ∫j′_x dq (or the site occupation rates).
fn electron_current(jx: &[f64], layout: &DressedLayout) -> Vec<f64> {
    let q = layout.q();
    jx.chunks(q.n).map(|row| row.iter().sum::<f64>() * q.dx).collect()
}

#[derive(Clone, Copy, Debug)]
pub struct ScfOptions {
    /// Convergence threshold on both the energy change and the largest
    /// change of (n, R, p) between iterations.
    pub tol: f64,
    pub max_iterations: usize,
    /// Consecutive non-decreasing density changes that switch on mixing.
    pub oscillation_window: usize,
    pub mixing: f64,
}

impl Default for ScfOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iterations: 500, oscillation_window: 10, mixing: 0.5 }
    }
}

#[derive(Clone, Debug)]
pub struct ScfOutcome {
    pub energy: f64,
    pub iterations: usize,
    pub mixing_enabled: bool,
}

/// Generic self-consistency loop over (n, R, p): `solve` returns the
/// lowest orbital of the potential built from the given inputs together
/// with its own inputs and energy.
pub(crate) fn scf_loop<S>(
    mut inputs: DensityInputs,
    opts: ScfOptions,
    mut solve: impl FnMut(&DensityInputs, Option<&S>) -> Result<(S, DensityInputs, f64)>,
) -> Result<(S, ScfOutcome)> {
    let mut previous: Option<S> = None;
    let mut last_energy = f64::INFINITY;
    let mut last_change = f64::INFINITY;
    let mut stalled = 0usize;
    let mut alpha = 1.0;
    for it in 1..=opts.max_iterations {
        let (state, out, energy) = solve(&inputs, previous.as_ref())?;
        let change = inputs.distance(&out);
        let de = (energy - last_energy).abs();
        if change < opts.tol && de < opts.tol {
            return Ok((state, ScfOutcome { energy, iterations: it, mixing_enabled: alpha < 1.0 }));
        }
        if change >= last_change {
            stalled += 1;
        } else {
            stalled = 0;
        }
        if stalled >= opts.oscillation_window && alpha == 1.0 {
            alpha = opts.mixing;
            stalled = 0;
        }
        last_change = change;
        last_energy = energy;
        inputs = inputs.mix(&out, alpha);
        previous = Some(state);
    }
    Err(Error::NoConvergence { iterations: opts.max_iterations, residual: last_change })
}

fn eigen_opts(tol: f64) -> EigenOptions {
    EigenOptions { tol, subspace: 60, max_matvecs: 60_000 }
}

/// Self-consistent dressed ground state: repeated lowest-eigenpair solves
/// of the KS Hamiltonian with the potential rebuilt from the new density.
pub fn dressed_ground_state(system: &DressedKsSystem, opts: ScfOptions) -> Result<(DressedOrbital, ScfOutcome)> {
    let layout = system.layout.clone();
    let nx = layout.nx();
    let start_inputs = DensityInputs { n: vec![0.0; nx], r: 0.0, p: 0.0 };
    let eig_tol = (opts.tol * 0.01).clamp(1e-12, 1e-8);
    let xs = layout.x_values();
    let qs = layout.q().points();
    let guess: Vec<f64> = xs
        .iter()
        .flat_map(|&x| {
            let qs = &qs;
            qs.iter().map(move |q| (-0.5 * x * x).exp() * (-0.5 * q * q).exp() * (1.0 + 0.01 * x))
        })
        .collect();
    scf_loop(start_inputs, opts, |inputs, prev: Option<&DressedOrbital>| {
        let op = system.operator(system.ks_potential(inputs, 0.0))?;
        let start: Vec<f64> = match prev {
            Some(o) => o.amplitudes.iter().map(|z| z.re).collect(),
            None => guess.clone(),
        };
        let pair = op.lowest_eigenpair(&start, |_| {}, eigen_opts(eig_tol))?;
        let mut orbital = DressedOrbital { layout: layout.clone(), amplitudes: pair.vector.iter().map(|&v| C64::new(v, 0.0)).collect() };
        orbital.normalize();
        let out = system.inputs(&orbital);
        let energy = system.energy(&orbital, 0.0)?;
        Ok((orbital, out, energy))
    })
}

/// Schmidt coefficients of φ′(x, q) across the x|q cut, descending.
pub fn schmidt_coefficients(orbital: &DressedOrbital) -> Vec<f64> {
    let nx = orbital.layout.nx();
    let nq = orbital.layout.q().n;
    let m = faer::Mat::<faer::complex_native::c64>::from_fn(nx, nq, |i, j| {
        let z = orbital.amplitudes[i * nq + j];
        faer::complex_native::c64::new(z.re, z.im)
    });
    let mut s = m.singular_values();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

fn record(
    series: &mut ObservableSeries,
    recorder: &Recorder,
    system: &DressedKsSystem,
    orbital: &DressedOrbital,
    t: f64,
    step: usize,
) -> Result<()> {
    let obs = dressed_observables(system, orbital);
    let energy = system.energy(orbital, t)?;
    if !obs.norm.is_finite() || !energy.is_finite() {
        return Err(Error::NonFinite { step, time: t });
    }
    series.rows.push(ObservableRow {
        t,
        norm: obs.norm,
        energy,
        dipole: obs.r,
        p: obs.p,
        pdot: obs.pdot,
        delta_p: obs.delta_p,
        continuity_res: f64::NAN,
        maxwell_res: f64::NAN,
    });
    if recorder.densities || recorder.dressed_density {
        let (jx, jq) = dressed_currents(system, orbital);
        if recorder.densities {
            series.snapshots.push(Snapshot { t, density: obs.n.clone(), current: electron_current(&jx, &orbital.layout) });
        }
        if recorder.dressed_density {
            series.dressed_snapshots.push(DressedSnapshot { t, density: obs.n_prime, current_x: jx, current_q: jq });
        }
    }
    Ok(())
}

/// Self-consistent real-time propagation with one predictor-corrector pass
/// per step: a predictor step under the potential at t gives the densities
/// at t + dt, their average builds the midpoint potential, and the step is
/// repeated from φ′(t) under that potential.
pub fn propagate_dressed(
    orbital: &DressedOrbital,
    system: &DressedKsSystem,
    scheme: Scheme,
    dt: f64,
    steps: usize,
    recorder: Recorder,
    label: &str,
) -> Result<(DressedOrbital, ObservableSeries)> {
    if orbital.layout != system.layout {
        return Err(Error::RepresentationMismatch("orbital and system use different grids".into()));
    }
    let mut phi = orbital.clone();
    let mut series = ObservableSeries::new(label, system.layout.density_layout());
    if recorder.dressed_density {
        series.q_grid = Some(system.layout.q().clone());
    }
    let mut op = system.operator(system.external.clone())?;
    let mut stepper = Stepper::new(scheme, &op, dt);
    record(&mut series, &recorder, system, &phi, 0.0, 0)?;
    for step in 1..=steps {
        let t0 = (step - 1) as f64 * dt;
        let in0 = system.inputs(&phi);
        op.potential = system.ks_potential(&in0, t0);
        let mut trial = phi.amplitudes.clone();
        stepper.step(&op, &mut trial)?;
        let in1 = system.inputs(&DressedOrbital { layout: phi.layout.clone(), amplitudes: trial });
        op.potential = system.ks_potential(&in0.mix(&in1, 0.5), t0 + 0.5 * dt);
        stepper.step(&op, &mut phi.amplitudes)?;
        if step % recorder.stride.max(1) == 0 {
            record(&mut series, &recorder, system, &phi, step as f64 * dt, step)?;
        }
    }
    Ok((phi, series))
}
