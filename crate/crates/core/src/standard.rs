//! Standard cavity Kohn–Sham scheme: a doubly occupied electron orbital in
//! a mean-field (or standard Mx) potential, the mode displacement p(t) from
//! the analytic solution of the mode-resolved Maxwell equation, and an
//! optional photon orbital for fluctuation readout.

use crate::dressed::{scf_loop, DensityInputs, ScfOptions, ScfOutcome};
use crate::error::{Error, Result};
use crate::grid::{Boundary, Grid1D};
use crate::linalg::{EigenOptions, C64};
use crate::model::{self, ModelKind, ModelSystem, PotentialTables};
use crate::operator::{AxisKinetic, Scheme, SeparableOperator, Stepper};
use crate::series::{DensityLayout, ObservableRow, ObservableSeries, Recorder, Snapshot};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StandardVariant {
    /// Hartree-exchange plus the light-matter mean field.
    MeanField,
    /// Mean field plus ½(λx)² − ½(λR)(λx).
    Mx,
}

impl StandardVariant {
    pub fn name(self) -> &'static str {
        match self {
            StandardVariant::MeanField => "mean-field",
            StandardVariant::Mx => "mx",
        }
    }
}

/// Electron support: a hard-wall grid or the two sites.
#[derive(Clone, Debug, PartialEq)]
pub enum ElectronLayout {
    Grid(Grid1D),
    Sites,
}

impl ElectronLayout {
    pub fn len(&self) -> usize {
        match self {
            ElectronLayout::Grid(g) => g.n,
            ElectronLayout::Sites => 2,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x_values(&self) -> Vec<f64> {
        match self {
            ElectronLayout::Grid(g) => g.points(),
            ElectronLayout::Sites => model::SITE_DIPOLES.to_vec(),
        }
    }

    pub fn weight(&self) -> f64 {
        match self {
            ElectronLayout::Grid(g) => g.dx,
            ElectronLayout::Sites => 1.0,
        }
    }

    fn density_layout(&self) -> DensityLayout {
        match self {
            ElectronLayout::Grid(g) => DensityLayout::Grid(g.clone()),
            ElectronLayout::Sites => DensityLayout::Sites,
        }
    }
}

/// The full standard mean-field light-matter term at electron coordinate
/// x and photon coordinate p_coord: (λR − sωp)λx − sωλR·p_coord. The
/// electron potential uses p_coord = 0; the photon orbital sees the second
/// part.
pub fn mean_field_coupling(model: &ModelSystem, r: f64, p: f64, x: f64, p_coord: f64) -> f64 {
    let (w, l, s) = (model.omega, model.lambda, model.flags.bilinear_scale);
    let quad = if model.flags.include_quadratic { 1.0 } else { 0.0 };
    (quad * l * r - s * w * p) * l * x - s * w * l * r * p_coord
}

/// Variant-specific correction to the mean field at x.
fn variant_term(model: &ModelSystem, variant: StandardVariant, r: f64, x: f64) -> f64 {
    let l = model.lambda;
    match (variant, model.flags.include_quadratic) {
        (StandardVariant::Mx, true) => 0.5 * l * l * x * x - 0.5 * l * l * r * x,
        _ => 0.0,
    }
}

#[derive(Clone, Debug)]
pub struct StandardKsSystem {
    pub model: ModelSystem,
    pub variant: StandardVariant,
    pub layout: ElectronLayout,
    pub tables: PotentialTables,
    /// Photon grid for the optional photon orbital.
    pub photon: Option<Grid1D>,
    kinetic: AxisKinetic,
}

impl StandardKsSystem {
    pub fn new(model: &ModelSystem, variant: StandardVariant, layout: ElectronLayout, photon: Option<Grid1D>) -> Result<Self> {
        let (tables, kinetic) = match (&layout, model.kind) {
            (ElectronLayout::Grid(x), ModelKind::Helium1d) => {
                if x.boundary != Boundary::HardWall {
                    return Err(Error::RepresentationMismatch("electron axis must be hard-wall".into()));
                }
                (model::soft_coulomb_tables(x), AxisKinetic::for_grid(x))
            }
            (ElectronLayout::Sites, ModelKind::TwoSite) => {
                (model::two_site_tables(), AxisKinetic::Dense { n: 2, matrix: model::orbital_hopping_matrix(model.hopping) })
            }
            _ => return Err(Error::RepresentationMismatch("electron layout does not match the model kind".into())),
        };
        if let Some(p) = &photon {
            if p.boundary != Boundary::DecayBox {
                return Err(Error::RepresentationMismatch("photon axis must be a decay box".into()));
            }
        }
        Ok(Self { model: model.clone(), variant, layout, tables, photon, kinetic })
    }

    fn hartree(&self, n: &[f64]) -> Vec<f64> {
        match (&self.layout, self.model.flags.include_w) {
            (ElectronLayout::Grid(x), true) => self.tables.hartree(x, n),
            _ => vec![0.0; self.layout.len()],
        }
    }

    /// Electron KS potential v + ½∫nw + mean-field coupling + variant term.
    pub fn potential(&self, n: &[f64], r: f64, p: f64) -> Vec<f64> {
        let h = self.hartree(n);
        self.layout
            .x_values()
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                self.tables.v_of_x[i]
                    + 0.5 * h[i]
                    + mean_field_coupling(&self.model, r, p, x, 0.0)
                    + variant_term(&self.model, self.variant, r, x)
            })
            .collect()
    }

    pub fn electron_operator(&self, potential: Vec<f64>) -> Result<SeparableOperator> {
        SeparableOperator::new(vec![self.layout.len()], vec![Some(self.kinetic.clone())], potential)
    }

    /// Photon-orbital Hamiltonian −½∂² + ½ω²p² − sωλR·p + J̇p/ω.
    pub fn photon_operator(&self, r: f64, t: f64) -> Result<SeparableOperator> {
        let grid = self.photon.as_ref().ok_or_else(|| Error::InvalidParameter {
            name: "photon",
            reason: "no photon grid configured".into(),
        })?;
        let w = self.model.omega;
        let c = self.model.current_term(t);
        let pot = grid
            .points()
            .iter()
            .map(|&pp| 0.5 * w * w * pp * pp + mean_field_coupling(&self.model, r, 0.0, 0.0, pp) + c * pp)
            .collect();
        SeparableOperator::new(vec![grid.n], vec![Some(AxisKinetic::for_grid(grid))], pot)
    }

    /// n and R of an electron orbital.
    pub fn density(&self, orbital: &[C64]) -> (Vec<f64>, f64) {
        let w = self.layout.weight();
        let n: Vec<f64> = orbital.iter().map(|z| 2.0 * z.norm_sqr()).collect();
        let r = self.layout.x_values().iter().zip(&n).map(|(x, n)| x * n).sum::<f64>() * w;
        (n, r)
    }

    /// Electron part of the energy for the Mxc functional of the variant.
    fn electron_energy(&self, orbital: &[C64]) -> Result<f64> {
        let (n, r) = self.density(orbital);
        let l = self.model.lambda;
        let op = self.electron_operator(self.tables.v_of_x.clone())?;
        let one_body = 2.0 * op.expectation(orbital);
        let h = self.hartree(&n);
        let w = self.layout.weight();
        let hartree = 0.25 * h.iter().zip(&n).map(|(a, b)| a * b).sum::<f64>() * w;
        let quad = match (self.variant, self.model.flags.include_quadratic) {
            (_, false) => 0.0,
            (StandardVariant::MeanField, true) => 0.5 * l * l * r * r,
            (StandardVariant::Mx, true) => {
                let x2: f64 = self.layout.x_values().iter().zip(&n).map(|(x, n)| x * x * n).sum::<f64>() * w;
                0.5 * l * l * x2 + 0.25 * l * l * r * r
            }
        };
        Ok(one_body + hartree + quad)
    }

    /// Total energy: electrons + classical mode ½ṗ² + ½ω²p² − sωλpR + J̇p/ω.
    pub fn energy(&self, state: &StandardKsState, t: f64) -> Result<f64> {
        let (_, r) = self.density(&state.orbital);
        let (w, l, s) = (self.model.omega, self.model.lambda, self.model.flags.bilinear_scale);
        let mode = 0.5 * state.pdot * state.pdot + 0.5 * w * w * state.p * state.p - s * w * l * state.p * r
            + self.model.current_term(t) * state.p;
        Ok(self.electron_energy(&state.orbital)? + mode)
    }
}

/// Electron orbital, mode expectations and optional photon orbital.
#[derive(Clone, Debug, PartialEq)]
pub struct StandardKsState {
    /// Doubly occupied orbital, normalised to 1 under the cell quadrature.
    pub orbital: Vec<C64>,
    pub photon: Option<Vec<C64>>,
    pub p: f64,
    pub pdot: f64,
}

impl StandardKsState {
    /// Orbital with the mode at rest in its vacuum (p = ṗ = 0); the photon
    /// orbital is the vacuum Gaussian when the system has a photon grid.
    pub fn new(system: &StandardKsSystem, orbital: &[C64]) -> Result<Self> {
        if orbital.len() != system.layout.len() {
            return Err(Error::LengthMismatch { expected: system.layout.len(), actual: orbital.len() });
        }
        let mut orbital = orbital.to_vec();
        normalize(&mut orbital, system.layout.weight());
        let photon = system
            .photon
            .as_ref()
            .map(|g| model::vacuum_amplitude(g, system.model.omega).iter().map(|&v| C64::new(v, 0.0)).collect());
        Ok(Self { orbital, photon, p: 0.0, pdot: 0.0 })
    }

    pub fn norm(&self, layout: &ElectronLayout) -> f64 {
        self.orbital.iter().map(|z| z.norm_sqr()).sum::<f64>() * layout.weight()
    }
}

fn normalize(v: &mut [C64], weight: f64) {
    let n = (v.iter().map(|z| z.norm_sqr()).sum::<f64>() * weight).sqrt();
    v.iter_mut().for_each(|z| *z /= n);
}

/// Advances (p, ṗ) of p̈ = −ω²p + f(t) by dt: the homogeneous part exactly,
/// the Duhamel integral of f by the trapezoidal rule with f₀ = f(t) and
/// f₁ = f(t + dt).
pub fn maxwell_step(p: f64, pdot: f64, f0: f64, f1: f64, omega: f64, dt: f64) -> (f64, f64) {
    let (sn, c) = (omega * dt).sin_cos();
    let p1 = p * c + pdot * sn / omega + 0.5 * dt * sn / omega * f0;
    let pdot1 = -p * omega * sn + pdot * c + 0.5 * dt * (c * f0 + f1);
    (p1, pdot1)
}

/// Maxwell source sωλR − J̇/ω.
fn maxwell_source(model: &ModelSystem, r: f64, t: f64) -> f64 {
    model.flags.bilinear_scale * model.omega * model.lambda * r - model.current_term(t)
}

/// Photon-orbital ⟨p⟩ and ⟨p²⟩ − ⟨p⟩².
fn photon_moments(grid: &Grid1D, phi: &[C64]) -> (f64, f64) {
    let ps = grid.points();
    let w: Vec<f64> = phi.iter().map(|z| z.norm_sqr() * grid.dx).collect();
    let norm: f64 = w.iter().sum();
    let m1 = ps.iter().zip(&w).map(|(p, w)| p * w).sum::<f64>() / norm;
    let m2 = ps.iter().zip(&w).map(|(p, w)| p * p * w).sum::<f64>() / norm;
    (m1, m2 - m1 * m1)
}

/// Electron current on the grid (central differences), or the site
/// occupation rates.
fn electron_current(system: &StandardKsSystem, phi: &[C64]) -> Vec<f64> {
    match &system.layout {
        ElectronLayout::Grid(g) => {
            let n = g.n;
            (0..n)
                .map(|i| {
                    let left = if i > 0 { phi[i - 1] } else { C64::new(0.0, 0.0) };
                    let right = if i + 1 < n { phi[i + 1] } else { C64::new(0.0, 0.0) };
                    2.0 * (phi[i].conj() * (right - left)).im / (2.0 * g.dx)
                })
                .collect()
        }
        ElectronLayout::Sites => {
            let t = system.model.hopping;
            (0..2).map(|s| 4.0 * (phi[s].conj() * (-t * phi[1 - s])).im).collect()
        }
    }
}

/// Observables of a standard KS state.
#[derive(Clone, Debug, PartialEq)]
pub struct StandardObservables {
    pub norm: f64,
    pub n: Vec<f64>,
    pub r: f64,
    pub p: f64,
    pub pdot: f64,
    /// From the photon orbital when present, else the vacuum value 1/(2ω)
    /// that a linearly driven oscillator keeps.
    pub delta_p: f64,
    /// ⟨p⟩ of the photon orbital, if propagated.
    pub photon_p: Option<f64>,
}

pub fn standard_observables(system: &StandardKsSystem, state: &StandardKsState) -> StandardObservables {
    let (n, r) = system.density(&state.orbital);
    let (photon_p, delta_p) = match (&system.photon, &state.photon) {
        (Some(g), Some(phi)) => {
            let (m, d) = photon_moments(g, phi);
            (Some(m), d)
        }
        _ => (None, 0.5 / system.model.omega),
    };
    StandardObservables { norm: state.norm(&system.layout), n, r, p: state.p, pdot: state.pdot, delta_p, photon_p }
}

fn eigen_opts(tol: f64) -> EigenOptions {
    EigenOptions { tol, subspace: 60, max_matvecs: 60_000 }
}

/// Self-consistent standard KS ground state with the mode at its static
/// equilibrium p = sλR/ω (J̇(0) = 0 required).
pub fn standard_ground_state(system: &StandardKsSystem, opts: ScfOptions) -> Result<(StandardKsState, ScfOutcome)> {
    if system.model.jdot.at(0.0) != 0.0 {
        return Err(Error::InvalidParameter { name: "jdot", reason: "ground states need J̇(0) = 0".into() });
    }
    let nx = system.layout.len();
    let guess: Vec<f64> = system.layout.x_values().iter().map(|x| (-0.5 * x * x).exp() * (1.0 + 0.01 * x)).collect();
    let eig_tol = (opts.tol * 0.01).clamp(1e-12, 1e-8);
    let (w, l, s) = (system.model.omega, system.model.lambda, system.model.flags.bilinear_scale);
    let start = DensityInputs { n: vec![0.0; nx], r: 0.0, p: 0.0 };
    let (orbital, outcome) = scf_loop(start, opts, |inputs, prev: Option<&Vec<C64>>| {
        let op = system.electron_operator(system.potential(&inputs.n, inputs.r, inputs.p))?;
        let start: Vec<f64> = match prev {
            Some(o) => o.iter().map(|z| z.re).collect(),
            None => guess.clone(),
        };
        let pair = op.lowest_eigenpair(&start, |_| {}, eigen_opts(eig_tol))?;
        let mut orbital: Vec<C64> = pair.vector.iter().map(|&v| C64::new(v, 0.0)).collect();
        normalize(&mut orbital, system.layout.weight());
        let (n, r) = system.density(&orbital);
        let p = s * l * r / w;
        let state = StandardKsState { orbital: orbital.clone(), photon: None, p, pdot: 0.0 };
        let energy = system.energy(&state, 0.0)?;
        Ok((orbital, DensityInputs { n, r, p }, energy))
    })?;
    let mut state = StandardKsState::new(system, &orbital)?;
    let (_, r) = system.density(&state.orbital);
    state.p = s * l * r / w;
    if system.photon.is_some() {
        let op = system.photon_operator(r, 0.0)?;
        let grid = system.photon.as_ref().unwrap();
        let start: Vec<f64> = grid.points().iter().map(|q| (-0.5 * w * q * q).exp()).collect();
        let pair = op.lowest_eigenpair(&start, |_| {}, eigen_opts(1e-11))?;
        let mut phi: Vec<C64> = pair.vector.iter().map(|&v| C64::new(v, 0.0)).collect();
        normalize(&mut phi, grid.dx);
        state.photon = Some(phi);
    }
    Ok((state, outcome))
}

fn record(
    series: &mut ObservableSeries,
    recorder: &Recorder,
    system: &StandardKsSystem,
    state: &StandardKsState,
    t: f64,
    step: usize,
) -> Result<()> {
    let obs = standard_observables(system, state);
    let energy = system.energy(state, t)?;
    if !obs.norm.is_finite() || !energy.is_finite() || !state.p.is_finite() {
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
    if recorder.densities {
        series.snapshots.push(Snapshot { t, density: obs.n, current: electron_current(system, &state.orbital) });
    }
    Ok(())
}

/// Predictor-corrector propagation: a predictor step of the orbital and
/// the mode under the potential at t gives (n, R, p) at t + dt; their
/// average with the values at t builds the midpoint potential for the
/// corrector step from the state at t. The mode is then advanced with the
/// corrected R(t + dt), and the photon orbital (if any) takes one step
/// under the midpoint mean field.
pub fn propagate_standard(
    state: &StandardKsState,
    system: &StandardKsSystem,
    scheme: Scheme,
    dt: f64,
    steps: usize,
    recorder: Recorder,
    label: &str,
) -> Result<(StandardKsState, ObservableSeries)> {
    if state.orbital.len() != system.layout.len() {
        return Err(Error::LengthMismatch { expected: system.layout.len(), actual: state.orbital.len() });
    }
    let mut st = state.clone();
    let mut series = ObservableSeries::new(label, system.layout.density_layout());
    let mut op = system.electron_operator(system.tables.v_of_x.clone())?;
    let mut stepper = Stepper::new(scheme, &op, dt);
    let photon_scheme = if scheme == Scheme::Strang { Scheme::Strang } else { Scheme::CrankNicolson };
    let mut photon_stepper = match &system.photon {
        Some(_) => Some(Stepper::new(photon_scheme, &system.photon_operator(0.0, 0.0)?, dt)),
        None => None,
    };
    let w = system.model.omega;
    record(&mut series, &recorder, system, &st, 0.0, 0)?;
    for step in 1..=steps {
        let t0 = (step - 1) as f64 * dt;
        let (n0, r0) = system.density(&st.orbital);
        let f0 = maxwell_source(&system.model, r0, t0);
        // Predictor.
        op.potential = system.potential(&n0, r0, st.p);
        let mut trial = st.orbital.clone();
        stepper.step(&op, &mut trial)?;
        let (n1, r1) = system.density(&trial);
        let (p1, _) = maxwell_step(st.p, st.pdot, f0, maxwell_source(&system.model, r1, t0 + dt), w, dt);
        // Corrector from the midpoint potential.
        let nm: Vec<f64> = n0.iter().zip(&n1).map(|(a, b)| 0.5 * (a + b)).collect();
        op.potential = system.potential(&nm, 0.5 * (r0 + r1), 0.5 * (st.p + p1));
        stepper.step(&op, &mut st.orbital)?;
        let (_, r1) = system.density(&st.orbital);
        if let (Some(ps), Some(phi)) = (photon_stepper.as_mut(), st.photon.as_mut()) {
            let pop = system.photon_operator(0.5 * (r0 + r1), t0 + 0.5 * dt)?;
            ps.step(&pop, phi)?;
        }
        let (p, pdot) = maxwell_step(st.p, st.pdot, f0, maxwell_source(&system.model, r1, t0 + dt), w, dt);
        st.p = p;
        st.pdot = pdot;
        if step % recorder.stride.max(1) == 0 {
            record(&mut series, &recorder, system, &st, step as f64 * dt, step)?;
        }
    }
    Ok((st, series))
}

/// Electron-only reference orbital of a two-electron singlet with
/// Hartree-exchange ½∫nw (no cavity), normalised to 1.
pub fn electron_ground_orbital(model: &ModelSystem, layout: ElectronLayout, opts: ScfOptions) -> Result<Vec<C64>> {
    let bare = model.with_lambda(0.0);
    let sys = StandardKsSystem::new(&bare, StandardVariant::MeanField, layout, None)?;
    let (state, _) = standard_ground_state(&sys, opts)?;
    Ok(state.orbital)
}

/// √(Σ|a − b|²) over two equally sampled series, times √Δt: the discrete
/// L2 distance of two trajectories on a uniform time grid.
pub fn l2_distance(a: &[f64], b: &[f64], dt: f64) -> f64 {
    (a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() * dt).sqrt()
}

/// Largest |p_orbital − p_ODE| over recorded rows (consistency of the two
/// photon descriptions).
pub fn photon_consistency(system: &StandardKsSystem, state: &StandardKsState) -> Option<f64> {
    standard_observables(system, state).photon_p.map(|m| (m - state.p).abs())
}
