//! Reproducible workflows behind the command-line subcommands: ground
//! states (`gs`), single propagations (`prop`), the two worked examples
//! (`fig1`, `fig2`), the ground-state fluctuation table (`suppv`) and a
//! quick invariant suite (`check`). Every workflow writes CSV files and a
//! `manifest.toml` into the output directory.

use crate::config::{RunConfig, SchemeChoice, Solver};
use crate::diagnostics;
use crate::dressed::{self, DressedKsSystem, DressedLayout, DressedOrbital, MxcApproximation, ScfOptions};
use crate::error::{Error, Result};
use crate::exact::{self, ExactHamiltonian, ExactState, Parity, Representation};
use crate::grid::Grid1D;
use crate::linalg::{self, C64};
use crate::model::{self, InteractionFlags, ModelKind, ModelSystem};
use crate::operator::Scheme;
use crate::series::{self, fmt, ObservableSeries, Recorder};
use crate::standard::{self, ElectronLayout, StandardKsState, StandardKsSystem, StandardVariant};
use crate::transform::{self, Interpolation};
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Cavity frequency of the interaction-free fluctuation panels: the value
/// at which the vacuum fluctuation 1/(2ω) equals 0.6989.
pub const NO_INTERACTION_OMEGA: f64 = 0.71541;

/// Residual tolerance of exact eigenstates.
const EIGEN_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Gs,
    Prop,
    Fig1,
    Fig2,
    Suppv,
    Check,
}

impl Command {
    pub const ALL: [Command; 6] = [Command::Gs, Command::Prop, Command::Fig1, Command::Fig2, Command::Suppv, Command::Check];

    pub fn name(self) -> &'static str {
        match self {
            Command::Gs => "gs",
            Command::Prop => "prop",
            Command::Fig1 => "fig1",
            Command::Fig2 => "fig2",
            Command::Suppv => "suppv",
            Command::Check => "check",
        }
    }

    /// Configuration a subcommand starts from before the file and the
    /// overrides are applied.
    pub fn default_config(self) -> RunConfig {
        match self {
            Command::Fig1 => fig1_config(),
            Command::Fig2 => fig2_config(),
            Command::Suppv => suppv_config(),
            _ => RunConfig::default(),
        }
    }
}

impl std::str::FromStr for Command {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::ConfigParse(format!("unknown subcommand `{s}`")))
    }
}

/// `fig1` defaults (two-site Rabi oscillation): t ∈ [0, 1400], two full Rabi envelopes.
pub fn fig1_config() -> RunConfig {
    let mut c = RunConfig::two_site();
    c.propagation.steps = 140_000;
    c.propagation.stride = 10;
    c
}

/// `fig2` defaults (helium in a resonant cavity): λ = 0.1, ω = ω₁, t ∈ [0, 60].
pub fn fig2_config() -> RunConfig {
    let mut c = RunConfig::default();
    c.grids.p.n = 32;
    c.grids.q.n = 32;
    c.propagation.steps = 6000;
    c.propagation.stride = 10;
    c
}

/// Ground-state fluctuation table defaults: with w, without the λ² terms,
/// on a reduced dressed-pair grid.
pub fn suppv_config() -> RunConfig {
    let mut c = RunConfig::default();
    c.model.flags = InteractionFlags::without_quadratic();
    c.grids.x.n = 41;
    c.grids.q.n = 20;
    c.approximation.solver = Solver::DressedExact;
    c
}

/// Summary printed by the CLI plus the files written.
#[derive(Clone, Debug, Default)]
pub struct RunReport {
    pub lines: Vec<String>,
    pub files: Vec<PathBuf>,
    /// False when a `check` item failed.
    pub passed: bool,
}

impl RunReport {
    fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }
}

/// Runs a subcommand, writing its outputs and `manifest.toml` into `out`.
pub fn execute(command: Command, config: &RunConfig, out: &Path) -> Result<RunReport> {
    let start = Instant::now();
    std::fs::create_dir_all(out)?;
    let mut report = RunReport { passed: true, ..RunReport::default() };
    match command {
        Command::Gs => run_gs(config, out, &mut report)?,
        Command::Prop => run_prop(config, out, &mut report)?,
        Command::Fig1 => run_fig1(config, out, &mut report)?,
        Command::Fig2 => run_fig2(config, out, &mut report)?,
        Command::Suppv => run_suppv(config, out, &mut report)?,
        Command::Check => run_check(out, &mut report)?,
    }
    let manifest = out.join("manifest.toml");
    series::write_file(&manifest, &manifest_text(command, config, &report, start.elapsed().as_secs_f64()))?;
    report.files.push(manifest);
    Ok(report)
}

fn manifest_text(command: Command, config: &RunConfig, report: &RunReport, wall: f64) -> String {
    let mut t = toml::Table::new();
    t.insert("command".into(), command.name().into());
    t.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    t.insert("wall_time_seconds".into(), wall.into());
    t.insert("passed".into(), report.passed.into());
    let files: Vec<toml::Value> = report
        .files
        .iter()
        .filter_map(|p| p.file_name().map(|n| toml::Value::String(n.to_string_lossy().into_owned())))
        .collect();
    t.insert("files".into(), toml::Value::Array(files));
    if let Ok(toml::Value::Table(c)) = toml::Value::try_from(config) {
        t.insert("config".into(), toml::Value::Table(c));
    }
    toml::to_string(&t).unwrap_or_default()
}

fn recorder(config: &RunConfig) -> Recorder {
    Recorder {
        stride: config.propagation.stride,
        densities: config.output.densities,
        dressed_density: config.output.dressed_density,
    }
}

fn exact_scheme(config: &RunConfig, rep: &Representation) -> Scheme {
    config.propagation.scheme.fixed().unwrap_or_else(|| exact::auto_scheme(rep))
}

fn ks_scheme(choice: SchemeChoice) -> Scheme {
    choice.fixed().unwrap_or(Scheme::CrankNicolson)
}

fn write_series(series: &mut ObservableSeries, model: &ModelSystem, out: &Path, report: &mut RunReport) -> Result<()> {
    diagnostics::annotate(series, model)?;
    report.files.extend(series.write_to(out)?);
    Ok(())
}

fn key_value_csv(rows: &[(String, f64)]) -> String {
    let mut s = String::from("quantity,value\n");
    for (k, v) in rows {
        s.push_str(&format!("{k},{}\n", fmt(*v)));
    }
    s
}

fn columns_csv(header: &[&str], columns: &[Vec<f64>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    let n = columns.first().map_or(0, |c| c.len());
    for i in 0..n {
        let row: Vec<String> = columns.iter().map(|c| fmt(c[i])).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

fn write_text(out: &Path, name: &str, text: &str, report: &mut RunReport) -> Result<()> {
    let path = out.join(name);
    series::write_file(&path, text)?;
    report.files.push(path);
    Ok(())
}

// ---------------------------------------------------------------------------
// Shared building blocks

/// Ground and first dipole-active (odd) excited state of the bare
/// two-electron helium problem.
#[derive(Clone, Debug)]
pub struct HeliumSpectrum {
    pub e0: f64,
    pub e1: f64,
    pub omega1: f64,
    pub ground: ExactState,
}

pub fn bare_helium_spectrum(x: &Grid1D) -> Result<HeliumSpectrum> {
    let m = model::make_helium_model(model::HELIUM_OMEGA, 0.0, InteractionFlags::physical())?;
    let h = exact::build_exact_hamiltonian(&m, &Representation::HeliumElectrons { x: x.clone() })?;
    // The ground state is inversion-even; solving in that sector keeps
    // p(t) = 0 exact under propagation instead of merely small.
    let (e0, ground) = exact::lowest_state(&h, &[], Parity::Even, None, EIGEN_TOL)?;
    let (e1, _) = exact::excited_state(&h, &[ground.clone()], Parity::Odd, EIGEN_TOL)?;
    Ok(HeliumSpectrum { e0, e1, omega1: e1 - e0, ground })
}

/// ψ₀(x₁, x₂) ⊗ photon vacuum on the helium grid.
pub fn helium_initial_state(ground: &ExactState, x: &Grid1D, p: &Grid1D, omega: f64) -> Result<ExactState> {
    exact::product_state(
        Representation::HeliumGrid { x: x.clone(), p: p.clone() },
        &ground.amplitudes,
        &model::vacuum_amplitude(p, omega),
    )
}

/// Electron orbital of the initial state: the Rabi orbital (two sites) or
/// the λ = 0 Hartree-exchange ground orbital (helium).
pub fn initial_orbital(model: &ModelSystem, x: Option<&Grid1D>) -> Result<Vec<C64>> {
    match (model.kind, x) {
        (ModelKind::TwoSite, _) => Ok(model::two_site_initial_orbital().iter().map(|&v| C64::new(v, 0.0)).collect()),
        (ModelKind::Helium1d, Some(x)) => {
            standard::electron_ground_orbital(model, ElectronLayout::Grid(x.clone()), ScfOptions::default())
        }
        (ModelKind::Helium1d, None) => Err(Error::RepresentationMismatch("helium needs an x grid".into())),
    }
}

fn dressed_layout(model: &ModelSystem, x: &Grid1D, q: &Grid1D) -> DressedLayout {
    match model.kind {
        ModelKind::TwoSite => DressedLayout::TwoSite { q: q.clone() },
        ModelKind::Helium1d => DressedLayout::Helium { x: x.clone(), q: q.clone() },
    }
}

fn electron_layout(model: &ModelSystem, x: &Grid1D) -> ElectronLayout {
    match model.kind {
        ModelKind::TwoSite => ElectronLayout::Sites,
        ModelKind::Helium1d => ElectronLayout::Grid(x.clone()),
    }
}

/// Exact propagation from the canonical initial state of the model.
pub fn exact_run(config: &RunConfig, label: &str) -> Result<(ExactHamiltonian, ObservableSeries)> {
    let model = config.model_system()?;
    let p = config.p_grid()?;
    let (rep, psi0) = match model.kind {
        ModelKind::TwoSite => {
            let rep = Representation::TwoSite { p: p.clone() };
            (rep, exact::two_site_initial_state(&model, &p)?)
        }
        ModelKind::Helium1d => {
            let x = config.x_grid()?;
            let spectrum = bare_helium_spectrum(&x)?;
            let rep = Representation::HeliumGrid { x: x.clone(), p: p.clone() };
            (rep, helium_initial_state(&spectrum.ground, &x, &p, model.omega)?)
        }
    };
    let h = exact::build_exact_hamiltonian(&model, &rep)?;
    let scheme = exact_scheme(config, &rep);
    let (_, mut series) = exact::propagate_exact(
        &psi0,
        &h,
        scheme,
        config.propagation.dt,
        config.propagation.steps,
        recorder(config),
        label,
    )?;
    diagnostics::annotate(&mut series, &model)?;
    Ok((h, series))
}

/// Dressed KS propagation from orbital ⊗ vacuum Gaussian in q.
pub fn dressed_run(config: &RunConfig, approx: MxcApproximation, label: &str) -> Result<ObservableSeries> {
    let model = config.model_system()?;
    let x = config.x_grid()?;
    let q = config.q_grid()?;
    let electron = initial_orbital(&model, Some(&x))?;
    let layout = dressed_layout(&model, &x, &q);
    let orbital = DressedOrbital::product(layout.clone(), &electron, model.omega)?;
    let system = DressedKsSystem::new(&model, approx, layout)?;
    let (_, mut series) = dressed::propagate_dressed(
        &orbital,
        &system,
        ks_scheme(config.propagation.scheme),
        config.propagation.dt,
        config.propagation.steps,
        recorder(config),
        label,
    )?;
    diagnostics::annotate(&mut series, &model)?;
    Ok(series)
}

/// Standard KS propagation from the initial orbital with the mode at rest.
pub fn standard_run(config: &RunConfig, variant: StandardVariant, label: &str) -> Result<ObservableSeries> {
    let model = config.model_system()?;
    let x = config.x_grid()?;
    let photon = if config.output.photon_orbital { Some(config.p_grid()?) } else { None };
    let system = StandardKsSystem::new(&model, variant, electron_layout(&model, &x), photon)?;
    let state = StandardKsState::new(&system, &initial_orbital(&model, Some(&x))?)?;
    let (_, mut series) = standard::propagate_standard(
        &state,
        &system,
        ks_scheme(config.propagation.scheme),
        config.propagation.dt,
        config.propagation.steps,
        recorder(config),
        label,
    )?;
    diagnostics::annotate(&mut series, &model)?;
    Ok(series)
}

// ---------------------------------------------------------------------------
// gs

fn run_gs(config: &RunConfig, out: &Path, report: &mut RunReport) -> Result<()> {
    let model = config.model_system()?;
    let x = config.x_grid()?;
    let mut rows: Vec<(String, f64)> = Vec::new();
    let density: (Vec<f64>, Vec<f64>) = match config.approximation.solver {
        Solver::Exact => match model.kind {
            ModelKind::Helium1d => {
                let s = bare_helium_spectrum(&x)?;
                report.line(format!("E0 = {:.8}", s.e0));
                report.line(format!("E1 = {:.8}", s.e1));
                report.line(format!("omega1 = E1 - E0 = {:.8}", s.omega1));
                rows.extend([("E0".into(), s.e0), ("E1".into(), s.e1), ("omega1".into(), s.omega1)]);
                let h = exact::build_exact_hamiltonian(&model.with_lambda(0.0), &Representation::HeliumElectrons { x: x.clone() })?;
                (x.points(), exact::exact_observables(&h, &s.ground, 0.0).density)
            }
            ModelKind::TwoSite => {
                let p = config.p_grid()?;
                let h = exact::build_exact_hamiltonian(&model, &Representation::TwoSite { p })?;
                let (e0, g) = exact::ground_state(&h, EIGEN_TOL)?;
                let obs = exact::exact_observables(&h, &g, 0.0);
                report.line(format!("E0 = {e0:.10}"));
                report.line(format!("delta_p = {:.10}", obs.delta_p));
                rows.extend([("E0".into(), e0), ("p".into(), obs.p), ("delta_p".into(), obs.delta_p)]);
                (vec![-0.5, 0.5], obs.density)
            }
        },
        Solver::DressedKs => {
            let approx = config.approximation.variant.dressed().expect("validated");
            let q = config.q_grid()?;
            let system = DressedKsSystem::new(&model, approx, dressed_layout(&model, &x, &q))?;
            let (orbital, outcome) = dressed::dressed_ground_state(&system, ScfOptions::default())?;
            let obs = dressed::dressed_observables(&system, &orbital);
            report.line(format!("E = {:.10} ({} SCF iterations)", outcome.energy, outcome.iterations));
            report.line(format!("delta_p = {:.10}", obs.delta_p));
            rows.extend([
                ("E".into(), outcome.energy),
                ("R".into(), obs.r),
                ("p".into(), obs.p),
                ("delta_p".into(), obs.delta_p),
                ("scf_iterations".into(), outcome.iterations as f64),
            ]);
            (system.layout.x_values(), obs.n)
        }
        Solver::StandardKs => {
            let variant = config.approximation.variant.standard().expect("validated");
            let photon = if config.output.photon_orbital { Some(config.p_grid()?) } else { None };
            let system = StandardKsSystem::new(&model, variant, electron_layout(&model, &x), photon)?;
            let (state, outcome) = standard::standard_ground_state(&system, ScfOptions::default())?;
            let obs = standard::standard_observables(&system, &state);
            report.line(format!("E = {:.10} ({} SCF iterations)", outcome.energy, outcome.iterations));
            rows.extend([("E".into(), outcome.energy), ("R".into(), obs.r), ("p".into(), obs.p), ("delta_p".into(), obs.delta_p)]);
            (system.layout.x_values(), obs.n)
        }
        Solver::DressedExact => {
            let q = config.q_grid()?;
            let g = dressed_pair_ground(&model, &x, &q)?;
            let red = transform::reduce_dressed_density(&g.state)?;
            report.line(format!("E = {:.10}", g.energy));
            report.line(format!("delta_p = {:.10} (one-body readout {:.10})", red.delta_p, red.delta_p_one_body));
            rows.extend([
                ("E".into(), g.energy),
                ("p".into(), red.p),
                ("delta_p".into(), red.delta_p),
                ("delta_p_one_body".into(), red.delta_p_one_body),
            ]);
            (x.points(), red.n)
        }
    };
    write_text(out, "gs.csv", &key_value_csv(&rows), report)?;
    let (coords, n) = density;
    write_text(out, "gs_density.csv", &columns_csv(&["x", "n"], &[coords, n]), report)
}

// ---------------------------------------------------------------------------
// prop

fn run_prop(config: &RunConfig, out: &Path, report: &mut RunReport) -> Result<()> {
    let model = config.model_system()?;
    let mut series = match config.approximation.solver {
        Solver::Exact => exact_run(config, "exact")?.1,
        Solver::DressedKs => {
            let approx = config.approximation.variant.dressed().expect("validated");
            dressed_run(config, approx, &format!("dressed-{}", approx.name()))?
        }
        Solver::StandardKs => {
            let variant = config.approximation.variant.standard().expect("validated");
            standard_run(config, variant, &format!("standard-{}", short_name(variant)))?
        }
        Solver::DressedExact => {
            return Err(Error::ConfigInvalid {
                key: "approximation.solver".into(),
                reason: "the dressed-pair problem is solved for ground states only (use `gs`)".into(),
            })
        }
    };
    let last = series.rows.last().copied();
    write_series(&mut series, &model, out, report)?;
    if let Some(r) = last {
        report.line(format!("{}: t = {:.4}, norm = {:.12}, R = {:.10}, p = {:.10}, delta_p = {:.10}", series.label, r.t, r.norm, r.dipole, r.p, r.delta_p));
    }
    Ok(())
}

fn short_name(v: StandardVariant) -> &'static str {
    match v {
        StandardVariant::MeanField => "mf",
        StandardVariant::Mx => "mx",
    }
}

// ---------------------------------------------------------------------------
// fig1

/// The four `fig1` trajectories and the L2 distances of the approximate
/// dipoles from the exact one.
#[derive(Clone, Debug)]
pub struct Fig1Result {
    pub exact: ObservableSeries,
    pub dressed_mx: ObservableSeries,
    pub standard_mx: ObservableSeries,
    pub standard_mf: ObservableSeries,
    pub l2_dressed_mx: f64,
    pub l2_standard_mx: f64,
    pub l2_standard_mf: f64,
}

pub fn fig1_runs(config: &RunConfig) -> Result<Fig1Result> {
    if config.model.kind != ModelKind::TwoSite {
        return Err(Error::ConfigInvalid { key: "model.kind".into(), reason: "fig1 needs the two-site model".into() });
    }
    let (_, exact) = exact_run(config, "exact")?;
    let dressed_mx = dressed_run(config, MxcApproximation::Mx, "dressed-mx")?;
    let standard_mx = standard_run(config, StandardVariant::Mx, "standard-mx")?;
    let standard_mf = standard_run(config, StandardVariant::MeanField, "standard-mf")?;
    let h = config.propagation.dt * config.propagation.stride as f64;
    let d = |s: &ObservableSeries| standard::l2_distance(&s.column(|r| r.dipole), &exact.column(|r| r.dipole), h);
    Ok(Fig1Result {
        l2_dressed_mx: d(&dressed_mx),
        l2_standard_mx: d(&standard_mx),
        l2_standard_mf: d(&standard_mf),
        exact,
        dressed_mx,
        standard_mx,
        standard_mf,
    })
}

fn run_fig1(config: &RunConfig, out: &Path, report: &mut RunReport) -> Result<()> {
    let model = config.model_system()?;
    let mut r = fig1_runs(config)?;
    for s in [&mut r.exact, &mut r.dressed_mx, &mut r.standard_mx, &mut r.standard_mf] {
        write_series(s, &model, out, report)?;
    }
    let t_end = config.propagation.dt * config.propagation.steps as f64;
    report.line(format!("L2 distance of d(t) from exact over [0, {t_end}]:"));
    report.line(format!("  dressed Mx  {:.6e}", r.l2_dressed_mx));
    report.line(format!("  standard Mx {:.6e}", r.l2_standard_mx));
    report.line(format!("  standard MF {:.6e}", r.l2_standard_mf));
    let rows = vec![
        ("l2_dressed_mx".to_string(), r.l2_dressed_mx),
        ("l2_standard_mx".to_string(), r.l2_standard_mx),
        ("l2_standard_mf".to_string(), r.l2_standard_mf),
    ];
    write_text(out, "fig1_summary.csv", &key_value_csv(&rows), report)
}

// ---------------------------------------------------------------------------
// fig2

/// The four `fig2` trajectories and the measured properties.
#[derive(Clone, Debug)]
pub struct Fig2Result {
    pub exact: ObservableSeries,
    pub dressed_mx: ObservableSeries,
    pub standard_mx: ObservableSeries,
    pub standard_mf: ObservableSeries,
    /// max |p(t)| of the exact run.
    pub exact_p_max: f64,
    /// max |n(x, t) − n(x, 0)| of the standard mean-field run.
    pub standard_mf_density_change: f64,
    /// max Δp − min Δp of the standard Mx run.
    pub standard_mx_delta_p_spread: f64,
    /// max |Δp(t) − Δp(0)| of the dressed Mx and exact runs.
    pub dressed_mx_peak_change: f64,
    pub exact_peak_change: f64,
}

fn peak_change(s: &ObservableSeries) -> f64 {
    let d = s.column(|r| r.delta_p);
    d.iter().map(|v| (v - d[0]).abs()).fold(0.0, f64::max)
}

fn density_change(s: &ObservableSeries) -> f64 {
    let Some(first) = s.snapshots.first() else { return f64::NAN };
    s.snapshots
        .iter()
        .flat_map(|snap| snap.density.iter().zip(&first.density).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max)
}

pub fn fig2_runs(config: &RunConfig) -> Result<Fig2Result> {
    if config.model.kind != ModelKind::Helium1d {
        return Err(Error::ConfigInvalid { key: "model.kind".into(), reason: "fig2 needs the helium model".into() });
    }
    let mut cfg = config.clone();
    cfg.output.densities = true;
    let (_, exact) = exact_run(&cfg, "exact")?;
    let dressed_mx = dressed_run(&cfg, MxcApproximation::Mx, "dressed-mx")?;
    let standard_mx = standard_run(&cfg, StandardVariant::Mx, "standard-mx")?;
    let standard_mf = standard_run(&cfg, StandardVariant::MeanField, "standard-mf")?;
    let mx_dp = standard_mx.column(|r| r.delta_p);
    Ok(Fig2Result {
        exact_p_max: exact.rows.iter().map(|r| r.p.abs()).fold(0.0, f64::max),
        standard_mf_density_change: density_change(&standard_mf),
        standard_mx_delta_p_spread: mx_dp.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            - mx_dp.iter().copied().fold(f64::INFINITY, f64::min),
        dressed_mx_peak_change: peak_change(&dressed_mx),
        exact_peak_change: peak_change(&exact),
        exact,
        dressed_mx,
        standard_mx,
        standard_mf,
    })
}

fn run_fig2(config: &RunConfig, out: &Path, report: &mut RunReport) -> Result<()> {
    let model = config.model_system()?;
    let mut r = fig2_runs(config)?;
    for s in [&mut r.exact, &mut r.dressed_mx, &mut r.standard_mx, &mut r.standard_mf] {
        write_series(s, &model, out, report)?;
    }
    report.line(format!("exact max |p(t)|                 {:.3e}", r.exact_p_max));
    report.line(format!("standard MF max |δn|             {:.3e}", r.standard_mf_density_change));
    report.line(format!("standard Mx Δp spread            {:.3e}", r.standard_mx_delta_p_spread));
    report.line(format!("dressed Mx peak Δp change        {:.6e}", r.dressed_mx_peak_change));
    report.line(format!("exact peak Δp change             {:.6e}", r.exact_peak_change));
    let rows = vec![
        ("exact_p_max".to_string(), r.exact_p_max),
        ("standard_mf_density_change".to_string(), r.standard_mf_density_change),
        ("standard_mx_delta_p_spread".to_string(), r.standard_mx_delta_p_spread),
        ("dressed_mx_peak_change".to_string(), r.dressed_mx_peak_change),
        ("exact_peak_change".to_string(), r.exact_peak_change),
    ];
    write_text(out, "fig2_summary.csv", &key_value_csv(&rows), report)
}

// ---------------------------------------------------------------------------
// suppv

/// Ground state of the dressed two-particle problem.
#[derive(Clone, Debug)]
pub struct PairGround {
    pub energy: f64,
    pub state: ExactState,
}

pub fn dressed_pair_ground(model: &ModelSystem, x: &Grid1D, q: &Grid1D) -> Result<PairGround> {
    let h = exact::build_exact_hamiltonian(model, &Representation::DressedPair { x: x.clone(), q: q.clone() })?;
    let (energy, state) = exact::ground_state(&h, EIGEN_TOL)?;
    Ok(PairGround { energy, state })
}

/// Which dressed two-particle system a table row was computed from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairSystem {
    /// The physical dressed Hamiltonian (all bilinear terms).
    Exact,
    /// Tilde systems: no two-body bilinear term, one-body bilinear term
    /// scaled by 1, √2 or 2.
    TildeMx,
    TildeSqrtSmx,
    TildeSmx,
}

impl PairSystem {
    pub const ALL: [PairSystem; 4] = [PairSystem::Exact, PairSystem::TildeMx, PairSystem::TildeSqrtSmx, PairSystem::TildeSmx];

    pub fn name(self) -> &'static str {
        match self {
            PairSystem::Exact => "exact",
            PairSystem::TildeMx => "tMx",
            PairSystem::TildeSqrtSmx => "tsqrt-sMx",
            PairSystem::TildeSmx => "tsMx",
        }
    }

    pub fn flags(self, base: InteractionFlags) -> InteractionFlags {
        let (scale, pair) = match self {
            PairSystem::Exact => (1.0, true),
            PairSystem::TildeMx => (1.0, false),
            PairSystem::TildeSqrtSmx => (std::f64::consts::SQRT_2, false),
            PairSystem::TildeSmx => (2.0, false),
        };
        InteractionFlags { bilinear_scale: scale, pair_bilinear: pair, ..base }
    }
}

/// One ground-state fluctuation comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct FluctuationRow {
    pub panel: String,
    pub omega: f64,
    pub lambda: f64,
    pub method: String,
    /// "pair" (exact ρ′₂ formula) or "one-body" (single-orbital formula).
    pub readout: &'static str,
    pub delta_p_zero: f64,
    pub delta_p: f64,
    pub change: f64,
    /// n(x) at λ and at λ = 0.
    pub density: Vec<f64>,
    pub density_zero: Vec<f64>,
}

/// Ground-state fluctuation changes Δp(λ) − Δp(0) of the dressed
/// two-particle systems (exact with the pair readout, tilde systems with
/// the one-body readout) and of the dressed KS approximations.
pub fn fluctuation_panel(panel: &str, base: &ModelSystem, x: &Grid1D, q: &Grid1D) -> Result<Vec<FluctuationRow>> {
    let zero = dressed_pair_ground(&base.with_lambda(0.0), x, q)?;
    let red0 = transform::reduce_dressed_density(&zero.state)?;
    let mut rows = Vec::new();
    for sys in PairSystem::ALL {
        let m = base.with_flags(sys.flags(base.flags));
        let g = dressed_pair_ground(&m, x, q)?;
        let red = transform::reduce_dressed_density(&g.state)?;
        let (readout, d0, d) = match sys {
            PairSystem::Exact => ("pair", red0.delta_p, red.delta_p),
            _ => ("one-body", red0.delta_p_one_body, red.delta_p_one_body),
        };
        rows.push(FluctuationRow {
            panel: panel.into(),
            omega: base.omega,
            lambda: base.lambda,
            method: sys.name().into(),
            readout,
            delta_p_zero: d0,
            delta_p: d,
            change: d - d0,
            density: red.n,
            density_zero: red0.n.clone(),
        });
    }
    let layout = DressedLayout::Helium { x: x.clone(), q: q.clone() };
    let ks0 = DressedKsSystem::new(&base.with_lambda(0.0), MxcApproximation::Mx, layout.clone())?;
    let (orb0, _) = dressed::dressed_ground_state(&ks0, ScfOptions::default())?;
    let obs0 = dressed::dressed_observables(&ks0, &orb0);
    for approx in [MxcApproximation::Mx, MxcApproximation::SqrtSmx, MxcApproximation::Smx] {
        let ks = DressedKsSystem::new(base, approx, layout.clone())?;
        let (orb, _) = dressed::dressed_ground_state(&ks, ScfOptions::default())?;
        let obs = dressed::dressed_observables(&ks, &orb);
        rows.push(FluctuationRow {
            panel: panel.into(),
            omega: base.omega,
            lambda: base.lambda,
            method: format!("dressed-{}", approx.name()),
            readout: "one-body",
            delta_p_zero: obs0.delta_p,
            delta_p: obs.delta_p,
            change: obs.delta_p - obs0.delta_p,
            density: obs.n,
            density_zero: obs0.n.clone(),
        });
    }
    Ok(rows)
}

fn run_suppv(config: &RunConfig, out: &Path, report: &mut RunReport) -> Result<()> {
    if config.model.kind != ModelKind::Helium1d {
        return Err(Error::ConfigInvalid { key: "model.kind".into(), reason: "suppv needs the helium model".into() });
    }
    let base = config.model_system()?;
    let x = config.x_grid()?;
    let no_w = InteractionFlags { include_w: false, ..base.flags };
    let panels = [
        ("bilinear-w", base.clone(), config.model.omega),
        ("bilinear", base.with_flags(no_w), config.model.omega),
        ("bilinear-retuned", base.with_flags(no_w).with_omega(NO_INTERACTION_OMEGA), NO_INTERACTION_OMEGA),
    ];
    let mut table = String::from("panel,omega,lambda,method,readout,delta_p_zero,delta_p,change\n");
    for (panel, m, omega) in panels {
        let q = Grid1D::oscillator_box(omega, config.grids.q.n, config.grids.q.half_width_factor)?;
        let rows = fluctuation_panel(panel, &m, &x, &q)?;
        let mut cols = vec![x.points(), rows[0].density_zero.clone()];
        let mut header = vec!["x".to_string(), "n_zero".to_string()];
        for r in &rows {
            table.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.panel,
                fmt(r.omega),
                fmt(r.lambda),
                r.method,
                r.readout,
                fmt(r.delta_p_zero),
                fmt(r.delta_p),
                fmt(r.change)
            ));
            report.line(format!("{panel:>16} ω={omega:.5} {:>16} ({:>8}) Δp(0)={:.5} change={:.5}", r.method, r.readout, r.delta_p_zero, r.change));
            header.push(format!("dn_{}", r.method));
            cols.push(r.density.iter().zip(&r.density_zero).map(|(a, b)| a - b).collect());
        }
        let header: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
        write_text(out, &format!("suppv_{panel}_density.csv"), &columns_csv(&header, &cols), report)?;
    }
    write_text(out, "suppv.csv", &table, report)
}

// ---------------------------------------------------------------------------
// check

/// One named invariant with its measured value.
#[derive(Clone, Debug)]
pub struct CheckLine {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> CheckLine {
    CheckLine { name, passed, detail }
}

/// Quick invariant suite on small grids (well under a minute).
pub fn check_suite() -> Result<Vec<CheckLine>> {
    let mut out = Vec::new();

    let worst = (2..=64).map(|n| transform::dressing_matrix(n).map(|m| m.orthogonality_error())).collect::<Result<Vec<_>>>()?;
    let worst = worst.into_iter().fold(0.0, f64::max);
    out.push(check("dressing matrices orthogonal (N ≤ 64)", worst < 1e-12, format!("max ‖MMᵀ−I‖∞ = {worst:.2e}")));

    let m = model::make_helium_model(model::HELIUM_OMEGA, model::HELIUM_LAMBDA, InteractionFlags::physical())?;
    let mut dev = 0.0f64;
    for (x, q, r, p) in [(0.3, -1.2, 0.1, 0.02), (-2.0, 3.0, -0.4, 0.1), (4.5, 0.7, 0.0, -0.3)] {
        let mx = dressed::dressed_external_potential(&m, MxcApproximation::Mx, x, q, 0.0)
            + dressed::mxc_coupling(&m, MxcApproximation::Mx, r, p, x, q);
        let smx = dressed::dressed_external_potential(&m, MxcApproximation::Smx, x, q, 0.0)
            + dressed::mxc_coupling(&m, MxcApproximation::Smx, r, p, x, q);
        let bilinear = -(m.omega / std::f64::consts::SQRT_2) * q * m.lambda * x;
        let removed = 0.5 * (-m.omega * p * m.lambda * x - (m.omega / std::f64::consts::SQRT_2) * q * m.lambda * r);
        dev = dev.max((smx - (mx + bilinear - removed)).abs());
    }
    out.push(check("sMx potential = Mx with rescaled bilinear terms", dev < 1e-14, format!("max deviation {dev:.1e}")));

    let p = Grid1D::oscillator_box(model::HELIUM_OMEGA, 64, 8.0)?;
    let h = exact::build_exact_hamiltonian(&m.with_lambda(0.0), &Representation::Photon { p })?;
    let (_, g) = exact::ground_state(&h, 1e-11)?;
    let dp = exact::exact_observables(&h, &g, 0.0).delta_p;
    out.push(check("vacuum fluctuation 1/(2ω)", (dp - 0.5 / model::HELIUM_OMEGA).abs() < 5e-5, format!("Δp = {dp:.6}")));

    // Two-site Krylov propagation against the dense exponential of the same
    // grid Hamiltonian.
    let two = model::make_two_site_model(0.5, 1.0, 0.01)?;
    let pg = Grid1D::oscillator_box(1.0, 40, 8.0)?;
    let rep = Representation::TwoSite { p: pg.clone() };
    let h2 = exact::build_exact_hamiltonian(&two, &rep)?;
    let psi0 = exact::two_site_initial_state(&two, &pg)?;
    let (end, series2) = exact::propagate_exact(&psi0, &h2, Scheme::Krylov, 0.01, 1000, Recorder::every(1000), "check")?;
    let n = h2.op.size();
    let mut dense = vec![0.0; n * n];
    let mut unit = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        unit[j] = 1.0;
        h2.op.apply(&unit, &mut col);
        for i in 0..n {
            dense[i * n + j] = col[i];
        }
        unit[j] = 0.0;
    }
    let u = linalg::symmetric_function(n, &dense, |e| C64::from_polar(1.0, -e * 10.0));
    let reference: Vec<C64> = (0..n).map(|i| (0..n).map(|j| u[i * n + j] * psi0.amplitudes[j]).sum()).collect();
    let err = end.amplitudes.iter().zip(&reference).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    out.push(check("two-site propagation = dense exponential (t = 10)", err < 1e-9, format!("max amplitude error {err:.1e}")));
    let drift = series2.rows.iter().map(|r| (r.norm - 1.0).abs()).fold(0.0, f64::max);
    out.push(check("norm conserved", drift < 1e-10, format!("max |norm − 1| = {drift:.1e}")));

    // Maxwell residual order on the two-site Rabi run.
    let maxwell = |dt: f64| -> Result<f64> {
        let steps = (2.0 / dt).round() as usize;
        let (_, mut s) = exact::propagate_exact(&psi0, &h2, Scheme::Krylov, dt, steps, Recorder { stride: 1, densities: false, dressed_density: false }, "m")?;
        diagnostics::annotate(&mut s, &two)?;
        Ok(diagnostics::max_finite(&s.column(|r| r.maxwell_res)))
    };
    let (a, b) = (maxwell(0.02)?, maxwell(0.01)?);
    let order = diagnostics::convergence_order(a, b);
    out.push(check("Maxwell residual second order", order >= 1.9, format!("order {order:.3}")));

    // Embedding identities on a small coupled helium ground state.
    let x = Grid1D::new(-5.0, 5.0, 31, crate::grid::Boundary::HardWall)?;
    let pg = Grid1D::oscillator_box(m.omega, 32, 8.0)?;
    let qg = Grid1D::oscillator_box(m.omega, 32, 8.0)?;
    let hh = exact::build_exact_hamiltonian(&m, &Representation::HeliumGrid { x: x.clone(), p: pg })?;
    let (_, psi) = exact::ground_state(&hh, 1e-10)?;
    let obs = exact::exact_observables(&hh, &psi, 0.0);
    let emb = transform::embed_dressed(&psi, &qg, m.omega, Interpolation::Sinc)?;
    let red = transform::reduce_dressed_density(&emb)?;
    let dn = obs.density.iter().zip(&red.n).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    out.push(check("n(x) = ∫n′dq after embedding", dn < 1e-6, format!("max |Δn| = {dn:.1e}")));
    let ddp = (obs.delta_p - red.delta_p).abs();
    out.push(check("Δp from (n′, ρ′₂) = Δp from Ψ", ddp < 1e-8, format!("|difference| = {ddp:.1e}")));
    Ok(out)
}

fn run_check(out: &Path, report: &mut RunReport) -> Result<()> {
    let lines = check_suite()?;
    let mut csv = String::from("check,passed,detail\n");
    for l in &lines {
        report.line(format!("{} {}: {}", if l.passed { "PASS" } else { "FAIL" }, l.name, l.detail));
        csv.push_str(&format!("\"{}\",{},\"{}\"\n", l.name, l.passed, l.detail));
        report.passed &= l.passed;
    }
    write_text(out, "check.csv", &csv, report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_names_round_trip() {
        for c in Command::ALL {
            assert_eq!(c.name().parse::<Command>().unwrap(), c);
        }
        assert!("fig3".parse::<Command>().is_err());
    }

    #[test]
    fn subcommand_defaults() {
        assert_eq!(Command::Fig1.default_config().model.kind, ModelKind::TwoSite);
        assert_eq!(Command::Fig1.default_config().propagation.steps, 140_000);
        let s = Command::Suppv.default_config();
        assert!(s.model.flags.include_w && !s.model.flags.include_quadratic);
    }

    #[test]
    fn gs_writes_manifest_and_csv() {
        let dir = std::env::temp_dir().join(format!("dressed-gs-{}", std::process::id()));
        let mut cfg = RunConfig::two_site();
        cfg.grids.p.n = 32;
        let report = execute(Command::Gs, &cfg, &dir).unwrap();
        assert!(dir.join("gs.csv").exists() && dir.join("manifest.toml").exists());
        assert!(report.lines.iter().any(|l| l.starts_with("E0")));
        let manifest = std::fs::read_to_string(dir.join("manifest.toml")).unwrap();
        assert!(manifest.contains("command = \"gs\""));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn prop_is_deterministic() {
        let mut cfg = RunConfig::two_site();
        cfg.grids.p.n = 24;
        cfg.grids.q.n = 24;
        cfg.propagation.steps = 50;
        cfg.approximation.solver = Solver::DressedKs;
        let a = std::env::temp_dir().join(format!("dressed-prop-a-{}", std::process::id()));
        let b = std::env::temp_dir().join(format!("dressed-prop-b-{}", std::process::id()));
        execute(Command::Prop, &cfg, &a).unwrap();
        execute(Command::Prop, &cfg, &b).unwrap();
        let read = |d: &Path| std::fs::read(d.join("dressed-mx.csv")).unwrap();
        assert_eq!(read(&a), read(&b));
        std::fs::remove_dir_all(&a).ok();
        std::fs::remove_dir_all(&b).ok();
    }
}
