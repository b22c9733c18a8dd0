//! Acceptance run: one PASS/FAIL line per headline requirement, measured at
//! the stated tolerances. Heavy items use the reduced grids noted in their
//! line; everything runs in one test so the report prints in order.

mod common;

use common::FockTwoSite;
use dressed_core::config::{RunConfig, SchemeChoice};
use dressed_core::diagnostics;
use dressed_core::dressed::{dressed_external_potential, mxc_coupling, MxcApproximation};
use dressed_core::exact::{self, Representation};
use dressed_core::grid::{Boundary, Grid1D};
use dressed_core::model::{self, InteractionFlags};
use dressed_core::run::{self, fig1_config, fig2_config, suppv_config, PairSystem};
use dressed_core::series::Recorder;
use dressed_core::standard::mean_field_coupling;
use dressed_core::transform::{self, Interpolation};
use std::f64::consts::SQRT_2;
use std::time::Instant;

struct Report {
    lines: Vec<(bool, String)>,
}

impl Report {
    fn record(&mut self, id: u32, name: &str, passed: bool, detail: String) {
        let line = format!("{} [{id:02}] {name}: {detail}", if passed { "PASS" } else { "FAIL" });
        println!("{line}");
        self.lines.push((passed, line));
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn excitation_energy(r: &mut Report) {
    let x = RunConfig::default().x_grid().unwrap();
    let start = Instant::now();
    let s = run::bare_helium_spectrum(&x).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let ok = (s.omega1 - 0.58037).abs() <= 5e-4 && secs < 300.0;
    r.record(1, "first dipole excitation of 1D helium (x ∈ [−5,5], 201 points)", ok,
        format!("ω₁ = {:.6} (target 0.58037 ± 5e−4), E₀ = {:.6}, {secs:.1} s (< 300 s)", s.omega1, s.e0));
}

fn vacuum_fluctuation(r: &mut Report) {
    let omega = model::HELIUM_OMEGA;
    let p = Grid1D::oscillator_box(omega, 64, 8.0).unwrap();
    let m = model::make_helium_model(omega, 0.0, InteractionFlags::physical()).unwrap();
    let h = exact::build_exact_hamiltonian(&m, &Representation::Photon { p }).unwrap();
    let (_, g) = exact::ground_state(&h, 1e-11).unwrap();
    let dp = exact::exact_observables(&h, &g, 0.0).delta_p;
    let ok = format!("{dp:.4}") == "0.8615" && (dp - 0.5 / omega).abs() < 5e-5;
    r.record(2, "vacuum photon fluctuation 1/(2ω)", ok, format!("Δp = {dp:.6} → {dp:.4} (target 0.8615)"));
}

fn fluctuation_table(r: &mut Report) {
    let cfg = suppv_config();
    let base = cfg.model_system().unwrap();
    let (x, q) = (cfg.x_grid().unwrap(), cfg.q_grid().unwrap());
    let start = Instant::now();
    let rows = run::fluctuation_panel("bilinear-w", &base, &x, &q).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let change = |s: PairSystem| rows.iter().find(|row| row.method == s.name()).unwrap().change;
    let exact = change(PairSystem::Exact);
    let ok = (exact - 0.0183).abs() <= 0.002 && secs < 1800.0;
    r.record(3, "exact ground-state fluctuation change (with w, no λ², λ = 0.1, 4D grid 41×20)", ok,
        format!("ΔΔp = {exact:.5} (target 0.0183 ± 0.002), {secs:.0} s for the whole table (< 1800 s)"));

    let (t1, t2, t3) = (change(PairSystem::TildeMx), change(PairSystem::TildeSqrtSmx), change(PairSystem::TildeSmx));
    let close = (t1 - 0.0059).abs() <= 0.002 && (t2 - 0.0121).abs() <= 0.002 && (t3 - 0.0255).abs() <= 0.002;
    let ordered = t1 < t2 && t2 < exact && exact < t3;
    r.record(4, "tilde-system fluctuation changes and ordering", close && ordered,
        format!("tMx {t1:.5} (0.0059), t√sMx {t2:.5} (0.0121), tsMx {t3:.5} (0.0255); ordering tMx < t√sMx < exact < tsMx: {ordered}"));
}

fn two_site_oracle(r: &mut Report) {
    let mut cfg = RunConfig::two_site();
    cfg.propagation.dt = 0.01;
    cfg.propagation.steps = 10_000;
    cfg.propagation.stride = 50;
    cfg.output.densities = false;
    let (_, series) = run::exact_run(&cfg, "exact").unwrap();
    let m = &cfg.model;
    let reference = FockTwoSite::new(m.hopping, m.omega, m.lambda, 40).dipole_trace(0.5, series.rows.len());
    let err = max_abs_diff(&series.column(|row| row.dipole), &reference);
    r.record(5, "two-site d(t) against dense Fock-basis exponential (t ∈ [0,100], dt = 0.01)", err < 1e-8,
        format!("max |d − d_ref| = {err:.2e} (< 1e-8) over {} samples", series.rows.len()));
}

fn dipole_ordering(r: &mut Report) {
    let cfg = fig1_config();
    let res = run::fig1_runs(&cfg).unwrap();
    let t_end = cfg.propagation.dt * cfg.propagation.steps as f64;
    let ok = res.l2_dressed_mx < res.l2_standard_mx;
    r.record(6, "two-site dipole: dressed Mx closer to exact than standard Mx", ok, format!(
        "L2 over [0, {t_end}] (two envelopes): dressed Mx {:.4e} < standard Mx {:.4e} (standard MF {:.4e})",
        res.l2_dressed_mx, res.l2_standard_mx, res.l2_standard_mf
    ));
}

fn helium_emission(r: &mut Report) {
    let mut cfg = fig2_config();
    cfg.grids.x.n = 101;
    cfg.propagation.steps = 4000;
    let res = run::fig2_runs(&cfg).unwrap();
    let ratio = res.dressed_mx_peak_change / res.exact_peak_change;
    let checks = [
        res.exact_p_max < 1e-10,
        res.standard_mf_density_change < 1e-10,
        res.standard_mx_delta_p_spread < 1e-6,
        res.dressed_mx_peak_change > 1e-3 && (0.5..=2.0).contains(&ratio),
    ];
    r.record(7, "helium in a resonant cavity (x 101 points, p/q 32, t ∈ [0,40])", checks.iter().all(|c| *c), format!(
        "exact max|p| {:.1e} (< 1e-10); standard MF max|δn| {:.1e} (< 1e-10); standard Mx Δp spread {:.1e} (< 1e-6); \
         dressed Mx peak ΔΔp {:.4} vs exact {:.4}, ratio {ratio:.2} (within ×2)",
        res.exact_p_max, res.standard_mf_density_change, res.standard_mx_delta_p_spread,
        res.dressed_mx_peak_change, res.exact_peak_change
    ));
}

fn embedding(r: &mut Report) {
    let m = model::make_helium_model(model::HELIUM_OMEGA, model::HELIUM_LAMBDA, InteractionFlags::physical()).unwrap();
    let x = Grid1D::new(-5.0, 5.0, 41, Boundary::HardWall).unwrap();
    let p = Grid1D::oscillator_box(m.omega, 32, 8.0).unwrap();
    let q = Grid1D::oscillator_box(m.omega, 32, 8.0).unwrap();
    // A moving state: bare ground state times a displaced photon vacuum.
    let bare = run::bare_helium_spectrum(&x).unwrap();
    let mut photon: Vec<f64> = p.points().iter().map(|v| (-0.5 * m.omega * (v - 0.4) * (v - 0.4)).exp()).collect();
    let norm = (photon.iter().map(|v| v * v).sum::<f64>() * p.dx).sqrt();
    photon.iter_mut().for_each(|v| *v /= norm);
    let rep = Representation::HeliumGrid { x: x.clone(), p };
    let psi0 = exact::product_state(rep.clone(), &bare.ground.amplitudes, &photon).unwrap();
    let h = exact::build_exact_hamiltonian(&m, &rep).unwrap();
    let (psi, _) = exact::propagate_exact(&psi0, &h, dressed_core::operator::Scheme::Strang, 0.01, 100, Recorder::every(100), "e").unwrap();
    let obs = exact::exact_observables(&h, &psi, 1.0);
    let dressed = transform::embed_dressed(&psi, &q, m.omega, Interpolation::Sinc).unwrap();
    let red = transform::reduce_dressed_density(&dressed).unwrap();
    let dn = max_abs_diff(&obs.density, &red.n);
    let dp = (obs.p - red.p).abs();
    let ddp = (obs.delta_p - red.delta_p).abs();
    let f = exact::bilinear_force(&m, &psi).unwrap();
    let fd = diagnostics::flin_dressed(&red.n_prime, &q, &m);
    let half: Vec<f64> = f.iter().map(|v| 0.5 * v).collect();
    let dforce = max_abs_diff(&fd, &half);
    let ok = dn < 1e-6 && dp < 1e-8 && ddp < 1e-8 && dforce < 1e-8;
    r.record(8, "physical ↔ dressed embedding identities (x 41, p/q 32, p(t) ≠ 0)", ok, format!(
        "max|n − ∫n′dq| {dn:.1e} (< 1e-6); |p − ∫(q/√2)n′| {dp:.1e} (< 1e-8) at p = {:.4}; \
         |Δp(n′,ρ′₂) − Δp(Ψ)| {ddp:.1e} (< 1e-8); max|F^d_lin − F_lin/2| {dforce:.1e} (< 1e-8)",
        obs.p
    ));
}

fn cross_coordinate(r: &mut Report) {
    let m = model::make_helium_model(model::HELIUM_OMEGA, model::HELIUM_LAMBDA, InteractionFlags::physical()).unwrap();
    let x = Grid1D::new(-5.0, 5.0, 48, Boundary::HardWall).unwrap();
    let p = Grid1D::oscillator_box(m.omega, 48, 8.0).unwrap();
    let h = exact::build_exact_hamiltonian(&m, &Representation::HeliumGrid { x: x.clone(), p: p.clone() }).unwrap();
    let (e_phys, _) = exact::ground_state(&h, 1e-9).unwrap();
    let pair = run::dressed_pair_ground(&m, &x, &p).unwrap();
    let diff = (pair.energy - 0.5 * m.omega - e_phys).abs();
    r.record(9, "ground energy in (x₁,x₂,p) equals dressed (x₁,q₁,x₂,q₂) minus ω/2 (48 points per axis)", diff < 1e-6,
        format!("E = {e_phys:.10}, E′ − ω/2 = {:.10}, |difference| {diff:.1e} (< 1e-6)", pair.energy - 0.5 * m.omega));
}

fn dressing_matrices(r: &mut Report) {
    let worst = (2..=64).map(|n| transform::dressing_matrix(n).unwrap().orthogonality_error()).fold(0.0, f64::max);
    let four = transform::dressing_matrix(4).unwrap();
    let e4 = four.orthogonality_error();
    let rows: Vec<String> = (0..4)
        .map(|i| (0..4).map(|j| format!("{:+.4}", four.get(i, j))).collect::<Vec<_>>().join(" "))
        .collect();
    r.record(10, "dressing matrices are orthogonal", worst < 1e-12 && e4 < 1e-15, format!(
        "max_N≤64 ‖MMᵀ−I‖∞ {worst:.1e} (< 1e-12); N = 4: {e4:.1e} (< 1e-15), rows [{}]",
        rows.join(" | ")
    ));
}

fn numerics(r: &mut Report) {
    // Norm and energy conservation over 10⁴ steps of the exact two-site run.
    let mut cfg = RunConfig::two_site();
    cfg.propagation.steps = 10_000;
    cfg.propagation.stride = 1;
    cfg.output.densities = true;
    let (_, two) = run::exact_run(&cfg, "exact").unwrap();
    let per_step = two.rows.windows(2).map(|w| (w[1].norm - w[0].norm).abs()).fold(0.0, f64::max);
    let energy = two.rows.iter().map(|row| (row.energy - two.rows[0].energy).abs()).fold(0.0, f64::max);

    // Norm drift of the self-consistent propagators (Crank–Nicolson).
    let mut ks = RunConfig::two_site();
    ks.propagation.steps = 2000;
    ks.propagation.stride = 1;
    ks.propagation.scheme = SchemeChoice::CrankNicolson;
    let dressed = run::dressed_run(&ks, MxcApproximation::Mx, "d").unwrap();
    let standard = run::standard_run(&ks, dressed_core::standard::StandardVariant::Mx, "s").unwrap();
    let ks_step = [&dressed, &standard]
        .iter()
        .flat_map(|s| s.rows.windows(2).map(|w| (w[1].norm - w[0].norm).abs()))
        .fold(0.0, f64::max);

    // Maxwell residual order on the two-site run, dt halved.
    let maxwell = |dt: f64| {
        let mut c = RunConfig::two_site();
        c.propagation.dt = dt;
        c.propagation.steps = (20.0 / dt).round() as usize;
        c.propagation.stride = 1;
        c.output.densities = false;
        diagnostics::max_finite(&run::exact_run(&c, "m").unwrap().1.column(|row| row.maxwell_res))
    };
    let maxwell_order = diagnostics::convergence_order(maxwell(0.02), maxwell(0.01));

    // Continuity residual order on the resonant helium run, dx and dt halved.
    let continuity = |nx: usize, dt: f64| {
        let mut c = fig2_config();
        c.grids.x.n = nx;
        c.grids.p.n = 24;
        c.propagation.dt = dt;
        c.propagation.steps = (1.0 / dt).round() as usize;
        c.propagation.stride = 1;
        c.output.densities = true;
        diagnostics::max_finite(&run::exact_run(&c, "c").unwrap().1.column(|row| row.continuity_res))
    };
    let continuity_order = diagnostics::convergence_order(continuity(101, 0.01), continuity(201, 0.005));

    let ok = per_step < 1e-10 && ks_step < 1e-10 && energy < 1e-8 && maxwell_order >= 1.9 && continuity_order >= 1.9;
    r.record(11, "propagation numerics", ok, format!(
        "norm drift per step: exact {per_step:.1e}, KS {ks_step:.1e} (< 1e-10); energy drift over 10⁴ steps {energy:.1e} (< 1e-8); \
         Maxwell residual order {maxwell_order:.2}, continuity residual order {continuity_order:.2} (≥ 1.9)"
    ));
}

fn potential_identities(r: &mut Report) {
    let mut worst_smx = 0.0f64;
    let mut worst_mf = 0.0f64;
    for quad in [true, false] {
        let flags = InteractionFlags { include_quadratic: quad, ..InteractionFlags::physical() };
        let helium = model::make_helium_model(model::HELIUM_OMEGA, 0.37, flags).unwrap();
        let two = model::make_two_site_model(0.5, 1.0, 0.21).unwrap();
        for k in 0..200 {
            let t = k as f64;
            let (x, q, rr, p) = (5.0 * (0.7 * t).sin(), 8.0 * (1.3 * t).cos(), (0.3 * t).sin(), 0.5 * (2.1 * t).cos());
            let total = |a| dressed_external_potential(&helium, a, x, q, 0.0) + mxc_coupling(&helium, a, rr, p, x, q);
            let one_body = -(helium.omega / SQRT_2) * q * helium.lambda * x;
            let mean_field = 0.5 * (-helium.omega * p * helium.lambda * x - (helium.omega / SQRT_2) * q * helium.lambda * rr);
            let expected = total(MxcApproximation::Mx) + one_body - mean_field;
            worst_smx = worst_smx.max((total(MxcApproximation::Smx) - expected).abs() / (1.0 + expected.abs()));
            let site = model::SITE_DIPOLES[k % 2];
            let d = mxc_coupling(&two, MxcApproximation::Mx, rr, p, site, q);
            let s = 0.5 * mean_field_coupling(&two, rr, p, site, q / SQRT_2);
            worst_mf = worst_mf.max((d - s).abs());
        }
    }
    r.record(12, "potential identities", worst_smx < 1e-14 && worst_mf < 1e-14, format!(
        "v′_sMx = v′_Mx with bilinear terms rescaled/removed: {worst_smx:.1e}; two-site dressed Mx term = ½ standard mean field: {worst_mf:.1e} (< 1e-14)"
    ));
}

#[test]
fn acceptance() {
    let mut r = Report { lines: Vec::new() };
    excitation_energy(&mut r);
    vacuum_fluctuation(&mut r);
    fluctuation_table(&mut r);
    two_site_oracle(&mut r);
    dipole_ordering(&mut r);
    helium_emission(&mut r);
    embedding(&mut r);
    cross_coordinate(&mut r);
    dressing_matrices(&mut r);
    numerics(&mut r);
    potential_identities(&mut r);
    println!("\n{} of {} requirements met", r.lines.iter().filter(|(ok, _)| *ok).count(), r.lines.len());
    let failed: Vec<&String> = r.lines.iter().filter(|(ok, _)| !*ok).map(|(_, l)| l).collect();
    assert!(failed.is_empty(), "failed:\n{}", failed.iter().map(|s| s.as_str()).collect::<Vec<_>>().join("\n"));
}
