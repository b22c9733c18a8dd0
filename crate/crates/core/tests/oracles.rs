mod common;

use common::{hartree_exchange_density, helium_lowest, FockTwoSite};
use dressed_core::config::RunConfig;
use dressed_core::dressed::ScfOptions;
use dressed_core::grid::{Boundary, Grid1D};
use dressed_core::model::{self, InteractionFlags};
use dressed_core::run;
use dressed_core::standard::{self, ElectronLayout};

#[test]
fn two_site_dipole_matches_fock_basis_exponential() {
    let mut cfg = RunConfig::two_site();
    cfg.propagation.dt = 0.01;
    cfg.propagation.steps = 2000;
    cfg.propagation.stride = 50;
    cfg.output.densities = false;
    let (_, series) = run::exact_run(&cfg, "exact").unwrap();
    let m = &cfg.model;
    let fock = FockTwoSite::new(m.hopping, m.omega, m.lambda, 40);
    let reference = fock.dipole_trace(0.5, series.rows.len());
    let err = series.rows.iter().zip(&reference).map(|(r, d)| (r.dipole - d).abs()).fold(0.0, f64::max);
    assert!(err < 1e-8, "max |d − d_Fock| = {err:e}");
}

#[test]
fn fock_oracle_is_converged_in_photon_number() {
    let a = FockTwoSite::new(0.5, 1.0, 0.01, 40).dipole_trace(5.0, 21);
    let b = FockTwoSite::new(0.5, 1.0, 0.01, 60).dipole_trace(5.0, 21);
    let diff = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    // Truncation effects must sit well below the 1e-8 comparison tolerance.
    assert!(diff < 1e-9, "{diff:e}");
}

#[test]
fn bare_helium_levels_match_plain_lanczos() {
    let x = Grid1D::new(-5.0, 5.0, 101, Boundary::HardWall).unwrap();
    let spectrum = run::bare_helium_spectrum(&x).unwrap();
    let e0 = helium_lowest(5.0, 101, 1.0, 400);
    let e1 = helium_lowest(5.0, 101, -1.0, 400);
    assert!((spectrum.e0 - e0).abs() < 1e-8, "E0 {} vs {}", spectrum.e0, e0);
    assert!((spectrum.e1 - e1).abs() < 1e-8, "E1 {} vs {}", spectrum.e1, e1);
}

#[test]
fn bare_hartree_exchange_density_matches_dense_scf() {
    let x = Grid1D::new(-5.0, 5.0, 101, Boundary::HardWall).unwrap();
    let m = model::make_helium_model(model::HELIUM_OMEGA, 0.0, InteractionFlags::physical()).unwrap();
    let opts = ScfOptions { tol: 1e-12, ..ScfOptions::default() };
    let phi = standard::electron_ground_orbital(&m, ElectronLayout::Grid(x.clone()), opts).unwrap();
    let reference = hartree_exchange_density(5.0, 101, 1e-13);
    let n: Vec<f64> = phi.iter().map(|z| 2.0 * z.norm_sqr()).collect();
    assert!(n[0] < 1e-20 && n[100] < 1e-20, "edge density {} {}", n[0], n[100]);
    let err = n[1..100].iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err < 1e-8, "max density error {err:e}");
}
