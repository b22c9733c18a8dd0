//! Browser bindings: two-site dipole traces, dressed one-body potential
//! maps and dressing matrices. Results are flat `Float64Array`s; the page
//! in `www/` reshapes and draws them on canvases.

use dressed_core::config::RunConfig;
use dressed_core::dressed::{self, MxcApproximation};
use dressed_core::model::{self, InteractionFlags};
use dressed_core::run;
use dressed_core::standard::StandardVariant;
use dressed_core::transform;
use wasm_bindgen::prelude::*;

/// Photon grid used in the browser: small enough for interactive rates.
const DEMO_PHOTON_POINTS: usize = 24;

fn demo_two_site(lambda: f64, t_end: f64, dt: f64, samples: usize) -> Result<RunConfig, String> {
    if !(t_end > 0.0 && dt > 0.0) || samples < 2 {
        return Err("need t_end > 0, dt > 0 and at least two samples".into());
    }
    let steps = (t_end / dt).round() as usize;
    let mut cfg = RunConfig::two_site();
    cfg.model.lambda = lambda;
    cfg.grids.p.n = DEMO_PHOTON_POINTS;
    cfg.grids.q.n = DEMO_PHOTON_POINTS;
    cfg.propagation.dt = dt;
    cfg.propagation.steps = steps;
    cfg.propagation.stride = (steps / (samples - 1)).max(1);
    cfg.output.densities = false;
    cfg.output.photon_orbital = false;
    Ok(cfg)
}

/// Dipole traces of the two-site model: rows of
/// `[t, exact, dressed Mx, standard Mx]`, flattened.
#[wasm_bindgen]
pub fn two_site_dipoles(lambda: f64, t_end: f64, dt: f64, samples: usize) -> Result<Vec<f64>, String> {
    let cfg = demo_two_site(lambda, t_end, dt, samples)?;
    let (_, exact) = run::exact_run(&cfg, "exact").map_err(|e| e.to_string())?;
    let dressed = run::dressed_run(&cfg, MxcApproximation::Mx, "dressed-mx").map_err(|e| e.to_string())?;
    let standard = run::standard_run(&cfg, StandardVariant::Mx, "standard-mx").map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(4 * exact.rows.len());
    for ((e, d), s) in exact.rows.iter().zip(&dressed.rows).zip(&standard.rows) {
        out.extend([e.t, e.dipole, d.dipole, s.dipole]);
    }
    Ok(out)
}

fn approximation(name: &str) -> Result<MxcApproximation, String> {
    match name {
        "none" => Ok(MxcApproximation::None),
        "mx" => Ok(MxcApproximation::Mx),
        "smx" => Ok(MxcApproximation::Smx),
        "sqrt-smx" => Ok(MxcApproximation::SqrtSmx),
        other => Err(format!("unknown approximation `{other}`")),
    }
}

/// Dressed one-body potential v′(x, q) of the helium model with the mode
/// and dipole at rest, sampled on an `nx × nq` grid over x ∈ [−5, 5] and
/// q ∈ [−q_max, q_max]; row-major in x.
#[wasm_bindgen]
pub fn dressed_potential_map(
    lambda: f64,
    omega: f64,
    approx: &str,
    nx: usize,
    nq: usize,
    q_max: f64,
) -> Result<Vec<f64>, String> {
    if nx < 2 || nq < 2 || !(q_max > 0.0) {
        return Err("need at least a 2 × 2 grid and q_max > 0".into());
    }
    let approx = approximation(approx)?;
    let m = model::make_helium_model(omega, lambda, InteractionFlags::physical()).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(nx * nq);
    for i in 0..nx {
        let x = -5.0 + 10.0 * i as f64 / (nx - 1) as f64;
        for a in 0..nq {
            let q = -q_max + 2.0 * q_max * a as f64 / (nq - 1) as f64;
            out.push(dressed::dressed_external_potential(&m, approx, x, q, 0.0));
        }
    }
    Ok(out)
}

/// The N × N dressing matrix (row-major) followed by ‖MMᵀ − I‖∞.
#[wasm_bindgen]
pub fn dressing_matrix(n: usize) -> Result<Vec<f64>, String> {
    let m = transform::dressing_matrix(n).map_err(|e| e.to_string())?;
    let mut out: Vec<f64> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| m.get(i, j)).collect();
    out.push(m.orthogonality_error());
    Ok(out)
}
