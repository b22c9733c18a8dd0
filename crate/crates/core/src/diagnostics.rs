//! Post-hoc residuals of the equations of motion (continuity, mode-resolved
//! Maxwell) and the dressed bilinear force, computed from recorded series.

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::model::ModelSystem;
use crate::series::{DensityLayout, DressedSnapshot, ObservableSeries, Snapshot};
use std::f64::consts::SQRT_2;

/// Relative tolerance for "uniform" sampling intervals.
const STRIDE_TOL: f64 = 1e-9;

fn centered_interval(t0: f64, t1: f64, t2: f64) -> Result<f64> {
    let (a, b) = (t1 - t0, t2 - t1);
    if !(a > 0.0) || (a - b).abs() > STRIDE_TOL * a.abs().max(b.abs()) {
        return Err(Error::StrideMismatch(format!("samples at t = {t0}, {t1}, {t2} are not uniformly spaced")));
    }
    Ok(a)
}

/// Central difference of a flux on a grid, taking values beyond the ends
/// as zero (the flux through a hard wall vanishes).
fn divergence(grid: &Grid1D, j: &[f64]) -> Vec<f64> {
    let n = j.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { j[i - 1] } else { 0.0 };
            let right = if i + 1 < n { j[i + 1] } else { 0.0 };
            (right - left) / (2.0 * grid.dx)
        })
        .collect()
}

/// ‖(n(t+Δ) − n(t−Δ))/(2Δ) + ∇·j(t)‖∞ from three consecutive snapshots.
/// For the two-site layout the recorded "current" is the occupation rate,
/// so the residual is ‖∂ₜn − rate‖∞.
pub fn continuity_residual(prev: &Snapshot, cur: &Snapshot, next: &Snapshot, layout: &DensityLayout) -> Result<f64> {
    let dt = centered_interval(prev.t, cur.t, next.t)?;
    let len = cur.density.len();
    for s in [prev, next] {
        if s.density.len() != len {
            return Err(Error::LengthMismatch { expected: len, actual: s.density.len() });
        }
    }
    if cur.current.len() != len {
        return Err(Error::LengthMismatch { expected: len, actual: cur.current.len() });
    }
    let flux: Vec<f64> = match layout {
        DensityLayout::Grid(g) => divergence(g, &cur.current),
        DensityLayout::Sites => cur.current.iter().map(|r| -r).collect(),
    };
    Ok((0..len).map(|i| ((next.density[i] - prev.density[i]) / (2.0 * dt) + flux[i]).abs()).fold(0.0, f64::max))
}

/// Dressed continuity ∂ₜn′ + ∂ₓj′ₓ + ∂_q j′_q on the (x, q) grid (x-major);
/// for two sites j′ₓ is the occupation rate and enters with a minus sign.
/// The q-divergence uses the sinc derivative of the decay-box axis.
pub fn dressed_continuity_residual(
    prev: &DressedSnapshot,
    cur: &DressedSnapshot,
    next: &DressedSnapshot,
    layout: &DensityLayout,
    q: &Grid1D,
) -> Result<f64> {
    let dt = centered_interval(prev.t, cur.t, next.t)?;
    let nq = q.n;
    let len = cur.density.len();
    if len % nq != 0 || prev.density.len() != len || next.density.len() != len {
        return Err(Error::LengthMismatch { expected: len, actual: prev.density.len().min(next.density.len()) });
    }
    let nx = len / nq;
    let d = q.sinc_derivative_matrix();
    let mut worst = 0.0f64;
    for i in 0..nx {
        for a in 0..nq {
            let idx = i * nq + a;
            let dq: f64 = (0..nq).map(|b| d[a * nq + b] * cur.current_q[i * nq + b]).sum();
            let dx = match layout {
                DensityLayout::Grid(g) => {
                    let left = if i > 0 { cur.current_x[idx - nq] } else { 0.0 };
                    let right = if i + 1 < nx { cur.current_x[idx + nq] } else { 0.0 };
                    (right - left) / (2.0 * g.dx)
                }
                DensityLayout::Sites => -cur.current_x[idx],
            };
            let r = (next.density[idx] - prev.density[idx]) / (2.0 * dt) + dx + dq;
            worst = worst.max(r.abs());
        }
    }
    Ok(worst)
}

/// Centered residual p̈ + ω²p − sωλR + J̇/ω of uniformly sampled p(t), R(t);
/// the first and last entries are NaN.
pub fn maxwell_residual(t: &[f64], p: &[f64], r: &[f64], model: &ModelSystem) -> Result<Vec<f64>> {
    let n = t.len();
    if n < 3 {
        return Err(Error::TooFewSamples { needed: 3, actual: n });
    }
    if p.len() != n || r.len() != n {
        return Err(Error::LengthMismatch { expected: n, actual: p.len().min(r.len()) });
    }
    let (w, l, s) = (model.omega, model.lambda, model.flags.bilinear_scale);
    let mut out = vec![f64::NAN; n];
    for k in 1..n - 1 {
        let h = centered_interval(t[k - 1], t[k], t[k + 1])?;
        let pdd = (p[k + 1] - 2.0 * p[k] + p[k - 1]) / (h * h);
        out[k] = pdd + w * w * p[k] - s * w * l * r[k] + model.jdot.at(t[k]) / w;
    }
    Ok(out)
}

/// Dressed bilinear force density F^d_lin(x) = λ∫(ωq/√2)n′(x, q)dq for a
/// dressed density stored x-major on a q-grid.
pub fn flin_dressed(n_prime: &[f64], q: &Grid1D, model: &ModelSystem) -> Vec<f64> {
    let qs = q.points();
    let c = model.lambda * model.omega / SQRT_2;
    n_prime.chunks(q.n).map(|row| c * row.iter().zip(&qs).map(|(n, q)| q * n).sum::<f64>() * q.dx).collect()
}

/// Residual diagnostics of one recorded time.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport {
    pub time: f64,
    pub continuity_res: f64,
    pub maxwell_res: f64,
    /// Empty unless the series carries dressed densities.
    pub flin_dressed: Vec<f64>,
    pub norm: f64,
    pub energy: f64,
}

/// Fills the `continuity_res` and `maxwell_res` columns of a series in
/// place. Continuity uses dressed snapshots when present (the (x, q)
/// equation), otherwise electron snapshots; rows without neighbours, or
/// without snapshots, keep NaN.
pub fn annotate(series: &mut ObservableSeries, model: &ModelSystem) -> Result<()> {
    let n = series.rows.len();
    if n < 3 {
        return Ok(());
    }
    let t = series.times();
    let p = series.column(|r| r.p);
    let r = series.column(|r| r.dipole);
    let maxwell = maxwell_residual(&t, &p, &r, model)?;
    let continuity = continuity_column(series)?;
    for (k, row) in series.rows.iter_mut().enumerate() {
        row.maxwell_res = maxwell[k];
        row.continuity_res = continuity[k];
    }
    Ok(())
}

fn continuity_column(series: &ObservableSeries) -> Result<Vec<f64>> {
    let n = series.rows.len();
    let mut out = vec![f64::NAN; n];
    if let (Some(q), true) = (&series.q_grid, series.dressed_snapshots.len() == n) {
        let s = &series.dressed_snapshots;
        for k in 1..n - 1 {
            out[k] = dressed_continuity_residual(&s[k - 1], &s[k], &s[k + 1], &series.layout, q)?;
        }
    } else if series.snapshots.len() == n {
        let s = &series.snapshots;
        for k in 1..n - 1 {
            out[k] = continuity_residual(&s[k - 1], &s[k], &s[k + 1], &series.layout)?;
        }
    }
    Ok(out)
}

/// Per-row residual reports of an annotated series.
pub fn residual_reports(series: &ObservableSeries, model: &ModelSystem) -> Vec<ResidualReport> {
    series
        .rows
        .iter()
        .enumerate()
        .map(|(k, row)| ResidualReport {
            time: row.t,
            continuity_res: row.continuity_res,
            maxwell_res: row.maxwell_res,
            flin_dressed: match (&series.q_grid, series.dressed_snapshots.get(k)) {
                (Some(q), Some(s)) => flin_dressed(&s.density, q, model),
                _ => Vec::new(),
            },
            norm: row.norm,
            energy: row.energy,
        })
        .collect()
}

/// Largest finite entry of a residual column.
pub fn max_finite(values: &[f64]) -> f64 {
    values.iter().filter(|v| v.is_finite()).fold(0.0, |a, b| a.max(b.abs()))
}

/// Observed convergence order log₂(e_coarse / e_fine) for a halving of
/// the discretisation.
pub fn convergence_order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Boundary;
    use crate::model::{make_helium_model, make_two_site_model, InteractionFlags};

    fn snap(t: f64, density: Vec<f64>, current: Vec<f64>) -> Snapshot {
        Snapshot { t, density, current }
    }

    #[test]
    fn stationary_snapshots_have_no_residual() {
        let g = Grid1D::new(-1.0, 1.0, 11, Boundary::HardWall).unwrap();
        let n = vec![0.3; 11];
        let s = [snap(0.0, n.clone(), vec![0.0; 11]), snap(0.1, n.clone(), vec![0.0; 11]), snap(0.2, n, vec![0.0; 11])];
        let r = continuity_residual(&s[0], &s[1], &s[2], &DensityLayout::Grid(g)).unwrap();
        assert!(r < 1e-15);
    }

    #[test]
    fn uneven_sampling_is_rejected() {
        let s = [snap(0.0, vec![1.0, 1.0], vec![0.0, 0.0]), snap(0.1, vec![1.0, 1.0], vec![0.0, 0.0]), snap(0.3, vec![1.0, 1.0], vec![0.0, 0.0])];
        assert!(matches!(continuity_residual(&s[0], &s[1], &s[2], &DensityLayout::Sites), Err(Error::StrideMismatch(_))));
    }

    #[test]
    fn site_rates_balance_occupation_change() {
        // n₂(t) = 1 + 0.5 sin t, rate = 0.5 cos t.
        let mk = |t: f64| snap(t, vec![1.0 - 0.5 * t.sin(), 1.0 + 0.5 * t.sin()], vec![-0.5 * t.cos(), 0.5 * t.cos()]);
        let h = 1e-3;
        let r = continuity_residual(&mk(1.0 - h), &mk(1.0), &mk(1.0 + h), &DensityLayout::Sites).unwrap();
        assert!(r < 1e-7);
    }

    #[test]
    fn free_oscillator_satisfies_maxwell() {
        let m = make_two_site_model(0.5, 1.0, 0.0).unwrap();
        let h = 1e-3;
        let t: Vec<f64> = (0..50).map(|k| k as f64 * h).collect();
        let p: Vec<f64> = t.iter().map(|t| t.cos()).collect();
        let res = maxwell_residual(&t, &p, &vec![0.0; 50], &m).unwrap();
        assert!(res[0].is_nan() && res[49].is_nan());
        assert!(max_finite(&res) < 1e-6);
        assert!(maxwell_residual(&t[..2], &p[..2], &[0.0; 2], &m).is_err());
    }

    #[test]
    fn flin_of_symmetric_profile_vanishes() {
        let m = make_helium_model(0.58037, 0.1, InteractionFlags::physical()).unwrap();
        let q = Grid1D::oscillator_box(0.58037, 32, 8.0).unwrap();
        let g = crate::model::vacuum_amplitude(&q, 0.58037);
        let n_prime: Vec<f64> = (0..3).flat_map(|i| g.iter().map(move |v| (i + 1) as f64 * v * v)).collect();
        assert!(flin_dressed(&n_prime, &q, &m).iter().all(|f| f.abs() < 1e-15));
        assert!(flin_dressed(&n_prime, &q, &m.with_lambda(0.0)).iter().all(|f| *f == 0.0));
    }

    #[test]
    fn order_of_halving() {
        assert!((convergence_order(4e-4, 1e-4) - 2.0).abs() < 1e-12);
    }
}
