//! Orthogonal photon ↔ auxiliary-coordinate transforms and the dressed
//! embedding Ψ′ = Ψ·χ of a two-electron, one-mode state, with the density
//! reductions that relate the two descriptions.

use crate::error::{Error, Result};
use crate::exact::{ExactState, Representation};
use crate::grid::{Boundary, Grid1D};
use crate::linalg::C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};

/// Real orthogonal N×N matrix mapping auxiliary coordinates q₁…q_N to
/// (p, p₂, …, p_N); row 0 is the centre-of-mass row 1/√N.
#[derive(Clone, Debug, PartialEq)]
pub struct DressingMatrix {
    pub n: usize,
    /// Row-major.
    pub matrix: Vec<f64>,
}

impl DressingMatrix {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.matrix[row * self.n + col]
    }

    /// (p₁, …, p_N) = M·q.
    pub fn apply(&self, q: &[f64]) -> Vec<f64> {
        self.matrix.chunks(self.n).map(|row| row.iter().zip(q).map(|(m, q)| m * q).sum()).collect()
    }

    /// q = Mᵀ·p.
    pub fn apply_transpose(&self, p: &[f64]) -> Vec<f64> {
        (0..self.n).map(|j| (0..self.n).map(|i| self.get(i, j) * p[i]).sum()).collect()
    }

    /// ‖MMᵀ − I‖∞ (largest entry).
    pub fn orthogonality_error(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let s: f64 = (0..n).map(|k| self.get(i, k) * self.get(j, k)).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((s - target).abs());
            }
        }
        worst
    }
}

/// Row 0 = (1/√N, …, 1/√N); row k−1 (k ≥ 2) = (1,…,1, −(k−1), 0,…,0)/√(k²−k)
/// with k−1 leading ones.
pub fn dressing_matrix(n: usize) -> Result<DressingMatrix> {
    if n < 2 {
        return Err(Error::InvalidParameter { name: "n", reason: format!("need at least 2 electrons, got {n}") });
    }
    let mut matrix = vec![0.0; n * n];
    let first = 1.0 / (n as f64).sqrt();
    matrix[..n].iter_mut().for_each(|m| *m = first);
    for k in 2..=n {
        let c = 1.0 / ((k * k - k) as f64).sqrt();
        let row = &mut matrix[(k - 1) * n..k * n];
        row[..k - 1].iter_mut().for_each(|m| *m = c);
        row[k - 1] = -((k - 1) as f64) * c;
    }
    Ok(DressingMatrix { n, matrix })
}

/// Interpolation of Ψ along the photon coordinate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Interpolation {
    /// Band-limited interpolant, exact for the sinc-DVR representation.
    #[default]
    Sinc,
    /// Catmull–Rom cubic, zero outside the grid.
    Cubic,
}

/// Row of interpolation weights for the value at `p` on `grid`.
fn interpolation_weights(grid: &Grid1D, p: f64, how: Interpolation) -> Vec<f64> {
    let n = grid.n;
    let u = (p - grid.min) / grid.dx;
    match how {
        // Decay-box amplitudes vanish beyond the grid ends.
        Interpolation::Sinc if u < -0.5 || u > n as f64 - 0.5 => vec![0.0; n],
        Interpolation::Sinc => (0..n)
            .map(|k| {
                let d = u - k as f64;
                if d.abs() < 1e-14 {
                    1.0
                } else {
                    (PI * d).sin() / (PI * d)
                }
            })
            .collect(),
        Interpolation::Cubic => {
            let mut w = vec![0.0; n];
            let i = u.floor();
            let f = u - i;
            let i = i as i64;
            let c = [
                0.5 * (-f * f * f + 2.0 * f * f - f),
                0.5 * (3.0 * f * f * f - 5.0 * f * f + 2.0),
                0.5 * (-3.0 * f * f * f + 4.0 * f * f + f),
                0.5 * (f * f * f - f * f),
            ];
            for (o, ck) in c.iter().enumerate() {
                let k = i - 1 + o as i64;
                if k >= 0 && (k as usize) < n {
                    w[k as usize] += ck;
                }
            }
            w
        }
    }
}

/// Auxiliary ground state χ(p₂) = (ω/π)^¼·exp(−ωp₂²/2).
pub fn auxiliary_ground(omega: f64, p2: f64) -> f64 {
    (omega / PI).powf(0.25) * (-0.5 * omega * p2 * p2).exp()
}

/// Largest |Ψ′| on the q-boundary relative to the largest |Ψ′| that an
/// embedding may leave before the q-box counts as too small.
pub const EMBEDDING_EDGE_LIMIT: f64 = 1e-6;

/// Ψ′(x₁,q₁,x₂,q₂) = Ψ(x₁,x₂,(q₁+q₂)/√2)·χ((q₁−q₂)/√2) for a helium-grid
/// state. The result is not renormalised, so its norm measures the
/// quadrature error of the embedding.
pub fn embed_dressed(psi: &ExactState, q: &Grid1D, omega: f64, how: Interpolation) -> Result<ExactState> {
    let (x, p) = match &psi.representation {
        Representation::HeliumGrid { x, p } => (x, p),
        _ => return Err(Error::RepresentationMismatch("embedding needs a helium-grid state".into())),
    };
    if q.boundary != Boundary::DecayBox {
        return Err(Error::RepresentationMismatch("auxiliary axis must be a decay box".into()));
    }
    let (nx, np, nq) = (x.n, p.n, q.n);
    let qs = q.points();
    // Interpolation weights and χ factor for every (q₁, q₂).
    let mut weights = Vec::with_capacity(nq * nq * np);
    let mut chi = Vec::with_capacity(nq * nq);
    for &q1 in &qs {
        for &q2 in &qs {
            weights.extend(interpolation_weights(p, (q1 + q2) / SQRT_2, how));
            chi.push(auxiliary_ground(omega, (q1 - q2) / SQRT_2));
        }
    }
    let mut amplitudes = vec![C64::new(0.0, 0.0); nx * nq * nx * nq];
    for i1 in 0..nx {
        for i2 in 0..nx {
            let column = &psi.amplitudes[(i1 * nx + i2) * np..(i1 * nx + i2 + 1) * np];
            if column.iter().all(|z| *z == C64::new(0.0, 0.0)) {
                continue;
            }
            for a in 0..nq {
                for b in 0..nq {
                    let ab = a * nq + b;
                    let w = &weights[ab * np..(ab + 1) * np];
                    let val: C64 = column.iter().zip(w).map(|(z, w)| z * *w).sum();
                    amplitudes[((i1 * nq + a) * nx + i2) * nq + b] = val * chi[ab];
                }
            }
        }
    }
    let peak = amplitudes.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut edge = 0.0f64;
    for i1 in 0..nx {
        for a in 0..nq {
            for i2 in 0..nx {
                for b in 0..nq {
                    if a == 0 || b == 0 || a + 1 == nq || b + 1 == nq {
                        edge = edge.max(amplitudes[((i1 * nq + a) * nx + i2) * nq + b].norm());
                    }
                }
            }
        }
    }
    if peak > 0.0 && edge / peak > EMBEDDING_EDGE_LIMIT {
        return Err(Error::GridTooSmall { amplitude: edge / peak, limit: EMBEDDING_EDGE_LIMIT });
    }
    Ok(ExactState { representation: Representation::DressedPair { x: x.clone(), q: q.clone() }, amplitudes })
}

/// Reductions of a dressed-pair state.
#[derive(Clone, Debug, PartialEq)]
pub struct DressedReduction {
    /// n′(x, q) = 2∫|Ψ′(z, z₂)|²dz₂, x-major.
    pub n_prime: Vec<f64>,
    /// n(x) = ∫n′dq.
    pub n: Vec<f64>,
    pub p: f64,
    /// ∫(q²/2)n′ + ½∫∫qq′ρ′₂ − p², the fluctuation formula with the exact
    /// pair density.
    pub delta_p: f64,
    /// ∫(q²/2)n′ − p²/2, the same formula with ρ′₂ replaced by that of a
    /// single doubly occupied orbital.
    pub delta_p_one_body: f64,
}

/// Reduces a dressed-pair state to n′, n, p and the two Δp readouts.
pub fn reduce_dressed_density(state: &ExactState) -> Result<DressedReduction> {
    let (x, q) = match &state.representation {
        Representation::DressedPair { x, q } => (x, q),
        _ => return Err(Error::RepresentationMismatch("reduction needs a dressed-pair state".into())),
    };
    let (nx, nq) = (x.n, q.n);
    let qs = q.points();
    let dz = x.dx * q.dx;
    let block = nx * nq;
    let mut n_prime = vec![0.0; block];
    let mut qq = 0.0;
    for (z1, n1) in n_prime.iter_mut().enumerate() {
        let row = &state.amplitudes[z1 * block..(z1 + 1) * block];
        let q1 = qs[z1 % nq];
        let mut total = 0.0;
        let mut first_moment = 0.0;
        for (z2, a) in row.iter().enumerate() {
            let w = a.norm_sqr();
            total += w;
            first_moment += qs[z2 % nq] * w;
        }
        *n1 = 2.0 * total * dz;
        qq += q1 * first_moment;
    }
    // ½∫∫qq′ρ′₂ with ρ′₂ = 2|Ψ′|².
    let pair = qq * dz * dz;
    let q2: f64 = n_prime.iter().enumerate().map(|(i, n)| 0.5 * qs[i % nq] * qs[i % nq] * n).sum::<f64>() * dz;
    let p = n_prime.iter().enumerate().map(|(i, n)| qs[i % nq] / SQRT_2 * n).sum::<f64>() * dz;
    let n = n_prime.chunks(nq).map(|row| row.iter().sum::<f64>() * q.dx).collect();
    Ok(DressedReduction { n_prime, n, p, delta_p: q2 + pair - p * p, delta_p_one_body: q2 - 0.5 * p * p })
}

/// Dressed pair density ρ′₂(z₁, z₂) = 2|Ψ′(z₁, z₂)|², normalised to
/// N(N−1) = 2 under the cell quadrature; same layout as the state.
pub fn dressed_pair_density(state: &ExactState) -> Result<Vec<f64>> {
    match &state.representation {
        Representation::DressedPair { .. } => Ok(state.amplitudes.iter().map(|z| 2.0 * z.norm_sqr()).collect()),
        _ => Err(Error::RepresentationMismatch("pair density needs a dressed-pair state".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_and_four_electron_rows() {
        let m = dressing_matrix(2).unwrap();
        let r = 1.0 / SQRT_2;
        assert_eq!(m.matrix, vec![r, r, r, -r]);
        let m = dressing_matrix(4).unwrap();
        let (s6, s12) = (6f64.sqrt(), 12f64.sqrt());
        let expect = [
            0.5, 0.5, 0.5, 0.5,
            r, -r, 0.0, 0.0,
            1.0 / s6, 1.0 / s6, -2.0 / s6, 0.0,
            1.0 / s12, 1.0 / s12, 1.0 / s12, -3.0 / s12,
        ];
        for (a, b) in m.matrix.iter().zip(expect) {
            assert!((a - b).abs() <= 1e-15);
        }
        assert!(dressing_matrix(1).is_err());
    }

    #[test]
    fn interpolation_reproduces_nodes() {
        let g = Grid1D::new(-2.0, 2.0, 9, Boundary::DecayBox).unwrap();
        for how in [Interpolation::Sinc, Interpolation::Cubic] {
            let w = interpolation_weights(&g, g.coordinate(3), how);
            for (k, wk) in w.iter().enumerate() {
                assert!((wk - if k == 3 { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
    }

    proptest! {
        #[test]
        fn orthogonal_for_all_sizes(n in 2usize..=64) {
            prop_assert!(dressing_matrix(n).unwrap().orthogonality_error() < 1e-12);
        }

        #[test]
        fn quadratic_form_invariant(q in proptest::collection::vec(-10.0f64..10.0, 2..16)) {
            let m = dressing_matrix(q.len()).unwrap();
            let p = m.apply(&q);
            let sp: f64 = p.iter().map(|v| v * v).sum();
            let sq: f64 = q.iter().map(|v| v * v).sum();
            prop_assert!((sp - sq).abs() <= 1e-12 * sq.max(1.0));
            let back = m.apply_transpose(&p);
            for (a, b) in back.iter().zip(&q) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
