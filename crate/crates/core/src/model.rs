//! The two physical models (two-site Rabi model, soft-Coulomb helium in
//! one dimension) and the parameter record consumed by every solver.

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use serde::{Deserialize, Serialize};

/// First dipole-active excitation of the default helium grid; the cavity
/// frequency of the helium examples.
pub const HELIUM_OMEGA: f64 = 0.58037;
pub const HELIUM_LAMBDA: f64 = 0.1;
pub const TWO_SITE_HOPPING: f64 = 0.5;
pub const TWO_SITE_OMEGA: f64 = 1.0;
pub const TWO_SITE_LAMBDA: f64 = 0.01;
/// Dipole of an electron on site 1 and site 2.
pub const SITE_DIPOLES: [f64; 2] = [-0.5, 0.5];
/// Total dipole of the singlet configurations |20⟩, |11⟩, |02⟩.
pub const CONFIG_DIPOLES: [f64; 3] = [-1.0, 0.0, 1.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    TwoSite,
    #[serde(rename = "helium-1d")]
    Helium1d,
}

/// Ablations and scalings of the light-matter and electron-electron terms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InteractionFlags {
    /// Electron-electron interaction w.
    pub include_w: bool,
    /// The dipole self-energy ½(λ·Σx)² and everything derived from it.
    pub include_quadratic: bool,
    /// Factor s on the one-body bilinear coupling; s = 1 is the physical
    /// system, s = √2 and s = 2 the scaled (√N and N) variants.
    pub bilinear_scale: f64,
    /// Keep the two-body bilinear term of the dressed interaction w′. The
    /// dressed-pair Hamiltonian without it (and with s ∈ {1, √2, 2}) is the
    /// "tilde" system whose mean-field treatment is exact.
    pub pair_bilinear: bool,
}

impl Default for InteractionFlags {
    fn default() -> Self {
        Self { include_w: true, include_quadratic: true, bilinear_scale: 1.0, pair_bilinear: true }
    }
}

impl InteractionFlags {
    pub fn physical() -> Self {
        Self::default()
    }

    /// Interaction kept, dipole self-energy dropped.
    pub fn without_quadratic() -> Self {
        Self { include_quadratic: false, ..Self::default() }
    }

    /// Bilinear coupling only (no w, no λ² terms).
    pub fn bilinear_only() -> Self {
        Self { include_w: false, include_quadratic: false, ..Self::default() }
    }
}

/// Tabulated external-current derivative J̇(t), linearly interpolated and
/// held constant outside the table. Empty means identically zero.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Jdot {
    pub samples: Vec<(f64, f64)>,
}

impl Jdot {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.samples.iter().all(|(_, v)| *v == 0.0)
    }

    pub fn at(&self, t: f64) -> f64 {
        let s = &self.samples;
        match s.len() {
            0 => 0.0,
            1 => s[0].1,
            _ => {
                if t <= s[0].0 {
                    return s[0].1;
                }
                for w in s.windows(2) {
                    let ((t0, v0), (t1, v1)) = (w[0], w[1]);
                    if t <= t1 {
                        return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
                    }
                }
                s[s.len() - 1].1
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelSystem {
    pub kind: ModelKind,
    /// Hopping t (two-site only).
    pub hopping: f64,
    pub omega: f64,
    pub lambda: f64,
    pub jdot: Jdot,
    pub n_electrons: usize,
    pub n_modes: usize,
    pub flags: InteractionFlags,
    /// Hard-wall electron box (helium only).
    pub x_domain: (f64, f64),
}

impl ModelSystem {
    fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return Err(Error::InvalidParameter { name: "omega", reason: format!("must be positive, got {}", self.omega) });
        }
        if !self.lambda.is_finite() {
            return Err(Error::InvalidParameter { name: "lambda", reason: "must be finite".into() });
        }
        if !self.flags.bilinear_scale.is_finite() {
            return Err(Error::InvalidParameter { name: "bilinear_scale", reason: "must be finite".into() });
        }
        Ok(())
    }

    /// The same model with a different coupling.
    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self { lambda, ..self.clone() }
    }

    pub fn with_flags(&self, flags: InteractionFlags) -> Self {
        Self { flags, ..self.clone() }
    }

    pub fn with_omega(&self, omega: f64) -> Self {
        Self { omega, ..self.clone() }
    }

    /// J̇(t)/ω, the coefficient of p in the Hamiltonian.
    pub fn current_term(&self, t: f64) -> f64 {
        self.jdot.at(t) / self.omega
    }
}

pub fn make_two_site_model(hopping: f64, omega: f64, lambda: f64) -> Result<ModelSystem> {
    let m = ModelSystem {
        kind: ModelKind::TwoSite,
        hopping,
        omega,
        lambda,
        jdot: Jdot::zero(),
        n_electrons: 2,
        n_modes: 1,
        flags: InteractionFlags { include_w: false, ..InteractionFlags::default() },
        x_domain: (SITE_DIPOLES[0], SITE_DIPOLES[1]),
    };
    m.validate()?;
    Ok(m)
}

pub fn make_helium_model(omega: f64, lambda: f64, flags: InteractionFlags) -> Result<ModelSystem> {
    let m = ModelSystem {
        kind: ModelKind::Helium1d,
        hopping: 0.0,
        omega,
        lambda,
        jdot: Jdot::zero(),
        n_electrons: 2,
        n_modes: 1,
        flags,
        x_domain: (-5.0, 5.0),
    };
    m.validate()?;
    Ok(m)
}

/// Soft-Coulomb attraction of the doubly charged nucleus.
pub fn soft_coulomb_v(x: f64) -> f64 {
    -2.0 / (x * x + 1.0).sqrt()
}

/// Soft-Coulomb electron-electron repulsion.
pub fn soft_coulomb_w(x: f64, y: f64) -> f64 {
    let d = x - y;
    1.0 / (d * d + 1.0).sqrt()
}

#[derive(Clone, Debug, PartialEq)]
pub struct PotentialTables {
    pub v_of_x: Vec<f64>,
    /// Row-major `n×n`.
    pub w_of_xx: Vec<f64>,
    pub site_dipole: Vec<f64>,
}

impl PotentialTables {
    /// Hartree potential ∫n(x′)w(x,x′)dx′ by trapezoidal quadrature.
    pub fn hartree(&self, grid: &Grid1D, n: &[f64]) -> Vec<f64> {
        let weights = grid.weights();
        let m = grid.n;
        (0..m)
            .map(|i| (0..m).map(|j| self.w_of_xx[i * m + j] * n[j] * weights[j]).sum())
            .collect()
    }
}

pub fn soft_coulomb_tables(xgrid: &Grid1D) -> PotentialTables {
    let xs = xgrid.points();
    let n = xs.len();
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            w[i * n + j] = soft_coulomb_w(xs[i], xs[j]);
        }
    }
    PotentialTables { v_of_x: xs.iter().map(|&x| soft_coulomb_v(x)).collect(), w_of_xx: w, site_dipole: Vec::new() }
}

pub fn two_site_tables() -> PotentialTables {
    PotentialTables { v_of_x: vec![0.0; 2], w_of_xx: vec![0.0; 4], site_dipole: SITE_DIPOLES.to_vec() }
}

/// Singlet hopping Hamiltonian in the basis {|20⟩, |11⟩, |02⟩}.
pub fn singlet_hopping_matrix(hopping: f64) -> Vec<f64> {
    let h = -std::f64::consts::SQRT_2 * hopping;
    vec![0.0, h, 0.0, h, 0.0, h, 0.0, h, 0.0]
}

/// One-electron hopping matrix on the two sites.
pub fn orbital_hopping_matrix(hopping: f64) -> Vec<f64> {
    vec![0.0, -hopping, -hopping, 0.0]
}

/// Singlet amplitudes of the doubly occupied orbital (a, b) in the basis
/// {|20⟩, |11⟩, |02⟩}.
pub fn singlet_from_orbital(a: f64, b: f64) -> [f64; 3] {
    [a * a, std::f64::consts::SQRT_2 * a * b, b * b]
}

/// The Rabi initial orbital √¼ on site 1 and √¾ on site 2.
pub fn two_site_initial_orbital() -> [f64; 2] {
    [0.5, 0.75f64.sqrt()]
}

/// Oscillator ground state (ω/π)^¼·exp(−ωq²/2) sampled on a grid and
/// normalised by cell quadrature.
pub fn vacuum_amplitude(grid: &Grid1D, omega: f64) -> Vec<f64> {
    let mut g: Vec<f64> = grid.points().iter().map(|q| (-0.5 * omega * q * q).exp()).collect();
    let norm: f64 = g.iter().map(|v| v * v).sum::<f64>() * grid.dx;
    g.iter_mut().for_each(|v| *v /= norm.sqrt());
    g
}
