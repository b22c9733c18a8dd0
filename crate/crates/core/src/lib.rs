//! Dressed-orbital cavity QED laboratory.
//!
//! Two electrons coupled to one cavity mode, in three descriptions:
//!
//! * [`exact`] — the correlated wavefunction in physical coordinates
//!   `(x₁, x₂, p)` or `(singlet configuration, p)`, and the dressed
//!   two-particle problem in `(x₁, q₁, x₂, q₂)`;
//! * [`dressed`] — a single doubly occupied dressed Kohn–Sham orbital
//!   `φ′(x, q)` with the Mx family of mean-field-exchange potentials;
//! * [`standard`] — the standard cavity Kohn–Sham scheme with a classical
//!   mode expectation driven by the analytic Maxwell solution.
//!
//! [`transform`] relates the physical and dressed coordinates,
//! [`diagnostics`] turns equations of motion into residuals, and
//! [`config`]/[`run`] provide the reproducible command-line workflows.
//!
//! Axis conventions: arrays are row-major with the last axis fastest.
//! Helium states are `[x₁, x₂, p]`, two-site states `[configuration, p]`,
//! dressed pairs `[x₁, q₁, x₂, q₂]` and dressed orbitals `[x, q]`.

pub mod config;
pub mod diagnostics;
pub mod dressed;
pub mod error;
pub mod exact;
pub mod grid;
pub mod linalg;
pub mod model;
pub mod operator;
pub mod run;
pub mod series;
pub mod standard;
pub mod transform;

pub use error::{Error, Result};
pub use num_complex::Complex64;
