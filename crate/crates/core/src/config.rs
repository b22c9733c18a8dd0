//! Run configuration: a TOML document with the sections `model`, `grids`,
//! `propagation`, `approximation` and `output`. Every key is optional;
//! missing keys take the defaults of the resonant helium configuration, or the
//! two-site Rabi parameters when `model.kind = "two-site"`. Unknown keys
//! are rejected.
//!
//! ```toml
//! [model]
//! kind = "helium-1d"        # or "two-site"
//! omega = 0.58037
//! lambda = 0.1
//! [model.flags]
//! include_w = true
//! include_quadratic = true
//! bilinear_scale = 1.0
//! pair_bilinear = true
//!
//! [grids.x]
//! min = -5.0
//! max = 5.0
//! n = 201
//! [grids.q]                 # auxiliary coordinate, also [grids.p]
//! n = 64
//! half_width_factor = 8.0   # box = ±factor/√ω
//!
//! [propagation]
//! scheme = "auto"           # auto | crank-nicolson | strang | krylov
//! dt = 0.01
//! steps = 2000
//! stride = 10
//!
//! [approximation]
//! solver = "exact"          # exact | dressed-ks | standard-ks | dressed-exact
//! variant = "mx"            # none | mx | smx | sqrt-smx | mean-field
//!
//! [output]
//! directory = "out"
//! densities = true
//! dressed_density = false
//! photon_orbital = true
//! ```
//!
//! Overrides use dotted keys with TOML values, e.g. `model.lambda=0.05`
//! or `approximation.solver=dressed-ks` (bare words are read as strings).

use crate::dressed::MxcApproximation;
use crate::error::{Error, Result};
use crate::grid::{Boundary, Grid1D};
use crate::model::{self, InteractionFlags, ModelKind, ModelSystem};
use crate::operator::Scheme;
use crate::standard::StandardVariant;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    Exact,
    DressedKs,
    StandardKs,
    /// Interacting dressed two-particle problem in (x₁, q₁, x₂, q₂).
    DressedExact,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    None,
    Mx,
    Smx,
    SqrtSmx,
    MeanField,
}

impl Variant {
    pub fn dressed(self) -> Option<MxcApproximation> {
        match self {
            Variant::None => Some(MxcApproximation::None),
            Variant::Mx => Some(MxcApproximation::Mx),
            Variant::Smx => Some(MxcApproximation::Smx),
            Variant::SqrtSmx => Some(MxcApproximation::SqrtSmx),
            Variant::MeanField => None,
        }
    }

    pub fn standard(self) -> Option<StandardVariant> {
        match self {
            Variant::Mx => Some(StandardVariant::Mx),
            Variant::MeanField => Some(StandardVariant::MeanField),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeChoice {
    /// Krylov for the two-site and photon problems, Strang for exact grid
    /// problems, Crank–Nicolson for Kohn–Sham propagators.
    Auto,
    CrankNicolson,
    Strang,
    Krylov,
}

impl SchemeChoice {
    pub fn fixed(self) -> Option<Scheme> {
        match self {
            SchemeChoice::Auto => None,
            SchemeChoice::CrankNicolson => Some(Scheme::CrankNicolson),
            SchemeChoice::Strang => Some(Scheme::Strang),
            SchemeChoice::Krylov => Some(Scheme::Krylov),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSection {
    pub kind: ModelKind,
    pub hopping: f64,
    pub omega: f64,
    pub lambda: f64,
    pub flags: InteractionFlags,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpatialAxis {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscillatorAxis {
    pub n: usize,
    pub half_width_factor: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridsSection {
    pub x: SpatialAxis,
    pub q: OscillatorAxis,
    pub p: OscillatorAxis,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagationSection {
    pub scheme: SchemeChoice,
    pub dt: f64,
    pub steps: usize,
    pub stride: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproximationSection {
    pub solver: Solver,
    pub variant: Variant,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputSection {
    pub directory: String,
    pub densities: bool,
    pub dressed_density: bool,
    /// Propagate the standard-KS photon orbital for Δp readout.
    pub photon_orbital: bool,
}

/// A validated configuration with all defaults filled in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub model: ModelSection,
    pub grids: GridsSection,
    pub propagation: PropagationSection,
    pub approximation: ApproximationSection,
    pub output: OutputSection,
}

impl Default for RunConfig {
    /// The resonant helium configuration (ω = ω₁, λ = 0.1).
    fn default() -> Self {
        Self {
            model: ModelSection {
                kind: ModelKind::Helium1d,
                hopping: 0.0,
                omega: model::HELIUM_OMEGA,
                lambda: model::HELIUM_LAMBDA,
                flags: InteractionFlags::physical(),
            },
            grids: GridsSection {
                x: SpatialAxis { min: -5.0, max: 5.0, n: 201 },
                q: OscillatorAxis { n: 64, half_width_factor: 8.0 },
                p: OscillatorAxis { n: 64, half_width_factor: 8.0 },
            },
            propagation: PropagationSection { scheme: SchemeChoice::Auto, dt: 0.01, steps: 2000, stride: 10 },
            approximation: ApproximationSection { solver: Solver::Exact, variant: Variant::Mx },
            output: OutputSection { directory: "out".into(), densities: true, dressed_density: false, photon_orbital: true },
        }
    }
}

impl RunConfig {
    /// The two-site Rabi configuration: t = 0.5, ω = 1, λ = 0.01, no
    /// electron-electron interaction.
    pub fn two_site() -> Self {
        let mut c = Self::default();
        c.model = ModelSection {
            kind: ModelKind::TwoSite,
            hopping: model::TWO_SITE_HOPPING,
            omega: model::TWO_SITE_OMEGA,
            lambda: model::TWO_SITE_LAMBDA,
            flags: InteractionFlags { include_w: false, ..InteractionFlags::physical() },
        };
        c
    }

    pub fn model_system(&self) -> Result<ModelSystem> {
        let m = &self.model;
        let mut system = match m.kind {
            ModelKind::TwoSite => model::make_two_site_model(m.hopping, m.omega, m.lambda)?,
            ModelKind::Helium1d => {
                let mut h = model::make_helium_model(m.omega, m.lambda, m.flags)?;
                h.x_domain = (self.grids.x.min, self.grids.x.max);
                h
            }
        };
        system.flags = m.flags;
        Ok(system)
    }

    pub fn x_grid(&self) -> Result<Grid1D> {
        let x = self.grids.x;
        Grid1D::new(x.min, x.max, x.n, Boundary::HardWall)
    }

    pub fn q_grid(&self) -> Result<Grid1D> {
        Grid1D::oscillator_box(self.model.omega, self.grids.q.n, self.grids.q.half_width_factor)
    }

    pub fn p_grid(&self) -> Result<Grid1D> {
        Grid1D::oscillator_box(self.model.omega, self.grids.p.n, self.grids.p.half_width_factor)
    }

    /// Serialised form (for run manifests).
    pub fn to_toml(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }

    fn validate(&self) -> Result<()> {
        let bad = |key: &str, reason: String| Err(Error::ConfigInvalid { key: key.into(), reason });
        let m = &self.model;
        if !(m.omega > 0.0 && m.omega.is_finite()) {
            return bad("model.omega", format!("must be positive, got {}", m.omega));
        }
        if !m.lambda.is_finite() {
            return bad("model.lambda", "must be finite".into());
        }
        if m.kind == ModelKind::TwoSite && !(m.hopping > 0.0 && m.hopping.is_finite()) {
            return bad("model.hopping", format!("must be positive, got {}", m.hopping));
        }
        if !(m.flags.bilinear_scale.is_finite()) {
            return bad("model.flags.bilinear_scale", "must be finite".into());
        }
        let x = self.grids.x;
        if !(x.max > x.min) {
            return bad("grids.x.max", format!("must exceed grids.x.min ({} ≤ {})", x.max, x.min));
        }
        for (key, axis) in [("grids.q", self.grids.q), ("grids.p", self.grids.p)] {
            if axis.n < 3 {
                return bad(&format!("{key}.n"), format!("need at least 3 points, got {}", axis.n));
            }
            if !(axis.half_width_factor > 0.0 && axis.half_width_factor.is_finite()) {
                return bad(&format!("{key}.half_width_factor"), "must be positive".into());
            }
        }
        if x.n < 3 {
            return bad("grids.x.n", format!("need at least 3 points, got {}", x.n));
        }
        let p = &self.propagation;
        if !(p.dt > 0.0 && p.dt.is_finite()) {
            return bad("propagation.dt", format!("must be positive, got {}", p.dt));
        }
        if p.stride == 0 {
            return bad("propagation.stride", "must be at least 1".into());
        }
        let a = &self.approximation;
        match a.solver {
            Solver::DressedKs if a.variant.dressed().is_none() => {
                return bad("approximation.variant", format!("{:?} is not a dressed Kohn–Sham approximation", a.variant));
            }
            Solver::StandardKs if a.variant.standard().is_none() => {
                return bad("approximation.variant", format!("{:?} is not a standard Kohn–Sham approximation", a.variant));
            }
            Solver::DressedExact if m.kind != ModelKind::Helium1d => {
                return bad("approximation.solver", "dressed-exact needs the helium model".into());
            }
            Solver::DressedExact if x.n > 64 || self.grids.q.n > 64 => {
                return bad("grids", "dressed-exact runs at most 64 points per axis".into());
            }
            _ => {}
        }
        if self.output.directory.is_empty() {
            return bad("output.directory", "must not be empty".into());
        }
        Ok(())
    }
}

// Raw, all-optional mirror of the file format.

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: Option<RawModel>,
    grids: Option<RawGrids>,
    propagation: Option<RawPropagation>,
    approximation: Option<RawApproximation>,
    output: Option<RawOutput>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    kind: Option<ModelKind>,
    hopping: Option<f64>,
    omega: Option<f64>,
    lambda: Option<f64>,
    flags: Option<RawFlags>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFlags {
    include_w: Option<bool>,
    include_quadratic: Option<bool>,
    bilinear_scale: Option<f64>,
    pair_bilinear: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrids {
    x: Option<RawSpatial>,
    q: Option<RawOscillator>,
    p: Option<RawOscillator>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpatial {
    min: Option<f64>,
    max: Option<f64>,
    n: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOscillator {
    n: Option<usize>,
    half_width_factor: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPropagation {
    scheme: Option<SchemeChoice>,
    dt: Option<f64>,
    steps: Option<usize>,
    stride: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawApproximation {
    solver: Option<Solver>,
    variant: Option<Variant>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    directory: Option<String>,
    densities: Option<bool>,
    dressed_density: Option<bool>,
    photon_orbital: Option<bool>,
}

fn fill<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl RawConfig {
    /// Fills `base` (or the kind's defaults, if the file names a kind that
    /// differs from the base) with the keys present in the file.
    fn resolve(self, base: &RunConfig) -> RunConfig {
        let mut c = base.clone();
        let model = self.model.unwrap_or_default();
        if let Some(kind) = model.kind {
            if kind != base.model.kind {
                let defaults = match kind {
                    ModelKind::TwoSite => RunConfig::two_site(),
                    ModelKind::Helium1d => RunConfig::default(),
                };
                c.model = defaults.model;
            }
        }
        fill(&mut c.model.hopping, model.hopping);
        fill(&mut c.model.omega, model.omega);
        fill(&mut c.model.lambda, model.lambda);
        let flags = model.flags.unwrap_or_default();
        fill(&mut c.model.flags.include_w, flags.include_w);
        fill(&mut c.model.flags.include_quadratic, flags.include_quadratic);
        fill(&mut c.model.flags.bilinear_scale, flags.bilinear_scale);
        fill(&mut c.model.flags.pair_bilinear, flags.pair_bilinear);
        let grids = self.grids.unwrap_or_default();
        let x = grids.x.unwrap_or_default();
        fill(&mut c.grids.x.min, x.min);
        fill(&mut c.grids.x.max, x.max);
        fill(&mut c.grids.x.n, x.n);
        for (axis, raw) in [(&mut c.grids.q, grids.q), (&mut c.grids.p, grids.p)] {
            let raw = raw.unwrap_or_default();
            fill(&mut axis.n, raw.n);
            fill(&mut axis.half_width_factor, raw.half_width_factor);
        }
        let prop = self.propagation.unwrap_or_default();
        fill(&mut c.propagation.scheme, prop.scheme);
        fill(&mut c.propagation.dt, prop.dt);
        fill(&mut c.propagation.steps, prop.steps);
        fill(&mut c.propagation.stride, prop.stride);
        let approx = self.approximation.unwrap_or_default();
        fill(&mut c.approximation.solver, approx.solver);
        fill(&mut c.approximation.variant, approx.variant);
        let out = self.output.unwrap_or_default();
        fill(&mut c.output.directory, out.directory);
        fill(&mut c.output.densities, out.densities);
        fill(&mut c.output.dressed_density, out.dressed_density);
        fill(&mut c.output.photon_orbital, out.photon_orbital);
        c
    }
}

/// Parses and validates a configuration on top of the resonant helium defaults.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_with(text, &RunConfig::default(), &[])
}

/// Parses `text` on top of `base`, applies `key=value` overrides, and
/// validates. Parse errors carry the line and column of the file.
pub fn parse_config_with(text: &str, base: &RunConfig, overrides: &[String]) -> Result<RunConfig> {
    // Surface syntax and unknown-key errors with their position in the file.
    let _: RawConfig = toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?;
    let mut table: toml::Table = toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?;
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    let raw: RawConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| Error::ConfigParse(format!("in overrides: {}", e.message())))?;
    let config = raw.resolve(base);
    config.validate()?;
    Ok(config)
}

fn apply_override(table: &mut toml::Table, text: &str) -> Result<()> {
    let (key, value) = text
        .split_once('=')
        .ok_or_else(|| Error::ConfigParse(format!("override `{text}` is not of the form key=value")))?;
    let key = key.trim();
    let value = value.trim();
    let parsed = match toml::from_str::<toml::Table>(&format!("v = {value}")) {
        Ok(mut t) => t.remove("v").unwrap_or(toml::Value::String(value.into())),
        Err(_) => toml::Value::String(value.into()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::ConfigParse(format!("override key `{key}` is malformed")));
    }
    let mut node = table;
    for part in &parts[..parts.len() - 1] {
        let entry = node.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = match entry {
            toml::Value::Table(t) => t,
            _ => return Err(Error::ConfigParse(format!("override key `{key}`: `{part}` is not a section"))),
        };
    }
    node.insert(parts[parts.len() - 1].to_string(), parsed);
    Ok(())
}
