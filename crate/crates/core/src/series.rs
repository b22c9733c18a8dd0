//! Time series of observables, density snapshots and their CSV forms.
//!
//! The trajectory CSV has the fixed header
//! `t,norm,energy,dipole_R,p,pdot,delta_p,continuity_res,maxwell_res`;
//! values are written in scientific notation with 17 significant digits,
//! residuals that need a neighbour on both sides are `NaN` in the first
//! and last rows. Density files hold one row per recorded time: the time
//! followed by the density values. Dressed densities n′(x,q) are flattened
//! x-major (`index = ix·n_q + iq`).

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

pub const SERIES_HEADER: [&str; 9] =
    ["t", "norm", "energy", "dipole_R", "p", "pdot", "delta_p", "continuity_res", "maxwell_res"];

/// What a propagation records, and how often.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Recorder {
    pub stride: usize,
    /// Keep electron density and current snapshots.
    pub densities: bool,
    /// Keep dressed density n′(x,q) and its currents (dressed runs only).
    pub dressed_density: bool,
}

impl Default for Recorder {
    fn default() -> Self {
        Self { stride: 1, densities: true, dressed_density: false }
    }
}

impl Recorder {
    pub fn every(stride: usize) -> Self {
        Self { stride: stride.max(1), ..Self::default() }
    }

    pub fn should_record(&self, step: usize, last: usize) -> bool {
        step % self.stride.max(1) == 0 || step == last && last % self.stride.max(1) == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObservableRow {
    pub t: f64,
    pub norm: f64,
    pub energy: f64,
    pub dipole: f64,
    pub p: f64,
    pub pdot: f64,
    pub delta_p: f64,
    pub continuity_res: f64,
    pub maxwell_res: f64,
}

impl ObservableRow {
    fn values(&self) -> [f64; 9] {
        [self.t, self.norm, self.energy, self.dipole, self.p, self.pdot, self.delta_p, self.continuity_res, self.maxwell_res]
    }
}

/// Support of an electron density: a spatial grid or the two sites.
#[derive(Clone, Debug, PartialEq)]
pub enum DensityLayout {
    Grid(Grid1D),
    /// Per-site occupations; the recorded "current" is then the occupation
    /// rate −∇·j of each site.
    Sites,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub density: Vec<f64>,
    pub current: Vec<f64>,
}

/// Dressed density on (x or site, q) with its two current components.
#[derive(Clone, Debug, PartialEq)]
pub struct DressedSnapshot {
    pub t: f64,
    pub density: Vec<f64>,
    /// Current along x (or the site occupation rate for two sites).
    pub current_x: Vec<f64>,
    pub current_q: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObservableSeries {
    pub label: String,
    pub rows: Vec<ObservableRow>,
    pub layout: DensityLayout,
    pub snapshots: Vec<Snapshot>,
    /// Auxiliary grid of dressed snapshots.
    pub q_grid: Option<Grid1D>,
    pub dressed_snapshots: Vec<DressedSnapshot>,
}

impl ObservableSeries {
    pub fn new(label: impl Into<String>, layout: DensityLayout) -> Self {
        Self {
            label: label.into(),
            rows: Vec::new(),
            layout,
            snapshots: Vec::new(),
            q_grid: None,
            dressed_snapshots: Vec::new(),
        }
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    pub fn column(&self, f: impl Fn(&ObservableRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = SERIES_HEADER.join(",");
        out.push('\n');
        for row in &self.rows {
            push_row(&mut out, &row.values());
        }
        out
    }

    /// Electron density snapshots: header `t,<coordinates…>`.
    pub fn density_csv(&self) -> String {
        let mut out = String::from("t");
        match &self.layout {
            DensityLayout::Grid(g) => {
                for x in g.points() {
                    let _ = write!(out, ",{}", fmt(x));
                }
            }
            DensityLayout::Sites => out.push_str(",site1,site2"),
        }
        out.push('\n');
        for s in &self.snapshots {
            let mut vals = vec![s.t];
            vals.extend_from_slice(&s.density);
            push_row(&mut out, &vals);
        }
        out
    }

    /// Dressed density snapshots, flattened x-major; header `t,n0,n1,…`.
    pub fn dressed_density_csv(&self) -> String {
        let mut out = String::from("t");
        let len = self.dressed_snapshots.first().map_or(0, |s| s.density.len());
        for k in 0..len {
            let _ = write!(out, ",n{k}");
        }
        out.push('\n');
        for s in &self.dressed_snapshots {
            let mut vals = vec![s.t];
            vals.extend_from_slice(&s.density);
            push_row(&mut out, &vals);
        }
        out
    }

    /// Writes `<label>.csv`, `<label>_n_x.csv` (if densities were recorded)
    /// and `<label>_n_prime.csv` (dressed runs) into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let path = dir.join(format!("{}.csv", self.label));
        write_file(&path, &self.to_csv())?;
        written.push(path);
        if !self.snapshots.is_empty() {
            let path = dir.join(format!("{}_n_x.csv", self.label));
            write_file(&path, &self.density_csv())?;
            written.push(path);
        }
        if !self.dressed_snapshots.is_empty() {
            let path = dir.join(format!("{}_n_prime.csv", self.label));
            write_file(&path, &self.dressed_density_csv())?;
            written.push(path);
        }
        Ok(written)
    }
}

/// 17 significant digits, scientific notation; non-finite values as
/// `NaN`/`inf`/`-inf`.
pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn push_row(out: &mut String, vals: &[f64]) {
    for (i, v) in vals.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&fmt(*v));
    }
    out.push('\n');
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

/// Parses a trajectory CSV written by [`ObservableSeries::to_csv`].
pub fn parse_series_csv(text: &str) -> Result<Vec<ObservableRow>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::ConfigParse("empty series file".into()))?;
    if header.split(',').collect::<Vec<_>>() != SERIES_HEADER {
        return Err(Error::ConfigParse(format!("unexpected series header `{header}`")));
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, line)| {
            let vals: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::ConfigParse(format!("line {}: {e}", i + 2)))?;
            if vals.len() != 9 {
                return Err(Error::ConfigParse(format!("line {}: expected 9 columns, found {}", i + 2, vals.len())));
            }
            Ok(ObservableRow {
                t: vals[0],
                norm: vals[1],
                energy: vals[2],
                dipole: vals[3],
                p: vals[4],
                pdot: vals[5],
                delta_p: vals[6],
                continuity_res: vals[7],
                maxwell_res: vals[8],
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn row(t: f64) -> ObservableRow {
        ObservableRow {
            t,
            norm: 1.0,
            energy: -2.0 + t,
            dipole: 0.1 * t,
            p: 1.0 / 3.0,
            pdot: -t,
            delta_p: 0.8615,
            continuity_res: f64::NAN,
            maxwell_res: 1e-300,
        }
    }

    #[test]
    fn csv_header_and_round_trip() {
        let mut s = ObservableSeries::new("exact", DensityLayout::Sites);
        s.rows = (0..4).map(|i| row(i as f64 * 0.01)).collect();
        let text = s.to_csv();
        assert!(text.starts_with("t,norm,energy,dipole_R,p,pdot,delta_p,continuity_res,maxwell_res\n"));
        let back = parse_series_csv(&text).unwrap();
        for (a, b) in back.iter().zip(&s.rows) {
            assert_eq!(a.p, b.p);
            assert_eq!(a.energy, b.energy);
            assert!(a.continuity_res.is_nan());
        }
        assert!(text.contains("NaN"));
    }

    #[test]
    fn recorder_stride() {
        let r = Recorder::every(10);
        assert!(r.should_record(0, 100));
        assert!(!r.should_record(5, 100));
        assert!(r.should_record(100, 100));
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse_series_csv("").is_err());
        assert!(parse_series_csv("a,b\n").is_err());
        let bad = format!("{}\n1,2,3\n", SERIES_HEADER.join(","));
        assert!(parse_series_csv(&bad).is_err());
    }

    proptest! {
        #[test]
        fn seventeen_digits_round_trip(v in proptest::num::f64::NORMAL) {
            prop_assert_eq!(fmt(v).parse::<f64>().unwrap(), v);
        }
    }
}
