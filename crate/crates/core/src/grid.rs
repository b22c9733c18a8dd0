//! Uniform grids, finite-difference and sinc-DVR axis operators, and
//! trapezoidal quadrature.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// How the edges of a grid are treated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    /// Amplitudes are pinned to zero at both endpoints (electron box).
    HardWall,
    /// The box is large enough for the amplitude to have decayed at the
    /// edges (photon and auxiliary oscillator coordinates).
    DecayBox,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Grid1D {
    pub min: f64,
    pub max: f64,
    pub n: usize,
    pub dx: f64,
    pub boundary: Boundary,
}

impl Grid1D {
    pub fn new(min: f64, max: f64, n: usize, boundary: Boundary) -> Result<Self> {
        if !(max > min) || !min.is_finite() || !max.is_finite() {
            return Err(Error::InvalidBounds { min, max });
        }
        if n < 3 {
            return Err(Error::TooFewPoints { n });
        }
        Ok(Self { min, max, n, dx: (max - min) / (n - 1) as f64, boundary })
    }

    /// Symmetric decay box spanning ±`half_width_factor`/√ω, the natural
    /// length scale of an oscillator of frequency ω.
    pub fn oscillator_box(omega: f64, n: usize, half_width_factor: f64) -> Result<Self> {
        if !(omega > 0.0) {
            return Err(Error::InvalidParameter { name: "omega", reason: format!("must be positive, got {omega}") });
        }
        let half = half_width_factor / omega.sqrt();
        Self::new(-half, half, n, Boundary::DecayBox)
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        self.min + i as f64 * self.dx
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.coordinate(i)).collect()
    }

    /// Trapezoidal weights.
    pub fn weights(&self) -> Vec<f64> {
        let mut w = vec![self.dx; self.n];
        w[0] *= 0.5;
        w[self.n - 1] *= 0.5;
        w
    }

    pub fn is_pinned(&self, i: usize) -> bool {
        self.boundary == Boundary::HardWall && (i == 0 || i + 1 == self.n)
    }

    /// Kinetic energy −½∂² as a dense symmetric matrix in the sinc
    /// discrete-variable representation (Colbert–Miller). Used on decay-box
    /// axes where spectral accuracy of the oscillator is needed.
    pub fn sinc_kinetic_matrix(&self) -> Vec<f64> {
        let n = self.n;
        let h2 = self.dx * self.dx;
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                m[i * n + j] = if i == j {
                    PI * PI / (6.0 * h2)
                } else {
                    let d = i as f64 - j as f64;
                    let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                    sign / (h2 * d * d)
                };
            }
        }
        m
    }

    /// First derivative ∂ in the sinc discrete-variable representation.
    /// Antisymmetric.
    pub fn sinc_derivative_matrix(&self) -> Vec<f64> {
        let n = self.n;
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let d = i as f64 - j as f64;
                    let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                    m[i * n + j] = sign / (self.dx * d);
                }
            }
        }
        m
    }
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::LengthMismatch { expected, actual });
    }
    Ok(())
}

/// Second-order central-difference Laplacian; neighbours outside the grid
/// count as zero.
pub fn laplacian_apply(grid: &Grid1D, field: &[Complex64]) -> Result<Vec<Complex64>> {
    check_len(grid.n, field.len())?;
    let inv = 1.0 / (grid.dx * grid.dx);
    let zero = Complex64::new(0.0, 0.0);
    Ok((0..grid.n)
        .map(|i| {
            let left = if i > 0 { field[i - 1] } else { zero };
            let right = if i + 1 < grid.n { field[i + 1] } else { zero };
            (left - 2.0 * field[i] + right) * inv
        })
        .collect())
}

/// First derivative along one grid: central differences on hard-wall
/// grids (out-of-range neighbours are zero), the sinc derivative on
/// decay-box grids.
pub fn derivative_apply(grid: &Grid1D, field: &[f64]) -> Result<Vec<f64>> {
    check_len(grid.n, field.len())?;
    let n = grid.n;
    Ok(match grid.boundary {
        Boundary::HardWall => (0..n)
            .map(|i| {
                let left = if i > 0 { field[i - 1] } else { 0.0 };
                let right = if i + 1 < n { field[i + 1] } else { 0.0 };
                (right - left) / (2.0 * grid.dx)
            })
            .collect(),
        Boundary::DecayBox => {
            let d = grid.sinc_derivative_matrix();
            (0..n).map(|i| (0..n).map(|j| d[i * n + j] * field[j]).sum()).collect()
        }
    })
}

/// Trapezoidal quadrature of a field sampled on `grid`.
pub fn integrate(grid: &Grid1D, field: &[f64]) -> Result<f64> {
    check_len(grid.n, field.len())?;
    Ok(trapezoid(grid.dx, field))
}

/// dx·(½f₀ + f₁ + … + ½f_last), with the spacing applied once so that
/// constants integrate without accumulated rounding.
fn trapezoid(dx: f64, f: &[f64]) -> f64 {
    let n = f.len();
    let interior: f64 = f[1..n - 1].iter().sum();
    dx * (interior + 0.5 * (f[0] + f[n - 1]))
}

/// Ordered tensor product of one-dimensional grids; arrays over it are
/// row-major with the last axis fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductGrid {
    pub axes: Vec<Grid1D>,
}

impl ProductGrid {
    pub fn new(axes: Vec<Grid1D>) -> Self {
        Self { axes }
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|g| g.n).collect()
    }

    pub fn size(&self) -> usize {
        self.axes.iter().map(|g| g.n).product()
    }

    /// Product-trapezoidal quadrature, contracting the last axis first.
    pub fn integrate(&self, field: &[f64]) -> Result<f64> {
        check_len(self.size(), field.len())?;
        let mut current = field.to_vec();
        for grid in self.axes.iter().rev() {
            current = current.chunks(grid.n).map(|c| trapezoid(grid.dx, c)).collect();
        }
        Ok(current[0])
    }
}

/// Splits a flat index range for an axis of a row-major array:
/// `(outer, n, inner)` so that element `(o, i, k)` sits at `(o·n + i)·inner + k`.
pub fn axis_layout(shape: &[usize], axis: usize) -> (usize, usize, usize) {
    let outer = shape[..axis].iter().product();
    let inner = shape[axis + 1..].iter().product();
    (outer, shape[axis], inner)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn uniform_grid_spacing() {
        let g = Grid1D::new(-5.0, 5.0, 101, Boundary::HardWall).unwrap();
        assert!((g.dx - 0.1).abs() < 1e-15);
        assert_eq!(g.coordinate(50), 0.0);
        let g = Grid1D::new(-8.0, 8.0, 65, Boundary::DecayBox).unwrap();
        assert_eq!(g.dx, 0.25);
    }

    #[test]
    fn grid_preconditions() {
        assert!(matches!(Grid1D::new(-5.0, 5.0, 2, Boundary::HardWall), Err(Error::TooFewPoints { n: 2 })));
        assert!(matches!(Grid1D::new(1.0, 1.0, 10, Boundary::HardWall), Err(Error::InvalidBounds { .. })));
        assert!(Grid1D::oscillator_box(-1.0, 10, 8.0).is_err());
    }

    #[test]
    fn laplacian_of_quadratic_is_two() {
        let g = Grid1D::new(-1.0, 1.0, 41, Boundary::HardWall).unwrap();
        let f: Vec<Complex64> = g.points().iter().map(|x| Complex64::new(x * x, 0.0)).collect();
        let l = laplacian_apply(&g, &f).unwrap();
        for v in &l[1..g.n - 1] {
            assert!((v.re - 2.0).abs() < 1e-10);
        }
        let zero = vec![Complex64::new(0.0, 0.0); g.n];
        assert!(laplacian_apply(&g, &zero).unwrap().iter().all(|v| v.norm() == 0.0));
        assert!(laplacian_apply(&g, &zero[1..]).is_err());
    }

    #[test]
    fn laplacian_second_order() {
        let k = 2.0;
        let err = |n: usize| {
            let g = Grid1D::new(0.0, PI, n, Boundary::HardWall).unwrap();
            let f: Vec<Complex64> = g.points().iter().map(|x| Complex64::new((k * x).sin(), 0.0)).collect();
            let l = laplacian_apply(&g, &f).unwrap();
            (1..n - 1).map(|i| (l[i].re + k * k * f[i].re).abs()).fold(0.0, f64::max)
        };
        let ratio = err(101) / err(201);
        assert!((ratio - 4.0).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn quadrature_examples() {
        let g = Grid1D::new(0.0, 1.0, 101, Boundary::HardWall).unwrap();
        assert_eq!(integrate(&g, &vec![1.0; 101]).unwrap(), 1.0);
        let omega: f64 = 0.58037;
        let q = Grid1D::oscillator_box(omega, 64, 8.0).unwrap();
        let gauss: Vec<f64> = q.points().iter().map(|x| (omega / PI).sqrt() * (-omega * x * x).exp()).collect();
        assert!((integrate(&q, &gauss).unwrap() - 1.0).abs() < 1e-10);
        let g = Grid1D::new(-1.0, 1.0, 51, Boundary::HardWall).unwrap();
        assert!(integrate(&g, &g.points()).unwrap().abs() < 1e-14);
    }

    #[test]
    fn product_quadrature_factorizes() {
        let a = Grid1D::new(0.0, 2.0, 11, Boundary::HardWall).unwrap();
        let b = Grid1D::new(-1.0, 3.0, 7, Boundary::DecayBox).unwrap();
        let pg = ProductGrid::new(vec![a.clone(), b.clone()]);
        let field: Vec<f64> = a.points().iter().flat_map(|x| b.points().into_iter().map(move |y| x * y + 1.0)).collect();
        let direct = 2.0 * 4.0 + (2.0 * 2.0 / 2.0) * ((9.0 - 1.0) / 2.0);
        assert!((pg.integrate(&field).unwrap() - direct).abs() < 1e-12);
        assert_eq!(pg.size(), 77);
    }

    #[test]
    fn sinc_kinetic_gives_oscillator_zero_point() {
        let omega: f64 = 0.58037;
        let g = Grid1D::oscillator_box(omega, 64, 8.0).unwrap();
        let mut h = g.sinc_kinetic_matrix();
        for (i, x) in g.points().iter().enumerate() {
            h[i * g.n + i] += 0.5 * omega * omega * x * x;
        }
        let (values, _) = crate::linalg::symmetric_eigen(g.n, &h);
        assert!((values[0] - 0.5 * omega).abs() < 1e-10);
        assert!((values[1] - values[0] - omega).abs() < 1e-10);
    }

    proptest! {
        #[test]
        fn laplacian_symmetric_under_trapezoid(
            f in proptest::collection::vec(-1.0f64..1.0, 30),
            g in proptest::collection::vec(-1.0f64..1.0, 30),
        ) {
            let grid = Grid1D::new(-1.0, 1.0, 32, Boundary::HardWall).unwrap();
            let pad = |v: &Vec<f64>| {
                let mut out = vec![Complex64::new(0.0, 0.0)];
                out.extend(v.iter().map(|x| Complex64::new(*x, 0.0)));
                out.push(Complex64::new(0.0, 0.0));
                out
            };
            let (fp, gp) = (pad(&f), pad(&g));
            let lf = laplacian_apply(&grid, &fp).unwrap();
            let lg = laplacian_apply(&grid, &gp).unwrap();
            let a: Vec<f64> = fp.iter().zip(&lg).map(|(x, y)| x.re * y.re).collect();
            let b: Vec<f64> = lf.iter().zip(&gp).map(|(x, y)| x.re * y.re).collect();
            let (ia, ib) = (integrate(&grid, &a).unwrap(), integrate(&grid, &b).unwrap());
            prop_assert!((ia - ib).abs() < 1e-12 * (1.0 + ia.abs()));
        }

        #[test]
        fn quadrature_exact_for_linear(a in -5.0f64..5.0, b in -5.0f64..5.0, lo in -3.0f64..0.0, n in 3usize..60) {
            let grid = Grid1D::new(lo, lo + 2.5, n, Boundary::HardWall).unwrap();
            let f: Vec<f64> = grid.points().iter().map(|x| a * x + b).collect();
            let hi = lo + 2.5;
            let exact = 0.5 * a * (hi * hi - lo * lo) + b * 2.5;
            prop_assert!((integrate(&grid, &f).unwrap() - exact).abs() < 1e-11);
        }
    }
}
