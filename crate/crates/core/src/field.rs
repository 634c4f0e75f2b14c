//! Sampled real and complex fields on a [`Grid`], trapezoidal inner products
//! and the finite-difference stencils shared by the other modules.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;

#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: Grid,
    values: Vec<f64>,
}

impl RealField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        check_len(&grid, values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("field has non-finite entries".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.points().map(f).collect())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest pointwise deviation from `f`.
    pub fn max_abs_diff(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.grid
            .points()
            .zip(&self.values)
            .fold(0.0, |m, (x, v)| m.max((v - f(x)).abs()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: Grid,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        check_len(&grid, values.len())?;
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidParameter("field has non-finite entries".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        Self::new(grid, grid.points().map(f).collect())
    }

    pub fn from_real(grid: Grid, values: &[f64]) -> Result<Self> {
        Self::new(grid, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn norm(&self) -> f64 {
        inner_product(self, self)
            .map(|z| z.re.max(0.0).sqrt())
            .unwrap_or(0.0)
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }
}

fn check_len(grid: &Grid, len: usize) -> Result<()> {
    if len != grid.len() {
        return Err(Error::InvalidParameter(format!(
            "field has {len} values for a {}-point grid",
            grid.len()
        )));
    }
    Ok(())
}

/// Trapezoidal approximation of the integral of conj(a) * b.
pub fn inner_product(a: &ComplexField, b: &ComplexField) -> Result<Complex64> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch);
    }
    let g = &a.grid;
    let sum = a
        .values
        .iter()
        .zip(&b.values)
        .enumerate()
        .fold(Complex64::new(0.0, 0.0), |acc, (i, (x, y))| {
            acc + x.conj() * y * g.weight(i)
        });
    Ok(sum)
}

pub fn normalize(f: &ComplexField) -> Result<ComplexField> {
    let norm = f.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroNorm);
    }
    Ok(f.scale(Complex64::new(1.0 / norm, 0.0)))
}

/// Trapezoidal integral of a real sampled function.
pub fn integrate_samples(grid: &Grid, values: &[f64]) -> f64 {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| v * grid.weight(i))
        .sum()
}

/// Second derivative: fourth-order centered stencil on the interior, second
/// order next to the ends, zero on the end points themselves.
pub fn second_derivative(values: &[Complex64], dx: f64) -> Vec<Complex64> {
    let n = values.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    if n < 3 {
        return out;
    }
    let h2 = dx * dx;
    for i in 1..n - 1 {
        out[i] = if i >= 2 && i + 2 < n {
            (-values[i - 2] + values[i - 1] * 16.0 - values[i] * 30.0 + values[i + 1] * 16.0
                - values[i + 2])
                / (12.0 * h2)
        } else {
            (values[i - 1] - values[i] * 2.0 + values[i + 1]) / h2
        };
    }
    out
}

/// First derivative of real samples: fourth-order centered on the interior,
/// second order one-sided at the ends.
pub fn first_derivative(values: &[f64], dx: f64) -> Vec<f64> {
    let n = values.len();
    let mut out = vec![0.0; n];
    if n < 5 {
        return out;
    }
    for i in 0..n {
        out[i] = if i >= 2 && i + 2 < n {
            (values[i - 2] - 8.0 * values[i - 1] + 8.0 * values[i + 1] - values[i + 2])
                / (12.0 * dx)
        } else if i == 0 {
            (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * dx)
        } else if i + 1 == n {
            (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * dx)
        } else {
            (values[i + 1] - values[i - 1]) / (2.0 * dx)
        };
    }
    out
}

/// Five-point centered derivative of a scalar function.
pub fn five_point<T>(f: impl Fn(f64) -> T, at: f64, h: f64) -> T
where
    T: std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
{
    (f(at - 2.0 * h) - f(at + 2.0 * h) + (f(at + h) - f(at - h)) * 8.0) * (1.0 / (12.0 * h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn box_ground_state_is_normalized() {
        let g = Grid::new(0.0, 1.0, 1024).unwrap();
        let f = ComplexField::from_fn(g, |x| c(2f64.sqrt() * (PI * x).sin())).unwrap();
        let ip = inner_product(&f, &f).unwrap();
        assert!((ip.re - 1.0).abs() < 1e-10);
        assert_eq!(ip.im, 0.0);
    }

    #[test]
    fn sines_are_orthogonal() {
        let g = Grid::new(0.0, 1.0, 1024).unwrap();
        let a = ComplexField::from_fn(g, |x| c((PI * x).sin())).unwrap();
        let b = ComplexField::from_fn(g, |x| c((2.0 * PI * x).sin())).unwrap();
        assert!(inner_product(&a, &b).unwrap().norm() < 1e-10);
    }

    #[test]
    fn linear_integrand_is_exact() {
        let g = Grid::new(0.0, 1.0, 1024).unwrap();
        let a = ComplexField::from_fn(g, |_| c(1.0)).unwrap();
        let b = ComplexField::from_fn(g, c).unwrap();
        assert!((inner_product(&a, &b).unwrap().re - 0.5).abs() < 1e-12);
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let a = ComplexField::from_fn(Grid::new(0.0, 1.0, 16).unwrap(), c).unwrap();
        let b = ComplexField::from_fn(Grid::new(0.0, 2.0, 16).unwrap(), c).unwrap();
        assert_eq!(inner_product(&a, &b), Err(Error::GridMismatch));
    }

    #[test]
    fn normalize_scaled_mode() {
        let g = Grid::new(0.0, 1.0, 512).unwrap();
        let phi = ComplexField::from_fn(g, |x| c(2f64.sqrt() * (PI * x).sin())).unwrap();
        let n = normalize(&phi.scale(c(2.0))).unwrap();
        for (a, b) in n.values().iter().zip(phi.values()) {
            assert!((a - b).norm() < 1e-12);
        }
        let again = normalize(&n).unwrap();
        for (a, b) in again.values().iter().zip(n.values()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn normalize_constant_unit_field() {
        let g = Grid::new(0.0, 1.0, 64).unwrap();
        let one = ComplexField::from_fn(g, |_| c(1.0)).unwrap();
        let n = normalize(&one).unwrap();
        assert!(n.values().iter().all(|v| (v - c(1.0)).norm() < 1e-14));
    }

    #[test]
    fn normalize_zero_field_fails() {
        let g = Grid::new(0.0, 1.0, 64).unwrap();
        let z = ComplexField::from_fn(g, |_| c(0.0)).unwrap();
        assert_eq!(normalize(&z), Err(Error::ZeroNorm));
    }

    #[test]
    fn stencils_are_accurate() {
        let g = Grid::new(0.0, 1.0, 401).unwrap();
        let v: Vec<f64> = g.points().map(|x| (3.0 * x).sin()).collect();
        let d = first_derivative(&v, g.dx());
        for (i, x) in g.points().enumerate() {
            assert!((d[i] - 3.0 * (3.0 * x).cos()).abs() < 1e-4, "i = {i}");
        }
        let cv: Vec<Complex64> = v.iter().map(|&y| c(y)).collect();
        let d2 = second_derivative(&cv, g.dx());
        for i in 2..g.len() - 2 {
            let x = g.point(i);
            assert!((d2[i].re + 9.0 * (3.0 * x).sin()).abs() < 1e-8);
        }
        let fp = five_point(|x: f64| x.powi(4), 1.0, 1e-3);
        assert!((fp - 4.0).abs() < 1e-10);
    }
}
