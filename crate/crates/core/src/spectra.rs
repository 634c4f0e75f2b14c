//! Frozen-parameter eigenproblems of the two confinement models.
//!
//! Both models have real eigenamplitudes, so the adiabatic phase `eta`
//! vanishes identically.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::grid::Grid;
use crate::units::UnitSystem;

/// Edge amplitude above which an oscillator grid is rejected.
const EDGE_TOLERANCE: f64 = 1e-6;

/// An adiabatic eigenproblem parameterised by one control length `l`.
pub trait SpectralModel: Sync {
    fn units(&self) -> &UnitSystem;

    /// Quantum number of the lowest level.
    fn ground_level(&self) -> usize;

    fn energy(&self, n: usize, l: f64) -> Result<f64>;

    /// Real eigenamplitude `phi_n(x; l)`; no domain validation.
    fn amplitude(&self, n: usize, l: f64, x: f64) -> f64;

    /// Amplitudes of levels `ground..ground + count` at one point.
    fn amplitudes(&self, count: usize, l: f64, x: f64) -> Vec<f64> {
        let g = self.ground_level();
        (g..g + count).map(|n| self.amplitude(n, l, x)).collect()
    }

    /// Static confining potential `V0(x; l)`.
    fn potential(&self, x: f64, l: f64) -> f64;

    /// Validated eigenstate sampled on `grid`.
    fn eigenstate(&self, n: usize, l: f64, grid: &Grid) -> Result<ComplexField>;

    /// Grid on which levels up to `n_max` are fully contained.
    fn natural_grid(&self, l: f64, n_points: usize, n_max: usize) -> Result<Grid>;

    /// Analytic `<m|x^2|n>` in the frozen eigenbasis.
    fn x2_element(&self, m: usize, n: usize, l: f64) -> f64;

    /// Whether `x` lies inside the region where states live.
    fn contains(&self, _x: f64, _l: f64) -> bool {
        true
    }
}

fn check_length(l: f64) -> Result<()> {
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "control parameter must be positive, got {l}"
        )));
    }
    Ok(())
}

/// Oscillator with `omega(R) = 1 / R^2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HarmonicModel {
    pub units: UnitSystem,
}

impl HarmonicModel {
    pub fn new(units: UnitSystem) -> Self {
        Self { units }
    }

    pub fn omega(r: f64) -> f64 {
        1.0 / (r * r)
    }

    /// Inverse of [`HarmonicModel::omega`].
    pub fn control_for_omega(omega: f64) -> Result<f64> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidParameter(format!("omega must be positive, got {omega}")));
        }
        Ok(1.0 / omega.sqrt())
    }

    /// Oscillator length `sqrt(hbar / (m omega))`.
    pub fn width(&self, r: f64) -> f64 {
        (self.units.hbar / (self.units.mass * Self::omega(r))).sqrt()
    }

    /// Normalised Hermite functions `0..count` via the three-term recurrence;
    /// the normalisation is folded into the recurrence so no factorials appear.
    fn hermite_functions(&self, count: usize, r: f64, x: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(count);
        if count == 0 {
            return out;
        }
        let u = self.units;
        let mw = u.mass * Self::omega(r) / u.hbar;
        let xi = mw.sqrt() * x;
        let psi0 = (mw / PI).powf(0.25) * (-0.5 * xi * xi).exp();
        out.push(psi0);
        if count == 1 {
            return out;
        }
        out.push(2f64.sqrt() * xi * psi0);
        for k in 1..count - 1 {
            let kf = k as f64;
            let next = (2.0 / (kf + 1.0)).sqrt() * xi * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
            out.push(next);
        }
        out
    }
}

impl SpectralModel for HarmonicModel {
    fn units(&self) -> &UnitSystem {
        &self.units
    }

    fn ground_level(&self) -> usize {
        0
    }

    fn energy(&self, n: usize, r: f64) -> Result<f64> {
        check_length(r)?;
        Ok((n as f64 + 0.5) * self.units.hbar * Self::omega(r))
    }

    fn amplitude(&self, n: usize, r: f64, x: f64) -> f64 {
        self.hermite_functions(n + 1, r, x)[n]
    }

    fn amplitudes(&self, count: usize, r: f64, x: f64) -> Vec<f64> {
        self.hermite_functions(count, r, x)
    }

    fn potential(&self, x: f64, r: f64) -> f64 {
        let w = Self::omega(r);
        0.5 * self.units.mass * w * w * x * x
    }

    fn eigenstate(&self, n: usize, r: f64, grid: &Grid) -> Result<ComplexField> {
        check_length(r)?;
        let values: Vec<f64> = grid.points().map(|x| self.amplitude(n, r, x)).collect();
        let edge = values[0].abs().max(values[values.len() - 1].abs());
        if edge > EDGE_TOLERANCE {
            return Err(Error::GridTooNarrow(edge));
        }
        ComplexField::from_real(*grid, &values)
    }

    /// Symmetric window of `8 + sqrt(2 n_max + 1)` oscillator lengths.
    fn natural_grid(&self, r: f64, n_points: usize, n_max: usize) -> Result<Grid> {
        check_length(r)?;
        let half = (8.0 + (2.0 * n_max as f64 + 1.0).sqrt()) * self.width(r);
        Grid::new(-half, half, n_points)
    }

    fn x2_element(&self, m: usize, n: usize, r: f64) -> f64 {
        let s2 = self.width(r).powi(2);
        let (lo, hi) = (m.min(n), m.max(n));
        match hi - lo {
            0 => s2 * (lo as f64 + 0.5),
            2 => s2 * (((lo + 1) * (lo + 2)) as f64).sqrt() / 2.0,
            _ => 0.0,
        }
    }
}

/// Particle in the box `[0, L]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BoxModel {
    pub units: UnitSystem,
}

impl BoxModel {
    pub fn new(units: UnitSystem) -> Self {
        Self { units }
    }

    pub fn check_domain(grid: &Grid, l: f64) -> Result<()> {
        if grid.x_min() != 0.0 || (grid.x_max() - l).abs() > 1e-12 * l {
            return Err(Error::DomainMismatch {
                x_min: grid.x_min(),
                x_max: grid.x_max(),
                length: l,
            });
        }
        Ok(())
    }
}

impl SpectralModel for BoxModel {
    fn units(&self) -> &UnitSystem {
        &self.units
    }

    fn ground_level(&self) -> usize {
        1
    }

    fn energy(&self, n: usize, l: f64) -> Result<f64> {
        if n == 0 {
            return Err(Error::InvalidLevel(0));
        }
        check_length(l)?;
        let k = PI * n as f64 / l;
        Ok(self.units.kinetic_scale() * k * k)
    }

    fn amplitude(&self, n: usize, l: f64, x: f64) -> f64 {
        if x <= 0.0 || x >= l {
            return 0.0;
        }
        (2.0 / l).sqrt() * (PI * n as f64 * x / l).sin()
    }

    fn potential(&self, _x: f64, _l: f64) -> f64 {
        0.0
    }

    fn eigenstate(&self, n: usize, l: f64, grid: &Grid) -> Result<ComplexField> {
        if n == 0 {
            return Err(Error::InvalidLevel(0));
        }
        check_length(l)?;
        Self::check_domain(grid, l)?;
        let values: Vec<f64> = grid.points().map(|x| self.amplitude(n, l, x)).collect();
        ComplexField::from_real(*grid, &values)
    }

    fn natural_grid(&self, l: f64, n_points: usize, _n_max: usize) -> Result<Grid> {
        check_length(l)?;
        Grid::new(0.0, l, n_points)
    }

    fn x2_element(&self, m: usize, n: usize, l: f64) -> f64 {
        let (mf, nf) = (m as f64, n as f64);
        if m == n {
            l * l * (1.0 / 3.0 - 1.0 / (2.0 * PI * PI * nf * nf))
        } else {
            let sign = if (m + n).is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * 8.0 * mf * nf * l * l / (PI * PI * (mf * mf - nf * nf).powi(2))
        }
    }

    fn contains(&self, x: f64, l: f64) -> bool {
        (0.0..=l).contains(&x)
    }
}

/// An eigenpair sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub n: usize,
    pub energy: f64,
    pub amplitude: ComplexField,
}

pub fn eigen_pair<M: SpectralModel>(model: &M, n: usize, l: f64, grid: &Grid) -> Result<EigenPair> {
    Ok(EigenPair {
        n,
        energy: model.energy(n, l)?,
        amplitude: model.eigenstate(n, l, grid)?,
    })
}

/// `(n + 1/2) hbar omega(R)`.
pub fn ho_energy(n: usize, r: f64, units: &UnitSystem) -> Result<f64> {
    HarmonicModel::new(*units).energy(n, r)
}

pub fn ho_eigenstate(n: usize, r: f64, grid: &Grid, units: &UnitSystem) -> Result<ComplexField> {
    HarmonicModel::new(*units).eigenstate(n, r, grid)
}

/// `hbar^2 pi^2 n^2 / (2 m L^2)`.
pub fn box_energy(n: usize, l: f64, units: &UnitSystem) -> Result<f64> {
    BoxModel::new(*units).energy(n, l)
}

pub fn box_eigenstate(n: usize, l: f64, grid: &Grid, units: &UnitSystem) -> Result<ComplexField> {
    BoxModel::new(*units).eigenstate(n, l, grid)
}

/// Applies the frozen Hamiltonian `-hbar^2/2m d2/dx2 + V0` with the
/// fourth-order stencil.
pub fn apply_hamiltonian<M: SpectralModel>(model: &M, l: f64, f: &ComplexField) -> Vec<Complex64> {
    let g = f.grid();
    let lap = crate::field::second_derivative(f.values(), g.dx());
    let ks = model.units().kinetic_scale();
    g.points()
        .zip(lap)
        .zip(f.values())
        .map(|((x, d2), v)| -d2 * ks + v * model.potential(x, l))
        .collect()
}
