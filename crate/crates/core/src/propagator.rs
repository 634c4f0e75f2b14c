//! Crank-Nicolson propagation of the driven Schrödinger equation, used as an
//! independent check on the fast-forward states.
//!
//! A moving Dirichlet wall at `x = L(t)` is handled on the fixed domain
//! `y = x / L` with `psi = L^{-1/2} exp(i m L' L y^2 / 2 hbar) chi(y)`. In that
//! frame `chi` obeys
//! `i hbar chi_t = [-hbar^2/(2 m L^2) d_y^2 + (m/2) L L'' y^2 + V(L y, t)] chi`,
//! so a fast-forward drive `-(m/2)(L''/L) x^2` cancels the inertial term.

use std::io::Write;

use num_complex::Complex64;

use crate::csv::sci;
use crate::error::{Error, Result};
use crate::field::{inner_product, second_derivative, ComplexField};
use crate::grid::Grid;
use crate::trajectory::ControlTrajectory;
use crate::tridiag::Thomas;
use crate::units::UnitSystem;

/// Real potential `V(x, t)`.
pub type Potential<'a> = &'a (dyn Fn(f64, f64) -> Result<f64> + Sync);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Boundary {
    DirichletFixed,
    /// Wall at `x = 0` fixed, wall at `x = L(t)` moving.
    DirichletMovingWall(ControlTrajectory),
}

#[derive(Clone, Copy)]
pub struct PropagationSpec<'a> {
    pub grid: Grid,
    pub dt: f64,
    pub t_final: f64,
    pub potential: Potential<'a>,
    pub boundary: Boundary,
    pub units: UnitSystem,
}

/// Norm drift is checked this often, and at the end.
const NORM_CHECK_STRIDE: usize = 1024;

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub field: ComplexField,
}

impl PropagationSpec<'_> {
    fn validate(&self) -> Result<(usize, f64)> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "t_final must be non-negative, got {}",
                self.t_final
            )));
        }
        if let Boundary::DirichletMovingWall(traj) = self.boundary {
            if self.t_final > traj.t_ff() * (1.0 + 1e-12) {
                return Err(Error::TimeOutOfRange {
                    t: self.t_final,
                    t_ff: traj.t_ff(),
                });
            }
        }
        let steps = (self.t_final / self.dt - 1e-9).ceil().max(0.0) as usize;
        let dt = if steps == 0 { 0.0 } else { self.t_final / steps as f64 };
        Ok((steps, dt))
    }
}

/// Propagates `psi0` from `t = 0` to `spec.t_final`.
pub fn propagate(psi0: &ComplexField, spec: &PropagationSpec) -> Result<ComplexField> {
    run(psi0, spec, 0, |_| Ok(()))
}

/// Like [`propagate`] but also records the state every `stride` steps,
/// including the initial and final ones.
pub fn propagate_with_snapshots(
    psi0: &ComplexField,
    spec: &PropagationSpec,
    stride: usize,
) -> Result<(ComplexField, Vec<Snapshot>)> {
    let mut shots = Vec::new();
    let out = run(psi0, spec, stride.max(1), |s| {
        shots.push(s);
        Ok(())
    })?;
    Ok((out, shots))
}

/// Writes snapshots as `t,x,re,im` rows.
pub fn write_snapshots<W: Write>(out: &mut W, snapshots: &[Snapshot]) -> std::io::Result<()> {
    writeln!(out, "t,x,re,im")?;
    for s in snapshots {
        for (x, v) in s.field.grid().points().zip(s.field.values()) {
            writeln!(out, "{},{},{},{}", sci(s.t), sci(x), sci(v.re), sci(v.im))?;
        }
    }
    Ok(())
}

struct Frame {
    length: f64,
    chirp: f64,
}

fn frame(boundary: &Boundary, t: f64, units: &UnitSystem) -> Result<Frame> {
    match boundary {
        Boundary::DirichletFixed => Ok(Frame {
            length: 1.0,
            chirp: 0.0,
        }),
        Boundary::DirichletMovingWall(traj) => {
            let (l, ld, _) = traj.state(t)?;
            Ok(Frame {
                length: l,
                chirp: units.mass * ld * l / (2.0 * units.hbar),
            })
        }
    }
}

fn check_resolution(values: &[Complex64]) -> Result<()> {
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    if peak == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let jump = values
        .windows(2)
        .fold(0.0f64, |m, w| m.max((w[1] - w[0]).norm()));
    let ratio = jump / peak;
    if ratio > 0.5 {
        return Err(Error::UnderResolved(ratio));
    }
    Ok(())
}

fn run<F>(psi0: &ComplexField, spec: &PropagationSpec, stride: usize, mut record: F) -> Result<ComplexField>
where
    F: FnMut(Snapshot) -> Result<()>,
{
    let (steps, dt) = spec.validate()?;
    let grid = spec.grid;
    if *psi0.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let units = spec.units;
    let n = grid.len();
    let moving = matches!(spec.boundary, Boundary::DirichletMovingWall(_));

    // computational coordinate: x for fixed walls, y in [0, 1] for a moving wall
    let (coords, dq) = if moving {
        let l0 = frame(&spec.boundary, 0.0, &units)?.length;
        let slack = 1e-12 * l0;
        if grid.x_min() != 0.0 || (grid.x_max() - l0).abs() > slack {
            return Err(Error::DomainMismatch {
                x_min: grid.x_min(),
                x_max: grid.x_max(),
                length: l0,
            });
        }
        let y = Grid::new(0.0, 1.0, n)?;
        (y.points().collect::<Vec<_>>(), y.dx())
    } else {
        (grid.points().collect::<Vec<_>>(), grid.dx())
    };

    let to_lab = |chi: &[Complex64], t: f64| -> Result<ComplexField> {
        if !moving {
            return ComplexField::new(grid, chi.to_vec());
        }
        let f = frame(&spec.boundary, t, &units)?;
        let g = Grid::new(0.0, f.length, n)?;
        let scale = f.length.sqrt().recip();
        let values = chi
            .iter()
            .zip(&coords)
            .map(|(c, &y)| c * Complex64::from_polar(scale, f.chirp * y * y))
            .collect();
        ComplexField::new(g, values)
    };

    let mut chi: Vec<Complex64> = if moving {
        let f = frame(&spec.boundary, 0.0, &units)?;
        let s = f.length.sqrt();
        psi0.values()
            .iter()
            .zip(&coords)
            .map(|(p, &y)| p * Complex64::from_polar(s, -f.chirp * y * y))
            .collect()
    } else {
        psi0.values().to_vec()
    };
    check_resolution(&chi)?;
    chi[0] = Complex64::new(0.0, 0.0);
    chi[n - 1] = Complex64::new(0.0, 0.0);
    let norm_sq = |c: &[Complex64]| c.iter().map(|v| v.norm_sqr()).sum::<f64>() * dq;
    let norm0 = norm_sq(&chi);
    if norm0 == 0.0 {
        return Err(Error::ZeroNorm);
    }

    if stride > 0 {
        record(Snapshot {
            t: 0.0,
            field: to_lab(&chi, 0.0)?,
        })?;
    }

    let m = n - 2;
    let i = Complex64::new(0.0, 1.0);
    let mut sub = vec![Complex64::new(0.0, 0.0); m];
    let mut diag = vec![Complex64::new(0.0, 0.0); m];
    let mut sup = vec![Complex64::new(0.0, 0.0); m];
    let mut rhs = vec![Complex64::new(0.0, 0.0); m];
    let mut potential = vec![0.0; m];
    let mut thomas = Thomas::new(m);
    let a = dt / (2.0 * units.hbar);

    for step in 0..steps {
        let t_mid = (step as f64 + 0.5) * dt;
        let (kin, inertial, length) = match spec.boundary {
            Boundary::DirichletFixed => (units.kinetic_scale(), 0.0, 1.0),
            Boundary::DirichletMovingWall(traj) => {
                let (l, _, ldd) = traj.state(t_mid)?;
                (units.kinetic_scale() / (l * l), 0.5 * units.mass * l * ldd, l)
            }
        };
        let mut vmax = 0.0f64;
        for (k, v) in potential.iter_mut().enumerate() {
            let q = coords[k + 1];
            *v = if moving {
                inertial * q * q + (spec.potential)(length * q, t_mid)?
            } else {
                (spec.potential)(q, t_mid)?
            };
            vmax = vmax.max(v.abs());
        }
        let ratio = dt * vmax / units.hbar;
        if ratio >= 0.5 {
            return Err(Error::StabilityBound { t: t_mid, ratio });
        }
        let off = kin / (dq * dq);
        for k in 0..m {
            let h_diag = 2.0 * off + potential[k];
            diag[k] = 1.0 + i * a * h_diag;
            sub[k] = -i * a * off;
            sup[k] = -i * a * off;
            let left = chi[k];
            let right = chi[k + 2];
            let h_psi = chi[k + 1] * h_diag - (left + right) * off;
            rhs[k] = chi[k + 1] - i * a * h_psi;
        }
        thomas.solve(&sub, &diag, &sup, &mut rhs)?;
        chi[1..=m].copy_from_slice(&rhs);

        let done = step + 1;
        let t = done as f64 * dt;
        if done % NORM_CHECK_STRIDE == 0 || done == steps {
            let drift = (norm_sq(&chi) / norm0).sqrt() - 1.0;
            if drift.abs() > 1e-6 {
                return Err(Error::NormDrift { t, drift });
            }
        }
        if stride > 0 && (done % stride == 0 || done == steps) {
            record(Snapshot {
                t,
                field: to_lab(&chi, t)?,
            })?;
        }
    }
    to_lab(&chi, spec.t_final)
}

/// `|<a, b>|`, clamped to 1.
pub fn fidelity(a: &ComplexField, b: &ComplexField) -> Result<f64> {
    Ok(inner_product(a, b)?.norm().min(1.0))
}

/// `min over phi of ||a - e^{i phi} b||`. Unlike `1 - fidelity`, which is
/// quadratic in the error, this is linear in it.
pub fn phase_aligned_distance(a: &ComplexField, b: &ComplexField) -> Result<f64> {
    let overlap = inner_product(b, a)?;
    let na = inner_product(a, a)?.re;
    let nb = inner_product(b, b)?.re;
    Ok((na + nb - 2.0 * overlap.norm()).max(0.0).sqrt())
}

/// Relative residual of the Schrödinger equation for an analytic state,
/// `||i hbar (psi(t+dt) - psi(t-dt)) / 2dt - H psi(t)|| / ||H psi(t)||`.
///
/// `state(grid, t)` must return the state sampled on `grid`, with zeros
/// outside its support. `window` is the time interval on which the state is
/// defined. The norm runs over the points reached by the fourth-order
/// Laplacian.
pub fn tdse_residual<S>(
    state: S,
    potential: Potential,
    grid: &Grid,
    t: f64,
    dt: f64,
    window: (f64, f64),
    units: &UnitSystem,
) -> Result<f64>
where
    S: Fn(&Grid, f64) -> Result<ComplexField>,
{
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    if t - dt < window.0 || t + dt > window.1 {
        return Err(Error::StencilOutOfRange {
            t,
            dt,
            start: window.0,
            end: window.1,
        });
    }
    let now = state(grid, t)?;
    let later = state(grid, t + dt)?;
    let earlier = state(grid, t - dt)?;
    let lap = second_derivative(now.values(), grid.dx());
    let i = Complex64::new(0.0, 1.0);
    let n = grid.len();
    let (mut num, mut den) = (0.0, 0.0);
    for k in 2..n.saturating_sub(2) {
        let x = grid.point(k);
        let h_psi = -lap[k] * units.kinetic_scale() + now.values()[k] * potential(x, t)?;
        let lhs = i * units.hbar * (later.values()[k] - earlier.values()[k]) / (2.0 * dt);
        num += (lhs - h_psi).norm_sqr();
        den += h_psi.norm_sqr();
    }
    if den == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((num / den).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fastforward::FastForwardState;
    use crate::spectra::{BoxModel, HarmonicModel, SpectralModel};
    use crate::trajectory::RampKind;
    use std::f64::consts::PI;

    const NAT: UnitSystem = UnitSystem::natural();

    fn zero(_: f64, _: f64) -> Result<f64> {
        Ok(0.0)
    }

    fn spec<'a>(grid: Grid, dt: f64, t_final: f64, v: Potential<'a>, boundary: Boundary) -> PropagationSpec<'a> {
        PropagationSpec {
            grid,
            dt,
            t_final,
            potential: v,
            boundary,
            units: NAT,
        }
    }

    #[test]
    fn stationary_box_state() {
        let g = Grid::new(0.0, 1.0, 1024).unwrap();
        let phi = BoxModel::new(NAT).eigenstate(1, 1.0, &g).unwrap();
        let t = 2.0 * PI / (PI * PI / 2.0);
        let out = propagate(&phi, &spec(g, 1e-3, t, &zero, Boundary::DirichletFixed)).unwrap();
        assert!((fidelity(&out, &phi).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn zero_steps_is_identity() {
        let g = Grid::new(0.0, 1.0, 64).unwrap();
        let phi = BoxModel::new(NAT).eigenstate(2, 1.0, &g).unwrap();
        let out = propagate(&phi, &spec(g, 1e-3, 0.0, &zero, Boundary::DirichletFixed)).unwrap();
        assert_eq!(out, phi);
    }

    #[test]
    fn free_gaussian_spreads() {
        let sigma = 1.0;
        let g = Grid::new(-40.0, 40.0, 4096).unwrap();
        let psi0 = ComplexField::from_fn(g, |x| {
            Complex64::new((-x * x / (4.0 * sigma * sigma)).exp(), 0.0)
        })
        .unwrap();
        let psi0 = crate::field::normalize(&psi0).unwrap();
        let t = 2.0;
        let out = propagate(&psi0, &spec(g, 1e-3, t, &zero, Boundary::DirichletFixed)).unwrap();
        let density: Vec<f64> = out.values().iter().map(|v| v.norm_sqr()).collect();
        let x2: Vec<f64> = g.points().zip(&density).map(|(x, d)| x * x * d).collect();
        let var = crate::field::integrate_samples(&g, &x2);
        let want = sigma * sigma * (1.0 + (t / (2.0 * sigma * sigma)).powi(2));
        assert!(((var - want) / want).abs() < 1e-4, "{var} vs {want}");
    }

    #[test]
    fn unitarity_over_a_million_steps() {
        let g = Grid::new(0.0, 1.0, 16).unwrap();
        let psi = BoxModel::new(NAT).eigenstate(1, 1.0, &g).unwrap();
        let psi = crate::field::normalize(&psi).unwrap();
        let v = |x: f64, t: f64| Ok(30.0 * (x * t).sin());
        let out = propagate(&psi, &spec(g, 1e-5, 10.0, &v, Boundary::DirichletFixed)).unwrap();
        assert!((out.norm() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn second_order_in_time() {
        let g = Grid::new(0.0, 1.0, 256).unwrap();
        let psi = BoxModel::new(NAT).eigenstate(1, 1.0, &g).unwrap();
        let v = |x: f64, t: f64| Ok(40.0 * (3.0 * t).sin() * x * x);
        let reference = propagate(&psi, &spec(g, 2e-5, 1.0, &v, Boundary::DirichletFixed)).unwrap();
        let errors: Vec<f64> = [8e-3, 4e-3, 2e-3]
            .iter()
            .map(|&dt| {
                let out = propagate(&psi, &spec(g, dt, 1.0, &v, Boundary::DirichletFixed)).unwrap();
                phase_aligned_distance(&out, &reference).unwrap()
            })
            .collect();
        for w in errors.windows(2) {
            let r = w[0] / w[1];
            assert!((3.0..=5.0).contains(&r), "{errors:?}");
        }
    }

    #[test]
    fn stability_bound_is_enforced() {
        let g = Grid::new(0.0, 1.0, 64).unwrap();
        let psi = BoxModel::new(NAT).eigenstate(1, 1.0, &g).unwrap();
        let v = |_: f64, _: f64| Ok(1e4);
        let r = propagate(&psi, &spec(g, 1e-3, 1.0, &v, Boundary::DirichletFixed));
        assert!(matches!(r, Err(Error::StabilityBound { .. })));
    }

    #[test]
    fn under_resolved_state_is_rejected() {
        let g = Grid::new(0.0, 1.0, 64).unwrap();
        let psi = BoxModel::new(NAT).eigenstate(40, 1.0, &g).unwrap();
        let r = propagate(&psi, &spec(g, 1e-4, 0.1, &zero, Boundary::DirichletFixed));
        assert!(matches!(r, Err(Error::UnderResolved(_))));
    }

    #[test]
    fn slow_wall_tracks_eigenstate() {
        let eps = 0.01;
        let traj = ControlTrajectory::adiabatic_linear(1.0, eps, 20.0).unwrap();
        let g = Grid::new(0.0, 1.0, 512).unwrap();
        let model = BoxModel::new(NAT);
        let psi = model.eigenstate(1, 1.0, &g).unwrap();
        let out = propagate(&psi, &spec(g, 1e-3, 20.0, &zero, Boundary::DirichletMovingWall(traj))).unwrap();
        let l = traj.value(20.0).unwrap();
        let inst = model.eigenstate(1, l, out.grid()).unwrap();
        let f = fidelity(&out, &inst).unwrap();
        assert!(1.0 - f < 10.0 * eps * eps, "{f}");
        assert!((out.norm() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn driven_wall_reproduces_fast_forward_state() {
        let traj = ControlTrajectory::connecting(RampKind::TrigonometricRamp, 1.0, 3.0, 1.0).unwrap();
        let st = FastForwardState::new(BoxModel::new(NAT), 1, traj).unwrap();
        let g = Grid::new(0.0, 1.0, 1024).unwrap();
        let v = |x: f64, t: f64| crate::fastforward::driving_potential(x, t, &traj, &NAT);
        let out = propagate(
            &st.on_grid(&g, 0.0).unwrap(),
            &spec(g, 1e-3, 1.0, &v, Boundary::DirichletMovingWall(traj)),
        )
        .unwrap();
        let want = st.on_grid(out.grid(), 1.0).unwrap();
        assert!(1.0 - fidelity(&out, &want).unwrap() < 1e-8);
    }

    #[test]
    fn residual_of_static_state() {
        let model = HarmonicModel::new(NAT);
        let g = model.natural_grid(1.0, 2048, 0).unwrap();
        let traj = ControlTrajectory::adiabatic_linear(1.0, 0.0, 1.0).unwrap();
        let st = FastForwardState::new(model, 0, traj).unwrap();
        let v = |x: f64, _: f64| Ok(0.5 * x * x);
        let r = tdse_residual(|g, t| st.sample(g, t), &v, &g, 0.5, 1e-4, (0.0, 1.0), &NAT).unwrap();
        assert!(r < 1e-4, "{r:e}");
    }

    #[test]
    fn residual_window_is_checked() {
        let g = Grid::new(0.0, 1.0, 64).unwrap();
        let f = |g: &Grid, _| ComplexField::from_fn(*g, |x| Complex64::new(x, 0.0));
        let r = tdse_residual(f, &zero, &g, 1e-6, 1e-5, (0.0, 1.0), &NAT);
        assert!(matches!(r, Err(Error::StencilOutOfRange { .. })));
    }

    #[test]
    fn fidelity_examples() {
        let g = Grid::new(0.0, 1.0, 1024).unwrap();
        let m = BoxModel::new(NAT);
        let a = m.eigenstate(1, 1.0, &g).unwrap();
        let b = m.eigenstate(2, 1.0, &g).unwrap();
        assert!((fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        assert!(fidelity(&a, &b).unwrap() < 1e-10);
        let rotated = a.scale(Complex64::from_polar(1.0, PI / 3.0));
        assert!((fidelity(&a, &rotated).unwrap() - 1.0).abs() < 1e-12);
        assert!(phase_aligned_distance(&a, &rotated).unwrap() < 1e-7);
        let other = Grid::new(0.0, 2.0, 1024).unwrap();
        let c = m.eigenstate(1, 2.0, &other).unwrap();
        assert_eq!(fidelity(&a, &c), Err(Error::GridMismatch));
    }
}
