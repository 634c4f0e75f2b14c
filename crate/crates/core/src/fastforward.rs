//! Regularization phase, regularizing potential, fast-forward states and the
//! fast-forward driving potential.
//!
//! Everything here is available in two forms: a generic evaluator that works
//! from an arbitrary amplitude (finite differences and cumulative quadrature)
//! and the closed forms that hold for the two scale-invariant confinement
//! models. Tests cross-check one against the other.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{first_derivative, five_point, ComplexField, RealField};
use crate::grid::Grid;
use crate::quadrature::{integrate, Tolerance};
use crate::spectra::{BoxModel, HarmonicModel, SpectralModel};
use crate::trajectory::ControlTrajectory;
use crate::units::UnitSystem;

/// Densities below this are treated as nodes of the amplitude.
pub const DENSITY_FLOOR: f64 = 1e-14;

/// Relative step for derivatives with respect to the control parameter.
pub const CONTROL_STEP: f64 = 1e-5;

/// Phase `theta` and its gradient on a grid, with `theta(x_min) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizationPhase {
    pub theta: RealField,
    pub gradient: RealField,
}

/// Cumulative trapezoid with the first Euler-Maclaurin end correction.
fn cumulative_from_left(f: &[f64], df: &[f64], dx: f64) -> Vec<f64> {
    let mut out = vec![0.0; f.len()];
    let mut acc = 0.0;
    for k in 1..f.len() {
        acc += 0.5 * dx * (f[k - 1] + f[k]);
        out[k] = acc - dx * dx / 12.0 * (df[k] - df[0]);
    }
    out
}

/// `int_{x_k}^{x_max} f`, accumulated from the right end.
fn cumulative_from_right(f: &[f64], df: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    let mut acc = 0.0;
    for k in (0..n - 1).rev() {
        acc += 0.5 * dx * (f[k] + f[k + 1]);
        out[k] = acc - dx * dx / 12.0 * (df[n - 1] - df[k]);
    }
    out
}

/// Solves `d/dx(phi^2 d theta/dx) = -(m/hbar) d(phi^2)/dl` for `theta`.
///
/// `amplitude(x, l)` is the real amplitude. `dl` defaults to `1e-5 l`; the
/// control derivative uses a five-point stencil at that step. Where the
/// density vanishes together with the running integral (walls, nodes, far
/// tails) the gradient is filled from its neighbours.
pub fn theta_numeric<F>(
    amplitude: F,
    l: f64,
    dl: Option<f64>,
    grid: &Grid,
    units: &UnitSystem,
) -> Result<RegularizationPhase>
where
    F: Fn(f64, f64) -> f64,
{
    let h = dl.unwrap_or(CONTROL_STEP * l);
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidParameter(format!("control step must be positive, got {h}")));
    }
    let dx = grid.dx();
    let xs: Vec<f64> = grid.points().collect();
    let density: Vec<f64> = xs.iter().map(|&x| amplitude(x, l).powi(2)).collect();
    // A vanishing density is a minimum in l, so its l-derivative vanishes too.
    // Setting it explicitly keeps stencils that straddle a moving wall out.
    let rate: Vec<f64> = xs
        .iter()
        .zip(&density)
        .map(|(&x, &d)| {
            if d == 0.0 {
                0.0
            } else {
                five_point(|s| amplitude(x, s).powi(2), l, h)
            }
        })
        .collect();
    let rate_slope = first_derivative(&rate, dx);

    let left = cumulative_from_left(&rate, &rate_slope, dx);
    let right = cumulative_from_right(&rate, &rate_slope, dx);
    let total_abs: f64 = rate.iter().map(|r| r.abs()).sum::<f64>() * dx;
    let conserved = left[left.len() - 1].abs() <= 1e-8 * total_abs.max(f64::MIN_POSITIVE);

    // Past the median of the density, integrate from the right when the total
    // rate vanishes: the two routes agree analytically, and the right one
    // avoids cancellation in the trailing tail.
    let mass_left = cumulative_from_left(&density, &first_derivative(&density, dx), dx);
    let total_mass = mass_left[mass_left.len() - 1];
    let running: Vec<f64> = (0..xs.len())
        .map(|k| {
            if conserved && mass_left[k] > 0.5 * total_mass {
                -right[k]
            } else {
                left[k]
            }
        })
        .collect();

    let scale = units.mass / units.hbar;
    let max_running = running.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut gradient = vec![0.0; xs.len()];
    let mut reliable = vec![true; xs.len()];
    for k in 0..xs.len() {
        if density[k] < DENSITY_FLOOR {
            if running[k].abs() > 1e-8 * max_running + 1e-300 && running[k].abs() > 1e-12 {
                return Err(Error::SingularPhase {
                    x: xs[k],
                    density: density[k],
                    integral: running[k],
                });
            }
            reliable[k] = false;
        } else {
            gradient[k] = -scale * running[k] / density[k];
        }
    }
    fill_unreliable(&xs, &mut gradient, &reliable);

    let mut theta = vec![0.0; xs.len()];
    for k in 1..xs.len() {
        theta[k] = theta[k - 1] + 0.5 * dx * (gradient[k - 1] + gradient[k]);
    }
    Ok(RegularizationPhase {
        theta: RealField::new(*grid, theta)?,
        gradient: RealField::new(*grid, gradient)?,
    })
}

/// Linear interpolation across interior gaps, linear extrapolation at the ends.
fn fill_unreliable(xs: &[f64], values: &mut [f64], reliable: &[bool]) {
    let good: Vec<usize> = (0..xs.len()).filter(|&k| reliable[k]).collect();
    if good.is_empty() {
        values.iter_mut().for_each(|v| *v = 0.0);
        return;
    }
    let line = |a: usize, b: usize, x: f64, values: &[f64]| {
        if a == b {
            values[a]
        } else {
            values[a] + (values[b] - values[a]) * (x - xs[a]) / (xs[b] - xs[a])
        }
    };
    let first = good[0];
    let last = good[good.len() - 1];
    for k in 0..xs.len() {
        if reliable[k] {
            continue;
        }
        values[k] = if k < first {
            let second = good.get(1).copied().unwrap_or(first);
            line(first, second, xs[k], values)
        } else if k > last {
            let before = if good.len() > 1 { good[good.len() - 2] } else { last };
            line(before, last, xs[k], values)
        } else {
            let i = good.partition_point(|&g| g < k);
            line(good[i - 1], good[i], xs[k], values)
        };
    }
}

/// Residual of `d/dx(phi^2 d theta/dx) + (m/hbar) d(phi^2)/dl` on the
/// interior points reached by the fourth-order stencil; the two outermost
/// points at each end are reported as zero.
pub fn continuity_residual<F>(
    amplitude: F,
    l: f64,
    phase: &RegularizationPhase,
    units: &UnitSystem,
) -> Result<RealField>
where
    F: Fn(f64, f64) -> f64,
{
    let grid = *phase.gradient.grid();
    let h = CONTROL_STEP * l;
    let flux: Vec<f64> = grid
        .points()
        .zip(phase.gradient.values())
        .map(|(x, g)| amplitude(x, l).powi(2) * g)
        .collect();
    let div = first_derivative(&flux, grid.dx());
    let n = grid.len();
    let values = grid
        .points()
        .enumerate()
        .map(|(k, x)| {
            if k < 2 || k + 2 >= n {
                0.0
            } else {
                div[k] + units.mass / units.hbar * five_point(|s| amplitude(x, s).powi(2), l, h)
            }
        })
        .collect();
    RealField::new(grid, values)
}

fn phase_gradient(value: Complex64, derivative: Complex64) -> f64 {
    let d = value.norm_sqr();
    if d < 1e-28 {
        0.0
    } else {
        (value.conj() * derivative).im / d
    }
}

/// Regularizing potential
/// `-hbar Im[d_l phi / phi] - (hbar^2/m) Im[d_x phi / phi] d_x theta`
/// for a complex state `phi(x, l)`. Real states give exactly zero.
pub fn v_tilde<F>(
    state: F,
    theta_gradient: &RealField,
    l: f64,
    units: &UnitSystem,
) -> Result<RealField>
where
    F: Fn(f64, f64) -> Complex64,
{
    let grid = *theta_gradient.grid();
    let hl = CONTROL_STEP * l;
    let hx = 1e-5 * (grid.x_max() - grid.x_min());
    let values = grid
        .points()
        .zip(theta_gradient.values())
        .map(|(x, &gt)| {
            let phi = state(x, l);
            let d_l = five_point(|s| state(x, s), l, hl);
            let d_x = five_point(|s| state(s, l), x, hx);
            -units.hbar * phase_gradient(phi, d_l)
                - units.hbar * units.hbar / units.mass * phase_gradient(phi, d_x) * gt
        })
        .collect();
    RealField::new(grid, values)
}

type SpaceTerm = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type TimeTerm = Box<dyn Fn(f64) -> Result<f64> + Send + Sync>;

/// Ingredients of the generic fast-forward potential. Spatial terms take
/// `(x, l)`; time terms take `t`.
#[derive(Default)]
pub struct DriveTerms {
    theta: Option<SpaceTerm>,
    dtheta_dx: Option<SpaceTerm>,
    dtheta_dl: Option<SpaceTerm>,
    deta_dx: Option<SpaceTerm>,
    deta_dl: Option<SpaceTerm>,
    control: Option<TimeTerm>,
    speed: Option<TimeTerm>,
    speed_rate: Option<TimeTerm>,
}

macro_rules! space_setter {
    ($name:ident) => {
        pub fn $name(mut self, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
            self.$name = Some(Box::new(f));
            self
        }
    };
}

macro_rules! time_setter {
    ($name:ident) => {
        pub fn $name(mut self, f: impl Fn(f64) -> Result<f64> + Send + Sync + 'static) -> Self {
            self.$name = Some(Box::new(f));
            self
        }
    };
}

impl DriveTerms {
    pub fn new() -> Self {
        Self::default()
    }

    space_setter!(theta);
    space_setter!(dtheta_dx);
    space_setter!(dtheta_dl);
    space_setter!(deta_dx);
    space_setter!(deta_dl);
    time_setter!(control);
    time_setter!(speed);
    time_setter!(speed_rate);

    /// `eta = 0`, as for any real eigenamplitude.
    pub fn real_state(self) -> Self {
        self.deta_dx(|_, _| 0.0).deta_dl(|_, _| 0.0)
    }

    /// Speed and its rate taken from a trajectory: `v = dl/dt`, `v' = d2l/dt2`.
    pub fn along(self, traj: ControlTrajectory) -> Self {
        self.control(move |t| traj.value(t))
            .speed(move |t| traj.velocity(t))
            .speed_rate(move |t| traj.acceleration(t))
    }

    /// Terms of a scale-invariant density: `theta = (m / 2 hbar) x^2 / l`.
    pub fn scale_invariant(traj: ControlTrajectory, units: UnitSystem) -> Self {
        let c = units.mass / (2.0 * units.hbar);
        Self::new()
            .theta(move |x, l| c * x * x / l)
            .dtheta_dx(move |x, l| 2.0 * c * x / l)
            .dtheta_dl(move |x, l| -c * x * x / (l * l))
            .real_state()
            .along(traj)
    }
}

/// Fast-forward potential assembled from [`DriveTerms`].
pub struct GenericDrive {
    terms: DriveTerms,
    units: UnitSystem,
}

/// Validates that every term is present.
pub fn v_ff_generic(terms: DriveTerms, units: UnitSystem) -> Result<GenericDrive> {
    let checks: [(&'static str, bool); 8] = [
        ("theta", terms.theta.is_some()),
        ("dtheta_dx", terms.dtheta_dx.is_some()),
        ("dtheta_dl", terms.dtheta_dl.is_some()),
        ("deta_dx", terms.deta_dx.is_some()),
        ("deta_dl", terms.deta_dl.is_some()),
        ("control", terms.control.is_some()),
        ("speed", terms.speed.is_some()),
        ("speed_rate", terms.speed_rate.is_some()),
    ];
    if let Some((name, _)) = checks.iter().find(|(_, ok)| !ok) {
        return Err(Error::MissingDriveTerm(name));
    }
    Ok(GenericDrive { terms, units })
}

impl GenericDrive {
    pub fn potential(&self, x: f64, t: f64) -> Result<f64> {
        let t_ = &self.terms;
        let get = |f: &Option<SpaceTerm>, l: f64| f.as_ref().map(|f| f(x, l)).unwrap_or(0.0);
        let l = t_.control.as_ref().map(|f| f(t)).transpose()?.unwrap_or(0.0);
        let v = t_.speed.as_ref().map(|f| f(t)).transpose()?.unwrap_or(0.0);
        let vdot = t_.speed_rate.as_ref().map(|f| f(t)).transpose()?.unwrap_or(0.0);
        let (hbar, m) = (self.units.hbar, self.units.mass);
        let tx = get(&t_.dtheta_dx, l);
        let ex = get(&t_.deta_dx, l);
        Ok(-hbar * hbar / m * v * tx * ex
            - hbar * hbar / (2.0 * m) * v * v * tx * tx
            - hbar * v * get(&t_.deta_dl, l)
            - hbar * vdot * get(&t_.theta, l)
            - hbar * v * v * get(&t_.dtheta_dl, l))
    }
}

/// `-(m/2) (l''/l) x^2`, shared by both models.
pub fn driving_potential(x: f64, t: f64, traj: &ControlTrajectory, units: &UnitSystem) -> Result<f64> {
    let (l, _, ldd) = traj.state(t)?;
    Ok(-0.5 * units.mass * ldd / l * x * x)
}

pub fn v_ff_box(x: f64, t: f64, traj: &ControlTrajectory, units: &UnitSystem) -> Result<f64> {
    let l = traj.value(t)?;
    let slack = 1e-12 * l;
    if !(x >= -slack && x <= l + slack) {
        return Err(Error::OutsideBox { x, length: l });
    }
    driving_potential(x, t, traj, units)
}

pub fn v_ff_ho(x: f64, t: f64, traj: &ControlTrajectory, units: &UnitSystem) -> Result<f64> {
    driving_potential(x, t, traj, units)
}

/// Fast-forward state `phi_n(x; l(t)) exp(i m l' x^2 / 2 hbar l) exp(-i/hbar int E_n)`.
#[derive(Debug, Clone)]
pub struct FastForwardState<M> {
    model: M,
    n: usize,
    traj: ControlTrajectory,
    phase_tol: Tolerance,
}

impl<M: SpectralModel> FastForwardState<M> {
    pub fn new(model: M, n: usize, traj: ControlTrajectory) -> Result<Self> {
        if n < model.ground_level() {
            return Err(Error::InvalidLevel(n));
        }
        Ok(Self {
            model,
            n,
            traj,
            phase_tol: Tolerance {
                abs: 1e-14,
                rel: 1e-13,
            },
        })
    }

    pub fn with_phase_tolerance(mut self, tol: Tolerance) -> Self {
        self.phase_tol = tol;
        self
    }

    pub fn model(&self) -> &M {
        &self.model
    }

    pub fn level(&self) -> usize {
        self.n
    }

    pub fn trajectory(&self) -> &ControlTrajectory {
        &self.traj
    }

    /// `(1/hbar) int_0^t E_n(l(s)) ds`.
    pub fn dynamic_phase(&self, t: f64) -> Result<f64> {
        self.traj.value(t)?;
        let n = self.n;
        let e = |s: f64| {
            self.model
                .energy(n, self.traj.eval(s).0)
                .unwrap_or(f64::NAN)
        };
        Ok(integrate(e, 0.0, t, self.phase_tol)? / self.model.units().hbar)
    }

    /// Amplitude times the chirp, without the dynamical phase. Points outside
    /// the model's domain come out as zero.
    pub fn profile(&self, grid: &Grid, t: f64) -> Result<Vec<Complex64>> {
        let (l, ld, _) = self.traj.state(t)?;
        let u = self.model.units();
        let chirp = u.mass * ld / (2.0 * u.hbar * l);
        Ok(grid
            .points()
            .map(|x| {
                if !self.model.contains(x, l) {
                    return Complex64::new(0.0, 0.0);
                }
                Complex64::from_polar(self.model.amplitude(self.n, l, x), chirp * x * x)
            })
            .collect())
    }

    /// Full state on an arbitrary grid, no domain validation.
    pub fn sample(&self, grid: &Grid, t: f64) -> Result<ComplexField> {
        let phase = Complex64::from_polar(1.0, -self.dynamic_phase(t)?);
        let values = self.profile(grid, t)?.into_iter().map(|v| v * phase).collect();
        ComplexField::new(*grid, values)
    }

    /// Full state on a grid validated like the frozen eigenstate.
    pub fn on_grid(&self, grid: &Grid, t: f64) -> Result<ComplexField> {
        let l = self.traj.value(t)?;
        self.model.eigenstate(self.n, l, grid)?;
        self.sample(grid, t)
    }

    /// Static plus driving potential at `(x, t)`.
    pub fn total_potential(&self, x: f64, t: f64) -> Result<f64> {
        let (l, _, ldd) = self.traj.state(t)?;
        Ok(self.model.potential(x, l) - 0.5 * self.model.units().mass * ldd / l * x * x)
    }
}

pub fn psi_ff_box(
    n: usize,
    t: f64,
    traj: &ControlTrajectory,
    grid: &Grid,
    units: &UnitSystem,
) -> Result<ComplexField> {
    FastForwardState::new(BoxModel::new(*units), n, *traj)?.on_grid(grid, t)
}

pub fn psi_ff_ho(
    n: usize,
    t: f64,
    traj: &ControlTrajectory,
    grid: &Grid,
    units: &UnitSystem,
) -> Result<ComplexField> {
    FastForwardState::new(HarmonicModel::new(*units), n, *traj)?.on_grid(grid, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::inner_product;
    use std::f64::consts::PI;

    const NAT: UnitSystem = UnitSystem::natural();

    #[test]
    fn theta_box_closed_form() {
        let model = BoxModel::new(NAT);
        let l = 1.7;
        let grid = Grid::new(0.0, l, 2048).unwrap();
        for n in 1..=5 {
            let phase = theta_numeric(|x, s| model.amplitude(n, s, x), l, None, &grid, &NAT).unwrap();
            let err = phase.theta.max_abs_diff(|x| 0.5 * x * x / l);
            assert!(err < 1e-6, "n = {n}: {err:e}");
            assert_eq!(phase.theta.values()[0], 0.0);
        }
    }

    #[test]
    fn theta_vanishes_without_control_dependence() {
        let grid = Grid::new(0.0, 1.0, 256).unwrap();
        let phase = theta_numeric(|x, _| (PI * x).sin() * 2f64.sqrt(), 1.0, None, &grid, &NAT).unwrap();
        assert!(phase.theta.max_abs() < 1e-14);
    }

    #[test]
    fn theta_oscillator_gradient_and_continuity() {
        let model = HarmonicModel::new(NAT);
        let r = 0.8;
        let grid = model.natural_grid(r, 2048, 0).unwrap();
        let phase = theta_numeric(|x, s| model.amplitude(0, s, x), r, None, &grid, &NAT).unwrap();
        // gradient (m/hbar) x / R where the state lives
        for (x, g) in grid.points().zip(phase.gradient.values()) {
            if model.amplitude(0, r, x).powi(2) > 1e-10 {
                assert!((g - x / r).abs() < 1e-6, "x = {x}: {g}");
            }
        }
        let resid = continuity_residual(|x, s| model.amplitude(0, s, x), r, &phase, &NAT).unwrap();
        assert!(resid.max_abs() < 1e-6, "{:e}", resid.max_abs());
        // theta(x) - theta(0) is (m/2hbar) x^2 / R
        let mid = grid.len() / 2;
        let t0 = phase.theta.values()[mid] - 0.5 * grid.point(mid).powi(2) / r;
        for (k, x) in grid.points().enumerate() {
            if x.abs() < 4.0 * model.width(r) {
                assert!((phase.theta.values()[k] - t0 - 0.5 * x * x / r).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn continuity_residual_excited_states() {
        let model = BoxModel::new(NAT);
        let grid = Grid::new(0.0, 1.0, 2048).unwrap();
        for n in 1..=5 {
            let amp = |x: f64, s: f64| model.amplitude(n, s, x);
            let phase = theta_numeric(amp, 1.0, None, &grid, &NAT).unwrap();
            let r = continuity_residual(amp, 1.0, &phase, &NAT).unwrap();
            assert!(r.max_abs() < 1e-5, "n = {n}: {:e}", r.max_abs());
        }
        let ho = HarmonicModel::new(NAT);
        for n in 0..4 {
            let g = ho.natural_grid(1.0, 2048, n).unwrap();
            let amp = |x: f64, s: f64| ho.amplitude(n, s, x);
            let phase = theta_numeric(amp, 1.0, None, &g, &NAT).unwrap();
            let r = continuity_residual(amp, 1.0, &phase, &NAT).unwrap();
            assert!(r.max_abs() < 1e-5, "ho n = {n}: {:e}", r.max_abs());
        }
    }

    #[test]
    fn theta_detects_singular_node() {
        // mass flows across a node pinned at x = 0
        let amp = |x: f64, s: f64| x * (-(x - s) * (x - s)).exp();
        let grid = Grid::new(-5.0, 5.0, 1001).unwrap();
        let r = theta_numeric(amp, 0.5, None, &grid, &NAT);
        assert!(matches!(r, Err(Error::SingularPhase { .. })), "{r:?}");
    }

    #[test]
    fn v_tilde_vanishes_for_real_states() {
        let bm = BoxModel::new(NAT);
        let grid = Grid::new(0.0, 1.0, 512).unwrap();
        let phase = theta_numeric(|x, s| bm.amplitude(2, s, x), 1.0, None, &grid, &NAT).unwrap();
        let vt = v_tilde(|x, s| Complex64::new(bm.amplitude(2, s, x), 0.0), &phase.gradient, 1.0, &NAT)
            .unwrap();
        assert!(vt.values().iter().all(|&v| v == 0.0));

        let hm = HarmonicModel::new(NAT);
        let g = hm.natural_grid(1.0, 512, 1).unwrap();
        let phase = theta_numeric(|x, s| hm.amplitude(1, s, x), 1.0, None, &g, &NAT).unwrap();
        let vt = v_tilde(|x, s| Complex64::new(hm.amplitude(1, s, x), 0.0), &phase.gradient, 1.0, &NAT)
            .unwrap();
        assert!(vt.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn v_tilde_synthetic_phase() {
        // eta = R x: Im[d_R phi / phi] = x, and theta = 0
        let grid = Grid::new(-2.0, 2.0, 201).unwrap();
        let zero = RealField::from_fn(grid, |_| 0.0).unwrap();
        let r = 1.3;
        let vt = v_tilde(
            |x, s| Complex64::from_polar((-x * x).exp(), s * x),
            &zero,
            r,
            &NAT,
        )
        .unwrap();
        let err = vt.max_abs_diff(|x| -x);
        assert!(err < 1e-8, "{err:e}");
    }

    #[test]
    fn generic_drive_requires_all_terms() {
        let r = v_ff_generic(DriveTerms::new().theta(|_, _| 0.0), NAT);
        assert!(matches!(r, Err(Error::MissingDriveTerm("dtheta_dx"))));
    }

    #[test]
    fn generic_drive_without_speed_vanishes() {
        let traj = ControlTrajectory::adiabatic_linear(1.0, 0.0, 1.0).unwrap();
        let drive = v_ff_generic(DriveTerms::scale_invariant(traj, NAT), NAT).unwrap();
        for &x in &[0.0, 0.3, 0.9] {
            assert_eq!(drive.potential(x, 0.5).unwrap(), 0.0);
        }
    }

    #[test]
    fn generic_drive_matches_closed_forms() {
        let ramps = [
            ControlTrajectory::polynomial(1.0, 54.0, 1.0).unwrap(),
            ControlTrajectory::trigonometric(1.0, 9.0, 1.0).unwrap(),
            ControlTrajectory::polynomial(1.0, 6.0 * (0.1f64.sqrt() - 1.0), 1.0).unwrap(),
            ControlTrajectory::trigonometric(1.0, 0.1f64.sqrt() - 1.0, 1.0).unwrap(),
        ];
        for traj in ramps {
            let drive = v_ff_generic(DriveTerms::scale_invariant(traj, NAT), NAT).unwrap();
            for i in 0..=20 {
                let t = i as f64 / 20.0;
                let l = traj.value(t).unwrap();
                for j in 0..=10 {
                    let x = l * j as f64 / 10.0;
                    let g = drive.potential(x, t).unwrap();
                    let closed = v_ff_ho(x, t, &traj, &NAT).unwrap();
                    assert!((g - closed).abs() < 1e-8 * (1.0 + closed.abs()), "t={t} x={x}");
                    let boxed = v_ff_box(x, t, &traj, &NAT).unwrap();
                    assert_eq!(boxed, closed);
                }
            }
        }
    }

    #[test]
    fn closed_form_drive_examples() {
        let lin = ControlTrajectory::adiabatic_linear(1.0, 0.3, 2.0).unwrap();
        assert_eq!(v_ff_box(0.5, 1.0, &lin, &NAT).unwrap(), 0.0);
        let p = ControlTrajectory::polynomial(1.0, 54.0, 1.0).unwrap();
        assert!((v_ff_box(1.0, 0.0, &p, &NAT).unwrap() + 27.0).abs() < 1e-12);
        assert!(matches!(v_ff_box(1.5, 0.0, &p, &NAT), Err(Error::OutsideBox { .. })));
        let tr = ControlTrajectory::trigonometric(1.0, 9.0, 1.0).unwrap();
        let early = v_ff_box(0.5, 0.1, &tr, &NAT).unwrap();
        let late = v_ff_box(0.5, 0.6, &tr, &NAT).unwrap();
        assert!(early < 0.0 && late > 0.0);
        assert!(v_ff_box(0.5, 0.5, &tr, &NAT).unwrap().abs() < 1e-12);
    }

    #[test]
    fn fast_forward_state_properties() {
        let tr = ControlTrajectory::trigonometric(1.0, 9.0, 1.0).unwrap();
        let st = FastForwardState::new(BoxModel::new(NAT), 1, tr).unwrap();
        let g0 = Grid::new(0.0, 1.0, 1024).unwrap();
        let psi0 = st.on_grid(&g0, 0.0).unwrap();
        let phi0 = box_eigen(1, 1.0, &g0);
        for (a, b) in psi0.values().iter().zip(phi0.values()) {
            assert!((a - b).norm() < 1e-15);
        }
        for &t in &[0.2, 0.5, 0.77] {
            let l = tr.value(t).unwrap();
            let g = Grid::new(0.0, l, 1024).unwrap();
            let psi = st.on_grid(&g, t).unwrap();
            assert!((inner_product(&psi, &psi).unwrap().re - 1.0).abs() < 1e-10);
            let phi = box_eigen(1, l, &g);
            for (a, b) in psi.values().iter().zip(phi.values()) {
                assert!((a.norm() - b.re.abs()).abs() < 1e-14);
            }
        }
        let gf = Grid::new(0.0, 10.0, 1024).unwrap();
        let psif = psi_ff_box(1, 1.0, &tr, &gf, &NAT).unwrap();
        for (x, v) in gf.points().zip(psif.values()) {
            let want = (0.2f64).sqrt() * (PI * x / 10.0).sin().abs();
            assert!((v.norm() - want).abs() < 1e-12);
        }
        assert!(psi_ff_box(1, 0.5, &tr, &g0, &NAT).is_err());
        assert!(FastForwardState::new(BoxModel::new(NAT), 0, tr).is_err());
    }

    #[test]
    fn oscillator_state_norm() {
        let r_f = HarmonicModel::control_for_omega(10.0).unwrap();
        let tr = ControlTrajectory::connecting(crate::RampKind::PolynomialRamp, 1.0, r_f, 1.0).unwrap();
        let g = Grid::new(-8.0, 8.0, 1024).unwrap();
        for &t in &[0.0, 0.3, 1.0] {
            let psi = psi_ff_ho(2, t, &tr, &g, &NAT).unwrap();
            assert!((inner_product(&psi, &psi).unwrap().re - 1.0).abs() < 1e-10);
        }
    }

    fn box_eigen(n: usize, l: f64, g: &Grid) -> ComplexField {
        BoxModel::new(NAT).eigenstate(n, l, g).unwrap()
    }
}
