//! Energy cost of fast-forwarding: Fermi-Dirac ensembles, the thermal
//! internal energy as a truncated trace and as low-temperature expansions,
//! the time-averaged cost and the Frobenius-norm cost.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;

use crate::csv::sci;
use crate::error::{Error, Result};
use crate::fastforward::FastForwardState;
use crate::field::{inner_product, second_derivative, ComplexField};
use crate::grid::Grid;
use crate::par;
use crate::quadrature::{try_integrate, Tolerance};
use crate::spectra::SpectralModel;
use crate::trajectory::{ControlTrajectory, RampKind};
use crate::units::UnitSystem;

/// Occupations below this are dropped from truncated traces.
pub const OCCUPATION_CUTOFF: f64 = 1e-12;

/// Relative tolerance of every time average.
pub const COST_TOLERANCE: f64 = 1e-10;

/// Fixed-particle-number Fermi-Dirac ensemble. `beta = inf` is the
/// zero-temperature limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalEnsemble {
    pub beta: f64,
    pub n_particles: f64,
    pub units: UnitSystem,
}

impl ThermalEnsemble {
    pub fn new(beta: f64, n_particles: f64, units: UnitSystem) -> Result<Self> {
        if !(beta > 0.0) || beta.is_nan() {
            return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
        }
        if !(n_particles.is_finite() && n_particles >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "particle number must be non-negative, got {n_particles}"
            )));
        }
        Ok(Self {
            beta,
            n_particles,
            units,
        })
    }

    pub fn from_temperature(temperature: f64, n_particles: f64, units: UnitSystem) -> Result<Self> {
        if !(temperature.is_finite() && temperature >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "temperature must be non-negative, got {temperature}"
            )));
        }
        Self::new(1.0 / (units.kb * temperature), n_particles, units)
    }

    pub fn zero_temperature(n_particles: f64, units: UnitSystem) -> Result<Self> {
        Self::new(f64::INFINITY, n_particles, units)
    }

    pub fn temperature(&self) -> f64 {
        1.0 / (self.units.kb * self.beta)
    }

    /// `k_B T`.
    pub fn thermal_energy(&self) -> f64 {
        1.0 / self.beta
    }

    pub fn is_zero_temperature(&self) -> bool {
        self.beta.is_infinite()
    }

    /// `m k_B T / hbar^2`, the combination entering the expansions.
    fn tau(&self) -> f64 {
        self.units.mass * self.thermal_energy() / (self.units.hbar * self.units.hbar)
    }

    pub fn occupation(&self, e: f64, mu: f64) -> f64 {
        fermi_occupation(e, mu, self.beta)
    }
}

/// `1 / (exp(beta (e - mu)) + 1)` without overflow.
pub fn fermi_occupation(e: f64, mu: f64, beta: f64) -> f64 {
    let z = beta * (e - mu);
    if z.is_nan() {
        // infinite beta at the Fermi level
        return 0.5;
    }
    if z > 0.0 {
        let w = (-z).exp();
        w / (1.0 + w)
    } else {
        1.0 / (1.0 + z.exp())
    }
}

fn occupied(energies: &[f64], mu: f64, beta: f64) -> f64 {
    energies.iter().map(|&e| fermi_occupation(e, mu, beta)).sum()
}

/// Chemical potential placing `n_particles` fermions on `energies`.
pub fn solve_mu(energies: &[f64], beta: f64, n_particles: f64) -> Result<f64> {
    let count = energies.len();
    if !(n_particles > 0.0 && n_particles < count as f64) {
        return Err(Error::ParticleNumberOutOfRange {
            n: n_particles,
            levels: count,
        });
    }
    let mut sorted = energies.to_vec();
    sorted.sort_by(f64::total_cmp);
    if beta.is_infinite() {
        let k = n_particles.round();
        if (k - n_particles).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "zero temperature needs an integer particle number, got {n_particles}"
            )));
        }
        let k = k as usize;
        return Ok(0.5 * (sorted[k - 1] + sorted[k]));
    }
    let spread = (sorted[count - 1] - sorted[0]).abs().max(1.0);
    let mut lo = sorted[0] - spread;
    let mut hi = sorted[count - 1] + spread;
    while occupied(&sorted, lo, beta) > n_particles {
        lo -= 2.0 * (hi - lo);
    }
    while occupied(&sorted, hi, beta) < n_particles {
        hi += 2.0 * (hi - lo);
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if occupied(&sorted, mid, beta) < n_particles {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Chemical potential and occupations, in input order.
pub fn occupations(energies: &[f64], ens: &ThermalEnsemble) -> Result<(f64, Vec<f64>)> {
    let mu = solve_mu(energies, ens.beta, ens.n_particles)?;
    Ok((mu, energies.iter().map(|&e| ens.occupation(e, mu)).collect()))
}

fn level_energies<M: SpectralModel>(model: &M, l: f64, count: usize) -> Result<Vec<f64>> {
    (0..count)
        .map(|k| model.energy(model.ground_level() + k, l))
        .collect()
}

/// Smallest doubling of a starting size whose last occupation is below
/// `1e-13`.
pub fn auto_cutoff<M: SpectralModel>(model: &M, l: f64, ens: &ThermalEnsemble) -> Result<usize> {
    let mut count = (2.0 * ens.n_particles.ceil()) as usize + 8;
    while count <= 1 << 16 {
        let energies = level_energies(model, l, count)?;
        let (_, f) = occupations(&energies, ens)?;
        if f[count - 1] < 1e-13 {
            return Ok(count);
        }
        count *= 2;
    }
    Err(Error::InvalidParameter(format!(
        "no level cutoff below 65536 suppresses the occupations at beta = {}",
        ens.beta
    )))
}

/// `<psi_FF,n | H_FF | psi_FF,n>` on `grid`, by quadrature with the
/// fourth-order Laplacian.
pub fn level_expectation<M: SpectralModel + Clone>(
    model: &M,
    traj: &ControlTrajectory,
    t: f64,
    n: usize,
    grid: &Grid,
) -> Result<f64> {
    let (l, _, ldd) = traj.state(t)?;
    let units = *model.units();
    let st = FastForwardState::new(model.clone(), n, *traj)?;
    let psi = ComplexField::new(*grid, st.profile(grid, t)?)?;
    let lap = second_derivative(psi.values(), grid.dx());
    let h: Vec<Complex64> = psi
        .values()
        .iter()
        .zip(&lap)
        .zip(grid.points())
        .map(|((v, d2), x)| {
            let u = model.potential(x, l) - 0.5 * units.mass * ldd / l * x * x;
            -d2 * units.kinetic_scale() + v * u
        })
        .collect();
    Ok(inner_product(&psi, &ComplexField::new(*grid, h)?)?.re)
}

/// Grid wide enough for the lowest `count` levels at time `t`.
pub fn trace_grid<M: SpectralModel>(
    model: &M,
    traj: &ControlTrajectory,
    t: f64,
    count: usize,
    points: usize,
) -> Result<Grid> {
    let top = model.ground_level() + count.saturating_sub(1);
    model.natural_grid(traj.value(t)?, points, top)
}

/// [`level_expectation`] for the levels `ground..ground + count`, spread
/// over the thread pool.
pub fn level_expectations<M: SpectralModel + Clone + Send>(
    model: &M,
    traj: &ControlTrajectory,
    t: f64,
    count: usize,
    points: usize,
) -> Result<Vec<f64>> {
    let grid = trace_grid(model, traj, t, count, points)?;
    let levels: Vec<usize> = (0..count).map(|k| model.ground_level() + k).collect();
    par::try_map(&levels, |&n| level_expectation(model, traj, t, n, &grid))
}

/// Truncated thermal trace `sum_n f_n <psi_FF,n|H_FF|psi_FF,n>` with the
/// chemical potential solved from the instantaneous spectrum. With
/// `cutoff = None` the cutoff is chosen automatically.
pub fn internal_energy_numeric<M: SpectralModel + Clone + Send>(
    model: &M,
    traj: &ControlTrajectory,
    t: f64,
    ens: &ThermalEnsemble,
    cutoff: Option<usize>,
    points: usize,
) -> Result<f64> {
    if ens.n_particles == 0.0 {
        traj.value(t)?;
        return Ok(0.0);
    }
    let l = traj.value(t)?;
    let count = match cutoff {
        Some(c) => c,
        None => auto_cutoff(model, l, ens)?,
    };
    let energies = level_energies(model, l, count)?;
    let (_, f) = occupations(&energies, ens)?;
    if f[count - 1] >= OCCUPATION_CUTOFF {
        return Err(Error::CutoffTooSmall {
            cutoff: count,
            occupation: f[count - 1],
        });
    }
    let used = f.iter().rposition(|&v| v > 0.0).map_or(0, |k| k + 1);
    let values = level_expectations(model, traj, t, used, points)?;
    Ok(values.iter().zip(&f).map(|(u, w)| u * w).sum())
}

/// Same trace from the analytic second moments: for scale-invariant states
/// `<H_FF>_n = E_n + (m/2) (l'^2 - l l'') <x^2>_n / l^2`.
pub fn internal_energy_moments<M: SpectralModel>(
    model: &M,
    traj: &ControlTrajectory,
    t: f64,
    ens: &ThermalEnsemble,
    cutoff: usize,
) -> Result<f64> {
    if ens.n_particles == 0.0 {
        return Ok(0.0);
    }
    let (l, ld, ldd) = traj.state(t)?;
    let energies = level_energies(model, l, cutoff)?;
    let (_, f) = occupations(&energies, ens)?;
    let m = model.units().mass;
    Ok(energies
        .iter()
        .zip(&f)
        .enumerate()
        .map(|(k, (e, w))| {
            let n = model.ground_level() + k;
            w * (e + 0.5 * m * (ld * ld - l * ldd) * model.x2_element(n, n, l) / (l * l))
        })
        .sum())
}

/// `N^2 [1 + (4 pi^2 / 3) L0^2 (m k T / hbar^2)^2 (N / L0)^-2]`.
pub fn coefficient_a(ens: &ThermalEnsemble, l0: f64) -> f64 {
    let n = ens.n_particles;
    if ens.is_zero_temperature() {
        return n * n;
    }
    n * n * (1.0 + 4.0 * PI * PI / 3.0 * l0 * l0 * ens.tau().powi(2) * (n / l0).powi(-2))
}

/// `(B1, B2)` at wall position `l`.
pub fn coefficients_b(ens: &ThermalEnsemble, l: f64) -> (f64, f64) {
    let n = ens.n_particles;
    let u = ens.units;
    let t4 = thermal_quartic(ens, l);
    let b1 = PI * PI * u.hbar * u.hbar * n.powi(3) / (24.0 * u.mass) * (1.0 + 24.0 / (PI * PI) * t4);
    let b2 = u.mass * n / 6.0 * (1.0 + 16.0 / (3.0 * PI * PI) * t4);
    (b1, b2)
}

/// `(m k T / hbar^2)^2 (N / L)^-4`, zero at zero temperature.
fn thermal_quartic(ens: &ThermalEnsemble, l: f64) -> f64 {
    if ens.is_zero_temperature() {
        0.0
    } else {
        ens.tau().powi(2) * (ens.n_particles / l).powi(-4)
    }
}

/// `A (hbar^2 / 4 m L^2 - (m/8) L L'' + (m/8) L'^2)`.
pub fn internal_energy_ho(traj: &ControlTrajectory, t: f64, a: f64, units: &UnitSystem) -> Result<f64> {
    let (l, ld, ldd) = traj.state(t)?;
    let m = units.mass;
    Ok(a * (units.hbar * units.hbar / (4.0 * m * l * l) - m / 8.0 * l * ldd + m / 8.0 * ld * ld))
}

/// Box internal energy split into its wall-confinement and drive parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxEnergy {
    pub confinement: f64,
    pub drive: f64,
}

impl BoxEnergy {
    pub fn total(&self) -> f64 {
        self.confinement + self.drive
    }
}

/// Prefactor of `-(L L'' - L'^2)` in the box expansion, and its derivative in `L`.
pub fn box_drive_kappa(ens: &ThermalEnsemble, l: f64) -> (f64, f64) {
    let n = ens.n_particles;
    let m = ens.units.mass;
    let c = 6.0 / (PI * PI * n * n);
    let d = 16.0 / (3.0 * PI * PI);
    let t4 = thermal_quartic(ens, l);
    let kappa = m * n / 6.0 * (1.0 + c * (1.0 + d * t4));
    let dkappa = m * n / 6.0 * c * d * 4.0 * t4 / l;
    (kappa, dkappa)
}

/// `B2` as a drive prefactor, with its derivative in `L`.
pub fn b2_kappa(ens: &ThermalEnsemble, l: f64) -> (f64, f64) {
    let (_, b2) = coefficients_b(ens, l);
    let m = ens.units.mass;
    let n = ens.n_particles;
    let db2 = m * n / 6.0 * 16.0 / (3.0 * PI * PI) * 4.0 * thermal_quartic(ens, l) / l;
    (b2, db2)
}

/// Low-temperature, large-N expansion of the box internal energy.
pub fn internal_energy_box(traj: &ControlTrajectory, t: f64, ens: &ThermalEnsemble) -> Result<BoxEnergy> {
    let (l, ld, ldd) = traj.state(t)?;
    let u = ens.units;
    let n = ens.n_particles;
    let confinement = PI * PI * u.hbar * u.hbar / (24.0 * u.mass) * n.powi(3) / (l * l)
        * (1.0 + 24.0 / (PI * PI) * thermal_quartic(ens, l));
    let (kappa, _) = box_drive_kappa(ens, l);
    Ok(BoxEnergy {
        confinement,
        drive: -kappa * (l * ldd - ld * ld),
    })
}

/// `(1/T_FF) int_0^T_FF u(t) dt`.
pub fn cost_ff<F>(u_of_t: F, t_ff: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(t_ff.is_finite() && t_ff > 0.0) {
        return Err(Error::InvalidParameter(format!("T_FF must be positive, got {t_ff}")));
    }
    let tol = Tolerance {
        abs: 1e-300,
        rel: COST_TOLERANCE,
    };
    Ok(try_integrate(u_of_t, 0.0, t_ff, tol)?.value / t_ff)
}

/// Level cutoff good for a whole trajectory.
pub fn trajectory_cutoff<M: SpectralModel>(model: &M, traj: &ControlTrajectory, ens: &ThermalEnsemble) -> Result<usize> {
    let mut best = 0;
    for k in 0..=32 {
        let t = traj.t_ff() * k as f64 / 32.0;
        best = best.max(auto_cutoff(model, traj.value(t)?, ens)?);
    }
    Ok(best)
}

/// Cost from the truncated thermal trace, one fixed cutoff for all times.
pub fn cost_ff_trace<M: SpectralModel + Clone + Send>(
    model: &M,
    traj: &ControlTrajectory,
    ens: &ThermalEnsemble,
    cutoff: Option<usize>,
    points: usize,
) -> Result<f64> {
    if ens.n_particles == 0.0 {
        return Ok(0.0);
    }
    let m = match cutoff {
        Some(m) => m,
        None => trajectory_cutoff(model, traj, ens)?,
    };
    cost_ff(
        |t| internal_energy_numeric(model, traj, t, ens, Some(m), points),
        traj.t_ff(),
    )
}

/// `int_0^T L'^2 dt / (vbar^2 T)` for the two smooth ramps.
pub fn ramp_speed_moment(kind: RampKind) -> Result<f64> {
    match kind {
        RampKind::PolynomialRamp => Ok(1.0 / 30.0),
        RampKind::TrigonometricRamp => Ok(1.5),
        RampKind::AdiabaticLinear => Err(Error::InvalidParameter(
            "the linear ramp does not stop at its end points".into(),
        )),
    }
}

/// Drive part of the cost computed three ways.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveCost {
    /// `(1/T) int -kappa(L) (L L'' - L'^2) dt`.
    pub quadrature: f64,
    /// `(1/T) int (L kappa'(L) + 2 kappa) L'^2 dt`, by parts.
    pub by_parts: f64,
    /// `2 kappa(L0) vbar^2 int L'^2 / (vbar^2 T)`, exact when kappa is constant.
    pub closed: f64,
}

pub fn drive_cost<K>(traj: &ControlTrajectory, kappa: K) -> Result<DriveCost>
where
    K: Fn(f64) -> (f64, f64),
{
    let moment = ramp_speed_moment(traj.kind())?;
    let quadrature = cost_ff(
        |t| {
            let (l, ld, ldd) = traj.state(t)?;
            Ok(-kappa(l).0 * (l * ldd - ld * ld))
        },
        traj.t_ff(),
    )?;
    let by_parts = cost_ff(
        |t| {
            let (l, ld, _) = traj.state(t)?;
            let (k, dk) = kappa(l);
            Ok((l * dk + 2.0 * k) * ld * ld)
        },
        traj.t_ff(),
    )?;
    let closed = 2.0 * kappa(traj.l0()).0 * moment * traj.vbar().powi(2);
    Ok(DriveCost {
        quadrature,
        by_parts,
        closed,
    })
}

fn mean_inverse_square(traj: &ControlTrajectory) -> Result<f64> {
    cost_ff(|t| Ok(traj.value(t)?.powi(-2)), traj.t_ff())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SystemKind {
    Harmonic,
    Box,
}

impl SystemKind {
    pub fn name(&self) -> &'static str {
        match self {
            SystemKind::Harmonic => "harmonic",
            SystemKind::Box => "box",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostConstants {
    A(f64),
    B { b1: f64, b2: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrobeniusCost {
    pub value: f64,
    pub cutoff: usize,
}

/// Cost of one ramp from the closed-form internal energy.
#[derive(Debug, Clone, PartialEq)]
pub struct CostReport {
    pub system: SystemKind,
    pub ramp: RampKind,
    pub t_ff: f64,
    pub vbar: f64,
    /// Time average of the internal-energy expression by quadrature.
    pub c_ff: f64,
    pub c_frobenius: Option<FrobeniusCost>,
    pub u_samples: Vec<(f64, f64)>,
    /// Constants at the initial control value.
    pub constants: CostConstants,
    /// Confinement average plus the integrated drive coefficient.
    pub closed_form_value: f64,
    /// Closed form with the coefficients as originally printed.
    pub printed_closed_form: f64,
    /// Drive term alone, printed coefficient.
    pub printed_drive: f64,
    pub drive: DriveCost,
    /// Box only: the drive term with `B2` as its prefactor.
    pub b2_drive: Option<DriveCost>,
}

impl CostReport {
    pub fn quadrature_value(&self) -> f64 {
        self.c_ff
    }

    /// `printed / quadrature`.
    pub fn printed_ratio(&self) -> f64 {
        self.printed_closed_form / self.c_ff
    }

    pub fn with_frobenius(mut self, value: FrobeniusCost) -> Self {
        self.c_frobenius = Some(value);
        self
    }

    /// `kind,t,value` rows: one `u_bar` row per sample, then summary rows.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "kind,t,value")?;
        for &(t, u) in &self.u_samples {
            writeln!(out, "u_bar,{},{}", sci(t), sci(u))?;
        }
        let mut summary = vec![
            ("c_ff", self.c_ff),
            ("closed_form", self.closed_form_value),
            ("printed_closed_form", self.printed_closed_form),
            ("printed_ratio", self.printed_ratio()),
            ("drive_quadrature", self.drive.quadrature),
            ("drive_by_parts", self.drive.by_parts),
            ("drive_closed", self.drive.closed),
            ("printed_drive", self.printed_drive),
        ];
        if let Some(d) = self.b2_drive {
            summary.push(("b2_drive_quadrature", d.quadrature));
            summary.push(("b2_drive_by_parts", d.by_parts));
            summary.push(("b2_drive_closed", d.closed));
        }
        match self.constants {
            CostConstants::A(a) => summary.push(("A", a)),
            CostConstants::B { b1, b2 } => {
                summary.push(("B1", b1));
                summary.push(("B2", b2));
            }
        }
        if let Some(f) = self.c_frobenius {
            summary.push(("c_frobenius", f.value));
            summary.push(("frobenius_cutoff", f.cutoff as f64));
        }
        for (name, v) in summary {
            writeln!(out, "{name},{},{}", sci(self.t_ff), sci(v))?;
        }
        Ok(())
    }
}

fn sample_times(t_ff: f64, samples: usize) -> Vec<f64> {
    let k = samples.max(2) - 1;
    (0..=k).map(|i| t_ff * i as f64 / k as f64).collect()
}

fn check_smooth_ramp(traj: &ControlTrajectory) -> Result<()> {
    ramp_speed_moment(traj.kind()).map(|_| ())
}

/// Cost report for the oscillator from its closed-form internal energy.
pub fn cost_ff_ho_closed(traj: &ControlTrajectory, ens: &ThermalEnsemble, samples: usize) -> Result<CostReport> {
    check_smooth_ramp(traj)?;
    let u = ens.units;
    let a = coefficient_a(ens, traj.l0());
    let c_ff = cost_ff(|t| internal_energy_ho(traj, t, a, &u), traj.t_ff())?;
    let u_samples = sample_times(traj.t_ff(), samples)
        .into_iter()
        .map(|t| Ok((t, internal_energy_ho(traj, t, a, &u)?)))
        .collect::<Result<Vec<_>>>()?;
    let kappa = u.mass * a / 8.0;
    let drive = drive_cost(traj, |_| (kappa, 0.0))?;
    let confinement = a * u.hbar * u.hbar / (4.0 * u.mass) * mean_inverse_square(traj)?;
    let v2 = traj.vbar().powi(2);
    let printed_drive = match traj.kind() {
        RampKind::PolynomialRamp => u.mass * a * v2 / 120.0,
        _ => 3.0 * a * u.mass * v2 / 8.0,
    };
    Ok(CostReport {
        system: SystemKind::Harmonic,
        ramp: traj.kind(),
        t_ff: traj.t_ff(),
        vbar: traj.vbar(),
        c_ff,
        c_frobenius: None,
        u_samples,
        constants: CostConstants::A(a),
        closed_form_value: confinement + drive.closed,
        printed_closed_form: confinement + printed_drive,
        printed_drive,
        drive,
        b2_drive: None,
    })
}

/// Cost report for the box from its low-temperature expansion.
pub fn cost_ff_box_closed(traj: &ControlTrajectory, ens: &ThermalEnsemble, samples: usize) -> Result<CostReport> {
    check_smooth_ramp(traj)?;
    let c_ff = cost_ff(|t| Ok(internal_energy_box(traj, t, ens)?.total()), traj.t_ff())?;
    let u_samples = sample_times(traj.t_ff(), samples)
        .into_iter()
        .map(|t| Ok((t, internal_energy_box(traj, t, ens)?.total())))
        .collect::<Result<Vec<_>>>()?;
    let drive = drive_cost(traj, |l| box_drive_kappa(ens, l))?;
    let confinement = cost_ff(|t| Ok(internal_energy_box(traj, t, ens)?.confinement), traj.t_ff())?;
    let (b1, b2) = coefficients_b(ens, traj.l0());
    let v2 = traj.vbar().powi(2);
    let printed_drive = match traj.kind() {
        RampKind::PolynomialRamp => b2 * v2 / 90.0,
        _ => b2 * v2 / 2.0,
    };
    let printed_confinement = b1 / 24.0 * mean_inverse_square(traj)?;
    Ok(CostReport {
        system: SystemKind::Box,
        ramp: traj.kind(),
        t_ff: traj.t_ff(),
        vbar: traj.vbar(),
        c_ff,
        c_frobenius: None,
        u_samples,
        constants: CostConstants::B { b1, b2 },
        closed_form_value: confinement + drive.closed,
        printed_closed_form: printed_confinement + printed_drive,
        printed_drive,
        drive,
        b2_drive: Some(drive_cost(traj, |l| b2_kappa(ens, l))?),
    })
}

/// `sqrt(sum |H_mn|^2)` of a square matrix given by rows.
pub fn frobenius_norm(rows: &[Vec<f64>]) -> Result<f64> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidParameter("matrix is not square".into()));
    }
    Ok(rows.iter().flatten().map(|v| v * v).sum::<f64>().sqrt())
}

/// `H0 + V_FF` on the lowest `count` instantaneous eigenstates.
pub fn hamiltonian_matrix<M: SpectralModel>(
    model: &M,
    traj: &ControlTrajectory,
    t: f64,
    count: usize,
) -> Result<Vec<Vec<f64>>> {
    let (l, _, ldd) = traj.state(t)?;
    let drive = -0.5 * model.units().mass * ldd / l;
    let g = model.ground_level();
    (0..count)
        .map(|i| {
            (0..count)
                .map(|j| {
                    let diag = if i == j { model.energy(g + i, l)? } else { 0.0 };
                    Ok(diag + drive * model.x2_element(g + i, g + j, l))
                })
                .collect()
        })
        .collect()
}

/// `(1/T) int ||H(t)|| dt` truncated to `cutoff` levels.
pub fn frobenius_cost<M: SpectralModel>(
    model: &M,
    traj: &ControlTrajectory,
    cutoff: usize,
) -> Result<FrobeniusCost> {
    if cutoff < 2 {
        return Err(Error::InvalidParameter(format!(
            "Frobenius cost needs at least two levels, got {cutoff}"
        )));
    }
    let value = cost_ff(
        |t| frobenius_norm(&hamiltonian_matrix(model, traj, t, cutoff)?),
        traj.t_ff(),
    )?;
    Ok(FrobeniusCost { value, cutoff })
}

/// Static thermal energy `sum f_n E_n` at control value `l`.
pub fn static_energy<M: SpectralModel>(model: &M, l: f64, ens: &ThermalEnsemble) -> Result<f64> {
    if ens.n_particles == 0.0 {
        return Ok(0.0);
    }
    let count = auto_cutoff(model, l, ens)?;
    let energies = level_energies(model, l, count)?;
    let (_, f) = occupations(&energies, ens)?;
    Ok(energies.iter().zip(&f).map(|(e, w)| e * w).sum())
}
