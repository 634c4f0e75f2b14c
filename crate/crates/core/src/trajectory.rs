//! Control-parameter trajectories and the advanced-time map.
//!
//! The same trajectory type drives both confinement models: it is the wall
//! position `L(t)` for the box and `R(t) = 1/sqrt(omega(t))` for the
//! oscillator. The fast-forward ramps describe `l(Lambda(t))` directly, i.e.
//! the control parameter as seen by the accelerated system.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{try_integrate, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RampKind {
    /// `l0 + epsilon t`
    AdiabaticLinear,
    /// `l0 + vbar (t^2 / 2T - t^3 / 3T^2)`
    PolynomialRamp,
    /// `l0 + vbar (t - T/2pi sin(2pi t / T))`
    TrigonometricRamp,
}

/// Relative slack allowed when checking `0 <= t <= t_ff`.
const TIME_SLACK: f64 = 1e-12;

/// Number of samples used to verify positivity at construction.
const POSITIVITY_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlTrajectory {
    kind: RampKind,
    l0: f64,
    vbar: f64,
    t_ff: f64,
    epsilon: f64,
}

impl ControlTrajectory {
    pub fn adiabatic_linear(l0: f64, epsilon: f64, t_ff: f64) -> Result<Self> {
        Self::build(RampKind::AdiabaticLinear, l0, 0.0, t_ff, epsilon)
    }

    pub fn polynomial(l0: f64, vbar: f64, t_ff: f64) -> Result<Self> {
        Self::build(RampKind::PolynomialRamp, l0, vbar, t_ff, 0.0)
    }

    pub fn trigonometric(l0: f64, vbar: f64, t_ff: f64) -> Result<Self> {
        Self::build(RampKind::TrigonometricRamp, l0, vbar, t_ff, 0.0)
    }

    /// Trajectory of the given kind that travels from `l0` to `l_final` in
    /// `t_ff`. For the linear kind the growth rate is `(l_final - l0)/t_ff`.
    pub fn connecting(kind: RampKind, l0: f64, l_final: f64, t_ff: f64) -> Result<Self> {
        match kind {
            RampKind::AdiabaticLinear => {
                check_t_ff(t_ff)?;
                Self::adiabatic_linear(l0, (l_final - l0) / t_ff, t_ff)
            }
            _ => {
                let vbar = vbar_for_target(kind, l0, l_final, t_ff)?;
                Self::build(kind, l0, vbar, t_ff, 0.0)
            }
        }
    }

    fn build(kind: RampKind, l0: f64, vbar: f64, t_ff: f64, epsilon: f64) -> Result<Self> {
        if !(l0.is_finite() && l0 > 0.0) {
            return Err(Error::InvalidParameter(format!("l0 must be positive, got {l0}")));
        }
        check_t_ff(t_ff)?;
        if !vbar.is_finite() || !epsilon.is_finite() {
            return Err(Error::InvalidParameter("ramp rate must be finite".into()));
        }
        let traj = Self {
            kind,
            l0,
            vbar,
            t_ff,
            epsilon,
        };
        for i in 0..=POSITIVITY_SAMPLES {
            let t = t_ff * i as f64 / POSITIVITY_SAMPLES as f64;
            let value = traj.eval(t).0;
            if !(value > 0.0) {
                return Err(Error::NonPositiveTrajectory { t, value });
            }
        }
        Ok(traj)
    }

    pub fn kind(&self) -> RampKind {
        self.kind
    }

    pub fn l0(&self) -> f64 {
        self.l0
    }

    pub fn vbar(&self) -> f64 {
        self.vbar
    }

    pub fn t_ff(&self) -> f64 {
        self.t_ff
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn l_final(&self) -> f64 {
        self.eval(self.t_ff).0
    }

    fn check_time(&self, t: f64) -> Result<f64> {
        let slack = TIME_SLACK * self.t_ff;
        if !(t >= -slack && t <= self.t_ff + slack) {
            return Err(Error::TimeOutOfRange { t, t_ff: self.t_ff });
        }
        Ok(t.clamp(0.0, self.t_ff))
    }

    /// `(l, dl/dt, d2l/dt2)` at `t`, no range check.
    pub(crate) fn eval(&self, t: f64) -> (f64, f64, f64) {
        let (l0, vb, tf) = (self.l0, self.vbar, self.t_ff);
        match self.kind {
            RampKind::AdiabaticLinear => (l0 + self.epsilon * t, self.epsilon, 0.0),
            RampKind::PolynomialRamp => {
                let s = t / tf;
                (
                    l0 + vb * tf * (s * s / 2.0 - s * s * s / 3.0),
                    vb * (s - s * s),
                    vb * (1.0 - 2.0 * s) / tf,
                )
            }
            RampKind::TrigonometricRamp => {
                let w = 2.0 * PI / tf;
                let (sin, cos) = (w * t).sin_cos();
                (
                    l0 + vb * (t - sin / w),
                    vb * (1.0 - cos),
                    vb * w * sin,
                )
            }
        }
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        Ok(self.eval(self.check_time(t)?).0)
    }

    pub fn velocity(&self, t: f64) -> Result<f64> {
        Ok(self.eval(self.check_time(t)?).1)
    }

    pub fn acceleration(&self, t: f64) -> Result<f64> {
        Ok(self.eval(self.check_time(t)?).2)
    }

    /// Value, velocity and acceleration together.
    pub fn state(&self, t: f64) -> Result<(f64, f64, f64)> {
        Ok(self.eval(self.check_time(t)?))
    }

    /// Smallest value over the dense construction sample.
    pub fn min_value(&self) -> f64 {
        (0..=POSITIVITY_SAMPLES)
            .map(|i| self.eval(self.t_ff * i as f64 / POSITIVITY_SAMPLES as f64).0)
            .fold(f64::INFINITY, f64::min)
    }

    /// Same shape with the ramp rate rescaled by `factor`.
    pub fn with_rate_scaled(&self, factor: f64) -> Result<Self> {
        Self::build(
            self.kind,
            self.l0,
            self.vbar * factor,
            self.t_ff,
            self.epsilon * factor,
        )
    }
}

fn check_t_ff(t_ff: f64) -> Result<()> {
    if !(t_ff.is_finite() && t_ff > 0.0) {
        return Err(Error::InvalidParameter(format!("t_ff must be positive, got {t_ff}")));
    }
    Ok(())
}

/// Ramp amplitude `vbar` for which the trajectory ends at `l_final`.
pub fn vbar_for_target(kind: RampKind, l0: f64, l_final: f64, t_ff: f64) -> Result<f64> {
    check_t_ff(t_ff)?;
    if !(l_final.is_finite() && l_final > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "l_final must be positive, got {l_final}"
        )));
    }
    match kind {
        RampKind::PolynomialRamp => Ok(6.0 * (l_final - l0) / t_ff),
        RampKind::TrigonometricRamp => Ok((l_final - l0) / t_ff),
        RampKind::AdiabaticLinear => Err(Error::InvalidParameter(
            "the adiabatic linear trajectory is set by its growth rate, not vbar".into(),
        )),
    }
}

/// `Lambda(t) = int_0^t alpha(s) ds`. A negative sample of `alpha` anywhere
/// the quadrature looks is an error.
pub fn advanced_time<F>(alpha: F, t: f64, tol: Tolerance) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidParameter(format!("advanced time needs t >= 0, got {t}")));
    }
    let a0 = alpha(0.0);
    if a0 < 0.0 {
        return Err(Error::NegativeScaling { t: 0.0, value: a0 });
    }
    try_integrate(
        |s| {
            let a = alpha(s);
            if a < 0.0 {
                Err(Error::NegativeScaling { t: s, value: a })
            } else {
                Ok(a)
            }
        },
        0.0,
        t,
        tol,
    )
    .map(|e| e.value)
}

/// Magnification that maps a reference adiabatic trajectory
/// `l0 + epsilon * tau` onto a fast-forward ramp: `alpha(t) = dl/dt / epsilon`
/// and `v(t) = epsilon * alpha(t)`.
#[derive(Debug, Clone, Copy)]
pub struct AdvancedTime {
    ramp: ControlTrajectory,
    epsilon: f64,
    tol: Tolerance,
}

impl AdvancedTime {
    pub fn for_ramp(ramp: ControlTrajectory, epsilon: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon != 0.0) {
            return Err(Error::InvalidParameter(
                "reference growth rate must be finite and non-zero".into(),
            ));
        }
        Ok(Self {
            ramp,
            epsilon,
            tol: Tolerance {
                abs: 1e-14,
                rel: 1e-12,
            },
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn alpha(&self, t: f64) -> Result<f64> {
        Ok(self.ramp.velocity(t)? / self.epsilon)
    }

    pub fn speed(&self, t: f64) -> Result<f64> {
        self.ramp.velocity(t)
    }

    pub fn lambda(&self, t: f64) -> Result<f64> {
        self.ramp.check_time(t)?;
        advanced_time(|s| self.ramp.eval(s).1 / self.epsilon, t, self.tol)
    }

    /// The reference trajectory evaluated at the advanced time.
    pub fn control_at_advanced_time(&self, t: f64) -> Result<f64> {
        Ok(self.ramp.l0() + self.epsilon * self.lambda(t)?)
    }
}
