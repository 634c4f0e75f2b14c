//! Inverse-engineering protocol for the oscillator: a quintic scaling
//! function `b(t)`, the frequency that makes it solve the Ermakov equation
//! `b'' + omega^2 b = omega0^2 / b^3`, and the thermal energy it costs.

use std::io::Write;

use crate::cost::cost_ff;
use crate::csv::sci;
use crate::error::{Error, Result};

/// Scaling function `b(s) = 1 + (bF - 1)(10 s^3 - 15 s^4 + 6 s^5)`, `s = t / T`,
/// with `bF = sqrt(omega0 / omegaF)`. It has `b' = b'' = 0` at both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErmakovSolution {
    pub omega0: f64,
    pub omega_f: f64,
    pub t_ff: f64,
    b_final: f64,
}

pub fn design_b(omega0: f64, omega_f: f64, t_ff: f64) -> Result<ErmakovSolution> {
    for (name, v) in [("omega0", omega0), ("omegaF", omega_f), ("T_FF", t_ff)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
        }
    }
    let sol = ErmakovSolution {
        omega0,
        omega_f,
        t_ff,
        b_final: (omega0 / omega_f).sqrt(),
    };
    for k in 0..=10_000 {
        let t = t_ff * k as f64 / 10_000.0;
        let b = sol.b(t);
        if !(b > 0.0) {
            return Err(Error::NonPositiveScaling { t, value: b });
        }
    }
    Ok(sol)
}

impl ErmakovSolution {
    pub fn b_final(&self) -> f64 {
        self.b_final
    }

    fn s(&self, t: f64) -> f64 {
        (t / self.t_ff).clamp(0.0, 1.0)
    }

    pub fn b(&self, t: f64) -> f64 {
        let s = self.s(t);
        1.0 + (self.b_final - 1.0) * s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
    }

    pub fn b_dot(&self, t: f64) -> f64 {
        let s = self.s(t);
        (self.b_final - 1.0) * 30.0 * s * s * (1.0 - s) * (1.0 - s) / self.t_ff
    }

    pub fn b_ddot(&self, t: f64) -> f64 {
        let s = self.s(t);
        (self.b_final - 1.0) * 60.0 * s * (1.0 - s) * (1.0 - 2.0 * s) / (self.t_ff * self.t_ff)
    }

    /// `omega0^2 / b^4 - b'' / b`. May turn negative on aggressive ramps.
    pub fn omega_sq(&self, t: f64) -> f64 {
        let b = self.b(t);
        self.omega0 * self.omega0 / b.powi(4) - self.b_ddot(t) / b
    }
}

/// `b'' + omega^2 b - omega0^2 / b^3` for given values.
pub fn ermakov_residual_of(b: f64, b_ddot: f64, omega_sq: f64, omega0: f64) -> f64 {
    b_ddot + omega_sq * b - omega0 * omega0 / b.powi(3)
}

pub fn ermakov_residual(sol: &ErmakovSolution, t: f64) -> f64 {
    ermakov_residual_of(sol.b(t), sol.b_ddot(t), sol.omega_sq(t), sol.omega0)
}

fn coth(x: f64) -> f64 {
    if x.is_infinite() {
        1.0
    } else {
        1.0 / x.tanh()
    }
}

/// `1/2 [b'^2 / 2 omega0 + omega^2 b^2 / 2 omega0 + omega0 / 2 b^2] coth(beta omega0 / 2)`,
/// natural units.
pub fn h_ie_expectation(sol: &ErmakovSolution, t: f64, beta: f64) -> f64 {
    let (b, bd) = (sol.b(t), sol.b_dot(t));
    let w0 = sol.omega0;
    0.5 * (bd * bd / (2.0 * w0) + sol.omega_sq(t) * b * b / (2.0 * w0) + w0 / (2.0 * b * b))
        * coth(beta * w0 / 2.0)
}

/// Time average of the expectation above, relative tolerance `1e-10`.
pub fn cost_ie(sol: &ErmakovSolution, beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
    }
    cost_ff(|t| Ok(h_ie_expectation(sol, t, beta)), sol.t_ff)
}

/// `t,b,b_dot,omega_sq,h_ie` rows at `samples` evenly spaced times.
pub fn write_profile<W: Write>(out: &mut W, sol: &ErmakovSolution, beta: f64, samples: usize) -> std::io::Result<()> {
    writeln!(out, "t,b,b_dot,omega_sq,h_ie")?;
    let k = samples.max(2) - 1;
    for i in 0..=k {
        let t = sol.t_ff * i as f64 / k as f64;
        writeln!(
            out,
            "{},{},{},{},{}",
            sci(t),
            sci(sol.b(t)),
            sci(sol.b_dot(t)),
            sci(sol.omega_sq(t)),
            sci(h_ie_expectation(sol, t, beta))
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn trivial_ramp() {
        let sol = design_b(2.0, 2.0, 1.0).unwrap();
        for k in 0..=10 {
            let t = k as f64 / 10.0;
            assert_eq!(sol.b(t), 1.0);
            assert_eq!(sol.omega_sq(t), 4.0);
            assert_eq!(ermakov_residual(&sol, t), 0.0);
        }
        let beta = 0.7;
        let want = 1.0 / (beta * 1.0f64).tanh();
        assert!((cost_ie(&sol, beta).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn boundary_values() {
        let sol = design_b(1.0, 10.0, 1.0).unwrap();
        assert!((sol.b(1.0) - 0.1f64.sqrt()).abs() < 1e-15);
        assert!((sol.omega_sq(0.0) - 1.0).abs() < 1e-10);
        assert!((sol.omega_sq(1.0) - 100.0).abs() < 1e-10);
        assert_eq!(sol.b_dot(0.0), 0.0);
        assert_eq!(sol.b_ddot(1.0), 0.0);
    }

    #[test]
    fn perturbed_scaling_breaks_the_equation() {
        let sol = design_b(1.5, 6.0, 2.0).unwrap();
        let d = 1e-3;
        let r = ermakov_residual_of(sol.b(0.0) + d, sol.b_ddot(0.0), sol.omega_sq(0.0), sol.omega0);
        let w2 = sol.omega0 * sol.omega0;
        assert!((r - 4.0 * w2 * d).abs() < 10.0 * w2 * d * d);
    }

    #[test]
    fn expectation_examples() {
        let sol = design_b(1.0, 10.0, 1.0).unwrap();
        let beta = 1.3;
        let coth = 1.0 / (beta / 2.0f64).tanh();
        assert!((h_ie_expectation(&sol, 0.0, beta) - 0.5 * coth).abs() < 1e-14);
        assert!((h_ie_expectation(&sol, 0.0, f64::INFINITY) - 0.5).abs() < 1e-15);
        assert!((h_ie_expectation(&sol, 1.0, beta) - 5.0 * coth).abs() < 1e-10);
    }

    #[test]
    fn cost_is_linear_in_the_thermal_factor() {
        let sol = design_b(1.0, 10.0, 1.0).unwrap();
        let a = cost_ie(&sol, 1.0).unwrap();
        let b = cost_ie(&sol, f64::INFINITY).unwrap();
        assert!((a / b - 1.0 / 0.5f64.tanh()).abs() < 1e-9);
    }

    #[test]
    fn cost_non_increasing_in_duration() {
        let mut last = f64::INFINITY;
        let mut t = 0.1;
        while t <= 10.0 + 1e-9 {
            let c = cost_ie(&design_b(1.0, 10.0, t).unwrap(), 1.0).unwrap();
            assert!(c <= last * (1.0 + 1e-12), "T = {t}");
            last = c;
            t *= 1.2;
        }
    }

    #[test]
    fn bad_parameters() {
        assert!(design_b(0.0, 1.0, 1.0).is_err());
        assert!(design_b(1.0, -1.0, 1.0).is_err());
        assert!(design_b(1.0, 1.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn residual_vanishes_and_energy_is_positive(
            w0 in 0.2f64..5.0, wf in 0.2f64..20.0, t_ff in 0.1f64..10.0, beta in 0.1f64..10.0
        ) {
            let sol = design_b(w0, wf, t_ff).unwrap();
            for k in 0..=200 {
                let t = t_ff * k as f64 / 200.0;
                let scale = w0 * w0 + sol.omega_sq(t).abs();
                prop_assert!(ermakov_residual(&sol, t).abs() < 1e-12 * scale.max(1.0));
                // every bracket term is non-negative while the trap is confining
                if sol.omega_sq(t) >= 0.0 {
                    prop_assert!(h_ie_expectation(&sol, t, beta) > 0.0);
                }
            }
        }
    }
}
