//! Numerical self-checks for a scenario, one row per `T_FF` and check.

use std::fmt::Write;

use ffqd_core::csv::sci;
use ffqd_core::par;

use crate::run::{propagation_entry, residual_entry};
use crate::scenario::{Ramp, Scenario, System};

pub const DRIFT_TOLERANCE: f64 = 1e-8;
pub const RESIDUAL_TOLERANCE: f64 = 1e-3;
/// Minimum ratio between undriven and driven errors.
pub const CONTROL_RATIO: f64 = 10.0;

pub fn fidelity_tolerance(system: System) -> f64 {
    match system {
        System::Harmonic => 1e-4,
        System::Box => 1e-3,
    }
}

#[derive(Debug, Clone)]
pub struct Check {
    pub t_ff: f64,
    pub name: &'static str,
    pub value: f64,
    pub bound: f64,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn at_most(t_ff: f64, name: &'static str, value: f64, bound: f64) -> Self {
        Check { t_ff, name, value, bound, passed: value.abs() <= bound, detail: String::new() }
    }

    fn at_least(t_ff: f64, name: &'static str, value: f64, bound: f64) -> Self {
        Check { t_ff, name, value, bound, passed: value >= bound, detail: String::new() }
    }

    fn failed(t_ff: f64, name: &'static str, err: &anyhow::Error) -> Self {
        Check { t_ff, name, value: f64::NAN, bound: f64::NAN, passed: false, detail: format!("{err:#}") }
    }

    fn skipped(t_ff: f64, name: &'static str, why: &str) -> Self {
        Check { t_ff, name, value: f64::NAN, bound: f64::NAN, passed: true, detail: why.to_string() }
    }
}

fn ratio(undriven: f64, driven: f64) -> f64 {
    undriven / driven.max(f64::MIN_POSITIVE)
}

fn checks_for(sc: &Scenario, t_ff: f64) -> Vec<Check> {
    let mut out = Vec::new();
    match propagation_entry(sc, t_ff, false) {
        Ok(p) => {
            out.push(Check::at_most(t_ff, "fidelity", p.infidelity(), fidelity_tolerance(sc.system)));
            out.push(Check::at_most(t_ff, "norm_drift", p.norm_drift, DRIFT_TOLERANCE));
            out.push(if sc.ramp != Ramp::Linear {
                Check::at_least(t_ff, "control_fidelity", ratio(p.infidelity_undriven(), p.infidelity()), CONTROL_RATIO)
            } else {
                Check::skipped(t_ff, "control_fidelity", "no driving potential on a linear ramp")
            });
        }
        Err(e) => out.push(Check::failed(t_ff, "propagation", &e)),
    }
    match residual_entry(sc, t_ff) {
        Ok(r) => {
            out.push(Check::at_most(t_ff, "residual", r.driven, RESIDUAL_TOLERANCE));
            out.push(if sc.ramp == Ramp::Linear {
                Check::skipped(t_ff, "control_residual", "no driving potential on a linear ramp")
            } else {
                Check::at_least(t_ff, "control_residual", ratio(r.undriven, r.driven), CONTROL_RATIO)
            });
        }
        Err(e) => out.push(Check::failed(t_ff, "residual", &e)),
    }
    out
}

pub fn verify(sc: &Scenario) -> anyhow::Result<Vec<Check>> {
    sc.validate()?;
    Ok(par::map(&sc.t_ff, |&t| checks_for(sc, t)).into_iter().flatten().collect())
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

pub fn render(checks: &[Check]) -> String {
    let mut s = format!("{:<22} {:<18} {:<22} {:<22} {}\n", "t_ff", "check", "value", "bound", "result");
    for c in checks {
        let verdict = if !c.passed {
            "FAIL"
        } else if c.value.is_nan() {
            "SKIP"
        } else {
            "PASS"
        };
        let _ = write!(s, "{:<22} {:<18} {:<22} {:<22} {verdict}", sci(c.t_ff), c.name, sci(c.value), sci(c.bound));
        if !c.detail.is_empty() {
            let _ = write!(s, "  {}", c.detail);
        }
        s.push('\n');
    }
    s
}
