use crate::error::{Error, Result};

/// Physical constants used throughout. Every expression in the crate is
/// homogeneous in these, so the natural-unit default loses no generality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    pub hbar: f64,
    pub mass: f64,
    pub kb: f64,
}

impl UnitSystem {
    pub fn new(hbar: f64, mass: f64, kb: f64) -> Result<Self> {
        for (name, v) in [("hbar", hbar), ("mass", mass), ("kb", kb)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be finite and positive, got {v}"
                )));
            }
        }
        Ok(Self { hbar, mass, kb })
    }

    /// hbar = m = kB = 1.
    pub const fn natural() -> Self {
        Self {
            hbar: 1.0,
            mass: 1.0,
            kb: 1.0,
        }
    }

    /// hbar^2 / (2m), the kinetic prefactor.
    pub fn kinetic_scale(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.mass)
    }
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self::natural()
    }
}
