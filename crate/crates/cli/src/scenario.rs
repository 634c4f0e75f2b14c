//! Scenario files: `key = value` lines, `#` comments, overridable from the
//! command line. A scenario prints itself back in the same syntax, which is
//! what the CSV provenance headers carry.

use std::fmt;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use ffqd_core::{HarmonicModel, RampKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum System {
    Harmonic,
    Box,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ramp {
    Polynomial,
    Trigonometric,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Output {
    CostCurve,
    Fidelity,
    Residual,
    IeCompare,
    Snapshots,
}

macro_rules! names {
    ($ty:ty { $($variant:path => $name:literal),+ $(,)? }) => {
        impl $ty {
            pub fn name(&self) -> &'static str {
                match self { $($variant => $name),+ }
            }
        }

        impl FromStr for $ty {
            type Err = anyhow::Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok($variant),)+
                    other => Err(anyhow!(
                        "unknown {} `{other}` (expected one of: {})",
                        stringify!($ty).to_lowercase(),
                        [$($name),+].join(", ")
                    )),
                }
            }
        }
    };
}

names!(System { System::Harmonic => "harmonic", System::Box => "box" });
names!(Ramp {
    Ramp::Polynomial => "polynomial",
    Ramp::Trigonometric => "trigonometric",
    Ramp::Linear => "linear",
});
names!(Output {
    Output::CostCurve => "cost_curve",
    Output::Fidelity => "fidelity",
    Output::Residual => "residual",
    Output::IeCompare => "ie_compare",
    Output::Snapshots => "snapshots",
});

impl Ramp {
    pub fn kind(&self) -> RampKind {
        match self {
            Ramp::Polynomial => RampKind::PolynomialRamp,
            Ramp::Trigonometric => RampKind::TrigonometricRamp,
            Ramp::Linear => RampKind::AdiabaticLinear,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub system: System,
    pub ramp: Ramp,
    pub l0: f64,
    pub l_final: f64,
    pub omega0: f64,
    pub omega_final: f64,
    pub t_ff: Vec<f64>,
    /// `inf` selects zero temperature.
    pub beta: f64,
    pub n_particles: f64,
    pub grid_points: usize,
    pub dt: f64,
    /// Level followed by fidelity, residual and snapshot outputs; ground
    /// state when absent.
    pub level: Option<usize>,
    /// Level cutoff of thermal traces; automatic when absent.
    pub cutoff: Option<usize>,
    /// Time samples per cost and IE profile file.
    pub samples: usize,
    pub snapshot_stride: usize,
    pub outputs: Vec<Output>,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            system: System::Harmonic,
            ramp: Ramp::Polynomial,
            l0: 1.0,
            l_final: 10.0,
            omega0: 1.0,
            omega_final: 10.0,
            t_ff: vec![1.0],
            beta: 1.0,
            n_particles: 1.0,
            grid_points: 1024,
            dt: 1e-4,
            level: None,
            cutoff: None,
            samples: 33,
            snapshot_stride: 1000,
            outputs: vec![Output::CostCurve],
        }
    }
}

fn number(key: &str, value: &str) -> Result<f64> {
    let v = match value {
        "inf" | "infinity" => f64::INFINITY,
        _ => value
            .parse::<f64>()
            .with_context(|| format!("`{key}` expects a number, got `{value}`"))?,
    };
    Ok(v)
}

fn count(key: &str, value: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .with_context(|| format!("`{key}` expects a non-negative integer, got `{value}`"))
}

fn optional_count(key: &str, value: &str) -> Result<Option<usize>> {
    match value {
        "" | "auto" | "ground" => Ok(None),
        _ => count(key, value).map(Some),
    }
}

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

impl Scenario {
    /// Parses scenario text on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut sc = Self::default();
        sc.apply_text(text)?;
        sc.validate()?;
        Ok(sc)
    }

    fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            self.set_line(line).with_context(|| format!("line {}: `{}`", i + 1, raw.trim()))?;
        }
        Ok(())
    }

    /// Applies `key=value` overrides in order and revalidates.
    pub fn with_overrides<S: AsRef<str>>(mut self, overrides: &[S]) -> Result<Self> {
        for o in overrides {
            self.set_line(o.as_ref()).with_context(|| format!("override `{}`", o.as_ref()))?;
        }
        self.validate()?;
        Ok(self)
    }

    fn set_line(&mut self, line: &str) -> Result<()> {
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("expected `key = value`"))?;
        self.set(key.trim(), value.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "system" => self.system = value.parse()?,
            "ramp" => self.ramp = value.parse()?,
            "l0" => self.l0 = number(key, value)?,
            "l_final" => self.l_final = number(key, value)?,
            "omega0" => self.omega0 = number(key, value)?,
            "omega_final" => self.omega_final = number(key, value)?,
            "t_ff" => {
                self.t_ff = list(value).map(|v| number(key, v)).collect::<Result<_>>()?;
            }
            "beta" => self.beta = number(key, value)?,
            "n_particles" => self.n_particles = number(key, value)?,
            "grid_points" => self.grid_points = count(key, value)?,
            "dt" => self.dt = number(key, value)?,
            "level" => self.level = optional_count(key, value)?,
            "cutoff" => self.cutoff = optional_count(key, value)?,
            "samples" => self.samples = count(key, value)?,
            "snapshot_stride" => self.snapshot_stride = count(key, value)?,
            "outputs" => {
                let mut outs = list(value).map(str::parse).collect::<Result<Vec<Output>>>()?;
                outs.sort();
                outs.dedup();
                self.outputs = outs;
            }
            _ => bail!("unknown key `{key}`"),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("l0", self.l0),
            ("l_final", self.l_final),
            ("omega0", self.omega0),
            ("omega_final", self.omega_final),
            ("dt", self.dt),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                bail!("`{name}` must be positive and finite, got {v}");
            }
        }
        if self.beta.is_nan() || self.beta <= 0.0 {
            bail!("`beta` must be positive, got {}", self.beta);
        }
        if !(self.n_particles.is_finite() && self.n_particles >= 0.0) {
            bail!("`n_particles` must be non-negative, got {}", self.n_particles);
        }
        if self.beta.is_infinite() && self.n_particles.fract() != 0.0 {
            bail!("zero temperature (`beta = inf`) needs an integer `n_particles`");
        }
        if self.grid_points < 16 {
            bail!("`grid_points` must be at least 16, got {}", self.grid_points);
        }
        if self.samples < 2 {
            bail!("`samples` must be at least 2");
        }
        if self.snapshot_stride == 0 {
            bail!("`snapshot_stride` must be at least 1");
        }
        if let Some(t) = self.t_ff.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            bail!("every `t_ff` entry must be positive, got {t}");
        }
        if self.outputs.contains(&Output::IeCompare) && self.system != System::Harmonic {
            bail!("`ie_compare` needs `system = harmonic`");
        }
        if self.ramp == Ramp::Linear
            && (self.outputs.contains(&Output::CostCurve) || self.outputs.contains(&Output::IeCompare))
        {
            bail!("cost outputs need a ramp that starts and stops at rest (polynomial or trigonometric)");
        }
        if let Some(level) = self.level {
            if self.system == System::Box && level == 0 {
                bail!("box levels start at 1");
            }
        }
        Ok(())
    }

    /// Level followed by the propagation outputs.
    pub fn level(&self) -> usize {
        self.level.unwrap_or(match self.system {
            System::Harmonic => 0,
            System::Box => 1,
        })
    }

    /// Initial and final control values: wall position for the box,
    /// `R = 1/sqrt(omega)` for the oscillator.
    pub fn control_range(&self) -> Result<(f64, f64)> {
        Ok(match self.system {
            System::Box => (self.l0, self.l_final),
            System::Harmonic => (
                HarmonicModel::control_for_omega(self.omega0)?,
                HarmonicModel::control_for_omega(self.omega_final)?,
            ),
        })
    }

    /// `# `-prefixed provenance block.
    pub fn provenance(&self) -> String {
        let mut s = String::from("# ffqd scenario\n");
        for line in self.to_string().lines() {
            s.push_str("# ");
            s.push_str(line);
            s.push('\n');
        }
        s
    }

    /// Recovers the scenario from the provenance block of an emitted CSV.
    pub fn from_provenance(csv: &str) -> Result<Self> {
        let body: String = csv
            .lines()
            .take_while(|l| l.starts_with('#'))
            .skip(1)
            .map(|l| format!("{}\n", l.trim_start_matches('#').trim()))
            .collect();
        Self::parse(&body)
    }
}

fn join<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(", ")
}

fn optional(v: Option<usize>, absent: &str) -> String {
    v.map_or_else(|| absent.to_string(), |v| v.to_string())
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // `{}` on f64 is the shortest text that parses back to the same value
        writeln!(f, "system = {}", self.system.name())?;
        writeln!(f, "ramp = {}", self.ramp.name())?;
        writeln!(f, "l0 = {}", self.l0)?;
        writeln!(f, "l_final = {}", self.l_final)?;
        writeln!(f, "omega0 = {}", self.omega0)?;
        writeln!(f, "omega_final = {}", self.omega_final)?;
        writeln!(f, "t_ff = {}", join(&self.t_ff, |t| t.to_string()))?;
        writeln!(f, "beta = {}", self.beta)?;
        writeln!(f, "n_particles = {}", self.n_particles)?;
        writeln!(f, "grid_points = {}", self.grid_points)?;
        writeln!(f, "dt = {}", self.dt)?;
        writeln!(f, "level = {}", optional(self.level, "ground"))?;
        writeln!(f, "cutoff = {}", optional(self.cutoff, "auto"))?;
        writeln!(f, "samples = {}", self.samples)?;
        writeln!(f, "snapshot_stride = {}", self.snapshot_stride)?;
        writeln!(f, "outputs = {}", join(&self.outputs, |o| o.name().to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_lists_and_overrides() {
        let sc = Scenario::parse(
            "# figure run\nsystem = box\nramp = trigonometric  # inline\nt_ff = 0.5, 1,2\nbeta = inf\noutputs = fidelity, cost_curve\n",
        )
        .unwrap();
        assert_eq!(sc.system, System::Box);
        assert_eq!(sc.t_ff, vec![0.5, 1.0, 2.0]);
        assert!(sc.beta.is_infinite());
        assert_eq!(sc.outputs, vec![Output::CostCurve, Output::Fidelity]);
        let sc = sc.with_overrides(&["dt=1e-5", "t_ff="]).unwrap();
        assert_eq!(sc.dt, 1e-5);
        assert!(sc.t_ff.is_empty());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Scenario::parse("bogus = 1").is_err());
        assert!(Scenario::parse("dt = -1").is_err());
        assert!(Scenario::parse("system = box\noutputs = ie_compare").is_err());
        assert!(Scenario::parse("ramp = linear").is_err());
        assert!(Scenario::parse("system = box\nlevel = 0\noutputs = fidelity").is_err());
        assert!(Scenario::parse("no equals sign").is_err());
    }

    #[test]
    fn provenance_round_trips() {
        let sc = Scenario::parse("system = box\nt_ff = 0.1, 0.3\ndt = 3e-5\ncutoff = 40\nbeta = inf")
            .unwrap();
        let csv = format!("{}t_ff,cost\n1,2\n", sc.provenance());
        assert_eq!(Scenario::from_provenance(&csv).unwrap(), sc);
    }
}
