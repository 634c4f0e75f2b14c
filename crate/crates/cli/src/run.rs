//! Per-`T_FF` experiments and the CSV files they produce.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use ffqd_core::cost::{cost_ff_box_closed, cost_ff_ho_closed, cost_ff_trace, CostReport, ThermalEnsemble};
use ffqd_core::csv::sci;
use ffqd_core::fastforward::FastForwardState;
use ffqd_core::ie::{cost_ie, design_b, write_profile};
use ffqd_core::propagator::{
    fidelity, propagate, propagate_with_snapshots, tdse_residual, write_snapshots, Boundary,
    Potential, PropagationSpec, Snapshot,
};
use ffqd_core::{par, BoxModel, ControlTrajectory, Grid, HarmonicModel, SpectralModel, UnitSystem};

use crate::scenario::{Output, Ramp, Scenario, System};

pub fn units() -> UnitSystem {
    UnitSystem::natural()
}

pub fn trajectory(sc: &Scenario, t_ff: f64) -> Result<ControlTrajectory> {
    let (from, to) = sc.control_range()?;
    Ok(ControlTrajectory::connecting(sc.ramp.kind(), from, to, t_ff)?)
}

pub fn ensemble(sc: &Scenario) -> Result<ThermalEnsemble> {
    Ok(ThermalEnsemble::new(sc.beta, sc.n_particles, units())?)
}

/// Cost of one `T_FF` entry: the truncated thermal trace and the
/// closed-form report.
#[derive(Debug, Clone)]
pub struct CostEntry {
    pub t_ff: f64,
    pub trace: f64,
    pub report: CostReport,
}

pub fn cost_entry(sc: &Scenario, t_ff: f64) -> Result<CostEntry> {
    let traj = trajectory(sc, t_ff)?;
    let ens = ensemble(sc)?;
    let u = units();
    let (trace, report) = match sc.system {
        System::Harmonic => (
            cost_ff_trace(&HarmonicModel::new(u), &traj, &ens, sc.cutoff, sc.grid_points)?,
            cost_ff_ho_closed(&traj, &ens, sc.samples)?,
        ),
        System::Box => (
            cost_ff_trace(&BoxModel::new(u), &traj, &ens, sc.cutoff, sc.grid_points)?,
            cost_ff_box_closed(&traj, &ens, sc.samples)?,
        ),
    };
    Ok(CostEntry { t_ff, trace, report })
}

/// Fidelity of the propagated state against the fast-forward state at `T_FF`,
/// with and without the driving potential.
#[derive(Debug, Clone)]
pub struct PropagationEntry {
    pub t_ff: f64,
    pub level: usize,
    pub fidelity: f64,
    pub norm_drift: f64,
    pub fidelity_undriven: f64,
    pub driven: bool,
    pub snapshots: Vec<Snapshot>,
}

impl PropagationEntry {
    pub fn infidelity(&self) -> f64 {
        1.0 - self.fidelity
    }

    pub fn infidelity_undriven(&self) -> f64 {
        1.0 - self.fidelity_undriven
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ResidualEntry {
    pub t_ff: f64,
    pub t: f64,
    pub driven: f64,
    pub undriven: f64,
}

fn propagation_grid<M: SpectralModel>(model: &M, sc: &Scenario) -> Result<Grid> {
    let (from, to) = sc.control_range()?;
    Ok(match sc.system {
        System::Box => Grid::new(0.0, from, sc.grid_points)?,
        System::Harmonic => model.natural_grid(from.max(to), sc.grid_points, sc.level())?,
    })
}

fn boundary(sc: &Scenario, traj: ControlTrajectory) -> Boundary {
    match sc.system {
        System::Box => Boundary::DirichletMovingWall(traj),
        System::Harmonic => Boundary::DirichletFixed,
    }
}

fn propagation_with<M: SpectralModel + Clone>(
    model: M,
    sc: &Scenario,
    t_ff: f64,
    snapshots: bool,
) -> Result<PropagationEntry> {
    let traj = trajectory(sc, t_ff)?;
    let st = FastForwardState::new(model.clone(), sc.level(), traj)?;
    let grid = propagation_grid(&model, sc)?;
    let psi0 = st.on_grid(&grid, 0.0)?;
    let driven = |x: f64, t: f64| st.total_potential(x, t);
    let undriven = |x: f64, t: f64| Ok(model.potential(x, traj.value(t)?));
    fn spec<'a>(sc: &Scenario, grid: Grid, traj: ControlTrajectory, v: Potential<'a>) -> PropagationSpec<'a> {
        PropagationSpec {
            grid,
            dt: sc.dt,
            t_final: traj.t_ff(),
            potential: v,
            boundary: boundary(sc, traj),
            units: units(),
        }
    }
    let (out, shots) = if snapshots {
        propagate_with_snapshots(&psi0, &spec(sc, grid, traj, &driven), sc.snapshot_stride)
    } else {
        propagate(&psi0, &spec(sc, grid, traj, &driven)).map(|o| (o, Vec::new()))
    }
    .context("propagation with the driving potential")?;
    let target = st.on_grid(out.grid(), t_ff)?;
    let bare = propagate(&psi0, &spec(sc, grid, traj, &undriven)).context("propagation without the driving potential")?;
    Ok(PropagationEntry {
        t_ff,
        level: sc.level(),
        fidelity: fidelity(&out, &target)?,
        norm_drift: out.norm() / psi0.norm() - 1.0,
        fidelity_undriven: fidelity(&bare, &target)?,
        driven: sc.ramp != Ramp::Linear,
        snapshots: shots,
    })
}

pub fn propagation_entry(sc: &Scenario, t_ff: f64, snapshots: bool) -> Result<PropagationEntry> {
    match sc.system {
        System::Harmonic => propagation_with(HarmonicModel::new(units()), sc, t_ff, snapshots),
        System::Box => propagation_with(BoxModel::new(units()), sc, t_ff, snapshots),
    }
}

pub const RESIDUAL_FRACTION: f64 = 0.25;

fn residual_with<M: SpectralModel + Clone>(model: M, sc: &Scenario, t_ff: f64) -> Result<ResidualEntry> {
    let traj = trajectory(sc, t_ff)?;
    let st = FastForwardState::new(model.clone(), sc.level(), traj)?;
    // both ramps have zero acceleration at mid-ramp, where the drive vanishes
    let t = RESIDUAL_FRACTION * t_ff;
    let grid = match sc.system {
        System::Box => Grid::new(0.0, traj.value(t)?, sc.grid_points)?,
        System::Harmonic => propagation_grid(&model, sc)?,
    };
    let state = |g: &Grid, s: f64| st.sample(g, s);
    let driven = |x: f64, s: f64| st.total_potential(x, s);
    let undriven = |x: f64, s: f64| Ok(model.potential(x, traj.value(s)?));
    let u = units();
    Ok(ResidualEntry {
        t_ff,
        t,
        driven: tdse_residual(state, &driven, &grid, t, sc.dt, (0.0, t_ff), &u)?,
        undriven: tdse_residual(state, &undriven, &grid, t, sc.dt, (0.0, t_ff), &u)?,
    })
}

/// Schrödinger residual of the fast-forward state at `RESIDUAL_FRACTION * T_FF`.
pub fn residual_entry(sc: &Scenario, t_ff: f64) -> Result<ResidualEntry> {
    match sc.system {
        System::Harmonic => residual_with(HarmonicModel::new(units()), sc, t_ff),
        System::Box => residual_with(BoxModel::new(units()), sc, t_ff),
    }
}

#[derive(Debug, Clone)]
struct EntryResult {
    cost: Option<CostEntry>,
    ie: Option<f64>,
    propagation: Option<PropagationEntry>,
    residual: Option<ResidualEntry>,
    files: Vec<PathBuf>,
}

fn write_file(path: &Path, sc: &Scenario, body: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<PathBuf> {
    let mut buf = sc.provenance().into_bytes();
    body(&mut buf)?;
    fs::write(path, buf).with_context(|| format!("writing {}", path.display()))?;
    Ok(path.to_path_buf())
}

fn run_entry(sc: &Scenario, index: usize, t_ff: f64, dir: &Path) -> Result<EntryResult> {
    let wants = |o: Output| sc.outputs.contains(&o);
    let mut files = Vec::new();
    let cost = if wants(Output::CostCurve) || wants(Output::IeCompare) {
        let entry = cost_entry(sc, t_ff).context("cost")?;
        if wants(Output::CostCurve) {
            let path = dir.join(format!("cost_samples_{index:02}.csv"));
            files.push(write_file(&path, sc, |b| entry.report.write_csv(b))?);
        }
        Some(entry)
    } else {
        None
    };
    let ie = if wants(Output::IeCompare) {
        let sol = design_b(sc.omega0, sc.omega_final, t_ff)?;
        let path = dir.join(format!("ie_profile_{index:02}.csv"));
        files.push(write_file(&path, sc, |b| write_profile(b, &sol, sc.beta, sc.samples))?);
        Some(cost_ie(&sol, sc.beta)?)
    } else {
        None
    };
    let propagation = if wants(Output::Fidelity) || wants(Output::Snapshots) {
        let entry = propagation_entry(sc, t_ff, wants(Output::Snapshots))?;
        if wants(Output::Snapshots) {
            let path = dir.join(format!("snapshots_{index:02}.csv"));
            files.push(write_file(&path, sc, |b| write_snapshots(b, &entry.snapshots))?);
        }
        Some(entry)
    } else {
        None
    };
    let residual = if wants(Output::Residual) {
        Some(residual_entry(sc, t_ff).context("residual")?)
    } else {
        None
    };
    Ok(EntryResult {
        cost,
        ie,
        propagation,
        residual,
        files,
    })
}

/// Runs every `T_FF` entry, in parallel when enabled, and writes the CSV
/// tables into `dir`. Returns the files written, in a fixed order.
pub fn run(sc: &Scenario, dir: &Path) -> Result<Vec<PathBuf>> {
    sc.validate()?;
    if sc.t_ff.is_empty() {
        return Ok(Vec::new());
    }
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let indexed: Vec<(usize, f64)> = sc.t_ff.iter().copied().enumerate().collect();
    let results = par::map(&indexed, |&(i, t)| {
        run_entry(sc, i, t, dir).with_context(|| format!("t_ff = {t}"))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut files: Vec<PathBuf> = results.iter().flat_map(|r| r.files.clone()).collect();
    let wants = |o: Output| sc.outputs.contains(&o);
    if wants(Output::CostCurve) {
        files.push(write_file(&dir.join("cost_curve.csv"), sc, |b| {
            writeln!(
                b,
                "t_ff,vbar,cost_trace,cost_closed,closed_form,printed_closed_form,printed_ratio,drive_quadrature,drive_by_parts,drive_closed"
            )?;
            for c in results.iter().filter_map(|r| r.cost.as_ref()) {
                let r = &c.report;
                writeln!(
                    b,
                    "{},{},{},{},{},{},{},{},{},{}",
                    sci(c.t_ff),
                    sci(r.vbar),
                    sci(c.trace),
                    sci(r.c_ff),
                    sci(r.closed_form_value),
                    sci(r.printed_closed_form),
                    sci(r.printed_ratio()),
                    sci(r.drive.quadrature),
                    sci(r.drive.by_parts),
                    sci(r.drive.closed)
                )?;
            }
            Ok(())
        })?);
    }
    if wants(Output::IeCompare) {
        files.push(write_file(&dir.join("ie_compare.csv"), sc, |b| {
            writeln!(b, "t_ff,cost_mn,cost_ie,cost_mn_closed")?;
            for r in &results {
                let (Some(c), Some(ie)) = (&r.cost, r.ie) else { continue };
                writeln!(b, "{},{},{},{}", sci(c.t_ff), sci(c.trace), sci(ie), sci(c.report.c_ff))?;
            }
            Ok(())
        })?);
    }
    if wants(Output::Fidelity) {
        files.push(write_file(&dir.join("fidelity.csv"), sc, |b| {
            writeln!(b, "t_ff,level,fidelity,infidelity,norm_drift,fidelity_undriven,infidelity_undriven")?;
            for p in results.iter().filter_map(|r| r.propagation.as_ref()) {
                writeln!(
                    b,
                    "{},{},{},{},{},{},{}",
                    sci(p.t_ff),
                    p.level,
                    sci(p.fidelity),
                    sci(p.infidelity()),
                    sci(p.norm_drift),
                    sci(p.fidelity_undriven),
                    sci(p.infidelity_undriven())
                )?;
            }
            Ok(())
        })?);
    }
    if wants(Output::Residual) {
        files.push(write_file(&dir.join("residual.csv"), sc, |b| {
            writeln!(b, "t_ff,t,residual,residual_undriven")?;
            for r in results.iter().filter_map(|r| r.residual) {
                writeln!(b, "{},{},{},{}", sci(r.t_ff), sci(r.t), sci(r.driven), sci(r.undriven))?;
            }
            Ok(())
        })?);
    }
    Ok(files)
}

/// Scenarios pinned to the four published comparison figures.
pub fn preset(name: &str) -> Result<Scenario> {
    let (system, ramp) = match name {
        "fig1" => ("harmonic", "polynomial"),
        "fig2" => ("harmonic", "trigonometric"),
        "fig3" => ("box", "polynomial"),
        "fig4" => ("box", "trigonometric"),
        other => anyhow::bail!("unknown preset `{other}` (expected fig1, fig2, fig3 or fig4)"),
    };
    let outputs = if system == "harmonic" { "cost_curve, ie_compare" } else { "cost_curve" };
    Scenario::parse(&format!(
        "system = {system}\nramp = {ramp}\nl0 = 1\nl_final = 10\nomega0 = 1\nomega_final = 10\n\
         t_ff = 0.25, 0.5, 1, 2, 5, 10\nbeta = 1\nn_particles = 1\ngrid_points = 1024\noutputs = {outputs}\n"
    ))
}
