//! Planar two-material problem driven by a hot radiation wall.

use std::time::Instant;

use super::{scheme_label, BenchmarkReport, BoundsRecord, ProbeLine, Simulation, TimeScheme};
use crate::error::{Error, Result};
use crate::grid::{BoundaryCondition, BoundarySpec, Species, SpeciesField, StructuredGrid};
use crate::materials::MaterialModel;
use crate::operator::SpatialOperator;
use crate::reconstruction::Scheme;
use crate::time_integration::SolutionState;

/// Explicit stability limit at spacing 3.
pub const MODEL2D_EXPLICIT_DT: f64 = 3e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct Model2dConfig {
    pub spacing: f64,
    pub scheme: Scheme,
    pub time: TimeScheme,
    pub dt: f64,
    pub t_end: f64,
    /// Times at which bounds and probe lines are recorded (plus `t_end`).
    pub snapshot_times: Vec<f64>,
    pub probes: Vec<ProbeLine>,
    pub initial: f64,
    pub wall_temperature: f64,
}

impl Default for Model2dConfig {
    fn default() -> Self {
        Model2dConfig {
            spacing: 3.0,
            scheme: Scheme::Geno,
            time: TimeScheme::Rk2,
            dt: MODEL2D_EXPLICIT_DT,
            t_end: 5.0,
            snapshot_times: vec![0.5],
            probes: default_probes(3.0),
            initial: 3e-4,
            wall_temperature: 100.0,
        }
    }
}

/// First cell column along y and the row through the material interface along x.
pub fn default_probes(spacing: f64) -> Vec<ProbeLine> {
    let z = 1.5 * spacing;
    vec![
        ProbeLine::new("x1.5", 1, [0.5 * spacing, 0.0, z]),
        ProbeLine::new("y250", 0, [0.0, 250.0, z]),
    ]
}

pub fn model2d_setup(spacing: f64, scheme: Scheme, initial: f64, wall: f64) -> Result<(SpatialOperator, SolutionState)> {
    let n = 300.0 / spacing;
    if (n - n.round()).abs() > 1e-9 {
        return Err(Error::config(format!("grid.spacing {spacing} does not divide 300")));
    }
    let model = MaterialModel::model2d();
    let grid = StructuredGrid::new(
        [0.0; 3],
        [300.0, 300.0, 3.0 * spacing],
        [n.round() as usize, n.round() as usize, 3],
        |p| model.region_of(p),
    )?;
    let boundary = BoundarySpec::insulated().with(0, 0, Species::Radiation, BoundaryCondition::Dirichlet(wall));
    let temp = SpeciesField::uniform(&grid, [initial; 3]);
    let state = SolutionState::from_temperature(&model, &grid, temp, 0.0);
    Ok((SpatialOperator::new(grid, model, boundary, scheme), state))
}

pub fn run_model2d(cfg: &Model2dConfig) -> Result<BenchmarkReport> {
    let start = Instant::now();
    let (op, state) = model2d_setup(cfg.spacing, cfg.scheme, cfg.initial, cfg.wall_temperature)?;
    let label = format!("{}-{}", cfg.scheme.name(), cfg.time.name());
    let mut sim = Simulation::new(op, state, cfg.time, cfg.dt, label);
    let mut report = BenchmarkReport {
        problem: "model2d".into(),
        scheme: scheme_label(cfg.scheme),
        time_scheme: cfg.time.name().into(),
        ..Default::default()
    };
    let mut running = BoundsRecord::from_state("running", &sim.state, &sim.op.grid);
    let mut times: Vec<f64> = cfg.snapshot_times.iter().copied().filter(|&t| t > 0.0 && t < cfg.t_end).collect();
    times.push(cfg.t_end);
    times.sort_by(f64::total_cmp);
    times.dedup();
    for (i, &t) in times.iter().enumerate() {
        sim.advance_to_with(t, |state, grid| {
            running.merge(&BoundsRecord::from_state("", state, grid));
        })?;
        report.bounds.push(BoundsRecord::from_state(format!("t{i}"), &sim.state, &sim.op.grid));
        for p in &cfg.probes {
            let mut series = p.sample(&sim.state, &sim.op.grid)?;
            series.name = format!("{}_t{i}", p.name);
            report.probes.push(series);
        }
    }
    running.time = sim.state.time;
    report.bounds.push(running);
    report.final_grid = Some(sim.op.grid.clone());
    report.final_temperature = Some(sim.state.temperature.clone());
    report.runs.push(sim.log);
    report.wall_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}
