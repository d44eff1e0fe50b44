//! Manufactured-solution accuracy study on the degenerate linear model.

use std::sync::Arc;
use std::time::Instant;

use super::{error_norms, interior_values, scheme_label, BenchmarkReport, MeshErrors, Simulation, TimeScheme};
use crate::error::Result;
use crate::grid::{AnalyticField, BoundaryCondition, BoundarySpec, GhostAveraging, RegionId, SpeciesField, StructuredGrid};
use crate::materials::MaterialModel;
use crate::operator::{ExtraSource, SpatialOperator};
use crate::reconstruction::Scheme;
use crate::time_integration::SolutionState;

pub fn mms_exact(x: f64, y: f64, t: f64) -> [f64; 3] {
    let e = t.exp();
    let (x2, y2) = (x * x, y * y);
    [
        e * (x2 + 1.0) * (y2 + 1.0),
        e * (2.0 * x2 + 1.0) * (y2 + 1.0),
        e * (2.0 * x2 + 1.0) * (2.0 * y2 + 1.0),
    ]
}

pub fn mms_source(x: f64, y: f64, t: f64) -> [f64; 3] {
    let e = t.exp();
    source_from_moments(x * x, y * y, x * x * y * y).map(|v| e * v)
}

/// Spatial part of the source from the moments of `x^2`, `y^2` and `x^2 y^2`.
fn source_from_moments(x2: f64, y2: f64, x2y2: f64) -> [f64; 3] {
    [
        -(3.0 * x2y2 + 3.0 * x2 + 2.0 * y2 + 3.0),
        3.0 * x2y2 - x2 - 3.0 * y2 - 5.0,
        7.0 * x2y2 - 5.0 * x2 - 5.0 * y2 - 7.0,
    ]
}

/// Mean of `s^2` over `[a, b]`.
fn mean_square(a: f64, b: f64) -> f64 {
    (a * a + a * b + b * b) / 3.0
}

/// The exact solution as a boundary and initial-data provider.
#[derive(Debug, Clone, Copy, Default)]
pub struct MmsField;

impl AnalyticField for MmsField {
    fn temperature(&self, x: [f64; 3], t: f64) -> [f64; 3] {
        mms_exact(x[0], x[1], t)
    }

    fn cell_average(&self, lo: [f64; 3], hi: [f64; 3], t: f64) -> [f64; 3] {
        let e = t.exp();
        let (ax, ay) = (mean_square(lo[0], hi[0]), mean_square(lo[1], hi[1]));
        [
            e * (ax + 1.0) * (ay + 1.0),
            e * (2.0 * ax + 1.0) * (ay + 1.0),
            e * (2.0 * ax + 1.0) * (2.0 * ay + 1.0),
        ]
    }
}

/// Cell averages of the compensating source, `e^t` times a fixed spatial part.
pub struct MmsSource {
    spatial: Vec<[f64; 3]>,
}

impl MmsSource {
    pub fn new(grid: &StructuredGrid) -> Self {
        let mut spatial = vec![[0.0; 3]; grid.padded_len()];
        for c in grid.interior_cells() {
            let (lo, hi) = grid.cell_bounds(c);
            let (ax, ay) = (mean_square(lo[0], hi[0]), mean_square(lo[1], hi[1]));
            spatial[grid.index(c)] = source_from_moments(ax, ay, ax * ay);
        }
        MmsSource { spatial }
    }
}

impl ExtraSource for MmsSource {
    fn add_to(&self, grid: &StructuredGrid, t: f64, rhs: &mut SpeciesField) {
        let e = t.exp();
        let out = rhs.as_mut_slice();
        for c in grid.interior_cells() {
            let i = grid.index(c);
            for s in 0..3 {
                out[i][s] += e * self.spatial[i][s];
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyConfig {
    /// Cells per unit length of each mesh level.
    pub meshes: Vec<usize>,
    pub t_end: f64,
    /// `dt = cfl * h^2`, rounded so an integer number of steps reaches `t_end`.
    pub cfl: f64,
    pub scheme: Scheme,
}

impl Default for AccuracyConfig {
    fn default() -> Self {
        AccuracyConfig {
            meshes: vec![5, 10, 20, 40],
            t_end: 1.0,
            cfl: 0.1,
            scheme: Scheme::Geno,
        }
    }
}

/// Grid `[0,1]^2 x [0,3h]`, analytic ghosts and source, initial exact averages.
pub fn accuracy_setup(cells: usize, scheme: Scheme) -> Result<(SpatialOperator, SolutionState)> {
    let h = 1.0 / cells as f64;
    let grid = StructuredGrid::new([0.0; 3], [1.0, 1.0, 3.0 * h], [cells, cells, 3], |_| RegionId(0))?;
    let field = Arc::new(MmsField);
    let mut boundary = BoundarySpec::uniform(BoundaryCondition::Analytic(field.clone()));
    boundary.ghost_averaging = GhostAveraging::CellAverage;
    let model = MaterialModel::linear_mms();
    let temp = SpeciesField::from_fn(&grid, |c| {
        let (lo, hi) = grid.cell_bounds(c);
        field.cell_average(lo, hi, 0.0)
    });
    let state = SolutionState::from_temperature(&model, &grid, temp, 0.0);
    let source = Arc::new(MmsSource::new(&grid));
    let op = SpatialOperator::new(grid, model, boundary, scheme).with_extra_source(source);
    Ok((op, state))
}

pub fn run_accuracy(cfg: &AccuracyConfig) -> Result<BenchmarkReport> {
    let start = Instant::now();
    let mut report = BenchmarkReport {
        problem: "accuracy".into(),
        scheme: scheme_label(cfg.scheme),
        time_scheme: "rk2".into(),
        ..Default::default()
    };
    for &cells in &cfg.meshes {
        let h = 1.0 / cells as f64;
        let (op, state) = accuracy_setup(cells, cfg.scheme)?;
        let steps = (cfg.t_end / (cfg.cfl * h * h)).round().max(1.0);
        let dt = cfg.t_end / steps;
        let mut sim = Simulation::new(op, state, TimeScheme::Rk2, dt, format!("mesh{cells}"));
        sim.advance_to(cfg.t_end)?;
        let grid = &sim.op.grid;
        let numerical = interior_values(&sim.state.temperature, grid);
        let exact_avg: Vec<[f64; 3]> = grid
            .interior_cells()
            .map(|c| {
                let (lo, hi) = grid.cell_bounds(c);
                MmsField.cell_average(lo, hi, cfg.t_end)
            })
            .collect();
        let exact_pt: Vec<[f64; 3]> = grid
            .interior_cells()
            .map(|c| {
                let x = grid.cell_center(c);
                mms_exact(x[0], x[1], cfg.t_end)
            })
            .collect();
        let (l1, linf) = error_norms(&numerical, &exact_avg)?;
        let (l1_point, linf_point) = error_norms(&numerical, &exact_pt)?;
        log::info!("accuracy h = 1/{cells}: L1 {l1:?} Linf {linf:?}");
        report.mesh_errors.push(MeshErrors {
            h,
            cells: grid.n_cells(),
            l1,
            linf,
            l1_point,
            linf_point,
        });
        report.final_grid = Some(grid.clone());
        report.final_temperature = Some(sim.state.temperature.clone());
        report.runs.push(sim.log);
    }
    report.wall_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}
