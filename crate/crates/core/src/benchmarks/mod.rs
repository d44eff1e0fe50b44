//! Benchmark problems, the time-marching driver and error measurement.

pub mod icf;
pub mod mms;
pub mod model2d;

pub use icf::{run_icf, IcfConfig};
pub use mms::{mms_exact, mms_source, run_accuracy, AccuracyConfig, MmsField, MmsSource};
pub use model2d::{run_model2d, Model2dConfig};

use std::time::Instant;

use crate::error::{Error, Result};
use crate::grid::{StructuredGrid, TemperatureState};
use crate::operator::SpatialOperator;
use crate::reconstruction::Scheme;
use crate::time_integration::{step_implicit, step_rk2, DualTimeConfig, SolutionState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeScheme {
    Rk2,
    Implicit(DualTimeConfig),
}

impl TimeScheme {
    pub fn name(&self) -> &'static str {
        match self {
            TimeScheme::Rk2 => "rk2",
            TimeScheme::Implicit(_) => "implicit",
        }
    }
}

/// One line of the run log.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub time: f64,
    pub inner_iters: usize,
    pub residual: [f64; 3],
    pub drop: f64,
    pub converged: bool,
    pub wall: f64,
}

/// Steps of one solver run within a benchmark.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunLog {
    pub label: String,
    pub steps: Vec<StepRecord>,
}

impl RunLog {
    pub fn all_converged(&self) -> bool {
        self.steps.iter().all(|s| s.converged)
    }
}

/// Operator, state and time scheme advanced together.
pub struct Simulation {
    pub op: SpatialOperator,
    pub state: SolutionState,
    pub scheme: TimeScheme,
    pub dt: f64,
    pub log: RunLog,
    start: Instant,
}

impl Simulation {
    pub fn new(op: SpatialOperator, state: SolutionState, scheme: TimeScheme, dt: f64, label: impl Into<String>) -> Self {
        Simulation {
            op,
            state,
            scheme,
            dt,
            log: RunLog {
                label: label.into(),
                steps: Vec::new(),
            },
            start: Instant::now(),
        }
    }

    fn step(&mut self, dt: f64) -> Result<()> {
        let (inner, residual, drop, converged) = match self.scheme {
            TimeScheme::Rk2 => {
                step_rk2(&mut self.op, &mut self.state, dt)?;
                (0, [0.0; 3], 0.0, true)
            }
            TimeScheme::Implicit(cfg) => {
                let cfg = DualTimeConfig { dt, ..cfg };
                let stats = step_implicit(&mut self.op, &mut self.state, &cfg)?;
                (stats.inner_iters, stats.final_residual(), stats.drop_ratio(), stats.converged)
            }
        };
        self.log.steps.push(StepRecord {
            step: self.log.steps.len() + 1,
            time: self.state.time,
            inner_iters: inner,
            residual,
            drop,
            converged,
            wall: self.start.elapsed().as_secs_f64(),
        });
        Ok(())
    }

    /// Advance to `t_end` with equal steps no larger than `dt`. Step times are
    /// recomputed from the start time to avoid accumulated drift.
    pub fn advance_to(&mut self, t_end: f64) -> Result<()> {
        self.advance_to_with(t_end, |_, _| {})
    }

    /// As [`Simulation::advance_to`], calling `observe` after every step.
    pub fn advance_to_with<F>(&mut self, t_end: f64, mut observe: F) -> Result<()>
    where
        F: FnMut(&SolutionState, &StructuredGrid),
    {
        let t0 = self.state.time;
        let span = t_end - t0;
        if span <= 0.0 {
            return Ok(());
        }
        let n = ((span / self.dt) - 1e-9).ceil().max(1.0) as usize;
        let dt = span / n as f64;
        for k in 1..=n {
            self.step(dt)?;
            self.state.time = if k == n { t_end } else { t0 + k as f64 * dt };
            if let Some(last) = self.log.steps.last_mut() {
                last.time = self.state.time;
            }
            observe(&self.state, &self.op.grid);
        }
        Ok(())
    }
}

/// Errors of one mesh level against exact cell averages and point values.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshErrors {
    pub h: f64,
    pub cells: [usize; 3],
    pub l1: [f64; 3],
    pub linf: [f64; 3],
    pub l1_point: [f64; 3],
    pub linf_point: [f64; 3],
}

/// Plain cell-mean L1 and max-norm errors per species over the interior.
pub fn error_norms(numerical: &[[f64; 3]], exact: &[[f64; 3]]) -> Result<([f64; 3], [f64; 3])> {
    if numerical.len() != exact.len() {
        return Err(Error::config(format!(
            "grid mismatch: {} vs {} cells",
            numerical.len(),
            exact.len()
        )));
    }
    let mut l1 = [0.0; 3];
    let mut linf = [0.0f64; 3];
    for (a, b) in numerical.iter().zip(exact) {
        for s in 0..3 {
            let e = (a[s] - b[s]).abs();
            l1[s] += e;
            linf[s] = linf[s].max(e);
        }
    }
    let n = numerical.len().max(1) as f64;
    Ok((l1.map(|v| v / n), linf))
}

/// Observed order between meshes refined by a factor of two.
pub fn convergence_order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

/// Interior values in lexicographic order.
pub fn interior_values(field: &TemperatureState, grid: &StructuredGrid) -> Vec<[f64; 3]> {
    grid.interior_cells().map(|c| field.get(grid, c)).collect()
}

/// Min and max over interior cells at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsRecord {
    pub label: String,
    pub time: f64,
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl BoundsRecord {
    pub fn from_state(label: impl Into<String>, state: &SolutionState, grid: &StructuredGrid) -> Self {
        let (min, max) = state.temperature.bounds(grid);
        BoundsRecord {
            label: label.into(),
            time: state.time,
            min,
            max,
        }
    }

    /// Widen to include another record.
    pub fn merge(&mut self, other: &BoundsRecord) {
        for s in 0..3 {
            self.min[s] = self.min[s].min(other.min[s]);
            self.max[s] = self.max[s].max(other.max[s]);
        }
    }
}

/// A line of cells parallel to `axis` through `point`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeLine {
    pub name: String,
    pub axis: usize,
    pub point: [f64; 3],
}

impl ProbeLine {
    pub fn new(name: impl Into<String>, axis: usize, point: [f64; 3]) -> Self {
        ProbeLine {
            name: name.into(),
            axis,
            point,
        }
    }

    /// Cells along the line; the cross-line position picks the containing cell.
    pub fn cells(&self, grid: &StructuredGrid) -> Result<Vec<[isize; 3]>> {
        if self.axis > 2 {
            return Err(Error::config(format!("probe {}: axis must be 0, 1 or 2", self.name)));
        }
        let mut p = self.point;
        p[self.axis] = 0.5 * (grid.lo()[self.axis] + grid.hi()[self.axis]);
        let base = grid
            .locate(p)
            .ok_or_else(|| Error::config(format!("probe {}: line misses the domain", self.name)))?;
        Ok((0..grid.n_cells()[self.axis] as isize)
            .map(|i| {
                let mut c = base;
                c[self.axis] = i;
                c
            })
            .collect())
    }

    pub fn sample(&self, state: &SolutionState, grid: &StructuredGrid) -> Result<ProbeSeries> {
        let cells = self.cells(grid)?;
        Ok(ProbeSeries {
            name: self.name.clone(),
            time: state.time,
            axis: self.axis,
            coords: cells.iter().map(|&c| grid.cell_center(c)[self.axis]).collect(),
            values: cells.iter().map(|&c| state.temperature.get(grid, c)).collect(),
        })
    }
}

/// Temperatures sampled along a probe line.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSeries {
    pub name: String,
    pub time: f64,
    pub axis: usize,
    pub coords: Vec<f64>,
    pub values: Vec<[f64; 3]>,
}

impl ProbeSeries {
    /// `sum |a - b| / sum |b|` for one species.
    pub fn relative_l1(&self, reference: &ProbeSeries, species: usize) -> f64 {
        let num: f64 = self.values.iter().zip(&reference.values).map(|(a, b)| (a[species] - b[species]).abs()).sum();
        let den: f64 = reference.values.iter().map(|b| b[species].abs()).sum();
        num / den
    }
}

/// Temperature history at one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct History {
    pub name: String,
    pub cell: [isize; 3],
    pub center: [f64; 3],
    pub times: Vec<f64>,
    pub values: Vec<[f64; 3]>,
}

/// Everything a benchmark run measured.
#[derive(Debug, Clone, Default)]
pub struct BenchmarkReport {
    pub problem: String,
    pub scheme: String,
    pub time_scheme: String,
    pub mesh_errors: Vec<MeshErrors>,
    pub bounds: Vec<BoundsRecord>,
    pub probes: Vec<ProbeSeries>,
    pub histories: Vec<History>,
    pub runs: Vec<RunLog>,
    pub notes: Vec<(String, String)>,
    pub wall_seconds: f64,
    pub final_grid: Option<StructuredGrid>,
    pub final_temperature: Option<TemperatureState>,
}

impl BenchmarkReport {
    /// Orders between consecutive meshes: (L1, Linf) per species.
    pub fn orders(&self) -> Vec<([f64; 3], [f64; 3])> {
        self.mesh_errors
            .windows(2)
            .map(|w| {
                let l1 = [0, 1, 2].map(|s| convergence_order(w[0].l1[s], w[1].l1[s]));
                let li = [0, 1, 2].map(|s| convergence_order(w[0].linf[s], w[1].linf[s]));
                (l1, li)
            })
            .collect()
    }

    pub fn all_converged(&self) -> bool {
        self.runs.iter().all(RunLog::all_converged)
    }

    /// Machine-readable `key = value` lines. Wall time is left out so the
    /// output depends only on the configuration.
    pub fn key_values(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("problem".to_string(), self.problem.clone()),
            ("scheme".to_string(), self.scheme.clone()),
            ("time_scheme".to_string(), self.time_scheme.clone()),
        ];
        let sp = ["Te", "Ti", "Tr"];
        for (i, m) in self.mesh_errors.iter().enumerate() {
            out.push((format!("mesh.{i}.h"), format!("{:?}", m.h)));
            for s in 0..3 {
                out.push((format!("mesh.{i}.l1.{}", sp[s]), format!("{:.6e}", m.l1[s])));
                out.push((format!("mesh.{i}.linf.{}", sp[s]), format!("{:.6e}", m.linf[s])));
                out.push((format!("mesh.{i}.l1_point.{}", sp[s]), format!("{:.6e}", m.l1_point[s])));
                out.push((format!("mesh.{i}.linf_point.{}", sp[s]), format!("{:.6e}", m.linf_point[s])));
            }
        }
        for (i, (l1, li)) in self.orders().iter().enumerate() {
            for s in 0..3 {
                out.push((format!("order.{}.l1.{}", i + 1, sp[s]), format!("{:.4}", l1[s])));
                out.push((format!("order.{}.linf.{}", i + 1, sp[s]), format!("{:.4}", li[s])));
            }
        }
        for b in &self.bounds {
            out.push((format!("bounds.{}.time", b.label), format!("{:?}", b.time)));
            for s in 0..3 {
                out.push((format!("bounds.{}.min.{}", b.label, sp[s]), format!("{:.10e}", b.min[s])));
                out.push((format!("bounds.{}.max.{}", b.label, sp[s]), format!("{:.10e}", b.max[s])));
            }
        }
        for r in &self.runs {
            let iters: usize = r.steps.iter().map(|s| s.inner_iters).sum();
            out.push((format!("run.{}.steps", r.label), r.steps.len().to_string()));
            out.push((format!("run.{}.inner_iters", r.label), iters.to_string()));
            out.push((format!("run.{}.converged", r.label), r.all_converged().to_string()));
        }
        out.extend(self.notes.iter().cloned());
        out
    }
}

pub(crate) fn scheme_label(scheme: Scheme) -> String {
    scheme.name().to_string()
}
