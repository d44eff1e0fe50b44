//! Three-shell capsule heated by a radiation wall, implicit only.

use std::time::Instant;

use super::{scheme_label, BenchmarkReport, BoundsRecord, History, ProbeLine, ProbeSeries, Simulation, TimeScheme};
use crate::error::{Error, Result};
use crate::grid::{BoundaryCondition, BoundarySpec, Species, SpeciesField, StructuredGrid};
use crate::materials::MaterialModel;
use crate::operator::SpatialOperator;
use crate::reconstruction::Scheme;
use crate::time_integration::{DualTimeConfig, SolutionState};

#[derive(Debug, Clone, PartialEq)]
pub struct IcfConfig {
    pub spacing: f64,
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    /// Pseudo step as a multiple of `dt`.
    pub dtau_factor: f64,
    pub drop_orders: f64,
    pub max_inner_iters: usize,
    pub snapshot_times: Vec<f64>,
    pub locations: Vec<(String, [f64; 3])>,
    /// Lines checked for radiation-ahead-of-electron front ordering.
    pub probes: Vec<ProbeLine>,
    pub front_threshold: f64,
    pub initial: f64,
    pub wall_temperature: f64,
}

impl IcfConfig {
    /// Coarse grid and short horizon.
    pub fn desk() -> Self {
        IcfConfig {
            spacing: 11.5,
            scheme: Scheme::Geno,
            dt: 5e-5,
            t_end: 0.3,
            dtau_factor: 10.0,
            drop_orders: 3.0,
            max_inner_iters: 200,
            snapshot_times: vec![0.1, 0.2],
            locations: vec![
                ("loc1".into(), [0.0, 112.5, 112.5]),
                ("loc2".into(), [0.0, 87.5, 87.5]),
            ],
            probes: vec![ProbeLine::new("front", 1, [0.0, 0.0, 57.5])],
            front_threshold: 0.01,
            initial: 3e-4,
            wall_temperature: 2.0,
        }
    }

    /// Full-resolution configuration; about 1.7 million implicit steps.
    pub fn long_running() -> Self {
        IcfConfig {
            spacing: 5.0,
            dt: 6e-6,
            t_end: 10.0,
            snapshot_times: vec![0.3, 5.0],
            ..Self::desk()
        }
    }

    pub fn dual_time(&self) -> DualTimeConfig {
        let mut cfg = DualTimeConfig::new(self.dt, self.dtau_factor * self.dt, self.drop_orders);
        cfg.max_inner_iters = self.max_inner_iters;
        cfg
    }
}

pub fn icf_setup(spacing: f64, scheme: Scheme, initial: f64, wall: f64) -> Result<(SpatialOperator, SolutionState)> {
    let (nx, ny) = (230.0 / spacing, 115.0 / spacing);
    if (nx - nx.round()).abs() > 1e-9 || (ny - ny.round()).abs() > 1e-9 {
        return Err(Error::config(format!("grid.spacing {spacing} does not divide 115")));
    }
    let model = MaterialModel::icf();
    let n = [nx.round() as usize, ny.round() as usize, ny.round() as usize];
    let grid = StructuredGrid::new([-115.0, 0.0, 0.0], [115.0; 3], n, |p| model.region_of(p))?;
    let mut boundary = BoundarySpec::insulated();
    for (axis, side) in [(0, 0), (0, 1), (1, 1), (2, 1)] {
        boundary.set(axis, side, Species::Radiation, BoundaryCondition::Dirichlet(wall));
    }
    let temp = SpeciesField::uniform(&grid, [initial; 3]);
    let state = SolutionState::from_temperature(&model, &grid, temp, 0.0);
    Ok((SpatialOperator::new(grid, model, boundary, scheme), state))
}

/// True when every probe cell hotter than `threshold` in `T_e` is also hotter in `T_r`.
pub fn radiation_front_leads(series: &ProbeSeries, threshold: f64) -> bool {
    series.values.iter().all(|v| v[0] <= threshold || v[2] > threshold)
}

fn front_extent(series: &ProbeSeries, species: usize, threshold: f64) -> usize {
    series.values.iter().filter(|v| v[species] > threshold).count()
}

pub fn run_icf(cfg: &IcfConfig) -> Result<BenchmarkReport> {
    let start = Instant::now();
    let (op, state) = icf_setup(cfg.spacing, cfg.scheme, cfg.initial, cfg.wall_temperature)?;
    let label = format!("{}-implicit", cfg.scheme.name());
    let mut sim = Simulation::new(op, state, TimeScheme::Implicit(cfg.dual_time()), cfg.dt, label);
    let mut report = BenchmarkReport {
        problem: "icf".into(),
        scheme: scheme_label(cfg.scheme),
        time_scheme: "implicit".into(),
        ..Default::default()
    };
    let grid = sim.op.grid.clone();
    let mut histories = Vec::new();
    for (name, point) in &cfg.locations {
        let cell = grid
            .locate(*point)
            .ok_or_else(|| Error::config(format!("location {name} lies outside the domain")))?;
        histories.push(History {
            name: name.clone(),
            cell,
            center: grid.cell_center(cell),
            times: vec![0.0],
            values: vec![sim.state.temperature.get(&grid, cell)],
        });
    }
    let mut running = BoundsRecord::from_state("running", &sim.state, &grid);
    let mut times: Vec<f64> = cfg.snapshot_times.iter().copied().filter(|&t| t > 0.0 && t < cfg.t_end).collect();
    times.push(cfg.t_end);
    times.sort_by(f64::total_cmp);
    times.dedup();
    let mut front_ok = true;
    for (i, &t) in times.iter().enumerate() {
        sim.advance_to_with(t, |state, grid| {
            running.merge(&BoundsRecord::from_state("", state, grid));
            for h in histories.iter_mut() {
                h.times.push(state.time);
                h.values.push(state.temperature.get(grid, h.cell));
            }
        })?;
        report.bounds.push(BoundsRecord::from_state(format!("t{i}"), &sim.state, &grid));
        report.notes.push((format!("front.t{i}.time"), format!("{:?}", sim.state.time)));
        for p in &cfg.probes {
            let mut series = p.sample(&sim.state, &grid)?;
            series.name = format!("{}_t{i}", p.name);
            let leads = radiation_front_leads(&series, cfg.front_threshold);
            front_ok &= leads;
            let key = format!("front.t{i}.{}", p.name);
            report.notes.push((format!("{key}.cells_Tr"), front_extent(&series, 2, cfg.front_threshold).to_string()));
            report.notes.push((format!("{key}.cells_Te"), front_extent(&series, 0, cfg.front_threshold).to_string()));
            report.notes.push((format!("{key}.radiation_leads"), leads.to_string()));
            report.probes.push(series);
        }
    }
    report.notes.push(("front.radiation_leads".into(), front_ok.to_string()));
    running.time = sim.state.time;
    report.bounds.push(running);
    report.histories = histories;
    report.final_grid = Some(grid);
    report.final_temperature = Some(sim.state.temperature.clone());
    report.runs.push(sim.log);
    report.wall_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_grid_and_boundaries() {
        let (op, state) = icf_setup(11.5, Scheme::Geno, 3e-4, 2.0).unwrap();
        assert_eq!(op.grid.n_cells(), [20, 10, 10]);
        assert!(matches!(op.boundary.condition(1, 0, 2), BoundaryCondition::Neumann(g) if *g == 0.0));
        assert!(matches!(op.boundary.condition(1, 1, 2), BoundaryCondition::Dirichlet(v) if *v == 2.0));
        assert!(matches!(op.boundary.condition(1, 1, 0), BoundaryCondition::Neumann(_)));
        let (min, max) = state.temperature.bounds(&op.grid);
        assert_eq!((min, max), ([3e-4; 3], [3e-4; 3]));
    }

    #[test]
    fn front_check() {
        let s = ProbeSeries {
            name: "p".into(),
            time: 0.0,
            axis: 1,
            coords: vec![0.0, 1.0, 2.0],
            values: vec![[0.0, 0.0, 0.0], [0.0, 0.0, 0.5], [0.5, 0.0, 1.0]],
        };
        assert!(radiation_front_leads(&s, 0.01));
        let mut bad = s.clone();
        bad.values[1] = [0.5, 0.0, 0.0];
        assert!(!radiation_front_leads(&bad, 0.01));
    }
}
