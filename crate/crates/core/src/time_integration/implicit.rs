//! Backward Euler in physical time, relaxed in pseudo time with LU-SGS.

use nalgebra::{Matrix3, Vector3};

use super::block::{lusgs_solve, BlockSystem, NEIGHBOR_OFFSETS};
use super::{residual_norms, SolutionState};
use crate::error::{Error, Location, Result};
use crate::grid::{fill_ghosts, BoundaryCondition, BoundarySpec, Species, SpeciesField, StructuredGrid, TemperatureState};
use crate::materials::{ExchangePair, MaterialModel};
use crate::operator::{effective_conductivity, temperature_from_energy, SpatialOperator};

/// Quantity monitored by the inner-iteration stopping rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResidualKind {
    /// Unsteady residual `L(W) + (W^n - W)/dt`.
    #[default]
    Unsteady,
    /// Size of the pseudo-time update.
    Update,
}

impl ResidualKind {
    pub fn name(self) -> &'static str {
        match self {
            ResidualKind::Unsteady => "unsteady",
            ResidualKind::Update => "update",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "unsteady" => Some(ResidualKind::Unsteady),
            "update" => Some(ResidualKind::Update),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualTimeConfig {
    pub dt: f64,
    pub dt_pseudo: f64,
    pub drop_orders: f64,
    pub max_inner_iters: usize,
    pub residual: ResidualKind,
    /// Reassemble the Jacobian every this many inner iterations.
    pub jacobian_lag: usize,
}

impl DualTimeConfig {
    pub fn new(dt: f64, dt_pseudo: f64, drop_orders: f64) -> Self {
        DualTimeConfig {
            dt,
            dt_pseudo,
            drop_orders,
            max_inner_iters: 200,
            residual: ResidualKind::Unsteady,
            jacobian_lag: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::config("time.dt must be positive"));
        }
        if !(self.dt_pseudo > 0.0) {
            return Err(Error::config("time.dtau must be positive"));
        }
        if !(self.drop_orders > 0.0) {
            return Err(Error::config("time.orders must be positive"));
        }
        if self.max_inner_iters == 0 {
            return Err(Error::config("time.max_inner must be at least 1"));
        }
        if self.jacobian_lag == 0 {
            return Err(Error::config("time.jacobian_lag must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StepStats {
    /// Residual evaluations performed, including the converged one.
    pub inner_iters: usize,
    pub converged: bool,
    /// Per-species residual norm at each evaluation.
    pub residual_history: Vec<[f64; 3]>,
}

impl StepStats {
    pub fn final_residual(&self) -> [f64; 3] {
        self.residual_history.last().copied().unwrap_or([0.0; 3])
    }

    /// Final residual relative to the first one, over all species.
    pub fn drop_ratio(&self) -> f64 {
        let max = |r: &[f64; 3]| r[0].max(r[1]).max(r[2]);
        match (self.residual_history.first(), self.residual_history.last()) {
            (Some(f), Some(l)) if max(f) > 0.0 => max(l) / max(f),
            _ => 0.0,
        }
    }
}

#[inline]
fn face_k(model: &MaterialModel, grid: &StructuredGrid, a: usize, b: usize, s: Species, t: f64) -> Result<f64> {
    let (ra, rb) = (grid.region_at(a), grid.region_at(b));
    let ka = model.conductivity(ra, s, t)?;
    if ra == rb {
        return Ok(ka);
    }
    effective_conductivity(ka, model.conductivity(rb, s, t)?)
}

/// Jacobian of the simplified operator: two-point fluxes with conductivities
/// frozen at second-order face temperatures, and exchange with frozen
/// coefficients. `temperature` must have ghosts filled when analytic
/// boundaries are present.
pub fn jacobian(
    temperature: &TemperatureState,
    grid: &StructuredGrid,
    model: &MaterialModel,
    boundary: &BoundarySpec,
) -> Result<BlockSystem> {
    let mut sys = BlockSystem::zeros(grid.n_cells());
    let n = grid.n_cells().map(|v| v as isize);
    let h = grid.spacing();
    let strides = grid.strides();
    let t = temperature.as_slice();
    let mut j = 0;
    for c in grid.interior_cells() {
        let idx = grid.index(c);
        let region = grid.region_at(idx);
        let tc = t[idx];
        let dtdw = Species::ALL.map(|s| 1.0 / model.heat_capacity(region, s, tc[s.index()]));
        let mut diag = Matrix3::zeros();
        for (slot, &(axis, dir)) in NEIGHBOR_OFFSETS.iter().enumerate() {
            let inv_h2 = 1.0 / (h[axis] * h[axis]);
            let nb = if dir < 0 { idx - strides[axis] } else { idx + strides[axis] };
            let inside = if dir < 0 { c[axis] > 0 } else { c[axis] + 1 < n[axis] };
            for s in Species::ALL {
                let i = s.index();
                let k_coef = if inside {
                    let tf = 0.5 * (tc[i] + t[nb][i]);
                    let k = face_k(model, grid, idx, nb, s, tf)?;
                    let nb_region = grid.region_at(nb);
                    let dtdw_nb = 1.0 / model.heat_capacity(nb_region, s, t[nb][i]);
                    sys.neighbors[j][slot][(i, i)] = k * inv_h2 * dtdw_nb;
                    k * inv_h2
                } else {
                    match boundary.condition(axis, usize::from(dir > 0), i) {
                        BoundaryCondition::Neumann(_) => 0.0,
                        BoundaryCondition::Dirichlet(tb) => {
                            2.0 * model.conductivity(region, s, 0.5 * (tc[i] + tb))? * inv_h2
                        }
                        BoundaryCondition::Analytic(_) => model.conductivity(region, s, tc[i])? * inv_h2,
                    }
                };
                diag[(i, i)] -= k_coef * dtdw[i];
            }
        }
        let wi = model.exchange_coeff(region, ExchangePair::ElectronIon, tc[0]);
        let wr = model.exchange_coeff(region, ExchangePair::ElectronRadiation, tc[0]);
        let (wi, wr) = (wi.map_err(|e| e.at(Location::Cell(c)))?, wr.map_err(|e| e.at(Location::Cell(c)))?);
        let [de, di, dr] = dtdw;
        diag += Matrix3::new(
            -(wi + wr) * de, wi * di, wr * dr,
            wi * de, -wi * di, 0.0,
            wr * de, 0.0, -wr * dr,
        );
        sys.diag[j] = diag;
        j += 1;
    }
    Ok(sys)
}

/// `A = (1/dt + 1/dt_pseudo) I - J`.
pub fn assemble_jacobian(
    temperature: &TemperatureState,
    grid: &StructuredGrid,
    model: &MaterialModel,
    boundary: &BoundarySpec,
    dt: f64,
    dt_pseudo: f64,
) -> Result<BlockSystem> {
    let mut sys = jacobian(temperature, grid, model, boundary)?;
    let shift = 1.0 / dt + 1.0 / dt_pseudo;
    for d in &mut sys.diag {
        *d = Matrix3::from_diagonal_element(shift) - *d;
    }
    for blocks in &mut sys.neighbors {
        for b in blocks.iter_mut() {
            *b = -*b;
        }
    }
    Ok(sys)
}

/// Advance one physical step of size `cfg.dt`.
pub fn step_implicit(op: &mut SpatialOperator, state: &mut SolutionState, cfg: &DualTimeConfig) -> Result<StepStats> {
    let grid = op.grid.clone();
    let t_new = state.time + cfg.dt;
    let w_n = state.energy.clone();
    let mut w = state.energy.clone();
    let mut temp = state.temperature.clone();
    let mut rhs = SpeciesField::zeros(&grid);
    let mut residual = vec![[0.0; 3]; grid.interior_count()];
    let mut stats = StepStats::default();
    let mut reference: Option<f64> = None;
    let target = 10f64.powf(-cfg.drop_orders);
    let mut sys: Option<BlockSystem> = None;
    let cells: Vec<usize> = grid.interior_cells().map(|c| grid.index(c)).collect();

    for m in 0..cfg.max_inner_iters {
        op.evaluate(&temp, t_new, &mut rhs)?;
        for (j, &idx) in cells.iter().enumerate() {
            for s in 0..3 {
                residual[j][s] = rhs.as_slice()[idx][s] + (w_n.as_slice()[idx][s] - w.as_slice()[idx][s]) / cfg.dt;
            }
        }
        stats.inner_iters += 1;
        if cfg.residual == ResidualKind::Unsteady {
            let (norms, max) = residual_norms(&residual);
            stats.residual_history.push(norms);
            let r1 = *reference.get_or_insert(max);
            if max <= r1 * target {
                stats.converged = true;
                break;
            }
        }
        if sys.is_none() || m % cfg.jacobian_lag == 0 {
            fill_ghosts(&mut temp, &grid, &op.boundary, t_new);
            sys = Some(assemble_jacobian(&temp, &grid, &op.model, &op.boundary, cfg.dt, cfg.dt_pseudo)?);
        }
        let system = sys.as_mut().expect("assembled above");
        for (r, res) in system.rhs.iter_mut().zip(&residual) {
            *r = Vector3::from(*res);
        }
        let dw = lusgs_solve(system)?;
        let wv = w.as_mut_slice();
        for (j, &idx) in cells.iter().enumerate() {
            for s in 0..3 {
                wv[idx][s] += dw[j][s];
            }
        }
        temperature_from_energy(&op.model, &grid, &w, &mut temp)?;
        if cfg.residual == ResidualKind::Update {
            let upd: Vec<[f64; 3]> = dw.iter().map(|v| [v.x, v.y, v.z]).collect();
            let (norms, max) = residual_norms(&upd);
            stats.residual_history.push(norms);
            let r1 = *reference.get_or_insert(max);
            if max <= r1 * target {
                stats.converged = true;
                break;
            }
        }
    }
    if !stats.converged {
        log::warn!(
            "implicit step to t = {t_new} not converged after {} inner iterations (drop {:.3e})",
            stats.inner_iters,
            stats.drop_ratio()
        );
    }
    state.energy = w;
    state.temperature = temp;
    state.time = t_new;
    Ok(stats)
}
