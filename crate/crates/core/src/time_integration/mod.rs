//! Explicit midpoint Runge-Kutta and implicit dual-time stepping.

pub mod block;
pub mod implicit;

pub use block::{lusgs_solve, BlockSystem};
pub use implicit::{assemble_jacobian, jacobian, step_implicit, DualTimeConfig, ResidualKind, StepStats};

use crate::error::Result;
use crate::grid::{EnergyState, SpeciesField, StructuredGrid, TemperatureState};
use crate::materials::MaterialModel;
use crate::operator::{energy_from_temperature, temperature_from_energy, SpatialOperator};

/// Conserved energies and the matching temperatures at one instant.
#[derive(Debug, Clone)]
pub struct SolutionState {
    pub time: f64,
    pub energy: EnergyState,
    pub temperature: TemperatureState,
}

impl SolutionState {
    pub fn from_temperature(model: &MaterialModel, grid: &StructuredGrid, temperature: TemperatureState, time: f64) -> Self {
        let energy = energy_from_temperature(model, grid, &temperature);
        SolutionState {
            time,
            energy,
            temperature,
        }
    }
}

/// Per-species max norm over cells and the max over species.
pub fn residual_norms(r: &[[f64; 3]]) -> ([f64; 3], f64) {
    let mut out = [0.0f64; 3];
    for v in r {
        for s in 0..3 {
            out[s] = out[s].max(v[s].abs());
        }
    }
    (out, out[0].max(out[1]).max(out[2]))
}

/// Generic midpoint step `y += dt f(y + dt/2 f(y, t), t + dt/2)`.
pub fn midpoint_step<F>(y: &mut [f64], t: f64, dt: f64, mut f: F) -> Result<()>
where
    F: FnMut(&[f64], f64, &mut [f64]) -> Result<()>,
{
    let mut k = vec![0.0; y.len()];
    f(y, t, &mut k)?;
    let mid: Vec<f64> = y.iter().zip(&k).map(|(a, b)| a + 0.5 * dt * b).collect();
    f(&mid, t + 0.5 * dt, &mut k)?;
    for (a, b) in y.iter_mut().zip(&k) {
        *a += dt * b;
    }
    Ok(())
}

/// One explicit midpoint step of the spatial operator.
pub fn step_rk2(op: &mut SpatialOperator, state: &mut SolutionState, dt: f64) -> Result<()> {
    let grid = op.grid.clone();
    let mut rhs = SpeciesField::zeros(&grid);
    op.evaluate(&state.temperature, state.time, &mut rhs)?;
    let mut mid_w = state.energy.clone();
    for c in grid.interior_cells() {
        let i = grid.index(c);
        for s in 0..3 {
            mid_w.as_mut_slice()[i][s] += 0.5 * dt * rhs.as_slice()[i][s];
        }
    }
    let mut mid_t = state.temperature.clone();
    temperature_from_energy(&op.model, &grid, &mid_w, &mut mid_t)?;
    op.evaluate(&mid_t, state.time + 0.5 * dt, &mut rhs)?;
    let mut w = state.energy.clone();
    for c in grid.interior_cells() {
        let i = grid.index(c);
        for s in 0..3 {
            w.as_mut_slice()[i][s] += dt * rhs.as_slice()[i][s];
        }
    }
    // reuse the midpoint buffer for the new temperatures
    temperature_from_energy(&op.model, &grid, &w, &mut mid_t)?;
    state.energy = w;
    state.temperature = mid_t;
    state.time += dt;
    Ok(())
}
