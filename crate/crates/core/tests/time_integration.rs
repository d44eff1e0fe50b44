mod common;

use nalgebra::{Matrix3, Vector3};
use proptest::prelude::*;
use trdiff::benchmarks::{Simulation, TimeScheme};
use trdiff::grid::{BoundaryCondition, BoundarySpec, Species, SpeciesField, StructuredGrid};
use trdiff::operator::SpatialOperator;
use trdiff::reconstruction::Scheme;
use trdiff::time_integration::{lusgs_solve, step_implicit, BlockSystem, DualTimeConfig, SolutionState};

use common::{power_model, random_temperature, rng, unit_grid};

fn problem(seed: u64) -> (SpatialOperator, SolutionState, StructuredGrid) {
    let grid = unit_grid([6, 5, 4], 1.0);
    let model = power_model();
    let temp = random_temperature(&grid, &mut rng(seed), 1.0, 2.0);
    let state = SolutionState::from_temperature(&model, &grid, temp, 0.0);
    let boundary = BoundarySpec::insulated().with(1, 1, Species::Radiation, BoundaryCondition::Dirichlet(2.5));
    (SpatialOperator::new(grid.clone(), model, boundary, Scheme::Geno), state, grid)
}

fn max_rel_diff(a: &SpeciesField, b: &SpeciesField, grid: &StructuredGrid) -> f64 {
    grid.interior_cells()
        .flat_map(|c| {
            let (x, y) = (a.get(grid, c), b.get(grid, c));
            (0..3).map(move |s| (x[s] - y[s]).abs() / y[s].abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn converged_step_does_not_depend_on_pseudo_step() {
    let dt = 0.05;
    let mut results = Vec::new();
    for factor in [2.0, 10.0, 100.0] {
        let (mut op, mut state, grid) = problem(1);
        let mut cfg = DualTimeConfig::new(dt, factor * dt, 10.0);
        cfg.max_inner_iters = 2000;
        let stats = step_implicit(&mut op, &mut state, &cfg).unwrap();
        assert!(stats.converged, "dtau = {factor} dt: {} iterations", stats.inner_iters);
        results.push((state.energy, grid));
    }
    for r in &results[1..] {
        let d = max_rel_diff(&r.0, &results[0].0, &r.1);
        assert!(d < 1e-8, "{d}");
    }
}

#[test]
fn converged_step_solves_backward_euler() {
    let dt = 0.1;
    let (mut op, mut state, grid) = problem(2);
    let w_n = state.energy.clone();
    let cfg = DualTimeConfig::new(dt, 10.0 * dt, 6.0);
    let stats = step_implicit(&mut op, &mut state, &cfg).unwrap();
    assert!(stats.converged);
    let mut rhs = SpeciesField::zeros(&grid);
    op.evaluate(&state.temperature, state.time, &mut rhs).unwrap();
    let first = stats.residual_history[0].iter().copied().fold(0.0, f64::max);
    let mut worst = 0.0f64;
    for c in grid.interior_cells() {
        let (l, w, wn) = (rhs.get(&grid, c), state.energy.get(&grid, c), w_n.get(&grid, c));
        for s in 0..3 {
            worst = worst.max((l[s] - (w[s] - wn[s]) / dt).abs());
        }
    }
    assert!(worst <= 1e-6 * first, "{worst} vs initial {first}");
    assert_eq!(worst, stats.final_residual().iter().copied().fold(0.0, f64::max));
}

#[test]
fn implicit_and_explicit_agree_for_small_steps() {
    let t_end = 0.2;
    let run = |scheme: TimeScheme, dt: f64| {
        let (op, state, grid) = problem(3);
        let mut sim = Simulation::new(op, state, scheme, dt, "run");
        sim.advance_to(t_end).unwrap();
        (sim.state.temperature, grid)
    };
    let (reference, grid) = run(TimeScheme::Rk2, 1e-3);
    let errors: Vec<f64> = [0.02, 0.01]
        .iter()
        .map(|&dt| {
            let mut cfg = DualTimeConfig::new(dt, 10.0 * dt, 8.0);
            cfg.max_inner_iters = 1000;
            max_rel_diff(&run(TimeScheme::Implicit(cfg), dt).0, &reference, &grid)
        })
        .collect();
    // backward Euler: first order in dt
    let order = (errors[0] / errors[1]).log2();
    assert!(errors[1] < 1e-2 && (order - 1.0).abs() < 0.25, "{errors:?}, order {order}");
}

fn block(v: [f64; 9]) -> Matrix3<f64> {
    Matrix3::from_row_slice(&v)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lusgs_inverts_the_factored_operator(
        n in (1usize..5, 1usize..5, 1usize..4),
        entries in prop::collection::vec(prop::array::uniform9(-1.0f64..1.0), 7 * 80),
        rhs in prop::collection::vec(prop::array::uniform3(-1.0f64..1.0), 80),
    ) {
        let mut sys = BlockSystem::zeros([n.0, n.1, n.2]);
        for j in 0..sys.len() {
            for slot in 0..6 {
                sys.neighbors[j][slot] = block(entries[7 * j + slot]);
            }
            sys.diag[j] = block(entries[7 * j + 6]) + Matrix3::from_diagonal_element(20.0);
            sys.rhs[j] = Vector3::from(rhs[j]);
        }
        let x = lusgs_solve(&sys).unwrap();
        let back = sys.apply_factored(&x).unwrap();
        for (a, b) in back.iter().zip(&sys.rhs) {
            prop_assert!((a - b).norm() <= 1e-12 * (1.0 + b.norm()));
        }
    }
}
