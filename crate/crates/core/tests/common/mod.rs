//! Shared oracles and fixtures for the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use trdiff::grid::{BoundaryCondition, BoundarySpec, RegionId, Species, SpeciesField, StructuredGrid, TemperatureState};
use trdiff::materials::{CoefficientLaw, EnergyLaw, ExchangePair, MaterialModel, RegionMaterial};
use trdiff::operator::effective_conductivity;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Interior temperatures drawn uniformly from `[lo, hi)`; ghosts left at zero.
pub fn random_temperature(grid: &StructuredGrid, rng: &mut impl Rng, lo: f64, hi: f64) -> TemperatureState {
    let mut t = SpeciesField::zeros(grid);
    for c in grid.interior_cells().collect::<Vec<_>>() {
        t.set(grid, c, [0, 1, 2].map(|_| rng.gen_range(lo..hi)));
    }
    t
}

/// Single-region model with power-law coefficients of moderate stiffness.
pub fn power_model() -> MaterialModel {
    MaterialModel::custom(RegionMaterial {
        conductivity: [
            CoefficientLaw::Power { coef: 0.5, exponent: 2.5 },
            CoefficientLaw::Power { coef: 0.2, exponent: 2.5 },
            CoefficientLaw::Power { coef: 1.0, exponent: 3.0 },
        ],
        exchange: [
            CoefficientLaw::Power { coef: 2.0, exponent: -2.0 / 3.0 },
            CoefficientLaw::Power { coef: 1.0, exponent: -0.5 },
        ],
        energy: [
            EnergyLaw::Linear { capacity: 1.5 },
            EnergyLaw::Linear { capacity: 2.0 },
            EnergyLaw::Quartic { coef: 1.0 },
        ],
    })
    .unwrap()
}

pub fn icf_grid(n: [usize; 3]) -> StructuredGrid {
    let model = MaterialModel::icf();
    StructuredGrid::new([-115.0, 0.0, 0.0], [115.0; 3], n, |p| model.region_of(p)).unwrap()
}

pub fn unit_grid(n: [usize; 3], h: f64) -> StructuredGrid {
    let hi = n.map(|v| v as f64 * h);
    StructuredGrid::new([0.0; 3], hi, n, |_| RegionId(0)).unwrap()
}

/// Energy densities of the interior cells in lexicographic order.
pub fn interior_energy(model: &MaterialModel, grid: &StructuredGrid, t: &TemperatureState) -> Vec<[f64; 3]> {
    grid.interior_cells()
        .map(|c| model.energy(grid.region(c), t.get(grid, c)))
        .collect()
}

/// Two-point diffusion plus exchange with every coefficient frozen at the
/// reference temperatures `t_ref`, evaluated at the energies `w` (interior
/// cells in lexicographic order). Boundary faces: Neumann contributes nothing
/// that depends on the state, Dirichlet uses the half-cell two-point flux and
/// analytic ghosts are taken as zero.
pub fn frozen_rhs(
    model: &MaterialModel,
    grid: &StructuredGrid,
    boundary: &BoundarySpec,
    t_ref: &TemperatureState,
    w: &[[f64; 3]],
) -> Vec<[f64; 3]> {
    let cells: Vec<[isize; 3]> = grid.interior_cells().collect();
    let n = grid.n_cells();
    let compact = |c: [isize; 3]| c[0] as usize + n[0] * (c[1] as usize + n[1] * c[2] as usize);
    let temps: Vec<[f64; 3]> = cells
        .iter()
        .zip(w)
        .map(|(&c, wc)| model.temperature(grid.region(c), *wc).unwrap())
        .collect();
    let h = grid.spacing();
    let mut out = vec![[0.0; 3]; cells.len()];
    for (j, &c) in cells.iter().enumerate() {
        let rc = grid.region(c);
        let tr = t_ref.get(grid, c);
        for axis in 0..3 {
            for side in 0..2 {
                let mut nb = c;
                nb[axis] += if side == 0 { -1 } else { 1 };
                for s in Species::ALL {
                    let i = s.index();
                    let flux = if grid.is_interior(nb) {
                        let rn = grid.region(nb);
                        let tf = 0.5 * (tr[i] + t_ref.get(grid, nb)[i]);
                        let kc = model.conductivity(rc, s, tf).unwrap();
                        let k = if rc == rn { kc } else { effective_conductivity(kc, model.conductivity(rn, s, tf).unwrap()).unwrap() };
                        k * (temps[compact(nb)][i] - temps[j][i])
                    } else {
                        match boundary.condition(axis, side, i) {
                            BoundaryCondition::Neumann(_) => 0.0,
                            BoundaryCondition::Dirichlet(tb) => {
                                2.0 * model.conductivity(rc, s, 0.5 * (tr[i] + tb)).unwrap() * (tb - temps[j][i])
                            }
                            BoundaryCondition::Analytic(_) => -model.conductivity(rc, s, tr[i]).unwrap() * temps[j][i],
                        }
                    };
                    out[j][i] += flux / (h[axis] * h[axis]);
                }
            }
        }
        let wi = model.exchange_coeff(rc, ExchangePair::ElectronIon, tr[0]).unwrap();
        let wr = model.exchange_coeff(rc, ExchangePair::ElectronRadiation, tr[0]).unwrap();
        let t = temps[j];
        out[j][0] += wi * (t[1] - t[0]) + wr * (t[2] - t[0]);
        out[j][1] += wi * (t[0] - t[1]);
        out[j][2] += wr * (t[0] - t[2]);
    }
    out
}

/// Exact solution of the manufactured problem and its derivatives,
/// written out independently of the library.
pub struct MmsOracle;

impl MmsOracle {
    pub fn value(x: f64, y: f64, t: f64) -> [f64; 3] {
        let e = t.exp();
        [
            e * (x * x + 1.0) * (y * y + 1.0),
            e * (2.0 * x * x + 1.0) * (y * y + 1.0),
            e * (2.0 * x * x + 1.0) * (2.0 * y * y + 1.0),
        ]
    }

    pub fn laplacian(x: f64, y: f64, t: f64) -> [f64; 3] {
        let e = t.exp();
        [
            e * (2.0 * (y * y + 1.0) + 2.0 * (x * x + 1.0)),
            e * (4.0 * (y * y + 1.0) + 2.0 * (2.0 * x * x + 1.0)),
            e * (4.0 * (2.0 * y * y + 1.0) + 4.0 * (2.0 * x * x + 1.0)),
        ]
    }

    /// Exchange terms with unit coefficients.
    pub fn exchange(v: [f64; 3]) -> [f64; 3] {
        [(v[1] - v[0]) + (v[2] - v[0]), v[0] - v[1], v[0] - v[2]]
    }
}

pub fn norm2(v: &[[f64; 3]]) -> f64 {
    v.iter().flat_map(|a| a.iter()).map(|x| x * x).sum::<f64>().sqrt()
}
