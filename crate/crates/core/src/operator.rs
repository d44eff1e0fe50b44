//! Semi-discrete right-hand side: face-quadrature diffusive fluxes plus the
//! cell-integrated exchange sources, in energy density per unit time.

use std::sync::Arc;

use crate::error::{Error, Location, Result};
use crate::grid::{fill_ghosts, tangential_axes, BoundarySpec, RegionId, Species, SpeciesField, StructuredGrid, TemperatureState, EnergyState};
use crate::materials::{ExchangePair, MaterialModel};
use crate::reconstruction::faces::{cell_from, near_dirichlet_wall, quadrature_states};
use crate::reconstruction::{compute_face_plane, FacePlane, FaceReconstruction, Scheme};

/// Harmonic-mean conductivity of two materials sharing a face.
#[inline]
pub fn effective_conductivity(k_l: f64, k_r: f64) -> Result<f64> {
    if !(k_l > 0.0) || !(k_r > 0.0) {
        return Err(Error::Solver(format!("conductivity must be positive, got ({k_l}, {k_r})")));
    }
    if k_l == k_r {
        return Ok(k_l);
    }
    Ok(2.0 * k_l * (k_r / (k_l + k_r)))
}

/// Conductivity at a face point from the regions on either side.
#[inline]
fn face_conductivity(model: &MaterialModel, left: RegionId, right: RegionId, species: Species, t: f64) -> Result<f64> {
    let kl = model.conductivity(left, species, t)?;
    if left == right {
        return Ok(kl);
    }
    let kr = model.conductivity(right, species, t)?;
    effective_conductivity(kl, kr)
}

/// `sum_q w_q k(T_q) G_q` over the four face points (flux per unit area).
#[inline]
fn quadrature_flux(
    model: &MaterialModel,
    left: RegionId,
    right: RegionId,
    species: Species,
    values: &[f64; 4],
    gradients: &[f64; 4],
) -> Result<f64> {
    let mut sum = 0.0;
    for q in 0..4 {
        sum += 0.25 * face_conductivity(model, left, right, species, values[q])? * gradients[q];
    }
    Ok(sum)
}

/// Quadrature-integrated normal flux through one face for each species,
/// multiplied by the face area.
pub fn face_flux(face: &FaceReconstruction, grid: &StructuredGrid, model: &MaterialModel) -> Result<[f64; 3]> {
    let right = grid.region(face.index);
    let mut lc = face.index;
    lc[face.axis] -= 1;
    let left = grid.region(lc);
    let area = grid.face_area(face.axis);
    let mut out = [0.0; 3];
    for s in Species::ALL {
        let i = s.index();
        out[i] = area
            * quadrature_flux(model, left, right, s, &face.values[i], &face.gradients[i]).map_err(|e| {
                e.at(Location::Face {
                    axis: face.axis,
                    index: face.index,
                })
            })?;
    }
    Ok(out)
}

#[inline]
pub fn minmod(a: f64, b: f64) -> f64 {
    if a > 0.0 && b > 0.0 {
        a.min(b)
    } else if a < 0.0 && b < 0.0 {
        a.max(b)
    } else {
        0.0
    }
}

/// Limited cell gradient from the face-average gradients on either side.
#[inline]
pub fn cell_gradient(grad_minus: f64, grad_plus: f64) -> f64 {
    minmod(grad_minus, grad_plus)
}

/// Cell-integrated exchange sources. `gradients[m][s]` is the limited
/// gradient of species `s` along axis `m`.
pub fn cell_source(
    temperature: [f64; 3],
    gradients: &[[f64; 3]; 3],
    region: RegionId,
    model: &MaterialModel,
    spacing: [f64; 3],
) -> Result<[f64; 3]> {
    let te = temperature[0];
    let mut terms = [0.0; 2];
    for pair in ExchangePair::ALL {
        let p = pair.partner().index();
        let omega = model.exchange_coeff(region, pair, te)?;
        let mut term = omega * (temperature[p] - te);
        if !model.region(region).exchange[pair as usize].is_constant() {
            let d_omega = model.exchange_derivative(region, pair, te)?;
            for m in 0..3 {
                let ge = gradients[m][0];
                term += spacing[m] * spacing[m] / 12.0 * d_omega * ge * (gradients[m][p] - ge);
            }
        }
        terms[pair as usize] = term;
    }
    Ok([terms[0] + terms[1], -terms[0], -terms[1]])
}

/// Additional prescribed source added to the right-hand side, in energy units.
pub trait ExtraSource: Send + Sync {
    fn add_to(&self, grid: &StructuredGrid, t: f64, rhs: &mut SpeciesField);
}

/// Temperatures from energies on interior cells; failures name the cell.
pub fn temperature_from_energy(
    model: &MaterialModel,
    grid: &StructuredGrid,
    energy: &EnergyState,
    out: &mut TemperatureState,
) -> Result<()> {
    for c in grid.interior_cells() {
        let idx = grid.index(c);
        let t = model
            .temperature(grid.region_at(idx), energy.as_slice()[idx])
            .map_err(|e| e.at(Location::Cell(c)))?;
        out.as_mut_slice()[idx] = t;
    }
    Ok(())
}

pub fn energy_from_temperature(model: &MaterialModel, grid: &StructuredGrid, temperature: &TemperatureState) -> EnergyState {
    let mut w = SpeciesField::zeros(grid);
    for c in grid.interior_cells() {
        let idx = grid.index(c);
        w.as_mut_slice()[idx] = model.energy(grid.region_at(idx), temperature.as_slice()[idx]);
    }
    w
}

fn face_error(e: Error, axis: usize, p: isize, ta: isize, tb: isize) -> Error {
    e.at(Location::Face {
        axis,
        index: cell_from(axis, p, ta, tb),
    })
}

/// The spatial operator with its scratch storage.
#[derive(Clone)]
pub struct SpatialOperator {
    pub grid: StructuredGrid,
    pub model: MaterialModel,
    pub boundary: BoundarySpec,
    pub scheme: Scheme,
    extra: Option<Arc<dyn ExtraSource>>,
    ghosted: TemperatureState,
    planes: [FacePlane; 3],
}

impl SpatialOperator {
    pub fn new(grid: StructuredGrid, model: MaterialModel, boundary: BoundarySpec, scheme: Scheme) -> Self {
        let ghosted = SpeciesField::zeros(&grid);
        SpatialOperator {
            grid,
            model,
            boundary,
            scheme,
            extra: None,
            ghosted,
            planes: Default::default(),
        }
    }

    pub fn with_extra_source(mut self, source: Arc<dyn ExtraSource>) -> Self {
        self.extra = Some(source);
        self
    }

    fn needs_tangential_stage(&self) -> bool {
        self.scheme != Scheme::Central && Species::ALL.iter().any(|&s| !self.model.conductivity_is_constant(s))
    }

    /// Evaluate the right-hand side for the interior temperatures of `temperature`
    /// at time `t`. Ghost entries of `rhs` are left at zero.
    pub fn evaluate(&mut self, temperature: &TemperatureState, t: f64, rhs: &mut SpeciesField) -> Result<()> {
        let grid = &self.grid;
        self.ghosted.clone_from(temperature);
        fill_ghosts(&mut self.ghosted, grid, &self.boundary, t);
        for v in rhs.as_mut_slice() {
            *v = [0.0; 3];
        }
        let halo = if self.needs_tangential_stage() { 2 } else { 0 };
        let n = grid.n_cells().map(|v| v as isize);
        let constant_k = Species::ALL.map(|s| self.model.conductivity_is_constant(s));
        // face conductivities for temperature-independent laws, indexed [left][right]
        let n_regions = self.model.regions.len();
        let mut k_table = vec![[0.0; 3]; n_regions * n_regions];
        for l in 0..n_regions {
            for r in 0..n_regions {
                for s in Species::ALL {
                    if constant_k[s.index()] {
                        k_table[l * n_regions + r][s.index()] =
                            face_conductivity(&self.model, RegionId(l), RegionId(r), s, 1.0)?;
                    }
                }
            }
        }
        let out = rhs.as_mut_slice();

        for axis in 0..3 {
            let plane = &mut self.planes[axis];
            compute_face_plane(&self.ghosted, grid, &self.boundary, axis, halo, self.scheme, plane);
            let plane = &self.planes[axis];
            let (a, b) = tangential_axes(axis);
            let inv_h = 1.0 / grid.spacing()[axis];
            let stride = grid.strides()[axis];
            let closed_side = [0, 1].map(|side| [0, 1, 2].map(|s| !self.boundary.is_analytic(axis, side, s)));
            for tb in 0..n[b] {
                for ta in 0..n[a] {
                    let base = grid.index(cell_from(axis, -1, ta, tb));
                    let corner = [0, 1, 2].map(|s| near_dirichlet_wall(&self.boundary, n, axis, ta, tb, s));
                    for p in 0..=n[axis] {
                        let il = base + p as usize * stride;
                        let ir = il + stride;
                        let (rl, rr) = (grid.region_at(il), grid.region_at(ir));
                        let avg = plane.get(p, ta, tb);
                        let kt = &k_table[rl.0 * n_regions + rr.0];
                        let mut flux = [0.0; 3];
                        for s in Species::ALL {
                            let i = s.index();
                            flux[i] = if constant_k[i] {
                                kt[i] * avg.gradient[i]
                            } else if self.scheme == Scheme::Central {
                                face_conductivity(&self.model, rl, rr, s, avg.value[i])
                                    .map_err(|e| face_error(e, axis, p, ta, tb))?
                                    * avg.gradient[i]
                            } else {
                                let closed =
                                    corner[i] || (p == 0 && closed_side[0][i]) || (p == n[axis] && closed_side[1][i]);
                                let (v, g, _) = quadrature_states(plane, p, ta, tb, i, closed, self.scheme);
                                quadrature_flux(&self.model, rl, rr, s, &v, &g).map_err(|e| face_error(e, axis, p, ta, tb))?
                            } * inv_h;
                        }
                        if p > 0 {
                            for i in 0..3 {
                                out[il][i] += flux[i];
                            }
                        }
                        if p < n[axis] {
                            for i in 0..3 {
                                out[ir][i] -= flux[i];
                            }
                        }
                    }
                }
            }
        }

        let spacing = grid.spacing();
        let need_gradients = !self.model.exchange_is_constant();
        for c in grid.interior_cells() {
            let idx = grid.index(c);
            let mut grads = [[0.0; 3]; 3];
            if need_gradients {
                for (m, g) in grads.iter_mut().enumerate() {
                    let (a, b) = tangential_axes(m);
                    let lo = self.planes[m].get(c[m], c[a], c[b]);
                    let hi = self.planes[m].get(c[m] + 1, c[a], c[b]);
                    for s in 0..3 {
                        g[s] = cell_gradient(lo.gradient[s], hi.gradient[s]);
                    }
                }
            }
            let src = cell_source(self.ghosted.as_slice()[idx], &grads, grid.region_at(idx), &self.model, spacing)
                .map_err(|e| e.at(Location::Cell(c)))?;
            for s in 0..3 {
                out[idx][s] += src[s];
            }
        }

        if let Some(extra) = &self.extra {
            extra.add_to(grid, t, rhs);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{BoundaryCondition, RegionId};
    use crate::materials::{CoefficientLaw, RegionMaterial};
    use crate::reconstruction::reconstruct_all_faces;

    #[test]
    fn effective_conductivity_examples() {
        assert_eq!(effective_conductivity(7.0, 7.0).unwrap(), 7.0);
        let k = effective_conductivity(10.0, 100.0).unwrap();
        assert!((k - 2000.0 / 110.0).abs() < 1e-12);
        let k = effective_conductivity(3.0, 1e300).unwrap();
        assert!(k.is_finite() && (k - 6.0).abs() < 1e-12);
        assert!(effective_conductivity(0.0, 1.0).is_err());
        assert!(effective_conductivity(1.0, -2.0).is_err());
    }

    #[test]
    fn harmonic_mean_bounds() {
        for (a, b) in [(1.0, 2.0), (0.3, 40.0), (5.0, 5.0), (1e-8, 1e8)] {
            let k = effective_conductivity(a, b).unwrap();
            let m = f64::min(a, b);
            assert!(k >= m * (1.0 - 1e-15) && k <= 2.0 * m * (1.0 + 1e-15));
        }
    }

    #[test]
    fn minmod_examples() {
        assert_eq!(cell_gradient(1.0, 2.0), 1.0);
        assert_eq!(cell_gradient(-1.0, 2.0), 0.0);
        assert_eq!(cell_gradient(-2.0, -1.0), -1.0);
    }

    #[test]
    fn source_with_constant_omega() {
        let model = MaterialModel::linear_mms();
        let s = cell_source([1.0, 2.0, 3.0], &[[0.0; 3]; 3], RegionId(0), &model, [1.0; 3]).unwrap();
        assert_eq!(s, [3.0, -1.0, -2.0]);
        let s = cell_source([2.0; 3], &[[0.0; 3]; 3], RegionId(0), &model, [1.0; 3]).unwrap();
        assert_eq!(s, [0.0; 3]);
    }

    #[test]
    fn source_exact_for_linear_omega_and_linear_fields() {
        // omega(Te) = 2 + 3 Te, fields linear on the unit-centred cell [-h/2, h/2]^3
        let region = RegionMaterial {
            conductivity: [CoefficientLaw::Constant(1.0); 3],
            exchange: [
                CoefficientLaw::Power { coef: 3.0, exponent: 1.0 },
                CoefficientLaw::Power { coef: 3.0, exponent: 1.0 },
            ],
            energy: RegionMaterial::constant([1.0; 3], [1.0; 2], [1.0; 3]).energy,
        };
        let model = MaterialModel::custom(region).unwrap();
        let h = [0.5, 0.3, 0.2];
        let t0 = [2.0, 1.0, 4.0];
        let g = [[0.7, -0.4, 1.1], [0.2, 0.5, -0.3], [-0.6, 0.1, 0.9]];
        let s = cell_source(t0, &g, RegionId(0), &model, h).unwrap();
        // exact average of 3 Te (Tp - Te) with linear fields:
        // 3 [Te0 (Tp0 - Te0) + sum_m h_m^2/12 ge_m (gp_m - ge_m)]
        for (pair, p) in [(0usize, 1usize), (1, 2)] {
            let mut exact = t0[0] * (t0[p] - t0[0]);
            for m in 0..3 {
                exact += h[m] * h[m] / 12.0 * g[m][0] * (g[m][p] - g[m][0]);
            }
            exact *= 3.0;
            assert!((s[p] + exact).abs() < 1e-12, "pair {pair}");
        }
        assert!((s[0] + s[1] + s[2]).abs() < 1e-14);
    }

    fn box_grid(n: usize) -> StructuredGrid {
        StructuredGrid::new([0.0; 3], [1.0; 3], [n; 3], |_| RegionId(0)).unwrap()
    }

    #[test]
    fn uniform_state_gives_zero() {
        let grid = box_grid(4);
        let t = SpeciesField::uniform(&grid, [1.5; 3]);
        let mut op = SpatialOperator::new(grid.clone(), MaterialModel::icf(), BoundarySpec::insulated(), Scheme::Geno);
        let mut rhs = SpeciesField::zeros(&grid);
        op.evaluate(&t, 0.0, &mut rhs).unwrap();
        assert!(rhs.as_slice().iter().all(|v| *v == [0.0; 3]));
    }

    #[test]
    fn hot_cell_conserves_energy() {
        let grid = StructuredGrid::new([-1.0; 3], [1.0; 3], [6, 5, 4], |p| MaterialModel::icf().region_of(p)).unwrap();
        let mut t = SpeciesField::uniform(&grid, [0.5, 0.4, 0.3]);
        t.set(&grid, [2, 2, 1], [0.8, 0.6, 0.5]);
        for scheme in [Scheme::Geno, Scheme::Linear, Scheme::Central] {
            let mut op = SpatialOperator::new(grid.clone(), MaterialModel::icf(), BoundarySpec::insulated(), scheme);
            let mut rhs = SpeciesField::zeros(&grid);
            op.evaluate(&t, 0.0, &mut rhs).unwrap();
            let (_, total) = crate::grid::total_energy(&rhs, &grid);
            let scale: f64 = rhs.as_slice().iter().flat_map(|v| v.iter()).map(|v| v.abs()).sum::<f64>() * grid.cell_volume();
            assert!(total.abs() <= 1e-13 * scale, "{scheme:?} {total} {scale}");
        }
    }

    #[test]
    fn face_flux_linear_profile() {
        struct Ramp;
        impl crate::grid::AnalyticField for Ramp {
            fn temperature(&self, x: [f64; 3], _t: f64) -> [f64; 3] {
                [1.0 + 2.0 * x[0], 1.0, 1.0]
            }
        }
        let grid = box_grid(4);
        let field = Arc::new(Ramp);
        let t = SpeciesField::from_fn(&grid, |c| crate::grid::AnalyticField::temperature(&*field, grid.cell_center(c), 0.0));
        let bc = BoundarySpec::uniform(BoundaryCondition::Analytic(field));
        let model = MaterialModel::linear_mms();
        for f in reconstruct_all_faces(&t, &grid, &bc, 0.0, Scheme::Geno) {
            let flux = face_flux(&f, &grid, &model).unwrap();
            let expected = if f.axis == 0 { 2.0 * grid.face_area(0) } else { 0.0 };
            assert!((flux[0] - expected).abs() < 1e-12);
            assert!(flux[1].abs() < 1e-14 && flux[2].abs() < 1e-14);
        }
    }

    #[test]
    fn interface_flux_uses_harmonic_mean() {
        // two cells per side of a material interface at x = 0.5, p1 limit gradient 1
        let grid = StructuredGrid::new([0.0; 3], [1.0, 1.0, 1.0], [4, 3, 3], |p| RegionId(usize::from(p[0] > 0.5))).unwrap();
        let mut k_left = RegionMaterial::constant([10.0; 3], [1.0; 2], [1.0; 3]);
        k_left.conductivity[0] = CoefficientLaw::Constant(10.0);
        let mut k_right = k_left.clone();
        k_right.conductivity[0] = CoefficientLaw::Constant(100.0);
        let model = MaterialModel {
            name: "pair".into(),
            regions: vec![k_left, k_right],
            layout: crate::materials::RegionLayout::Uniform,
        };
        let face = FaceReconstruction {
            axis: 0,
            index: [2, 1, 1],
            on_boundary: false,
            average: Default::default(),
            values: [[1.0; 4]; 3],
            gradients: [[1.0; 4], [0.0; 4], [0.0; 4]],
            chi_tangential: [0.0; 3],
        };
        let flux = face_flux(&face, &grid, &model).unwrap();
        assert!((flux[0] / grid.face_area(0) - 2000.0 / 110.0).abs() < 1e-12);
    }

    #[test]
    fn nonpositive_face_temperature_is_reported() {
        let grid = box_grid(4);
        let mut t = SpeciesField::uniform(&grid, [1.0; 3]);
        t.set(&grid, [1, 1, 1], [-1.0, 1.0, 1.0]);
        let mut op = SpatialOperator::new(grid.clone(), MaterialModel::icf(), BoundarySpec::insulated(), Scheme::Geno);
        let mut rhs = SpeciesField::zeros(&grid);
        match op.evaluate(&t, 0.0, &mut rhs) {
            Err(Error::Positivity { location, .. }) => assert!(!matches!(location, Location::Point)),
            other => panic!("expected positivity error, got {other:?}"),
        }
    }
}
