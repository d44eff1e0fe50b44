use super::boundary::{reconstruct_boundary_dirichlet, reconstruct_boundary_neumann, Side};
use super::one_d::{reconstruct_face_1d, FaceValue, Stencil1D};
use super::two_d::{reconstruct_face_2d, OFFSETS, STENCIL_SIZE};
use super::Scheme;
use crate::grid::{fill_ghosts, tangential_axes, BoundaryCondition, BoundarySpec, StructuredGrid, TemperatureState};

/// Normal-stage result on one face for all species.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FaceAverage {
    pub value: [f64; 3],
    pub gradient: [f64; 3],
    pub chi: [f64; 3],
}

/// Normal-stage results for every face normal to one axis.
///
/// Face `p` (0..=n) separates cells `p - 1` and `p` along the axis. The
/// tangential range is widened by `halo` rows on each side so the tangential
/// stencil of every interior face is available.
#[derive(Debug, Clone, Default)]
pub struct FacePlane {
    axis: usize,
    halo: isize,
    n_normal: usize,
    n_a: usize,
    n_b: usize,
    data: Vec<FaceAverage>,
}

impl FacePlane {
    pub fn axis(&self) -> usize {
        self.axis
    }

    pub fn halo(&self) -> isize {
        self.halo
    }

    #[inline]
    pub fn index(&self, p: isize, ta: isize, tb: isize) -> usize {
        p as usize + self.n_normal * ((ta + self.halo) as usize + self.n_a * (tb + self.halo) as usize)
    }

    #[inline]
    pub fn get(&self, p: isize, ta: isize, tb: isize) -> &FaceAverage {
        &self.data[self.index(p, ta, tb)]
    }

    fn reshape(&mut self, grid: &StructuredGrid, axis: usize, halo: isize) {
        let n = grid.n_cells();
        let (a, b) = tangential_axes(axis);
        self.axis = axis;
        self.halo = halo;
        self.n_normal = n[axis] + 1;
        self.n_a = n[a] + 2 * halo as usize;
        self.n_b = n[b] + 2 * halo as usize;
        // every entry is overwritten by the caller
        let len = self.n_normal * self.n_a * self.n_b;
        if self.data.len() != len {
            self.data.clear();
            self.data.resize(len, FaceAverage::default());
        }
    }

    /// The thirteen tangential neighbours of face `(p, ta, tb)` for species `s`,
    /// taking either the value (`gradient == false`) or the normal derivative.
    #[inline]
    pub fn tangential_stencil(&self, p: isize, ta: isize, tb: isize, s: usize, gradient: bool) -> [f64; STENCIL_SIZE] {
        let mut out = [0.0; STENCIL_SIZE];
        for (m, &(da, db)) in OFFSETS.iter().enumerate() {
            let f = self.get(p, ta + da as isize, tb + db as isize);
            out[m] = if gradient { f.gradient[s] } else { f.value[s] };
        }
        out
    }
}

/// Cell index triple from axis-local coordinates.
#[inline]
pub(crate) fn cell_from(axis: usize, normal: isize, ta: isize, tb: isize) -> [isize; 3] {
    let (a, b) = tangential_axes(axis);
    let mut c = [0isize; 3];
    c[axis] = normal;
    c[a] = ta;
    c[b] = tb;
    c
}

/// Whether face `p` on `axis` is a domain boundary whose condition for species `s`
/// is closed by a one-sided formula rather than by ghost cells.
#[inline]
pub(crate) fn closed_boundary(boundary: &BoundarySpec, axis: usize, p: isize, n: isize, s: usize) -> bool {
    (p == 0 && !boundary.is_analytic(axis, 0, s)) || (p == n && !boundary.is_analytic(axis, 1, s))
}

/// Normal-stage reconstruction of all faces normal to `axis`. Ghosts must be filled.
pub fn compute_face_plane(
    temperature: &TemperatureState,
    grid: &StructuredGrid,
    boundary: &BoundarySpec,
    axis: usize,
    halo: isize,
    scheme: Scheme,
    plane: &mut FacePlane,
) {
    plane.reshape(grid, axis, halo);
    let n = grid.n_cells().map(|v| v as isize);
    let (a, b) = tangential_axes(axis);
    let h = grid.spacing()[axis];
    let stride = grid.strides()[axis];
    let cells = temperature.as_slice();
    let closed_side = [0, 1].map(|side| [0, 1, 2].map(|s| !boundary.is_analytic(axis, side, s)));
    for tb in -halo..n[b] + halo {
        for ta in -halo..n[a] + halo {
            let interior_row = ta >= 0 && ta < n[a] && tb >= 0 && tb < n[b];
            // storage index of the cell two below face 0
            let base = grid.index(cell_from(axis, -2, ta, tb));
            for p in 0..=n[axis] {
                let i0 = base + p as usize * stride;
                let q = [cells[i0], cells[i0 + stride], cells[i0 + 2 * stride], cells[i0 + 3 * stride]];
                let mut out = FaceAverage::default();
                for s in 0..3 {
                    let closed = interior_row
                        && ((p == 0 && closed_side[0][s]) || (p == n[axis] && closed_side[1][s]));
                    let fv = if closed {
                        let side = if p == 0 { Side::Low } else { Side::High };
                        let (q1, q2) = match side {
                            Side::Low => (q[2][s], q[3][s]),
                            Side::High => (q[1][s], q[0][s]),
                        };
                        boundary_face(boundary.condition(axis, side as usize, s), side, q1, q2, h)
                    } else {
                        reconstruct_face_1d(&Stencil1D::new([q[0][s], q[1][s], q[2][s], q[3][s]], h), scheme)
                    };
                    out.value[s] = fv.value;
                    out.gradient[s] = fv.gradient;
                    out.chi[s] = fv.chi;
                }
                let idx = plane.index(p, ta, tb);
                plane.data[idx] = out;
            }
        }
    }
}

fn boundary_face(bc: &BoundaryCondition, side: Side, q1: f64, q2: f64, h: f64) -> FaceValue {
    match *bc {
        BoundaryCondition::Dirichlet(v) => reconstruct_boundary_dirichlet(v, q1, q2, h, side),
        BoundaryCondition::Neumann(g) => {
            // outward normal derivative to axis derivative
            let qbx = if side == Side::Low { -g } else { g };
            reconstruct_boundary_neumann(qbx, q1, q2, h, side)
        }
        BoundaryCondition::Analytic(_) => unreachable!("analytic faces use ghost cells"),
    }
}

/// Whether the tangential stencil of face row `(ta, tb)` normal to `axis` reaches
/// ghost faces behind a Dirichlet wall for species `s`. Odd reflection puts a
/// jump right at the wall that the tangential indicator does not reliably flag,
/// so these faces keep the normal-stage value at every quadrature point.
pub(crate) fn near_dirichlet_wall(boundary: &BoundarySpec, n: [isize; 3], axis: usize, ta: isize, tb: isize, s: usize) -> bool {
    let (a, b) = tangential_axes(axis);
    let wall = |ax: usize, t: isize| {
        (t < 2 && boundary.is_dirichlet(ax, 0, s)) || (t >= n[ax] - 2 && boundary.is_dirichlet(ax, 1, s))
    };
    wall(a, ta) || wall(b, tb)
}

/// Point values and normal derivatives at the four face quadrature points
/// for species `s`, plus the tangential blend factor of the value field.
#[inline]
pub(crate) fn quadrature_states(
    plane: &FacePlane,
    p: isize,
    ta: isize,
    tb: isize,
    s: usize,
    closed: bool,
    scheme: Scheme,
) -> ([f64; 4], [f64; 4], f64) {
    let f = plane.get(p, ta, tb);
    if closed || scheme == Scheme::Central {
        return ([f.value[s]; 4], [f.gradient[s]; 4], 1.0);
    }
    let tv = reconstruct_face_2d(&plane.tangential_stencil(p, ta, tb, s, false), scheme);
    let tg = reconstruct_face_2d(&plane.tangential_stencil(p, ta, tb, s, true), scheme);
    (tv.points, tg.points, tv.chi)
}

/// Full two-stage reconstruction on one face.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceReconstruction {
    pub axis: usize,
    /// Cell on the high side of the face.
    pub index: [isize; 3],
    pub on_boundary: bool,
    /// Normal-stage face average per species.
    pub average: [FaceValue; 3],
    /// Point values at the quadrature points, per species.
    pub values: [[f64; 4]; 3],
    /// Normal derivatives at the quadrature points, per species.
    pub gradients: [[f64; 4]; 3],
    pub chi_tangential: [f64; 3],
}

/// Reconstruct every face of the grid. Ghost cells are refreshed from `boundary` at time `t`.
pub fn reconstruct_all_faces(
    temperature: &TemperatureState,
    grid: &StructuredGrid,
    boundary: &BoundarySpec,
    t: f64,
    scheme: Scheme,
) -> Vec<FaceReconstruction> {
    let mut state = temperature.clone();
    fill_ghosts(&mut state, grid, boundary, t);
    let n = grid.n_cells().map(|v| v as isize);
    let mut out = Vec::new();
    let mut plane = FacePlane::default();
    for axis in 0..3 {
        compute_face_plane(&state, grid, boundary, axis, 2, scheme, &mut plane);
        let (a, b) = tangential_axes(axis);
        for tb in 0..n[b] {
            for ta in 0..n[a] {
                for p in 0..=n[axis] {
                    let f = *plane.get(p, ta, tb);
                    let mut rec = FaceReconstruction {
                        axis,
                        index: cell_from(axis, p, ta, tb),
                        on_boundary: p == 0 || p == n[axis],
                        average: [FaceValue::default(); 3],
                        values: [[0.0; 4]; 3],
                        gradients: [[0.0; 4]; 3],
                        chi_tangential: [1.0; 3],
                    };
                    for s in 0..3 {
                        rec.average[s] = FaceValue {
                            value: f.value[s],
                            gradient: f.gradient[s],
                            chi: f.chi[s],
                        };
                        let closed = closed_boundary(boundary, axis, p, n[axis], s)
                            || near_dirichlet_wall(boundary, n, axis, ta, tb, s);
                        let (v, g, chi) = quadrature_states(&plane, p, ta, tb, s, closed, scheme);
                        rec.values[s] = v;
                        rec.gradients[s] = g;
                        rec.chi_tangential[s] = chi;
                    }
                    out.push(rec);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{AnalyticField, RegionId, Species, SpeciesField};
    use std::sync::Arc;

    #[test]
    fn wall_band_covers_two_rows() {
        let mut boundary = BoundarySpec::insulated();
        boundary.set(1, 1, Species::Radiation, BoundaryCondition::Dirichlet(2.0));
        let n = [4, 6, 6];
        let rows: Vec<isize> = (0..6).filter(|&ta| near_dirichlet_wall(&boundary, n, 0, ta, 3, 2)).collect();
        assert_eq!(rows, vec![4, 5]);
        assert!(!near_dirichlet_wall(&boundary, n, 0, 5, 3, 0));
        // x faces of row y=5 lie along the wall only for axis 0 and 2
        assert!(near_dirichlet_wall(&boundary, n, 2, 0, 5, 2));
        assert!(!near_dirichlet_wall(&boundary, n, 1, 0, 0, 2));
    }

    struct Linear;
    impl AnalyticField for Linear {
        fn temperature(&self, x: [f64; 3], _t: f64) -> [f64; 3] {
            [1.0 + 2.0 * x[0] - x[1] + 0.5 * x[2], 3.0 + x[1], 2.0 - x[2]]
        }
    }

    fn grid() -> StructuredGrid {
        StructuredGrid::new([0.0; 3], [1.0, 0.8, 0.6], [5, 4, 3], |_| RegionId(0)).unwrap()
    }

    #[test]
    fn linear_field_is_exact() {
        let g = grid();
        let field = Arc::new(Linear);
        let t = SpeciesField::from_fn(&g, |c| field.temperature(g.cell_center(c), 0.0));
        let bc = BoundarySpec::uniform(BoundaryCondition::Analytic(field.clone()));
        let faces = reconstruct_all_faces(&t, &g, &bc, 0.0, Scheme::Geno);
        let slopes = [[2.0, -1.0, 0.5], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]];
        let pts = super::super::two_d::gauss_points();
        for f in &faces {
            let (a, b) = tangential_axes(f.axis);
            let h = g.spacing();
            let mut center = g.cell_center(f.index);
            center[f.axis] -= 0.5 * h[f.axis];
            for s in 0..3 {
                assert_eq!(f.average[s].chi, 1.0);
                for (q, &(xi, eta)) in pts.iter().enumerate() {
                    let mut x = center;
                    x[a] += xi * h[a];
                    x[b] += eta * h[b];
                    let exact = field.temperature(x, 0.0)[s];
                    assert!((f.values[s][q] - exact).abs() < 1e-12, "{f:?}");
                    assert!((f.gradients[s][q] - slopes[s][f.axis]).abs() < 1e-11);
                }
            }
        }
    }

    #[test]
    fn uniform_field_has_zero_gradients() {
        let g = grid();
        let t = SpeciesField::uniform(&g, [2.0, 3.0, 4.0]);
        for f in reconstruct_all_faces(&t, &g, &BoundarySpec::insulated(), 0.0, Scheme::Geno) {
            for s in 0..3 {
                assert!(f.gradients[s].iter().all(|&v| v == 0.0));
                assert!(f.values[s].iter().all(|&v| v == [2.0, 3.0, 4.0][s]));
            }
        }
    }

    #[test]
    fn dirichlet_boundary_faces() {
        let g = StructuredGrid::new([0.0; 3], [300.0, 300.0, 9.0], [100, 100, 3], |_| RegionId(0)).unwrap();
        let bc = BoundarySpec::insulated().with(0, 0, Species::Radiation, BoundaryCondition::Dirichlet(100.0));
        let t = SpeciesField::uniform(&g, [3e-4; 3]);
        let faces = reconstruct_all_faces(&t, &g, &bc, 0.0, Scheme::Geno);
        let expected = -(6.0 * 100.0 - 7.0 * 3e-4 + 3e-4) / (2.0 * 3.0);
        let left: Vec<_> = faces.iter().filter(|f| f.axis == 0 && f.index[0] == 0).collect();
        assert_eq!(left.len(), 300);
        for f in left {
            assert!(f.on_boundary);
            assert_eq!(f.values[2], [100.0; 4]);
            assert!((f.gradients[2][0] - expected).abs() < 1e-12);
            assert_eq!(f.gradients[0], [0.0; 4]);
        }
    }
}
