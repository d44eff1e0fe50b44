//! Structured Cartesian grid, ghost layers and per-cell species fields.
//!
//! Storage is a padded lattice of `(n + 2 * N_GHOST)` cells per axis with x
//! varying fastest. Interior cells are addressed with signed indices
//! `0..n`; ghost cells with `-N_GHOST..0` and `n..n + N_GHOST`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Ghost layers per side. The four-cell face stencil reaches two cells past a face.
pub const N_GHOST: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Species {
    Electron,
    Ion,
    Radiation,
}

impl Species {
    pub const ALL: [Species; 3] = [Species::Electron, Species::Ion, Species::Radiation];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Short field name used in output files.
    pub fn label(self) -> &'static str {
        match self {
            Species::Electron => "Te",
            Species::Ion => "Ti",
            Species::Radiation => "Tr",
        }
    }
}

impl fmt::Display for Species {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Species::Electron => "electron",
            Species::Ion => "ion",
            Species::Radiation => "radiation",
        };
        f.write_str(name)
    }
}

/// Material tag of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RegionId(pub usize);

#[derive(Debug, Clone)]
pub struct StructuredGrid {
    lo: [f64; 3],
    hi: [f64; 3],
    n: [usize; 3],
    spacing: [f64; 3],
    padded: [usize; 3],
    strides: [usize; 3],
    region: Vec<RegionId>,
}

impl StructuredGrid {
    /// Build a grid and tag every cell with `classifier(cell_center)`.
    /// Ghost cells inherit the region of the nearest interior cell.
    pub fn new<F>(lo: [f64; 3], hi: [f64; 3], n: [usize; 3], classifier: F) -> Result<Self>
    where
        F: Fn([f64; 3]) -> RegionId,
    {
        for m in 0..3 {
            if !(hi[m] - lo[m] > 0.0) || !lo[m].is_finite() || !hi[m].is_finite() {
                return Err(Error::config(format!(
                    "axis {m}: domain extent [{}, {}] is not positive",
                    lo[m], hi[m]
                )));
            }
            if n[m] < 3 {
                return Err(Error::config(format!(
                    "axis {m}: need at least 3 cells, got {}",
                    n[m]
                )));
            }
        }
        let spacing = [0, 1, 2].map(|m| (hi[m] - lo[m]) / n[m] as f64);
        let padded = n.map(|c| c + 2 * N_GHOST);
        let strides = [1, padded[0], padded[0] * padded[1]];
        let mut grid = StructuredGrid {
            lo,
            hi,
            n,
            spacing,
            padded,
            strides,
            region: Vec::new(),
        };

        let mut interior = Vec::with_capacity(n[0] * n[1] * n[2]);
        for k in 0..n[2] as isize {
            for j in 0..n[1] as isize {
                for i in 0..n[0] as isize {
                    interior.push(classifier(grid.cell_center([i, j, k])));
                }
            }
        }
        let mut region = vec![RegionId(0); grid.padded_len()];
        for (idx, [i, j, k]) in grid.all_cells().enumerate() {
            let c = [i, j, k]
                .iter()
                .zip(n.iter())
                .map(|(&x, &len)| x.clamp(0, len as isize - 1) as usize)
                .collect::<Vec<_>>();
            region[idx] = interior[c[0] + n[0] * (c[1] + n[1] * c[2])];
        }
        grid.region = region;
        Ok(grid)
    }

    pub fn lo(&self) -> [f64; 3] {
        self.lo
    }

    pub fn hi(&self) -> [f64; 3] {
        self.hi
    }

    pub fn n_cells(&self) -> [usize; 3] {
        self.n
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn interior_count(&self) -> usize {
        self.n.iter().product()
    }

    pub fn padded_len(&self) -> usize {
        self.padded.iter().product()
    }

    pub fn strides(&self) -> [usize; 3] {
        self.strides
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing[0] * self.spacing[1] * self.spacing[2]
    }

    /// Area of a face normal to `axis`.
    pub fn face_area(&self, axis: usize) -> f64 {
        let (a, b) = tangential_axes(axis);
        self.spacing[a] * self.spacing[b]
    }

    /// Linear storage index of a (possibly ghost) cell.
    #[inline]
    pub fn index(&self, c: [isize; 3]) -> usize {
        let g = N_GHOST as isize;
        debug_assert!((0..3).all(|m| c[m] >= -g && c[m] < self.n[m] as isize + g));
        (c[0] + g) as usize * self.strides[0]
            + (c[1] + g) as usize * self.strides[1]
            + (c[2] + g) as usize * self.strides[2]
    }

    pub fn cell_center(&self, c: [isize; 3]) -> [f64; 3] {
        [0, 1, 2].map(|m| self.lo[m] + (c[m] as f64 + 0.5) * self.spacing[m])
    }

    /// Lower and upper corners of a (possibly ghost) cell.
    pub fn cell_bounds(&self, c: [isize; 3]) -> ([f64; 3], [f64; 3]) {
        let lo = [0, 1, 2].map(|m| self.lo[m] + c[m] as f64 * self.spacing[m]);
        let hi = [0, 1, 2].map(|m| self.lo[m] + (c[m] + 1) as f64 * self.spacing[m]);
        (lo, hi)
    }

    pub fn region(&self, c: [isize; 3]) -> RegionId {
        self.region[self.index(c)]
    }

    pub fn region_at(&self, idx: usize) -> RegionId {
        self.region[idx]
    }

    pub fn is_interior(&self, c: [isize; 3]) -> bool {
        (0..3).all(|m| c[m] >= 0 && c[m] < self.n[m] as isize)
    }

    /// Interior cells in lexicographic order, x fastest.
    pub fn interior_cells(&self) -> impl Iterator<Item = [isize; 3]> + '_ {
        let n = self.n.map(|v| v as isize);
        (0..n[2]).flat_map(move |k| (0..n[1]).flat_map(move |j| (0..n[0]).map(move |i| [i, j, k])))
    }

    /// Every cell including ghosts, in storage order.
    pub fn all_cells(&self) -> impl Iterator<Item = [isize; 3]> + '_ {
        let g = N_GHOST as isize;
        let n = self.n.map(|v| v as isize);
        (-g..n[2] + g).flat_map(move |k| {
            (-g..n[1] + g).flat_map(move |j| (-g..n[0] + g).map(move |i| [i, j, k]))
        })
    }

    /// Interior cell whose closed extent contains `point`; points on a shared
    /// face go to the upper cell.
    pub fn locate(&self, point: [f64; 3]) -> Option<[isize; 3]> {
        let mut c = [0isize; 3];
        for m in 0..3 {
            let s = (point[m] - self.lo[m]) / self.spacing[m];
            if !(s >= -1e-9 && s <= self.n[m] as f64 + 1e-9) {
                return None;
            }
            c[m] = (s.floor() as isize).clamp(0, self.n[m] as isize - 1);
        }
        Some(c)
    }
}

/// The two axes spanning a face normal to `axis`.
pub fn tangential_axes(axis: usize) -> (usize, usize) {
    match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

/// Per-cell 3-vector over the padded lattice, species order (e, i, r).
///
/// Holds temperatures or energy densities depending on context; see
/// [`TemperatureState`] and [`EnergyState`].
#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesField {
    values: Vec<[f64; 3]>,
}

pub type TemperatureState = SpeciesField;
pub type EnergyState = SpeciesField;

impl SpeciesField {
    pub fn zeros(grid: &StructuredGrid) -> Self {
        SpeciesField {
            values: vec![[0.0; 3]; grid.padded_len()],
        }
    }

    pub fn uniform(grid: &StructuredGrid, value: [f64; 3]) -> Self {
        SpeciesField {
            values: vec![value; grid.padded_len()],
        }
    }

    /// Interior cells from `f(cell)`; ghosts left at zero.
    pub fn from_fn(grid: &StructuredGrid, mut f: impl FnMut([isize; 3]) -> [f64; 3]) -> Self {
        let mut field = Self::zeros(grid);
        for c in grid.interior_cells() {
            field.values[grid.index(c)] = f(c);
        }
        field
    }

    #[inline]
    pub fn get(&self, grid: &StructuredGrid, c: [isize; 3]) -> [f64; 3] {
        self.values[grid.index(c)]
    }

    #[inline]
    pub fn set(&mut self, grid: &StructuredGrid, c: [isize; 3], v: [f64; 3]) {
        let idx = grid.index(c);
        self.values[idx] = v;
    }

    pub fn as_slice(&self) -> &[[f64; 3]] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [[f64; 3]] {
        &mut self.values
    }

    /// Per-species minimum and maximum over interior cells.
    pub fn bounds(&self, grid: &StructuredGrid) -> ([f64; 3], [f64; 3]) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for c in grid.interior_cells() {
            let v = self.get(grid, c);
            for s in 0..3 {
                lo[s] = lo[s].min(v[s]);
                hi[s] = hi[s].max(v[s]);
            }
        }
        (lo, hi)
    }
}

/// Analytic temperature field used to prescribe ghost cells.
pub trait AnalyticField: Send + Sync {
    fn temperature(&self, x: [f64; 3], t: f64) -> [f64; 3];

    /// Cell average over the box `[lo, hi]`. Defaults to 2x2x2 Gauss quadrature.
    fn cell_average(&self, lo: [f64; 3], hi: [f64; 3], t: f64) -> [f64; 3] {
        gauss_cell_average(lo, hi, |x| self.temperature(x, t))
    }
}

/// 2x2x2 tensor Gauss average of `f` over a box.
pub fn gauss_cell_average(lo: [f64; 3], hi: [f64; 3], f: impl Fn([f64; 3]) -> [f64; 3]) -> [f64; 3] {
    let g = 0.5 / 3f64.sqrt();
    let mid = [0, 1, 2].map(|m| 0.5 * (lo[m] + hi[m]));
    let len = [0, 1, 2].map(|m| hi[m] - lo[m]);
    let mut acc = [0.0; 3];
    for sz in [-g, g] {
        for sy in [-g, g] {
            for sx in [-g, g] {
                let x = [mid[0] + sx * len[0], mid[1] + sy * len[1], mid[2] + sz * len[2]];
                let v = f(x);
                for s in 0..3 {
                    acc[s] += v[s];
                }
            }
        }
    }
    acc.map(|a| a * 0.125)
}

#[derive(Clone)]
pub enum BoundaryCondition {
    /// Fixed boundary temperature.
    Dirichlet(f64),
    /// Prescribed outward normal derivative `dT/dn`.
    Neumann(f64),
    /// Ghost cells taken from an analytic solution; the boundary face is then
    /// reconstructed like an interior face.
    Analytic(Arc<dyn AnalyticField>),
}

impl fmt::Debug for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryCondition::Dirichlet(v) => write!(f, "Dirichlet({v})"),
            BoundaryCondition::Neumann(g) => write!(f, "Neumann({g})"),
            BoundaryCondition::Analytic(_) => f.write_str("Analytic"),
        }
    }
}

/// How analytic ghost values are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GhostAveraging {
    /// Point value at the ghost cell center.
    #[default]
    Midpoint,
    /// Cell average via [`AnalyticField::cell_average`].
    CellAverage,
}

/// One condition per species on each of the six domain faces.
///
/// Faces are numbered `2 * axis + side` with side 0 the low face.
#[derive(Debug, Clone)]
pub struct BoundarySpec {
    faces: [[BoundaryCondition; 3]; 6],
    pub ghost_averaging: GhostAveraging,
}

impl BoundarySpec {
    pub fn uniform(bc: BoundaryCondition) -> Self {
        BoundarySpec {
            faces: std::array::from_fn(|_| std::array::from_fn(|_| bc.clone())),
            ghost_averaging: GhostAveraging::Midpoint,
        }
    }

    /// Zero-flux on every face for every species.
    pub fn insulated() -> Self {
        Self::uniform(BoundaryCondition::Neumann(0.0))
    }

    pub fn set(&mut self, axis: usize, side: usize, species: Species, bc: BoundaryCondition) {
        self.faces[2 * axis + side][species.index()] = bc;
    }

    pub fn with(mut self, axis: usize, side: usize, species: Species, bc: BoundaryCondition) -> Self {
        self.set(axis, side, species, bc);
        self
    }

    pub fn condition(&self, axis: usize, side: usize, species: usize) -> &BoundaryCondition {
        &self.faces[2 * axis + side][species]
    }

    pub fn is_analytic(&self, axis: usize, side: usize, species: usize) -> bool {
        matches!(self.condition(axis, side, species), BoundaryCondition::Analytic(_))
    }

    pub fn is_dirichlet(&self, axis: usize, side: usize, species: usize) -> bool {
        matches!(self.condition(axis, side, species), BoundaryCondition::Dirichlet(_))
    }
}

/// Fill every ghost cell of `state` from the interior and the boundary spec.
///
/// Axes are processed in order x, y, z; each pass covers the ghost layers
/// already written by earlier passes, so edge and corner ghosts are defined.
pub fn fill_ghosts(state: &mut TemperatureState, grid: &StructuredGrid, boundary: &BoundarySpec, t: f64) {
    let n = grid.n_cells().map(|v| v as isize);
    let g = N_GHOST as isize;
    for axis in 0..3 {
        let (a, b) = tangential_axes(axis);
        // Tangential ranges: axes already processed include their ghosts.
        let range = |m: usize| if m < axis { (-g, n[m] + g) } else { (0, n[m]) };
        let (ra, rb) = (range(a), range(b));
        for side in 0..2 {
            for layer in 0..g {
                let (ghost_n, mirror_n) = if side == 0 {
                    (-1 - layer, layer)
                } else {
                    (n[axis] + layer, n[axis] - 1 - layer)
                };
                let distance = (2 * layer + 1) as f64 * grid.spacing()[axis];
                for tb in rb.0..rb.1 {
                    for ta in ra.0..ra.1 {
                        let mut ghost = [0isize; 3];
                        ghost[axis] = ghost_n;
                        ghost[a] = ta;
                        ghost[b] = tb;
                        let mut mirror = ghost;
                        mirror[axis] = mirror_n;
                        let inner = state.get(grid, mirror);
                        let mut analytic: Option<[f64; 3]> = None;
                        let mut out = [0.0; 3];
                        for s in 0..3 {
                            out[s] = match boundary.condition(axis, side, s) {
                                BoundaryCondition::Dirichlet(v) => 2.0 * v - inner[s],
                                BoundaryCondition::Neumann(gn) => inner[s] + gn * distance,
                                BoundaryCondition::Analytic(field) => {
                                    let vals = *analytic.get_or_insert_with(|| match boundary.ghost_averaging {
                                        GhostAveraging::Midpoint => field.temperature(grid.cell_center(ghost), t),
                                        GhostAveraging::CellAverage => {
                                            let (lo, hi) = grid.cell_bounds(ghost);
                                            field.cell_average(lo, hi, t)
                                        }
                                    });
                                    vals[s]
                                }
                            };
                        }
                        state.set(grid, ghost, out);
                    }
                }
            }
        }
    }
}

/// Total energy per species, `sum |cell| * W`, and the sum over species.
/// Cells are summed in fixed lexicographic order.
pub fn total_energy(state: &EnergyState, grid: &StructuredGrid) -> ([f64; 3], f64) {
    let vol = grid.cell_volume();
    let mut per = [0.0; 3];
    for c in grid.interior_cells() {
        let w = state.get(grid, c);
        for s in 0..3 {
            per[s] += vol * w[s];
        }
    }
    (per, per[0] + per[1] + per[2])
}
