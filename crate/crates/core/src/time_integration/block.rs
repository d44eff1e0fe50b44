//! Block-sparse 3x3 systems on the structured grid and the LU-SGS sweeps.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// Neighbour slots: -x, +x, -y, +y, -z, +z.
pub const NEIGHBOR_OFFSETS: [(usize, isize); 6] = [(0, -1), (0, 1), (1, -1), (1, 1), (2, -1), (2, 1)];

/// One diagonal block and six neighbour blocks per interior cell, cells in
/// lexicographic order with x fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSystem {
    pub n: [usize; 3],
    pub diag: Vec<Matrix3<f64>>,
    pub neighbors: Vec<[Matrix3<f64>; 6]>,
    pub rhs: Vec<Vector3<f64>>,
}

impl BlockSystem {
    pub fn zeros(n: [usize; 3]) -> Self {
        let len = n[0] * n[1] * n[2];
        BlockSystem {
            n,
            diag: vec![Matrix3::zeros(); len],
            neighbors: vec![[Matrix3::zeros(); 6]; len],
            rhs: vec![Vector3::zeros(); len],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    #[inline]
    pub fn cell(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.n[0] * (j + self.n[1] * k)
    }

    /// Compact index of the neighbour in `slot`, if it is inside the grid.
    #[inline]
    pub fn neighbor(&self, idx: usize, slot: usize) -> Option<usize> {
        let (axis, dir) = NEIGHBOR_OFFSETS[slot];
        let stride = match axis {
            0 => 1,
            1 => self.n[0],
            _ => self.n[0] * self.n[1],
        };
        let coord = (idx / stride) % self.n[axis];
        if dir < 0 {
            (coord > 0).then(|| idx - stride)
        } else {
            (coord + 1 < self.n[axis]).then(|| idx + stride)
        }
    }

    /// `A x`.
    pub fn apply(&self, x: &[Vector3<f64>]) -> Vec<Vector3<f64>> {
        (0..self.len())
            .map(|j| {
                let mut y = self.diag[j] * x[j];
                for slot in 0..6 {
                    if let Some(nb) = self.neighbor(j, slot) {
                        y += self.neighbors[j][slot] * x[nb];
                    }
                }
                y
            })
            .collect()
    }

    /// `(L + D) D^-1 (D + U) x`, the matrix the sweeps invert.
    pub fn apply_factored(&self, x: &[Vector3<f64>]) -> Result<Vec<Vector3<f64>>> {
        let inv = self.inverse_diagonals()?;
        let upper: Vec<Vector3<f64>> = (0..self.len())
            .map(|j| {
                let mut y = self.diag[j] * x[j];
                for slot in [1, 3, 5] {
                    if let Some(nb) = self.neighbor(j, slot) {
                        y += self.neighbors[j][slot] * x[nb];
                    }
                }
                inv[j] * y
            })
            .collect();
        Ok((0..self.len())
            .map(|j| {
                let mut y = self.diag[j] * upper[j];
                for slot in [0, 2, 4] {
                    if let Some(nb) = self.neighbor(j, slot) {
                        y += self.neighbors[j][slot] * upper[nb];
                    }
                }
                y
            })
            .collect())
    }

    fn inverse_diagonals(&self) -> Result<Vec<Matrix3<f64>>> {
        self.diag
            .iter()
            .enumerate()
            .map(|(j, d)| {
                d.try_inverse().ok_or_else(|| {
                    let i = j % self.n[0];
                    let jj = (j / self.n[0]) % self.n[1];
                    let k = j / (self.n[0] * self.n[1]);
                    Error::Solver(format!("singular diagonal block at cell ({i}, {jj}, {k})"))
                })
            })
            .collect()
    }
}

/// One forward and one backward block Gauss-Seidel sweep.
pub fn lusgs_solve(sys: &BlockSystem) -> Result<Vec<Vector3<f64>>> {
    let inv = sys.inverse_diagonals()?;
    let len = sys.len();
    let mut y = vec![Vector3::zeros(); len];
    for j in 0..len {
        let mut r = sys.rhs[j];
        for slot in [0, 2, 4] {
            if let Some(nb) = sys.neighbor(j, slot) {
                r -= sys.neighbors[j][slot] * y[nb];
            }
        }
        y[j] = inv[j] * r;
    }
    let mut dw = y;
    for j in (0..len).rev() {
        let mut r = Vector3::zeros();
        for slot in [1, 3, 5] {
            if let Some(nb) = sys.neighbor(j, slot) {
                r += sys.neighbors[j][slot] * dw[nb];
            }
        }
        dw[j] -= inv[j] * r;
    }
    Ok(dw)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_system(n: [usize; 3]) -> BlockSystem {
        BlockSystem::zeros(n)
    }

    #[test]
    fn two_cell_scalar_example() {
        // scalar entries stored in the [0,0] slot, identity elsewhere to keep blocks invertible
        let mut sys = scalar_system([2, 1, 1]);
        for j in 0..2 {
            sys.diag[j] = Matrix3::from_diagonal_element(2.0);
            sys.rhs[j] = Vector3::new(1.0, 1.0, 1.0);
        }
        sys.neighbors[0][1] = Matrix3::from_diagonal_element(-1.0);
        sys.neighbors[1][0] = Matrix3::from_diagonal_element(-1.0);
        let dw = lusgs_solve(&sys).unwrap();
        assert!((dw[0].x - 0.875).abs() < 1e-15);
        assert!((dw[1].x - 0.75).abs() < 1e-15);
        let m = sys.apply_factored(&dw).unwrap();
        for j in 0..2 {
            assert!((m[j] - sys.rhs[j]).norm() < 1e-14);
        }
    }

    #[test]
    fn diagonal_only() {
        let mut sys = scalar_system([3, 3, 3]);
        for j in 0..sys.len() {
            sys.diag[j] = Matrix3::new(2.0, 1.0, 0.0, 0.0, 3.0, 1.0, 1.0, 0.0, 4.0) * (1.0 + j as f64);
            sys.rhs[j] = Vector3::new(1.0, -2.0, j as f64);
        }
        let dw = lusgs_solve(&sys).unwrap();
        for j in 0..sys.len() {
            let exact = sys.diag[j].try_inverse().unwrap() * sys.rhs[j];
            assert!((dw[j] - exact).norm() < 1e-14);
        }
    }

    #[test]
    fn neighbor_indexing() {
        let sys = scalar_system([3, 4, 5]);
        let j = sys.cell(0, 2, 4);
        assert_eq!(sys.neighbor(j, 0), None);
        assert_eq!(sys.neighbor(j, 1), Some(sys.cell(1, 2, 4)));
        assert_eq!(sys.neighbor(j, 2), Some(sys.cell(0, 1, 4)));
        assert_eq!(sys.neighbor(j, 3), Some(sys.cell(0, 3, 4)));
        assert_eq!(sys.neighbor(j, 4), Some(sys.cell(0, 2, 3)));
        assert_eq!(sys.neighbor(j, 5), None);
    }

    #[test]
    fn singular_block_is_reported() {
        let sys = scalar_system([2, 2, 2]);
        match lusgs_solve(&sys) {
            Err(Error::Solver(msg)) => assert!(msg.contains("(0, 0, 0)")),
            other => panic!("{other:?}"),
        }
    }
}
