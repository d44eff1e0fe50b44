//! Tangential reconstruction of face averages to the 2x2 Gauss points of a face.
//!
//! Coordinates `(xi, eta)` are tangential and scaled so faces are unit
//! squares; the target face is centered at the origin. The stencil holds
//! thirteen faces:
//!
//! ```text
//!             10
//!          6   2   5
//!     11   3   0   1   9
//!          7   4   8
//!             12
//! ```
//!
//! Members 1..=4 are ordered counter-clockwise, which fixes the four
//! three-face sub-stencils of the second-order ENO candidate.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

use super::{path_chi, PathParams, Scheme};
use crate::error::{Error, Result};

pub const STENCIL_SIZE: usize = 13;
pub const N_COEFFS: usize = 10;

/// Tangential offsets of the stencil members.
pub const OFFSETS: [(i32, i32); STENCIL_SIZE] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (-1, 0),
    (0, -1),
    (1, 1),
    (-1, 1),
    (-1, -1),
    (1, -1),
    (2, 0),
    (0, 2),
    (-2, 0),
    (0, -2),
];

/// 2x2 Gauss points on the unit face.
pub fn gauss_points() -> [(f64, f64); 4] {
    let g = 0.5 / 3f64.sqrt();
    [(-g, -g), (g, -g), (-g, g), (g, g)]
}

/// Zero-mean Taylor basis `1, xi, eta, xi^2-1/12, xi*eta, eta^2-1/12, xi^3, xi^2 eta, xi eta^2, eta^3`.
pub fn taylor_basis(xi: f64, eta: f64) -> [f64; N_COEFFS] {
    [
        1.0,
        xi,
        eta,
        xi * xi - 1.0 / 12.0,
        xi * eta,
        eta * eta - 1.0 / 12.0,
        xi * xi * xi,
        xi * xi * eta,
        xi * eta * eta,
        eta * eta * eta,
    ]
}

/// Average of `x^a` over `[p - 1/2, p + 1/2]`.
fn moment(p: f64, a: i32) -> f64 {
    ((p + 0.5).powi(a + 1) - (p - 0.5).powi(a + 1)) / (a + 1) as f64
}

/// Row of basis averages over the unit face at offset `(p, q)`.
pub fn mean_row(p: f64, q: f64) -> [f64; N_COEFFS] {
    let m = |a: i32, b: i32| moment(p, a) * moment(q, b);
    [
        1.0,
        m(1, 0),
        m(0, 1),
        m(2, 0) - 1.0 / 12.0,
        m(1, 1),
        m(0, 2) - 1.0 / 12.0,
        m(3, 0),
        m(2, 1),
        m(1, 2),
        m(0, 3),
    ]
}

/// The 13x10 matrix of basis averages for the fixed stencil.
pub fn mean_matrix() -> DMatrix<f64> {
    let mut a = DMatrix::zeros(STENCIL_SIZE, N_COEFFS);
    for (m, &(p, q)) in OFFSETS.iter().enumerate() {
        let row = mean_row(p as f64, q as f64);
        for k in 0..N_COEFFS {
            a[(m, k)] = row[k];
        }
    }
    a
}

/// Least-squares fit of `A a ~ b` over rows `1..`, with row 0 met exactly.
///
/// Solves the bordered system `[2 A_r^T A_r, A_0^T; A_0, 0] [a; c] = [2 A_r^T b_r; b_0]`
/// where `c` is the Lagrange multiplier of the row-0 constraint.
pub fn constrained_least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let (rows, n) = a.shape();
    if rows < 1 || b.len() != rows {
        return Err(Error::Reconstruction("stencil and data sizes differ".into()));
    }
    let kkt = bordered_matrix(a);
    let mut rhs = DVector::zeros(n + 1);
    for m in 1..rows {
        for k in 0..n {
            rhs[k] += 2.0 * a[(m, k)] * b[m];
        }
    }
    rhs[n] = b[0];
    let sol = kkt
        .full_piv_lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Reconstruction("singular constrained least-squares system".into()))?;
    Ok(sol.rows(0, n).into_owned())
}

fn bordered_matrix(a: &DMatrix<f64>) -> DMatrix<f64> {
    let (rows, n) = a.shape();
    let ar = a.rows(1, rows - 1);
    let mut kkt = DMatrix::zeros(n + 1, n + 1);
    let normal = ar.transpose() * ar;
    for i in 0..n {
        for j in 0..n {
            kkt[(i, j)] = 2.0 * normal[(i, j)];
        }
        kkt[(i, n)] = a[(0, i)];
        kkt[(n, i)] = a[(0, i)];
    }
    kkt
}

/// Precomputed linear map from the 13 stencil values to the 10 cubic coefficients,
/// and the basis evaluated at the Gauss points.
pub struct TangentialFit {
    projector: [[f64; STENCIL_SIZE]; N_COEFFS],
    basis_at_points: [[f64; N_COEFFS]; 4],
}

impl TangentialFit {
    fn build() -> Result<Self> {
        let a = mean_matrix();
        let kkt = bordered_matrix(&a);
        let lu = kkt.full_piv_lu();
        let mut projector = [[0.0; STENCIL_SIZE]; N_COEFFS];
        for col in 0..STENCIL_SIZE {
            let mut rhs = DVector::zeros(N_COEFFS + 1);
            if col == 0 {
                rhs[N_COEFFS] = 1.0;
            } else {
                for k in 0..N_COEFFS {
                    rhs[k] = 2.0 * a[(col, k)];
                }
            }
            let sol = lu
                .solve(&rhs)
                .ok_or_else(|| Error::Reconstruction("singular tangential stencil".into()))?;
            for k in 0..N_COEFFS {
                projector[k][col] = sol[k];
            }
        }
        let basis_at_points = gauss_points().map(|(x, y)| taylor_basis(x, y));
        Ok(TangentialFit {
            projector,
            basis_at_points,
        })
    }

    /// Shared instance for the fixed stencil layout.
    pub fn get() -> &'static TangentialFit {
        static FIT: OnceLock<TangentialFit> = OnceLock::new();
        FIT.get_or_init(|| TangentialFit::build().expect("fixed tangential stencil has full rank"))
    }

    #[inline]
    pub fn coefficients(&self, b: &[f64; STENCIL_SIZE]) -> [f64; N_COEFFS] {
        let mut out = [0.0; N_COEFFS];
        for (k, row) in self.projector.iter().enumerate() {
            let mut acc = 0.0;
            for m in 0..STENCIL_SIZE {
                acc += row[m] * b[m];
            }
            out[k] = acc;
        }
        out
    }

    #[inline]
    pub fn evaluate(&self, coeffs: &[f64; N_COEFFS]) -> [f64; 4] {
        self.basis_at_points.map(|phi| {
            let mut acc = 0.0;
            for k in 0..N_COEFFS {
                acc += phi[k] * coeffs[k];
            }
            acc
        })
    }
}

/// Second-order ENO candidate selected from the four three-face sub-stencils.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eno2 {
    /// Index 0..4 of the chosen sub-stencil.
    pub stencil: usize,
    /// `(a0, a_xi, a_eta)` of the chosen linear polynomial.
    pub coeffs: [f64; 3],
    /// Squared-slope indicators of all four sub-stencils.
    pub indicators: [f64; 4],
    pub points: [f64; 4],
}

/// Fit a plane to each sub-stencil `{0, k, k+1}` and keep the flattest one.
pub fn eno2(q: &[f64; 5]) -> Eno2 {
    let q0 = q[0];
    let east = q[1] - q0;
    let north = q[2] - q0;
    let west = q0 - q[3];
    let south = q0 - q[4];
    let slopes = [(east, north), (west, north), (west, south), (east, south)];
    let indicators = slopes.map(|(a, b)| a * a + b * b);
    let mut best = 0;
    for k in 1..4 {
        if indicators[k] < indicators[best] {
            best = k;
        }
    }
    let (a1, a2) = slopes[best];
    let points = gauss_points().map(|(x, y)| q0 + a1 * x + a2 * y);
    Eno2 {
        stencil: best,
        coeffs: [q0, a1, a2],
        indicators,
        points,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentialValues {
    pub points: [f64; 4],
    pub chi: f64,
}

/// Blend the constrained cubic and the ENO plane at the Gauss points.
/// `b[0]` is the target face average.
pub fn reconstruct_face_2d(b: &[f64; STENCIL_SIZE], scheme: Scheme) -> TangentialValues {
    let fit = TangentialFit::get();
    if b.iter().all(|&v| v == b[0]) {
        return TangentialValues {
            points: [b[0]; 4],
            chi: 1.0,
        };
    }
    let eno_input = [b[0], b[1], b[2], b[3], b[4]];
    match scheme {
        Scheme::Central => TangentialValues {
            points: eno2(&eno_input).points,
            chi: 0.0,
        },
        Scheme::Linear => TangentialValues {
            points: fit.evaluate(&fit.coefficients(b)),
            chi: 1.0,
        },
        Scheme::Geno => {
            let a = fit.coefficients(b);
            let eno = eno2(&eno_input);
            let chi = tangential_chi(&a, &eno.indicators);
            let cubic = fit.evaluate(&a);
            let mut points = [0.0; 4];
            for i in 0..4 {
                points[i] = chi * cubic[i] + (1.0 - chi) * eno.points[i];
            }
            TangentialValues { points, chi }
        }
    }
}

/// Blend factor from the cubic coefficients and the ENO sub-stencil indicators.
pub fn tangential_chi(a: &[f64; N_COEFFS], eno_indicators: &[f64; 4]) -> f64 {
    let is = eno_indicators;
    // flattest sub-stencil; averaging the opposite-pair minima misses L-shaped steps
    let low = is[0].min(is[1]).min(is[2]).min(is[3]);
    let quad: f64 = a[1..6].iter().map(|c| c * c).sum();
    let cubic: f64 = a[6..10].iter().map(|c| c * c).sum();
    let high = quad + cubic;
    let tau = (high - quad).abs();
    if tau == 0.0 {
        return 1.0;
    }
    path_chi(low, high, tau, &PathParams::TANGENTIAL)
}
