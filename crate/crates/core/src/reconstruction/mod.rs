//! Face reconstruction: central GENO along the face normal, tangential GENO
//! to the face quadrature points, and one-sided boundary closures.

pub mod boundary;
pub(crate) mod faces;
pub mod one_d;
pub mod two_d;

pub use boundary::{reconstruct_boundary_dirichlet, reconstruct_boundary_neumann, Side};
pub use faces::{compute_face_plane, reconstruct_all_faces, FaceAverage, FacePlane, FaceReconstruction};
pub use one_d::{reconstruct_face_1d, smoothness_1d, FaceValue, Smoothness, Stencil1D};
pub use two_d::{constrained_least_squares, eno2, reconstruct_face_2d, TangentialFit, TangentialValues};

/// Which reconstruction the blend factor selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Nonlinear blend driven by the smoothness indicators.
    #[default]
    Geno,
    /// Blend factor fixed at 1: the linear fourth-order reconstruction everywhere.
    Linear,
    /// Blend factor fixed at 0 with single-point face quadrature: second-order central.
    Central,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Geno => "geno",
            Scheme::Linear => "linear4",
            Scheme::Central => "central2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "geno" => Some(Scheme::Geno),
            "linear4" => Some(Scheme::Linear),
            "central2" => Some(Scheme::Central),
            _ => None,
        }
    }
}

/// Parameters of the tanh path function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathParams {
    pub power: i32,
    pub steepness: f64,
    pub epsilon: f64,
}

impl PathParams {
    pub const FACE_NORMAL: PathParams = PathParams {
        power: 2,
        steepness: 20.0,
        epsilon: 1e-15,
    };
    pub const TANGENTIAL: PathParams = PathParams {
        power: 3,
        steepness: 20.0,
        epsilon: 1e-15,
    };
}

fn ratio_terms(low: f64, high: f64, tau: f64, p: &PathParams) -> (f64, f64) {
    let alpha_h = 1.0 + (tau / (high + p.epsilon)).powi(p.power);
    let alpha_l = 1.0 + (tau / (low + p.epsilon)).powi(p.power);
    (alpha_h, alpha_l)
}

/// Smoothness ratio in `[0, 1]`; 1 for smooth data.
pub fn path_alpha(low: f64, high: f64, tau: f64, p: &PathParams) -> f64 {
    let (ah, al) = ratio_terms(low, high, tau, p);
    if al.is_infinite() {
        return 0.0;
    }
    2.0 * ah / (ah + al)
}

/// Blend factor `tanh(C alpha) / tanh(C)`.
#[inline]
pub fn path_chi(low: f64, high: f64, tau: f64, p: &PathParams) -> f64 {
    let alpha = path_alpha(low, high, tau, p);
    (p.steepness * alpha).tanh() / p.steepness.tanh()
}

/// `1 - chi` evaluated without cancellation, for analysing the smooth limit
/// where `chi` rounds to one.
pub fn path_chi_complement(low: f64, high: f64, tau: f64, p: &PathParams) -> f64 {
    let (ah, al) = ratio_terms(low, high, tau, p);
    if al.is_infinite() {
        return 1.0;
    }
    let one_minus_alpha = (al - ah) / (ah + al);
    let c = p.steepness;
    let alpha = 1.0 - one_minus_alpha;
    (c * one_minus_alpha).sinh() / (c.sinh() * (c * alpha).cosh())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_limit_is_one() {
        assert_eq!(path_alpha(0.0, 0.0, 0.0, &PathParams::FACE_NORMAL), 1.0);
        assert_eq!(path_chi(0.0, 0.0, 0.0, &PathParams::FACE_NORMAL), 1.0);
    }

    #[test]
    fn discontinuous_limit_is_zero() {
        let chi = path_chi(0.0, 4.0 / 3.0, 4.0 / 3.0, &PathParams::FACE_NORMAL);
        assert!(chi < 1e-20 && chi >= 0.0);
    }

    #[test]
    fn chi_monotone_in_alpha() {
        let p = PathParams::FACE_NORMAL;
        let mut prev = -1.0;
        for i in 0..=1000 {
            let alpha = i as f64 / 1000.0;
            let chi = (p.steepness * alpha).tanh() / p.steepness.tanh();
            assert!(chi >= prev);
            prev = chi;
        }
        assert!((prev - 1.0).abs() < 1e-15);
    }

    #[test]
    fn complement_matches_direct_when_resolvable() {
        let p = PathParams::FACE_NORMAL;
        for (l, h, t) in [(1.0, 2.0, 3.0), (0.1, 0.5, 0.4), (1e-3, 1.0, 0.01)] {
            let direct = 1.0 - path_chi(l, h, t, &p);
            let comp = path_chi_complement(l, h, t, &p);
            assert!((direct - comp).abs() <= 1e-12 * direct.max(1e-300) + 1e-15, "{direct} {comp}");
        }
    }
}
