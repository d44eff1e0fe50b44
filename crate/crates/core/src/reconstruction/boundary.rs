//! One-sided face reconstruction on domain boundaries.
//!
//! Both closures fit a quadratic to the two boundary-adjacent cell averages
//! plus the prescribed boundary datum. `q1` is the cell touching the boundary,
//! `q2` the next one inward. Gradients are `d/dx` along the axis, not along
//! the outward normal.

use super::FaceValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Low,
    High,
}

/// Prescribed boundary value `qb`; returns the value and the axis derivative.
pub fn reconstruct_boundary_dirichlet(qb: f64, q1: f64, q2: f64, dx: f64, side: Side) -> FaceValue {
    let g = -(6.0 * qb - 7.0 * q1 + q2) / (2.0 * dx);
    FaceValue {
        value: qb,
        gradient: match side {
            Side::Low => g,
            Side::High => -g,
        },
        chi: 1.0,
    }
}

/// Prescribed axis derivative `qbx`; returns the boundary value and `qbx`.
pub fn reconstruct_boundary_neumann(qbx: f64, q1: f64, q2: f64, dx: f64, side: Side) -> FaceValue {
    let value = match side {
        Side::Low => (7.0 * q1 - q2 - 2.0 * dx * qbx) / 6.0,
        Side::High => (7.0 * q1 - q2 + 2.0 * dx * qbx) / 6.0,
    };
    FaceValue {
        value,
        gradient: qbx,
        chi: 1.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirichlet_exact_on_linear() {
        // Q(x) = x with the boundary at x = 0
        let f = reconstruct_boundary_dirichlet(0.0, 0.5, 1.5, 1.0, Side::Low);
        assert_eq!(f.value, 0.0);
        assert!((f.gradient - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dirichlet_constant_profile() {
        let f = reconstruct_boundary_dirichlet(4.0, 4.0, 4.0, 0.3, Side::Low);
        assert_eq!(f.gradient, 0.0);
    }

    #[test]
    fn dirichlet_high_side_mirrors_sign() {
        let lo = reconstruct_boundary_dirichlet(2.0, 1.0, 0.5, 0.5, Side::Low);
        let hi = reconstruct_boundary_dirichlet(2.0, 1.0, 0.5, 0.5, Side::High);
        assert_eq!(hi.gradient, -lo.gradient);
        // Q(x) = -x on [.., 0]: cells -0.5 -> 0.5, -1.5 -> 1.5, boundary value 0
        let f = reconstruct_boundary_dirichlet(0.0, 0.5, 1.5, 1.0, Side::High);
        assert!((f.gradient + 1.0).abs() < 1e-15);
    }

    #[test]
    fn neumann_exact_on_linear() {
        let f = reconstruct_boundary_neumann(1.0, 0.5, 1.5, 1.0, Side::Low);
        assert!(f.value.abs() < 1e-15);
        assert_eq!(f.gradient, 1.0);
        // high side, Q(x) = x on [-2, 0]
        let f = reconstruct_boundary_neumann(1.0, -0.5, -1.5, 1.0, Side::High);
        assert!(f.value.abs() < 1e-15);
    }

    #[test]
    fn neumann_constant_profile() {
        let f = reconstruct_boundary_neumann(0.0, 3.0, 3.0, 2.0, Side::Low);
        assert_eq!(f.value, 3.0);
    }

    #[test]
    fn neumann_quadratic() {
        // Q(x) = x^2: averages over [0,1] and [1,2] are 1/3 and 7/3
        let f = reconstruct_boundary_neumann(0.0, 1.0 / 3.0, 7.0 / 3.0, 1.0, Side::Low);
        assert!(f.value.abs() < 1e-15);
    }
}
