//! Central GENO reconstruction along a face normal.

use super::{path_chi, PathParams, Scheme};

/// Four consecutive cell averages straddling a face, `(Q[j-1], Q[j], Q[j+1], Q[j+2])`,
/// with the face between `Q[j]` and `Q[j+1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stencil1D {
    pub q: [f64; 4],
    pub h: f64,
}

impl Stencil1D {
    pub fn new(q: [f64; 4], h: f64) -> Self {
        Stencil1D { q, h }
    }

    /// Same data seen from the opposite direction.
    pub fn reversed(&self) -> Self {
        Stencil1D {
            q: [self.q[3], self.q[2], self.q[1], self.q[0]],
            h: self.h,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Smoothness {
    pub low: f64,
    pub high: f64,
    pub tau: f64,
}

/// Value and normal derivative at a face plus the blend factor used.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FaceValue {
    pub value: f64,
    pub gradient: f64,
    pub chi: f64,
}

/// Indicators of the sub-stencils `{j-1, j}`, `{j+1, j+2}`, `{j-1, j, j+1}`, `{j, j+1, j+2}`.
#[inline]
pub fn substencil_indicators(q: &[f64; 4]) -> [f64; 4] {
    let [a, b, c, d] = *q;
    let is1 = (b - a) * (b - a);
    let is2 = (d - c) * (d - c);
    let s3 = a - 2.0 * b + c;
    let s4 = d - 2.0 * c + b;
    let is3 = 13.0 / 12.0 * (s3 * s3) + 0.25 * ((a - c) * (a - c));
    let is4 = 13.0 / 12.0 * (s4 * s4) + 0.25 * ((d - b) * (d - b));
    [is1, is2, is3, is4]
}

#[inline]
pub fn smoothness_1d(q: &[f64; 4]) -> Smoothness {
    let is = substencil_indicators(q);
    Smoothness {
        low: is[0].min(is[1]).min(is[2].min(is[3])),
        high: is[0].max(is[1]).max(is[2].max(is[3])),
        tau: (is[2] - is[3]).abs(),
    }
}

/// Fourth-order linear face value and derivative from the full stencil.
#[inline]
pub fn high_order(s: &Stencil1D) -> (f64, f64) {
    let [a, b, c, d] = s.q;
    let value = (7.0 * (b + c) - (a + d)) / 12.0;
    let gradient = (15.0 * (c - b) - (d - a)) / (12.0 * s.h);
    (value, gradient)
}

/// Second-order central face value and derivative from the two adjacent cells.
#[inline]
pub fn central(s: &Stencil1D) -> (f64, f64) {
    let [_, b, c, _] = s.q;
    (0.5 * (b + c), (c - b) / s.h)
}

/// Blend factor for the face stencil.
#[inline]
pub fn blend_factor(q: &[f64; 4], params: &PathParams) -> f64 {
    let ind = smoothness_1d(q);
    if ind.tau == 0.0 {
        return 1.0;
    }
    path_chi(ind.low, ind.high, ind.tau, params)
}

/// Blend the fourth-order and central reconstructions at the face.
#[inline]
pub fn reconstruct_face_1d(s: &Stencil1D, scheme: Scheme) -> FaceValue {
    let chi = match scheme {
        Scheme::Geno => blend_factor(&s.q, &PathParams::FACE_NORMAL),
        Scheme::Linear => 1.0,
        Scheme::Central => 0.0,
    };
    let (v1, g1) = central(s);
    if chi == 0.0 {
        return FaceValue { value: v1, gradient: g1, chi };
    }
    let (v3, g3) = high_order(s);
    if chi == 1.0 {
        return FaceValue { value: v3, gradient: g3, chi };
    }
    FaceValue {
        value: chi * v3 + (1.0 - chi) * v1,
        gradient: chi * g3 + (1.0 - chi) * g1,
        chi,
    }
}
