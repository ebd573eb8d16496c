//! Element quadrature.
//!
//! Two families are provided. The fixed rules (2-point Gauss on intervals,
//! 3-point on triangles) are used for every reported weak residual so that
//! residual values are reproducible. The phase-resolved rules split an
//! element along the level sets `u = 0` and `u = eps` of the P1 field and
//! integrate each piece separately; the smoothed coefficient and load are
//! smooth on each piece, so the split integrals depend continuously on the
//! nodal values however small `eps` is.

use crate::mesh::Mesh;

/// Quadrature point in element barycentric coordinates with an absolute
/// weight (the element measure is already folded in).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadPoint {
    pub bary: [f64; 3],
    pub weight: f64,
}

const G2: f64 = 0.211_324_865_405_187_1; // (1 - 1/sqrt 3) / 2

/// The fixed rule for element `e`.
pub fn fixed_rule(mesh: &Mesh, e: usize) -> Vec<QuadPoint> {
    let m = mesh.measure(e);
    if mesh.dim() == 1 {
        vec![
            QuadPoint { bary: [1.0 - G2, G2, 0.0], weight: 0.5 * m },
            QuadPoint { bary: [G2, 1.0 - G2, 0.0], weight: 0.5 * m },
        ]
    } else {
        let (a, b) = (2.0 / 3.0, 1.0 / 6.0);
        [[a, b, b], [b, a, b], [b, b, a]].iter().map(|&bary| QuadPoint { bary, weight: m / 3.0 }).collect()
    }
}

// 3-point Gauss-Legendre on [0,1], exact to degree 5.
const GL3: [(f64, f64); 3] = [
    (0.112_701_665_379_258_3, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.887_298_334_620_741_7, 5.0 / 18.0),
];

// Six-point symmetric rule on the reference triangle, exact to degree 4.
const D4_A: f64 = 0.445_948_490_915_965;
const D4_WA: f64 = 0.223_381_589_678_011;
const D4_B: f64 = 0.091_576_213_509_771;
const D4_WB: f64 = 0.109_951_743_655_322;

fn tri_rule() -> [([f64; 3], f64); 6] {
    let (a, b) = (D4_A, D4_B);
    [
        ([a, a, 1.0 - 2.0 * a], D4_WA),
        ([a, 1.0 - 2.0 * a, a], D4_WA),
        ([1.0 - 2.0 * a, a, a], D4_WA),
        ([b, b, 1.0 - 2.0 * b], D4_WB),
        ([b, 1.0 - 2.0 * b, b], D4_WB),
        ([1.0 - 2.0 * b, b, b], D4_WB),
    ]
}

/// Phase-resolved points for the P1 field with local nodal values `u` on an
/// element of measure `measure`. The pieces are `u <= 0`, `0 <= u <= eps`
/// and `u >= eps`; an element lying in a single piece keeps the plain rule.
pub fn phase_rule(dim: usize, measure: f64, u: &[f64], eps: f64, out: &mut Vec<QuadPoint>) {
    out.clear();
    let lo = u.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let single = hi <= 0.0 || lo >= eps || (lo >= 0.0 && hi <= eps);
    if dim == 1 {
        let mut cuts = vec![0.0, 1.0];
        if !single {
            for level in [0.0, eps] {
                let d = u[1] - u[0];
                if d != 0.0 {
                    let t = (level - u[0]) / d;
                    if t > 0.0 && t < 1.0 {
                        cuts.push(t);
                    }
                }
            }
            cuts.sort_by(|a, b| a.total_cmp(b));
        }
        for w in cuts.windows(2) {
            let len = w[1] - w[0];
            if len <= 0.0 {
                continue;
            }
            for &(s, wt) in &GL3 {
                let t = w[0] + s * len;
                out.push(QuadPoint { bary: [1.0 - t, t, 0.0], weight: wt * len * measure });
            }
        }
        return;
    }

    let corners = [
        Vertex { bary: [1.0, 0.0, 0.0], u: u[0] },
        Vertex { bary: [0.0, 1.0, 0.0], u: u[1] },
        Vertex { bary: [0.0, 0.0, 1.0], u: u[2] },
    ];
    if single {
        push_polygon(&corners, measure, out);
        return;
    }
    let below = clip(&corners, 0.0, Side::Below);
    push_polygon(&below, measure, out);
    let band = clip(&clip(&corners, 0.0, Side::Above), eps, Side::Below);
    push_polygon(&band, measure, out);
    let above = clip(&corners, eps, Side::Above);
    push_polygon(&above, measure, out);
}

#[derive(Debug, Clone, Copy)]
struct Vertex {
    bary: [f64; 3],
    u: f64,
}

#[derive(Clone, Copy, PartialEq)]
enum Side {
    Below,
    Above,
}

/// Sutherland-Hodgman clip of a convex polygon against `u <= c` or `u >= c`.
fn clip(poly: &[Vertex], c: f64, side: Side) -> Vec<Vertex> {
    let inside = |v: &Vertex| match side {
        Side::Below => v.u <= c,
        Side::Above => v.u >= c,
    };
    let mut out = Vec::with_capacity(poly.len() + 2);
    for k in 0..poly.len() {
        let (p, q) = (poly[k], poly[(k + 1) % poly.len()]);
        let (pin, qin) = (inside(&p), inside(&q));
        if pin {
            out.push(p);
        }
        if pin != qin {
            // Rounding can put t on an endpoint; the crossing must still be
            // emitted or the piece loses area.
            let t = ((c - p.u) / (q.u - p.u)).clamp(0.0, 1.0);
            let mut bary = [0.0; 3];
            for d in 0..3 {
                bary[d] = p.bary[d] + t * (q.bary[d] - p.bary[d]);
            }
            out.push(Vertex { bary, u: c });
        }
    }
    out
}

fn push_polygon(poly: &[Vertex], measure: f64, out: &mut Vec<QuadPoint>) {
    if poly.len() < 3 {
        return;
    }
    let v0 = poly[0].bary;
    for k in 1..poly.len() - 1 {
        let (v1, v2) = (poly[k].bary, poly[k + 1].bary);
        let frac = ((v1[1] - v0[1]) * (v2[2] - v0[2]) - (v2[1] - v0[1]) * (v1[2] - v0[2])).abs();
        if frac == 0.0 {
            continue;
        }
        for (s, w) in tri_rule() {
            let mut bary = [0.0; 3];
            for d in 0..3 {
                bary[d] = s[0] * v0[d] + s[1] * v1[d] + s[2] * v2[d];
            }
            out.push(QuadPoint { bary, weight: w * frac * measure });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integrate(dim: usize, u: &[f64], eps: f64, f: impl Fn(&[f64; 3]) -> f64) -> f64 {
        let mut pts = Vec::new();
        phase_rule(dim, 1.0, u, eps, &mut pts);
        pts.iter().map(|q| q.weight * f(&q.bary)).sum()
    }

    #[test]
    fn weights_sum_to_measure() {
        for u in [
            [-1.0, 0.3, 2.0],
            [0.0, 0.0, 0.0],
            [0.05, 0.02, -0.01],
            [1.0, 1.0, 1.0],
            [0.1, -0.2, 0.1],
            [0.1875, -9.2e-18, -0.0625],
            [0.1, 0.1 + 1e-18, -1e-300],
        ] {
            let mut pts = Vec::new();
            phase_rule(2, 0.7, &u, 0.1, &mut pts);
            let s: f64 = pts.iter().map(|q| q.weight).sum();
            assert!((s - 0.7).abs() < 1e-14, "{u:?}: {s}");
            phase_rule(1, 0.7, &u[..2], 0.1, &mut pts);
            let s: f64 = pts.iter().map(|q| q.weight).sum();
            assert!((s - 0.7).abs() < 1e-14);
        }
    }

    #[test]
    fn positive_fraction_matches_geometry() {
        // u = l1 - 1/2 on the reference triangle (area fraction 1): the
        // region u > 0 is the corner triangle with side ratio 1/2, area 1/4.
        let u = [-0.5, 0.5, -0.5];
        let frac = integrate(2, &u, 1e-9, |b| {
            let uq = b[0] * u[0] + b[1] * u[1] + b[2] * u[2];
            if uq > 0.0 {
                1.0
            } else {
                0.0
            }
        });
        assert!((frac - 0.25).abs() < 1e-6);
        let frac1 = integrate(1, &[-1.0, 3.0], 1e-12, |b| if -b[0] + 3.0 * b[1] > 0.0 { 1.0 } else { 0.0 });
        assert!((frac1 - 0.75).abs() < 1e-10);
    }

    #[test]
    fn quartic_polynomials_exact_on_pieces() {
        // Exactness of the split rule for smooth integrands: int l1^2 l2^2
        // over the reference triangle (measure 1 here) is 2 * 2!2!0!/6! = 1/90.
        let v = integrate(2, &[-1.0, 0.4, 1.2], 0.3, |b| b[1] * b[1] * b[2] * b[2]);
        assert!((v - 1.0 / 90.0).abs() < 1e-14);
    }
}
