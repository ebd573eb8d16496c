use std::f64::consts::PI;

use super::{Mesh, Point};
use crate::error::{Error, Result};
use crate::problem::{DomainDescriptor, DomainKind};

/// Radii that every disc mesh carries as exact rings, so that balls of these
/// radii about the origin are unions of whole elements.
pub const DIAGNOSTIC_RADII: [f64; 4] = [0.25, 0.5, 0.625, 0.75];

/// Builds the mesh described by `descriptor`.
///
/// * interval: `n` uniform elements on (-1, 1), `n >= 4`;
/// * unit square: `n x n` cells on (0, 1)^2, each split along a diagonal whose
///   direction alternates in a checkerboard, `n >= 2`;
/// * unit disc: `n` concentric rings at radii `k/n` (plus any of
///   [`DIAGNOSTIC_RADII`] that do not already fall on a ring), `n >= 2`.
pub fn build_mesh(descriptor: &DomainDescriptor) -> Result<Mesh> {
    let n = descriptor.resolution;
    match descriptor.kind {
        DomainKind::Interval => {
            if n < 4 {
                return Err(Error::TooCoarse(format!("interval needs at least 4 elements, got {n}")));
            }
            let nodes = (0..=n).map(|i| [-1.0 + 2.0 * i as f64 / n as f64, 0.0]).collect();
            let cells = (0..n).flat_map(|i| [i, i + 1]).collect();
            Mesh::new(1, nodes, cells, Some(2.0))
        }
        DomainKind::UnitSquare => {
            if n < 2 {
                return Err(Error::TooCoarse(format!("unit square needs n >= 2, got {n}")));
            }
            unit_square(n)
        }
        DomainKind::UnitDisc => {
            if n < 2 {
                return Err(Error::TooCoarse(format!("unit disc needs at least 2 rings, got {n}")));
            }
            unit_disc(n)
        }
    }
}

fn unit_square(n: usize) -> Result<Mesh> {
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut nodes = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            nodes.push([i as f64 / n as f64, j as f64 / n as f64]);
        }
    }
    let mut cells = Vec::with_capacity(6 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if (i + j) % 2 == 0 {
                cells.extend_from_slice(&[a, b, c, a, c, d]);
            } else {
                cells.extend_from_slice(&[a, b, d, b, c, d]);
            }
        }
    }
    Mesh::new(2, nodes, cells, Some(2f64.sqrt()))
}

/// Ring radii `k/n`, with each diagnostic radius either already present or
/// replacing the nearest uniform ring (dropping it if that ring would be the
/// outer boundary).
fn ring_radii(n: usize) -> Vec<f64> {
    let mut radii: Vec<f64> = (1..=n).map(|k| k as f64 / n as f64).collect();
    let pinned = |q: f64| q == 1.0 || DIAGNOSTIC_RADII.iter().any(|&d| (d - q).abs() < 1e-12);
    for &r in &DIAGNOSTIC_RADII {
        if let Some(q) = radii.iter_mut().find(|q| (**q - r).abs() < 1e-12) {
            *q = r;
            continue;
        }
        let nearest = radii
            .iter()
            .enumerate()
            .filter(|(_, &q)| !pinned(q))
            .map(|(k, &q)| (k, (q - r).abs()))
            .fold(None, |best: Option<(usize, f64)>, cur| match best {
                Some(b) if b.1 <= cur.1 => Some(b),
                _ => Some(cur),
            });
        match nearest {
            Some((k, gap)) if gap < 0.5 / n as f64 => radii[k] = r,
            _ => radii.push(r),
        }
    }
    radii.sort_by(|a, b| a.total_cmp(b));
    radii.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    radii
}

fn unit_disc(n: usize) -> Result<Mesh> {
    let radii = ring_radii(n);
    let mut nodes: Vec<Point> = vec![[0.0, 0.0]];
    let mut rings: Vec<(usize, usize)> = Vec::with_capacity(radii.len());
    for &r in &radii {
        let m = ((6.0 * r * n as f64).round() as usize).max(6);
        let start = nodes.len();
        for i in 0..m {
            let t = 2.0 * PI * i as f64 / m as f64;
            let (s, c) = t.sin_cos();
            nodes.push([r * c, r * s]);
        }
        rings.push((start, m));
    }

    let mut cells = Vec::new();
    let mut push = |nodes: &[Point], a: usize, b: usize, c: usize| {
        let (p, q, s) = (nodes[a], nodes[b], nodes[c]);
        let det = (q[0] - p[0]) * (s[1] - p[1]) - (s[0] - p[0]) * (q[1] - p[1]);
        if det > 0.0 {
            cells.extend_from_slice(&[a, b, c]);
        } else {
            cells.extend_from_slice(&[a, c, b]);
        }
    };

    let (s0, m0) = rings[0];
    for i in 0..m0 {
        push(&nodes, 0, s0 + i, s0 + (i + 1) % m0);
    }
    // Zip neighbouring rings together by angle; the comparison of
    // (i+1)/m_in against (j+1)/m_out is done in integers so ties resolve
    // identically on every platform.
    for w in rings.windows(2) {
        let ((si, mi), (so, mo)) = (w[0], w[1]);
        let (mut i, mut j) = (0usize, 0usize);
        while i < mi || j < mo {
            let advance_inner = j == mo || (i < mi && (i + 1) * mo <= (j + 1) * mi);
            if advance_inner {
                push(&nodes, si + i % mi, si + (i + 1) % mi, so + j % mo);
                i += 1;
            } else {
                push(&nodes, si + i % mi, so + (j + 1) % mo, so + j % mo);
                j += 1;
            }
        }
    }
    Mesh::new(2, nodes, cells, Some(2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::norm;

    fn disc(n: usize) -> Mesh {
        build_mesh(&DomainDescriptor::new(DomainKind::UnitDisc, n)).unwrap()
    }

    #[test]
    fn interval_nodes() {
        let m = build_mesh(&DomainDescriptor::new(DomainKind::Interval, 4)).unwrap();
        let xs: Vec<f64> = m.nodes().iter().map(|p| p[0]).collect();
        assert_eq!(xs, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(m.boundary_nodes(), &[0, 4]);
    }

    #[test]
    fn square_counts() {
        let m = build_mesh(&DomainDescriptor::new(DomainKind::UnitSquare, 2)).unwrap();
        assert_eq!(m.n_nodes(), 9);
        assert_eq!(m.n_elements(), 8);
        assert_eq!(m.boundary_nodes().len(), 8);
        let area: f64 = m.measures().iter().sum();
        assert!((area - 1.0).abs() < 1e-14);
    }

    #[test]
    fn too_coarse() {
        assert!(matches!(
            build_mesh(&DomainDescriptor::new(DomainKind::Interval, 3)),
            Err(Error::TooCoarse(_))
        ));
        assert!(build_mesh(&DomainDescriptor::new(DomainKind::UnitDisc, 1)).is_err());
    }

    #[test]
    fn disc_boundary_on_unit_circle() {
        for n in [2, 5, 8, 13, 16] {
            let m = disc(n);
            assert!(!m.boundary_nodes().is_empty());
            for &b in m.boundary_nodes() {
                assert!((norm(&m.node(b)) - 1.0).abs() < 1e-12, "n = {n}");
            }
            assert!(!m.is_boundary(0));
        }
    }

    #[test]
    fn disc_rings_carry_diagnostic_radii() {
        for n in [5, 8, 12, 64] {
            let radii = ring_radii(n);
            for r in DIAGNOSTIC_RADII {
                assert!(radii.iter().any(|&q| (q - r).abs() < 1e-14), "n = {n}, r = {r}");
            }
            assert_eq!(*radii.last().unwrap(), 1.0);
        }
    }

    #[test]
    fn disc_is_conforming_and_covers_polygon_area() {
        let m = disc(8);
        // Every interior edge is shared by exactly two triangles, so the
        // topological boundary is exactly the outer ring.
        let outer = m.nodes().iter().filter(|p| (norm(p) - 1.0).abs() < 1e-12).count();
        assert_eq!(m.boundary_nodes().len(), outer);
        let area: f64 = m.measures().iter().sum();
        let poly = 0.5 * outer as f64 * (2.0 * PI / outer as f64).sin();
        assert!((area - poly).abs() < 1e-12);
    }

    #[test]
    fn refinement_halves_h_and_quadruples_elements() {
        let sq = |n| build_mesh(&DomainDescriptor::new(DomainKind::UnitSquare, n)).unwrap();
        let (a, b) = (sq(8), sq(16));
        assert!((b.h_mesh() / a.h_mesh() - 0.5).abs() < 1e-12);
        assert!(b.n_elements() >= 4 * a.n_elements());
        let (a, b) = (disc(8), disc(16));
        let r = b.h_mesh() / a.h_mesh();
        assert!((0.45..0.55).contains(&r), "ratio {r}");
        assert!(b.n_elements() >= 4 * a.n_elements());
    }
}
