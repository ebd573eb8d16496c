//! Simplicial meshes (intervals and triangles), P1 geometry, point location
//! and the norms and ball suprema used by the diagnostics.

mod assembly;
mod build;
mod locate;
mod sparse;

use std::collections::HashMap;
use std::sync::OnceLock;

use crate::error::{Error, Result};

pub use assembly::{assemble_load, assemble_weighted_laplacian, StiffnessPattern, W_FLOOR};
pub use build::{build_mesh, DIAGNOSTIC_RADII};
pub use locate::Locator;
pub use sparse::{solve_spd, CsrMatrix, SparseSPDSystem, DEFAULT_LINEAR_TOL};

/// Points are stored in two coordinates; 1D meshes keep the second at zero.
pub type Point = [f64; 2];

pub fn dist(a: &Point, b: &Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

pub fn dot(a: &Point, b: &Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub fn norm(a: &Point) -> f64 {
    a[0].hypot(a[1])
}

/// Closed Euclidean ball. Membership carries a relative slack of 1e-12 so
/// that nodes placed exactly on a ring of radius `radius` count as inside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Self {
        Ball { center, radius }
    }

    pub fn centered(radius: f64) -> Self {
        Ball { center: [0.0, 0.0], radius }
    }

    pub fn contains(&self, p: &Point) -> bool {
        dist(&self.center, p) <= self.radius * (1.0 + 1e-12) + 1e-14
    }
}

#[derive(Debug)]
pub struct Mesh {
    dim: usize,
    nodes: Vec<Point>,
    cells: Vec<usize>,
    on_boundary: Vec<bool>,
    boundary_nodes: Vec<usize>,
    measures: Vec<f64>,
    basis_grads: Vec<[Point; 3]>,
    h_mesh: f64,
    diameter: f64,
    locator: OnceLock<Locator>,
}

impl Mesh {
    /// Builds a mesh from raw connectivity. `cells` is flat with stride
    /// `dim + 1`. The boundary is detected topologically. When `diameter` is
    /// `None` it is measured as the largest distance between boundary nodes.
    pub fn new(dim: usize, nodes: Vec<Point>, cells: Vec<usize>, diameter: Option<f64>) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidParameter(format!("mesh dimension {dim} not in {{1, 2}}")));
        }
        let stride = dim + 1;
        if cells.is_empty() || !cells.len().is_multiple_of(stride) {
            return Err(Error::InvalidParameter("cell array length is not a multiple of dim + 1".into()));
        }
        if let Some(&bad) = cells.iter().find(|&&c| c >= nodes.len()) {
            return Err(Error::InvalidParameter(format!("cell references missing node {bad}")));
        }
        let n_cells = cells.len() / stride;
        let mut measures = Vec::with_capacity(n_cells);
        let mut basis_grads = Vec::with_capacity(n_cells);
        let mut h_mesh: f64 = 0.0;
        for e in 0..n_cells {
            let c = &cells[e * stride..(e + 1) * stride];
            let (m, g) = element_geometry(dim, c.iter().map(|&i| nodes[i]));
            if !(m > 0.0) || !m.is_finite() {
                return Err(Error::DegenerateElement(e));
            }
            for a in 0..stride {
                for b in a + 1..stride {
                    h_mesh = h_mesh.max(dist(&nodes[c[a]], &nodes[c[b]]));
                }
            }
            measures.push(m);
            basis_grads.push(g);
        }

        let mut on_boundary = vec![false; nodes.len()];
        if dim == 1 {
            let mut degree = vec![0usize; nodes.len()];
            for &i in &cells {
                degree[i] += 1;
            }
            for (i, &d) in degree.iter().enumerate() {
                on_boundary[i] = d == 1;
            }
        } else {
            let mut edges: HashMap<(usize, usize), usize> = HashMap::with_capacity(n_cells * 2);
            for c in cells.chunks_exact(3) {
                for (a, b) in [(c[0], c[1]), (c[1], c[2]), (c[2], c[0])] {
                    *edges.entry((a.min(b), a.max(b))).or_insert(0) += 1;
                }
            }
            for (&(a, b), &count) in &edges {
                if count == 1 {
                    on_boundary[a] = true;
                    on_boundary[b] = true;
                }
            }
        }
        let boundary_nodes: Vec<usize> = (0..nodes.len()).filter(|&i| on_boundary[i]).collect();
        let diameter = diameter.unwrap_or_else(|| {
            let mut d: f64 = 0.0;
            for (k, &i) in boundary_nodes.iter().enumerate() {
                for &j in &boundary_nodes[k + 1..] {
                    d = d.max(dist(&nodes[i], &nodes[j]));
                }
            }
            d
        });

        Ok(Mesh {
            dim,
            nodes,
            cells,
            on_boundary,
            boundary_nodes,
            measures,
            basis_grads,
            h_mesh,
            diameter,
            locator: OnceLock::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elements(&self) -> usize {
        self.measures.len()
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> Point {
        self.nodes[i]
    }

    pub fn element(&self, e: usize) -> &[usize] {
        let s = self.dim + 1;
        &self.cells[e * s..(e + 1) * s]
    }

    pub fn elements(&self) -> impl Iterator<Item = &[usize]> {
        self.cells.chunks_exact(self.dim + 1)
    }

    pub fn measure(&self, e: usize) -> f64 {
        self.measures[e]
    }

    pub fn measures(&self) -> &[f64] {
        &self.measures
    }

    /// Gradients of the local P1 basis functions on element `e`; only the
    /// first `dim + 1` entries are meaningful.
    pub fn basis_gradients(&self, e: usize) -> &[Point] {
        &self.basis_grads[e][..self.dim + 1]
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        self.on_boundary[i]
    }

    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary_nodes
    }

    pub fn interior_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(move |&i| !self.on_boundary[i])
    }

    pub fn h_mesh(&self) -> f64 {
        self.h_mesh
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn barycenter(&self, e: usize) -> Point {
        let c = self.element(e);
        let k = c.len() as f64;
        let mut b = [0.0; 2];
        for &i in c {
            b[0] += self.nodes[i][0] / k;
            b[1] += self.nodes[i][1] / k;
        }
        b
    }

    /// Physical point of barycentric coordinates `bary` on element `e`.
    pub fn map_point(&self, e: usize, bary: &[f64]) -> Point {
        let mut p = [0.0; 2];
        for (&i, &l) in self.element(e).iter().zip(bary) {
            p[0] += l * self.nodes[i][0];
            p[1] += l * self.nodes[i][1];
        }
        p
    }

    /// Constant gradient of the P1 interpolant of `values` on element `e`.
    pub fn gradient(&self, e: usize, values: &[f64]) -> Point {
        let mut g = [0.0; 2];
        for (&i, gi) in self.element(e).iter().zip(self.basis_gradients(e)) {
            g[0] += values[i] * gi[0];
            g[1] += values[i] * gi[1];
        }
        g
    }

    pub fn locator(&self) -> &Locator {
        self.locator.get_or_init(|| Locator::new(self))
    }

    /// Evaluates the P1 interpolant of `values` at `p`.
    pub fn interpolate(&self, values: &[f64], p: &Point) -> Result<f64> {
        let (e, bary) = self.locator().locate(self, p).ok_or(Error::OutsideDomain(*p))?;
        Ok(self.element(e).iter().zip(bary.iter()).map(|(&i, &l)| l * values[i]).sum())
    }

    /// Elements whose barycenter lies in `ball`, kept as a standalone mesh.
    /// Returns the sub-mesh and, for each of its nodes, the parent node index.
    pub fn restrict_to_ball(&self, ball: &Ball) -> Result<(Mesh, Vec<usize>)> {
        let mut map: HashMap<usize, usize> = HashMap::new();
        let mut parent = Vec::new();
        let mut cells = Vec::new();
        for e in 0..self.n_elements() {
            if !ball.contains(&self.barycenter(e)) {
                continue;
            }
            for &i in self.element(e) {
                let next = parent.len();
                let local = *map.entry(i).or_insert_with(|| {
                    parent.push(i);
                    next
                });
                cells.push(local);
            }
        }
        if cells.is_empty() {
            return Err(Error::EmptyRegion);
        }
        let nodes = parent.iter().map(|&i| self.nodes[i]).collect();
        Ok((Mesh::new(self.dim, nodes, cells, None)?, parent))
    }
}

fn element_geometry(dim: usize, mut pts: impl Iterator<Item = Point>) -> (f64, [Point; 3]) {
    if dim == 1 {
        let a = pts.next().unwrap();
        let b = pts.next().unwrap();
        let h = b[0] - a[0];
        (h.abs(), [[-1.0 / h, 0.0], [1.0 / h, 0.0], [0.0, 0.0]])
    } else {
        let p0 = pts.next().unwrap();
        let p1 = pts.next().unwrap();
        let p2 = pts.next().unwrap();
        let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
        let g0 = [(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det];
        let g1 = [(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det];
        let g2 = [(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det];
        (0.5 * det.abs(), [g0, g1, g2])
    }
}

/// Per-element gradient vectors of a nodal field.
pub fn element_gradients(mesh: &Mesh, values: &[f64]) -> Result<Vec<Point>> {
    if values.len() != mesh.n_nodes() {
        return Err(Error::FieldLength { expected: mesh.n_nodes(), got: values.len() });
    }
    Ok((0..mesh.n_elements()).map(|e| mesh.gradient(e, values)).collect())
}

/// `(int |grad u|^p)^(1/p)` over the domain or its intersection with `region`.
pub fn lp_gradient_norm(mesh: &Mesh, values: &[f64], p: f64, region: Option<&Ball>) -> f64 {
    gradient_energy(mesh, values, p, region).powf(1.0 / p)
}

/// `int |grad u|^p` over the domain or its intersection with `region`. The
/// gradient is constant per element, so weighting by `|e ∩ region|` makes
/// the ball integral exact.
pub fn gradient_energy(mesh: &Mesh, values: &[f64], p: f64, region: Option<&Ball>) -> f64 {
    (0..mesh.n_elements())
        .map(|e| {
            let w = region.map_or(mesh.measure(e), |b| mesh.ball_overlap(e, b));
            if w > 0.0 {
                norm(&mesh.gradient(e, values)).powf(p) * w
            } else {
                0.0
            }
        })
        .sum()
}

/// Signed area of `disc(0, r) ∩ triangle(0, a, b)`.
fn sector_clip(a: Point, b: Point, r: f64) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    // |a + t d|^2 = r^2
    let (qa, qb, qc) = (dot(&d, &d), 2.0 * dot(&a, &d), dot(&a, &a) - r * r);
    let mut cuts = vec![0.0];
    let disc = qb * qb - 4.0 * qa * qc;
    if qa > 0.0 && disc > 0.0 {
        let s = disc.sqrt();
        for t in [(-qb - s) / (2.0 * qa), (-qb + s) / (2.0 * qa)] {
            if t > 0.0 && t < 1.0 {
                cuts.push(t);
            }
        }
    }
    cuts.push(1.0);
    let at = |t: f64| [a[0] + t * d[0], a[1] + t * d[1]];
    cuts.windows(2)
        .map(|w| {
            let (p, q, m) = (at(w[0]), at(w[1]), at(0.5 * (w[0] + w[1])));
            let cross = p[0] * q[1] - p[1] * q[0];
            if dot(&m, &m) <= r * r {
                0.5 * cross
            } else {
                0.5 * r * r * cross.atan2(dot(&p, &q))
            }
        })
        .sum()
}

impl Mesh {
    /// Measure of `element(e) ∩ ball`.
    pub fn ball_overlap(&self, e: usize, ball: &Ball) -> f64 {
        let c = self.element(e);
        let rel: Vec<Point> = c.iter().map(|&i| [self.nodes[i][0] - ball.center[0], self.nodes[i][1] - ball.center[1]]).collect();
        let r = ball.radius;
        if rel.iter().all(|q| dot(q, q) <= r * r) {
            return self.measure(e);
        }
        if self.dim == 1 {
            // The ball cuts the line y = 0 in a chord of half-width w.
            let w2 = r * r - rel[0][1] * rel[0][1];
            if w2 <= 0.0 {
                return 0.0;
            }
            let w = w2.sqrt();
            let (lo, hi) = (rel[0][0].min(rel[1][0]), rel[0][0].max(rel[1][0]));
            return (hi.min(w) - lo.max(-w)).max(0.0);
        }
        let b = self.barycenter(e);
        let reach = c.iter().map(|&i| dist(&b, &self.nodes[i])).fold(0.0, f64::max);
        if dist(&b, &ball.center) >= r + reach {
            return 0.0;
        }
        let area: f64 = (0..3).map(|k| sector_clip(rel[k], rel[(k + 1) % 3], r)).sum();
        area.abs().min(self.measure(e))
    }
}

/// Maximum of `|u|` over the nodes inside `ball`.
pub fn sup_on_ball(mesh: &Mesh, values: &[f64], ball: &Ball) -> Result<f64> {
    nodes_in_ball(mesh, ball)
        .map(|i| values[i].abs())
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
        .ok_or(Error::UnderResolved { center: ball.center, radius: ball.radius })
}

/// Points of the zero level set of the P1 interpolant: nodes where the value
/// is zero and the crossings on edges with strictly opposite end signs.
/// Edges shared by two elements contribute twice.
pub fn zero_level_points(mesh: &Mesh, values: &[f64]) -> Vec<Point> {
    let mut out: Vec<Point> = (0..mesh.n_nodes()).filter(|&i| values[i] == 0.0).map(|i| mesh.nodes[i]).collect();
    for c in mesh.elements() {
        for a in 0..c.len() {
            for b in a + 1..c.len() {
                let (i, j) = (c[a], c[b]);
                let (vi, vj) = (values[i], values[j]);
                if (vi < 0.0 && vj > 0.0) || (vi > 0.0 && vj < 0.0) {
                    let t = vi / (vi - vj);
                    let (p, q) = (mesh.nodes[i], mesh.nodes[j]);
                    out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
                }
            }
        }
    }
    out
}

pub fn nodes_in_ball<'a>(mesh: &'a Mesh, ball: &'a Ball) -> impl Iterator<Item = usize> + 'a {
    (0..mesh.n_nodes()).filter(move |&i| ball.contains(&mesh.nodes[i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{DomainDescriptor, DomainKind};

    fn interval(n: usize) -> Mesh {
        build_mesh(&DomainDescriptor::new(DomainKind::Interval, n)).unwrap()
    }

    #[test]
    fn gradients_of_coordinate_and_constant() {
        let m = build_mesh(&DomainDescriptor::new(DomainKind::UnitSquare, 4)).unwrap();
        let x: Vec<f64> = m.nodes().iter().map(|p| p[0]).collect();
        for g in element_gradients(&m, &x).unwrap() {
            assert!((g[0] - 1.0).abs() < 1e-12 && g[1].abs() < 1e-12);
        }
        let c = vec![3.0; m.n_nodes()];
        for g in element_gradients(&m, &c).unwrap() {
            assert!(norm(&g) < 1e-12);
        }
    }

    #[test]
    fn slope_on_half_length_element() {
        let m = Mesh::new(1, vec![[0.0, 0.0], [0.5, 0.0]], vec![0, 1], None).unwrap();
        let g = element_gradients(&m, &[0.0, 1.0]).unwrap();
        assert_eq!(g[0][0], 2.0);
    }

    #[test]
    fn degenerate_element_rejected() {
        let nodes = vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        assert!(matches!(Mesh::new(2, nodes, vec![0, 1, 2], None), Err(Error::DegenerateElement(0))));
    }

    #[test]
    fn gradient_norms() {
        let m = interval(8);
        let x: Vec<f64> = m.nodes().iter().map(|p| p[0]).collect();
        assert!((lp_gradient_norm(&m, &x, 2.0, None) - 2f64.sqrt()).abs() < 1e-14);
        assert_eq!(lp_gradient_norm(&m, &vec![1.5; m.n_nodes()], 2.0, None), 0.0);
        let sq = build_mesh(&DomainDescriptor::new(DomainKind::UnitSquare, 4)).unwrap();
        let x: Vec<f64> = sq.nodes().iter().map(|p| p[0]).collect();
        assert!((lp_gradient_norm(&sq, &x, 3.0, None) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ball_overlap_matches_disc_area() {
        let sq = build_mesh(&DomainDescriptor::new(DomainKind::UnitSquare, 32)).unwrap();
        let ball = Ball::new([0.5, 0.5], 0.3);
        let area: f64 = (0..sq.n_elements()).map(|e| sq.ball_overlap(e, &ball)).sum();
        assert!((area - std::f64::consts::PI * 0.09).abs() < 1e-12);
        // Ball sticking out of the square: quarter disc at a corner.
        let corner = Ball::new([0.0, 0.0], 0.37);
        let area: f64 = (0..sq.n_elements()).map(|e| sq.ball_overlap(e, &corner)).sum();
        assert!((area - std::f64::consts::PI * 0.37 * 0.37 / 4.0).abs() < 1e-12);
        let far = Ball::new([3.0, 3.0], 0.5);
        assert!((0..sq.n_elements()).all(|e| sq.ball_overlap(e, &far) == 0.0));
    }

    proptest::proptest! {
        #[test]
        fn overlaps_tile_any_inner_ball(cx in 0.2f64..0.8, cy in 0.2f64..0.8, r in 0.01f64..0.2) {
            let sq = build_mesh(&DomainDescriptor::new(DomainKind::UnitSquare, 12)).unwrap();
            let ball = Ball::new([cx, cy], r);
            let area: f64 = (0..sq.n_elements()).map(|e| sq.ball_overlap(e, &ball)).sum();
            proptest::prop_assert!((area - std::f64::consts::PI * r * r).abs() < 1e-12);
        }
    }

    #[test]
    fn ball_overlap_on_interval() {
        let m = interval(8);
        let len: f64 = (0..m.n_elements()).map(|e| m.ball_overlap(e, &Ball::new([0.1, 0.0], 0.33))).sum();
        assert!((len - 0.66).abs() < 1e-14);
        let off_axis: f64 = (0..m.n_elements()).map(|e| m.ball_overlap(e, &Ball::new([0.0, 0.3], 0.5))).sum();
        assert!((off_axis - 0.8).abs() < 1e-14);
    }

    #[test]
    fn linear_energy_on_ball_is_exact() {
        let m = build_mesh(&DomainDescriptor::new(DomainKind::UnitDisc, 8)).unwrap();
        let x: Vec<f64> = m.nodes().iter().map(|p| p[0]).collect();
        let e = gradient_energy(&m, &x, 3.0, Some(&Ball::new([0.1, -0.2], 0.45)));
        assert!((e - std::f64::consts::PI * 0.45 * 0.45).abs() < 1e-12);
    }

    #[test]
    fn ball_suprema() {
        let m = interval(8);
        let absx: Vec<f64> = m.nodes().iter().map(|p| p[0].abs()).collect();
        assert_eq!(sup_on_ball(&m, &absx, &Ball::centered(0.5)).unwrap(), 0.5);
        let three = vec![3.0; m.n_nodes()];
        assert_eq!(sup_on_ball(&m, &three, &Ball::new([0.3, 0.0], 0.2)).unwrap(), 3.0);
        let err = sup_on_ball(&m, &three, &Ball::new([0.1, 0.0], 0.05));
        assert!(matches!(err, Err(Error::UnderResolved { .. })));
    }

    #[test]
    fn restriction_to_half_ball_is_a_disc() {
        let m = build_mesh(&DomainDescriptor::new(DomainKind::UnitDisc, 16)).unwrap();
        let (sub, parent) = m.restrict_to_ball(&Ball::centered(0.5)).unwrap();
        assert_eq!(sub.n_nodes(), parent.len());
        for &b in sub.boundary_nodes() {
            assert!((norm(&sub.node(b)) - 0.5).abs() < 1e-12);
        }
        assert!((sub.diameter() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn interpolation_reproduces_linear_fields() {
        let m = build_mesh(&DomainDescriptor::new(DomainKind::UnitDisc, 8)).unwrap();
        let u: Vec<f64> = m.nodes().iter().map(|p| 2.0 * p[0] - p[1] + 0.5).collect();
        for p in [[0.1, 0.2], [-0.5, 0.3], [0.0, -0.9]] {
            let v = m.interpolate(&u, &p).unwrap();
            assert!((v - (2.0 * p[0] - p[1] + 0.5)).abs() < 1e-12);
        }
        assert!(m.interpolate(&u, &[1.5, 0.0]).is_err());
    }
}
