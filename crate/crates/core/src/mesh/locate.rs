use super::{dist, Mesh, Point};

/// Uniform bucket grid over the mesh bounding box for point location.
#[derive(Debug)]
pub struct Locator {
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

const BARY_TOL: f64 = 1e-10;

impl Locator {
    pub fn new(mesh: &Mesh) -> Self {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in mesh.nodes() {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        let cell = mesh.h_mesh().max(1e-12);
        let nx = (((hi[0] - lo[0]) / cell).floor() as usize + 1).max(1);
        let ny = (((hi[1] - lo[1]) / cell).floor() as usize + 1).max(1);
        let mut loc = Locator { origin: lo, cell, nx, ny, buckets: vec![Vec::new(); nx * ny] };
        for e in 0..mesh.n_elements() {
            let (mut a, mut b) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
            for &i in mesh.element(e) {
                let p = mesh.node(i);
                for d in 0..2 {
                    a[d] = a[d].min(p[d]);
                    b[d] = b[d].max(p[d]);
                }
            }
            let (i0, j0) = loc.cell_of(&a);
            let (i1, j1) = loc.cell_of(&b);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    loc.buckets[j * nx + i].push(e);
                }
            }
        }
        loc
    }

    fn cell_of(&self, p: &Point) -> (usize, usize) {
        let f = |v: f64, o: f64, n: usize| (((v - o) / self.cell).floor().max(0.0) as usize).min(n - 1);
        (f(p[0], self.origin[0], self.nx), f(p[1], self.origin[1], self.ny))
    }

    /// Element containing `p` and its barycentric coordinates.
    pub fn locate(&self, mesh: &Mesh, p: &Point) -> Option<(usize, [f64; 3])> {
        let (i, j) = self.cell_of(p);
        let inside_box = p[0] >= self.origin[0] - self.cell
            && p[1] >= self.origin[1] - self.cell
            && p[0] <= self.origin[0] + (self.nx + 1) as f64 * self.cell
            && p[1] <= self.origin[1] + (self.ny + 1) as f64 * self.cell;
        if !inside_box {
            return None;
        }
        self.buckets[j * self.nx + i].iter().find_map(|&e| {
            let l = barycentric(mesh, e, p)?;
            l.iter().all(|&v| v >= -BARY_TOL).then(|| (e, clamp(l, mesh.dim())))
        })
    }

    /// Like [`Locator::locate`], but a point outside the mesh within
    /// `max_dist` of it is snapped to the nearest element.
    pub fn locate_nearest(&self, mesh: &Mesh, p: &Point, max_dist: f64) -> Option<(usize, [f64; 3])> {
        if let Some(hit) = self.locate(mesh, p) {
            return Some(hit);
        }
        let (ci, cj) = self.cell_of(p);
        let reach = (max_dist / self.cell).ceil() as usize + 1;
        let mut best: Option<(f64, usize, [f64; 3])> = None;
        for j in cj.saturating_sub(reach)..=(cj + reach).min(self.ny - 1) {
            for i in ci.saturating_sub(reach)..=(ci + reach).min(self.nx - 1) {
                for &e in &self.buckets[j * self.nx + i] {
                    let Some(l) = barycentric(mesh, e, p) else { continue };
                    let l = clamp(l, mesh.dim());
                    let q = mesh.map_point(e, &l[..mesh.dim() + 1]);
                    let d = dist(&q, p);
                    if best.is_none_or(|b| d < b.0) {
                        best = Some((d, e, l));
                    }
                }
            }
        }
        best.filter(|b| b.0 <= max_dist).map(|b| (b.1, b.2))
    }
}

fn barycentric(mesh: &Mesh, e: usize, p: &Point) -> Option<[f64; 3]> {
    let c = mesh.element(e);
    if mesh.dim() == 1 {
        let (a, b) = (mesh.node(c[0])[0], mesh.node(c[1])[0]);
        if p[1].abs() > BARY_TOL {
            return None;
        }
        let t = (p[0] - a) / (b - a);
        Some([1.0 - t, t, 0.0])
    } else {
        let (p0, p1, p2) = (mesh.node(c[0]), mesh.node(c[1]), mesh.node(c[2]));
        let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
        let l1 = ((p[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p[1] - p0[1])) / det;
        let l2 = ((p1[0] - p0[0]) * (p[1] - p0[1]) - (p[0] - p0[0]) * (p1[1] - p0[1])) / det;
        Some([1.0 - l1 - l2, l1, l2])
    }
}

fn clamp(mut l: [f64; 3], dim: usize) -> [f64; 3] {
    let k = dim + 1;
    for v in &mut l[..k] {
        *v = v.max(0.0);
    }
    let s: f64 = l[..k].iter().sum();
    for v in &mut l[..k] {
        *v /= s;
    }
    l
}
