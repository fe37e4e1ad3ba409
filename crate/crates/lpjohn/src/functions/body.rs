//! Convex bodies containing the origin, given by halfspaces or vertices.
//!
//! Bodies back the gauge-power potentials u = ||x||_K^q / q and the indicator
//! functions used in analytic identities. For dimensions 1 and 2 both
//! representations are kept in sync (vertex enumeration of a halfspace
//! intersection and hulling of a vertex list are cheap there), so the gauge
//! comes from the halfspace form and the support function from the vertex
//! form, each a single max over a short list. Dimension 3 polytopes are not
//! supported; nothing at desk scale needs them.

use crate::error::{Error, Result};
use crate::numerics::MAX_DIM;
use nalgebra::DMatrix;

const GEOM_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct ConvexBody {
    dim: usize,
    /// (outward normal, offset): the body is the set { x : <n_i, x> <= o_i }.
    halfspaces: Vec<([f64; MAX_DIM], f64)>,
    /// Extreme points in counterclockwise order (dimension 2) or sorted
    /// (dimension 1).
    vertices: Vec<[f64; MAX_DIM]>,
}

fn dot(dim: usize, a: &[f64], b: &[f64]) -> f64 {
    (0..dim).map(|i| a[i] * b[i]).sum()
}

fn cross2(o: &[f64; MAX_DIM], a: &[f64; MAX_DIM], b: &[f64; MAX_DIM]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Andrew monotone chain; returns hull vertices in counterclockwise order.
fn convex_hull_2d(mut pts: Vec<[f64; MAX_DIM]>) -> Vec<[f64; MAX_DIM]> {
    pts.sort_by(|a, b| a[0].partial_cmp(&b[0]).unwrap().then(a[1].partial_cmp(&b[1]).unwrap()));
    pts.dedup_by(|a, b| (a[0] - b[0]).abs() < GEOM_TOL && (a[1] - b[1]).abs() < GEOM_TOL);
    let n = pts.len();
    if n <= 2 {
        return pts;
    }
    let mut hull: Vec<[f64; MAX_DIM]> = Vec::with_capacity(2 * n);
    for &p in &pts {
        while hull.len() >= 2 && cross2(&hull[hull.len() - 2], &hull[hull.len() - 1], &p) <= GEOM_TOL
        {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len
            && cross2(&hull[hull.len() - 2], &hull[hull.len() - 1], &p) <= GEOM_TOL
        {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop(); // last point repeats the first
    // Lower hull left to right, then upper hull right to left: the combined
    // walk is counterclockwise.
    hull
}

impl ConvexBody {
    pub fn from_vertices(dim: usize, raw: &[Vec<f64>]) -> Result<Self> {
        Self::check_dim(dim)?;
        if raw.is_empty() {
            return Err(Error::InvalidParameter("empty vertex list".into()));
        }
        let mut pts = Vec::with_capacity(raw.len());
        for v in raw {
            if v.len() != dim || v.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "vertex {v:?} not a finite point of dimension {dim}"
                )));
            }
            let mut p = [0.0; MAX_DIM];
            p[..dim].copy_from_slice(v);
            pts.push(p);
        }
        let vertices = match dim {
            1 => {
                let lo = pts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
                let hi = pts.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
                vec![[lo, 0.0, 0.0], [hi, 0.0, 0.0]]
            }
            _ => convex_hull_2d(pts),
        };
        if dim == 2 && vertices.len() < 3 {
            return Err(Error::InvalidParameter(
                "vertices span a degenerate polygon".into(),
            ));
        }
        let halfspaces = Self::facets_from_vertices(dim, &vertices)?;
        let body = ConvexBody {
            dim,
            halfspaces,
            vertices,
        };
        body.check_origin_interior()?;
        Ok(body)
    }

    pub fn from_halfspaces(dim: usize, normals: &[Vec<f64>], offsets: &[f64]) -> Result<Self> {
        Self::check_dim(dim)?;
        if normals.len() != offsets.len() || normals.is_empty() {
            return Err(Error::InvalidParameter(
                "normals and offsets must be nonempty lists of equal length".into(),
            ));
        }
        let mut hs = Vec::with_capacity(normals.len());
        for (n, &o) in normals.iter().zip(offsets) {
            if n.len() != dim || n.iter().any(|c| !c.is_finite()) || !o.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "halfspace ({n:?}, {o}) malformed for dimension {dim}"
                )));
            }
            if o <= 0.0 {
                return Err(Error::InvalidParameter(
                    "offset must be positive (origin strictly inside)".into(),
                ));
            }
            if dot(dim, n, n).sqrt() < GEOM_TOL {
                return Err(Error::InvalidParameter("zero normal".into()));
            }
            let mut nn = [0.0; MAX_DIM];
            nn[..dim].copy_from_slice(n);
            hs.push((nn, o));
        }
        let vertices = Self::vertices_from_facets(dim, &hs)?;
        let body = ConvexBody {
            dim,
            halfspaces: hs,
            vertices,
        };
        body.check_origin_interior()?;
        Ok(body)
    }

    fn check_dim(dim: usize) -> Result<()> {
        match dim {
            1 | 2 => Ok(()),
            3 => Err(Error::Unsupported(
                "dimension-3 polytope bodies are not supported; use gaussian or grid functions"
                    .into(),
            )),
            _ => Err(Error::InvalidParameter(format!("dimension {dim}"))),
        }
    }

    fn facets_from_vertices(
        dim: usize,
        vertices: &[[f64; MAX_DIM]],
    ) -> Result<Vec<([f64; MAX_DIM], f64)>> {
        match dim {
            1 => {
                let lo = vertices[0][0];
                let hi = vertices[1][0];
                Ok(vec![([1.0, 0.0, 0.0], hi), ([-1.0, 0.0, 0.0], -lo)])
            }
            _ => {
                let k = vertices.len();
                let mut hs = Vec::with_capacity(k);
                for i in 0..k {
                    let p = vertices[i];
                    let qv = vertices[(i + 1) % k];
                    // counterclockwise edge p -> q: outward normal (dy, -dx)
                    let n = [qv[1] - p[1], p[0] - qv[0], 0.0];
                    let o = dot(2, &n, &p);
                    hs.push((n, o));
                }
                Ok(hs)
            }
        }
    }

    fn vertices_from_facets(
        dim: usize,
        hs: &[([f64; MAX_DIM], f64)],
    ) -> Result<Vec<[f64; MAX_DIM]>> {
        match dim {
            1 => {
                let mut hi = f64::INFINITY;
                let mut lo = f64::NEG_INFINITY;
                for (n, o) in hs {
                    if n[0] > 0.0 {
                        hi = hi.min(o / n[0]);
                    } else {
                        lo = lo.max(o / n[0]);
                    }
                }
                if !(lo.is_finite() && hi.is_finite()) {
                    return Err(Error::InvalidParameter("unbounded halfspace body".into()));
                }
                Ok(vec![[lo, 0.0, 0.0], [hi, 0.0, 0.0]])
            }
            _ => {
                let mut pts = Vec::new();
                for i in 0..hs.len() {
                    for j in i + 1..hs.len() {
                        let (a, oa) = hs[i];
                        let (b, ob) = hs[j];
                        let det = a[0] * b[1] - a[1] * b[0];
                        if det.abs() < GEOM_TOL {
                            continue;
                        }
                        let x = (oa * b[1] - ob * a[1]) / det;
                        let y = (a[0] * ob - b[0] * oa) / det;
                        let p = [x, y, 0.0];
                        let feasible = hs.iter().all(|(n, o)| dot(2, n, &p) <= o + 1e-7 * o.abs().max(1.0));
                        if feasible {
                            pts.push(p);
                        }
                    }
                }
                let hull = convex_hull_2d(pts);
                if hull.len() < 3 {
                    return Err(Error::InvalidParameter(
                        "halfspace intersection is degenerate or unbounded".into(),
                    ));
                }
                Ok(hull)
            }
        }
    }

    fn check_origin_interior(&self) -> Result<()> {
        for (n, o) in &self.halfspaces {
            let norm = dot(self.dim, n, n).sqrt();
            if *o / norm < GEOM_TOL {
                return Err(Error::InvalidParameter(
                    "origin is not strictly inside the body".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[[f64; MAX_DIM]] {
        &self.vertices
    }

    pub fn halfspaces(&self) -> &[([f64; MAX_DIM], f64)] {
        &self.halfspaces
    }

    /// Gauge (Minkowski functional): max_i <n_i, x> / o_i, clamped at zero.
    pub fn gauge(&self, x: &[f64]) -> f64 {
        let mut g: f64 = 0.0;
        for (n, o) in &self.halfspaces {
            g = g.max(dot(self.dim, n, x) / o);
        }
        g
    }

    /// Gradient of the gauge at x != 0: the active facet's n_j / o_j.
    /// Grid nodes land exactly on facet-cone boundaries, so ties average the
    /// maximizing facets (the subgradient centroid); this keeps the cloud
    /// symmetric when the body is. The Fenchel-Young support value is
    /// unchanged because every tied facet sees the same <n_j, x> / o_j.
    pub fn gauge_gradient(&self, x: &[f64]) -> [f64; MAX_DIM] {
        let mut best = f64::NEG_INFINITY;
        for (n, o) in &self.halfspaces {
            let v = dot(self.dim, n, x) / o;
            if v > best {
                best = v;
            }
        }
        let tie = 1e-12 * (1.0 + best.abs());
        let mut grad = [0.0; MAX_DIM];
        let mut count = 0.0;
        for (n, o) in &self.halfspaces {
            let v = dot(self.dim, n, x) / o;
            if v >= best - tie {
                for a in 0..self.dim {
                    grad[a] += n[a] / o;
                }
                count += 1.0;
            }
        }
        for g in grad.iter_mut().take(self.dim) {
            *g /= count;
        }
        grad
    }

    /// Support function h_K(y) = max_i <v_i, y>.
    pub fn support(&self, y: &[f64]) -> f64 {
        self.vertices
            .iter()
            .map(|v| dot(self.dim, v, y))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Polar body K = { y : <y, x> <= 1 for all x in K }.
    pub fn polar(&self) -> Result<ConvexBody> {
        let normals: Vec<Vec<f64>> = self
            .vertices
            .iter()
            .map(|v| v[..self.dim].to_vec())
            .collect();
        let offsets = vec![1.0; normals.len()];
        ConvexBody::from_halfspaces(self.dim, &normals, &offsets)
    }

    /// Volume (length / area).
    pub fn volume(&self) -> f64 {
        match self.dim {
            1 => self.vertices[1][0] - self.vertices[0][0],
            _ => {
                let k = self.vertices.len();
                let mut twice = 0.0;
                for i in 0..k {
                    let p = self.vertices[i];
                    let q = self.vertices[(i + 1) % k];
                    twice += p[0] * q[1] - q[0] * p[1];
                }
                twice.abs() / 2.0
            }
        }
    }

    pub fn circumradius(&self) -> f64 {
        self.vertices
            .iter()
            .map(|v| dot(self.dim, v, v).sqrt())
            .fold(0.0, f64::max)
    }

    /// Minimum of the gauge over the boundary of the unit box, sampled.
    /// Used to size quadrature boxes: on the boundary of [-R, R]^n the
    /// potential ||x||_K^q / q is at least (R g_min)^q / q.
    pub fn min_gauge_on_unit_box_boundary(&self) -> f64 {
        match self.dim {
            1 => self.gauge(&[1.0]).min(self.gauge(&[-1.0])),
            _ => {
                let mut min = f64::INFINITY;
                let steps = 256;
                for i in 0..=steps {
                    let t = -1.0 + 2.0 * i as f64 / steps as f64;
                    for p in [[1.0, t], [-1.0, t], [t, 1.0], [t, -1.0]] {
                        min = min.min(self.gauge(&p));
                    }
                }
                min * 0.98
            }
        }
    }

    /// Image T^{-1} K, i.e. the body whose gauge is x -> ||Tx||_K.
    pub fn preimage(&self, t: &DMatrix<f64>) -> Result<ConvexBody> {
        let inv = t
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::NearSingular(f64::INFINITY))?;
        let verts: Vec<Vec<f64>> = self
            .vertices
            .iter()
            .map(|v| {
                (0..self.dim)
                    .map(|i| (0..self.dim).map(|j| inv[(i, j)] * v[j]).sum())
                    .collect()
            })
            .collect();
        ConvexBody::from_vertices(self.dim, &verts)
    }

    /// Dilate by c > 0.
    pub fn scaled(&self, c: f64) -> Result<ConvexBody> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParameter(format!("scale {c}")));
        }
        let verts: Vec<Vec<f64>> = self
            .vertices
            .iter()
            .map(|v| v[..self.dim].iter().map(|&x| x * c).collect())
            .collect();
        ConvexBody::from_vertices(self.dim, &verts)
    }

    /// Unit cube [-1, 1]^dim.
    pub fn unit_cube(dim: usize) -> Result<ConvexBody> {
        match dim {
            1 => ConvexBody::from_vertices(1, &[vec![-1.0], vec![1.0]]),
            _ => ConvexBody::from_vertices(
                2,
                &[vec![1.0, 1.0], vec![-1.0, 1.0], vec![-1.0, -1.0], vec![1.0, -1.0]],
            ),
        }
    }

    /// Regular polygon with `k` vertices and circumradius 1.
    pub fn regular_polygon(k: usize) -> Result<ConvexBody> {
        let verts: Vec<Vec<f64>> = (0..k)
            .map(|i| {
                let a = 2.0 * std::f64::consts::PI * i as f64 / k as f64;
                vec![a.cos(), a.sin()]
            })
            .collect();
        ConvexBody::from_vertices(2, &verts)
    }

    /// Minkowski sum with another convex polygon (exact, by hulling the
    /// pairwise vertex sums). Ground truth for the p = 1 indicator identity.
    pub fn minkowski_sum(&self, other: &ConvexBody) -> Result<ConvexBody> {
        if self.dim != other.dim {
            return Err(Error::InvalidParameter("dimension mismatch".into()));
        }
        let mut sums = Vec::new();
        for a in &self.vertices {
            for b in &other.vertices {
                sums.push((0..self.dim).map(|i| a[i] + b[i]).collect::<Vec<f64>>());
            }
        }
        ConvexBody::from_vertices(self.dim, &sums)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn square_roundtrip() {
        let k = ConvexBody::unit_cube(2).unwrap();
        assert_abs_diff_eq!(k.volume(), 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(k.gauge(&[0.5, -0.25]), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(k.support(&[1.0, 1.0]), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(k.circumradius(), 2.0f64.sqrt(), epsilon = 1e-12);

        // Halfspace form rebuilt from the facets matches.
        let normals: Vec<Vec<f64>> = k.halfspaces().iter().map(|(n, _)| n[..2].to_vec()).collect();
        let offsets: Vec<f64> = k.halfspaces().iter().map(|(_, o)| *o).collect();
        let k2 = ConvexBody::from_halfspaces(2, &normals, &offsets).unwrap();
        assert_abs_diff_eq!(k2.volume(), 4.0, epsilon = 1e-9);
    }

    #[test]
    fn polar_of_cube_is_cross_polytope() {
        let k = ConvexBody::unit_cube(2).unwrap();
        let p = k.polar().unwrap();
        assert_abs_diff_eq!(p.volume(), 2.0, epsilon = 1e-9);
        // h_{K polar} equals the gauge of K.
        for y in [[0.7, 0.1], [-0.3, 0.9], [1.5, -2.0]] {
            assert_abs_diff_eq!(p.support(&y), k.gauge(&y), epsilon = 1e-9);
        }
    }

    #[test]
    fn gauge_is_positively_homogeneous() {
        let k = ConvexBody::regular_polygon(6).unwrap();
        for y in [[0.7, 0.1], [-0.3, 0.9]] {
            let g = k.gauge(&y);
            assert_abs_diff_eq!(k.gauge(&[3.0 * y[0], 3.0 * y[1]]), 3.0 * g, epsilon = 1e-12);
        }
        assert_eq!(k.gauge(&[0.0, 0.0]), 0.0);
    }

    #[test]
    fn origin_must_be_interior() {
        assert!(ConvexBody::from_vertices(2, &[vec![1.0, 0.0], vec![2.0, 0.0], vec![1.5, 1.0]]).is_err());
    }

    #[test]
    fn interval_body() {
        let k = ConvexBody::from_vertices(1, &[vec![-0.5], vec![2.0]]).unwrap();
        assert_abs_diff_eq!(k.volume(), 2.5, epsilon = 1e-12);
        assert_abs_diff_eq!(k.gauge(&[-1.0]), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(k.support(&[-1.0]), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn minkowski_sum_of_squares() {
        let k = ConvexBody::unit_cube(2).unwrap();
        let rot: Vec<Vec<f64>> = k
            .vertices()
            .iter()
            .map(|v| {
                let c = std::f64::consts::FRAC_1_SQRT_2;
                vec![c * (v[0] - v[1]), c * (v[0] + v[1])]
            })
            .collect();
        let l = ConvexBody::from_vertices(2, &rot).unwrap();
        let s = k.minkowski_sum(&l).unwrap();
        // area(K + L) = area(K) + 2 V(K, L) + area(L) = 4 + 8 sqrt(2) + 4.
        assert_eq!(s.vertices().len(), 8);
        assert_abs_diff_eq!(s.volume(), 8.0 + 8.0 * 2.0f64.sqrt(), epsilon = 1e-9);
    }
}
