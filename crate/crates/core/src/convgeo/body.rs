use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::f64::consts::PI;

use super::directions::{canonical_directions, fibonacci_sphere};
use super::hull::hull2d;
use super::recover::{max_dot, recover_2d, recover_3d};
use super::GeomError;
use crate::linalg::{add, dist, dot, norm, scale, Point};
use crate::model::Config;

pub type SupportFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// How a body was built. Support functions are always evaluated from this
/// tree, so composite bodies keep exact supports even when no vertex list
/// is available.
#[derive(Clone)]
pub enum Shape {
    Points(Vec<Point>),
    Ball { center: Point, radius: f64 },
    Oracle(SupportFn),
    /// `a + sign * b`.
    Sum(ConvexBody, ConvexBody, f64),
    Hull(Vec<ConvexBody>),
    Enlarge(ConvexBody, f64),
    /// `cap * conv({0} u a)`, i.e. the union of `t a` over `t` in `[0, cap]`.
    Capped(ConvexBody, f64),
    Scaled(ConvexBody, f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exactness {
    Exact,
    /// An outer bound of the intended set.
    Outer,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Provenance {
    pub exactness: Exactness,
    /// Support deviation of the stored vertex list; zero when the list is exact.
    pub approx_bound: f64,
    pub non_lipschitz: bool,
    pub notes: Vec<String>,
}

impl Default for Provenance {
    fn default() -> Self {
        Provenance { exactness: Exactness::Exact, approx_bound: 0.0, non_lipschitz: false, notes: Vec::new() }
    }
}

impl Provenance {
    fn merge(&self, other: &Provenance) -> Provenance {
        let mut notes = self.notes.clone();
        for n in &other.notes {
            if !notes.contains(n) {
                notes.push(n.clone());
            }
        }
        Provenance {
            exactness: if self.exactness == Exactness::Outer || other.exactness == Exactness::Outer {
                Exactness::Outer
            } else {
                Exactness::Exact
            },
            approx_bound: 0.0,
            non_lipschitz: self.non_lipschitz || other.non_lipschitz,
            notes,
        }
    }
}

/// A compact convex set in `R^n`.
#[derive(Clone)]
pub struct ConvexBody {
    dim: usize,
    shape: Arc<Shape>,
    vertices: Option<Arc<Vec<Point>>>,
    vertices_exact: bool,
    tag: Provenance,
}

impl fmt::Debug for ConvexBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConvexBody")
            .field("dim", &self.dim)
            .field("vertices", &self.vertices.as_deref())
            .field("vertices_exact", &self.vertices_exact)
            .field("tag", &self.tag)
            .finish()
    }
}

const VERTEX_LIMIT: usize = 20_000;

fn reduce(dim: usize, mut pts: Vec<Point>) -> Vec<Point> {
    let scale = pts.iter().map(|p| norm(p)).fold(0.0, f64::max);
    let tol = 1e-12 * (1.0 + scale);
    match dim {
        1 => {
            let lo = pts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
            let hi = pts.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
            if hi - lo <= tol {
                alloc::vec![alloc::vec![lo]]
            } else {
                alloc::vec![alloc::vec![lo], alloc::vec![hi]]
            }
        }
        2 => hull2d(&pts, tol).into_iter().map(|i| pts[i].clone()).collect(),
        _ => {
            let mut out: Vec<Point> = Vec::with_capacity(pts.len());
            for p in pts.drain(..) {
                if !out.iter().any(|q| dist(q, &p) <= tol) {
                    out.push(p);
                }
            }
            if dim == 3 && out.len() > 8 {
                prune_interior(&mut out, tol);
            }
            out
        }
    }
}

/// Drop points that are never the unique maximizer over a direction sample.
fn prune_interior(pts: &mut Vec<Point>, tol: f64) {
    let dirs = fibonacci_sphere(3, 2000);
    let mut keep = alloc::vec![false; pts.len()];
    for d in &dirs {
        let best = pts.iter().map(|p| dot(p, d)).fold(f64::NEG_INFINITY, f64::max);
        for (i, p) in pts.iter().enumerate() {
            if dot(p, d) >= best - tol {
                keep[i] = true;
            }
        }
    }
    let mut i = 0;
    pts.retain(|_| {
        i += 1;
        keep[i - 1]
    });
}

impl ConvexBody {
    fn build(dim: usize, shape: Shape, vertices: Option<Vec<Point>>, exact: bool, tag: Provenance) -> Self {
        let vertices = vertices.filter(|v| v.len() <= VERTEX_LIMIT).map(Arc::new);
        let vertices_exact = exact && vertices.is_some();
        ConvexBody { dim, shape: Arc::new(shape), vertices, vertices_exact, tag }
    }

    /// Convex hull of finitely many points.
    pub fn from_points(dim: usize, pts: Vec<Point>) -> Result<Self, GeomError> {
        if pts.is_empty() {
            return Err(GeomError::Empty);
        }
        if let Some(p) = pts.iter().find(|p| p.len() != dim) {
            return Err(GeomError::DimensionMismatch { expected: dim, found: p.len() });
        }
        let v = reduce(dim, pts);
        Ok(Self::build(dim, Shape::Points(v.clone()), Some(v), true, Provenance::default()))
    }

    pub fn point(p: &[f64]) -> Self {
        Self::from_points(p.len(), alloc::vec![p.to_vec()]).expect("nonempty")
    }

    pub fn zero(dim: usize) -> Self {
        Self::point(&alloc::vec![0.0; dim])
    }

    pub fn segment(a: &[f64], b: &[f64]) -> Self {
        Self::from_points(a.len(), alloc::vec![a.to_vec(), b.to_vec()]).expect("matching dims")
    }

    /// Closed Euclidean ball; support-only.
    pub fn ball(center: &[f64], radius: f64) -> Self {
        let dim = center.len();
        if radius == 0.0 {
            return Self::point(center);
        }
        Self::build(dim, Shape::Ball { center: center.to_vec(), radius: radius.abs() }, None, false, Provenance::default())
    }

    /// Body with the given support function. In dimensions one to three a
    /// vertex list is recovered from sampled tangent hyperplanes; it is
    /// marked exact only when it reproduces the oracle to `1e-9` relative.
    pub fn from_support(dim: usize, oracle: SupportFn, cfg: &Config) -> Result<Self, GeomError> {
        Self::from_support_with_noise(dim, oracle, cfg, 0.0)
    }

    /// [`ConvexBody::from_support`] for an oracle accurate only to `noise`
    /// (for instance one built on finite differences).
    pub fn from_support_with_noise(dim: usize, oracle: SupportFn, cfg: &Config, noise: f64) -> Result<Self, GeomError> {
        let dirs = canonical_directions(dim, cfg);
        check_sublinear(&*oracle, &dirs, cfg.geom_tol.max(4.0 * noise))?;
        let (vertices, exact, bound) = match dim {
            1 => {
                let hi = oracle(&[1.0]);
                let lo = -oracle(&[-1.0]);
                let v = if hi - lo <= (1e-12 * (1.0 + hi.abs())).max(noise) {
                    alloc::vec![alloc::vec![0.5 * (hi + lo)]]
                } else {
                    alloc::vec![alloc::vec![lo], alloc::vec![hi]]
                };
                (Some(v), true, 0.0)
            }
            2 => {
                let angles: Vec<f64> = (0..cfg.n_dir_2d).map(|k| 2.0 * PI * k as f64 / cfg.n_dir_2d as f64).collect();
                let r = recover_2d(&*oracle, &angles, 16 * cfg.n_dir_2d, noise)?;
                (Some(r.vertices), r.exact, r.deviation)
            }
            3 => {
                let verify = fibonacci_sphere(3, 2 * cfg.n_dir_3d + 1);
                let r = recover_3d(&*oracle, &dirs, &verify[6..], noise)?;
                (Some(r.vertices), r.exact, r.deviation)
            }
            _ => (None, false, f64::INFINITY),
        };
        let tag = Provenance { approx_bound: if exact { 0.0 } else { bound }, ..Provenance::default() };
        Ok(Self::build(dim, Shape::Oracle(oracle), vertices, exact, tag))
    }

    /// `a + sign * b` (Minkowski sum or difference).
    pub fn minkowski(a: &ConvexBody, b: &ConvexBody, sign: f64) -> Result<Self, GeomError> {
        same_dim(a, b)?;
        let sign = if sign < 0.0 { -1.0 } else { 1.0 };
        let verts = match (&a.vertices, &b.vertices) {
            (Some(va), Some(vb)) if va.len() * vb.len() <= 4 * VERTEX_LIMIT => {
                let mut s = Vec::with_capacity(va.len() * vb.len());
                for p in va.iter() {
                    for q in vb.iter() {
                        s.push(p.iter().zip(q).map(|(x, y)| x + sign * y).collect());
                    }
                }
                Some(reduce(a.dim, s))
            }
            _ => None,
        };
        let mut tag = a.tag.merge(&b.tag);
        tag.approx_bound = a.tag.approx_bound + b.tag.approx_bound;
        let exact = a.vertices_exact && b.vertices_exact;
        Ok(Self::build(a.dim, Shape::Sum(a.clone(), b.clone(), sign), verts, exact, tag))
    }

    /// `a + eps * B` with the closed Euclidean unit ball `B`.
    pub fn ball_enlarge(a: &ConvexBody, eps: f64) -> Self {
        let eps = eps.max(0.0);
        if eps == 0.0 {
            return a.clone();
        }
        let tag = a.tag.clone();
        Self::build(a.dim, Shape::Enlarge(a.clone(), eps), None, false, tag)
    }

    /// Convex hull of a union of bodies.
    pub fn hull_union(bodies: &[ConvexBody]) -> Result<Self, GeomError> {
        let first = bodies.first().ok_or(GeomError::Empty)?;
        for b in bodies {
            same_dim(first, b)?;
        }
        if bodies.len() == 1 {
            return Ok(first.clone());
        }
        let verts = if bodies.iter().all(|b| b.vertices.is_some()) {
            Some(reduce(first.dim, bodies.iter().flat_map(|b| b.vertices.as_ref().unwrap().iter().cloned()).collect()))
        } else {
            None
        };
        let mut tag = first.tag.clone();
        for b in &bodies[1..] {
            tag = tag.merge(&b.tag);
        }
        tag.approx_bound = bodies.iter().map(|b| b.tag.approx_bound).fold(0.0, f64::max);
        let exact = bodies.iter().all(|b| b.vertices_exact);
        Ok(Self::build(first.dim, Shape::Hull(bodies.to_vec()), verts, exact, tag))
    }

    /// `cap * conv({0} u a)`.
    pub fn capped(a: &ConvexBody, cap: f64) -> Self {
        let cap = cap.max(0.0);
        let verts = a.vertices.as_ref().map(|v| {
            let mut pts: Vec<Point> = v.iter().map(|p| scale(cap, p)).collect();
            pts.push(alloc::vec![0.0; a.dim]);
            reduce(a.dim, pts)
        });
        let mut tag = a.tag.clone();
        tag.approx_bound *= cap;
        Self::build(a.dim, Shape::Capped(a.clone(), cap), verts, a.vertices_exact, tag)
    }

    pub fn scaled(a: &ConvexBody, t: f64) -> Self {
        let verts = a.vertices.as_ref().map(|v| v.iter().map(|p| scale(t, p)).collect());
        let mut tag = a.tag.clone();
        tag.approx_bound *= t.abs();
        Self::build(a.dim, Shape::Scaled(a.clone(), t), verts, a.vertices_exact, tag)
    }

    pub fn negated(&self) -> Self {
        Self::scaled(self, -1.0)
    }

    pub fn translated(&self, p: &[f64]) -> Self {
        Self::minkowski(self, &Self::point(p), 1.0).expect("matching dims")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn provenance(&self) -> &Provenance {
        &self.tag
    }

    pub fn exactness(&self) -> Exactness {
        self.tag.exactness
    }

    pub fn with_exactness(mut self, e: Exactness) -> Self {
        self.tag.exactness = e;
        self
    }

    pub fn with_note(mut self, note: &str) -> Self {
        if !self.tag.notes.iter().any(|n| n == note) {
            self.tag.notes.push(note.into());
        }
        self
    }

    pub fn mark_non_lipschitz(mut self) -> Self {
        self.tag.non_lipschitz = true;
        self
    }

    /// Vertex list when it is known to reproduce the support exactly.
    pub fn vertices(&self) -> Option<&[Point]> {
        if self.vertices_exact {
            self.vertices.as_ref().map(|v| v.as_slice())
        } else {
            None
        }
    }

    /// Vertex list, possibly a polygonal approximation (see `approx_bound`).
    pub fn approx_vertices(&self) -> Option<&[Point]> {
        self.vertices.as_ref().map(|v| v.as_slice())
    }

    pub fn has_exact_vertices(&self) -> bool {
        self.vertices_exact
    }

    /// `max_{x in body} <x, d>`.
    pub fn support(&self, d: &[f64]) -> f64 {
        match &*self.shape {
            Shape::Points(p) => max_dot(p, d),
            Shape::Ball { center, radius } => dot(center, d) + radius * norm(d),
            Shape::Oracle(f) => f(d),
            Shape::Sum(a, b, s) => {
                let sd: Point = d.iter().map(|x| s * x).collect();
                a.support(d) + b.support(&sd)
            }
            Shape::Hull(bs) => bs.iter().map(|b| b.support(d)).fold(f64::NEG_INFINITY, f64::max),
            Shape::Enlarge(a, e) => a.support(d) + e * norm(d),
            Shape::Capped(a, c) => c * a.support(d).max(0.0),
            Shape::Scaled(a, t) => {
                if *t >= 0.0 {
                    t * a.support(d)
                } else {
                    let nd: Point = d.iter().map(|x| -x).collect();
                    -t * a.support(&nd)
                }
            }
        }
    }

    /// Largest norm of a point of the body.
    pub fn circumradius(&self, cfg: &Config) -> f64 {
        if let Some(v) = self.vertices() {
            return v.iter().map(|p| norm(p)).fold(0.0, f64::max);
        }
        canonical_directions(self.dim, cfg).iter().map(|d| self.support(d)).fold(0.0, f64::max)
    }

    /// Planar outline: the vertex list when present, otherwise the polygon
    /// cut out by `count` sampled tangent lines.
    pub fn outline(&self, count: usize) -> Result<Vec<Point>, GeomError> {
        if let Some(v) = self.approx_vertices() {
            return Ok(v.to_vec());
        }
        if self.dim != 2 {
            return Err(GeomError::NoVertexForm { dim: self.dim });
        }
        let angles: Vec<f64> = (0..count).map(|k| 2.0 * PI * k as f64 / count as f64).collect();
        let f = |d: &[f64]| self.support(d);
        Ok(recover_2d(&f, &angles, 0, 0.0)?.vertices)
    }

    /// A point of the body (the maximizer of the support along the first
    /// axis for vertex bodies, the center for balls).
    pub fn some_point(&self) -> Point {
        if let Some(v) = self.approx_vertices() {
            return v[0].clone();
        }
        match &*self.shape {
            Shape::Ball { center, .. } => center.clone(),
            Shape::Sum(a, b, s) => add(&a.some_point(), &scale(*s, &b.some_point())),
            Shape::Enlarge(a, _) => a.some_point(),
            Shape::Capped(_, _) => alloc::vec![0.0; self.dim],
            Shape::Scaled(a, t) => scale(*t, &a.some_point()),
            Shape::Hull(bs) => bs[0].some_point(),
            _ => alloc::vec![0.0; self.dim],
        }
    }
}

fn same_dim(a: &ConvexBody, b: &ConvexBody) -> Result<(), GeomError> {
    if a.dim != b.dim {
        Err(GeomError::DimensionMismatch { expected: a.dim, found: b.dim })
    } else {
        Ok(())
    }
}

/// Sampled subadditivity and positive homogeneity of a support oracle.
pub(crate) fn check_sublinear(h: &dyn Fn(&[f64]) -> f64, dirs: &[Point], tol: f64) -> Result<(), GeomError> {
    let m = dirs.len();
    if m == 0 {
        return Ok(());
    }
    let vals: Vec<f64> = dirs.iter().map(|d| h(d)).collect();
    for (d, v) in dirs.iter().zip(&vals) {
        if v.is_nan() {
            return Err(GeomError::OracleFailure);
        }
        if !v.is_finite() {
            return Err(GeomError::Unbounded { direction: d.clone() });
        }
    }
    let mut shifts = alloc::vec![1, 7, 45, m / 4, m / 2, m / 2 + 1, m / 3];
    shifts.retain(|s| *s > 0 && *s < m);
    for s in shifts {
        for k in 0..m {
            let l = (k + s) % m;
            let sum: Point = dirs[k].iter().zip(&dirs[l]).map(|(a, b)| a + b).collect();
            let hs = h(&sum);
            let excess = hs - vals[k] - vals[l];
            if excess > tol * (1.0 + vals[k].abs() + vals[l].abs()) || hs.is_nan() {
                return Err(GeomError::NotSublinear { d1: dirs[k].clone(), d2: dirs[l].clone(), excess });
            }
        }
    }
    for k in (0..m).step_by((m / 36).max(1)) {
        let d2: Point = dirs[k].iter().map(|x| 2.0 * x).collect();
        let excess = h(&d2) - 2.0 * vals[k];
        if excess.abs() > tol * (1.0 + vals[k].abs()) {
            return Err(GeomError::NotSublinear { d1: dirs[k].clone(), d2: dirs[k].clone(), excess });
        }
    }
    Ok(())
}

/// `(cos t, sin t)` for every canonical planar angle.
pub(crate) fn planar_angles(cfg: &Config) -> Vec<f64> {
    (0..cfg.n_dir_2d).map(|k| 2.0 * PI * k as f64 / cfg.n_dir_2d as f64).collect()
}
