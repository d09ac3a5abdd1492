use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::body::{planar_angles, ConvexBody};
use super::cone::{Arc, ConeSample, Label};
use super::directions::{angle_dir, angle_of, canonical_directions, fibonacci_sphere};
use super::hull::{hull2d, hull_distance};
use super::recover::max_dot;
use super::{GeomError, Verdict};
use crate::linalg::{dot, norm, normalize, orthonormal_basis, scale, sub, zeros, Point};
use crate::model::Config;

const TAU: f64 = 2.0 * PI;

#[derive(Clone, Debug, PartialEq)]
pub struct Membership {
    pub verdict: Verdict,
    /// Relative-interior depth when inside, minus the distance when outside.
    pub margin: f64,
    /// Convex weights over the vertex list, when the vertex form was used.
    pub weights: Option<Vec<f64>>,
    /// A direction along which the point is most exposed.
    pub direction: Option<Point>,
}

impl Membership {
    pub fn contains(&self) -> bool {
        self.verdict != Verdict::Fails
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Inclusion {
    pub verdict: Verdict,
    /// `min over unit d` of `support_rhs(d) - support_lhs(d)`.
    pub margin: f64,
    /// Minimizing direction; `None` when the test was vacuous.
    pub direction: Option<Point>,
}

/// Membership of `xi` in `a` with a signed margin. Exact vertex forms use a
/// minimum-norm-point computation; other bodies are tested through their
/// support function, which is one-sided above three dimensions.
pub fn member(a: &ConvexBody, xi: &[f64], tol: f64, cfg: &Config) -> Result<Membership, GeomError> {
    if xi.len() != a.dim() {
        return Err(GeomError::DimensionMismatch { expected: a.dim(), found: xi.len() });
    }
    if let Some(verts) = a.vertices() {
        let (d, w) = hull_distance(verts, xi);
        let scale = verts.iter().chain(core::iter::once(&xi.to_vec())).map(|p| norm(p)).fold(0.0, f64::max);
        if d > 1e-12 * (1.0 + scale) {
            let nearest: Point = (0..xi.len()).map(|k| verts.iter().zip(&w).map(|(v, wi)| wi * v[k]).sum()).collect();
            let dir = normalize(&sub(xi, &nearest));
            return Ok(Membership { verdict: Verdict::from_margin(-d, tol), margin: -d, weights: Some(w), direction: dir });
        }
        let depth = relative_depth(verts, xi).max(0.0);
        return Ok(Membership { verdict: Verdict::from_margin(depth, tol), margin: depth, weights: Some(w), direction: None });
    }
    let f = |d: &[f64]| a.support(d) - dot(xi, d);
    let (m, dir) = minimize_over_directions(a.dim(), &f, cfg);
    Ok(Membership { verdict: Verdict::from_margin(m, tol), margin: m, weights: None, direction: Some(dir) })
}

/// Like [`member`] but refuses bodies without an exact vertex list.
pub fn member_exact(a: &ConvexBody, xi: &[f64], tol: f64, cfg: &Config) -> Result<Membership, GeomError> {
    if a.vertices().is_none() {
        return Err(GeomError::NoVertexForm { dim: a.dim() });
    }
    member(a, xi, tol, cfg)
}

/// Depth of `xi` inside `conv(verts)` measured within its affine hull.
fn relative_depth(verts: &[Point], xi: &[f64]) -> f64 {
    let v0 = &verts[0];
    let diffs: Vec<Point> = verts.iter().map(|v| sub(v, v0)).collect();
    let scale = verts.iter().map(|p| norm(p)).fold(0.0, f64::max);
    let basis = orthonormal_basis(&diffs, 1e-12 * (1.0 + scale));
    let coords = |p: &[f64]| -> Point {
        let r = sub(p, v0);
        basis.iter().map(|b| dot(&r, b)).collect()
    };
    let c: Vec<Point> = verts.iter().map(|v| coords(v)).collect();
    let x = coords(xi);
    match basis.len() {
        0 => 0.0,
        1 => {
            let lo = c.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
            let hi = c.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
            (x[0] - lo).min(hi - x[0])
        }
        2 => {
            let idx = hull2d(&c, 1e-12 * (1.0 + scale));
            let m = idx.len();
            let mut depth = f64::INFINITY;
            for i in 0..m {
                let p = &c[idx[i]];
                let q = &c[idx[(i + 1) % m]];
                let e = [q[0] - p[0], q[1] - p[1]];
                let len = libm::sqrt(e[0] * e[0] + e[1] * e[1]);
                if len > 0.0 {
                    // Counter-clockwise hull: interior lies to the left.
                    depth = depth.min((e[0] * (x[1] - p[1]) - e[1] * (x[0] - p[0])) / len);
                }
            }
            depth
        }
        k => fibonacci_sphere(k, 2000).iter().map(|u| max_dot(&c, u) - dot(&x, u)).fold(f64::INFINITY, f64::min),
    }
}

/// `a subset of b`, measured by `min_d support_b(d) - support_a(d)` over unit
/// directions.
pub fn included(a: &ConvexBody, b: &ConvexBody, tol: f64, cfg: &Config) -> Result<Inclusion, GeomError> {
    if a.dim() != b.dim() {
        return Err(GeomError::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    let (m, dir) = match (a.dim(), a.vertices(), b.vertices()) {
        (2, Some(va), Some(vb)) => planar_support_gap(va, vb),
        _ => {
            let f = |d: &[f64]| b.support(d) - a.support(d);
            minimize_over_directions(a.dim(), &f, cfg)
        }
    };
    Ok(Inclusion { verdict: Verdict::from_margin(m, tol), margin: m, direction: Some(dir) })
}

/// `a subset of b + k`: the support gap restricted to the polar of `k`,
/// outside of which the right-hand support is infinite.
pub fn included_in_sum_with_cone(a: &ConvexBody, b: &ConvexBody, k: &ConeSample, tol: f64, cfg: &Config) -> Result<Inclusion, GeomError> {
    if a.dim() != b.dim() || a.dim() != k.dim() {
        return Err(GeomError::DimensionMismatch { expected: a.dim(), found: b.dim().max(k.dim()) });
    }
    let polar = k.polar();
    let f = |d: &[f64]| b.support(d) - a.support(d);
    let best = if let Some(arcs) = polar.arcs() {
        minimize_over_arcs(&f, arcs, cfg)
    } else {
        polar
            .samples()
            .iter()
            .filter(|s| s.1 == Label::In)
            .map(|s| (f(&s.0), s.0.clone()))
            .min_by(|x, y| x.0.partial_cmp(&y.0).unwrap())
    };
    Ok(match best {
        Some((m, d)) => Inclusion { verdict: Verdict::from_margin(m, tol), margin: m, direction: Some(d) },
        None => Inclusion { verdict: Verdict::Holds, margin: f64::INFINITY, direction: None },
    })
}

/// `xi in b + k`.
pub fn member_of_sum_with_cone(b: &ConvexBody, k: &ConeSample, xi: &[f64], tol: f64, cfg: &Config) -> Result<Inclusion, GeomError> {
    included_in_sum_with_cone(&ConvexBody::point(xi), b, k, tol, cfg)
}

/// Hausdorff distance between two bodies via their support functions.
pub fn hausdorff(a: &ConvexBody, b: &ConvexBody, cfg: &Config) -> Result<f64, GeomError> {
    let ab = included(a, b, 0.0, cfg)?.margin;
    let ba = included(b, a, 0.0, cfg)?.margin;
    Ok((-ab).max(-ba).max(0.0))
}

/// Exact `min over unit d` of `support(vb, d) - support(va, d)` in the plane.
/// The gap is linear on each cone of the common normal fan, so its minimum
/// lies at a fan breakpoint or at the single interior critical angle.
fn planar_support_gap(va: &[Point], vb: &[Point]) -> (f64, Point) {
    let mut angles: Vec<f64> = Vec::new();
    for v in [va, vb] {
        let idx = hull2d(v, 0.0);
        let m = idx.len();
        if m == 2 {
            let e = sub(&v[idx[1]], &v[idx[0]]);
            angles.push(angle_of(&[e[1], -e[0]]));
            angles.push(angle_of(&[-e[1], e[0]]));
        } else if m > 2 {
            for i in 0..m {
                let e = sub(&v[idx[(i + 1) % m]], &v[idx[i]]);
                angles.push(angle_of(&[e[1], -e[0]]));
            }
        }
    }
    let gap = |t: f64| {
        let d = angle_dir(t);
        max_dot(vb, &d) - max_dot(va, &d)
    };
    if angles.is_empty() {
        let w = sub(&vb[0], &va[0]);
        let t = if norm(&w) == 0.0 { 0.0 } else { angle_of(&scale(-1.0, &w)) };
        return (gap(t), angle_dir(t));
    }
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    angles.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let mut cand = angles.clone();
    let m = angles.len();
    for i in 0..m {
        let lo = angles[i];
        let hi = if i + 1 < m { angles[i + 1] } else { angles[0] + TAU };
        let mid = angle_dir(0.5 * (lo + hi));
        let p = argmax(vb, &mid);
        let q = argmax(va, &mid);
        let w = sub(p, q);
        if norm(&w) > 0.0 {
            let mut t = angle_of(&scale(-1.0, &w));
            if t < lo {
                t += TAU;
            }
            if t > lo && t < hi {
                cand.push(t);
            }
        }
    }
    let mut best = (f64::INFINITY, 0.0);
    for t in cand {
        let g = gap(t);
        if g < best.0 {
            best = (g, t);
        }
    }
    (best.0, angle_dir(best.1))
}

fn argmax<'a>(v: &'a [Point], d: &[f64]) -> &'a Point {
    v.iter().max_by(|a, b| dot(a, d).partial_cmp(&dot(b, d)).unwrap()).unwrap()
}

fn zoom(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, start: (f64, f64)) -> (f64, f64) {
    let (mut lo, mut hi) = (lo, hi);
    let mut best = start;
    for _ in 0..7 {
        let m = 32;
        let step = (hi - lo) / m as f64;
        if step <= 0.0 {
            break;
        }
        for i in 0..=m {
            let t = lo + step * i as f64;
            let v = f(t);
            if v < best.0 {
                best = (v, t);
            }
        }
        lo = (best.1 - step).max(lo);
        hi = (best.1 + step).min(hi);
    }
    best
}

/// Minimum of a positively homogeneous `f` over unit directions, with its
/// minimizer. Planar problems refine the best sampled local minima on
/// successively finer angular grids; higher dimensions use a pattern search
/// on the sphere.
pub fn minimize_over_directions(dim: usize, f: &dyn Fn(&[f64]) -> f64, cfg: &Config) -> (f64, Point) {
    match dim {
        0 => (0.0, Vec::new()),
        1 => {
            let (a, b) = (f(&[1.0]), f(&[-1.0]));
            if a <= b {
                (a, alloc::vec![1.0])
            } else {
                (b, alloc::vec![-1.0])
            }
        }
        2 => {
            let (v, t) = minimize_planar(f, &planar_angles(cfg), true);
            (v, angle_dir(t))
        }
        _ => {
            let dirs = canonical_directions(dim, cfg);
            let mut vals: Vec<(f64, usize)> = dirs.iter().enumerate().map(|(i, d)| (f(d), i)).collect();
            vals.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let mut best = (vals[0].0, dirs[vals[0].1].clone());
            for &(v0, i) in vals.iter().take(8) {
                let (v, p) = sphere_pattern_search(f, dirs[i].clone(), v0);
                if v < best.0 {
                    best = (v, p);
                }
            }
            best
        }
    }
}

fn sphere_pattern_search(f: &dyn Fn(&[f64]) -> f64, mut p: Point, mut v: f64) -> (f64, Point) {
    let n = p.len();
    let mut step = 0.05;
    while step > 1e-9 {
        let mut improved = false;
        for k in 0..n {
            for s in [step, -step] {
                let mut q = p.clone();
                q[k] += s;
                if let Some(q) = normalize(&q) {
                    let fq = f(&q);
                    if fq < v {
                        v = fq;
                        p = q;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (v, p)
}

/// Sampled angles (sorted) are treated as a closed cycle when `cyclic`,
/// otherwise as an interval whose endpoints are also candidates.
fn minimize_planar(f: &dyn Fn(&[f64]) -> f64, angles: &[f64], cyclic: bool) -> (f64, f64) {
    let ft = |t: f64| f(&angle_dir(t));
    let vals: Vec<f64> = angles.iter().map(|&t| ft(t)).collect();
    let n = angles.len();
    if n == 1 {
        return (vals[0], angles[0]);
    }
    let mut minima: Vec<usize> = (0..n)
        .filter(|&i| {
            let prev = if i > 0 { Some(vals[i - 1]) } else if cyclic { Some(vals[n - 1]) } else { None };
            let next = if i + 1 < n { Some(vals[i + 1]) } else if cyclic { Some(vals[0]) } else { None };
            prev.is_none_or(|p| vals[i] <= p) && next.is_none_or(|q| vals[i] <= q)
        })
        .collect();
    minima.sort_by(|a, b| vals[*a].partial_cmp(&vals[*b]).unwrap());
    minima.truncate(8);
    let mut best = (vals[minima[0]], angles[minima[0]]);
    for &i in &minima {
        let lo = if i > 0 { angles[i - 1] } else if cyclic { angles[n - 1] - TAU } else { angles[0] };
        let hi = if i + 1 < n { angles[i + 1] } else if cyclic { angles[0] + TAU } else { angles[n - 1] };
        let r = zoom(&ft, lo, hi, (vals[i], angles[i]));
        if r.0 < best.0 {
            best = r;
        }
    }
    best
}

fn minimize_over_arcs(f: &dyn Fn(&[f64]) -> f64, arcs: &[Arc], cfg: &Config) -> Option<(f64, Point)> {
    if arcs.iter().any(|a| a.is_full()) {
        return Some(minimize_over_directions(2, f, cfg));
    }
    let step = TAU / cfg.n_dir_2d.max(8) as f64;
    let mut best: Option<(f64, f64)> = None;
    for a in arcs {
        let m = libm::ceil(a.width / step) as usize;
        let angles: Vec<f64> = if m == 0 { alloc::vec![a.start] } else { (0..=m).map(|i| a.start + a.width * i as f64 / m as f64).collect() };
        let r = minimize_planar(f, &angles, false);
        if best.is_none_or(|b| r.0 < b.0) {
            best = Some(r);
        }
    }
    best.map(|(v, t)| (v, angle_dir(t)))
}

/// Generator points of one Minkowski summand. With `with_zero` the summand
/// is `scale * conv({0} u points)`, otherwise `scale * conv(points)`.
#[derive(Clone, Debug)]
pub struct Generators {
    pub label: String,
    pub points: Vec<(Point, String)>,
    pub scale: f64,
    pub with_zero: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertificateTerm {
    pub summand: String,
    pub point_label: String,
    pub point: Point,
    /// Multiplier of `point` (a convex weight times the summand scale).
    pub coefficient: f64,
}

/// `target ~ sum coefficient * point`.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub terms: Vec<CertificateTerm>,
    pub reconstruction: Point,
    pub residual: f64,
}

impl Certificate {
    /// Sum of the terms, recomputed from scratch.
    pub fn evaluate(&self, dim: usize) -> Point {
        let mut s = zeros(dim);
        for t in &self.terms {
            for (si, pi) in s.iter_mut().zip(&t.point) {
                *si += t.coefficient * pi;
            }
        }
        s
    }
}

const COMBO_LIMIT: usize = 50_000;

/// Express the point of `sum of summands` nearest to `target` as explicit
/// multipliers of the generators. `None` when the vertex enumeration would
/// exceed an internal size limit.
pub fn sum_certificate(target: &[f64], summands: &[Generators]) -> Option<Certificate> {
    let dim = target.len();
    // Each combination records, per summand, the generator index used
    // (`usize::MAX` for the origin).
    let mut combos: Vec<(Point, Vec<usize>)> = alloc::vec![(zeros(dim), Vec::new())];
    for s in summands {
        let mut gens: Vec<(Point, usize)> = s.points.iter().enumerate().map(|(i, (p, _))| (scale(s.scale, p), i)).collect();
        if s.with_zero {
            gens.push((zeros(dim), usize::MAX));
        }
        if gens.is_empty() {
            continue;
        }
        if combos.len() * gens.len() > COMBO_LIMIT {
            return None;
        }
        let mut next = Vec::with_capacity(combos.len() * gens.len());
        for (p, path) in &combos {
            for (g, gi) in &gens {
                let mut q = path.clone();
                q.push(*gi);
                next.push((p.iter().zip(g).map(|(a, b)| a + b).collect::<Point>(), q));
            }
        }
        combos = reduce_combos(dim, next);
    }
    let pts: Vec<Point> = combos.iter().map(|c| c.0.clone()).collect();
    let (_, w) = hull_distance(&pts, target);
    let mut terms: Vec<CertificateTerm> = Vec::new();
    let active: Vec<&Generators> = summands.iter().filter(|s| !s.points.is_empty() || s.with_zero).collect();
    for (c, wc) in combos.iter().zip(&w) {
        if *wc <= 0.0 {
            continue;
        }
        for (k, &gi) in c.1.iter().enumerate() {
            if gi == usize::MAX {
                continue;
            }
            let s = active[k];
            let (p, lbl) = &s.points[gi];
            match terms.iter_mut().find(|t| t.summand == s.label && t.point_label == *lbl && t.point == *p) {
                Some(t) => t.coefficient += wc * s.scale,
                None => terms.push(CertificateTerm { summand: s.label.clone(), point_label: lbl.clone(), point: p.clone(), coefficient: wc * s.scale }),
            }
        }
    }
    let mut cert = Certificate { terms, reconstruction: Vec::new(), residual: 0.0 };
    cert.reconstruction = cert.evaluate(dim);
    cert.residual = norm(&sub(&cert.reconstruction, target));
    Some(cert)
}

fn reduce_combos(dim: usize, combos: Vec<(Point, Vec<usize>)>) -> Vec<(Point, Vec<usize>)> {
    let scale = combos.iter().map(|c| norm(&c.0)).fold(0.0, f64::max);
    let tol = 1e-12 * (1.0 + scale);
    if dim == 2 {
        let pts: Vec<Point> = combos.iter().map(|c| c.0.clone()).collect();
        let idx = hull2d(&pts, tol);
        return idx.into_iter().map(|i| combos[i].clone()).collect();
    }
    let mut out: Vec<(Point, Vec<usize>)> = Vec::new();
    for c in combos {
        if !out.iter().any(|o| crate::linalg::dist(&o.0, &c.0) <= tol) {
            out.push(c);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn cfg() -> Config {
        Config::default()
    }

    #[test]
    fn member_examples() {
        let seg = ConvexBody::segment(&[-2.0, 0.0], &[1.0, 0.0]);
        let m = member(&seg, &[0.0, 0.0], 1e-6, &cfg()).unwrap();
        assert!((m.margin - 1.0).abs() < 1e-12 && m.verdict == Verdict::Holds);
        let ball = ConvexBody::ball(&[0.0, 0.0], 1.0);
        let m = member(&ball, &[2.0, 0.0], 1e-6, &cfg()).unwrap();
        assert!((m.margin + 1.0).abs() < 1e-9 && m.verdict == Verdict::Fails);
        let p = ConvexBody::point(&[1.0, 0.0]);
        let m = member(&p, &[1.0, 0.0], 1e-6, &cfg()).unwrap();
        assert!(m.margin == 0.0 && m.contains());
    }

    #[test]
    fn included_examples() {
        let seg = ConvexBody::segment(&[-1.0, 0.0], &[1.0, 0.0]);
        let ball = ConvexBody::ball(&[0.0, 0.0], 1.0);
        let r = included(&seg, &ball, 1e-6, &cfg()).unwrap();
        assert!(r.margin.abs() < 1e-9 && r.verdict == Verdict::Boundary);
        assert_eq!(included(&ball, &seg, 1e-6, &cfg()).unwrap().verdict, Verdict::Fails);
        let r = included(&seg, &ConvexBody::zero(2), 1e-6, &cfg()).unwrap();
        assert!((r.margin + 1.0).abs() < 1e-12 && r.verdict == Verdict::Fails);
    }

    #[test]
    fn exact_planar_gap_matches_sampling() {
        let a = ConvexBody::from_points(2, vec![vec![0.0, 0.0], vec![2.0, 0.3], vec![0.5, 1.7]]).unwrap();
        let b = ConvexBody::from_points(2, vec![vec![-1.0, -1.0], vec![2.5, -0.5], vec![1.0, 2.0], vec![-0.7, 1.1]]).unwrap();
        let exact = planar_support_gap(a.vertices().unwrap(), b.vertices().unwrap()).0;
        let f = |d: &[f64]| b.support(d) - a.support(d);
        let (sampled, _) = minimize_over_directions(2, &f, &cfg());
        assert!(exact <= sampled + 1e-12 && sampled - exact < 1e-9, "{exact} {sampled}");
    }

    #[test]
    fn capped_disk_inclusion_fails_by_refinement() {
        // [-1,1]x{0} is not inside L * conv({0} u (B + (0,-1))); the gap is
        // -1/(2L), attained within a thousandth of a radian of (0,1).
        let disk = ConvexBody::ball(&[0.0, -1.0], 1.0);
        let rhs = ConvexBody::capped(&disk, 1e3);
        let seg = ConvexBody::segment(&[-1.0, 0.0], &[1.0, 0.0]);
        let r = included(&seg, &rhs, 1e-6, &cfg()).unwrap();
        assert!((r.margin + 5e-4).abs() < 1e-7, "{}", r.margin);
    }

    #[test]
    fn sum_with_closed_cone_is_boundary() {
        let disk = ConvexBody::ball(&[0.0, -1.0], 1.0);
        let k = ConeSample::generated(2, &[disk], &cfg());
        let seg = ConvexBody::segment(&[-1.0, 0.0], &[1.0, 0.0]);
        let r = included_in_sum_with_cone(&seg, &ConvexBody::zero(2), &k, 1e-6, &cfg()).unwrap();
        assert_eq!(r.verdict, Verdict::Boundary);
        assert!(r.margin.abs() < 1e-9);
    }

    #[test]
    fn certificate_reconstructs_target() {
        let f = Generators { label: "F".into(), points: vec![(vec![-2.0, 0.0], "a".into()), (vec![1.0, 0.0], "b".into())], scale: 1.0, with_zero: false };
        let g = Generators { label: "psi1".into(), points: vec![(vec![0.0, -1.0], "v".into())], scale: 10.0, with_zero: true };
        let c = sum_certificate(&[0.5, -3.0], &[f, g]).unwrap();
        assert!(c.residual < 1e-12);
        let lam: f64 = c.terms.iter().filter(|t| t.summand == "psi1").map(|t| t.coefficient).sum();
        assert!((lam - 3.0).abs() < 1e-12);
    }
}
