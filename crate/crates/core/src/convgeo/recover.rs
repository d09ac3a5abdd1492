//! Vertex recovery from a support-function oracle.

use alloc::vec::Vec;
use core::f64::consts::PI;

use super::directions::angle_dir;
use super::hull::hull2d;
use super::GeomError;
use crate::linalg::{dist, dot, Point};

pub struct Recovered {
    pub vertices: Vec<Point>,
    /// Largest observed `|max_v <v,d> - h(d)|` over verification directions.
    pub deviation: f64,
    pub exact: bool,
}

fn checked(h: f64, d: &[f64]) -> Result<f64, GeomError> {
    if h.is_nan() {
        Err(GeomError::OracleFailure)
    } else if !h.is_finite() {
        Err(GeomError::Unbounded { direction: d.to_vec() })
    } else {
        Ok(h)
    }
}

pub fn max_dot(vs: &[Point], d: &[f64]) -> f64 {
    vs.iter().map(|v| dot(v, d)).fold(f64::NEG_INFINITY, f64::max)
}

/// Planar recovery. Consecutive tangent lines are intersected; wherever the
/// intersection overshoots the support at the mid-angle, the gap is bisected
/// until it closes or `budget` extra evaluations are spent.
///
/// `noise` is an absolute accuracy of the oracle; it widens the refinement,
/// merge and exactness thresholds.
pub fn recover_2d(oracle: &dyn Fn(&[f64]) -> f64, angles: &[f64], budget: usize, noise: f64) -> Result<Recovered, GeomError> {
    let mut list: Vec<(f64, f64)> = Vec::with_capacity(angles.len());
    for &a in angles {
        let d = angle_dir(a);
        list.push((a, checked(oracle(&d), &d)?));
    }
    list.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let scale = list.iter().map(|p| libm::fabs(p.1)).fold(0.0, f64::max);
    let thr = (1e-10 * (1.0 + scale)).max(0.1 * noise);
    let mut spent = 0usize;
    loop {
        let m = list.len();
        let mut next = Vec::with_capacity(2 * m);
        let mut inserted = false;
        for i in 0..m {
            let (a, ha) = list[i];
            next.push((a, ha));
            let (mut b, hb) = list[(i + 1) % m];
            if i + 1 == m {
                b += 2.0 * PI;
            }
            let w = b - a;
            if w <= 1e-9 || w >= PI || spent >= budget {
                continue;
            }
            let Some(p) = corner(a, ha, b, hb) else { continue };
            let mid = 0.5 * (a + b);
            let u = angle_dir(mid);
            let hm = checked(oracle(&u), &u)?;
            spent += 1;
            if dot(&p, &u) - hm > thr {
                next.push((if mid >= 2.0 * PI { mid - 2.0 * PI } else { mid }, hm));
                inserted = true;
            }
        }
        next.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        list = next;
        if !inserted || spent >= budget {
            break;
        }
    }
    let m = list.len();
    let mut cand: Vec<Point> = Vec::new();
    for i in 0..m {
        let (a, ha) = list[i];
        let (mut b, hb) = list[(i + 1) % m];
        if i + 1 == m {
            b += 2.0 * PI;
        }
        let w = b - a;
        if !(1e-7..PI).contains(&w) {
            continue;
        }
        if let Some(p) = corner(a, ha, b, hb) {
            cand.push(p);
        }
    }
    if cand.is_empty() {
        return Err(GeomError::OracleFailure);
    }
    let exact_tol = (1e-9 * (1.0 + scale)).max(noise);
    let idx = hull2d(&cand, exact_tol);
    let vertices: Vec<Point> = idx.into_iter().map(|i| cand[i].clone()).collect();
    let mut deviation: f64 = 0.0;
    for &(a, h) in &list {
        deviation = deviation.max(libm::fabs(max_dot(&vertices, &angle_dir(a)) - h));
    }
    // Verification angles sit at a non-dyadic offset so they never coincide
    // with refinement angles.
    for k in 0..angles.len() {
        let mid = 2.0 * PI * (k as f64 + 0.381_966_011_250_105) / angles.len() as f64;
        let u = angle_dir(mid);
        deviation = deviation.max(libm::fabs(max_dot(&vertices, &u) - checked(oracle(&u), &u)?));
    }
    let exact = deviation <= exact_tol;
    Ok(Recovered { vertices, deviation, exact })
}

fn corner(a: f64, ha: f64, b: f64, hb: f64) -> Option<Point> {
    let (ca, sa) = (libm::cos(a), libm::sin(a));
    let (cb, sb) = (libm::cos(b), libm::sin(b));
    let det = ca * sb - sa * cb;
    if libm::fabs(det) < 1e-300 {
        return None;
    }
    Some(alloc::vec![(ha * sb - hb * sa) / det, (ca * hb - cb * ha) / det])
}

/// Spatial recovery by clipping a box with every sampled halfspace.
pub fn recover_3d(oracle: &dyn Fn(&[f64]) -> f64, dirs: &[Point], verify: &[Point], noise: f64) -> Result<Recovered, GeomError> {
    let mut hs = Vec::with_capacity(dirs.len());
    for d in dirs {
        hs.push(checked(oracle(d), d)?);
    }
    let scale = hs.iter().map(|h| libm::fabs(*h)).fold(0.0, f64::max);
    let b = 2.0 * scale + 1.0;
    let mut faces = cube(b);
    let eps = 1e-12 * (1.0 + scale);
    for (d, &h) in dirs.iter().zip(&hs) {
        faces = clip(&faces, d, h, eps);
        if faces.is_empty() {
            break;
        }
    }
    let merge_tol = (1e-9 * (1.0 + scale)).max(noise);
    let mut vertices: Vec<Point> = Vec::new();
    for f in &faces {
        for p in f {
            if !vertices.iter().any(|v| dist(v, p) <= merge_tol) {
                vertices.push(p.clone());
            }
        }
    }
    if vertices.is_empty() {
        return Err(GeomError::OracleFailure);
    }
    let mut deviation: f64 = 0.0;
    for d in dirs.iter().chain(verify) {
        deviation = deviation.max(libm::fabs(max_dot(&vertices, d) - checked(oracle(d), d)?));
    }
    let exact = deviation <= merge_tol;
    Ok(Recovered { vertices, deviation, exact })
}

fn cube(b: f64) -> Vec<Vec<Point>> {
    let v = |x: f64, y: f64, z: f64| alloc::vec![x * b, y * b, z * b];
    alloc::vec![
        alloc::vec![v(-1., -1., -1.), v(-1., 1., -1.), v(1., 1., -1.), v(1., -1., -1.)],
        alloc::vec![v(-1., -1., 1.), v(1., -1., 1.), v(1., 1., 1.), v(-1., 1., 1.)],
        alloc::vec![v(-1., -1., -1.), v(1., -1., -1.), v(1., -1., 1.), v(-1., -1., 1.)],
        alloc::vec![v(-1., 1., -1.), v(-1., 1., 1.), v(1., 1., 1.), v(1., 1., -1.)],
        alloc::vec![v(-1., -1., -1.), v(-1., -1., 1.), v(-1., 1., 1.), v(-1., 1., -1.)],
        alloc::vec![v(1., -1., -1.), v(1., 1., -1.), v(1., 1., 1.), v(1., -1., 1.)],
    ]
}

fn clip(faces: &[Vec<Point>], n: &[f64], h: f64, eps: f64) -> Vec<Vec<Point>> {
    let mut out = Vec::with_capacity(faces.len() + 1);
    let mut cap: Vec<Point> = Vec::new();
    for f in faces {
        let m = f.len();
        let mut poly: Vec<Point> = Vec::with_capacity(m + 2);
        for i in 0..m {
            let p = &f[i];
            let q = &f[(i + 1) % m];
            let sp = dot(p, n) - h;
            let sq = dot(q, n) - h;
            if sp <= eps {
                poly.push(p.clone());
            }
            if (sp > eps && sq < -eps) || (sp < -eps && sq > eps) {
                let t = sp / (sp - sq);
                let x: Point = p.iter().zip(q).map(|(a, b)| a + t * (b - a)).collect();
                cap.push(x.clone());
                poly.push(x);
            } else if libm::fabs(sp) <= eps {
                cap.push(p.clone());
            }
        }
        if poly.len() >= 3 {
            out.push(poly);
        }
    }
    if cap.len() >= 3 {
        let c: Point = (0..3).map(|k| cap.iter().map(|p| p[k]).sum::<f64>() / cap.len() as f64).collect();
        let e1 = {
            let a = if libm::fabs(n[0]) < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
            let t = dot(&a, n);
            let w: Point = (0..3).map(|k| a[k] - t * n[k]).collect();
            crate::linalg::normalize(&w).unwrap()
        };
        let e2 = alloc::vec![n[1] * e1[2] - n[2] * e1[1], n[2] * e1[0] - n[0] * e1[2], n[0] * e1[1] - n[1] * e1[0]];
        let mut pts: Vec<(f64, Point)> = cap
            .into_iter()
            .map(|p| {
                let r: Point = (0..3).map(|k| p[k] - c[k]).collect();
                (libm::atan2(dot(&r, &e2), dot(&r, &e1)), p)
            })
            .collect();
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut poly: Vec<Point> = Vec::new();
        for (_, p) in pts {
            if poly.last().is_none_or(|l| dist(l, &p) > eps) {
                poly.push(p);
            }
        }
        if poly.len() >= 3 {
            out.push(poly);
        }
    }
    out
}
