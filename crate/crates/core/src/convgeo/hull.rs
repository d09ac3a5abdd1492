//! Small exact-ish kernels: planar hulls, Wolfe's minimum-norm point and
//! nonnegative least squares.

use alloc::vec::Vec;

use crate::linalg::{dot, norm, solve, sub, Point};

fn cross(o: &[f64], a: &[f64], b: &[f64]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Indices of the planar convex hull in counter-clockwise order (Andrew's
/// monotone chain). Points within `tol` of an edge are dropped; a degenerate
/// input yields one or two indices.
pub fn hull2d(points: &[Point], tol: f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| {
        points[a][0]
            .partial_cmp(&points[b][0])
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(points[a][1].partial_cmp(&points[b][1]).unwrap_or(core::cmp::Ordering::Equal))
    });
    idx.dedup_by(|a, b| crate::linalg::dist(&points[*a], &points[*b]) <= tol);
    if idx.len() <= 2 {
        return idx;
    }
    // Collinearity threshold scales with edge length so `tol` is a distance.
    let turn = |o: usize, a: usize, b: usize| {
        let len = crate::linalg::dist(&points[o], &points[b]).max(1e-300);
        cross(&points[o], &points[a], &points[b]) / len
    };
    let mut lower: Vec<usize> = Vec::new();
    for &i in &idx {
        while lower.len() >= 2 && turn(lower[lower.len() - 2], lower[lower.len() - 1], i) <= tol {
            lower.pop();
        }
        lower.push(i);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &i in idx.iter().rev() {
        while upper.len() >= 2 && turn(upper[upper.len() - 2], upper[upper.len() - 1], i) <= tol {
            upper.pop();
        }
        upper.push(i);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() == 2 && lower[0] == lower[1] {
        lower.pop();
    }
    // Near-duplicates that were not adjacent in the sort order end up next
    // to each other on the hull.
    loop {
        let m = lower.len();
        if m <= 1 {
            break;
        }
        let mut drop = None;
        for i in 0..m {
            let a = lower[(i + m - 1) % m];
            let b = lower[i];
            let c = lower[(i + 1) % m];
            if crate::linalg::dist(&points[a], &points[b]) <= tol || (m > 2 && turn(a, b, c) <= tol) {
                drop = Some(i);
                break;
            }
        }
        match drop {
            Some(i) => {
                lower.remove(i);
            }
            None => break,
        }
    }
    lower
}

/// Minimum-norm point of `conv(points)`: returns the point and convex weights
/// (one per input point).
pub fn min_norm_point(points: &[Point]) -> (Point, Vec<f64>) {
    let m = points.len();
    let n = points[0].len();
    let scale = points.iter().map(|p| dot(p, p)).fold(0.0, f64::max).max(1e-300);
    let eps = 1e-12 * scale;
    let start = (0..m)
        .min_by(|&a, &b| dot(&points[a], &points[a]).partial_cmp(&dot(&points[b], &points[b])).unwrap())
        .unwrap();
    let mut set: Vec<usize> = alloc::vec![start];
    let mut lam: Vec<f64> = alloc::vec![1.0];
    let combine = |set: &[usize], lam: &[f64]| {
        let mut x = alloc::vec![0.0; n];
        for (k, &i) in set.iter().enumerate() {
            for c in 0..n {
                x[c] += lam[k] * points[i][c];
            }
        }
        x
    };
    let mut x = combine(&set, &lam);
    for _ in 0..(50 * (m + n) + 100) {
        let (j, best) = (0..m)
            .map(|j| (j, dot(&x, &points[j])))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        if dot(&x, &x) - best <= eps || set.contains(&j) {
            break;
        }
        set.push(j);
        lam.push(0.0);
        loop {
            let alpha = match affine_minimizer(points, &set) {
                Some(a) => a,
                None => {
                    set.pop();
                    lam.pop();
                    break;
                }
            };
            if alpha.iter().all(|&a| a > 1e-14) {
                lam = alpha;
                break;
            }
            let mut theta = 1.0f64;
            for k in 0..set.len() {
                if alpha[k] <= 1e-14 {
                    let den = lam[k] - alpha[k];
                    if den > 0.0 {
                        theta = theta.min(lam[k] / den);
                    }
                }
            }
            for k in 0..set.len() {
                lam[k] = (1.0 - theta) * lam[k] + theta * alpha[k];
            }
            let mut k = 0;
            while k < set.len() {
                if lam[k] <= 1e-14 {
                    set.remove(k);
                    lam.remove(k);
                } else {
                    k += 1;
                }
            }
            if set.is_empty() {
                set.push(j);
                lam.push(1.0);
                break;
            }
            let s: f64 = lam.iter().sum();
            for l in lam.iter_mut() {
                *l /= s;
            }
        }
        x = combine(&set, &lam);
    }
    let mut w = alloc::vec![0.0; m];
    for (k, &i) in set.iter().enumerate() {
        w[i] += lam[k];
    }
    (x, w)
}

/// Weights of the minimum-norm point of the affine hull of `set`.
fn affine_minimizer(points: &[Point], set: &[usize]) -> Option<Vec<f64>> {
    let k = set.len();
    let dim = k + 1;
    let mut a = alloc::vec![0.0; dim * dim];
    let mut b = alloc::vec![0.0; dim];
    for r in 0..k {
        for c in 0..k {
            a[r * dim + c] = dot(&points[set[r]], &points[set[c]]);
        }
        a[r * dim + k] = 1.0;
        a[k * dim + r] = 1.0;
    }
    b[k] = 1.0;
    let sol = solve(a, b, dim)?;
    Some(sol[..k].to_vec())
}

/// Distance from `xi` to `conv(vertices)` with convex weights.
pub fn hull_distance(vertices: &[Point], xi: &[f64]) -> (f64, Vec<f64>) {
    let shifted: Vec<Point> = vertices.iter().map(|v| sub(v, xi)).collect();
    let (p, w) = min_norm_point(&shifted);
    (norm(&p), w)
}

/// Lawson-Hanson nonnegative least squares: `min |A l - b|, l >= 0` where the
/// columns of `A` are `cols`.
pub fn nnls(cols: &[Point], b: &[f64]) -> (Vec<f64>, f64) {
    let m = cols.len();
    let n = b.len();
    let mut l = alloc::vec![0.0; m];
    if m == 0 {
        return (l, norm(b));
    }
    let resid = |l: &[f64]| {
        let mut r = b.to_vec();
        for (j, c) in cols.iter().enumerate() {
            for i in 0..n {
                r[i] -= l[j] * c[i];
            }
        }
        r
    };
    let mut passive = alloc::vec![false; m];
    let scale = cols.iter().map(|c| norm(c)).fold(0.0, f64::max) * norm(b).max(1.0);
    let tol = 1e-12 * scale.max(1e-300);
    for _ in 0..(3 * m + 10) {
        let r = resid(&l);
        let w: Vec<f64> = cols.iter().map(|c| dot(c, &r)).collect();
        let cand = (0..m).filter(|&j| !passive[j] && w[j] > tol).max_by(|&a, &b| w[a].partial_cmp(&w[b]).unwrap());
        let Some(j) = cand else { break };
        passive[j] = true;
        loop {
            let p: Vec<usize> = (0..m).filter(|&j| passive[j]).collect();
            let z = ls_subset(cols, &p, b);
            if p.iter().zip(&z).all(|(_, &zj)| zj > 0.0) {
                for (k, &j) in p.iter().enumerate() {
                    l[j] = z[k];
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            for (k, &j) in p.iter().enumerate() {
                if z[k] <= 0.0 {
                    alpha = alpha.min(l[j] / (l[j] - z[k]));
                }
            }
            for (k, &j) in p.iter().enumerate() {
                l[j] += alpha * (z[k] - l[j]);
                if l[j] <= 1e-15 {
                    l[j] = 0.0;
                    passive[j] = false;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    let r = resid(&l);
    (l, norm(&r))
}

fn ls_subset(cols: &[Point], p: &[usize], b: &[f64]) -> Vec<f64> {
    let k = p.len();
    let mut a = alloc::vec![0.0; k * k];
    let mut rhs = alloc::vec![0.0; k];
    for r in 0..k {
        for c in 0..k {
            a[r * k + c] = dot(&cols[p[r]], &cols[p[c]]);
        }
        a[r * k + r] += 1e-14;
        rhs[r] = dot(&cols[p[r]], b);
    }
    solve(a, rhs, k).unwrap_or_else(|| alloc::vec![0.0; k])
}
