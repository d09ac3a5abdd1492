//! Brute-force references for the test suite. Nothing here calls into the
//! library; every routine is a direct, slow evaluation of a definition.
#![allow(dead_code)]

use std::fmt;

pub const GRID_BUDGET: usize = 10_000_000;

#[derive(Clone, Debug, PartialEq)]
pub enum OracleError {
    BadGrid(String),
    /// No grid point satisfied the membership predicate.
    NoMember,
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::BadGrid(s) => write!(f, "bad grid: {s}"),
            OracleError::NoMember => f.write_str("no grid point lies in the set"),
        }
    }
}

/// Axis-aligned box sampled with `res[i]` points per axis, endpoints included.
#[derive(Clone, Debug)]
pub struct GridSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub res: Vec<usize>,
}

impl GridSpec {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, res: Vec<usize>) -> Result<Self, OracleError> {
        if lo.len() != hi.len() || lo.len() != res.len() || lo.is_empty() {
            return Err(OracleError::BadGrid("axis counts differ".into()));
        }
        if res.iter().any(|&r| r < 2) {
            return Err(OracleError::BadGrid("resolution below 2".into()));
        }
        let total = res.iter().try_fold(1usize, |acc, &r| acc.checked_mul(r));
        match total {
            Some(t) if t <= GRID_BUDGET => Ok(GridSpec { lo, hi, res }),
            _ => Err(OracleError::BadGrid("too many points".into())),
        }
    }

    pub fn square(half: f64, res: usize) -> Self {
        Self::new(vec![-half, -half], vec![half, half], vec![res, res]).unwrap()
    }

    /// Largest spacing over the axes.
    pub fn step(&self) -> f64 {
        (0..self.lo.len()).map(|i| (self.hi[i] - self.lo[i]) / (self.res[i] - 1) as f64).fold(0.0, f64::max)
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        let total: usize = self.res.iter().product();
        (0..total).map(move |mut k| {
            let mut p = Vec::with_capacity(self.res.len());
            for i in 0..self.res.len() {
                let j = k % self.res[i];
                k /= self.res[i];
                p.push(self.lo[i] + (self.hi[i] - self.lo[i]) * j as f64 / (self.res[i] - 1) as f64);
            }
            p
        })
    }
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `inf { |y - x| : y in grid, member(y) }`, or zero when `x` itself is a member.
pub fn brute_distance(x: &[f64], member: &dyn Fn(&[f64]) -> bool, grid: &GridSpec) -> Result<f64, OracleError> {
    if member(x) {
        return Ok(0.0);
    }
    let mut best = f64::INFINITY;
    for p in grid.points() {
        let d = euclid(&p, x);
        if d < best && member(&p) {
            best = d;
        }
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(OracleError::NoMember)
    }
}

/// Solve the square system `a x = b` by Gaussian elimination with partial
/// pivoting; `None` when singular.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().partial_cmp(&a[j][c].abs()).unwrap())?;
        if a[p][c].abs() < 1e-14 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

/// `xi in conv(vertices)` by Carathéodory: the point must lie in the convex
/// hull of at most `dim + 1` of the vertices, so every such subset is tried.
/// Barycentric weights may undershoot zero by `tol`.
pub fn brute_membership(vertices: &[Vec<f64>], xi: &[f64], tol: f64) -> bool {
    let dim = xi.len();
    for k in 1..=(dim + 1).min(vertices.len()) {
        for s in subsets(vertices.len(), k) {
            if in_simplex(vertices, &s, xi, tol) {
                return true;
            }
        }
    }
    false
}

/// Least-squares barycentric fit on the chosen vertices, accepted when the
/// weights are nonnegative and the fit is exact.
fn in_simplex(vertices: &[Vec<f64>], s: &[usize], xi: &[f64], tol: f64) -> bool {
    let dim = xi.len();
    let base = &vertices[s[0]];
    let k = s.len() - 1;
    if k == 0 {
        return euclid(base, xi) <= tol;
    }
    let cols: Vec<Vec<f64>> = s[1..].iter().map(|&i| (0..dim).map(|r| vertices[i][r] - base[r]).collect()).collect();
    let rhs: Vec<f64> = (0..dim).map(|r| xi[r] - base[r]).collect();
    let gram: Vec<Vec<f64>> = (0..k).map(|i| (0..k).map(|j| dot(&cols[i], &cols[j])).collect()).collect();
    let proj: Vec<f64> = (0..k).map(|i| dot(&cols[i], &rhs)).collect();
    let Some(w) = solve(gram, proj) else { return false };
    let w0 = 1.0 - w.iter().sum::<f64>();
    if w0 < -tol || w.iter().any(|&wi| wi < -tol) {
        return false;
    }
    let fit: Vec<f64> = (0..dim).map(|r| base[r] + (0..k).map(|i| w[i] * cols[i][r]).sum::<f64>()).collect();
    euclid(&fit, xi) <= tol
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// One-sided difference quotients of `f` at `x` along `d` for each step;
/// returns the quotient at the smallest step and the spread of the two
/// smallest as an error bar.
pub fn brute_dirderiv(f: &dyn Fn(&[f64]) -> f64, x: &[f64], d: &[f64], steps: &[f64]) -> (f64, f64) {
    let f0 = f(x);
    let mut q: Vec<(f64, f64)> = steps
        .iter()
        .map(|&t| {
            let y: Vec<f64> = x.iter().zip(d).map(|(a, b)| a + t * b).collect();
            (t, (f(&y) - f0) / t)
        })
        .collect();
    q.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let v = q[0].1;
    let err = if q.len() > 1 { (q[1].1 - v).abs() } else { 0.0 };
    (v, err)
}

pub const DEFAULT_STEPS: [f64; 4] = [1e-5, 1e-6, 1e-7, 1e-8];

/// `max <p, d>` over a point list.
pub fn brute_support(points: &[Vec<f64>], d: &[f64]) -> f64 {
    points.iter().map(|p| dot(p, d)).fold(f64::NEG_INFINITY, f64::max)
}

/// `count` equally spaced unit vectors in the plane.
pub fn circle(count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / count as f64;
            vec![t.cos(), t.sin()]
        })
        .collect()
}

/// Sampled Hausdorff distance between two planar convex sets given by
/// support functions.
pub fn brute_hausdorff(h1: &dyn Fn(&[f64]) -> f64, h2: &dyn Fn(&[f64]) -> f64, count: usize) -> f64 {
    circle(count).iter().map(|d| (h1(d) - h2(d)).abs()).fold(0.0, f64::max)
}
