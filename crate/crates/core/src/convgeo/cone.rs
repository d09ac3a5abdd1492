use alloc::vec::Vec;
use core::f64::consts::PI;

use super::body::ConvexBody;
use super::directions::{angle_dir, angle_of, canonical_directions};
use crate::linalg::{dot, norm, Point};
use crate::model::Config;

const TAU: f64 = 2.0 * PI;
const ANGLE_TOL: f64 = 1e-12;

fn wrap(t: f64) -> f64 {
    let r = t % TAU;
    if r < 0.0 {
        r + TAU
    } else {
        r
    }
}

/// Closed angular interval `[start, start + width]` of planar directions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arc {
    pub start: f64,
    pub width: f64,
}

impl Arc {
    pub fn new(start: f64, width: f64) -> Self {
        Arc { start: wrap(start), width: width.clamp(0.0, TAU) }
    }

    pub fn ray(angle: f64) -> Self {
        Arc::new(angle, 0.0)
    }

    pub fn full() -> Self {
        Arc { start: 0.0, width: TAU }
    }

    pub fn is_full(&self) -> bool {
        self.width >= TAU - ANGLE_TOL
    }

    pub fn end(&self) -> f64 {
        self.start + self.width
    }

    pub fn contains(&self, angle: f64, tol: f64) -> bool {
        if self.is_full() {
            return true;
        }
        let off = wrap(angle - self.start);
        off <= self.width + tol || off >= TAU - tol
    }

    fn intersect(&self, other: &Arc) -> Vec<Arc> {
        if self.is_full() {
            return alloc::vec![*other];
        }
        if other.is_full() {
            return alloc::vec![*self];
        }
        let mut out: Vec<Arc> = Vec::new();
        for k in -1..=1 {
            let s2 = other.start + TAU * k as f64;
            let lo = self.start.max(s2);
            let hi = self.end().min(s2 + other.width);
            if hi >= lo - ANGLE_TOL {
                let a = Arc::new(lo, (hi - lo).max(0.0));
                if !out.iter().any(|b| (wrap(b.start - a.start).min(wrap(a.start - b.start)) < 1e-10) && (b.width - a.width).abs() < 1e-10) {
                    out.push(a);
                }
            }
        }
        out
    }
}

/// Negative polar of the cone spanned by `arcs`:
/// `{y : <y, d> <= 0 for every d in the arcs}`.
pub(crate) fn polar_arcs(arcs: &[Arc]) -> Vec<Arc> {
    if arcs.is_empty() {
        return alloc::vec![Arc::full()];
    }
    let mut acc = alloc::vec![Arc::full()];
    for a in arcs {
        if a.width > PI + 1e-9 {
            return Vec::new();
        }
        let band = Arc::new(a.end() + 0.5 * PI, (PI - a.width).max(0.0));
        acc = acc.iter().flat_map(|x| x.intersect(&band)).collect();
        if acc.is_empty() {
            return acc;
        }
    }
    acc
}

fn zoom_min(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, levels: usize) -> (f64, f64) {
    let (mut lo, mut hi) = (lo, hi);
    let mut best = (f64::INFINITY, 0.5 * (lo + hi));
    for _ in 0..levels {
        let m = 32;
        let step = (hi - lo) / m as f64;
        for i in 0..=m {
            let t = lo + step * i as f64;
            let v = f(t);
            if v < best.0 {
                best = (v, t);
            }
        }
        lo = (best.1 - step).max(lo);
        hi = (best.1 + step).min(hi);
        if hi - lo < 1e-14 {
            break;
        }
    }
    best
}

/// Arcs of `{theta : f(theta) <= 0}` for a continuous, positively
/// homogeneous `f` evaluated on unit vectors. Arcs narrower than `1e-4`
/// radians and tangential touches collapse to a single ray at the minimizer.
pub(crate) fn sublevel_arcs(f: &dyn Fn(&[f64]) -> f64, cfg: &Config) -> Vec<Arc> {
    let n = cfg.n_dir_2d.max(8);
    let theta: Vec<f64> = (0..n).map(|k| TAU * k as f64 / n as f64).collect();
    let vals: Vec<f64> = theta.iter().map(|&t| f(&angle_dir(t))).collect();
    let scale = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let tol = 1e-12 * (1.0 + scale);
    let ft = |t: f64| f(&angle_dir(t));
    let inside: Vec<bool> = vals.iter().map(|v| *v <= tol).collect();
    if inside.iter().all(|b| *b) {
        return alloc::vec![Arc::full()];
    }
    let mut arcs = Vec::new();
    let step = TAU / n as f64;
    let bisect = |mut a: f64, mut b: f64| {
        // f(a) > tol, f(b) <= tol
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if ft(m) <= tol {
                b = m;
            } else {
                a = m;
            }
        }
        b
    };
    let start_idx = (0..n).find(|&k| !inside[k]).unwrap();
    let mut k = 0;
    while k < n {
        let i = (start_idx + k) % n;
        if inside[i] {
            let mut len = 0;
            while len < n && inside[(i + len) % n] {
                len += 1;
            }
            let t0 = theta[i];
            let t1 = t0 + step * (len - 1) as f64;
            let s = bisect(t0 - step, t0);
            let e = bisect(t1 + step, t1);
            let width = e - s;
            if width < 1e-4 {
                let (_, tm) = zoom_min(&ft, s, e.max(s), 12);
                arcs.push(Arc::ray(tm));
            } else {
                arcs.push(Arc::new(s, width));
            }
            k += len;
        } else {
            let prev = vals[(i + n - 1) % n];
            let next = vals[(i + 1) % n];
            if vals[i] <= prev && vals[i] <= next && vals[i] <= 1e-2 * (1.0 + scale) {
                let (v, tm) = zoom_min(&ft, theta[i] - step, theta[i] + step, 12);
                if v <= tol {
                    arcs.push(Arc::ray(tm));
                }
            }
            k += 1;
        }
    }
    arcs
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Label {
    In,
    Out,
    Unknown,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::In => "in",
            Label::Out => "out",
            Label::Unknown => "unknown",
        }
    }
}

#[derive(Clone, Debug)]
pub enum ConeKind {
    Whole,
    Zero,
    /// Closed convex cone generated by the union of the bodies.
    Generated(Vec<ConvexBody>),
    /// `{y : support_j(y) <= 0 for all j}`, the polar of `Generated`.
    Sublevel(Vec<ConvexBody>),
    /// Known only through labeled directions.
    Sampled,
}

/// A cone in `R^n` described by labeled unit directions. Planar cones also
/// carry an arc model used for membership and polars.
#[derive(Clone, Debug)]
pub struct ConeSample {
    dim: usize,
    kind: ConeKind,
    samples: Vec<(Point, Label)>,
    generators: Option<Vec<Point>>,
    arcs: Option<Vec<Arc>>,
    estimated: bool,
    tol: f64,
}

impl ConeSample {
    fn finish(dim: usize, kind: ConeKind, arcs: Option<Vec<Arc>>, cfg: &Config) -> Self {
        let mut c = ConeSample { dim, kind, samples: Vec::new(), generators: None, arcs, estimated: false, tol: cfg.geom_tol };
        let dirs = canonical_directions(dim, cfg);
        let polar_dirs = match (&c.kind, dim) {
            (ConeKind::Generated(bs), d) if d != 2 => {
                canonical_directions(d, cfg).into_iter().filter(|y| bs.iter().all(|b| b.support(y) <= c.tol)).collect()
            }
            _ => Vec::new(),
        };
        c.samples = dirs
            .into_iter()
            .map(|d| {
                let l = c.classify(&d, &polar_dirs);
                (d, l)
            })
            .collect();
        if let ConeKind::Generated(bs) = &c.kind {
            if bs.iter().all(|b| b.has_exact_vertices()) {
                let g: Vec<Point> =
                    bs.iter().flat_map(|b| b.vertices().unwrap().iter().filter(|p| norm(p) > 0.0).cloned()).collect();
                c.generators = Some(g);
            }
        }
        c
    }

    fn classify(&self, d: &[f64], polar_dirs: &[Point]) -> Label {
        if norm(d) == 0.0 {
            return Label::In;
        }
        if let Some(arcs) = &self.arcs {
            let t = angle_of(d);
            return if arcs.iter().any(|a| a.contains(t, 1e-9)) { Label::In } else { Label::Out };
        }
        let yes = match &self.kind {
            ConeKind::Whole => true,
            ConeKind::Zero => false,
            ConeKind::Sublevel(bs) => bs.iter().all(|b| b.support(d) <= self.tol),
            ConeKind::Generated(_) => {
                let nd = norm(d);
                polar_dirs.iter().all(|y| dot(d, y) <= self.tol * nd)
            }
            ConeKind::Sampled => return self.nearest_label(d),
        };
        if yes {
            Label::In
        } else {
            Label::Out
        }
    }

    fn nearest_label(&self, d: &[f64]) -> Label {
        let nd = norm(d);
        self.samples
            .iter()
            .max_by(|a, b| dot(&a.0, d).partial_cmp(&dot(&b.0, d)).unwrap())
            .map(|s| if dot(&s.0, d) >= nd * (1.0 - 1e-12) { s.1 } else { Label::Unknown })
            .unwrap_or(Label::Unknown)
    }

    pub fn whole(dim: usize, cfg: &Config) -> Self {
        let arcs = (dim == 2).then(|| alloc::vec![Arc::full()]);
        Self::finish(dim, ConeKind::Whole, arcs, cfg)
    }

    pub fn zero(dim: usize, cfg: &Config) -> Self {
        let arcs = (dim == 2).then(Vec::new);
        Self::finish(dim, ConeKind::Zero, arcs, cfg)
    }

    /// `cl cone(conv(union of bodies))`; an empty family gives `{0}`.
    pub fn generated(dim: usize, bodies: &[ConvexBody], cfg: &Config) -> Self {
        if bodies.is_empty() {
            return Self::zero(dim, cfg);
        }
        let arcs = (dim == 2).then(|| {
            let f = |y: &[f64]| bodies.iter().map(|b| b.support(y)).fold(f64::NEG_INFINITY, f64::max);
            polar_arcs(&sublevel_arcs(&f, cfg))
        });
        Self::finish(dim, ConeKind::Generated(bodies.to_vec()), arcs, cfg)
    }

    /// `{y : support_b(y) <= 0 for every body b}`; an empty family gives the
    /// whole space.
    pub fn sublevel(dim: usize, bodies: &[ConvexBody], cfg: &Config) -> Self {
        if bodies.is_empty() {
            return Self::whole(dim, cfg);
        }
        let arcs = (dim == 2).then(|| {
            let f = |y: &[f64]| bodies.iter().map(|b| b.support(y)).fold(f64::NEG_INFINITY, f64::max);
            sublevel_arcs(&f, cfg)
        });
        Self::finish(dim, ConeKind::Sublevel(bodies.to_vec()), arcs, cfg)
    }

    /// Cone known only by labels. In the plane the arc model joins runs of
    /// consecutive `In` labels (sorted by angle); `Unknown` breaks a run.
    pub fn from_labels(dim: usize, mut samples: Vec<(Point, Label)>, cfg: &Config) -> Self {
        let arcs = (dim == 2).then(|| {
            samples.sort_by(|a, b| angle_of(&a.0).partial_cmp(&angle_of(&b.0)).unwrap());
            runs_to_arcs(&samples)
        });
        ConeSample { dim, kind: ConeKind::Sampled, samples, generators: None, arcs, estimated: true, tol: cfg.geom_tol }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &ConeKind {
        &self.kind
    }

    pub fn samples(&self) -> &[(Point, Label)] {
        &self.samples
    }

    pub fn generators(&self) -> Option<&[Point]> {
        self.generators.as_deref()
    }

    pub fn arcs(&self) -> Option<&[Arc]> {
        self.arcs.as_deref()
    }

    /// True when labels come from a numerical search rather than a formula.
    pub fn is_estimated(&self) -> bool {
        self.estimated
    }

    pub fn has_unknown(&self) -> bool {
        self.samples.iter().any(|s| s.1 == Label::Unknown)
    }

    pub fn is_zero(&self) -> bool {
        match &self.arcs {
            Some(a) => a.is_empty(),
            None => matches!(self.kind, ConeKind::Zero) || self.samples.iter().all(|s| s.1 == Label::Out),
        }
    }

    pub fn is_whole(&self) -> bool {
        match &self.arcs {
            Some(a) => a.iter().any(|x| x.is_full()),
            None => matches!(self.kind, ConeKind::Whole) || self.samples.iter().all(|s| s.1 == Label::In),
        }
    }

    /// Membership of a direction (scale-invariant).
    pub fn contains(&self, d: &[f64]) -> Label {
        if self.arcs.is_some() || !matches!(self.kind, ConeKind::Generated(_)) {
            return self.classify(d, &[]);
        }
        let k = self.polar();
        let polar_in: Vec<Point> = k.samples.iter().filter(|s| s.1 == Label::In).map(|s| s.0.clone()).collect();
        self.classify(d, &polar_in)
    }

    /// Negative polar cone.
    pub fn polar(&self) -> ConeSample {
        let cfg = Config { geom_tol: self.tol, n_dir_2d: self.samples.len().max(8), ..Config::default() };
        let cfg = if self.dim == 2 { cfg } else { Config { n_dir_3d: self.samples.len().max(8), ..cfg } };
        match &self.kind {
            ConeKind::Whole => Self::zero(self.dim, &cfg),
            ConeKind::Zero => Self::whole(self.dim, &cfg),
            ConeKind::Generated(bs) => Self::sublevel(self.dim, bs, &cfg),
            ConeKind::Sublevel(bs) => Self::generated(self.dim, bs, &cfg),
            ConeKind::Sampled => {
                if let Some(arcs) = &self.arcs {
                    let pa = polar_arcs(arcs);
                    let samples = self
                        .samples
                        .iter()
                        .map(|(d, _)| {
                            let t = angle_of(d);
                            (d.clone(), if pa.iter().any(|a| a.contains(t, 1e-9)) { Label::In } else { Label::Out })
                        })
                        .collect();
                    ConeSample { dim: 2, kind: ConeKind::Sampled, samples, generators: None, arcs: Some(pa), estimated: true, tol: self.tol }
                } else {
                    let ins: Vec<&Point> = self.samples.iter().filter(|s| s.1 == Label::In).map(|s| &s.0).collect();
                    let samples = self
                        .samples
                        .iter()
                        .map(|(d, _)| (d.clone(), if ins.iter().all(|g| dot(d, g) <= self.tol) { Label::In } else { Label::Out }))
                        .collect();
                    ConeSample { dim: self.dim, kind: ConeKind::Sampled, samples, generators: None, arcs: None, estimated: true, tol: self.tol }
                }
            }
        }
    }

    /// Unit directions labeled `In`.
    pub fn in_directions(&self) -> Vec<Point> {
        self.samples.iter().filter(|s| s.1 == Label::In).map(|s| s.0.clone()).collect()
    }
}

fn runs_to_arcs(samples: &[(Point, Label)]) -> Vec<Arc> {
    let n = samples.len();
    if n == 0 {
        return Vec::new();
    }
    if samples.iter().all(|s| s.1 == Label::In) {
        return alloc::vec![Arc::full()];
    }
    let start = (0..n).find(|&k| samples[k].1 != Label::In).unwrap();
    let mut arcs = Vec::new();
    let mut k = 0;
    while k < n {
        let i = (start + k) % n;
        if samples[i].1 == Label::In {
            let mut len = 0;
            while samples[(i + len) % n].1 == Label::In {
                len += 1;
            }
            let a = angle_of(&samples[i].0);
            let b = angle_of(&samples[(i + len - 1) % n].0);
            arcs.push(Arc::new(a, wrap(b - a)));
            k += len;
        } else {
            k += 1;
        }
    }
    arcs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> Config {
        Config::default()
    }

    #[test]
    fn polar_of_half_axis_is_half_plane() {
        let c = ConeSample::generated(2, &[ConvexBody::point(&[1.0, 0.0])], &cfg());
        let p = c.polar();
        assert_eq!(p.contains(&[-1.0, 0.3]), Label::In);
        assert_eq!(p.contains(&[0.0, 1.0]), Label::In);
        assert_eq!(p.contains(&[0.1, 1.0]), Label::Out);
    }

    #[test]
    fn polar_of_zero_and_whole() {
        let z = ConeSample::zero(2, &cfg());
        assert!(z.polar().is_whole());
        assert!(ConeSample::whole(2, &cfg()).polar().is_zero());
        let z3 = ConeSample::zero(3, &cfg());
        assert!(z3.polar().is_whole());
    }

    #[test]
    fn tangent_disk_generates_closed_half_plane() {
        let disk = ConvexBody::ball(&[0.0, -1.0], 1.0);
        let c = ConeSample::generated(2, &[disk], &cfg());
        assert_eq!(c.contains(&[0.0, -1.0]), Label::In);
        assert_eq!(c.contains(&[1.0, 0.0]), Label::In);
        assert_eq!(c.contains(&[1.0, 1e-3]), Label::Out);
        let arcs = c.polar().arcs().unwrap().to_vec();
        assert_eq!(arcs.len(), 1);
        assert!(arcs[0].width == 0.0 && (arcs[0].start - 0.5 * PI).abs() < 1e-9);
    }

    #[test]
    fn singleton_generator_is_a_ray() {
        let c = ConeSample::generated(2, &[ConvexBody::point(&[0.0, -1.0])], &cfg());
        assert_eq!(c.contains(&[0.0, -3.0]), Label::In);
        assert_eq!(c.contains(&[0.01, -1.0]), Label::Out);
    }

    #[test]
    fn labels_from_runs() {
        let dirs = canonical_directions(2, &cfg());
        let samples = dirs.into_iter().map(|d| { let l = if d[1] >= 0.0 { Label::In } else { Label::Out }; (d, l) }).collect();
        let c = ConeSample::from_labels(2, samples, &cfg());
        let p = c.polar();
        assert_eq!(p.contains(&[0.0, -1.0]), Label::In);
        assert_eq!(p.contains(&[0.1, -1.0]), Label::Out);
    }
}
