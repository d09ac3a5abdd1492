//! Objects attached to the feasible set `S = {x : psi_j(x) <= 0}`: active
//! constraints, linearized and contingent cones, the Fréchet normal cone and
//! the distance function.

use alloc::vec::Vec;
use core::fmt;

use crate::convgeo::{canonical_directions, fibonacci_sphere, ConeSample, ConvexBody, GeomError, Label};
use crate::linalg::{dist, norm, normalize, Point};
use crate::maxfun::MaxFn;
use crate::model::{Config, ModelError, ProblemSpec, RobustConstraint};
use crate::subdiff::{robust_tangential_subdiff, SubdiffError};

#[derive(Clone, Debug, PartialEq)]
pub enum ConeError {
    Model(ModelError),
    Geom(GeomError),
    Infeasible { x: Vec<f64>, worst: f64 },
    /// No feasible point was found near the anchor.
    EmptySampleRegion,
}

impl From<ModelError> for ConeError {
    fn from(e: ModelError) -> Self {
        ConeError::Model(e)
    }
}

impl From<GeomError> for ConeError {
    fn from(e: GeomError) -> Self {
        ConeError::Geom(e)
    }
}

impl From<SubdiffError> for ConeError {
    fn from(e: SubdiffError) -> Self {
        match e {
            SubdiffError::Model(m) => ConeError::Model(m),
            SubdiffError::Geom(g) => ConeError::Geom(g),
        }
    }
}

impl fmt::Display for ConeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConeError::Model(e) => write!(f, "{e}"),
            ConeError::Geom(e) => write!(f, "{e}"),
            ConeError::Infeasible { x, worst } => write!(f, "point {x:?} is infeasible (largest constraint value {worst:e})"),
            ConeError::EmptySampleRegion => f.write_str("no feasible point found near the anchor"),
        }
    }
}

impl core::error::Error for ConeError {}

/// Membership oracle for `S`.
#[derive(Clone)]
pub struct FeasibleSet {
    n: usize,
    constraints: Vec<RobustConstraint>,
    feas_tol: f64,
}

impl FeasibleSet {
    pub fn new(n: usize, constraints: Vec<RobustConstraint>, cfg: &Config) -> Self {
        FeasibleSet { n, constraints, feas_tol: cfg.feas_tol }
    }

    pub fn of(spec: &ProblemSpec) -> Self {
        Self::new(spec.n, spec.constraints.clone(), &spec.config)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn constraints(&self) -> &[RobustConstraint] {
        &self.constraints
    }

    /// `psi_j(x)` for every constraint.
    pub fn values(&self, x: &[f64]) -> Result<Vec<f64>, ModelError> {
        self.constraints.iter().map(|c| MaxFn::constraint(c).value(x)).collect()
    }

    pub fn contains(&self, x: &[f64]) -> Result<bool, ModelError> {
        for c in &self.constraints {
            if MaxFn::constraint(c).value(x)? > self.feas_tol {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `sum_j psi_j(x)^+` over `subset` (all constraints when `None`).
    pub fn violation(&self, x: &[f64], subset: Option<&[usize]>) -> Result<f64, ModelError> {
        let mut s = 0.0;
        for (j, c) in self.constraints.iter().enumerate() {
            if subset.is_none_or(|js| js.contains(&j)) {
                s += MaxFn::constraint(c).value(x)?.max(0.0);
            }
        }
        Ok(s)
    }
}

/// `J(x) = {j : |psi_j(x)| <= eps_act}`; `x` must be feasible.
pub fn active_indices(set: &FeasibleSet, x: &[f64], cfg: &Config) -> Result<Vec<usize>, ConeError> {
    let vals = set.values(x)?;
    let worst = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if worst > cfg.feas_tol {
        return Err(ConeError::Infeasible { x: x.to_vec(), worst });
    }
    Ok((0..vals.len()).filter(|&j| vals[j].abs() <= cfg.act_tol(vals[j])).collect())
}

/// Robust tangential subdifferentials of the active constraints.
pub fn active_bodies(set: &FeasibleSet, x: &[f64], active: &[usize], cfg: &Config) -> Result<Vec<ConvexBody>, ConeError> {
    let mut out = Vec::with_capacity(active.len());
    for &j in active {
        let c = &set.constraints[j];
        out.push(robust_tangential_subdiff(&c.g, &c.scenarios, x, cfg)?);
    }
    Ok(out)
}

/// `G'(x) = {d : psi_j'(x; d) <= 0 for j in J(x)}`. Each `psi_j'` is the
/// support function of the corresponding tangential subdifferential.
pub fn linearized_cone(n: usize, active_bodies: &[ConvexBody], cfg: &Config) -> ConeSample {
    ConeSample::sublevel(n, active_bodies, cfg)
}

/// Outcome of the local feasibility search around `x + t d`.
#[derive(Clone, Debug, PartialEq)]
pub enum Search {
    Found(Point),
    NotFound,
    BudgetExceeded,
}

/// Per-direction evidence of the contingent-cone estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionEvidence {
    pub direction: Point,
    pub label: Label,
    /// `(t, witness)` for every level examined, finest first.
    pub witnesses: Vec<(f64, Option<Point>)>,
}

#[derive(Clone, Debug)]
pub struct ContingentCone {
    pub cone: ConeSample,
    pub evidence: Vec<DirectionEvidence>,
}

fn search_dirs(n: usize) -> Vec<Point> {
    let mut out = Vec::new();
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut e = alloc::vec![0.0; n];
            e[i] = s;
            out.push(e);
        }
    }
    if n <= 3 {
        for i in 0..n {
            for j in i + 1..n {
                for (a, b) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                    let mut e = alloc::vec![0.0; n];
                    e[i] = a;
                    e[j] = b;
                    out.push(normalize(&e).unwrap());
                }
            }
        }
    }
    out
}

/// Look for a feasible point within `radius` of `target` by compass search
/// on the total violation, projected onto the ball.
pub fn search_feasible(set: &FeasibleSet, target: &[f64], radius: f64, budget: usize) -> Result<Search, ModelError> {
    if set.contains(target)? {
        return Ok(Search::Found(target.to_vec()));
    }
    let dirs = search_dirs(target.len());
    let mut y = target.to_vec();
    let mut phi = set.violation(&y, None)?;
    let mut step = 0.5 * radius;
    let mut evals = 0usize;
    while step > 1e-9 * radius {
        let mut best: Option<(f64, Point)> = None;
        for u in &dirs {
            evals += 1;
            if evals > budget {
                return Ok(Search::BudgetExceeded);
            }
            let mut c: Point = y.iter().zip(u).map(|(a, b)| a + step * b).collect();
            let off = dist(&c, target);
            if off > radius {
                for (ci, ti) in c.iter_mut().zip(target) {
                    *ci = ti + (*ci - ti) * radius / off;
                }
            }
            let pc = set.violation(&c, None)?;
            if pc <= 0.0 && set.contains(&c)? {
                return Ok(Search::Found(c));
            }
            if best.as_ref().is_none_or(|b| pc < b.0) {
                best = Some((pc, c));
            }
        }
        match best {
            // sufficient decrease keeps slow slides along the ball boundary from eating the budget
            Some((pc, c)) if pc < phi - 1e-3 * step * phi / radius.max(f64::MIN_POSITIVE) => {
                phi = pc;
                y = c;
            }
            _ => step *= 0.5,
        }
    }
    Ok(Search::NotFound)
}

/// Sampled estimate of `T(x; S)`: a direction is `In` when at every level
/// `t_i = t0 rho^i` a feasible point lies within `eta_i t_i` of `x + t_i d`,
/// where `eta_i = eta sqrt(t_i / t0)` shrinks with the step.
pub fn contingent_cone(set: &FeasibleSet, x: &[f64], cfg: &Config) -> Result<ContingentCone, ConeError> {
    let n = x.len();
    let dirs = canonical_directions(n, cfg);
    let mut evidence = Vec::with_capacity(dirs.len());
    for d in dirs {
        let mut witnesses = Vec::new();
        let mut label = Label::In;
        for i in (0..=cfg.levels).rev() {
            let t = cfg.t0 * libm::pow(cfg.rho, i as f64);
            let eta = cfg.eta * libm::sqrt(t / cfg.t0);
            let p: Point = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            match search_feasible(set, &p, eta * t, cfg.search_budget)? {
                Search::Found(w) => witnesses.push((t, Some(w))),
                Search::NotFound => {
                    witnesses.push((t, None));
                    label = Label::Out;
                    break;
                }
                Search::BudgetExceeded => {
                    witnesses.push((t, None));
                    label = Label::Unknown;
                }
            }
        }
        evidence.push(DirectionEvidence { direction: d, label, witnesses });
    }
    let samples = evidence.iter().map(|e| (e.direction.clone(), e.label)).collect();
    Ok(ContingentCone { cone: ConeSample::from_labels(n, samples, cfg), evidence })
}

/// `N(x; S) = T(x; S)^-`.
pub fn frechet_normal_cone(contingent: &ConeSample) -> ConeSample {
    contingent.polar()
}

/// Distance-to-`S` estimator anchored at a point of interest. A cloud of
/// feasible points on geometrically shrinking spheres around the anchor
/// seeds a local refinement that alternates a bisection pull toward the
/// query with sliding along the boundary.
#[derive(Clone)]
pub struct DistanceEstimator<'a> {
    set: &'a FeasibleSet,
    cloud: Vec<Point>,
    rel_acc: f64,
}

impl<'a> DistanceEstimator<'a> {
    pub fn new(set: &'a FeasibleSet, anchor: &[f64], radius: f64, cfg: &Config) -> Result<Self, ConeError> {
        let n = anchor.len();
        let dirs = match n {
            2 => canonical_directions(2, cfg),
            _ => fibonacci_sphere(n, cfg.n_dir_3d.min(400)),
        };
        let mut cloud = Vec::new();
        if set.contains(anchor)? {
            cloud.push(anchor.to_vec());
        }
        let levels = 8 * (cfg.scales + 6);
        for k in 0..levels {
            let r = radius * libm::pow(2.0, -(k as f64) / 8.0);
            for d in &dirs {
                let p: Point = anchor.iter().zip(d).map(|(a, b)| a + r * b).collect();
                if set.contains(&p)? {
                    cloud.push(p);
                }
            }
        }
        if cloud.is_empty() {
            return Err(ConeError::EmptySampleRegion);
        }
        Ok(DistanceEstimator { set, cloud, rel_acc: cfg.dist_rel_acc })
    }

    pub fn cloud(&self) -> &[Point] {
        &self.cloud
    }

    /// Upper estimate of `d_S(x)` with the feasible point achieving it.
    pub fn distance(&self, x: &[f64]) -> Result<(f64, Point), ModelError> {
        if self.set.contains(x)? {
            return Ok((0.0, x.to_vec()));
        }
        let y0 = self
            .cloud
            .iter()
            .min_by(|a, b| dist(a, x).partial_cmp(&dist(b, x)).unwrap())
            .unwrap()
            .clone();
        self.refine(y0, x)
    }

    /// Coarse estimate from the cloud alone.
    pub fn coarse_distance(&self, x: &[f64]) -> f64 {
        self.cloud.iter().map(|p| dist(p, x)).fold(f64::INFINITY, f64::min)
    }

    fn pull(&self, y: &[f64], x: &[f64]) -> Result<Point, ModelError> {
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..40 {
            let m = 0.5 * (lo + hi);
            let p: Point = y.iter().zip(x).map(|(a, b)| a + m * (b - a)).collect();
            if self.set.contains(&p)? {
                lo = m;
            } else {
                hi = m;
            }
        }
        Ok(y.iter().zip(x).map(|(a, b)| a + lo * (b - a)).collect())
    }

    fn refine(&self, y0: Point, x: &[f64]) -> Result<(f64, Point), ModelError> {
        let n = x.len();
        let mut dirs = search_dirs(n);
        if n == 2 {
            for k in 0..8 {
                let t = core::f64::consts::PI * (2.0 * k as f64 + 1.0) / 8.0;
                dirs.push(crate::convgeo::angle_dir(t));
            }
        }
        let mut y = self.pull(&y0, x)?;
        let mut d = dist(&y, x);
        let mut step = 0.25 * d;
        let mut evals = 0;
        while step > 0.1 * self.rel_acc * d && evals < 4000 {
            let mut moved = false;
            let toward = normalize(&x.iter().zip(&y).map(|(a, b)| a - b).collect::<Point>());
            let slides = match (&toward, n) {
                (Some(t), 2) => tangential_slides(t),
                _ => Vec::new(),
            };
            for u in dirs.iter().chain(&slides) {
                evals += 1;
                let c: Point = y.iter().zip(u).map(|(a, b)| a + step * b).collect();
                let dc = dist(&c, x);
                if dc < d && self.set.contains(&c)? {
                    y = self.pull(&c, x)?;
                    d = dist(&y, x);
                    moved = true;
                    break;
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        Ok((d, y))
    }
}

/// Directions at angles `pi/2 - 2^-k` on both sides of `t`: they probe the
/// thin wedges that open between the pull direction and a boundary tangent.
fn tangential_slides(t: &[f64]) -> Vec<Point> {
    let base = libm::atan2(t[1], t[0]);
    let mut out = Vec::new();
    for k in 0..8 {
        let a = core::f64::consts::FRAC_PI_2 - libm::pow(2.0, -(k as f64)) * core::f64::consts::FRAC_PI_4;
        for s in [1.0, -1.0] {
            out.push(crate::convgeo::angle_dir(base + s * a));
        }
    }
    out
}

/// `d_S(x)` with a fresh estimator anchored at `anchor`.
pub fn distance(set: &FeasibleSet, x: &[f64], anchor: &[f64], cfg: &Config) -> Result<(f64, Point), ConeError> {
    let est = DistanceEstimator::new(set, anchor, cfg.delta.max(norm(&x.iter().zip(anchor).map(|(a, b)| a - b).collect::<Point>())), cfg)?;
    Ok(est.distance(x)?)
}
