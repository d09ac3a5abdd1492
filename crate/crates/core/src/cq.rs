//! Constraint qualifications: the generalized Abadie condition `G' ⊆ T` and
//! the generalized error bound `d_S(x) <= sigma * sum_j psi_j^+(x)` near the
//! reference point.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::cones::{active_bodies, active_indices, contingent_cone, linearized_cone, ConeError, DistanceEstimator, FeasibleSet};
use crate::convgeo::{inverse_normal, kronecker_alphas, ConeSample, Label};
use crate::linalg::{dist, normalize, Point};
use crate::maxfun::MaxFn;
use crate::model::{Config, ModelError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CqKind {
    Gacq,
    Gebcq,
}

impl CqKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CqKind::Gacq => "GACQ",
            CqKind::Gebcq => "GEBCQ",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CqVerdict {
    Holds,
    Fails,
    Unknown,
}

impl CqVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            CqVerdict::Holds => "HOLDS",
            CqVerdict::Fails => "FAILS",
            CqVerdict::Unknown => "UNKNOWN",
        }
    }
}

impl fmt::Display for CqVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CqError {
    Cone(ConeError),
    /// Every sample in the ball, and in the ball of half the radius, was feasible.
    AllFeasible { delta: f64 },
}

impl From<ConeError> for CqError {
    fn from(e: ConeError) -> Self {
        CqError::Cone(e)
    }
}

impl From<ModelError> for CqError {
    fn from(e: ModelError) -> Self {
        CqError::Cone(ConeError::Model(e))
    }
}

impl fmt::Display for CqError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CqError::Cone(e) => write!(f, "{e}"),
            CqError::AllFeasible { delta } => write!(f, "no infeasible sample within radius {delta}"),
        }
    }
}

impl core::error::Error for CqError {}

/// Error-bound statistics for one radius band `[lo, hi]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaleStat {
    pub lo: f64,
    pub hi: f64,
    pub samples: usize,
    pub infeasible: usize,
    pub refined: usize,
    /// Largest `d_S / sum psi_j^+` over the band's infeasible samples.
    pub max_ratio: f64,
    pub argmax: Option<Point>,
}

#[derive(Clone, Debug)]
pub struct CqReport {
    pub kind: CqKind,
    pub verdict: CqVerdict,
    /// Verdict rests on sampled cones or sampled distances.
    pub estimated: bool,
    pub active: Vec<usize>,
    pub sigma: Option<f64>,
    /// GACQ: directions of `G'` outside `T`. GEBCQ: points of a sequence
    /// approaching the reference point with growing ratio.
    pub witnesses: Vec<Point>,
    pub witness_ratios: Vec<f64>,
    pub scales: Vec<ScaleStat>,
    pub params: Vec<(&'static str, f64)>,
    pub notes: Vec<String>,
}

impl CqReport {
    fn new(kind: CqKind, verdict: CqVerdict, active: Vec<usize>) -> Self {
        CqReport {
            kind,
            verdict,
            estimated: true,
            active,
            sigma: None,
            witnesses: Vec::new(),
            witness_ratios: Vec::new(),
            scales: Vec::new(),
            params: Vec::new(),
            notes: Vec::new(),
        }
    }
}

/// GACQ verdict from labels of `G'` and `T` on the same direction set.
pub fn compare_cones(g: &ConeSample, t: &ConeSample) -> (CqVerdict, Vec<Point>) {
    let mut out = Vec::new();
    let mut unknown = false;
    for ((d, lg), (_, lt)) in g.samples().iter().zip(t.samples()) {
        if *lg != Label::In {
            continue;
        }
        match lt {
            Label::In => {}
            Label::Out => out.push(d.clone()),
            Label::Unknown => unknown = true,
        }
    }
    let verdict = if !out.is_empty() {
        CqVerdict::Fails
    } else if unknown {
        CqVerdict::Unknown
    } else {
        CqVerdict::Holds
    };
    (verdict, out)
}

pub fn check_gacq(set: &FeasibleSet, x: &[f64], cfg: &Config) -> Result<CqReport, CqError> {
    let active = active_indices(set, x, cfg)?;
    let bodies = active_bodies(set, x, &active, cfg)?;
    let g = linearized_cone(x.len(), &bodies, cfg);
    let t = contingent_cone(set, x, cfg)?.cone;
    let (verdict, witnesses) = compare_cones(&g, &t);
    let mut r = CqReport::new(CqKind::Gacq, verdict, active);
    r.witnesses = witnesses;
    r.params = alloc::vec![("t0", cfg.t0), ("rho", cfg.rho), ("levels", cfg.levels as f64), ("eta", cfg.eta), ("directions", g.samples().len() as f64)];
    Ok(r)
}

/// `sum_{j in J} psi_j(x)^+`.
pub fn active_violation(set: &FeasibleSet, active: &[usize], x: &[f64]) -> Result<f64, ModelError> {
    let mut s = 0.0;
    for &j in active {
        s += MaxFn::constraint(&set.constraints()[j]).value(x)?.max(0.0);
    }
    Ok(s)
}

/// Deterministic sample `i` (1-based) of the radius band `[lo, 2 lo]`.
fn band_sample(center: &[f64], lo: f64, i: usize, alphas: &[f64], shift: f64) -> Point {
    let n = center.len();
    let u = |k: usize| (0.5 + shift + alphas[k] * i as f64) % 1.0;
    let r = lo * (1.0 + u(0));
    let dir = if n == 2 {
        crate::convgeo::angle_dir(2.0 * core::f64::consts::PI * u(1))
    } else {
        let g: Point = (1..=n).map(|k| inverse_normal(u(k).clamp(1e-9, 1.0 - 1e-9))).collect();
        normalize(&g).unwrap_or_else(|| {
            let mut e = alloc::vec![0.0; n];
            e[0] = 1.0;
            e
        })
    };
    center.iter().zip(&dir).map(|(c, d)| c + r * d).collect()
}

struct RatioProbe<'a> {
    set: &'a FeasibleSet,
    active: &'a [usize],
    est: DistanceEstimator<'a>,
}

impl RatioProbe<'_> {
    /// `(coarse ratio, violation)`; `None` for feasible points or points
    /// whose violation comes only from inactive constraints.
    fn coarse(&self, x: &[f64]) -> Result<Option<(f64, f64)>, ModelError> {
        if self.set.contains(x)? {
            return Ok(None);
        }
        let v = active_violation(self.set, self.active, x)?;
        if v <= 0.0 {
            return Ok(None);
        }
        Ok(Some((self.est.coarse_distance(x) / v, v)))
    }

    fn refined(&self, x: &[f64], v: f64) -> Result<f64, ModelError> {
        Ok(self.est.distance(x)?.0 / v)
    }

    fn ratio(&self, x: &[f64]) -> Result<Option<f64>, ModelError> {
        match self.coarse(x)? {
            Some((_, v)) => Ok(Some(self.refined(x, v)?)),
            None => Ok(None),
        }
    }
}

const REFINE_CAP: usize = 256;
const ASCENT_SEEDS: usize = 3;
const ASCENT_BUDGET: usize = 240;

/// Compass ascent of the ratio inside the `delta`-ball, started at `x0`.
fn ascend(probe: &RatioProbe<'_>, center: &[f64], delta: f64, x0: &[f64], r0: f64, cap: f64) -> Result<(f64, Point), ModelError> {
    let n = x0.len();
    let mut dirs = Vec::new();
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut e = alloc::vec![0.0; n];
            e[i] = s;
            dirs.push(e);
        }
    }
    let (mut best, mut x) = (r0, x0.to_vec());
    let mut step = 0.25 * dist(x0, center);
    let floor = 1e-9 * dist(x0, center);
    let mut evals = 0;
    while step > floor && evals < ASCENT_BUDGET && best <= cap {
        let mut moved = false;
        for d in &dirs {
            evals += 1;
            let y: Point = x.iter().zip(d).map(|(a, b)| a + step * b).collect();
            if dist(&y, center) > delta {
                continue;
            }
            if let Some(r) = probe.ratio(&y)? {
                if r > best * (1.0 + 1e-9) {
                    best = r;
                    x = y;
                    moved = true;
                    break;
                }
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    Ok((best, x))
}

/// Scale-stratified error-bound test on `N = cfg.samples` points of the
/// `delta`-ball around `x`.
pub fn check_gebcq(set: &FeasibleSet, x: &[f64], delta: f64, cfg: &Config) -> Result<CqReport, CqError> {
    let active = active_indices(set, x, cfg)?;
    if active.is_empty() {
        let mut r = CqReport::new(CqKind::Gebcq, CqVerdict::Holds, active);
        r.sigma = Some(0.0);
        r.notes.push("no active constraints: a small ball around the point is feasible".into());
        return Ok(r);
    }
    match gebcq_at(set, x, &active, delta, cfg)? {
        Some(r) => Ok(r),
        None => gebcq_at(set, x, &active, 0.5 * delta, cfg)?.ok_or(CqError::AllFeasible { delta: 0.5 * delta }),
    }
}

fn gebcq_at(set: &FeasibleSet, x: &[f64], active: &[usize], delta: f64, cfg: &Config) -> Result<Option<CqReport>, CqError> {
    let n = x.len();
    let scales = cfg.scales.max(1);
    let per = (cfg.samples / scales).max(1);
    let alphas = kronecker_alphas(n + 1);
    let shift = (cfg.seed as f64 * 0.618_033_988_749_895) % 1.0;
    let probe = RatioProbe { set, active, est: DistanceEstimator::new(set, x, delta, cfg)? };

    let mut stats = Vec::with_capacity(scales);
    let mut top: Vec<(f64, Point)> = Vec::new();
    for s in 0..scales {
        let hi = delta * libm::pow(2.0, -(s as f64));
        let lo = 0.5 * hi;
        let mut cands = Vec::new();
        for i in 1..=per {
            let p = band_sample(x, lo, i, &alphas, shift);
            if let Some((c, v)) = probe.coarse(&p)? {
                cands.push((c, v, p));
            }
        }
        cands.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        let mut st = ScaleStat { lo, hi, samples: per, infeasible: cands.len(), refined: 0, max_ratio: 0.0, argmax: None };
        // refined ratios never exceed coarse ones, so stop once no coarse
        // ratio can beat the refined maximum
        for (c, v, p) in &cands {
            if *c <= st.max_ratio || st.refined >= REFINE_CAP {
                break;
            }
            st.refined += 1;
            let r = probe.refined(p, *v)?;
            if r > st.max_ratio {
                st.max_ratio = r;
                st.argmax = Some(p.clone());
            }
        }
        if let Some(p) = &st.argmax {
            top.push((st.max_ratio, p.clone()));
        }
        stats.push(st);
    }
    if stats.iter().all(|s| s.infeasible == 0) {
        return Ok(None);
    }

    let mut report = CqReport::new(CqKind::Gebcq, CqVerdict::Unknown, active.to_vec());
    let sampled = stats.iter().map(|s| s.max_ratio).fold(0.0, f64::max);
    top.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let mut ascended = sampled;
    let mut ascent_point = None;
    for (r0, p) in top.iter().take(ASCENT_SEEDS) {
        let (r, q) = ascend(&probe, x, delta, p, *r0, cfg.sigma_cap)?;
        if r > ascended {
            ascended = r;
            ascent_point = Some(q);
        }
        if ascended > cfg.sigma_cap {
            break;
        }
    }

    let maxima: Vec<f64> = stats.iter().filter(|s| s.infeasible > 0).map(|s| s.max_ratio).collect();
    let growth = maxima.last().unwrap() / maxima[0].max(f64::MIN_POSITIVE);
    let monotone = maxima.windows(2).all(|w| w[1] >= 0.5 * w[0]);
    let verdict = if ascended > cfg.sigma_cap {
        CqVerdict::Fails
    } else if growth >= cfg.growth_cap {
        if monotone {
            CqVerdict::Fails
        } else {
            CqVerdict::Unknown
        }
    } else {
        CqVerdict::Holds
    };
    report.verdict = verdict;
    report.sigma = Some(ascended);
    if verdict == CqVerdict::Fails {
        for s in stats.iter().filter(|s| s.argmax.is_some()) {
            report.witnesses.push(s.argmax.clone().unwrap());
            report.witness_ratios.push(s.max_ratio);
        }
        if let Some(q) = ascent_point {
            report.witnesses.push(q);
            report.witness_ratios.push(ascended);
        }
    }
    report.params = alloc::vec![
        ("delta", delta),
        ("samples", (per * scales) as f64),
        ("scales", scales as f64),
        ("growth", growth),
        ("growth_cap", cfg.growth_cap),
        ("sigma_cap", cfg.sigma_cap),
        ("sampled_sigma", sampled),
    ];
    report.scales = stats;
    Ok(Some(report))
}

/// Ratios `d_S(x_k) / sum psi_j^+(x_k)` along a closed-form sequence.
pub fn witness_ratios(set: &FeasibleSet, x: &[f64], seq: fn(usize) -> Vec<f64>, ks: &[usize], cfg: &Config) -> Result<Vec<(usize, f64)>, CqError> {
    let active = active_indices(set, x, cfg)?;
    let radius = ks.iter().map(|&k| dist(&seq(k), x)).fold(cfg.delta, f64::max);
    let probe = RatioProbe { set, active: &active, est: DistanceEstimator::new(set, x, radius, cfg)? };
    let mut out = Vec::new();
    for &k in ks {
        let r = probe.ratio(&seq(k))?.unwrap_or(0.0);
        out.push((k, r));
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct CrossCheck {
    pub gacq: CqReport,
    pub gebcq: CqReport,
    /// GEBCQ holds while GACQ fails, contradicting the implication.
    pub inconsistent: bool,
}

impl CrossCheck {
    pub fn status(&self) -> &'static str {
        if self.inconsistent {
            "INCONSISTENT"
        } else {
            "CONSISTENT"
        }
    }
}

pub fn cross_check(set: &FeasibleSet, x: &[f64], cfg: &Config) -> Result<CrossCheck, CqError> {
    let gacq = check_gacq(set, x, cfg)?;
    let gebcq = check_gebcq(set, x, cfg.delta, cfg)?;
    let inconsistent = gebcq.verdict == CqVerdict::Holds && gacq.verdict == CqVerdict::Fails;
    Ok(CrossCheck { gacq, gebcq, inconsistent })
}
