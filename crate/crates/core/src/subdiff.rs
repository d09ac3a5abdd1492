//! Tangential subdifferentials of robust max-functions, outer bounds for the
//! Fréchet and limiting subdifferentials of DTC max-functions, enlargements
//! and capped sums used for the distance function.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::convgeo::{canonical_directions, ConvexBody, Exactness, GeomError, SupportFn};
use crate::linalg::{dist, norm, Point};
use crate::maxfun::MaxFn;
use crate::model::{Config, DtcObjective, ModelError, ScenarioFunction, ScenarioSet};

#[derive(Clone, Debug, PartialEq)]
pub enum SubdiffError {
    Model(ModelError),
    Geom(GeomError),
}

impl From<ModelError> for SubdiffError {
    fn from(e: ModelError) -> Self {
        SubdiffError::Model(e)
    }
}

impl From<GeomError> for SubdiffError {
    fn from(e: GeomError) -> Self {
        SubdiffError::Geom(e)
    }
}

impl fmt::Display for SubdiffError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubdiffError::Model(e) => write!(f, "{e}"),
            SubdiffError::Geom(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for SubdiffError {}

/// Which subdifferential of the distance function is bounded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistanceMode {
    Frechet,
    Limiting,
}

/// `d -> f'(x; d)` for a single scenario, with `h` entering as `-h'(x; -d)`
/// when `negate_h` is set (the support of `dg - dh`).
#[derive(Clone)]
struct TermOracle {
    g: ScenarioFunction,
    h: Option<ScenarioFunction>,
    x: Point,
    vs: Vec<Point>,
}

impl TermOracle {
    fn eval(&self, d: &[f64]) -> Result<f64, ModelError> {
        let mut best = f64::NEG_INFINITY;
        let nd: Point = d.iter().map(|c| -c).collect();
        for v in &self.vs {
            let mut y = self.g.dirderiv_x(&self.x, v, d)?.value;
            if let Some(h) = &self.h {
                y += h.dirderiv_x(&self.x, v, &nd)?.value;
            }
            best = best.max(y);
        }
        Ok(best)
    }

    /// Absolute accuracy of the oracle.
    fn noise(&self, cfg: &Config) -> f64 {
        let analytic = self.g.has_analytic() && self.h.as_ref().is_none_or(|h| h.has_analytic() || h.is_zero());
        if analytic {
            0.0
        } else {
            cfg.geom_tol
        }
    }

    fn body(self, n: usize, cfg: &Config) -> Result<ConvexBody, SubdiffError> {
        let noise = self.noise(cfg);
        let f = self.into_support(n, cfg)?;
        Ok(ConvexBody::from_support_with_noise(n, f, cfg, noise)?)
    }

    fn into_support(self, n: usize, cfg: &Config) -> Result<SupportFn, ModelError> {
        for d in canonical_directions(n, cfg).iter().step_by(7) {
            self.eval(d)?;
        }
        Ok(Arc::new(move |d: &[f64]| self.eval(d).unwrap_or(f64::NAN)))
    }
}

/// The convex compact set whose support function is the given directional
/// derivative `d -> f'(x; d)`.
pub fn tangential_subdiff(n: usize, dirderiv: SupportFn, cfg: &Config) -> Result<ConvexBody, GeomError> {
    ConvexBody::from_support(n, dirderiv, cfg)
}

/// `dT_x f(x, v)` for one scenario.
pub fn scenario_subdiff(f: &ScenarioFunction, x: &[f64], v: &[f64], cfg: &Config) -> Result<ConvexBody, SubdiffError> {
    let o = TermOracle { g: f.clone(), h: None, x: x.to_vec(), vs: alloc::vec![v.to_vec()] };
    o.body(x.len(), cfg)
}

/// `dT psi(x) = co U_{v in V(x)} dT_x g(x, v)` for `psi = max_v g(., v)`.
/// The support function is Danskin's formula over the active scenarios.
pub fn robust_tangential_subdiff(g: &ScenarioFunction, scenarios: &ScenarioSet, x: &[f64], cfg: &Config) -> Result<ConvexBody, SubdiffError> {
    let m = MaxFn::sup(g, scenarios);
    let act = m.active_set(x, cfg)?;
    let vs = act.active.iter().map(|&i| scenarios.get(i).to_vec()).collect();
    let o = TermOracle { g: g.clone(), h: None, x: x.to_vec(), vs };
    o.body(x.len(), cfg)
}

/// `co U_{v in V(x)} (dT_x g(x, v) - dT_x h(x, v))`, which contains both the
/// Fréchet and the limiting subdifferential of `psi = max (g - h)`. Tagged
/// exact only when `h` is identically zero.
pub fn dtc_outer_bound(obj: &DtcObjective, x: &[f64], cfg: &Config) -> Result<ConvexBody, SubdiffError> {
    let m = MaxFn::objective(obj);
    let act = m.active_set(x, cfg)?;
    let vs = act.active.iter().map(|&i| obj.scenarios.get(i).to_vec()).collect();
    let h = if obj.h.is_zero() { None } else { Some(obj.h.clone()) };
    let exact = h.is_none();
    let o = TermOracle { g: obj.g.clone(), h, x: x.to_vec(), vs };
    let body = o.body(x.len(), cfg)?;
    Ok(if exact { body } else { body.with_exactness(Exactness::Outer).with_note("outer bound of the Frechet and limiting subdifferentials") })
}

/// `dT^eps f(x) = dT f(x) + eps B`.
pub fn epsilon_subdiff(body: &ConvexBody, eps: f64) -> ConvexBody {
    ConvexBody::ball_enlarge(body, eps)
}

/// `sum_j [0, sigma] * dT psi_j(x)` over the active constraints, given their
/// robust tangential subdifferentials. The Fréchet mode uses the same sum,
/// which contains the union form.
pub fn distance_subdiff_bound(n: usize, constraint_bodies: &[ConvexBody], sigma: f64, mode: DistanceMode) -> Result<ConvexBody, GeomError> {
    let mut acc = ConvexBody::zero(n);
    for b in constraint_bodies {
        acc = ConvexBody::minkowski(&acc, &ConvexBody::capped(b, sigma), 1.0)?;
    }
    let acc = acc.with_exactness(Exactness::Outer);
    Ok(match mode {
        DistanceMode::Frechet => acc.with_note("Frechet bound realized by the summed form"),
        DistanceMode::Limiting => acc,
    })
}

/// Per-scenario tangential subdifferentials at `x`, deduplicated by their
/// support functions.
#[derive(Clone, Debug)]
pub struct SubdiffBundle {
    pub point: Point,
    /// Distinct bodies.
    pub bodies: Vec<ConvexBody>,
    /// `(scenario index, body index)` for every active scenario.
    pub scenario_body: Vec<(usize, usize)>,
    pub aggregate: ConvexBody,
    pub max_vertex_norm: f64,
    pub notes: Vec<String>,
}

/// Bundle of `dT_x g(x, v)` (minus `dT_x h(x, v)` when `h` is given) over the
/// active scenarios of `max (g - h)`.
pub fn scenario_bundle(
    g: &ScenarioFunction,
    h: Option<&ScenarioFunction>,
    scenarios: &ScenarioSet,
    x: &[f64],
    cfg: &Config,
) -> Result<SubdiffBundle, SubdiffError> {
    let n = x.len();
    let m = MaxFn { g, h, scenarios };
    let act = m.active_set(x, cfg)?;
    let probe = canonical_directions(n, cfg);
    let probe: Vec<&Point> = probe.iter().step_by((probe.len() / 12).max(1)).collect();
    let mut sigs: Vec<Vec<f64>> = Vec::new();
    let mut bodies: Vec<ConvexBody> = Vec::new();
    let mut scenario_body = Vec::with_capacity(act.active.len());
    for &i in &act.active {
        let o = TermOracle { g: g.clone(), h: h.cloned(), x: x.to_vec(), vs: alloc::vec![scenarios.get(i).to_vec()] };
        let sig = probe.iter().map(|d| o.eval(d)).collect::<Result<Vec<f64>, _>>()?;
        let found = sigs.iter().position(|s| s.iter().zip(&sig).all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + a.abs())));
        let k = match found {
            Some(k) => k,
            None => {
                bodies.push(o.body(n, cfg)?);
                sigs.push(sig);
                bodies.len() - 1
            }
        };
        scenario_body.push((i, k));
    }
    let aggregate = ConvexBody::hull_union(&bodies)?;
    let max_vertex_norm = bodies.iter().map(|b| b.circumradius(cfg)).fold(0.0, f64::max);
    let mut notes = Vec::new();
    if h.is_some() {
        notes.push("per-scenario bodies are differences dg - dh".into());
    }
    let aggregate = if h.is_some() { aggregate.with_exactness(Exactness::Outer) } else { aggregate };
    Ok(SubdiffBundle { point: x.to_vec(), bodies, scenario_body, aggregate, max_vertex_norm, notes })
}

/// Sampled uniform Lipschitz constant of `g(., v)` over the scenarios, on
/// deterministic pairs in the ball of the given radius around `x`.
pub fn lipschitz_witness(g: &ScenarioFunction, scenarios: &ScenarioSet, x: &[f64], radius: f64, pairs: usize) -> Result<f64, ModelError> {
    let n = x.len();
    let dirs = crate::convgeo::fibonacci_sphere(n.max(2), 2 * pairs + 8);
    let dirs: Vec<Point> = dirs.into_iter().map(|d| d[..n].to_vec()).filter(|d| norm(d) > 0.0).collect();
    let mut best: f64 = 0.0;
    for k in 0..pairs.min(dirs.len() / 2) {
        let r1 = radius * (k as f64 + 0.5) / pairs as f64;
        let a: Point = x.iter().zip(&dirs[2 * k]).map(|(xi, d)| xi + r1 * d).collect();
        let b: Point = x.iter().zip(&dirs[2 * k + 1]).map(|(xi, d)| xi + radius * 0.5 * d).collect();
        let dab = dist(&a, &b);
        if dab == 0.0 {
            continue;
        }
        for v in scenarios.points() {
            best = best.max((g.eval(&a, v)? - g.eval(&b, v)?).abs() / dab);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convgeo::{hausdorff, member};
    use crate::model::{builtin_example, Objective};
    use alloc::vec;

    fn cfg() -> Config {
        Config::default()
    }

    fn close(v: &[Point], want: &[[f64; 2]], tol: f64) -> bool {
        v.len() == want.len() && want.iter().all(|w| v.iter().any(|p| dist(p, w) <= tol))
    }

    #[test]
    fn linear_function_has_gradient_singleton() {
        let f = ScenarioFunction::parse("3*x1 - 2*x2", 2, 0).unwrap();
        let b = scenario_subdiff(&f, &[0.4, 0.1], &[], &cfg()).unwrap();
        assert!(close(b.vertices().unwrap(), &[[3.0, -2.0]], 1e-6));
    }

    #[test]
    fn example_four_one_bodies() {
        let (spec, _) = builtin_example("ex-4.1").unwrap();
        let want: [&[[f64; 2]]; 3] = [&[[-1.0, -1.0], [-1.0, 1.0]], &[[0.0, 2.0]], &[[0.0, -2.0]]];
        for (c, w) in spec.constraints.iter().zip(want) {
            let b = robust_tangential_subdiff(&c.g, &c.scenarios, &[0.0, 0.0], &cfg()).unwrap();
            assert!(close(b.vertices().unwrap(), w, 1e-6), "{:?}", b.vertices());
        }
    }

    #[test]
    fn example_five_one_outer_bound() {
        let (spec, _) = builtin_example("ex-5.1").unwrap();
        let Objective::Dtc(o) = &spec.objective else { unreachable!() };
        let b = dtc_outer_bound(o, &[0.0, 0.0], &cfg()).unwrap();
        assert_eq!(b.exactness(), Exactness::Outer);
        let want = ConvexBody::segment(&[-2.0, 0.0], &[1.0, 0.0]);
        assert!(hausdorff(&b, &want, &cfg()).unwrap() < 1e-6);
        let b2 = robust_tangential_subdiff(&spec.constraints[1].g, &spec.constraints[1].scenarios, &[0.0, 0.0], &cfg()).unwrap();
        assert!(close(b2.vertices().unwrap(), &[[0.0, -1.0], [0.0, 1.0]], 1e-6));
    }

    #[test]
    fn example_five_two_outer_bound_contains_segment() {
        let (spec, _) = builtin_example("ex-5.2").unwrap();
        let Objective::Dtc(o) = &spec.objective else { unreachable!() };
        let b = dtc_outer_bound(o, &[0.0, 0.0], &cfg()).unwrap();
        for p in [[-1.0, 0.0], [1.0, 0.0]] {
            assert!(member(&b, &p, 1e-6, &cfg()).unwrap().contains());
        }
    }

    #[test]
    fn non_lipschitz_example_tangential_subdiff() {
        let (spec, rec) = builtin_example("ex-2.2").unwrap();
        assert!(rec.non_lipschitz);
        let Objective::Dtc(o) = &spec.objective else { unreachable!() };
        let b = robust_tangential_subdiff(&o.g, &o.scenarios, &[0.0, 0.0], &cfg()).unwrap().mark_non_lipschitz();
        assert!(close(b.vertices().unwrap(), &[[1.0, 0.0]], 1e-9));
        assert!(b.provenance().non_lipschitz);
    }

    #[test]
    fn distance_bound_examples() {
        let p = ConvexBody::point(&[0.0, 2.0]);
        let z = distance_subdiff_bound(2, std::slice::from_ref(&p), 0.0, DistanceMode::Limiting).unwrap();
        assert!(close(z.vertices().unwrap(), &[[0.0, 0.0]], 0.0));
        let s = distance_subdiff_bound(2, &[p], 1.0, DistanceMode::Limiting).unwrap();
        assert!(close(s.vertices().unwrap(), &[[0.0, 0.0], [0.0, 2.0]], 0.0));
    }

    #[test]
    fn zero_h_outer_bound_matches_robust_subdiff() {
        let (spec, _) = builtin_example("ex-4.1").unwrap();
        let c = &spec.constraints[0];
        let o = DtcObjective { g: c.g.clone(), h: ScenarioFunction::zero(2, 2), scenarios: c.scenarios.clone() };
        let a = dtc_outer_bound(&o, &[0.0, 0.0], &cfg()).unwrap();
        let b = robust_tangential_subdiff(&c.g, &c.scenarios, &[0.0, 0.0], &cfg()).unwrap();
        assert_eq!(a.exactness(), Exactness::Exact);
        for d in canonical_directions(2, &cfg()) {
            assert_eq!(a.support(&d), b.support(&d));
        }
    }

    #[test]
    fn bundle_dedups_identical_scenarios() {
        let (spec, _) = builtin_example("ex-4.1").unwrap();
        let c = &spec.constraints[1];
        let b = scenario_bundle(&c.g, None, &c.scenarios, &[0.0, 0.0], &cfg()).unwrap();
        assert!(b.bodies.len() < b.scenario_body.len());
        assert!(close(b.aggregate.vertices().unwrap(), &[[0.0, 2.0]], 1e-6));
        let k = lipschitz_witness(&c.g, &c.scenarios, &[0.0, 0.0], 0.1, 32).unwrap();
        assert!(k.is_finite() && b.max_vertex_norm <= 2.0 * k.max(2.0) + 1e-6);
    }

    #[test]
    fn epsilon_composition() {
        let seg = ConvexBody::segment(&[-1.0, 0.0], &[1.0, 0.0]);
        let a = epsilon_subdiff(&epsilon_subdiff(&seg, 0.1), 0.2);
        let b = epsilon_subdiff(&seg, 0.3);
        for d in canonical_directions(2, &cfg()) {
            assert!((a.support(&d) - b.support(&d)).abs() < 1e-15);
        }
        let _ = vec![0];
    }
}
