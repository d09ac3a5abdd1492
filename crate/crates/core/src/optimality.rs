//! Necessary optimality and stationarity conditions checked as membership
//! or inclusion statements with signed margins.
//!
//! Notation at the reference point `x`: `F` is the outer subdifferential of
//! the objective, `G`/`H` the tangential subdifferentials of the two parts of
//! a sup-DTC objective, `B_j` the robust tangential subdifferentials of the
//! active constraints, `T` the contingent cone and `N = T^-`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cell::OnceCell;
use core::fmt;

use crate::cones::{active_bodies, active_indices, contingent_cone, frechet_normal_cone, ConeError, FeasibleSet};
use crate::convgeo::{
    included, included_in_sum_with_cone, member, member_of_sum_with_cone, sum_certificate, Certificate, ConeSample, ConvexBody,
    Generators, GeomError, Inclusion, Label, SupportFn, Verdict,
};
use crate::linalg::{norm, Point};
use crate::maxfun::MaxFn;
use crate::model::{Config, DtcObjective, Objective, ProblemSpec};
use crate::subdiff::{distance_subdiff_bound, dtc_outer_bound, robust_tangential_subdiff, scenario_bundle, DistanceMode, SubdiffError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Condition {
    Rp1Penalty,
    Rp1Gebcq,
    Rp1Gacq,
    BStat,
    FInfStat,
    StrongB,
    StrongFInf,
    Rp2Isolated,
    RpsPenalty,
    RpsGebcq,
    RpsGacq,
}

impl Condition {
    pub const ALL: [Condition; 11] = [
        Condition::Rp1Penalty,
        Condition::Rp1Gebcq,
        Condition::Rp1Gacq,
        Condition::BStat,
        Condition::FInfStat,
        Condition::StrongB,
        Condition::StrongFInf,
        Condition::Rp2Isolated,
        Condition::RpsPenalty,
        Condition::RpsGebcq,
        Condition::RpsGacq,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Condition::Rp1Penalty => "RP1-PENALTY",
            Condition::Rp1Gebcq => "RP1-GEBCQ",
            Condition::Rp1Gacq => "RP1-GACQ",
            Condition::BStat => "B-STAT",
            Condition::FInfStat => "F-INF-STAT",
            Condition::StrongB => "STRONG-B",
            Condition::StrongFInf => "STRONG-F-INF",
            Condition::Rp2Isolated => "RP2-ISOLATED",
            Condition::RpsPenalty => "RPS-PENALTY",
            Condition::RpsGebcq => "RPS-GEBCQ",
            Condition::RpsGacq => "RPS-GACQ",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|c| c.id().eq_ignore_ascii_case(s))
    }

    /// Conditions that need the contingent cone estimate.
    pub fn uses_contingent_cone(self) -> bool {
        matches!(self, Condition::BStat | Condition::FInfStat | Condition::StrongB | Condition::StrongFInf)
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum OptError {
    Subdiff(SubdiffError),
    Cone(ConeError),
    Geom(GeomError),
}

impl From<SubdiffError> for OptError {
    fn from(e: SubdiffError) -> Self {
        OptError::Subdiff(e)
    }
}

impl From<ConeError> for OptError {
    fn from(e: ConeError) -> Self {
        OptError::Cone(e)
    }
}

impl From<GeomError> for OptError {
    fn from(e: GeomError) -> Self {
        OptError::Geom(e)
    }
}

impl fmt::Display for OptError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OptError::Subdiff(e) => write!(f, "{e}"),
            OptError::Cone(e) => write!(f, "{e}"),
            OptError::Geom(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for OptError {}

#[derive(Clone, Debug)]
pub struct StationarityReport {
    pub condition: Condition,
    pub verdict: Verdict,
    pub margin: f64,
    /// Multiplier cap used by capped conditions.
    pub lambda: Option<f64>,
    /// `eps` for the strong B condition, `eps*` for isolation.
    pub epsilon: Option<f64>,
    /// One certificate per target point (the origin, or each vertex of `H`).
    pub certificates: Vec<(Point, Certificate)>,
    pub direction: Option<Point>,
    /// The right-hand side is an outer bound, so HOLDS is only evidence.
    pub outer: bool,
    /// The verdict depends on a sampled cone.
    pub estimated: bool,
    pub notes: Vec<String>,
}

impl StationarityReport {
    fn new(condition: Condition, verdict: Verdict, margin: f64) -> Self {
        StationarityReport {
            condition,
            verdict,
            margin,
            lambda: None,
            epsilon: None,
            certificates: Vec::new(),
            direction: None,
            outer: false,
            estimated: false,
            notes: Vec::new(),
        }
    }
}

/// Multiplier caps tried when certifying membership in a sum with a cone.
const CONE_CERT_CAPS: [f64; 7] = [1.0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6];

/// Everything the condition checks share at one point.
pub struct Context<'a> {
    spec: &'a ProblemSpec,
    x: Point,
    cfg: Config,
    set: FeasibleSet,
    active: Vec<usize>,
    bodies: Vec<ConvexBody>,
    f: ConvexBody,
    g_hull: ConvexBody,
    h_hull: ConvexBody,
    contingent: OnceCell<Result<ConeSample, ConeError>>,
    notes: Vec<String>,
}

impl<'a> Context<'a> {
    pub fn new(spec: &'a ProblemSpec, x: &[f64], cfg: &Config) -> Result<Self, OptError> {
        let set = FeasibleSet::new(spec.n, spec.constraints.clone(), cfg);
        let active = active_indices(&set, x, cfg)?;
        let bodies = active_bodies(&set, x, &active, cfg)?;
        let mut notes = Vec::new();
        let (f, g_hull, h_hull) = match &spec.objective {
            Objective::Dtc(o) => {
                let f = dtc_outer_bound(o, x, cfg)?;
                if o.h.is_zero() {
                    (f.clone(), f, ConvexBody::zero(spec.n))
                } else {
                    notes.push("objective split as G - H over the active scenarios; constants making h nonnegative and inactive summands cancel".into());
                    let (g, h) = dtc_split(o, x, cfg)?;
                    (f, g, h)
                }
            }
            Objective::SupPair(p) => {
                let g = robust_tangential_subdiff(&p.g, &p.g_scenarios, x, cfg)?;
                let h = robust_tangential_subdiff(&p.h, &p.h_scenarios, x, cfg)?;
                (ConvexBody::minkowski(&g, &h, -1.0)?, g, h)
            }
        };
        Ok(Context { spec, x: x.to_vec(), cfg: cfg.clone(), set, active, bodies, f, g_hull, h_hull, contingent: OnceCell::new(), notes })
    }

    pub fn point(&self) -> &[f64] {
        &self.x
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn constraint_bodies(&self) -> &[ConvexBody] {
        &self.bodies
    }

    /// Left-hand body of the RP1 conditions.
    pub fn objective_body(&self) -> &ConvexBody {
        &self.f
    }

    pub fn g_hull(&self) -> &ConvexBody {
        &self.g_hull
    }

    pub fn h_hull(&self) -> &ConvexBody {
        &self.h_hull
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    pub fn contingent(&self) -> Result<&ConeSample, OptError> {
        let c = self.contingent.get_or_init(|| contingent_cone(&self.set, &self.x, &self.cfg).map(|c| c.cone));
        c.as_ref().map_err(|e| OptError::Cone(e.clone()))
    }

    pub fn normal_cone(&self) -> Result<ConeSample, OptError> {
        Ok(frechet_normal_cone(self.contingent()?))
    }

    /// Cone generated by the union of the active constraint bodies.
    pub fn constraint_cone(&self) -> ConeSample {
        if self.bodies.is_empty() {
            return ConeSample::zero(self.spec.n, &self.cfg);
        }
        ConeSample::generated(self.spec.n, &self.bodies, &self.cfg)
    }

    fn capped_sum(&self, base: &ConvexBody, lambda: f64) -> Result<ConvexBody, OptError> {
        let mut acc = base.clone();
        for b in &self.bodies {
            acc = ConvexBody::minkowski(&acc, &ConvexBody::capped(b, lambda), 1.0)?;
        }
        Ok(acc)
    }

    fn generators(&self, base: &ConvexBody, base_label: &str, lambda: f64) -> Result<Vec<Generators>, OptError> {
        let mut out = alloc::vec![Generators {
            label: base_label.into(),
            points: vertex_list(base).into_iter().map(|p| (p, base_label.into())).collect(),
            scale: 1.0,
            with_zero: false,
        }];
        for &j in &self.active {
            let c = &self.spec.constraints[j];
            let bundle = scenario_bundle(&c.g, None, &c.scenarios, &self.x, &self.cfg)?;
            let mut points = Vec::new();
            for (k, body) in bundle.bodies.iter().enumerate() {
                let i = bundle.scenario_body.iter().find(|sb| sb.1 == k).map(|sb| sb.0).unwrap_or(0);
                let label = format!("v={:?}", c.scenarios.get(i));
                for p in vertex_list(body) {
                    points.push((p, label.clone()));
                }
            }
            out.push(Generators { label: format!("psi{}", j + 1), points, scale: lambda, with_zero: true });
        }
        Ok(out)
    }

    fn certify(&self, targets: &[Point], base: &ConvexBody, base_label: &str, lambda: f64) -> Result<Option<Vec<(Point, Certificate)>>, OptError> {
        let gens = self.generators(base, base_label, lambda)?;
        let mut out = Vec::new();
        for t in targets {
            match sum_certificate(t, &gens) {
                Some(c) if c.residual <= self.cfg.geom_tol => out.push((t.clone(), c)),
                _ => return Ok(None),
            }
        }
        Ok(Some(out))
    }

    fn membership_report(&self, cond: Condition, body: &ConvexBody, lambda: f64) -> Result<StationarityReport, OptError> {
        let origin = alloc::vec![0.0; self.spec.n];
        let m = member(body, &origin, self.cfg.geom_tol, &self.cfg)?;
        let mut r = StationarityReport::new(cond, m.verdict, m.margin);
        r.lambda = Some(lambda);
        r.direction = m.direction;
        if m.verdict == Verdict::Holds {
            if let Some(c) = self.certify(&[origin], &self.f, "xi0", lambda)? {
                r.certificates = c;
            }
        }
        Ok(r)
    }

    /// `0 in F + K dL d_S(x)` with `K dL d_S` replaced by its outer bound
    /// `sum_j [0, lambda] B_j`.
    pub fn check_rp1_penalty(&self, lambda: f64) -> Result<StationarityReport, OptError> {
        let d = distance_subdiff_bound(self.spec.n, &self.bodies, lambda, DistanceMode::Limiting)?;
        let body = ConvexBody::minkowski(&self.f, &d, 1.0)?;
        let mut r = self.membership_report(Condition::Rp1Penalty, &body, lambda)?;
        r.outer = true;
        Ok(r)
    }

    /// `0 in F + sum_j [0, lambda] B_j`.
    pub fn check_rp1_gebcq(&self, lambda: f64) -> Result<StationarityReport, OptError> {
        let body = self.capped_sum(&self.f, lambda)?;
        self.membership_report(Condition::Rp1Gebcq, &body, lambda)
    }

    /// `0 in F + cl cone(U_j B_j)`; a zero margin means the closure is needed.
    pub fn check_rp1_gacq(&self) -> Result<StationarityReport, OptError> {
        let k = self.constraint_cone();
        let origin = alloc::vec![0.0; self.spec.n];
        let inc = member_of_sum_with_cone(&self.f, &k, &origin, self.cfg.geom_tol, &self.cfg)?;
        let mut r = StationarityReport::new(Condition::Rp1Gacq, inc.verdict, inc.margin);
        r.direction = inc.direction;
        if inc.verdict == Verdict::Holds {
            for cap in CONE_CERT_CAPS {
                if let Some(c) = self.certify(core::slice::from_ref(&origin), &self.f, "xi0", cap)? {
                    r.certificates = c;
                    r.lambda = Some(cap);
                    break;
                }
            }
        }
        Ok(r)
    }

    /// `G'(x; d) >= H'(x; d) + eps |d|` for `d` in `T`, tested on the unit
    /// directions labeled in.
    pub fn check_b_stationarity(&self, strong: bool, eps: f64) -> Result<StationarityReport, OptError> {
        let t = self.contingent()?;
        let mut best = (f64::INFINITY, None);
        let mut unknown = false;
        for (d, l) in t.samples() {
            match l {
                Label::In => {
                    let v = self.g_hull.support(d) - self.h_hull.support(d) - eps * norm(d);
                    if v < best.0 {
                        best = (v, Some(d.clone()));
                    }
                }
                Label::Unknown => unknown = true,
                Label::Out => {}
            }
        }
        let cond = if strong { Condition::StrongB } else { Condition::BStat };
        let mut r = StationarityReport::new(cond, Verdict::from_margin(best.0, self.cfg.geom_tol), best.0);
        r.direction = best.1;
        r.estimated = true;
        if strong {
            r.epsilon = Some(eps);
        }
        if unknown {
            r.notes.push("some directions of the contingent cone are unresolved".into());
        }
        Ok(r)
    }

    /// `H subset G + N`; the strong form asks for the interior, that is a
    /// positive margin.
    pub fn check_f_inf(&self, strong: bool) -> Result<StationarityReport, OptError> {
        let n = self.normal_cone()?;
        let inc = included_in_sum_with_cone(&self.h_hull, &self.g_hull, &n, self.cfg.geom_tol, &self.cfg)?;
        let cond = if strong { Condition::StrongFInf } else { Condition::FInfStat };
        let verdict = if strong && inc.verdict != Verdict::Holds { Verdict::Fails } else { inc.verdict };
        let mut r = StationarityReport::new(cond, verdict, inc.margin);
        r.direction = inc.direction;
        r.estimated = true;
        Ok(r)
    }

    /// `eps* = min_d support_G(d) - support_H(d)`: the largest `eps` with
    /// `H + eps B subset G`. Isolation needs `eps* > 0`.
    pub fn check_rp2_isolated(&self) -> Result<StationarityReport, OptError> {
        let inc = isolation_epsilon(&self.g_hull, &self.h_hull, &self.cfg)?;
        let verdict = if inc.margin > self.cfg.geom_tol { Verdict::Holds } else { Verdict::Fails };
        let mut r = StationarityReport::new(Condition::Rp2Isolated, verdict, inc.margin);
        r.epsilon = Some(inc.margin);
        r.direction = inc.direction;
        Ok(r)
    }

    fn rps_capped(&self, cond: Condition, lambda: f64) -> Result<StationarityReport, OptError> {
        let rhs = self.capped_sum(&self.g_hull, lambda)?;
        let inc = included(&self.h_hull, &rhs, self.cfg.geom_tol, &self.cfg)?;
        let mut r = StationarityReport::new(cond, inc.verdict, inc.margin);
        r.lambda = Some(lambda);
        r.direction = inc.direction;
        if inc.verdict == Verdict::Holds {
            let targets = vertex_list(&self.h_hull);
            if let Some(c) = self.certify(&targets, &self.g_hull, "G", lambda)? {
                r.certificates = c;
            }
        }
        Ok(r)
    }

    /// `H subset G + K dL d_S(x)` through the same outer bound as RP1.
    pub fn check_rps_penalty(&self, lambda: f64) -> Result<StationarityReport, OptError> {
        let mut r = self.rps_capped(Condition::RpsPenalty, lambda)?;
        r.outer = true;
        Ok(r)
    }

    /// `H subset G + sum_j [0, lambda] B_j`.
    pub fn check_rps_gebcq(&self, lambda: f64) -> Result<StationarityReport, OptError> {
        self.rps_capped(Condition::RpsGebcq, lambda)
    }

    /// `H subset G + cl cone(U_j B_j)`.
    pub fn check_rps_gacq(&self) -> Result<StationarityReport, OptError> {
        let k = self.constraint_cone();
        let inc = included_in_sum_with_cone(&self.h_hull, &self.g_hull, &k, self.cfg.geom_tol, &self.cfg)?;
        let mut r = StationarityReport::new(Condition::RpsGacq, inc.verdict, inc.margin);
        r.direction = inc.direction;
        if inc.verdict == Verdict::Holds {
            let targets = vertex_list(&self.h_hull);
            for cap in CONE_CERT_CAPS {
                if let Some(c) = self.certify(&targets, &self.g_hull, "G", cap)? {
                    r.certificates = c;
                    r.lambda = Some(cap);
                    break;
                }
            }
        }
        Ok(r)
    }

    /// Run one condition with the configured multiplier cap and `eps = 0`.
    pub fn check(&self, cond: Condition) -> Result<StationarityReport, OptError> {
        let lambda = self.cfg.lambda_cap;
        match cond {
            Condition::Rp1Penalty => self.check_rp1_penalty(lambda),
            Condition::Rp1Gebcq => self.check_rp1_gebcq(lambda),
            Condition::Rp1Gacq => self.check_rp1_gacq(),
            Condition::BStat => self.check_b_stationarity(false, 0.0),
            Condition::StrongB => self.check_b_stationarity(true, 0.0),
            Condition::FInfStat => self.check_f_inf(false),
            Condition::StrongFInf => self.check_f_inf(true),
            Condition::Rp2Isolated => self.check_rp2_isolated(),
            Condition::RpsPenalty => self.check_rps_penalty(lambda),
            Condition::RpsGebcq => self.check_rps_gebcq(lambda),
            Condition::RpsGacq => self.check_rps_gacq(),
        }
    }

    pub fn check_all(&self) -> Vec<(Condition, Result<StationarityReport, OptError>)> {
        Condition::ALL.iter().map(|&c| (c, self.check(c))).collect()
    }
}

/// `eps* = min over unit d of support_g(d) - support_h(d)` with its minimizer.
pub fn isolation_epsilon(g_hull: &ConvexBody, h_hull: &ConvexBody, cfg: &Config) -> Result<Inclusion, GeomError> {
    included(h_hull, g_hull, cfg.geom_tol, cfg)
}

/// Sup-DTC split of `max_nu g_nu - h_nu` restricted to the active scenarios:
/// `dT H = sum_w dT h_w` and `dT G = co U_nu (dT g_nu + sum_{w != nu} dT h_w)`,
/// so that `support_G - support_H` is Danskin's derivative.
fn dtc_split(o: &DtcObjective, x: &[f64], cfg: &Config) -> Result<(ConvexBody, ConvexBody), OptError> {
    let act = MaxFn::objective(o).active_set(x, cfg).map_err(SubdiffError::Model)?;
    let vs: Vec<Point> = act.active.iter().map(|&i| o.scenarios.get(i).to_vec()).collect();
    let noise = if o.g.has_analytic() && o.h.has_analytic() { 0.0 } else { cfg.geom_tol };
    let derivs = {
        let (g, h, x) = (o.g.clone(), o.h.clone(), x.to_vec());
        move |d: &[f64]| -> Option<(f64, f64)> {
            let (mut hsum, mut best) = (0.0, f64::NEG_INFINITY);
            for v in &vs {
                let hv = h.dirderiv_x(&x, v, d).ok()?.value;
                let gv = g.dirderiv_x(&x, v, d).ok()?.value;
                hsum += hv;
                best = best.max(gv - hv);
            }
            Some((hsum, best))
        }
    };
    let derivs = alloc::sync::Arc::new(derivs);
    let dh = derivs.clone();
    let h_oracle: SupportFn = alloc::sync::Arc::new(move |d: &[f64]| dh(d).map_or(f64::NAN, |p| p.0));
    let g_oracle: SupportFn = alloc::sync::Arc::new(move |d: &[f64]| derivs(d).map_or(f64::NAN, |p| p.0 + p.1));
    let n = x.len();
    let h = ConvexBody::from_support_with_noise(n, h_oracle, cfg, noise)?;
    let g = ConvexBody::from_support_with_noise(n, g_oracle, cfg, noise)?;
    Ok((g, h))
}

fn vertex_list(b: &ConvexBody) -> Vec<Point> {
    b.approx_vertices().map(|v| v.to_vec()).unwrap_or_else(|| b.outline(64).unwrap_or_default())
}

/// Outer subdifferential of a DTC objective, exposed for callers that only
/// need `F`.
pub fn objective_outer_bound(obj: &DtcObjective, x: &[f64], cfg: &Config) -> Result<ConvexBody, OptError> {
    Ok(dtc_outer_bound(obj, x, cfg)?)
}
