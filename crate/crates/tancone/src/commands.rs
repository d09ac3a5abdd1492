//! Subcommand implementations. Each returns a [`Report`] and an exit code.

use std::cell::OnceCell;
use std::path::PathBuf;

use tancone_core::cones::{active_bodies, active_indices, contingent_cone, frechet_normal_cone, linearized_cone, FeasibleSet};
use tancone_core::convgeo::{canonical_directions, hausdorff, member, ConeSample, ConvexBody, Label};
use tancone_core::cq::{check_gacq, check_gebcq, witness_ratios, CqReport, CqVerdict};
use tancone_core::linalg::Point;
use tancone_core::maxfun::{active_set, danskin_dirderiv, robust_value, MaxFn};
use tancone_core::model::{builtin_example_with, builtin_names, Config, Expect, GoldenField, GoldenRecord, Objective, ProblemSpec};
use tancone_core::optimality::{Condition, Context, StationarityReport};
use tancone_core::subdiff::robust_tangential_subdiff;

use crate::bodyfile::{read_body, write_body};
use crate::problem::load_problem;
use crate::report::{indices, num, point, points, Output, Report, Section};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;

#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    Builtin(String),
    Problem(PathBuf),
}

/// Everything a subcommand needs, after flag parsing.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub source: Source,
    pub point: Option<String>,
    pub delta: Option<f64>,
    pub samples: Option<usize>,
    pub lambda_cap: Option<f64>,
    pub geom_tol: Option<f64>,
    pub seed: u64,
    pub threads: usize,
    pub output: Output,
}

impl RunConfig {
    pub fn builtin(name: &str) -> Self {
        RunConfig {
            source: Source::Builtin(name.to_string()),
            point: None,
            delta: None,
            samples: None,
            lambda_cap: None,
            geom_tol: None,
            seed: 0,
            threads: 1,
            output: Output::Text,
        }
    }

    pub fn config(&self) -> Result<Config, String> {
        let mut cfg = Config { seed: self.seed, ..Config::default() };
        let positive = |name: &str, v: f64| if v > 0.0 && v.is_finite() { Ok(v) } else { Err(format!("--{name} must be positive, got {v}")) };
        if let Some(d) = self.delta {
            cfg.delta = positive("delta", d)?;
        }
        if let Some(s) = self.samples {
            if s == 0 {
                return Err("--samples must be positive".into());
            }
            cfg.samples = s;
        }
        if let Some(l) = self.lambda_cap {
            cfg.lambda_cap = positive("lambda-cap", l)?;
        }
        if let Some(t) = self.geom_tol {
            cfg.geom_tol = positive("geom-tol", t)?;
        }
        if self.threads == 0 {
            return Err("--threads must be positive".into());
        }
        Ok(cfg)
    }

    fn pool(&self) -> Result<rayon::ThreadPool, String> {
        rayon::ThreadPoolBuilder::new().num_threads(self.threads).build().map_err(|e| e.to_string())
    }
}

/// A loaded problem with its evaluation point.
pub struct Loaded {
    pub spec: ProblemSpec,
    pub golden: Option<GoldenRecord>,
    pub cfg: Config,
    pub x: Point,
}

pub fn parse_point(s: &str, n: usize) -> Result<Point, String> {
    let p = s
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().ok().filter(|v| v.is_finite()))
        .collect::<Option<Vec<f64>>>()
        .ok_or_else(|| format!("malformed point `{s}`: expected {n} whitespace-separated numbers"))?;
    if p.len() != n {
        return Err(format!("point `{s}` has {} coordinates, the problem has n = {n}", p.len()));
    }
    Ok(p)
}

pub fn load(rc: &RunConfig) -> Result<Loaded, String> {
    let cfg = rc.config()?;
    let (spec, golden) = match &rc.source {
        Source::Builtin(name) => {
            let (s, g) = builtin_example_with(name, &cfg).map_err(|e| format!("{e} (known: {})", builtin_names().join(", ")))?;
            (s, Some(g))
        }
        Source::Problem(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            (load_problem(&text, &cfg).map_err(|e| format!("{}: {e}", path.display()))?, None)
        }
    };
    let x = match &rc.point {
        Some(p) => parse_point(p, spec.n)?,
        None => golden.as_ref().map_or_else(|| vec![0.0; spec.n], |g| g.point.clone()),
    };
    let cfg = spec.config.clone();
    Ok(Loaded { spec, golden, cfg, x })
}

fn body_str(b: &ConvexBody) -> String {
    if let Some(v) = b.vertices() {
        return points(v);
    }
    if let Some(v) = b.approx_vertices() {
        return format!("~{} (deviation {})", points(v), num(b.provenance().approx_bound));
    }
    match b.outline(64) {
        Ok(v) => format!("~{} (support-only, 64-gon)", points(&v)),
        Err(_) => "support-only".into(),
    }
}

fn cone_str(c: &ConeSample) -> String {
    if c.is_zero() {
        return "{0}".into();
    }
    if c.is_whole() {
        return "whole space".into();
    }
    if let Some(arcs) = c.arcs() {
        let deg = |t: f64| num(t.to_degrees());
        return arcs
            .iter()
            .map(|a| if a.width == 0.0 { format!("ray {}deg", deg(a.start)) } else { format!("[{}deg, {}deg]", deg(a.start), deg(a.start + a.width)) })
            .collect::<Vec<_>>()
            .join(" u ");
    }
    let count = |l: Label| c.samples().iter().filter(|s| s.1 == l).count();
    format!("in={} out={} unknown={}", count(Label::In), count(Label::Out), count(Label::Unknown))
}

fn put_cq(s: &mut Section, name: &str, r: &CqReport) {
    s.put(format!("cq.{name}"), r.verdict.as_str());
    s.put(format!("cq.{name}.estimated"), r.estimated);
    if let Some(sigma) = r.sigma {
        s.put(format!("cq.{name}.sigma"), num(sigma));
    }
    for (k, v) in &r.params {
        s.put(format!("cq.{name}.{k}"), num(*v));
    }
    for (i, st) in r.scales.iter().enumerate() {
        s.put(
            format!("cq.{name}.scale.{}", i + 1),
            format!("[{}, {}] samples={} infeasible={} refined={} max_ratio={}", num(st.lo), num(st.hi), st.samples, st.infeasible, st.refined, num(st.max_ratio)),
        );
    }
    for (i, w) in r.witnesses.iter().enumerate() {
        let ratio = r.witness_ratios.get(i).map_or(String::new(), |q| format!(" ratio={}", num(*q)));
        s.put(format!("cq.{name}.witness.{}", i + 1), format!("{}{ratio}", point(w)));
    }
    for (i, n) in r.notes.iter().enumerate() {
        s.put(format!("cq.{name}.note.{}", i + 1), n);
    }
}

fn put_stationarity(s: &mut Section, r: &StationarityReport) {
    let id = r.condition.id();
    s.put(format!("stationarity.{id}"), r.verdict.as_str());
    s.put(format!("stationarity.{id}.margin"), num(r.margin));
    if let Some(l) = r.lambda {
        s.put(format!("stationarity.{id}.lambda"), num(l));
    }
    if let Some(e) = r.epsilon {
        s.put(format!("stationarity.{id}.epsilon"), num(e));
    }
    s.put(format!("stationarity.{id}.outer"), r.outer);
    s.put(format!("stationarity.{id}.estimated"), r.estimated);
    for (i, (target, cert)) in r.certificates.iter().enumerate() {
        let terms: Vec<String> = cert
            .terms
            .iter()
            .filter(|t| t.coefficient != 0.0)
            .map(|t| format!("{}*{}[{}]{}", num(t.coefficient), t.summand, t.point_label, point(&t.point)))
            .collect();
        let sum = if terms.is_empty() { "0".to_string() } else { terms.join(" + ") };
        s.put(format!("stationarity.{id}.certificate.{}", i + 1), format!("{} = {sum} (residual {})", point(target), num(cert.residual)));
    }
    if let Some(d) = &r.direction {
        s.put(format!("stationarity.{id}.direction"), point(d));
    }
    for (i, n) in r.notes.iter().enumerate() {
        s.put(format!("stationarity.{id}.note.{}", i + 1), n);
    }
}

fn problem_section(l: &Loaded) -> Section {
    let mut s = Section::new("problem");
    s.put("problem", &l.spec.name);
    s.put("n", l.spec.n);
    s.put("point", point(&l.x));
    s.put("constraints", l.spec.constraints.len());
    s
}

fn objective_section(l: &Loaded, ctx: &Context<'_>) -> Result<Section, String> {
    let mut s = Section::new("objective");
    let x = &l.x;
    match &l.spec.objective {
        Objective::Dtc(o) => {
            s.put("objective.form", "dtc");
            s.put("objective.psi", num(robust_value(o, x).map_err(|e| e.to_string())?));
            let act = active_set(o, x, &l.cfg).map_err(|e| e.to_string())?;
            s.put("objective.scenarios", o.scenarios.len());
            s.put("objective.active", indices(&act.active));
        }
        Objective::SupPair(p) => {
            s.put("objective.form", "sup");
            let g = MaxFn::sup(&p.g, &p.g_scenarios);
            let h = MaxFn::sup(&p.h, &p.h_scenarios);
            let (gv, hv) = (g.value(x).map_err(|e| e.to_string())?, h.value(x).map_err(|e| e.to_string())?);
            s.put("objective.psi", num(gv - hv));
            s.put("objective.G", num(gv));
            s.put("objective.H", num(hv));
            s.put("objective.G.active", indices(&g.active_set(x, &l.cfg).map_err(|e| e.to_string())?.active));
            s.put("objective.H.active", indices(&h.active_set(x, &l.cfg).map_err(|e| e.to_string())?.active));
        }
    }
    s.put("objective.subdiff", body_str(ctx.objective_body()));
    s.put("objective.subdiff.exactness", format!("{:?}", ctx.objective_body().exactness()).to_lowercase());
    s.put("objective.G-hull", body_str(ctx.g_hull()));
    s.put("objective.H-hull", body_str(ctx.h_hull()));
    for (i, n) in ctx.notes().iter().enumerate() {
        s.put(format!("objective.note.{}", i + 1), n);
    }
    Ok(s)
}

fn constraint_section(l: &Loaded, ctx: &Context<'_>) -> Result<Section, String> {
    let mut s = Section::new("constraints");
    let set = FeasibleSet::of(&l.spec);
    for (j, v) in set.values(&l.x).map_err(|e| e.to_string())?.iter().enumerate() {
        s.put(format!("psi.{}", j + 1), num(*v));
    }
    s.put("J", indices(ctx.active()));
    for (j, b) in ctx.active().iter().zip(ctx.constraint_bodies()) {
        s.put(format!("subdiff.{}", j + 1), body_str(b));
    }
    Ok(s)
}

fn cone_section(l: &Loaded, ctx: &Context<'_>) -> Result<(Section, bool), String> {
    let mut s = Section::new("cones");
    let lin = linearized_cone(l.spec.n, ctx.constraint_bodies(), &l.cfg);
    let t = ctx.contingent().map_err(|e| e.to_string())?;
    s.put("cone.linearized", cone_str(&lin));
    s.put("cone.contingent", cone_str(t));
    s.put("cone.normal", cone_str(&frechet_normal_cone(t)));
    let unknown = t.samples().iter().filter(|x| x.1 == Label::Unknown).count();
    s.put("cone.contingent.unknown", unknown);
    Ok((s, unknown > 0))
}

fn cq_section(l: &Loaded) -> Result<(Section, bool), String> {
    let set = FeasibleSet::of(&l.spec);
    let gacq = check_gacq(&set, &l.x, &l.cfg).map_err(|e| e.to_string())?;
    let gebcq = check_gebcq(&set, &l.x, l.cfg.delta, &l.cfg).map_err(|e| e.to_string())?;
    let mut s = Section::new("constraint qualifications");
    put_cq(&mut s, "GACQ", &gacq);
    put_cq(&mut s, "GEBCQ", &gebcq);
    let inconsistent = gebcq.verdict == CqVerdict::Holds && gacq.verdict == CqVerdict::Fails;
    s.put("cq.cross_check", if inconsistent { "INCONSISTENT" } else { "CONSISTENT" });
    let unknown = gacq.verdict == CqVerdict::Unknown || gebcq.verdict == CqVerdict::Unknown;
    Ok((s, unknown))
}

fn stationarity_section(ctx: &Context<'_>, conditions: &[Condition]) -> (Section, bool) {
    let mut s = Section::new("stationarity");
    let mut failed = false;
    for &c in conditions {
        match ctx.check(c) {
            Ok(r) => put_stationarity(&mut s, &r),
            Err(e) => {
                s.put(format!("stationarity.{}", c.id()), "ERROR");
                s.put(format!("stationarity.{}.error", c.id()), e);
                failed = true;
            }
        }
    }
    (s, failed)
}

fn with_context<T>(l: &Loaded, f: impl FnOnce(&Context<'_>) -> Result<T, String>) -> Result<T, String> {
    let ctx = Context::new(&l.spec, &l.x, &l.cfg).map_err(|e| e.to_string())?;
    f(&ctx)
}

fn exit_code(unknown: bool, failed: bool) -> i32 {
    if failed {
        EXIT_ERROR
    } else if unknown {
        EXIT_UNKNOWN
    } else {
        EXIT_OK
    }
}

/// Full report: objective, constraints, cones, both CQs and every condition.
/// Bodies are written to `export` as `.body` files when given.
pub fn cmd_analyze(rc: &RunConfig, export: Option<&std::path::Path>) -> Result<(Report, i32), String> {
    let l = load(rc)?;
    let pool = rc.pool()?;
    let (local, cq) = pool.install(|| {
        rayon::join(
            || {
                with_context(&l, |ctx| {
                    let obj = objective_section(&l, ctx)?;
                    let cons = constraint_section(&l, ctx)?;
                    let (cones, unknown) = cone_section(&l, ctx)?;
                    let (stat, failed) = stationarity_section(ctx, &Condition::ALL);
                    let mut bodies = vec![("objective".to_string(), ctx.objective_body().clone())];
                    for (j, b) in ctx.active().iter().zip(ctx.constraint_bodies()) {
                        bodies.push((format!("subdiff.{}", j + 1), b.clone()));
                    }
                    Ok((vec![obj, cons, cones, stat], unknown, failed, bodies))
                })
            },
            || cq_section(&l),
        )
    });
    let (sections, cone_unknown, failed, bodies) = local?;
    let (cq, cq_unknown) = cq?;
    let mut report = Report::new("analyze");
    report.push(problem_section(&l));
    let mut it = sections.into_iter();
    for s in it.by_ref().take(3) {
        report.push(s);
    }
    report.push(cq);
    report.extend(it);
    if let Some(dir) = export {
        std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
        let mut s = Section::new("exported bodies");
        for (name, b) in bodies {
            let path = dir.join(format!("{name}.body"));
            match write_body(&b) {
                Ok(text) => {
                    std::fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display()))?;
                    s.put(format!("export.{name}"), path.display());
                }
                Err(e) => s.put(format!("export.{name}"), format!("skipped: {e}")),
            }
        }
        report.push(s);
    }
    Ok((report, exit_code(cone_unknown || cq_unknown, failed)))
}

pub fn cmd_check_cq(rc: &RunConfig) -> Result<(Report, i32), String> {
    let l = load(rc)?;
    let set = FeasibleSet::of(&l.spec);
    let active = active_indices(&set, &l.x, &l.cfg).map_err(|e| e.to_string())?;
    let (cq, unknown) = rc.pool()?.install(|| cq_section(&l))?;
    let mut report = Report::new("check-cq");
    let mut p = problem_section(&l);
    p.put("J", indices(&active));
    report.push(p);
    report.push(cq);
    Ok((report, exit_code(unknown, false)))
}

pub fn parse_conditions(s: &str) -> Result<Vec<Condition>, String> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(Condition::ALL.to_vec());
    }
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| Condition::parse(t).ok_or_else(|| format!("unknown condition `{t}`")))
        .collect::<Result<Vec<_>, _>>()
        .and_then(|v| if v.is_empty() { Err("no conditions given".into()) } else { Ok(v) })
}

pub fn cmd_check_stationarity(rc: &RunConfig, conditions: &str) -> Result<(Report, i32), String> {
    let conds = parse_conditions(conditions)?;
    let l = load(rc)?;
    let (stat, failed) = with_context(&l, |ctx| Ok(stationarity_section(ctx, &conds)))?;
    let mut report = Report::new("check-stationarity");
    report.push(problem_section(&l));
    report.push(stat);
    Ok((report, exit_code(false, failed)))
}

/// Lazily computed objects shared by the golden-field checks of one example.
struct Golden<'a> {
    l: &'a Loaded,
    record: &'a GoldenRecord,
    set: FeasibleSet,
    ctx: Context<'a>,
    gacq: OnceCell<Result<CqReport, String>>,
    gebcq: OnceCell<Result<CqReport, String>>,
}

struct Row {
    key: String,
    expected: String,
    actual: String,
    pass: bool,
}

impl<'a> Golden<'a> {
    fn gacq(&self) -> Result<&CqReport, String> {
        self.gacq.get_or_init(|| check_gacq(&self.set, &self.l.x, &self.l.cfg).map_err(|e| e.to_string())).as_ref().map_err(Clone::clone)
    }

    fn gebcq(&self) -> Result<&CqReport, String> {
        self.gebcq
            .get_or_init(|| check_gebcq(&self.set, &self.l.x, self.l.cfg.delta, &self.l.cfg).map_err(|e| e.to_string()))
            .as_ref()
            .map_err(Clone::clone)
    }

    fn constraint_index(&self, key: &str) -> Result<usize, String> {
        let j: usize = key.rsplit('.').next().and_then(|s| s.parse().ok()).ok_or_else(|| format!("no constraint index in `{key}`"))?;
        if j == 0 || j > self.l.spec.constraints.len() {
            return Err(format!("constraint {j} does not exist"));
        }
        Ok(j - 1)
    }

    /// The body a golden key refers to.
    fn body(&self, key: &str) -> Result<ConvexBody, String> {
        match key {
            "G-hull" => Ok(self.ctx.g_hull().clone()),
            "H-hull" => Ok(self.ctx.h_hull().clone()),
            "outer0" | "tsubdiff0" => Ok(self.ctx.objective_body().clone()),
            k if k.starts_with("subdiff.") => {
                let c = &self.l.spec.constraints[self.constraint_index(k)?];
                robust_tangential_subdiff(&c.g, &c.scenarios, &self.l.x, &self.l.cfg).map_err(|e| e.to_string())
            }
            k => Err(format!("no body for key `{k}`")),
        }
    }

    fn directional(&self, key: &str, d: &[f64]) -> Result<f64, String> {
        let x = &self.l.x;
        match (key, &self.l.spec.objective) {
            ("dpsi0", Objective::Dtc(o)) => danskin_dirderiv(o, x, d, &self.l.cfg).map(|r| r.value).map_err(|e| e.to_string()),
            (k, _) if k.starts_with("dpsi.") => {
                let m = MaxFn::constraint(&self.l.spec.constraints[self.constraint_index(k)?]);
                let act = m.active_set(x, &self.l.cfg).map_err(|e| e.to_string())?;
                m.danskin(&act, d).map(|r| r.value).map_err(|e| e.to_string())
            }
            (k, _) => Err(format!("no directional derivative for key `{k}`")),
        }
    }

    fn cone(&self, key: &str) -> Result<ConeSample, String> {
        match key {
            "linearized" => {
                let j = active_indices(&self.set, &self.l.x, &self.l.cfg).map_err(|e| e.to_string())?;
                let b = active_bodies(&self.set, &self.l.x, &j, &self.l.cfg).map_err(|e| e.to_string())?;
                Ok(linearized_cone(self.l.spec.n, &b, &self.l.cfg))
            }
            "contingent" => contingent_cone(&self.set, &self.l.x, &self.l.cfg).map(|c| c.cone).map_err(|e| e.to_string()),
            k => Err(format!("no cone for key `{k}`")),
        }
    }

    fn verdict(&self, key: &str) -> Result<String, String> {
        match key {
            "GACQ" => return Ok(self.gacq()?.verdict.as_str().into()),
            "GEBCQ" => return Ok(self.gebcq()?.verdict.as_str().into()),
            _ => {}
        }
        let (id, cap) = match key.split_once('@') {
            Some((id, cap)) => (id, Some(cap.parse::<f64>().map_err(|_| format!("bad multiplier cap in `{key}`"))?)),
            None => (key, None),
        };
        let cond = Condition::parse(id).ok_or_else(|| format!("unknown condition `{id}`"))?;
        let r = match (cond, cap) {
            (Condition::Rp1Gebcq, Some(c)) => self.ctx.check_rp1_gebcq(c),
            (Condition::Rp1Penalty, Some(c)) => self.ctx.check_rp1_penalty(c),
            (Condition::RpsGebcq, Some(c)) => self.ctx.check_rps_gebcq(c),
            (Condition::RpsPenalty, Some(c)) => self.ctx.check_rps_penalty(c),
            (_, Some(_)) => return Err(format!("`{id}` takes no multiplier cap")),
            (c, None) => self.ctx.check(c),
        };
        Ok(r.map_err(|e| e.to_string())?.verdict.as_str().into())
    }

    fn range_value(&self, key: &str) -> Result<f64, String> {
        if key == "sigma" {
            return self.gebcq()?.sigma.ok_or_else(|| "GEBCQ reported no sigma".to_string());
        }
        if let Some(k) = key.strip_prefix("witness_ratio_k").and_then(|k| k.parse::<usize>().ok()) {
            let seq = self.record.witness.ok_or("no witness sequence recorded")?;
            let r = witness_ratios(&self.set, &self.l.x, seq, &[k], &self.l.cfg).map_err(|e| e.to_string())?;
            return Ok(r[0].1);
        }
        Err(format!("no value for key `{key}`"))
    }

    fn check(&self, field: &GoldenField) -> Row {
        let key = field.key.to_string();
        match self.evaluate(field) {
            Ok((expected, actual, pass)) => Row { key, expected, actual, pass },
            Err(e) => Row { key, expected: "-".into(), actual: format!("error: {e}"), pass: false },
        }
    }

    fn evaluate(&self, field: &GoldenField) -> Result<(String, String, bool), String> {
        let cfg = &self.l.cfg;
        let key = field.key;
        Ok(match &field.expect {
            Expect::Scalar { value, tol } => {
                let v = match &self.l.spec.objective {
                    Objective::Dtc(o) if key == "psi0" => robust_value(o, &self.l.x).map_err(|e| e.to_string())?,
                    _ => return Err(format!("no scalar for key `{key}`")),
                };
                (format!("{} +- {}", num(*value), num(*tol)), num(v), (v - value).abs() <= *tol)
            }
            Expect::Vertices { points: want, tol } => {
                let b = self.body(key)?;
                let w = ConvexBody::from_points(b.dim(), want.clone()).map_err(|e| e.to_string())?;
                let h = hausdorff(&b, &w, cfg).map_err(|e| e.to_string())?;
                (format!("{} within {}", points(want), num(*tol)), format!("{} (Hausdorff {})", body_str(&b), num(h)), h <= *tol)
            }
            Expect::Contains { points: want, tol } => {
                let b = self.body(key)?;
                let mut ok = true;
                for p in want {
                    ok &= member(&b, p, *tol, cfg).map_err(|e| e.to_string())?.contains();
                }
                (format!("contains {}", points(want)), body_str(&b), ok)
            }
            Expect::Support { support, tol } => {
                let b = self.body(key)?;
                let err = canonical_directions(b.dim(), cfg).iter().map(|d| (b.support(d) - support(d)).abs()).fold(0.0, f64::max);
                (format!("closed-form support within {}", num(*tol)), format!("max support error {}", num(err)), err <= *tol)
            }
            Expect::Directional { value, tol } => {
                let mut err = 0.0f64;
                for d in canonical_directions(self.l.spec.n, cfg).iter().step_by(5) {
                    err = err.max((self.directional(key, d)? - value(d)).abs());
                }
                (format!("closed form within {}", num(*tol)), format!("max error {}", num(err)), err <= *tol)
            }
            Expect::Cone(pred) => {
                let c = self.cone(key)?;
                let bad = c.samples().iter().filter(|(d, l)| (*l == Label::In) != pred(d) || *l == Label::Unknown).count();
                ("closed-form cone".into(), format!("{} ({bad} of {} directions disagree)", cone_str(&c), c.samples().len()), bad == 0)
            }
            Expect::Indices(want) => {
                let got = active_indices(&self.set, &self.l.x, cfg).map_err(|e| e.to_string())?;
                (indices(want), indices(&got), &got == want)
            }
            Expect::AllActive => match &self.l.spec.objective {
                Objective::Dtc(o) => {
                    let act = active_set(o, &self.l.x, cfg).map_err(|e| e.to_string())?;
                    ("all scenarios".into(), format!("{} of {}", act.active.len(), o.scenarios.len()), act.active.len() == o.scenarios.len())
                }
                Objective::SupPair(_) => return Err("active-set check needs a DTC objective".into()),
            },
            Expect::Verdict(want) => {
                let got = self.verdict(key)?;
                (want.to_string(), got.clone(), got == *want)
            }
            Expect::Range { lo, hi } => {
                let v = self.range_value(key)?;
                (format!("[{}, {}]", num(*lo), num(*hi)), num(v), *lo <= v && v <= *hi)
            }
        })
    }
}

fn reproduce_one(name: &str, rc: &RunConfig) -> Result<(String, Vec<Row>, Vec<&'static str>), String> {
    let mut one = rc.clone();
    one.source = Source::Builtin(name.to_string());
    one.point = None;
    let l = load(&one)?;
    let record = l.golden.clone().ok_or("no golden record")?;
    let ctx = Context::new(&l.spec, &l.x, &l.cfg).map_err(|e| e.to_string())?;
    let g = Golden { l: &l, record: &record, set: FeasibleSet::of(&l.spec), ctx, gacq: OnceCell::new(), gebcq: OnceCell::new() };
    let rows = record.fields.iter().map(|f| g.check(f)).collect();
    Ok((name.to_string(), rows, record.notes.clone()))
}

/// Compare computed quantities with the golden records; `all` runs every
/// built-in. Exit code 1 when any field disagrees.
pub fn cmd_reproduce(name: &str, rc: &RunConfig) -> Result<(Report, i32), String> {
    let names: Vec<&str> = if name == "all" {
        builtin_names().to_vec()
    } else if builtin_names().contains(&name) {
        vec![name]
    } else {
        return Err(format!("unknown example `{name}` (known: {})", builtin_names().join(", ")));
    };
    let results: Vec<_> = rc.pool()?.install(|| {
        use rayon::prelude::*;
        names.par_iter().map(|n| reproduce_one(n, rc)).collect()
    });
    let mut report = Report::new("reproduce");
    let (mut passed, mut total) = (0, 0);
    for r in results {
        let (name, rows, notes) = r?;
        let mut s = Section::new(&name);
        for row in rows {
            total += 1;
            passed += usize::from(row.pass);
            let status = if row.pass { "PASS" } else { "FAIL" };
            s.put(format!("{name}.{}", row.key), format!("{status} expected {} got {}", row.expected, row.actual));
        }
        for (i, n) in notes.iter().enumerate() {
            s.put(format!("{name}.note.{}", i + 1), n);
        }
        report.push(s);
    }
    let mut s = Section::new("summary");
    s.put("fields", total);
    s.put("passed", passed);
    s.put("failed", total - passed);
    report.push(s);
    Ok((report, if passed == total { EXIT_OK } else { EXIT_ERROR }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Table {
    Support,
    Cones,
    Gebcq,
    All,
}

fn csv_table(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let _ = w.write_record(header);
    for r in rows {
        let _ = w.write_record(&r);
    }
    String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
}

fn planar_angles(cfg: &Config) -> Vec<f64> {
    (0..cfg.n_dir_2d).map(|k| 360.0 * k as f64 / cfg.n_dir_2d as f64).collect()
}

/// `angle_deg,support` over the canonical planar directions.
pub fn support_curve(body: &ConvexBody, cfg: &Config) -> Result<String, String> {
    if body.dim() != 2 {
        return Err(format!("support curves need a planar body, got dimension {}", body.dim()));
    }
    let rows = planar_angles(cfg)
        .into_iter()
        .map(|a| {
            let t = a.to_radians();
            vec![num(a), num(body.support(&[t.cos(), t.sin()]))]
        })
        .collect();
    Ok(csv_table(&["angle_deg", "support"], rows))
}

pub fn plot_body(path: &std::path::Path, cfg: &Config) -> Result<String, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let body = read_body(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    support_curve(&body, cfg)
}

pub fn cmd_plot_data(rc: &RunConfig, table: Table) -> Result<String, String> {
    let l = load(rc)?;
    if l.spec.n != 2 {
        return Err(format!("plot data is planar only, the problem has n = {}", l.spec.n));
    }
    let mut out = Vec::new();
    let want = |t: Table| table == t || table == Table::All;
    if want(Table::Support) || want(Table::Cones) {
        with_context(&l, |ctx| {
            if want(Table::Support) {
                let mut bodies = vec![("objective".to_string(), ctx.objective_body())];
                for (j, b) in ctx.active().iter().zip(ctx.constraint_bodies()) {
                    bodies.push((format!("subdiff.{}", j + 1), b));
                }
                let mut rows = Vec::new();
                for (name, b) in bodies {
                    for a in planar_angles(&l.cfg) {
                        let t = a.to_radians();
                        rows.push(vec![name.clone(), num(a), num(b.support(&[t.cos(), t.sin()]))]);
                    }
                }
                out.push(csv_table(&["body", "angle_deg", "support"], rows));
            }
            if want(Table::Cones) {
                let lin = linearized_cone(2, ctx.constraint_bodies(), &l.cfg);
                let t = ctx.contingent().map_err(|e| e.to_string())?;
                let normal = frechet_normal_cone(t);
                let mut rows = Vec::new();
                for (name, c) in [("linearized", &lin), ("contingent", t), ("normal", &normal)] {
                    for (d, lab) in c.samples() {
                        let a = d[1].atan2(d[0]).to_degrees().rem_euclid(360.0);
                        rows.push(vec![name.to_string(), num(a), num(d[0]), num(d[1]), lab.as_str().to_string()]);
                    }
                }
                out.push(csv_table(&["cone", "angle_deg", "x", "y", "label"], rows));
            }
            Ok(())
        })?;
    }
    if want(Table::Gebcq) {
        let set = FeasibleSet::of(&l.spec);
        let r = check_gebcq(&set, &l.x, l.cfg.delta, &l.cfg).map_err(|e| e.to_string())?;
        let rows = r
            .scales
            .iter()
            .enumerate()
            .map(|(i, s)| {
                vec![(i + 1).to_string(), num(s.lo), num(s.hi), s.samples.to_string(), s.infeasible.to_string(), s.refined.to_string(), num(s.max_ratio)]
            })
            .collect();
        out.push(csv_table(&["scale", "lo", "hi", "samples", "infeasible", "refined", "max_ratio"], rows));
    }
    Ok(out.join("\n"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_parse_strictly() {
        assert_eq!(parse_point("0 0", 2).unwrap(), vec![0.0, 0.0]);
        assert_eq!(parse_point(" 1, -2.5 ", 2).unwrap(), vec![1.0, -2.5]);
        assert!(parse_point("0 zero", 2).is_err());
        assert!(parse_point("0", 2).is_err());
        assert!(parse_point("nan 0", 2).is_err());
    }

    #[test]
    fn condition_lists() {
        assert_eq!(parse_conditions("all").unwrap().len(), 11);
        assert_eq!(parse_conditions("rp1-gacq, B-STAT").unwrap(), vec![Condition::Rp1Gacq, Condition::BStat]);
        assert!(parse_conditions("RP9").is_err());
    }

    #[test]
    fn translated_ball_support_curve_touches_zero_straight_up() {
        let b = ConvexBody::minkowski(&ConvexBody::ball(&[0.0, 0.0], 1.0), &ConvexBody::point(&[0.0, -1.0]), 1.0).unwrap();
        let csv = support_curve(&b, &Config::default()).unwrap();
        let rows: Vec<(f64, f64)> = csv
            .lines()
            .skip(1)
            .map(|l| {
                let (a, s) = l.split_once(',').unwrap();
                (a.parse().unwrap(), s.parse().unwrap())
            })
            .collect();
        let (angle, min) = rows.iter().cloned().fold((0.0, f64::INFINITY), |acc, r| if r.1 < acc.1 { r } else { acc });
        assert_eq!(angle, 90.0);
        assert_eq!(min, 0.0);
    }
}
