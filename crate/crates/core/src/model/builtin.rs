//! Named example problems with their published reference answers.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use super::function::{dabs, dnorm};
use super::{Config, DtcObjective, ModelError, Objective, ProblemSpec, RobustConstraint, ScenarioFunction, ScenarioSet, SupDtcPair};
use crate::linalg::norm;

/// What a golden field should equal.
#[derive(Clone, Debug)]
pub enum Expect {
    Scalar { value: f64, tol: f64 },
    /// Body given by vertices, compared in Hausdorff distance.
    Vertices { points: Vec<Vec<f64>>, tol: f64 },
    /// Body containing the given vertices.
    Contains { points: Vec<Vec<f64>>, tol: f64 },
    /// Body with a closed-form support function.
    Support { support: fn(&[f64]) -> f64, tol: f64 },
    /// Closed-form directional derivative `d -> f'(xbar; d)`.
    Directional { value: fn(&[f64]) -> f64, tol: f64 },
    /// Closed-form cone membership on unit directions.
    Cone(fn(&[f64]) -> bool),
    Indices(Vec<usize>),
    AllActive,
    Verdict(&'static str),
    Range { lo: f64, hi: f64 },
}

#[derive(Clone, Debug)]
pub struct GoldenField {
    pub key: &'static str,
    pub expect: Expect,
}

/// Reference answers stated for a built-in example.
#[derive(Clone, Debug)]
pub struct GoldenRecord {
    pub name: &'static str,
    pub point: Vec<f64>,
    pub fields: Vec<GoldenField>,
    /// Closed-form witness sequence `k -> x_k`, when one is published.
    pub witness: Option<fn(usize) -> Vec<f64>>,
    pub non_lipschitz: bool,
    pub notes: Vec<&'static str>,
}

const NAMES: [&str; 7] = ["ex-2.2", "ex-3.1", "ex-4.1", "ex-4.2", "ex-5.1", "ex-5.2", "ex-5.3"];

pub fn builtin_names() -> &'static [&'static str] {
    &NAMES
}

pub fn builtin_example(name: &str) -> Result<(ProblemSpec, GoldenRecord), ModelError> {
    builtin_example_with(name, &Config::default())
}

pub fn builtin_example_with(name: &str, cfg: &Config) -> Result<(ProblemSpec, GoldenRecord), ModelError> {
    let dens = cfg.grid_density;
    let (objective, constraints, fields, witness, notes, non_lip) = match name {
        "ex-2.2" => ex22(),
        "ex-3.1" => ex31(dens)?,
        "ex-4.1" => ex41(dens)?,
        "ex-4.2" => ex42(dens)?,
        "ex-5.1" => ex51(dens)?,
        "ex-5.2" => ex52(dens)?,
        "ex-5.3" => ex53(dens)?,
        _ => return Err(ModelError::UnknownExample(name.to_string())),
    };
    let spec = ProblemSpec { name: name.to_string(), n: 2, objective, constraints, config: cfg.clone() };
    spec.validate()?;
    let record = GoldenRecord {
        name: NAMES.iter().find(|n| **n == name).copied().unwrap_or("?"),
        point: vec![0.0, 0.0],
        fields,
        witness,
        non_lipschitz: non_lip,
        notes,
    };
    Ok((spec, record))
}

type Parts = (Objective, Vec<RobustConstraint>, Vec<GoldenField>, Option<fn(usize) -> Vec<f64>>, Vec<&'static str>, bool);

fn f(key: &'static str, expect: Expect) -> GoldenField {
    GoldenField { key, expect }
}

fn pts(p: &[[f64; 2]]) -> Vec<Vec<f64>> {
    p.iter().map(|q| q.to_vec()).collect()
}

fn zero_objective() -> Objective {
    Objective::Dtc(DtcObjective {
        g: ScenarioFunction::zero(2, 0),
        h: ScenarioFunction::zero(2, 0),
        scenarios: ScenarioSet::singleton(0),
    })
}

fn parsed(src: &str, q: usize) -> ScenarioFunction {
    ScenarioFunction::parse(src, 2, q).expect("built-in formula parses")
}

/// `{v in unit disk : v1 v2 >= 0}`.
fn quarter_disks(label: &str, dens: usize) -> Result<ScenarioSet, ModelError> {
    ScenarioSet::disk_sectors(label, &[(0.0, FRAC_PI_2), (PI, 1.5 * PI)], dens)
}

fn unit_box(label: &str, lo: f64, hi: f64, dens: usize) -> Result<ScenarioSet, ModelError> {
    ScenarioSet::box_boundary(label, [lo, lo], [hi, hi], (dens / 4).max(2), 3)
}

fn ex42_constraint(dens: usize) -> Result<RobustConstraint, ModelError> {
    let g = parsed("norm2(v)*norm2(x) - x2", 2).with_dirderiv(|x, v, d| norm(v) * dnorm(x, d) - d[1]);
    Ok(RobustConstraint { g, scenarios: quarter_disks("V", dens)? })
}

fn ex22() -> Parts {
    let g = ScenarioFunction::native("x1^3/x2 + x1 (x2 != 0), x1 (x2 = 0)", 2, 0, |x, _| {
        if x[1] != 0.0 {
            x[0] * x[0] * x[0] / x[1] + x[0]
        } else {
            x[0]
        }
    })
    .with_dirderiv(|x, _, d| {
        if x[1] != 0.0 {
            (3.0 * x[0] * x[0] / x[1] + 1.0) * d[0] - x[0] * x[0] * x[0] / (x[1] * x[1]) * d[1]
        } else if x[0] == 0.0 || d[1] == 0.0 {
            d[0]
        } else {
            f64::INFINITY
        }
    });
    let obj = Objective::Dtc(DtcObjective { g, h: ScenarioFunction::zero(2, 0), scenarios: ScenarioSet::singleton(0) });
    let fields = vec![
        f("psi0", Expect::Scalar { value: 0.0, tol: 1e-12 }),
        f("dpsi0", Expect::Directional { value: |d| d[0], tol: 1e-9 }),
        f("tsubdiff0", Expect::Vertices { points: pts(&[[1.0, 0.0]]), tol: 1e-6 }),
    ];
    let notes = vec!["Frechet subdifferential at the origin is empty (recorded, not computed)"];
    (obj, Vec::new(), fields, Some(|k| vec![-1.0 / k as f64, 1.0 / libm::pow(k as f64, 4.0)]), notes, true)
}

fn ex31(dens: usize) -> Result<Parts, ModelError> {
    let g = parsed("cos(v1*v2)*abs(x1)", 2).with_dirderiv(|x, v, d| libm::cos(v[0] * v[1]) * dabs(x[0], d[0]));
    let h = parsed("exp(sin(abs(x2))) - 1", 2).with_dirderiv(|x, _, d| {
        let a = libm::fabs(x[1]);
        libm::exp(libm::sin(a)) * libm::cos(a) * dabs(x[1], d[1])
    });
    let scen = unit_box("V", 0.0, FRAC_PI_2, dens)?;
    let obj = Objective::Dtc(DtcObjective { g, h, scenarios: scen });
    let fields = vec![
        f("psi0", Expect::Scalar { value: 0.0, tol: 1e-12 }),
        f("active0", Expect::AllActive),
        f("dpsi0", Expect::Directional { value: |d| libm::fabs(d[0]) - libm::fabs(d[1]), tol: 1e-6 }),
    ];
    Ok((obj, Vec::new(), fields, None, Vec::new(), false))
}

fn ex41(dens: usize) -> Result<Parts, ModelError> {
    let g1 = parsed("-x1 + 2*v1*v2*abs(x2)", 2).with_dirderiv(|x, v, d| -d[0] + 2.0 * v[0] * v[1] * dabs(x[1], d[1]));
    let v1 = ScenarioSet::disk_sectors("V1", &[(FRAC_PI_2, 2.0 * PI)], dens)?;
    let g2 = parsed("-(v1+1)^2*x1^2 - (v2+1)*(x2-1)^2 + 1", 2).with_dirderiv(|x, v, d| {
        -2.0 * (v[0] + 1.0) * (v[0] + 1.0) * x[0] * d[0] - 2.0 * (v[1] + 1.0) * (x[1] - 1.0) * d[1]
    });
    let g3 = parsed("-(v1-1)^2*x1^2 + (v2-1)*(x2+1)^2 + 1", 2).with_dirderiv(|x, v, d| {
        -2.0 * (v[0] - 1.0) * (v[0] - 1.0) * x[0] * d[0] + 2.0 * (v[1] - 1.0) * (x[1] + 1.0) * d[1]
    });
    let constraints = vec![
        RobustConstraint { g: g1, scenarios: v1 },
        RobustConstraint { g: g2, scenarios: unit_box("V2", 0.0, 1.0, dens)? },
        RobustConstraint { g: g3, scenarios: unit_box("V3", -1.0, 0.0, dens)? },
    ];
    let ray = |d: &[f64]| libm::fabs(d[1]) < 1e-9 && d[0] > 0.0;
    let fields = vec![
        f("J", Expect::Indices(vec![0, 1, 2])),
        f("subdiff.1", Expect::Vertices { points: pts(&[[-1.0, -1.0], [-1.0, 1.0]]), tol: 1e-6 }),
        f("subdiff.2", Expect::Vertices { points: pts(&[[0.0, 2.0]]), tol: 1e-6 }),
        f("subdiff.3", Expect::Vertices { points: pts(&[[0.0, -2.0]]), tol: 1e-6 }),
        f("linearized", Expect::Cone(ray)),
        f("contingent", Expect::Cone(ray)),
        f("GACQ", Expect::Verdict("HOLDS")),
        f("GEBCQ", Expect::Verdict("HOLDS")),
        f("sigma", Expect::Range { lo: 0.9, hi: 1.1 }),
    ];
    let notes = vec!["third constraint uses -(v31-1)^2 x1^2 so that psi3 = -x1^2 - (x2+1)^2 + 1 as published"];
    Ok((zero_objective(), constraints, fields, None, notes, false))
}

fn ex42(dens: usize) -> Result<Parts, ModelError> {
    let ray = |d: &[f64]| libm::fabs(d[0]) < 1e-9 && d[1] > 0.0;
    let fields = vec![
        f("J", Expect::Indices(vec![0])),
        f("dpsi.1", Expect::Directional { value: |d| norm(d) - d[1], tol: 1e-9 }),
        f("linearized", Expect::Cone(ray)),
        f("contingent", Expect::Cone(ray)),
        f("GACQ", Expect::Verdict("HOLDS")),
        f("GEBCQ", Expect::Verdict("FAILS")),
        f("witness_ratio_k64", Expect::Range { lo: 100.0, hi: f64::INFINITY }),
    ];
    let witness: fn(usize) -> Vec<f64> = |k| {
        let k = k as f64;
        vec![1.0 / (k * k), 1.0 / k]
    };
    Ok((zero_objective(), vec![ex42_constraint(dens)?], fields, Some(witness), Vec::new(), false))
}

fn ex51(dens: usize) -> Result<Parts, ModelError> {
    let g0 = parsed("abs(x1)", 2).with_dirderiv(|x, _, d| dabs(x[0], d[0]));
    let h0 = parsed("norm2(v)*x1*cos(abs(x2))", 2).with_dirderiv(|x, v, d| {
        let a = libm::fabs(x[1]);
        norm(v) * (d[0] * libm::cos(a) - x[0] * libm::sin(a) * dabs(x[1], d[1]))
    });
    let obj = Objective::Dtc(DtcObjective { g: g0, h: h0, scenarios: quarter_disks("V0", dens)? });
    let g1 = parsed("2*abs(v1*v2*x1)^3 - x2", 2).with_dirderiv(|x, v, d| {
        let c = libm::fabs(v[0] * v[1]);
        6.0 * c * c * c * libm::fabs(x[0]) * x[0] * d[0] - d[1]
    });
    let g2 = parsed("-(v1+1)*x1^2 + v2*abs(x2)", 2)
        .with_dirderiv(|x, v, d| -2.0 * (v[0] + 1.0) * x[0] * d[0] + v[1] * dabs(x[1], d[1]));
    let constraints = vec![
        RobustConstraint { g: g1, scenarios: quarter_disks("V1", dens)? },
        RobustConstraint { g: g2, scenarios: unit_box("V2", 0.0, 1.0, dens)? },
    ];
    let line = |d: &[f64]| libm::fabs(d[1]) < 1e-9;
    let fields = vec![
        f("psi0", Expect::Scalar { value: 0.0, tol: 1e-12 }),
        f("dpsi0", Expect::Directional { value: |d| (-2.0 * d[0]).max(d[0]), tol: 1e-9 }),
        f("outer0", Expect::Vertices { points: pts(&[[-2.0, 0.0], [1.0, 0.0]]), tol: 1e-3 }),
        f("subdiff.1", Expect::Vertices { points: pts(&[[0.0, -1.0]]), tol: 1e-6 }),
        f("subdiff.2", Expect::Vertices { points: pts(&[[0.0, -1.0], [0.0, 1.0]]), tol: 1e-6 }),
        f("linearized", Expect::Cone(line)),
        f("contingent", Expect::Cone(line)),
        f("GACQ", Expect::Verdict("HOLDS")),
        f("RP1-GEBCQ", Expect::Verdict("HOLDS")),
        f("RP1-GACQ", Expect::Verdict("HOLDS")),
    ];
    Ok((obj, constraints, fields, None, Vec::new(), false))
}

fn ex52(dens: usize) -> Result<Parts, ModelError> {
    let g0 = parsed("cos(v1*v2)*x2^2", 2).with_dirderiv(|x, v, d| 2.0 * libm::cos(v[0] * v[1]) * x[1] * d[1]);
    let h0 = parsed("exp(sin(abs(x1)))", 2).with_dirderiv(|x, _, d| {
        let a = libm::fabs(x[0]);
        libm::exp(libm::sin(a)) * libm::cos(a) * dabs(x[0], d[0])
    });
    let obj = Objective::Dtc(DtcObjective { g: g0, h: h0, scenarios: unit_box("V0", 0.0, FRAC_PI_2, dens)? });
    let fields = vec![
        f("outer0", Expect::Contains { points: pts(&[[-1.0, 0.0], [1.0, 0.0]]), tol: 1e-6 }),
        f("subdiff.1", Expect::Support { support: |d| norm(d) - d[1], tol: 1e-9 }),
        f("GACQ", Expect::Verdict("HOLDS")),
        f("RP1-GACQ", Expect::Verdict("BOUNDARY")),
        f("RP1-GEBCQ@1e6", Expect::Verdict("FAILS")),
    ];
    let notes = vec!["scenario set V0 is not specified in the source; [0, pi/2]^2 is used"];
    Ok((obj, vec![ex42_constraint(dens)?], fields, None, notes, false))
}

fn ex53(dens: usize) -> Result<Parts, ModelError> {
    let g = parsed("2*abs(v1*v2)*x2^2", 2).with_dirderiv(|x, v, d| 4.0 * libm::fabs(v[0] * v[1]) * x[1] * d[1]);
    let h = parsed("cos(v1*v2)*abs(x1)", 2).with_dirderiv(|x, v, d| libm::cos(v[0] * v[1]) * dabs(x[0], d[0]));
    let obj = Objective::SupPair(SupDtcPair {
        g,
        g_scenarios: quarter_disks("V1", dens)?,
        h,
        h_scenarios: unit_box("V2", 0.0, FRAC_PI_2, dens)?,
    });
    let fields = vec![
        f("G-hull", Expect::Vertices { points: pts(&[[0.0, 0.0]]), tol: 1e-9 }),
        f("H-hull", Expect::Vertices { points: pts(&[[-1.0, 0.0], [1.0, 0.0]]), tol: 1e-9 }),
        f("subdiff.1", Expect::Support { support: |d| norm(d) - d[1], tol: 1e-9 }),
        f("F-INF-STAT", Expect::Verdict("BOUNDARY")),
        f("RPS-GACQ", Expect::Verdict("BOUNDARY")),
        f("RPS-GEBCQ", Expect::Verdict("FAILS")),
    ];
    Ok((obj, vec![ex42_constraint(dens)?], fields, None, Vec::new(), false))
}
