//! Robust DTC programs: scenario functions, finite scenario sets, objectives,
//! constraints, tolerances and the built-in example registry.

mod builtin;
mod function;
mod scenario;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::expr::EvalError;

pub use builtin::{builtin_example, builtin_example_with, builtin_names, Expect, GoldenField, GoldenRecord};
pub use function::{DirDeriv, DirFn, ScenarioFunction, ValueFn};
pub use scenario::ScenarioSet;

#[derive(Clone, Debug, PartialEq)]
pub enum ModelError {
    Eval(EvalError),
    /// Finite-difference estimates disagree beyond the configured tolerance.
    NonConvergent { estimates: Vec<f64> },
    DimensionMismatch(String),
    EmptyScenarioSet(String),
    UnknownExample(String),
    /// A family member's `h` was negative at a queried point.
    NegativityViolation { index: usize, x: Vec<f64> },
}

impl From<EvalError> for ModelError {
    fn from(e: EvalError) -> Self {
        ModelError::Eval(e)
    }
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::Eval(e) => write!(f, "{e}"),
            ModelError::NonConvergent { estimates } => {
                write!(f, "finite differences did not converge: {estimates:?}")
            }
            ModelError::DimensionMismatch(s) => write!(f, "dimension mismatch: {s}"),
            ModelError::EmptyScenarioSet(s) => write!(f, "scenario set `{s}` is empty"),
            ModelError::UnknownExample(s) => write!(f, "unknown example `{s}`"),
            ModelError::NegativityViolation { index, x } => {
                write!(f, "h of family member {index} is negative at {x:?}")
            }
        }
    }
}

impl core::error::Error for ModelError {}

/// Numerical knobs shared by every module.
#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub fd_steps: Vec<f64>,
    /// Relative agreement required between the last two difference quotients.
    pub fd_tol: f64,
    /// Active-set tolerance is `act_rel * (1 + |psi|)`.
    pub act_rel: f64,
    pub geom_tol: f64,
    /// A point is feasible when every constraint value is at most this.
    pub feas_tol: f64,
    pub n_dir_2d: usize,
    pub n_dir_3d: usize,
    pub t0: f64,
    pub rho: f64,
    pub levels: usize,
    pub eta: f64,
    pub search_budget: usize,
    pub delta: f64,
    pub samples: usize,
    pub scales: usize,
    pub growth_cap: f64,
    pub sigma_cap: f64,
    pub k_cap: f64,
    pub lambda_cap: f64,
    pub dist_rel_acc: f64,
    pub seed: u64,
    pub grid_density: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            fd_steps: alloc::vec![1e-4, 1e-5, 1e-6],
            fd_tol: 1e-3,
            act_rel: 1e-8,
            geom_tol: 1e-6,
            feas_tol: 1e-12,
            n_dir_2d: 360,
            n_dir_3d: 1000,
            t0: 0.1,
            rho: 0.5,
            levels: 12,
            eta: 0.1,
            search_budget: 400,
            delta: 0.1,
            samples: 4096,
            scales: 8,
            growth_cap: 4.0,
            sigma_cap: 1e3,
            k_cap: 1e3,
            lambda_cap: 1e3,
            dist_rel_acc: 1e-4,
            seed: 0,
            grid_density: 64,
        }
    }
}

impl Config {
    pub fn act_tol(&self, psi: f64) -> f64 {
        self.act_rel * (1.0 + libm::fabs(psi))
    }
}

/// `psi(x) = max_v g(x,v) - h(x,v)` over a finite scenario set.
#[derive(Clone)]
pub struct DtcObjective {
    pub g: ScenarioFunction,
    pub h: ScenarioFunction,
    pub scenarios: ScenarioSet,
}

/// `psi_j(x) = max_v g_j(x,v) <= 0`.
#[derive(Clone)]
pub struct RobustConstraint {
    pub g: ScenarioFunction,
    pub scenarios: ScenarioSet,
}

/// `G(x) - H(x)` with `G = sup g`, `H = sup h` over separate scenario sets.
#[derive(Clone)]
pub struct SupDtcPair {
    pub g: ScenarioFunction,
    pub g_scenarios: ScenarioSet,
    pub h: ScenarioFunction,
    pub h_scenarios: ScenarioSet,
}

#[derive(Clone)]
pub enum Objective {
    Dtc(DtcObjective),
    SupPair(SupDtcPair),
}

#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub n: usize,
    pub objective: Objective,
    pub constraints: Vec<RobustConstraint>,
    pub config: Config,
}

impl ProblemSpec {
    /// Check that every component agrees with `n` and every scenario set
    /// matches the scenario dimension its functions were declared with.
    pub fn validate(&self) -> Result<(), ModelError> {
        let check = |f: &ScenarioFunction, s: &ScenarioSet, what: &str| {
            if f.n() != self.n {
                return Err(ModelError::DimensionMismatch(alloc::format!(
                    "{what} is declared over {} decision variables, problem has n={}",
                    f.n(),
                    self.n
                )));
            }
            if f.q() > s.dim() {
                return Err(ModelError::DimensionMismatch(alloc::format!(
                    "{what} uses {} scenario variables but set `{}` has dimension {}",
                    f.q(),
                    s.label(),
                    s.dim()
                )));
            }
            Ok(())
        };
        match &self.objective {
            Objective::Dtc(o) => {
                check(&o.g, &o.scenarios, "objective g")?;
                check(&o.h, &o.scenarios, "objective h")?;
            }
            Objective::SupPair(p) => {
                check(&p.g, &p.g_scenarios, "objective G")?;
                check(&p.h, &p.h_scenarios, "objective H")?;
            }
        }
        for (j, c) in self.constraints.iter().enumerate() {
            check(&c.g, &c.scenarios, &alloc::format!("constraint {}", j + 1))?;
        }
        Ok(())
    }
}
