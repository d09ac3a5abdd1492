//! Robust max-functions over finite scenario sets: values, active sets,
//! Danskin directional derivatives and the sup-of-DTC decomposition.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::model::{Config, DtcObjective, ModelError, RobustConstraint, ScenarioFunction, ScenarioSet};

/// `x -> max_i g(x, v_i) - h(x, v_i)`; `h` absent means zero.
#[derive(Clone, Copy)]
pub struct MaxFn<'a> {
    pub g: &'a ScenarioFunction,
    pub h: Option<&'a ScenarioFunction>,
    pub scenarios: &'a ScenarioSet,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ActiveSet {
    pub x: Vec<f64>,
    pub psi_value: f64,
    /// Scenario indices, ascending.
    pub active: Vec<usize>,
    pub tol: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Danskin {
    pub value: f64,
    /// Every active scenario attaining the maximum derivative.
    pub argmax: Vec<usize>,
    /// Largest finite-difference error among the maximizers.
    pub error: f64,
}

impl<'a> MaxFn<'a> {
    pub fn objective(o: &'a DtcObjective) -> Self {
        let h = if o.h.is_zero() { None } else { Some(&o.h) };
        MaxFn { g: &o.g, h, scenarios: &o.scenarios }
    }

    pub fn constraint(c: &'a RobustConstraint) -> Self {
        MaxFn { g: &c.g, h: None, scenarios: &c.scenarios }
    }

    pub fn sup(f: &'a ScenarioFunction, scenarios: &'a ScenarioSet) -> Self {
        MaxFn { g: f, h: None, scenarios }
    }

    pub fn has_h(&self) -> bool {
        self.h.is_some()
    }

    /// `g(x, v_i) - h(x, v_i)`.
    pub fn term(&self, x: &[f64], i: usize) -> Result<f64, ModelError> {
        let v = self.scenarios.get(i);
        let mut y = self.g.eval(x, v)?;
        if let Some(h) = self.h {
            y -= h.eval(x, v)?;
        }
        Ok(y)
    }

    pub fn value(&self, x: &[f64]) -> Result<f64, ModelError> {
        let mut best = f64::NEG_INFINITY;
        for i in 0..self.scenarios.len() {
            best = best.max(self.term(x, i)?);
        }
        Ok(best)
    }

    pub fn active_set(&self, x: &[f64], cfg: &Config) -> Result<ActiveSet, ModelError> {
        let terms = (0..self.scenarios.len()).map(|i| self.term(x, i)).collect::<Result<Vec<_>, _>>()?;
        let psi = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let tol = cfg.act_tol(psi);
        let active = (0..terms.len()).filter(|&i| terms[i] >= psi - tol).collect();
        Ok(ActiveSet { x: x.to_vec(), psi_value: psi, active, tol })
    }

    /// `g'_x(x, v_i; d) - h'_x(x, v_i; d)` with its error estimate.
    pub fn term_dirderiv(&self, x: &[f64], i: usize, d: &[f64]) -> Result<(f64, f64), ModelError> {
        let v = self.scenarios.get(i);
        let a = self.g.dirderiv_x(x, v, d)?;
        let (mut val, mut err) = (a.value, a.error);
        if let Some(h) = self.h {
            let b = h.dirderiv_x(x, v, d)?;
            val -= b.value;
            err += b.error;
        }
        Ok((val, err))
    }

    /// Danskin's formula: the maximum of term derivatives over the active
    /// scenarios.
    pub fn danskin(&self, active: &ActiveSet, d: &[f64]) -> Result<Danskin, ModelError> {
        let mut vals = Vec::with_capacity(active.active.len());
        for &i in &active.active {
            vals.push(self.term_dirderiv(&active.x, i, d)?);
        }
        let best = vals.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        let tie = 1e-12 * (1.0 + libm::fabs(best));
        let mut argmax = Vec::new();
        let mut error: f64 = 0.0;
        for (k, &(val, err)) in vals.iter().enumerate() {
            if val >= best - tie.max(err) {
                argmax.push(active.active[k]);
                error = error.max(err);
            }
        }
        Ok(Danskin { value: best, argmax, error })
    }
}

pub fn robust_value(obj: &DtcObjective, x: &[f64]) -> Result<f64, ModelError> {
    MaxFn::objective(obj).value(x)
}

pub fn active_set(obj: &DtcObjective, x: &[f64], cfg: &Config) -> Result<ActiveSet, ModelError> {
    MaxFn::objective(obj).active_set(x, cfg)
}

pub fn danskin_dirderiv(obj: &DtcObjective, x: &[f64], d: &[f64], cfg: &Config) -> Result<Danskin, ModelError> {
    let m = MaxFn::objective(obj);
    let act = m.active_set(x, cfg)?;
    m.danskin(&act, d)
}

pub type RealFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// `G = max_nu (g_nu + sum_{w != nu} h_w)` and `H = sum_w h_w` for a finite
/// family with nonnegative `h`, so that `G - H = max_nu (g_nu - h_nu)`.
#[derive(Clone)]
pub struct SupDtc {
    family: Vec<(RealFn, RealFn)>,
}

pub fn sup_dtc_decompose(family: Vec<(RealFn, RealFn)>) -> SupDtc {
    SupDtc { family }
}

impl SupDtc {
    pub fn len(&self) -> usize {
        self.family.len()
    }

    pub fn is_empty(&self) -> bool {
        self.family.is_empty()
    }

    fn hs(&self, x: &[f64]) -> Result<Vec<f64>, ModelError> {
        let mut out = Vec::with_capacity(self.family.len());
        for (k, (_, h)) in self.family.iter().enumerate() {
            let y = h(x);
            if y.is_nan() || y < 0.0 {
                return Err(ModelError::NegativityViolation { index: k, x: x.to_vec() });
            }
            out.push(y);
        }
        Ok(out)
    }

    pub fn h_value(&self, x: &[f64]) -> Result<f64, ModelError> {
        Ok(self.hs(x)?.iter().sum())
    }

    pub fn g_value(&self, x: &[f64]) -> Result<f64, ModelError> {
        let hs = self.hs(x)?;
        let mut best = f64::NEG_INFINITY;
        for (nu, (g, _)) in self.family.iter().enumerate() {
            let rest: f64 = hs.iter().enumerate().filter(|(w, _)| *w != nu).map(|(_, h)| h).sum();
            best = best.max(g(x) + rest);
        }
        Ok(best)
    }

    /// `max_nu g_nu(x) - h_nu(x)` evaluated directly.
    pub fn max_difference(&self, x: &[f64]) -> f64 {
        self.family.iter().map(|(g, h)| g(x) - h(x)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// `|G(x) - H(x) - max_nu (g_nu - h_nu)(x)|`.
    pub fn identity_residual(&self, x: &[f64]) -> Result<f64, ModelError> {
        let lhs = self.g_value(x)? - self.h_value(x)?;
        Ok(libm::fabs(lhs - self.max_difference(x)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::builtin_example;
    use crate::model::Objective;

    fn ex31() -> DtcObjective {
        match builtin_example("ex-3.1").unwrap().0.objective {
            Objective::Dtc(o) => o,
            _ => unreachable!(),
        }
    }

    #[test]
    fn example_three_one_values_and_active_sets() {
        let o = ex31();
        let cfg = Config::default();
        assert_eq!(robust_value(&o, &[0.0, 0.0]).unwrap(), 0.0);
        assert!((robust_value(&o, &[1.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(active_set(&o, &[0.0, 0.0], &cfg).unwrap().active.len(), o.scenarios.len());
        let act = active_set(&o, &[1.0, 0.0], &cfg).unwrap();
        assert!(!act.active.is_empty());
        for i in 0..o.scenarios.len() {
            let v = o.scenarios.get(i);
            assert_eq!(act.active.contains(&i), v[0] * v[1] == 0.0, "scenario {v:?}");
        }
    }

    #[test]
    fn danskin_zero_direction() {
        let o = ex31();
        let r = danskin_dirderiv(&o, &[0.0, 0.0], &[0.0, 0.0], &Config::default()).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn single_scenario_is_verbatim() {
        let g = ScenarioFunction::parse("x1^2 + v1", 1, 1).unwrap();
        let h = ScenarioFunction::parse("abs(x1)", 1, 1).unwrap();
        let s = ScenarioSet::new("V", 1, alloc::vec![alloc::vec![0.5]]).unwrap();
        let o = DtcObjective { g, h, scenarios: s };
        assert_eq!(robust_value(&o, &[2.0]).unwrap(), 4.0 + 0.5 - 2.0);
    }

    #[test]
    fn decomposition_of_two_squares() {
        let sq: RealFn = Arc::new(|x: &[f64]| x[0] * x[0]);
        let zero: RealFn = Arc::new(|_: &[f64]| 0.0);
        let fam = sup_dtc_decompose(alloc::vec![(sq.clone(), zero.clone()), (zero, sq)]);
        let x = [2.0];
        assert_eq!(fam.g_value(&x).unwrap() - fam.h_value(&x).unwrap(), 4.0);
        assert_eq!(fam.max_difference(&x), 4.0);
    }

    #[test]
    fn negativity_is_reported() {
        let neg: RealFn = Arc::new(|x: &[f64]| -x[0]);
        let fam = sup_dtc_decompose(alloc::vec![(neg.clone(), neg)]);
        assert!(matches!(fam.h_value(&[1.0]), Err(ModelError::NegativityViolation { index: 0, .. })));
    }
}
