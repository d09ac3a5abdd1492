use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use super::ModelError;
use crate::expr::{Dims, EvalError, Expression, ParseError};

pub type ValueFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;
pub type DirFn = Arc<dyn Fn(&[f64], &[f64], &[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Value {
    Expr(Expression),
    Native(ValueFn),
}

#[derive(Clone)]
enum Deriv {
    Expr(Expression),
    Native(DirFn),
}

/// An `(x, v) -> R` map plus an optional analytic directional derivative in
/// `x`. Without one, derivatives come from forward differences.
#[derive(Clone)]
pub struct ScenarioFunction {
    label: String,
    n: usize,
    q: usize,
    value: Value,
    dirderiv: Option<Deriv>,
    fd_steps: Vec<f64>,
    fd_tol: f64,
    zero: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirDeriv {
    pub value: f64,
    /// Zero for analytic oracles; otherwise the spread of the last two
    /// difference quotients.
    pub error: f64,
    pub analytic: bool,
}

impl fmt::Debug for ScenarioFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScenarioFunction({})", self.label)
    }
}

impl ScenarioFunction {
    pub fn from_expr(e: Expression) -> Self {
        let d = e.dims();
        let zero = matches!(e.node(), crate::expr::Node::Const(c) if *c == 0.0);
        ScenarioFunction {
            label: e.to_string(),
            n: d.n,
            q: d.q,
            value: Value::Expr(e),
            dirderiv: None,
            fd_steps: alloc::vec![1e-4, 1e-5, 1e-6],
            fd_tol: 1e-3,
            zero,
        }
    }

    pub fn parse(src: &str, n: usize, q: usize) -> Result<Self, ParseError> {
        Ok(Self::from_expr(Expression::parse(src, Dims::new(n, q))?))
    }

    pub fn native(label: &str, n: usize, q: usize, f: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        ScenarioFunction {
            label: label.to_string(),
            n,
            q,
            value: Value::Native(Arc::new(f)),
            dirderiv: None,
            fd_steps: alloc::vec![1e-4, 1e-5, 1e-6],
            fd_tol: 1e-3,
            zero: false,
        }
    }

    pub fn zero(n: usize, q: usize) -> Self {
        let mut f = Self::from_expr(Expression::constant(0.0, Dims::new(n, q)));
        f.dirderiv = Some(Deriv::Native(Arc::new(|_, _, _| 0.0)));
        f
    }

    /// Attach an analytic derivative written over `x`, `v` and `d`.
    pub fn with_dirderiv_expr(mut self, e: Expression) -> Self {
        self.dirderiv = Some(Deriv::Expr(e));
        self
    }

    pub fn with_dirderiv_src(self, src: &str) -> Result<Self, ParseError> {
        let e = Expression::parse(src, Dims::with_direction(self.n, self.q))?;
        Ok(self.with_dirderiv_expr(e))
    }

    pub fn with_dirderiv(mut self, f: impl Fn(&[f64], &[f64], &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.dirderiv = Some(Deriv::Native(Arc::new(f)));
        self
    }

    pub fn with_fd(mut self, steps: &[f64], tol: f64) -> Self {
        self.fd_steps = steps.to_vec();
        self.fd_tol = tol;
        self
    }

    /// Drop the analytic derivative, forcing finite differences.
    pub fn without_dirderiv(mut self) -> Self {
        self.dirderiv = None;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn has_analytic(&self) -> bool {
        self.dirderiv.is_some()
    }

    /// True when the function is the literal constant zero.
    pub fn is_zero(&self) -> bool {
        self.zero
    }

    pub fn eval(&self, x: &[f64], v: &[f64]) -> Result<f64, EvalError> {
        match &self.value {
            Value::Expr(e) => e.eval(x, v),
            Value::Native(f) => {
                let y = f(x, v);
                if y.is_nan() {
                    Err(EvalError::Domain { node: self.label.clone() })
                } else {
                    Ok(y)
                }
            }
        }
    }

    /// `f'_x(x, v; d)`: the analytic oracle when present, else forward
    /// differences.
    pub fn dirderiv_x(&self, x: &[f64], v: &[f64], d: &[f64]) -> Result<DirDeriv, ModelError> {
        match &self.dirderiv {
            Some(Deriv::Expr(e)) => {
                let value = e.eval_dir(x, v, d)?;
                Ok(DirDeriv { value, error: 0.0, analytic: true })
            }
            Some(Deriv::Native(f)) => {
                let value = f(x, v, d);
                if !value.is_finite() {
                    return Err(EvalError::Domain { node: alloc::format!("{}'", self.label) }.into());
                }
                Ok(DirDeriv { value, error: 0.0, analytic: true })
            }
            None => self.fd_dirderiv(x, v, d),
        }
    }

    /// Forward-difference quotients over the configured steps; accepted when
    /// the last two agree within `fd_tol * (1 + |estimate|)`.
    pub fn fd_dirderiv(&self, x: &[f64], v: &[f64], d: &[f64]) -> Result<DirDeriv, ModelError> {
        if d.iter().all(|c| *c == 0.0) {
            return Ok(DirDeriv { value: 0.0, error: 0.0, analytic: false });
        }
        let f0 = self.eval(x, v)?;
        let mut y = alloc::vec![0.0; x.len()];
        let mut est = Vec::with_capacity(self.fd_steps.len());
        for &t in &self.fd_steps {
            for i in 0..x.len() {
                y[i] = x[i] + t * d[i];
            }
            est.push((self.eval(&y, v)? - f0) / t);
        }
        let k = est.len();
        let (mut value, mut error) = (est[k - 1], 0.0);
        if k >= 2 {
            // first-order Richardson step on the two finest quotients
            let q = self.fd_steps[k - 2] / self.fd_steps[k - 1];
            error = libm::fabs(est[k - 1] - est[k - 2]);
            value = (q * est[k - 1] - est[k - 2]) / (q - 1.0);
        }
        if !value.is_finite() || error >= self.fd_tol * (1.0 + libm::fabs(value)) {
            return Err(ModelError::NonConvergent { estimates: est });
        }
        Ok(DirDeriv { value, error, analytic: false })
    }
}

/// One-sided derivative of `|u|` where `u` has value `u` and derivative `du`.
pub(crate) fn dabs(u: f64, du: f64) -> f64 {
    if u > 0.0 {
        du
    } else if u < 0.0 {
        -du
    } else {
        libm::fabs(du)
    }
}

/// One-sided derivative of the Euclidean norm at `x` along `d`.
pub(crate) fn dnorm(x: &[f64], d: &[f64]) -> f64 {
    let nx = crate::linalg::norm(x);
    if nx > 0.0 {
        crate::linalg::dot(x, d) / nx
    } else {
        crate::linalg::norm(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abs_at_origin() {
        let f = ScenarioFunction::parse("abs(x1)", 2, 0).unwrap();
        let r = f.dirderiv_x(&[0.0, 0.0], &[], &[1.0, -3.0]).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        assert!(!r.analytic);
    }

    #[test]
    fn square_matches_analytic_derivative() {
        let f = ScenarioFunction::parse("x1^2", 1, 0).unwrap();
        let r = f.dirderiv_x(&[1.0], &[], &[1.0]).unwrap();
        assert!((r.value - 2.0).abs() < 1e-3);
    }

    #[test]
    fn analytic_expression_oracle() {
        let f = ScenarioFunction::parse("cos(v1*v2)*abs(x1)", 2, 2)
            .unwrap()
            .with_dirderiv_src("cos(v1*v2)*abs(d1)")
            .unwrap();
        let r = f.dirderiv_x(&[0.0, 0.0], &[0.0, 0.0], &[-0.5, 2.0]).unwrap();
        assert_eq!(r, DirDeriv { value: 0.5, error: 0.0, analytic: true });
    }

    #[test]
    fn divergent_quotients_are_rejected() {
        let f = ScenarioFunction::parse("sqrt(abs(x1))", 1, 0).unwrap();
        assert!(matches!(
            f.dirderiv_x(&[0.0], &[], &[1.0]),
            Err(ModelError::NonConvergent { .. })
        ));
    }

    #[test]
    fn native_nan_is_a_domain_error() {
        let f = ScenarioFunction::native("bad", 1, 0, |_, _| f64::NAN);
        assert!(f.eval(&[0.0], &[]).is_err());
    }
}
