//! Vector fields as expression graphs over elementary operations.
//!
//! One representation serves both point evaluation and exact Taylor jets of
//! arbitrary order: jets are computed by propagating truncated polynomials
//! through the graph, with each elementary function contributing its
//! univariate series about the incoming constant term. Values are immutable
//! after construction and safe to evaluate from concurrent workers.

mod parse;

use std::ops;

use crate::error::{Error, Result};
use crate::taylor::{compose_univariate, LocalModel, TruncatedPoly};

/// Tolerance below which a denominator or `cos` at a tan node counts as
/// singular.
pub const SINGULAR_EPS: f64 = 1e-12;

/// One node of an expression tree over the state variables `x0..x{n-1}`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    /// Non-negative integer power.
    Pow(Box<Expr>, u32),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Tan(Box<Expr>),
    Tanh(Box<Expr>),
}

pub fn var(index: usize) -> Expr {
    Expr::Var(index)
}

pub fn constant(value: f64) -> Expr {
    Expr::Const(value)
}

pub fn sin(e: Expr) -> Expr {
    Expr::Sin(Box::new(e))
}

pub fn cos(e: Expr) -> Expr {
    Expr::Cos(Box::new(e))
}

pub fn tan(e: Expr) -> Expr {
    Expr::Tan(Box::new(e))
}

pub fn tanh(e: Expr) -> Expr {
    Expr::Tanh(Box::new(e))
}

impl Expr {
    pub fn pow(self, exponent: u32) -> Expr {
        Expr::Pow(Box::new(self), exponent)
    }

    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Const(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Neg(e) | Expr::Pow(e, _) | Expr::Sin(e) | Expr::Cos(e) | Expr::Tan(e)
            | Expr::Tanh(e) => e.max_var(),
            Expr::Add(l, r) | Expr::Sub(l, r) | Expr::Mul(l, r) | Expr::Div(l, r) => {
                match (l.max_var(), r.max_var()) {
                    (Some(a), Some(b)) => Some(a.max(b)),
                    (a, b) => a.or(b),
                }
            }
        }
    }

    /// Point evaluation. `x` supplies the variable values.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        Ok(match self {
            Expr::Const(c) => *c,
            Expr::Var(i) => {
                if *i >= x.len() {
                    return Err(Error::DimensionMismatch {
                        expected: x.len(),
                        got: *i + 1,
                    });
                }
                x[*i]
            }
            Expr::Neg(e) => -e.eval(x)?,
            Expr::Add(l, r) => l.eval(x)? + r.eval(x)?,
            Expr::Sub(l, r) => l.eval(x)? - r.eval(x)?,
            Expr::Mul(l, r) => l.eval(x)? * r.eval(x)?,
            Expr::Div(l, r) => {
                let denom = r.eval(x)?;
                if denom.abs() < SINGULAR_EPS {
                    return Err(Error::Singular { op: "division" });
                }
                l.eval(x)? / denom
            }
            Expr::Pow(e, k) => e.eval(x)?.powi(*k as i32),
            Expr::Sin(e) => e.eval(x)?.sin(),
            Expr::Cos(e) => e.eval(x)?.cos(),
            Expr::Tan(e) => {
                let a = e.eval(x)?;
                if a.cos().abs() < SINGULAR_EPS {
                    return Err(Error::Singular { op: "tan" });
                }
                a.tan()
            }
            Expr::Tanh(e) => e.eval(x)?.tanh(),
        })
    }
}

/// Exact truncated Taylor series of the expression about `center`, up to
/// total degree `degree`, as a polynomial in the displacement `d = x - center`.
pub fn eval_jet(expr: &Expr, center: &[f64], degree: usize) -> Result<TruncatedPoly> {
    let dim = center.len();
    Ok(match expr {
        Expr::Const(c) => TruncatedPoly::constant(dim, degree, *c),
        Expr::Var(i) => {
            if *i >= dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: *i + 1,
                });
            }
            TruncatedPoly::variable(dim, degree, *i, center[*i])
        }
        Expr::Neg(e) => eval_jet(e, center, degree)?.neg(),
        Expr::Add(l, r) => eval_jet(l, center, degree)?.add(&eval_jet(r, center, degree)?)?,
        Expr::Sub(l, r) => eval_jet(l, center, degree)?.sub(&eval_jet(r, center, degree)?)?,
        Expr::Mul(l, r) => eval_jet(l, center, degree)?.mul(&eval_jet(r, center, degree)?)?,
        Expr::Div(l, r) => {
            let denom = eval_jet(r, center, degree)?;
            let b0 = denom.constant_term();
            if b0.abs() < SINGULAR_EPS {
                return Err(Error::Singular { op: "division" });
            }
            let recip = compose_univariate(&recip_series(b0, degree), &denom.without_constant())?;
            eval_jet(l, center, degree)?.mul(&recip)?
        }
        Expr::Pow(e, k) => {
            let base = eval_jet(e, center, degree)?;
            let mut acc = TruncatedPoly::constant(dim, degree, 1.0);
            for _ in 0..*k {
                acc = acc.mul(&base)?;
            }
            acc
        }
        Expr::Sin(e) => compose_elementary(e, center, degree, |a0, d| Ok(sin_series(a0, d)))?,
        Expr::Cos(e) => compose_elementary(e, center, degree, |a0, d| Ok(cos_series(a0, d)))?,
        Expr::Tan(e) => compose_elementary(e, center, degree, tan_series)?,
        Expr::Tanh(e) => compose_elementary(e, center, degree, |a0, d| Ok(tanh_series(a0, d)))?,
    })
}

fn compose_elementary(
    arg: &Expr,
    center: &[f64],
    degree: usize,
    series: impl Fn(f64, usize) -> Result<Vec<f64>>,
) -> Result<TruncatedPoly> {
    let inner = eval_jet(arg, center, degree)?;
    let a0 = inner.constant_term();
    compose_univariate(&series(a0, degree)?, &inner.without_constant())
}

/// Taylor coefficients of `sin` about `a0`, from the sin/cos derivative pair
/// (the j-th derivative cycles with period four).
fn sin_series(a0: f64, degree: usize) -> Vec<f64> {
    let mut derivs = vec![0.0; degree + 2];
    derivs[0] = a0.sin();
    if degree >= 1 {
        derivs[1] = a0.cos();
    }
    for j in 0..degree.saturating_sub(1) {
        derivs[j + 2] = -derivs[j];
    }
    to_taylor(&derivs[..degree + 1])
}

fn cos_series(a0: f64, degree: usize) -> Vec<f64> {
    let mut derivs = vec![0.0; degree + 2];
    derivs[0] = a0.cos();
    if degree >= 1 {
        derivs[1] = -a0.sin();
    }
    for j in 0..degree.saturating_sub(1) {
        derivs[j + 2] = -derivs[j];
    }
    to_taylor(&derivs[..degree + 1])
}

fn to_taylor(derivs: &[f64]) -> Vec<f64> {
    let mut factorial = 1.0;
    derivs
        .iter()
        .enumerate()
        .map(|(j, d)| {
            if j > 0 {
                factorial *= j as f64;
            }
            d / factorial
        })
        .collect()
}

/// Taylor coefficients of `tan` about `a0`, via T' = 1 + T^2.
fn tan_series(a0: f64, degree: usize) -> Result<Vec<f64>> {
    if a0.cos().abs() < SINGULAR_EPS {
        return Err(Error::Singular { op: "tan" });
    }
    let mut g = vec![0.0; degree + 1];
    g[0] = a0.tan();
    for j in 0..degree {
        let mut conv = 0.0;
        for i in 0..=j {
            conv += g[i] * g[j - i];
        }
        let source = if j == 0 { 1.0 } else { 0.0 };
        g[j + 1] = (source + conv) / (j + 1) as f64;
    }
    Ok(g)
}

/// Taylor coefficients of `tanh` about `a0`, via H' = 1 - H^2.
fn tanh_series(a0: f64, degree: usize) -> Vec<f64> {
    let mut g = vec![0.0; degree + 1];
    g[0] = a0.tanh();
    for j in 0..degree {
        let mut conv = 0.0;
        for i in 0..=j {
            conv += g[i] * g[j - i];
        }
        let source = if j == 0 { 1.0 } else { 0.0 };
        g[j + 1] = (source - conv) / (j + 1) as f64;
    }
    g
}

/// Taylor coefficients of `1 / (b0 + u)` about `u = 0`.
fn recip_series(b0: f64, degree: usize) -> Vec<f64> {
    let mut g = vec![0.0; degree + 1];
    let mut term = 1.0 / b0;
    for coeff in g.iter_mut() {
        *coeff = term;
        term *= -1.0 / b0;
    }
    g
}

/// A known dynamical system `xdot = f(x)`: one expression per state
/// component.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    dim: usize,
    components: Vec<Expr>,
}

impl VectorField {
    /// The dimension is the number of components; every referenced variable
    /// index must stay below it.
    pub fn new(components: Vec<Expr>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Config("a vector field needs at least one component".into()));
        }
        let dim = components.len();
        for (row, c) in components.iter().enumerate() {
            if let Some(max) = c.max_var() {
                if max >= dim {
                    return Err(Error::Config(format!(
                        "component {} references x{} but the field has {} components",
                        row, max, dim
                    )));
                }
            }
        }
        Ok(VectorField { dim, components })
    }

    /// Parse the plain-text field description format: one infix expression
    /// per line over `x0..x{n-1}`, `sin`, `cos`, `tan`, `tanh`, `^` and
    /// numeric literals.
    pub fn parse(text: &str) -> Result<Self> {
        parse::parse_field(text)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    /// `f(x)`, component-wise.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        self.components.iter().map(|c| c.eval(x)).collect()
    }

    /// The degree-`degree` Taylor model of the field about `center`.
    pub fn local_model(&self, center: &[f64], degree: usize) -> Result<LocalModel> {
        if center.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: center.len(),
            });
        }
        let components = self
            .components
            .iter()
            .map(|c| eval_jet(c, center, degree))
            .collect::<Result<Vec<_>>>()?;
        LocalModel::new(center.to_vec(), components)
    }
}

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

impl ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Add(Box::new(self), Box::new(rhs))
    }
}

impl ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Sub(Box::new(self), Box::new(rhs))
    }
}

impl ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Mul(Box::new(self), Box::new(rhs))
    }
}

impl ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::Div(Box::new(self), Box::new(rhs))
    }
}

impl ops::Mul<Expr> for f64 {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Mul(Box::new(Expr::Const(self)), Box::new(rhs))
    }
}

impl ops::Add<Expr> for f64 {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Add(Box::new(Expr::Const(self)), Box::new(rhs))
    }
}

impl ops::Sub<Expr> for f64 {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Sub(Box::new(Expr::Const(self)), Box::new(rhs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taylor::MultiIndex;
    use approx::assert_abs_diff_eq;

    fn coeff(p: &TruncatedPoly, exps: &[u8]) -> f64 {
        p.coefficient(&MultiIndex::new(exps))
    }

    #[test]
    fn eval_handles_all_node_kinds() {
        // x0^2 / (1 + x1) - tan(x0) * 0.5
        let e = var(0).pow(2) / (1.0 + var(1)) - 0.5 * tan(var(0));
        let got = e.eval(&[0.3, 0.2]).unwrap();
        let expected = 0.3f64.powi(2) / 1.2 - 0.5 * 0.3f64.tan();
        assert_abs_diff_eq!(got, expected, epsilon = 1e-15);
    }

    #[test]
    fn eval_reports_singularities() {
        let div = constant(1.0) / var(0);
        assert!(matches!(
            div.eval(&[0.0]),
            Err(Error::Singular { op: "division" })
        ));
        let t = tan(var(0));
        assert!(matches!(
            t.eval(&[std::f64::consts::FRAC_PI_2]),
            Err(Error::Singular { op: "tan" })
        ));
    }

    #[test]
    fn sin_jet_at_zero_is_the_maclaurin_series() {
        let jet = eval_jet(&sin(var(0)), &[0.0], 3).unwrap();
        assert_abs_diff_eq!(coeff(&jet, &[1]), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(coeff(&jet, &[3]), -1.0 / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(coeff(&jet, &[0]), 0.0);
        assert_abs_diff_eq!(coeff(&jet, &[2]), 0.0);
    }

    #[test]
    fn tan_jet_at_zero_is_the_maclaurin_series() {
        let jet = eval_jet(&tan(var(0)), &[0.0], 3).unwrap();
        assert_abs_diff_eq!(coeff(&jet, &[1]), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(coeff(&jet, &[3]), 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn product_jet_expands_exactly() {
        // x0 * x1 about [a, b] at degree 2: ab + b d0 + a d1 + d0 d1
        let (a, b) = (1.25, -0.75);
        let jet = eval_jet(&(var(0) * var(1)), &[a, b], 2).unwrap();
        assert_abs_diff_eq!(coeff(&jet, &[0, 0]), a * b, epsilon = 1e-15);
        assert_abs_diff_eq!(coeff(&jet, &[1, 0]), b, epsilon = 1e-15);
        assert_abs_diff_eq!(coeff(&jet, &[0, 1]), a, epsilon = 1e-15);
        assert_abs_diff_eq!(coeff(&jet, &[1, 1]), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn sin_jet_off_center_matches_finite_differences() {
        // sin about pi/4 at degree 2; second-order central differences with
        // step 1e-5 are accurate enough for the first two derivatives.
        let c = std::f64::consts::FRAC_PI_4;
        let jet = eval_jet(&sin(var(0)), &[c], 2).unwrap();
        let h = 1e-5;
        let f = |x: f64| x.sin();
        let d1 = (f(c + h) - f(c - h)) / (2.0 * h);
        let d2 = (f(c + h) - 2.0 * f(c) + f(c - h)) / (h * h);
        assert_abs_diff_eq!(coeff(&jet, &[0]), c.sin(), epsilon = 1e-12);
        assert_abs_diff_eq!(coeff(&jet, &[1]), d1, epsilon = 1e-9);
        assert_abs_diff_eq!(coeff(&jet, &[2]), d2 / 2.0, epsilon = 1e-5);
    }

    #[test]
    fn jet_constant_term_equals_eval() {
        let e = sin(var(0)) * cos(var(1)) - var(1).pow(3) / (2.0 + var(0));
        let x = [0.7, -0.4];
        let jet = eval_jet(&e, &x, 4).unwrap();
        assert_abs_diff_eq!(jet.constant_term(), e.eval(&x).unwrap(), epsilon = 1e-14);
    }

    #[test]
    fn jet_has_no_terms_above_the_truncation_degree() {
        let e = tanh(var(0) * var(1)) + var(0).pow(5);
        let jet = eval_jet(&e, &[0.3, 0.8], 3).unwrap();
        assert!(jet.iter().all(|(i, _)| i.degree() <= 3));
    }

    #[test]
    fn jet_prefix_matches_lower_degree_jet_exactly() {
        let e = sin(var(0)) / (2.0 + cos(var(1))) + tanh(var(0) * var(1));
        let center = [0.4, -1.1];
        let full = eval_jet(&e, &center, 5).unwrap();
        for j in 0..=5 {
            let direct = eval_jet(&e, &center, j).unwrap();
            assert_eq!(full.truncate(j), direct, "prefix mismatch at degree {}", j);
        }
    }

    #[test]
    fn jet_at_singular_point_errors() {
        let e = constant(1.0) / var(0);
        assert!(eval_jet(&e, &[0.0], 2).is_err());
        let t = tan(var(0));
        assert!(eval_jet(&t, &[std::f64::consts::FRAC_PI_2], 2).is_err());
    }

    #[test]
    fn vector_field_checks_variable_indices() {
        assert!(VectorField::new(vec![var(1)]).is_err());
        let field = VectorField::new(vec![var(1), -var(0)]).unwrap();
        assert_eq!(field.dim(), 2);
        assert_eq!(field.eval(&[2.0, 3.0]).unwrap(), vec![3.0, -2.0]);
    }

    #[test]
    fn local_model_evaluates_like_the_field_at_the_center() {
        let field = VectorField::new(vec![var(1), -var(1) - 9.81 * sin(var(0))]).unwrap();
        let center = [0.3, -0.2];
        let model = field.local_model(&center, 3).unwrap();
        let fx = field.eval(&center).unwrap();
        let mx = model.eval(&center).unwrap();
        for (a, b) in fx.iter().zip(&mx) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
    }
}
