use std::fmt;

use thiserror::Error;

use super::expr::{Expr, Func};
use super::jet::{Jet, MAX_ORDER};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    DivisionByZero,
    LogNonPositive,
    SqrtNegative,
    RealPowerNonPositiveBase,
    NonDifferentiable,
    OrderTooHigh,
    DimensionMismatch,
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text = match self {
            DomainKind::DivisionByZero => "division by zero",
            DomainKind::LogNonPositive => "ln of a non-positive value",
            DomainKind::SqrtNegative => "sqrt outside its differentiable domain",
            DomainKind::RealPowerNonPositiveBase => "non-integer power of a non-positive base",
            DomainKind::NonDifferentiable => "abs differentiated at 0",
            DomainKind::OrderTooHigh => "requested jet order above the supported maximum",
            DomainKind::DimensionMismatch => "point has the wrong number of coordinates",
        };
        f.write_str(text)
    }
}

/// Evaluation failed because a subexpression left its domain at the point.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} in `{subexpr}` at {point:?}")]
pub struct DomainError {
    pub kind: DomainKind,
    /// The offending subexpression, rendered with positional names `x0, x1, ...`.
    pub subexpr: String,
    pub point: Vec<f64>,
}

fn positional_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("x{i}")).collect()
}

struct Evaluator<'a> {
    point: &'a [f64],
    order: usize,
}

impl Evaluator<'_> {
    fn fail(&self, kind: DomainKind, e: &Expr) -> DomainError {
        let width = e.max_var().map_or(self.point.len(), |m| (m + 1).max(self.point.len()));
        DomainError { kind, subexpr: e.render(&positional_names(width)), point: self.point.to_vec() }
    }

    fn eval(&self, e: &Expr) -> Result<Jet, DomainError> {
        let n = self.point.len();
        Ok(match e {
            Expr::Num(v) => Jet::constant(n, self.order, *v),
            Expr::Var(i) => {
                if *i >= n {
                    return Err(self.fail(DomainKind::DimensionMismatch, e));
                }
                Jet::variable(n, self.order, *i, self.point[*i])
            }
            Expr::Neg(a) => -self.eval(a)?,
            Expr::Add(a, b) => self.eval(a)? + self.eval(b)?,
            Expr::Sub(a, b) => self.eval(a)? - self.eval(b)?,
            Expr::Mul(a, b) => self.eval(a)? * self.eval(b)?,
            Expr::Div(a, b) => {
                let den = self.eval(b)?;
                if den.value() == 0.0 {
                    return Err(self.fail(DomainKind::DivisionByZero, e));
                }
                self.eval(a)? * den.recip()
            }
            Expr::Pow(a, b) => self.pow(e, a, b)?,
            Expr::Call(f, a) => {
                let u = self.eval(a)?;
                let t = u.value();
                let phi = match f {
                    Func::Sin => {
                        let (s, c) = t.sin_cos();
                        [s, c, -s, -c]
                    }
                    Func::Cos => {
                        let (s, c) = t.sin_cos();
                        [c, -s, -c, s]
                    }
                    Func::Tan => {
                        if t.cos() == 0.0 {
                            return Err(self.fail(DomainKind::DivisionByZero, e));
                        }
                        let v = t.tan();
                        let sec2 = 1.0 + v * v;
                        [v, sec2, 2.0 * v * sec2, 2.0 * sec2 * (1.0 + 3.0 * v * v)]
                    }
                    Func::Exp => {
                        let v = t.exp();
                        [v; 4]
                    }
                    Func::Ln => {
                        if t <= 0.0 {
                            return Err(self.fail(DomainKind::LogNonPositive, e));
                        }
                        let r = 1.0 / t;
                        [t.ln(), r, -r * r, 2.0 * r * r * r]
                    }
                    Func::Sqrt => {
                        if t < 0.0 || (t == 0.0 && self.order > 0) {
                            return Err(self.fail(DomainKind::SqrtNegative, e));
                        }
                        let s = t.sqrt();
                        if self.order == 0 {
                            [s, 0.0, 0.0, 0.0]
                        } else {
                            [s, 0.5 / s, -0.25 / (s * t), 0.375 / (s * t * t)]
                        }
                    }
                    Func::Tanh => {
                        let v = t.tanh();
                        let sech2 = 1.0 - v * v;
                        [v, sech2, -2.0 * v * sech2, sech2 * (6.0 * v * v - 2.0)]
                    }
                    Func::Abs => {
                        if t == 0.0 && self.order > 0 {
                            return Err(self.fail(DomainKind::NonDifferentiable, e));
                        }
                        [t.abs(), t.signum(), 0.0, 0.0]
                    }
                };
                u.compose(phi)
            }
        })
    }

    fn pow(&self, whole: &Expr, a: &Expr, b: &Expr) -> Result<Jet, DomainError> {
        let base = self.eval(a)?;
        let t = base.value();
        match b.constant_value() {
            Some(c) if c.fract() == 0.0 && c.abs() <= u32::MAX as f64 => {
                let p = base.powi(c.abs() as u32);
                if c < 0.0 {
                    if t == 0.0 {
                        return Err(self.fail(DomainKind::DivisionByZero, whole));
                    }
                    Ok(p.recip())
                } else {
                    Ok(p)
                }
            }
            Some(c) => {
                if t <= 0.0 {
                    return Err(self.fail(DomainKind::RealPowerNonPositiveBase, whole));
                }
                let v = t.powf(c);
                Ok(base.compose([
                    v,
                    c * v / t,
                    c * (c - 1.0) * v / (t * t),
                    c * (c - 1.0) * (c - 2.0) * v / (t * t * t),
                ]))
            }
            None => {
                if t <= 0.0 {
                    return Err(self.fail(DomainKind::RealPowerNonPositiveBase, whole));
                }
                let ln_a = base.compose([t.ln(), 1.0 / t, -1.0 / (t * t), 2.0 / (t * t * t)]);
                let exponent = self.eval(b)?;
                let prod = exponent * ln_a;
                let v = prod.value().exp();
                Ok(prod.compose([v; 4]))
            }
        }
    }
}

/// Evaluates `e` at `point` with all partial derivatives up to `order`.
pub fn eval_jet(e: &Expr, point: &[f64], order: usize) -> Result<Jet, DomainError> {
    let ev = Evaluator { point, order };
    if order > MAX_ORDER {
        return Err(ev.fail(DomainKind::OrderTooHigh, e));
    }
    ev.eval(e)
}

/// Plain value of `e` at `point`.
pub fn eval_value(e: &Expr, point: &[f64]) -> Result<f64, DomainError> {
    eval_jet(e, point, 0).map(|j| j.value())
}

/// Max over coordinates of |jet gradient - central difference with step `h`|.
pub fn fd_crosscheck(e: &Expr, point: &[f64], h: f64) -> Result<f64, DomainError> {
    let jet = eval_jet(e, point, 1)?;
    let mut worst: f64 = 0.0;
    let mut shifted = point.to_vec();
    for i in 0..point.len() {
        shifted[i] = point[i] + h;
        let plus = eval_value(e, &shifted)?;
        shifted[i] = point[i] - h;
        let minus = eval_value(e, &shifted)?;
        shifted[i] = point[i];
        worst = worst.max((jet.d1(i) - (plus - minus) / (2.0 * h)).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exprjet::parse_expr;

    fn names(n: &[&str]) -> Vec<String> {
        n.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn product_jet() {
        let e = parse_expr("x*y", &names(&["x", "y"])).unwrap();
        let j = eval_jet(&e, &[2.0, 3.0], 1).unwrap();
        assert_eq!((j.value(), j.d1(0), j.d1(1)), (6.0, 3.0, 2.0));
    }

    #[test]
    fn sine_at_origin() {
        let e = parse_expr("sin(x)", &names(&["x", "y"])).unwrap();
        let j = eval_jet(&e, &[0.0, 0.7], 2).unwrap();
        assert_eq!((j.value(), j.d1(0), j.d2(0, 0)), (0.0, 1.0, 0.0));
    }

    #[test]
    fn polynomial_jet() {
        let e = parse_expr("1+y^2", &names(&["x", "y"])).unwrap();
        let j = eval_jet(&e, &[0.0, 1.0], 1).unwrap();
        assert_eq!((j.value(), j.d1(1)), (2.0, 2.0));
    }

    #[test]
    fn domain_errors_name_subexpression() {
        let c = names(&["x"]);
        let err = eval_jet(&parse_expr("1 + ln(x - 1)", &c).unwrap(), &[0.5], 1).unwrap_err();
        assert_eq!(err.kind, DomainKind::LogNonPositive);
        assert_eq!(err.subexpr, "ln(x0 - 1)");
        let err = eval_jet(&parse_expr("1/x", &c).unwrap(), &[0.0], 0).unwrap_err();
        assert_eq!(err.kind, DomainKind::DivisionByZero);
        let err = eval_jet(&parse_expr("x^0.5", &c).unwrap(), &[-1.0], 0).unwrap_err();
        assert_eq!(err.kind, DomainKind::RealPowerNonPositiveBase);
        let err = eval_jet(&parse_expr("abs(x)", &c).unwrap(), &[0.0], 1).unwrap_err();
        assert_eq!(err.kind, DomainKind::NonDifferentiable);
        assert!(eval_jet(&parse_expr("abs(x)", &c).unwrap(), &[0.0], 0).is_ok());
    }

    #[test]
    fn integer_powers_of_negative_base() {
        let c = names(&["x"]);
        let j = eval_jet(&parse_expr("x^-2", &c).unwrap(), &[-2.0], 2).unwrap();
        assert_eq!(j.value(), 0.25);
        assert_eq!(j.d1(0), 0.25);
        assert_eq!(j.d2(0, 0), 6.0 / 16.0);
    }

    #[test]
    fn variable_exponent() {
        // x^x has derivative x^x (ln x + 1)
        let c = names(&["x"]);
        let j = eval_jet(&parse_expr("x^x", &c).unwrap(), &[2.0], 1).unwrap();
        assert!((j.value() - 4.0).abs() < 1e-14);
        assert!((j.d1(0) - 4.0 * (2f64.ln() + 1.0)).abs() < 1e-13);
    }

    #[test]
    fn fd_examples() {
        let c = names(&["x"]);
        assert!(fd_crosscheck(&parse_expr("x^3", &c).unwrap(), &[1.0], 1e-4).unwrap() <= 1e-7);
        assert!(fd_crosscheck(&parse_expr("exp(x)", &c).unwrap(), &[0.0], 1e-4).unwrap() <= 1e-7);
        assert_eq!(fd_crosscheck(&parse_expr("5", &c).unwrap(), &[0.3], 1e-4).unwrap(), 0.0);
    }
}
