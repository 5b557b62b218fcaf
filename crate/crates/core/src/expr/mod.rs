//! Univariate expressions in `x`: parsing, evaluation and exact symbolic
//! differentiation.
//!
//! Grammar (`^` binds tighter than unary minus and is right-associative):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | power
//! power  := atom ('^' factor)?
//! atom   := number | 'x' | func '(' expr ')' | '(' expr ')'
//! func   := 'ln' | 'exp' | 'abs'
//! ```

mod diff;
mod parse;
mod print;

use crate::error::{DomainError, ParseError};

pub use parse::parse_expr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Ln,
    Exp,
    Abs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn unary(op: UnaryOp, arg: Expr) -> Expr {
        Expr::Unary(op, Box::new(arg))
    }

    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    /// True when the tree does not mention `x`.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Const(_) => true,
            Expr::Var => false,
            Expr::Unary(_, a) => a.is_constant(),
            Expr::Binary(_, l, r) => l.is_constant() && r.is_constant(),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var => 1,
            Expr::Unary(_, a) => 1 + a.node_count(),
            Expr::Binary(_, l, r) => 1 + l.node_count() + r.node_count(),
        }
    }

    /// Evaluates the tree at `x`. Every intermediate value must be finite.
    pub fn eval(&self, x: f64) -> Result<f64, DomainError> {
        let value = match self {
            Expr::Const(c) => return Ok(*c),
            Expr::Var => return Ok(x),
            Expr::Unary(op, arg) => {
                let v = arg.eval(x)?;
                match op {
                    UnaryOp::Neg => -v,
                    UnaryOp::Abs => v.abs(),
                    UnaryOp::Exp => v.exp(),
                    UnaryOp::Ln => {
                        if v <= 0.0 {
                            return Err(self.domain(x, "logarithm of a non-positive value"));
                        }
                        v.ln()
                    }
                }
            }
            Expr::Binary(op, lhs, rhs) => {
                let l = lhs.eval(x)?;
                let r = rhs.eval(x)?;
                match op {
                    BinaryOp::Add => l + r,
                    BinaryOp::Sub => l - r,
                    BinaryOp::Mul => l * r,
                    BinaryOp::Div => {
                        if r == 0.0 {
                            return Err(self.domain(x, "division by zero"));
                        }
                        l / r
                    }
                    BinaryOp::Pow => pow(l, r).map_err(|reason| self.domain(x, reason))?,
                }
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(self.domain(x, "non-finite result"))
        }
    }

    fn domain(&self, at: f64, reason: &'static str) -> DomainError {
        DomainError {
            expr: self.to_string(),
            at,
            reason,
        }
    }
}

/// Real power. Integer exponents accept any base (0 only with a
/// non-negative exponent); fractional exponents need a positive base.
pub(crate) fn pow(base: f64, exponent: f64) -> Result<f64, &'static str> {
    let integral = exponent.fract() == 0.0;
    if base < 0.0 && !integral {
        return Err("non-integer power of a negative base");
    }
    if base == 0.0 {
        if !integral {
            return Err("non-integer power of zero");
        }
        if exponent < 0.0 {
            return Err("division by zero");
        }
    }
    Ok(base.powf(exponent))
}

/// A parsed function `f` together with its symbolic derivative `f'`.
///
/// Immutable once built; share freely across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionSpec {
    source: String,
    body: Expr,
    derivative: Expr,
}

impl FunctionSpec {
    pub fn parse(source: &str) -> Result<Self, ParseError> {
        let body = parse_expr(source)?;
        Ok(Self::with_source(source.to_string(), body))
    }

    pub fn from_expr(body: Expr) -> Self {
        Self::with_source(body.to_string(), body)
    }

    fn with_source(source: String, body: Expr) -> Self {
        let derivative = body.derivative();
        FunctionSpec {
            source,
            body,
            derivative,
        }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn body(&self) -> &Expr {
        &self.body
    }

    pub fn derivative(&self) -> &Expr {
        &self.derivative
    }

    pub fn eval(&self, x: f64) -> Result<f64, DomainError> {
        self.body.eval(x)
    }

    pub fn eval_derivative(&self, x: f64) -> Result<f64, DomainError> {
        self.derivative.eval(x)
    }
}

impl std::str::FromStr for FunctionSpec {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FunctionSpec::parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(s: &str) -> FunctionSpec {
        FunctionSpec::parse(s).unwrap()
    }

    #[test]
    fn evaluates_examples() {
        assert_eq!(spec("x^2").eval(3.0).unwrap(), 9.0);
        let v = spec("x^2*ln(x)").eval(2.0).unwrap();
        assert!((v - 4.0 * 2f64.ln()).abs() < 1e-15);
        assert!((v - 2.772_588_722_239_781).abs() < 1e-12);
    }

    #[test]
    fn ln_of_negative_is_domain_error() {
        let err = spec("ln(x)").eval(-1.0).unwrap_err();
        assert_eq!(err.expr, "ln(x)");
        assert_eq!(err.at, -1.0);
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(spec("x").derivative(), &Expr::Const(1.0));
        assert_eq!(spec("x^2").eval_derivative(1.0).unwrap(), 2.0);
        assert_eq!(spec("x").eval_derivative(7.0).unwrap(), 1.0);

        let d = spec("x^2*ln(x)").eval_derivative(2.0).unwrap();
        assert!((d - (4.0 * 2f64.ln() + 2.0)).abs() < 1e-14);
        assert!((d - 4.772_588_722_239_781).abs() < 1e-12);

        let fs = spec("x^3.5");
        assert_eq!(fs.derivative().to_string(), "3.5*x^2.5");
        for &x in &[0.5f64, 1.0, 2.0, 7.0] {
            let want = 3.5 * x.powf(2.5);
            assert!((fs.eval_derivative(x).unwrap() - want).abs() <= 1e-14 * want);
        }
    }

    #[test]
    fn pow_domain_rules() {
        assert_eq!(spec("x^3").eval(-2.0).unwrap(), -8.0);
        assert_eq!(spec("x^-2").eval(-2.0).unwrap(), 0.25);
        assert!(spec("x^0.5").eval(-2.0).is_err());
        assert!(spec("x^0.5").eval(0.0).is_err());
        assert!(spec("x^-1").eval(0.0).is_err());
        assert_eq!(spec("x^2").eval(0.0).unwrap(), 0.0);
    }

    #[test]
    fn division_by_zero_and_overflow() {
        assert_eq!(
            spec("1/x").eval(0.0).unwrap_err().reason,
            "division by zero"
        );
        assert_eq!(
            spec("exp(x)").eval(1000.0).unwrap_err().reason,
            "non-finite result"
        );
    }

    #[test]
    fn abs_derivative_is_sign() {
        let fs = spec("abs(x)");
        assert_eq!(fs.eval_derivative(-3.0).unwrap(), -1.0);
        assert_eq!(fs.eval_derivative(2.0).unwrap(), 1.0);
        assert!(fs.eval_derivative(0.0).is_err());
    }

    #[test]
    fn function_spec_is_send_sync() {
        fn check<T: Send + Sync>() {}
        check::<FunctionSpec>();
    }
}
