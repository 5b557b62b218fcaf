//! Symbolic differentiation. The builders below fold constants and drop
//! additive/multiplicative identities; nothing else is simplified.

use super::{pow, BinaryOp, Expr, UnaryOp};

fn is(e: &Expr, v: f64) -> bool {
    matches!(e, Expr::Const(c) if *c == v)
}

fn fold(op: BinaryOp, l: f64, r: f64) -> Option<f64> {
    let v = match op {
        BinaryOp::Add => l + r,
        BinaryOp::Sub => l - r,
        BinaryOp::Mul => l * r,
        BinaryOp::Div if r != 0.0 => l / r,
        BinaryOp::Div => return None,
        BinaryOp::Pow => pow(l, r).ok()?,
    };
    v.is_finite().then_some(v)
}

pub(crate) fn neg(a: Expr) -> Expr {
    match a {
        Expr::Const(c) => Expr::Const(-c),
        Expr::Unary(UnaryOp::Neg, inner) => *inner,
        a => Expr::unary(UnaryOp::Neg, a),
    }
}

pub(crate) fn unary(op: UnaryOp, a: Expr) -> Expr {
    if op == UnaryOp::Neg {
        return neg(a);
    }
    if let Expr::Const(c) = a {
        let v = match op {
            UnaryOp::Abs => Some(c.abs()),
            UnaryOp::Exp => Some(c.exp()),
            UnaryOp::Ln => (c > 0.0).then(|| c.ln()),
            UnaryOp::Neg => unreachable!(),
        };
        if let Some(v) = v.filter(|v| v.is_finite()) {
            return Expr::Const(v);
        }
    }
    Expr::unary(op, a)
}

pub(crate) fn binary(op: BinaryOp, l: Expr, r: Expr) -> Expr {
    if let (Expr::Const(a), Expr::Const(b)) = (&l, &r) {
        if let Some(v) = fold(op, *a, *b) {
            return Expr::Const(v);
        }
    }
    match op {
        BinaryOp::Add if is(&l, 0.0) => r,
        BinaryOp::Add if is(&r, 0.0) => l,
        BinaryOp::Sub if is(&r, 0.0) => l,
        BinaryOp::Sub if is(&l, 0.0) => neg(r),
        BinaryOp::Mul if is(&l, 0.0) || is(&r, 0.0) => Expr::Const(0.0),
        BinaryOp::Mul if is(&l, 1.0) => r,
        BinaryOp::Mul if is(&r, 1.0) => l,
        BinaryOp::Div if is(&r, 1.0) => l,
        BinaryOp::Pow if is(&r, 1.0) => l,
        BinaryOp::Pow if is(&r, 0.0) => Expr::Const(1.0),
        _ => Expr::binary(op, l, r),
    }
}

fn add(l: Expr, r: Expr) -> Expr {
    binary(BinaryOp::Add, l, r)
}
fn sub(l: Expr, r: Expr) -> Expr {
    binary(BinaryOp::Sub, l, r)
}
fn mul(l: Expr, r: Expr) -> Expr {
    binary(BinaryOp::Mul, l, r)
}
fn div(l: Expr, r: Expr) -> Expr {
    binary(BinaryOp::Div, l, r)
}

impl Expr {
    /// Constant folding plus identity elimination, applied bottom-up.
    pub fn simplify(&self) -> Expr {
        match self {
            Expr::Const(_) | Expr::Var => self.clone(),
            Expr::Unary(op, a) => unary(*op, a.simplify()),
            Expr::Binary(op, l, r) => binary(*op, l.simplify(), r.simplify()),
        }
    }

    /// Exact derivative with respect to `x`.
    pub fn derivative(&self) -> Expr {
        match self {
            Expr::Const(_) => Expr::Const(0.0),
            Expr::Var => Expr::Const(1.0),
            Expr::Unary(op, u) => {
                let du = u.derivative();
                let u = (**u).clone();
                match op {
                    UnaryOp::Neg => neg(du),
                    UnaryOp::Ln => div(du, u),
                    UnaryOp::Exp => mul(du, unary(UnaryOp::Exp, u)),
                    // d|u| = u' * u/|u|; undefined at u = 0
                    UnaryOp::Abs => mul(du, div(u.clone(), unary(UnaryOp::Abs, u))),
                }
            }
            Expr::Binary(op, u, v) => {
                let du = u.derivative();
                let dv = v.derivative();
                let (u, v) = ((**u).clone(), (**v).clone());
                match op {
                    BinaryOp::Add => add(du, dv),
                    BinaryOp::Sub => sub(du, dv),
                    BinaryOp::Mul => add(mul(du, v), mul(u, dv)),
                    BinaryOp::Div => div(
                        sub(mul(du, v.clone()), mul(u, dv)),
                        binary(BinaryOp::Pow, v, Expr::Const(2.0)),
                    ),
                    BinaryOp::Pow if v.is_constant() => {
                        let lowered = sub(v.clone(), Expr::Const(1.0));
                        mul(mul(v, binary(BinaryOp::Pow, u, lowered)), du)
                    }
                    BinaryOp::Pow if u.is_constant() => {
                        let ln_u = unary(UnaryOp::Ln, u.clone());
                        mul(mul(binary(BinaryOp::Pow, u, v), ln_u), dv)
                    }
                    BinaryOp::Pow => {
                        // d(u^v) = u^v * (v' ln u + v u'/u)
                        let ln_u = unary(UnaryOp::Ln, u.clone());
                        let inner = add(mul(dv, ln_u), div(mul(v.clone(), du), u.clone()));
                        mul(binary(BinaryOp::Pow, u, v), inner)
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::parse_expr;

    fn d(s: &str) -> String {
        parse_expr(s).unwrap().derivative().to_string()
    }

    #[test]
    fn derivative_shapes() {
        assert_eq!(d("x"), "1");
        assert_eq!(d("7"), "0");
        assert_eq!(d("x^2"), "2*x");
        assert_eq!(d("x^2*ln(x)"), "2*x*ln(x)+x^2*(1/x)");
        assert_eq!(d("exp(x)"), "exp(x)");
        assert_eq!(d("-x"), "(-1)");
        assert_eq!(d("3*x"), "3");
    }

    #[test]
    fn simplify_folds() {
        let e = parse_expr("(1+2)*x^1 + 0*ln(x) - 0").unwrap().simplify();
        assert_eq!(e.to_string(), "3*x");
        let e = parse_expr("x^(2-2)").unwrap().simplify();
        assert_eq!(e.to_string(), "1");
        // 1/0 is left alone rather than folded to inf
        let e = parse_expr("1/0").unwrap().simplify();
        assert_eq!(e.to_string(), "1/0");
    }

    #[test]
    fn variable_exponent() {
        let e = parse_expr("x^x").unwrap();
        let de = e.derivative();
        // d/dx x^x = x^x (ln x + 1)
        for &x in &[0.5f64, 1.0, 2.5] {
            let want = x.powf(x) * (x.ln() + 1.0);
            assert!((de.eval(x).unwrap() - want).abs() < 1e-13 * want.abs().max(1.0));
        }
        let e = parse_expr("2^x").unwrap();
        let de = e.derivative();
        assert!((de.eval(3.0).unwrap() - 8.0 * 2f64.ln()).abs() < 1e-14);
    }
}
