use std::fmt;

use super::{BinaryOp, Expr, UnaryOp};

// Binding strength as seen by the parser; atoms are 5.
fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Const(c) if *c < 0.0 || c.is_sign_negative() => 5,
        Expr::Const(_) | Expr::Var => 5,
        Expr::Unary(UnaryOp::Neg, _) => 3,
        Expr::Unary(..) => 5,
        Expr::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => 1,
        Expr::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => 2,
        Expr::Binary(BinaryOp::Pow, ..) => 4,
    }
}

fn write_num(f: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    let mag = c.abs();
    if mag == 0.0 || (1e-5..1e16).contains(&mag) {
        write!(f, "{mag}")
    } else {
        write!(f, "{mag:e}")
    }
}

fn child(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) if c.is_sign_negative() => {
                f.write_str("(-")?;
                write_num(f, *c)?;
                f.write_str(")")
            }
            Expr::Const(c) => write_num(f, *c),
            Expr::Var => f.write_str("x"),
            Expr::Unary(UnaryOp::Neg, a) => {
                f.write_str("-")?;
                child(f, a, prec(a) < 3)
            }
            Expr::Unary(op, a) => {
                let name = match op {
                    UnaryOp::Ln => "ln",
                    UnaryOp::Exp => "exp",
                    UnaryOp::Abs => "abs",
                    UnaryOp::Neg => unreachable!(),
                };
                write!(f, "{name}({a})")
            }
            Expr::Binary(op, l, r) => {
                let (sym, p) = match op {
                    BinaryOp::Add => ("+", 1),
                    BinaryOp::Sub => ("-", 1),
                    BinaryOp::Mul => ("*", 2),
                    BinaryOp::Div => ("/", 2),
                    BinaryOp::Pow => ("^", 4),
                };
                if *op == BinaryOp::Pow {
                    child(f, l, prec(l) < 5)?;
                    f.write_str(sym)?;
                    child(f, r, prec(r) < 3)
                } else {
                    child(f, l, prec(l) < p)?;
                    f.write_str(sym)?;
                    child(f, r, prec(r) <= p)
                }
            }
        }
    }
}
