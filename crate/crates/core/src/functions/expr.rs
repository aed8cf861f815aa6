use std::fmt;

use rug::Rational;

use crate::error::{Error, Result};
use crate::mparith::taylor::Series;
use crate::mparith::{ElemFn, IvBox, Prec};

/// Expression tree in one variable `x`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Var,
    Const(Rational),
    Pi,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(ElemFn, Box<Expr>),
}

impl Expr {
    pub fn x() -> Expr {
        Expr::Var
    }

    pub fn int(v: i64) -> Expr {
        Expr::Const(Rational::from(v))
    }

    pub fn rational(r: Rational) -> Expr {
        Expr::Const(r)
    }

    pub fn as_const(&self) -> Option<&Rational> {
        match self {
            Expr::Const(r) => Some(r),
            _ => None,
        }
    }

    fn is_const(&self, v: i32) -> bool {
        matches!(self, Expr::Const(r) if *r == v)
    }

    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Const(r) => Expr::Const(-r),
            Expr::Neg(inner) => *inner,
            a => Expr::Neg(Box::new(a)),
        }
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
            (a, b) if b.is_const(0) => a,
            (a, b) if a.is_const(0) => b,
            (a, b) => Expr::Add(Box::new(a), Box::new(b)),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x - y),
            (a, b) if b.is_const(0) => a,
            (a, b) if a.is_const(0) => Expr::neg(b),
            (a, b) => Expr::Sub(Box::new(a), Box::new(b)),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x * y),
            (a, b) if a.is_const(0) || b.is_const(0) => Expr::int(0),
            (a, b) if a.is_const(1) => b,
            (a, b) if b.is_const(1) => a,
            (a, b) if a.is_const(-1) => Expr::neg(b),
            (a, b) if b.is_const(-1) => Expr::neg(a),
            (a, b) => Expr::Mul(Box::new(a), Box::new(b)),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Const(x), Expr::Const(y)) if y != 0 => Expr::Const(x / y),
            (a, b) if b.is_const(1) => a,
            (a, b) if a.is_const(0) && !b.is_const(0) => Expr::int(0),
            (a, b) => Expr::Div(Box::new(a), Box::new(b)),
        }
    }

    pub fn pow(a: Expr, k: i32) -> Expr {
        match (a, k) {
            (_, 0) => Expr::int(1),
            (a, 1) => a,
            (Expr::Const(r), k) if k > 0 || r != 0 => {
                let p = Rational::from(rug::ops::Pow::pow(&r, k.unsigned_abs()));
                Expr::Const(if k < 0 { p.recip() } else { p })
            }
            (a, k) => Expr::Pow(Box::new(a), k),
        }
    }

    pub fn call(f: ElemFn, a: Expr) -> Expr {
        Expr::Call(f, Box::new(a))
    }

    /// Interval evaluation at `x`.
    pub fn eval(&self, x: &IvBox, prec: Prec) -> Result<IvBox> {
        Ok(match self {
            Expr::Var => x.clone(),
            Expr::Const(r) => IvBox::from_rational(r, prec),
            Expr::Pi => IvBox::pi(prec),
            Expr::Neg(a) => a.eval(x, prec)?.neg(),
            Expr::Add(a, b) => a.eval(x, prec)?.add(&b.eval(x, prec)?, prec),
            Expr::Sub(a, b) => a.eval(x, prec)?.sub(&b.eval(x, prec)?, prec),
            Expr::Mul(a, b) => a.eval(x, prec)?.mul(&b.eval(x, prec)?, prec),
            Expr::Div(a, b) => a.eval(x, prec)?.div(&b.eval(x, prec)?, prec)?,
            Expr::Pow(a, k) => a.eval(x, prec)?.powi(*k, prec)?,
            Expr::Call(f, a) => a.eval(x, prec)?.elem(*f, prec)?,
        })
    }

    /// Taylor series of order `order` at `base` (a point or a box).
    pub fn taylor(&self, base: &IvBox, order: usize, prec: Prec) -> Result<Series> {
        Ok(match self {
            Expr::Var => Series::variable(base.clone(), order, prec),
            Expr::Const(r) => Series::constant(IvBox::from_rational(r, prec), order, prec),
            Expr::Pi => Series::constant(IvBox::pi(prec), order, prec),
            Expr::Neg(a) => a.taylor(base, order, prec)?.neg(),
            Expr::Add(a, b) => a.taylor(base, order, prec)?.add(&b.taylor(base, order, prec)?, prec),
            Expr::Sub(a, b) => a.taylor(base, order, prec)?.sub(&b.taylor(base, order, prec)?, prec),
            Expr::Mul(a, b) => a.taylor(base, order, prec)?.mul(&b.taylor(base, order, prec)?, prec),
            Expr::Div(a, b) => a.taylor(base, order, prec)?.div(&b.taylor(base, order, prec)?, prec)?,
            Expr::Pow(a, k) => a.taylor(base, order, prec)?.powi(*k, prec)?,
            Expr::Call(f, a) => {
                let s = a.taylor(base, order, prec)?;
                match f {
                    ElemFn::Exp => s.exp(prec),
                    ElemFn::Log => s.log(prec)?,
                    ElemFn::Sin => s.sin_cos(prec).0,
                    ElemFn::Cos => s.sin_cos(prec).1,
                    ElemFn::Sqrt => s.sqrt(prec)?,
                    ElemFn::Erf => s.erf(prec),
                }
            }
        })
    }

    /// Exact value of a closed constant expression, when it is rational.
    pub fn rational_value(&self) -> Option<Rational> {
        match self {
            Expr::Const(r) => Some(r.clone()),
            Expr::Neg(a) => a.rational_value().map(|r| -r),
            Expr::Add(a, b) => Some(a.rational_value()? + b.rational_value()?),
            Expr::Sub(a, b) => Some(a.rational_value()? - b.rational_value()?),
            Expr::Mul(a, b) => Some(a.rational_value()? * b.rational_value()?),
            Expr::Div(a, b) => {
                let d = b.rational_value()?;
                (d != 0).then(|| a.rational_value().map(|n| n / d)).flatten()
            }
            Expr::Pow(a, k) => {
                let r = a.rational_value()?;
                if r == 0 && *k < 0 {
                    return None;
                }
                let p = Rational::from(rug::ops::Pow::pow(&r, k.unsigned_abs()));
                Some(if *k < 0 { p.recip() } else { p })
            }
            _ => None,
        }
    }

    pub fn depends_on_x(&self) -> bool {
        match self {
            Expr::Var => true,
            Expr::Const(_) | Expr::Pi => false,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.depends_on_x(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.depends_on_x() || b.depends_on_x()
            }
        }
    }

    /// Enclosure of a closed constant expression.
    pub fn eval_const(&self, prec: Prec) -> Result<IvBox> {
        if self.depends_on_x() {
            return Err(Error::InvalidArgument(format!("{self} is not a constant")));
        }
        self.eval(&IvBox::zero(prec), prec)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var => write!(f, "x"),
            Expr::Const(r) => {
                if *r.denom() == 1 && *r >= 0 {
                    write!(f, "{}", r.numer())
                } else if *r.denom() == 1 {
                    write!(f, "({})", r.numer())
                } else {
                    write!(f, "({}/{})", r.numer(), r.denom())
                }
            }
            Expr::Pi => write!(f, "pi"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, k) => write!(f, "({a})^{k}"),
            Expr::Call(g, a) => write!(f, "{}({a})", g.name()),
        }
    }
}
