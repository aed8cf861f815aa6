use std::fmt;
use std::sync::Arc;

use rug::Float;

use super::diff::differentiate;
use super::expr::Expr;
use crate::error::{Error, Result};
use crate::mparith::taylor::Series;
use crate::mparith::{pow2, IvBox, Prec};

/// Extra bits carried by expression evaluation before the outward rounding
/// back to the requested precision.
const GUARD_BITS: Prec = 20;

/// A real function of one variable known through interval enclosures.
///
/// Implementations must be pure (or serialize internally): handles are shared
/// across threads.
pub trait RealFunction: Send + Sync {
    /// Enclosure of `{f(t) : t in x}` whose width is at most
    /// `2^(-prec+4) * |f|` for point inputs.
    fn eval(&self, x: &IvBox, prec: Prec) -> Result<IvBox>;

    /// The exact derivative, when the implementation can provide one.
    /// `None` makes the handle fall back to interval finite differences.
    fn derivative(&self) -> Option<Result<Arc<dyn RealFunction>>> {
        None
    }

    /// Interval Taylor coefficients of order `0..=order` at `base`.
    fn taylor(&self, _base: &IvBox, _order: usize, _prec: Prec) -> Option<Result<Series>> {
        None
    }

    fn label(&self) -> String;
}

/// Shared handle to a [`RealFunction`] that tracks how many times it has been
/// differentiated. Only the value and the first two derivatives are exposed.
#[derive(Clone)]
pub struct FunctionHandle {
    inner: Arc<dyn RealFunction>,
    order: u8,
}

impl fmt::Debug for FunctionHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FunctionHandle({}, order {})", self.label(), self.order)
    }
}

impl FunctionHandle {
    pub fn new(f: impl RealFunction + 'static) -> FunctionHandle {
        FunctionHandle { inner: Arc::new(f), order: 0 }
    }

    pub fn from_arc(f: Arc<dyn RealFunction>) -> FunctionHandle {
        FunctionHandle { inner: f, order: 0 }
    }

    /// Wraps an enclosure closure with no derivative information.
    pub fn from_fn<F>(label: &str, f: F) -> FunctionHandle
    where
        F: Fn(&IvBox, Prec) -> Result<IvBox> + Send + Sync + 'static,
    {
        FunctionHandle::new(ClosureFunction { f: Box::new(f), label: label.to_string() })
    }

    pub fn eval(&self, x: &IvBox, prec: Prec) -> Result<IvBox> {
        self.inner.eval(x, prec)
    }

    pub fn eval_point(&self, x: &Float, prec: Prec) -> Result<IvBox> {
        self.inner.eval(&IvBox::point(x.clone()), prec)
    }

    /// Midpoint of the enclosure at a point: a `prec`-bit approximation.
    pub fn approx(&self, x: &Float, prec: Prec) -> Result<Float> {
        Ok(self.eval_point(x, prec)?.mid(prec))
    }

    pub fn taylor(&self, base: &IvBox, order: usize, prec: Prec) -> Option<Result<Series>> {
        self.inner.taylor(base, order, prec)
    }

    pub fn has_taylor(&self) -> bool {
        let x = IvBox::from_f64(0.0);
        self.inner.taylor(&x, 0, 64).is_some()
    }

    /// How many times this handle has been differentiated (0, 1 or 2).
    pub fn derivative_order(&self) -> u8 {
        self.order
    }

    pub fn derivative(&self) -> Result<FunctionHandle> {
        if self.order >= 2 {
            return Err(Error::DerivativeOrder(self.order + 1));
        }
        let inner = match self.inner.derivative() {
            Some(d) => d?,
            None => Arc::new(FiniteDifference { base: self.inner.clone() }),
        };
        Ok(FunctionHandle { inner, order: self.order + 1 })
    }

    pub fn label(&self) -> String {
        self.inner.label()
    }

    pub fn arc(&self) -> &Arc<dyn RealFunction> {
        &self.inner
    }
}

/// Interval evaluation of a parsed expression; derivatives are symbolic.
#[derive(Clone, Debug)]
pub struct ExprFunction {
    expr: Expr,
    label: String,
}

impl ExprFunction {
    pub fn new(expr: Expr) -> ExprFunction {
        let label = expr.to_string();
        ExprFunction { expr, label }
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }
}

impl RealFunction for ExprFunction {
    fn eval(&self, x: &IvBox, prec: Prec) -> Result<IvBox> {
        Ok(self.expr.eval(x, prec + GUARD_BITS)?.round_out(prec))
    }

    fn derivative(&self) -> Option<Result<Arc<dyn RealFunction>>> {
        let d = differentiate(&self.expr);
        Some(Ok(Arc::new(ExprFunction { label: d.to_string(), expr: d })))
    }

    fn taylor(&self, base: &IvBox, order: usize, prec: Prec) -> Option<Result<Series>> {
        Some(self.expr.taylor(base, order, prec))
    }

    fn label(&self) -> String {
        self.label.clone()
    }
}

pub fn to_handle(e: Expr) -> FunctionHandle {
    FunctionHandle::new(ExprFunction::new(e))
}

type EnclosureFn = dyn Fn(&IvBox, Prec) -> Result<IvBox> + Send + Sync;

struct ClosureFunction {
    f: Box<EnclosureFn>,
    label: String,
}

impl RealFunction for ClosureFunction {
    fn eval(&self, x: &IvBox, prec: Prec) -> Result<IvBox> {
        (self.f)(x, prec)
    }

    fn label(&self) -> String {
        self.label.clone()
    }
}

/// Derivative of a black box by central differences in interval arithmetic.
///
/// The step is `h = 2^(-prec/3)`, balancing the `O(h^2)` truncation error
/// against the `O(2^-prec / h)` evaluation error. The difference quotient is
/// widened by four times its own width plus `h^2 |d|` to absorb the
/// truncation term; the result is therefore a heuristic enclosure that is only
/// as good as the smoothness of the underlying function.
struct FiniteDifference {
    base: Arc<dyn RealFunction>,
}

impl FiniteDifference {
    fn at(&self, x: &Float, h: &Float, prec: Prec) -> Result<IvBox> {
        let wp = prec + 2 * GUARD_BITS;
        let xp = IvBox::point(x.clone()).add_f(h, wp);
        let xm = IvBox::point(x.clone()).add_f(&Float::with_val(wp, -h), wp);
        let fp = self.base.eval(&xp, wp)?;
        let fm = self.base.eval(&xm, wp)?;
        let two_h = IvBox::point(Float::with_val(wp, h * 2u32));
        fp.sub(&fm, wp).div(&two_h, wp)
    }
}

impl RealFunction for FiniteDifference {
    fn eval(&self, x: &IvBox, prec: Prec) -> Result<IvBox> {
        let h = pow2(-((prec / 3) as i32), prec);
        let mut d = self.at(x.lo(), &h, prec)?;
        if !x.is_point() {
            d = d.hull(&self.at(x.hi(), &h, prec)?).hull(&self.at(&x.mid(prec), &h, prec)?);
        }
        let h2 = Float::with_val(prec, &h * &h);
        let pad = Float::with_val(prec, d.width(prec) * 4u32) + Float::with_val(prec, &h2 * d.mag());
        Ok(d.widen(&pad, prec).round_out(prec))
    }

    fn label(&self) -> String {
        format!("fd({})", self.base.label())
    }
}
