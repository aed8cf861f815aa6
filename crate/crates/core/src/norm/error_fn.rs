use std::sync::Arc;

use rug::Float;

use crate::error::{Error, Result};
use crate::functions::{FunctionHandle, RealFunction};
use crate::mparith::taylor::Series;
use crate::mparith::{IvBox, Prec};
use crate::poly::Poly;

/// Which error the approximation minimizes.
#[derive(Clone, Debug)]
pub enum ErrorMode {
    /// `p - f`.
    Absolute,
    /// `p / f - 1`.
    Relative,
    /// `p * w - f`.
    Weighted(FunctionHandle),
}

impl ErrorMode {
    pub fn name(&self) -> &'static str {
        match self {
            ErrorMode::Absolute => "absolute",
            ErrorMode::Relative => "relative",
            ErrorMode::Weighted(_) => "weighted",
        }
    }
}

/// Multiplicity of the zero of `f` at `0` (0, 1 or 2), read off the
/// enclosures of `f(0)`, `f'(0)` and `f''(0)`.
pub fn zero_multiplicity(f: &FunctionHandle, prec: Prec) -> Result<u32> {
    let zero = IvBox::zero(prec);
    if !f.eval(&zero, prec)?.contains_zero() {
        return Ok(0);
    }
    let d1 = f.derivative()?;
    if !d1.eval(&zero, prec)?.contains_zero() {
        return Ok(1);
    }
    if !d1.derivative()?.eval(&zero, prec)?.contains_zero() {
        return Ok(2);
    }
    Err(Error::Domain(format!("{} has a zero of multiplicity above 2 at 0", f.label())))
}

/// The error function of a polynomial against `f`, as an evaluable handle.
///
/// In relative mode with a zero of multiplicity `m` at the origin, boxes
/// containing `0` are evaluated through `(p/x^m) / (f/x^m) - 1`, with the
/// normalized Taylor coefficients of `f/x^m` over a box `X` enclosed by those
/// of `f` of order `j + m` over `hull(X, 0)`. At `x = 0` this is the limit
/// `(p^(m)(0)/m!) / (f^(m)(0)/m!) - 1`.
#[derive(Clone)]
pub struct ErrorFunction {
    p: Poly,
    p_shift: Option<Poly>,
    f: FunctionHandle,
    mode: ErrorMode,
    m: u32,
}

impl ErrorFunction {
    /// `m` is the zero multiplicity of `f` at `0` when `0` is in the
    /// approximation interval (relative mode only), else `0`.
    pub fn new(p: Poly, f: FunctionHandle, mode: ErrorMode, m: u32) -> Result<ErrorFunction> {
        let p_shift = if m > 0 && matches!(mode, ErrorMode::Relative) { Some(p.shift_down(m)?) } else { None };
        Ok(ErrorFunction { p, p_shift, f, mode, m })
    }

    pub fn handle(self) -> FunctionHandle {
        FunctionHandle::new(self)
    }

    pub fn poly(&self) -> &Poly {
        &self.p
    }

    fn near_zero(&self, x: &IvBox) -> bool {
        self.p_shift.is_some() && x.contains_zero()
    }

    /// Enclosure of `f^(m)/m!` over `hull(x, 0)`.
    fn leading(&self, x: &IvBox, prec: Prec) -> Result<IvBox> {
        let hull = x.hull(&IvBox::zero(prec));
        if let Some(s) = self.f.taylor(&hull, self.m as usize, prec) {
            return Ok(s?.coeff(self.m as usize).clone());
        }
        let mut d = self.f.clone();
        for _ in 0..self.m {
            d = d.derivative()?;
        }
        let v = d.eval(&hull, prec)?;
        Ok(if self.m == 2 { v.div_i(2, prec) } else { v })
    }
}

impl RealFunction for ErrorFunction {
    fn eval(&self, x: &IvBox, prec: Prec) -> Result<IvBox> {
        let one = IvBox::one(prec);
        match &self.mode {
            ErrorMode::Absolute => Ok(self.p.eval_box(x, prec).sub(&self.f.eval(x, prec)?, prec)),
            ErrorMode::Weighted(w) => {
                let pw = self.p.eval_box(x, prec).mul(&w.eval(x, prec)?, prec);
                Ok(pw.sub(&self.f.eval(x, prec)?, prec))
            }
            ErrorMode::Relative if self.near_zero(x) => {
                let ps = self.p_shift.as_ref().expect("shifted polynomial").eval_box(x, prec);
                Ok(ps.div(&self.leading(x, prec)?, prec)?.sub(&one, prec))
            }
            ErrorMode::Relative => {
                Ok(self.p.eval_box(x, prec).div(&self.f.eval(x, prec)?, prec)?.sub(&one, prec))
            }
        }
    }

    /// Available when `f` (and the weight) supply exact derivatives and no
    /// zero of `f` is factored out.
    fn derivative(&self) -> Option<Result<Arc<dyn RealFunction>>> {
        if self.p_shift.is_some() {
            return None;
        }
        let fs = chain(self.f.arc())?;
        let ws = match &self.mode {
            ErrorMode::Weighted(w) => Some(chain(w.arc())?),
            _ => None,
        };
        let d = ErrorDerivative::new(&self.p, fs, ws, self.mode.clone(), 1);
        Some(Ok(Arc::new(d) as Arc<dyn RealFunction>))
    }

    fn taylor(&self, base: &IvBox, order: usize, prec: Prec) -> Option<Result<Series>> {
        let one = IvBox::one(prec);
        let s = match &self.mode {
            ErrorMode::Absolute => {
                let fs = self.f.taylor(base, order, prec)?;
                fs.map(|fs| self.p.taylor(base, order, prec).sub(&fs, prec))
            }
            ErrorMode::Weighted(w) => {
                let fs = self.f.taylor(base, order, prec)?;
                let ws = w.taylor(base, order, prec)?;
                fs.and_then(|fs| Ok(self.p.taylor(base, order, prec).mul(&ws?, prec).sub(&fs, prec)))
            }
            ErrorMode::Relative if self.near_zero(base) => {
                let m = self.m as usize;
                let hull = base.hull(&IvBox::zero(prec));
                let fs = self.f.taylor(&hull, order + m, prec)?;
                let ps = self.p_shift.as_ref().expect("shifted polynomial").taylor(base, order, prec);
                fs.and_then(|fs| ps.div(&fs.shift_down(m), prec)).map(|q| q.add_const(&one.neg(), prec))
            }
            ErrorMode::Relative => {
                let fs = self.f.taylor(base, order, prec)?;
                fs.and_then(|fs| self.p.taylor(base, order, prec).div(&fs, prec))
                    .map(|q| q.add_const(&one.neg(), prec))
            }
        };
        Some(s)
    }

    fn label(&self) -> String {
        match self.mode {
            ErrorMode::Absolute => format!("p - {}", self.f.label()),
            ErrorMode::Relative => format!("p / {} - 1", self.f.label()),
            ErrorMode::Weighted(_) => format!("p * w - {}", self.f.label()),
        }
    }
}

/// `f` followed by its exact derivatives up to order 2, or `None` when even
/// the first is missing.
fn chain(f: &Arc<dyn RealFunction>) -> Option<Vec<Arc<dyn RealFunction>>> {
    let d1 = f.derivative()?.ok()?;
    let mut out = vec![f.clone(), d1.clone()];
    if let Some(Ok(d2)) = d1.derivative() {
        out.push(d2);
    }
    Some(out)
}

/// First or second derivative of an [`ErrorFunction`] without a factored
/// zero, assembled from the derivatives of `p`, `f` and the weight.
struct ErrorDerivative {
    ps: Vec<Option<Poly>>,
    fs: Vec<Arc<dyn RealFunction>>,
    ws: Option<Vec<Arc<dyn RealFunction>>>,
    mode: ErrorMode,
    order: usize,
}

impl ErrorDerivative {
    fn new(p: &Poly, fs: Vec<Arc<dyn RealFunction>>, ws: Option<Vec<Arc<dyn RealFunction>>>, mode: ErrorMode, order: usize) -> ErrorDerivative {
        let p1 = p.derivative();
        let p2 = p1.as_ref().and_then(Poly::derivative);
        ErrorDerivative { ps: vec![Some(p.clone()), p1, p2], fs, ws, mode, order }
    }

    fn max_order(&self) -> usize {
        let w = self.ws.as_ref().map_or(2, |w| w.len() - 1);
        (self.fs.len() - 1).min(w)
    }

    fn p(&self, k: usize, x: &IvBox, prec: Prec) -> IvBox {
        self.ps[k].as_ref().map_or_else(|| IvBox::zero(prec), |p| p.eval_box(x, prec))
    }
}

impl RealFunction for ErrorDerivative {
    fn eval(&self, x: &IvBox, prec: Prec) -> Result<IvBox> {
        let k = self.order;
        let f: Vec<IvBox> = self.fs[..=k].iter().map(|f| f.eval(x, prec)).collect::<Result<_>>()?;
        match (&self.mode, &self.ws) {
            (ErrorMode::Weighted(_), Some(ws)) => {
                let w: Vec<IvBox> = ws[..=k].iter().map(|w| w.eval(x, prec)).collect::<Result<_>>()?;
                let pw = if k == 1 {
                    self.p(1, x, prec).mul(&w[0], prec).add(&self.p(0, x, prec).mul(&w[1], prec), prec)
                } else {
                    self.p(2, x, prec)
                        .mul(&w[0], prec)
                        .add(&self.p(1, x, prec).mul(&w[1], prec).mul_i(2, prec), prec)
                        .add(&self.p(0, x, prec).mul(&w[2], prec), prec)
                };
                Ok(pw.sub(&f[k], prec))
            }
            (ErrorMode::Relative, _) => {
                let q = self.p(0, x, prec).div(&f[0], prec)?;
                let q1 = self.p(1, x, prec).sub(&q.mul(&f[1], prec), prec).div(&f[0], prec)?;
                if k == 1 {
                    return Ok(q1);
                }
                self.p(2, x, prec)
                    .sub(&q1.mul(&f[1], prec).mul_i(2, prec), prec)
                    .sub(&q.mul(&f[2], prec), prec)
                    .div(&f[0], prec)
            }
            _ => Ok(self.p(k, x, prec).sub(&f[k], prec)),
        }
    }

    fn derivative(&self) -> Option<Result<Arc<dyn RealFunction>>> {
        (self.order < self.max_order()).then(|| {
            let d = ErrorDerivative {
                ps: self.ps.clone(),
                fs: self.fs.clone(),
                ws: self.ws.clone(),
                mode: self.mode.clone(),
                order: self.order + 1,
            };
            Ok(Arc::new(d) as Arc<dyn RealFunction>)
        })
    }

    fn label(&self) -> String {
        format!("error derivative of order {}", self.order)
    }
}

/// Error function of `p` against `f` in `mode`, ready for norm computations.
pub fn error_handle(p: &Poly, f: &FunctionHandle, mode: &ErrorMode, m: u32) -> Result<FunctionHandle> {
    Ok(ErrorFunction::new(p.clone(), f.clone(), mode.clone(), m)?.handle())
}

/// Cheap point approximation of the error, `None` when undefined.
pub fn approx_at(g: &FunctionHandle, x: &Float, prec: Prec) -> Option<Float> {
    g.approx(x, prec).ok().filter(|v| v.is_finite())
}

