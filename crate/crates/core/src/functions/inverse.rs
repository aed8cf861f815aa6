//! Inverse of a strictly monotonic function by safeguarded Newton iteration.

use std::sync::Arc;

use rug::Float;

use super::handle::{FunctionHandle, RealFunction};
use crate::error::{Error, Result};
use crate::mparith::taylor::Series;
use crate::mparith::{pow2, IvBox, Prec};

const GUARD_BITS: Prec = 16;
const MAX_NEWTON_STEPS: usize = 200;

struct NewtonInverse {
    f: FunctionHandle,
    df: FunctionHandle,
    d2f: Result<FunctionHandle>,
    domain: IvBox,
    seed: IvBox,
    increasing: bool,
}

/// Builds `g = f^-1` on `domain`, searching for preimages inside
/// `codomain_seed`.
///
/// `f` must be strictly monotonic on the seed and its image must cover the
/// domain. Point values are found by bracketed Newton iteration (a cheap
/// 64-bit phase, then precision doubling) and certified by a sign change of
/// `f - y` across the returned enclosure. Derivatives follow the inverse
/// function rule: `g' = 1/f'(g)`, `g'' = -f''(g)/f'(g)^3`.
pub fn newton_inverse(f: FunctionHandle, domain: IvBox, codomain_seed: IvBox) -> Result<FunctionHandle> {
    let df = f.derivative()?;
    let d2f = df.derivative();
    let slope = df.eval(&codomain_seed, 64)?;
    let increasing = if slope.is_positive() {
        true
    } else if slope.is_negative() {
        false
    } else {
        return Err(Error::InvalidArgument(format!(
            "{} is not strictly monotonic on the seed interval",
            f.label()
        )));
    };
    let image_lo = f.eval_point(codomain_seed.lo(), 64)?;
    let image_hi = f.eval_point(codomain_seed.hi(), 64)?;
    let image = if increasing {
        IvBox::new(image_lo.hi().clone(), image_hi.lo().clone())
    } else {
        IvBox::new(image_hi.hi().clone(), image_lo.lo().clone())
    };
    if !image.map(|im| domain.is_subset_of(&im)).unwrap_or(false) {
        return Err(Error::InvalidArgument("seed image does not cover the domain".into()));
    }
    Ok(FunctionHandle::new(InverseFn(Arc::new(NewtonInverse {
        f,
        df,
        d2f,
        domain,
        seed: codomain_seed,
        increasing,
    }))))
}

impl NewtonInverse {
    fn label(&self) -> String {
        format!("inverse({})", self.f.label())
    }

    /// One Newton pass at precision `p`, updating the bracket `[a, b]`.
    fn newton(&self, x: &mut Float, a: &mut Float, b: &mut Float, y: &Float, p: Prec, tol_bits: i32) -> Result<bool> {
        for _ in 0..MAX_NEWTON_STEPS {
            x.set_prec(p);
            a.set_prec(p);
            b.set_prec(p);
            let fx = Float::with_val(p, self.f.approx(x, p)? - y);
            if fx.is_zero() {
                return Ok(true);
            }
            if (fx.cmp0() == Some(std::cmp::Ordering::Greater)) == self.increasing {
                *b = x.clone();
            } else {
                *a = x.clone();
            }
            let dfx = self.df.approx(x, p)?;
            let step = Float::with_val(p, &fx / &dfx);
            let mut next = Float::with_val(p, &*x - &step);
            if !(next > *a && next < *b) || !step.is_finite() {
                next = Float::with_val(p, &*a + &*b) / 2u32;
            }
            let scale = if x.is_zero() { pow2(-(p as i32), 10) } else { Float::with_val(10, x.abs_ref()) };
            let done = Float::with_val(p, &next - &*x).abs() <= scale * pow2(-tol_bits, 10);
            *x = next;
            if done {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn point(&self, y: &Float, prec: Prec) -> Result<IvBox> {
        let wp = prec + GUARD_BITS;
        let mut a = self.seed.lo().clone();
        let mut b = self.seed.hi().clone();
        let mut x = Float::with_val(64, &a + &b) / 2u32;
        let mut p: Prec = 64;
        loop {
            let tol = (p as i32) - 8;
            if !self.newton(&mut x, &mut a, &mut b, y, p, tol)? {
                return Err(Error::Numerical(format!("{}: Newton iteration did not converge", self.label())));
            }
            if p >= wp {
                break;
            }
            p = (2 * p).min(wp);
            a = self.seed.lo().clone();
            b = self.seed.hi().clone();
        }
        self.certify(&x, y, prec, wp)
    }

    /// Finds `r` with `f(x-r) - y` and `f(x+r) - y` of opposite strict signs.
    fn certify(&self, x: &Float, y: &Float, prec: Prec, wp: Prec) -> Result<IvBox> {
        let yb = IvBox::point(y.clone());
        let fx = self.f.eval_point(x, wp)?.sub(&yb, wp);
        if fx.is_point() && fx.lo().is_zero() {
            return Ok(IvBox::point(x.clone()).round_out(prec));
        }
        let mut r = if x.is_zero() {
            pow2(-(wp as i32), 10)
        } else {
            pow2(x.get_exp().unwrap_or(0) - wp as i32 + 2, 10)
        };
        for _ in 0..64 {
            let lo = Float::with_val(wp, x - &r);
            let hi = Float::with_val(wp, x + &r);
            let flo = self.f.eval_point(&lo, wp)?.sub(&yb, wp);
            let fhi = self.f.eval_point(&hi, wp)?.sub(&yb, wp);
            let ok = if self.increasing {
                flo.is_negative() && fhi.is_positive()
            } else {
                flo.is_positive() && fhi.is_negative()
            };
            if ok {
                return Ok(IvBox::new(lo, hi)?.round_out(prec));
            }
            if lo < *self.seed.lo() && hi > *self.seed.hi() {
                break;
            }
            r *= 4u32;
        }
        Err(Error::Numerical(format!(
            "{}: cannot certify a preimage of {} inside the seed",
            self.label(),
            y.to_f64()
        )))
    }

    fn eval(&self, y: &IvBox, prec: Prec) -> Result<IvBox> {
        if !y.is_subset_of(&self.domain) {
            return Err(Error::Domain(format!("{}: argument outside {:?}", self.label(), self.domain)));
        }
        if y.is_point() {
            return self.point(y.lo(), prec);
        }
        let glo = self.point(y.lo(), prec)?;
        let ghi = self.point(y.hi(), prec)?;
        Ok(if self.increasing { glo.hull(&ghi) } else { ghi.hull(&glo) })
    }

    /// Series reversion: with `f(x0 + t) = y0 + sum a_k t^k`, the inverse is
    /// `g(y0 + s) = x0 + sum G_k s^k`, `G_1 = 1/a_1` and
    /// `G_k = -(1/a_1) [s^k] sum_{j>=2} a_j G(s)^j`.
    fn taylor(&self, y: &IvBox, order: usize, prec: Prec) -> Option<Result<Series>> {
        let x = match self.eval(y, prec) {
            Ok(x) => x,
            Err(e) => return Some(Err(e)),
        };
        let fs = self.f.taylor(&x, order, prec)?;
        Some(fs.and_then(|fs| revert(x, fs.coeffs(), order, prec)))
    }
}

fn revert(x0: IvBox, a: &[IvBox], order: usize, prec: Prec) -> Result<Series> {
    let mut g = vec![x0];
    if order == 0 {
        return Ok(Series::from_coeffs(g));
    }
    let a1 = &a[1];
    let inv_a1 = a1.recip(prec)?;
    // pw[j][m] = [s^m] G(s)^j, filled column by column.
    let mut pw: Vec<Vec<IvBox>> = vec![vec![IvBox::zero(prec); order + 1]; order + 1];
    g.push(inv_a1.clone());
    pw[1][1] = inv_a1;
    for k in 2..=order {
        for j in 2..=k {
            let mut acc = IvBox::zero(prec);
            for i in 1..=(k - j + 1) {
                acc = acc.add(&pw[1][i].mul(&pw[j - 1][k - i], prec), prec);
            }
            pw[j][k] = acc;
        }
        let mut s = IvBox::zero(prec);
        for j in 2..=k {
            s = s.add(&a[j].mul(&pw[j][k], prec), prec);
        }
        let gk = s.neg().div(a1, prec)?;
        pw[1][k] = gk.clone();
        g.push(gk);
    }
    Ok(Series::from_coeffs(g))
}

struct InverseFn(Arc<NewtonInverse>);

impl RealFunction for InverseFn {
    fn eval(&self, x: &IvBox, prec: Prec) -> Result<IvBox> {
        self.0.eval(x, prec)
    }

    fn derivative(&self) -> Option<Result<Arc<dyn RealFunction>>> {
        Some(Ok(Arc::new(InverseDerivative { inv: self.0.clone(), order: 1 })))
    }

    fn taylor(&self, base: &IvBox, order: usize, prec: Prec) -> Option<Result<Series>> {
        self.0.taylor(base, order, prec)
    }

    fn label(&self) -> String {
        self.0.label()
    }
}

struct InverseDerivative {
    inv: Arc<NewtonInverse>,
    order: u8,
}

impl RealFunction for InverseDerivative {
    fn eval(&self, y: &IvBox, prec: Prec) -> Result<IvBox> {
        let wp = prec + GUARD_BITS;
        let x = self.inv.eval(y, wp)?;
        let d1 = self.inv.df.eval(&x, wp)?;
        let r = if self.order == 1 {
            d1.recip(wp)?
        } else {
            let d2f = self.inv.d2f.as_ref().map_err(Clone::clone)?;
            d2f.eval(&x, wp)?.neg().div(&d1.powi(3, wp)?, wp)?
        };
        Ok(r.round_out(prec))
    }

    fn derivative(&self) -> Option<Result<Arc<dyn RealFunction>>> {
        if self.order == 1 {
            Some(Ok(Arc::new(InverseDerivative { inv: self.inv.clone(), order: 2 })))
        } else {
            Some(Err(Error::DerivativeOrder(3)))
        }
    }

    fn taylor(&self, base: &IvBox, order: usize, prec: Prec) -> Option<Result<Series>> {
        let k = usize::from(self.order);
        let s = self.inv.taylor(base, order + k, prec)?;
        Some(s.map(|s| {
            let c = (0..=order)
                .map(|j| {
                    let falling: i64 = (j + 1..=j + k).map(|v| v as i64).product();
                    s.coeff(j + k).mul_i(falling, prec)
                })
                .collect();
            Series::from_coeffs(c)
        }))
    }

    fn label(&self) -> String {
        format!("{}'{}", self.inv.label(), if self.order == 2 { "'" } else { "" })
    }
}
