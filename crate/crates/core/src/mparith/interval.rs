use std::cmp::Ordering;
use std::fmt;

use rug::float::{Constant, Round};
use rug::ops::Pow;
use rug::{Float, Rational};

use super::Prec;
use crate::error::{Error, Result};

/// Elementary functions with interval enclosures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ElemFn {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
    Erf,
}

impl ElemFn {
    pub const ALL: [ElemFn; 6] = [
        ElemFn::Exp,
        ElemFn::Log,
        ElemFn::Sin,
        ElemFn::Cos,
        ElemFn::Sqrt,
        ElemFn::Erf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ElemFn::Exp => "exp",
            ElemFn::Log => "log",
            ElemFn::Sin => "sin",
            ElemFn::Cos => "cos",
            ElemFn::Sqrt => "sqrt",
            ElemFn::Erf => "erf",
        }
    }

    pub fn from_name(name: &str) -> Option<ElemFn> {
        ElemFn::ALL.into_iter().find(|f| f.name() == name)
    }

    /// Correctly rounded scalar evaluation.
    fn scalar(self, x: &Float, prec: Prec, round: Round) -> Float {
        let v = match self {
            ElemFn::Exp => Float::with_val_round(prec, x.exp_ref(), round),
            ElemFn::Log => Float::with_val_round(prec, x.ln_ref(), round),
            ElemFn::Sin => Float::with_val_round(prec, x.sin_ref(), round),
            ElemFn::Cos => Float::with_val_round(prec, x.cos_ref(), round),
            ElemFn::Sqrt => Float::with_val_round(prec, x.sqrt_ref(), round),
            ElemFn::Erf => Float::with_val_round(prec, x.erf_ref(), round),
        };
        v.0
    }
}

/// A closed interval `[lo, hi]` of MPFR numbers with `lo <= hi`.
#[derive(Clone, PartialEq)]
pub struct IvBox {
    lo: Float,
    hi: Float,
}

impl fmt::Debug for IvBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.20e}, {:.20e}]", self.lo.to_f64(), self.hi.to_f64())
    }
}

macro_rules! rnd {
    ($prec:expr, $e:expr, $dir:ident) => {
        Float::with_val_round($prec, $e, Round::$dir).0
    };
}

fn min_f(a: Float, b: Float) -> Float {
    if b < a {
        b
    } else {
        a
    }
}

fn max_f(a: Float, b: Float) -> Float {
    if b > a {
        b
    } else {
        a
    }
}

fn nonneg(x: &Float) -> bool {
    x.cmp0() != Some(Ordering::Less)
}

fn nonpos(x: &Float) -> bool {
    x.cmp0() != Some(Ordering::Greater)
}

impl IvBox {
    pub fn new(lo: Float, hi: Float) -> Result<IvBox> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::InvalidArgument(format!(
                "invalid interval [{}, {}]",
                lo.to_f64(),
                hi.to_f64()
            )));
        }
        Ok(IvBox { lo, hi })
    }

    pub fn point(x: Float) -> IvBox {
        IvBox { lo: x.clone(), hi: x }
    }

    pub fn from_f64(x: f64) -> IvBox {
        IvBox::point(Float::with_val(53, x))
    }

    pub fn from_f64s(lo: f64, hi: f64) -> Result<IvBox> {
        IvBox::new(Float::with_val(53, lo), Float::with_val(53, hi))
    }

    /// Tightest `prec`-bit enclosure of a rational.
    pub fn from_rational(r: &Rational, prec: Prec) -> IvBox {
        IvBox { lo: rnd!(prec, r, Down), hi: rnd!(prec, r, Up) }
    }

    pub fn hull_of(a: &Rational, b: &Rational, prec: Prec) -> Result<IvBox> {
        IvBox::new(rnd!(prec, a, Down), rnd!(prec, b, Up))
    }

    /// Enclosure of pi.
    pub fn pi(prec: Prec) -> IvBox {
        IvBox { lo: rnd!(prec, Constant::Pi, Down), hi: rnd!(prec, Constant::Pi, Up) }
    }

    pub fn zero(prec: Prec) -> IvBox {
        IvBox::point(Float::new(prec))
    }

    pub fn one(prec: Prec) -> IvBox {
        IvBox::point(Float::with_val(prec, 1))
    }

    pub fn lo(&self) -> &Float {
        &self.lo
    }

    pub fn hi(&self) -> &Float {
        &self.hi
    }

    pub fn into_bounds(self) -> (Float, Float) {
        (self.lo, self.hi)
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    /// Midpoint rounded to nearest at `prec`.
    pub fn mid(&self, prec: Prec) -> Float {
        let s = Float::with_val(prec + 2, &self.lo + &self.hi);
        rnd!(prec, s / 2u32, Nearest)
    }

    /// Width rounded up.
    pub fn width(&self, prec: Prec) -> Float {
        rnd!(prec, &self.hi - &self.lo, Up)
    }

    /// `max(|lo|, |hi|)`.
    pub fn mag(&self) -> Float {
        super::max_abs(&self.lo, &self.hi)
    }

    /// Smallest absolute value in the box.
    pub fn mig(&self) -> Float {
        if self.contains_zero() {
            Float::new(self.lo.prec())
        } else {
            min_f(self.lo.clone().abs(), self.hi.clone().abs())
        }
    }

    pub fn contains_zero(&self) -> bool {
        nonpos(&self.lo) && nonneg(&self.hi)
    }

    pub fn contains(&self, x: &Float) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    /// Zero lies strictly inside.
    pub fn zero_in_interior(&self) -> bool {
        self.lo.cmp0() == Some(Ordering::Less) && self.hi.cmp0() == Some(Ordering::Greater)
    }

    pub fn is_subset_of(&self, other: &IvBox) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn is_positive(&self) -> bool {
        self.lo.cmp0() == Some(Ordering::Greater)
    }

    pub fn is_negative(&self) -> bool {
        self.hi.cmp0() == Some(Ordering::Less)
    }

    pub fn hull(&self, other: &IvBox) -> IvBox {
        IvBox {
            lo: min_f(self.lo.clone(), other.lo.clone()),
            hi: max_f(self.hi.clone(), other.hi.clone()),
        }
    }

    pub fn intersect(&self, other: &IvBox) -> Option<IvBox> {
        let lo = max_f(self.lo.clone(), other.lo.clone());
        let hi = min_f(self.hi.clone(), other.hi.clone());
        (lo <= hi).then_some(IvBox { lo, hi })
    }

    /// Splits at the midpoint.
    pub fn bisect(&self, prec: Prec) -> (IvBox, IvBox) {
        let m = self.mid(prec.max(self.lo.prec()).max(self.hi.prec()));
        (
            IvBox { lo: self.lo.clone(), hi: m.clone() },
            IvBox { lo: m, hi: self.hi.clone() },
        )
    }

    /// Widens by `rel * mag` on each side.
    pub fn inflate(&self, rel: &Float, prec: Prec) -> IvBox {
        let pad = rnd!(prec, self.mag() * rel, Up);
        IvBox { lo: rnd!(prec, &self.lo - &pad, Down), hi: rnd!(prec, &self.hi + &pad, Up) }
    }

    /// Widens by an absolute amount on each side.
    pub fn widen(&self, pad: &Float, prec: Prec) -> IvBox {
        IvBox { lo: rnd!(prec, &self.lo - pad, Down), hi: rnd!(prec, &self.hi + pad, Up) }
    }

    /// Re-rounds both bounds outward to `prec` bits.
    pub fn round_out(&self, prec: Prec) -> IvBox {
        IvBox { lo: rnd!(prec, &self.lo, Down), hi: rnd!(prec, &self.hi, Up) }
    }

    pub fn neg(&self) -> IvBox {
        IvBox { lo: -self.hi.clone(), hi: -self.lo.clone() }
    }

    pub fn abs(&self) -> IvBox {
        if nonneg(&self.lo) {
            self.clone()
        } else if nonpos(&self.hi) {
            self.neg()
        } else {
            IvBox { lo: Float::new(self.lo.prec()), hi: self.mag() }
        }
    }

    pub fn add(&self, o: &IvBox, prec: Prec) -> IvBox {
        IvBox { lo: rnd!(prec, &self.lo + &o.lo, Down), hi: rnd!(prec, &self.hi + &o.hi, Up) }
    }

    pub fn sub(&self, o: &IvBox, prec: Prec) -> IvBox {
        IvBox { lo: rnd!(prec, &self.lo - &o.hi, Down), hi: rnd!(prec, &self.hi - &o.lo, Up) }
    }

    pub fn mul(&self, o: &IvBox, prec: Prec) -> IvBox {
        let (a, b) = (self, o);
        let p = |x: &Float, y: &Float, r: Round| Float::with_val_round(prec, x * y, r).0;
        let (lo, hi) = if nonneg(&a.lo) {
            if nonneg(&b.lo) {
                (p(&a.lo, &b.lo, Round::Down), p(&a.hi, &b.hi, Round::Up))
            } else if nonpos(&b.hi) {
                (p(&a.hi, &b.lo, Round::Down), p(&a.lo, &b.hi, Round::Up))
            } else {
                (p(&a.hi, &b.lo, Round::Down), p(&a.hi, &b.hi, Round::Up))
            }
        } else if nonpos(&a.hi) {
            if nonneg(&b.lo) {
                (p(&a.lo, &b.hi, Round::Down), p(&a.hi, &b.lo, Round::Up))
            } else if nonpos(&b.hi) {
                (p(&a.hi, &b.hi, Round::Down), p(&a.lo, &b.lo, Round::Up))
            } else {
                (p(&a.lo, &b.hi, Round::Down), p(&a.lo, &b.lo, Round::Up))
            }
        } else if nonneg(&b.lo) {
            (p(&a.lo, &b.hi, Round::Down), p(&a.hi, &b.hi, Round::Up))
        } else if nonpos(&b.hi) {
            (p(&a.hi, &b.lo, Round::Down), p(&a.lo, &b.lo, Round::Up))
        } else {
            (
                min_f(p(&a.lo, &b.hi, Round::Down), p(&a.hi, &b.lo, Round::Down)),
                max_f(p(&a.lo, &b.lo, Round::Up), p(&a.hi, &b.hi, Round::Up)),
            )
        };
        IvBox { lo, hi }
    }

    pub fn sqr(&self, prec: Prec) -> IvBox {
        self.powi(2, prec).expect("square is total")
    }

    pub fn div(&self, o: &IvBox, prec: Prec) -> Result<IvBox> {
        let (a, b) = (self, o);
        let q = |x: &Float, y: &Float, r: Round| Float::with_val_round(prec, x / y, r).0;
        let (lo, hi) = if b.is_positive() {
            if nonneg(&a.lo) {
                (q(&a.lo, &b.hi, Round::Down), q(&a.hi, &b.lo, Round::Up))
            } else if nonpos(&a.hi) {
                (q(&a.lo, &b.lo, Round::Down), q(&a.hi, &b.hi, Round::Up))
            } else {
                (q(&a.lo, &b.lo, Round::Down), q(&a.hi, &b.lo, Round::Up))
            }
        } else if b.is_negative() {
            if nonneg(&a.lo) {
                (q(&a.hi, &b.hi, Round::Down), q(&a.lo, &b.lo, Round::Up))
            } else if nonpos(&a.hi) {
                (q(&a.hi, &b.lo, Round::Down), q(&a.lo, &b.hi, Round::Up))
            } else {
                (q(&a.hi, &b.hi, Round::Down), q(&a.lo, &b.hi, Round::Up))
            }
        } else {
            return Err(Error::Domain("division by an interval containing zero".into()));
        };
        Ok(IvBox { lo, hi })
    }

    pub fn recip(&self, prec: Prec) -> Result<IvBox> {
        IvBox::one(prec).div(self, prec)
    }

    pub fn add_f(&self, x: &Float, prec: Prec) -> IvBox {
        IvBox { lo: rnd!(prec, &self.lo + x, Down), hi: rnd!(prec, &self.hi + x, Up) }
    }

    /// Multiplication by a small integer.
    pub fn mul_i(&self, k: i64, prec: Prec) -> IvBox {
        self.mul(&IvBox::point(Float::with_val(64, k)), prec)
    }

    /// Division by a nonzero small integer.
    pub fn div_i(&self, k: i64, prec: Prec) -> IvBox {
        self.div(&IvBox::point(Float::with_val(64, k)), prec)
            .expect("nonzero integer divisor")
    }

    /// Integer power; negative powers require `0` outside the box.
    pub fn powi(&self, k: i32, prec: Prec) -> Result<IvBox> {
        if k < 0 {
            return self.powi(-k, prec)?.recip(prec);
        }
        if k == 0 {
            return Ok(IvBox::one(prec));
        }
        if k == 1 {
            return Ok(IvBox { lo: rnd!(prec, &self.lo, Down), hi: rnd!(prec, &self.hi, Up) });
        }
        let pw = |x: &Float, r: Round| Float::with_val_round(prec, x.pow(k), r).0;
        if k % 2 == 1 || nonneg(&self.lo) {
            return Ok(IvBox { lo: pw(&self.lo, Round::Down), hi: pw(&self.hi, Round::Up) });
        }
        if nonpos(&self.hi) {
            return Ok(IvBox { lo: pw(&self.hi, Round::Down), hi: pw(&self.lo, Round::Up) });
        }
        Ok(IvBox { lo: Float::new(prec), hi: pw(&self.mag(), Round::Up) })
    }

    /// Enclosure of `f(self)`.
    pub fn elem(&self, f: ElemFn, prec: Prec) -> Result<IvBox> {
        match f {
            ElemFn::Log if !self.is_positive() => {
                return Err(Error::Domain("log of a non-positive interval".into()))
            }
            ElemFn::Sqrt if self.lo.cmp0() == Some(Ordering::Less) => {
                return Err(Error::Domain("sqrt of a negative interval".into()))
            }
            _ => {}
        }
        if self.is_point() {
            return Ok(IvBox {
                lo: f.scalar(&self.lo, prec, Round::Down),
                hi: f.scalar(&self.lo, prec, Round::Up),
            });
        }
        match f {
            // Increasing on their whole domain.
            ElemFn::Exp | ElemFn::Log | ElemFn::Sqrt | ElemFn::Erf => Ok(IvBox {
                lo: f.scalar(&self.lo, prec, Round::Down),
                hi: f.scalar(&self.hi, prec, Round::Up),
            }),
            // sin peaks at pi/2 + 2k pi and bottoms at -pi/2 + 2k pi;
            // cos peaks at 2k pi and bottoms at pi + 2k pi.
            ElemFn::Sin => Ok(self.periodic(f, 0.5, 1.5, prec)),
            ElemFn::Cos => Ok(self.periodic(f, 0.0, 1.0, prec)),
        }
    }

    fn periodic(&self, f: ElemFn, max_at: f64, min_at: f64, prec: Prec) -> IvBox {
        let lo_d = f.scalar(&self.lo, prec, Round::Down);
        let hi_d = f.scalar(&self.hi, prec, Round::Down);
        let lo_u = f.scalar(&self.lo, prec, Round::Up);
        let hi_u = f.scalar(&self.hi, prec, Round::Up);
        let mut lo = min_f(lo_d, hi_d);
        let mut hi = max_f(lo_u, hi_u);
        if self.hits_critical(max_at, prec) {
            hi = Float::with_val(prec, 1);
        }
        if self.hits_critical(min_at, prec) {
            lo = Float::with_val(prec, -1);
        }
        IvBox { lo, hi }
    }

    /// Conservatively decides whether `pi * (offset + 2k)` lies in the box for
    /// some integer `k`.
    fn hits_critical(&self, offset: f64, prec: Prec) -> bool {
        let p = prec.max(self.lo.prec()).max(self.hi.prec()) + 16;
        let pi = IvBox::pi(p);
        let off = IvBox::point(Float::with_val(p, offset));
        let turn = |x: &Float| -> IvBox {
            IvBox::point(x.clone())
                .div(&pi, p)
                .expect("pi > 0")
                .sub(&off, p)
                .div_i(2, p)
        };
        let u = turn(&self.lo);
        let v = turn(&self.hi);
        let first = u.lo.clone().ceil();
        let last = v.hi.clone().floor();
        first <= last
    }

    pub fn exp(&self, prec: Prec) -> IvBox {
        self.elem(ElemFn::Exp, prec).expect("exp is total")
    }

    pub fn log(&self, prec: Prec) -> Result<IvBox> {
        self.elem(ElemFn::Log, prec)
    }

    pub fn sin(&self, prec: Prec) -> IvBox {
        self.elem(ElemFn::Sin, prec).expect("sin is total")
    }

    pub fn cos(&self, prec: Prec) -> IvBox {
        self.elem(ElemFn::Cos, prec).expect("cos is total")
    }

    pub fn sqrt(&self, prec: Prec) -> Result<IvBox> {
        self.elem(ElemFn::Sqrt, prec)
    }

    pub fn erf(&self, prec: Prec) -> IvBox {
        self.elem(ElemFn::Erf, prec).expect("erf is total")
    }
}
