//! Multiple-precision binary floating point with directed rounding, interval
//! enclosures built on top of it, and interval Taylor arithmetic.
//!
//! Scalars are MPFR numbers (`rug::Float`): normalized binary significands with
//! a per-value precision, correctly rounded in the requested direction. Every
//! interval operation rounds its lower bound down and its upper bound up, so the
//! exact image of the input boxes is always enclosed.

mod hexfloat;
mod interval;
pub mod taylor;

pub use hexfloat::{format_decimal_exact, format_f64_hex, format_hex, parse_exact, parse_f64_hex};
pub use interval::{ElemFn, IvBox};

use rug::float::Round;
use rug::Float;

/// Configurable-precision binary float.
pub type BigNum = Float;

/// Precision in bits.
pub type Prec = u32;

/// Working precision for a target error of `2^-k`: `max(165, 3k)` bits.
pub fn default_precision(target_log2: f64) -> Prec {
    let k = (-target_log2).ceil().max(0.0) as Prec;
    (3 * k).max(165)
}

/// `x` rounded to `prec` bits in direction `round`.
pub fn round_to(x: &Float, prec: Prec, round: Round) -> Float {
    Float::with_val_round(prec, x, round).0
}

/// `log2 |x|` as an `f64`, `-inf` for zero.
pub fn log2_abs(x: &Float) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    if x.is_infinite() || x.is_nan() {
        return f64::INFINITY;
    }
    let (m, e) = x.to_f64_exp();
    m.abs().log2() + e as f64
}

/// `2^e` exactly.
pub fn pow2(e: i32, prec: Prec) -> Float {
    Float::with_val(prec, 1) << e
}

/// `max(|a|, |b|)`.
pub fn max_abs(a: &Float, b: &Float) -> Float {
    let a = a.clone().abs();
    let b = b.clone().abs();
    if a > b {
        a
    } else {
        b
    }
}
