//! Independent reference implementations. They use only field operations
//! and square roots of `rug::Float`, never MPFR's transcendental routines.

#![allow(dead_code)]

use rug::Float;

/// Sum of a power series `sum c_k t^k` until terms drop below `2^-prec`
/// relative to the first.
fn series(prec: u32, t: &Float, mut coeff: impl FnMut(u32) -> Float) -> Float {
    let mut sum = Float::new(prec);
    let mut pw = Float::with_val(prec, 1);
    let floor = Float::with_val(prec, 1) >> (prec as i32 + 8);
    for k in 0.. {
        let term = Float::with_val(prec, &pw * coeff(k));
        sum += &term;
        if k > 4 && Float::with_val(prec, term.abs_ref()) < floor {
            break;
        }
        pw *= t;
    }
    sum
}

fn factorial_recip(prec: u32, k: u32) -> Float {
    let mut f = Float::with_val(prec, 1);
    for j in 2..=k {
        f /= j;
    }
    f
}

/// `e^x` by halving the argument and squaring back.
pub fn exp(x: &Float, prec: u32) -> Float {
    let wp = prec + 64;
    let halvings = (x.to_f64().abs().log2().ceil().max(0.0) as u32) + 8;
    let t = Float::with_val(wp, x) >> halvings as i32;
    let mut v = series(wp, &t, |k| factorial_recip(wp, k));
    for _ in 0..halvings {
        v.square_mut();
    }
    v
}

pub fn sin(x: &Float, prec: u32) -> Float {
    let wp = prec + 64;
    let x2 = Float::with_val(wp, x.square_ref());
    let s = series(wp, &x2, |k| {
        let f = factorial_recip(wp, 2 * k + 1);
        if k % 2 == 0 {
            f
        } else {
            -f
        }
    });
    s * x
}

pub fn cos(x: &Float, prec: u32) -> Float {
    let wp = prec + 64;
    let x2 = Float::with_val(wp, x.square_ref());
    series(wp, &x2, |k| {
        let f = factorial_recip(wp, 2 * k);
        if k % 2 == 0 {
            f
        } else {
            -f
        }
    })
}

/// `atan(1/n)` for an integer `n >= 2`.
fn acot(n: u32, prec: u32) -> Float {
    let t = Float::with_val(prec, 1) / Float::with_val(prec, n * n);
    let s = series(prec, &t, |k| {
        let v = Float::with_val(prec, 1) / (2 * k + 1);
        if k % 2 == 0 {
            v
        } else {
            -v
        }
    });
    s / n
}

/// Machin's formula.
pub fn pi(prec: u32) -> Float {
    let wp = prec + 32;
    Float::with_val(wp, acot(5, wp) * 16u32) - Float::with_val(wp, acot(239, wp) * 4u32)
}

/// Maclaurin series of `erf`, accurate for `|x| <= 3`.
pub fn erf(x: &Float, prec: u32) -> Float {
    let wp = prec + 96;
    let x2 = Float::with_val(wp, x.square_ref());
    let s = series(wp, &x2, |k| {
        let v = factorial_recip(wp, k) / (2 * k + 1);
        if k % 2 == 0 {
            v
        } else {
            -v
        }
    });
    let two_over_sqrt_pi = Float::with_val(wp, 2u32) / pi(wp).sqrt();
    s * x * two_over_sqrt_pi
}

/// Natural log by Newton iteration on the series `exp`.
pub fn ln(x: &Float, prec: u32) -> Float {
    let wp = prec + 64;
    let mut y = Float::with_val(wp, x.to_f64().ln());
    for _ in 0..((wp as f64 / 50.0).log2().ceil() as u32 + 3) {
        let e = exp(&y, wp);
        y += Float::with_val(wp, x / &e) - 1u32;
    }
    y
}

/// `|a - b| <= 2^-bits * max(|b|, 2^-bits)`.
pub fn close(a: &Float, b: &Float, bits: i32) -> bool {
    let p = a.prec().max(b.prec()) + 8;
    let d = Float::with_val(p, a - b).abs();
    let scale = Float::with_val(p, b.abs_ref()).max(&(Float::with_val(p, 1) >> bits));
    d <= scale >> bits
}
