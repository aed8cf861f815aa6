//! Static simulation of Horner's scheme over an interval.
//!
//! Step `i` of Horner computes `q_i = p_i + x q_(i+1)`. The addition is safe
//! when the incoming term `x q_(i+1)` stays below half the coefficient in
//! magnitude, or when both always share the coefficient's sign.

use std::fmt;

use rug::Float;

use crate::error::Result;
use crate::mparith::{IvBox, Prec};
use crate::norm::range_bounds;
use crate::poly::{MonomialBasis, Poly};

/// Relative tolerance of the certified step ranges, as a power of two.
pub const RANGE_TOL_LOG2: i32 = -20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Free,
    Cancelling,
    /// The exponent is not in the polynomial's basis: Horner multiplies
    /// through without adding anything.
    Absent,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Free => "free",
            Verdict::Cancelling => "cancelling",
            Verdict::Absent => "absent",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HornerStep {
    pub index: u32,
    pub alpha_lo: Float,
    pub alpha_hi: Float,
    /// `max(|alpha_lo|, |alpha_hi|)`.
    pub alpha: Float,
    pub coeff: Float,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CancellationReport {
    /// Steps `i = n-1` down to `0`.
    pub steps: Vec<HornerStep>,
    /// `x^n` plus every exponent whose step is free.
    pub basis: MonomialBasis,
    pub cancellation_free: bool,
}

impl CancellationReport {
    pub fn cancelling_exponents(&self) -> Vec<u32> {
        self.steps.iter().filter(|s| s.verdict == Verdict::Cancelling).map(|s| s.index).collect()
    }
}

/// Partial Horner polynomial `x q_(i+1)(x) = sum_(k > i) p_k x^(k-i)`.
fn incoming(dense: &[Float], i: usize) -> Poly {
    let mut c = Vec::with_capacity(dense.len() - i);
    c.push(Float::new(dense[0].prec()));
    c.extend(dense[i + 1..].iter().cloned());
    Poly::from_dense(c).expect("non-empty")
}

/// Certified `(inf, sup)` of `x q_(i+1)(x)` over `I` for `i = n-1 .. 0`,
/// over the dense degree range with zeros for missing exponents.
pub fn static_horner_ranges(p: &Poly, i: &IvBox, prec: Prec) -> Result<Vec<(Float, Float)>> {
    let dense = p.dense();
    let n = dense.len() - 1;
    let mut out = Vec::with_capacity(n);
    for k in (0..n).rev() {
        let g = incoming(&dense, k).handle();
        out.push(range_bounds(&g, i, RANGE_TOL_LOG2, prec)?);
    }
    Ok(out)
}

/// Free iff `alpha <= |coeff|/2`, or the range `[alpha_lo, alpha_hi]` never
/// has the opposite sign of a nonzero `coeff`. Adding a zero term cannot
/// cancel, so the range may touch `0`.
pub fn check_step(alpha_lo: &Float, alpha_hi: &Float, coeff: &Float) -> Verdict {
    let alpha = Float::with_val(alpha_lo.prec().max(alpha_hi.prec()), alpha_lo.abs_ref()).max(&Float::with_val(
        alpha_hi.prec(),
        alpha_hi.abs_ref(),
    ));
    let half = Float::with_val(coeff.prec(), coeff.abs_ref()) / 2u32;
    if alpha <= half {
        return Verdict::Free;
    }
    let positive = *alpha_lo >= 0 && *coeff > 0;
    let negative = *alpha_hi <= 0 && *coeff < 0;
    if positive || negative {
        Verdict::Free
    } else {
        Verdict::Cancelling
    }
}

/// Runs the static Horner simulation on `p` and collects the basis of
/// non-cancelling additions, starting from `{x^n}`.
pub fn cancellation_basis(p: &Poly, i: &IvBox, prec: Prec) -> Result<CancellationReport> {
    let ranges = static_horner_ranges(p, i, prec)?;
    let n = p.degree();
    let mut exps = vec![n];
    let mut steps = Vec::with_capacity(ranges.len());
    for (k, (lo, hi)) in (0..n).rev().zip(ranges) {
        let alpha = Float::with_val(prec, lo.abs_ref()).max(&Float::with_val(prec, hi.abs_ref()));
        let (coeff, verdict) = match p.coeff(k) {
            Some(c) => (c.clone(), check_step(&lo, &hi, c)),
            None => (Float::new(prec), Verdict::Absent),
        };
        if verdict == Verdict::Free {
            exps.push(k);
        }
        steps.push(HornerStep { index: k, alpha_lo: lo, alpha_hi: hi, alpha, coeff, verdict });
    }
    let cancellation_free = steps.iter().all(|s| s.verdict != Verdict::Cancelling);
    Ok(CancellationReport { steps, basis: MonomialBasis::new(exps)?, cancellation_free })
}
