//! Format assignment and a posteriori round-off bounds.

use rug::ops::Pow;
use rug::Float;

use super::format::{power_mults, round_expansion, FpCoeff, FpKind, FpPoly};
use crate::cancellation::{cancellation_basis, Verdict};
use crate::driver::ApproxSpec;
use crate::error::{Error, Result};
use crate::mparith::{pow2, IvBox, Prec};
use crate::norm::{self, approx_at, error_handle, ErrorMode, NormResult};
use crate::poly::Poly;

/// Sub-intervals used by the round-off simulation.
pub const BOUND_BOXES: usize = 64;

/// Contribution of one operation to the relative evaluation error.
#[derive(Clone, Debug, PartialEq)]
pub struct StepBound {
    /// Exponent whose coefficient the step adds; `None` for the final
    /// multiplication by `x^lowest`.
    pub exponent: Option<u32>,
    pub kind: FpKind,
    pub contribution: Float,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalErrorBound {
    /// Relative error of the evaluation against exact evaluation of the
    /// machine coefficients, over the whole interval.
    pub bound: Float,
    pub per_step: Vec<StepBound>,
}

const BOUND_PREC: Prec = 128;

fn unit(kind: FpKind) -> Float {
    pow2(kind.unit_roundoff_log2(), BOUND_PREC)
}

/// `gamma_k = k u / (1 - k u)`, which bounds `(1 + u)^k - 1`.
fn gamma(u: &Float, k: u32) -> Float {
    let ku = Float::with_val(BOUND_PREC, u * k);
    let den = Float::with_val(BOUND_PREC, 1u32 - &ku);
    ku / den
}

fn chain(a: &Float, b: &Float) -> Float {
    // (1 + a)(1 + b) - 1
    Float::with_val(BOUND_PREC, a + b) + Float::with_val(BOUND_PREC, a * b)
}

/// Per-box relative bound and local contributions.
fn box_bound(fp: &FpPoly, x: &IvBox, prec: Prec) -> Result<(Float, Vec<Float>)> {
    let zero = Float::new(BOUND_PREC);
    let mut a = IvBox::point(fp.coeffs[0].value()).round_out(prec);
    let mut e = zero.clone();
    let mut local: Vec<(u32, Float)> = Vec::with_capacity(fp.steps.len());
    for (step, c) in fp.steps.iter().zip(&fp.coeffs[1..]) {
        let u = unit(step.kind);
        let pw = x.powi(step.power as i32, prec)?;
        let g2 = chain(&gamma(&u, power_mults(step.power)), &u);
        let (ma, mp) = (Float::with_val(BOUND_PREC, a.mag()), Float::with_val(BOUND_PREC, pw.mag()));
        let em = Float::with_val(BOUND_PREC, &mp * &e)
            + Float::with_val(BOUND_PREC, &ma + &e) * Float::with_val(BOUND_PREC, &mp * &g2);
        let s = a.mul(&pw, prec).add_f(&c.value(), prec);
        let ms = Float::with_val(BOUND_PREC, s.mag());
        let es = Float::with_val(BOUND_PREC, &em + Float::with_val(BOUND_PREC, &u * Float::with_val(BOUND_PREC, &ms + &em)));
        let l = Float::with_val(BOUND_PREC, &u * &ms) + Float::with_val(BOUND_PREC, &ma * &mp) * &g2;
        local.push((step.exponent, l));
        a = s;
        e = es;
    }
    let mig = Float::with_val(BOUND_PREC, a.mig());
    let inf = Float::with_val(BOUND_PREC, f64::INFINITY);
    if mig.is_zero() {
        let n = local.len() + usize::from(fp.lowest() > 0);
        return Ok((inf.clone(), vec![inf; n]));
    }
    let low = fp.lowest();
    let mut contrib = Vec::with_capacity(local.len() + 1);
    for (ek, l) in local {
        let scale = x.powi((ek - low) as i32, prec)?.mag();
        contrib.push(Float::with_val(BOUND_PREC, l * scale) / &mig);
    }
    let mut rel = Float::with_val(BOUND_PREC, &e / &mig);
    if low > 0 {
        let gf = gamma(&unit(fp.final_kind), power_mults(low) + 1);
        rel = chain(&rel, &gf);
        contrib.push(gf);
    }
    Ok((rel, contrib))
}

/// Re-runs the Horner simulation on the machine coefficients; a cancelling
/// step is an error.
fn recheck(fp: &FpPoly, i: &IvBox, prec: Prec) -> Result<()> {
    let rep = cancellation_basis(&fp.exact_poly(), i, prec)?;
    match rep.steps.iter().find(|s| s.verdict == Verdict::Cancelling) {
        Some(s) => Err(Error::CancellationReintroduced(s.index)),
        None => Ok(()),
    }
}

/// Bounds the relative round-off of the emitted Horner scheme over `I` by
/// interval simulation on [`BOUND_BOXES`] sub-intervals, charging each
/// operation its format's unit round-off.
pub fn eval_error_bound(fp: &FpPoly, i: &IvBox, prec: Prec) -> Result<EvalErrorBound> {
    recheck(fp, i, prec)?;
    let mut bound = Float::new(BOUND_PREC);
    let mut per: Vec<Float> = Vec::new();
    let width = i.width(prec);
    for k in 0..BOUND_BOXES {
        let lo = Float::with_val(prec, i.lo() + Float::with_val(prec, &width * k as u32) / BOUND_BOXES as u32);
        let hi = if k + 1 == BOUND_BOXES {
            i.hi().clone()
        } else {
            Float::with_val(prec, i.lo() + Float::with_val(prec, &width * (k + 1) as u32) / BOUND_BOXES as u32)
        };
        let x = IvBox::new(lo.min(i.hi()), hi)?.round_out(prec).intersect(i).unwrap_or_else(|| i.clone());
        let (b, c) = box_bound(fp, &x, prec)?;
        bound.max_mut(&b);
        if per.is_empty() {
            per = c;
        } else {
            for (p, v) in per.iter_mut().zip(c) {
                p.max_mut(&v);
            }
        }
    }
    // Covers the rounding of the bound arithmetic itself.
    bound *= Float::with_val(BOUND_PREC, 1u32 + pow2(-20, BOUND_PREC));
    let mut per_step: Vec<StepBound> = fp
        .steps
        .iter()
        .zip(&per)
        .map(|(s, c)| StepBound { exponent: Some(s.exponent), kind: s.kind, contribution: c.clone() })
        .collect();
    if fp.lowest() > 0 {
        let c = per.last().cloned().unwrap_or_else(|| Float::new(BOUND_PREC));
        per_step.push(StepBound { exponent: None, kind: fp.final_kind, contribution: c });
    }
    Ok(EvalErrorBound { bound, per_step })
}

/// Upper estimate of `sup |d err / d c_e|` over `I` for each exponent:
/// `|x^e / f|`, `|x^e|` or `|x^e w|` by mode, sampled and doubled.
fn sensitivities(p: &Poly, spec: &ApproxSpec) -> Vec<Float> {
    let prec = spec.prec;
    let grid = norm::chebyshev_grid(&spec.interval, 257, prec);
    let denom: Vec<Option<Float>> = grid
        .iter()
        .map(|x| match &spec.mode {
            ErrorMode::Relative => approx_at(&spec.f, x, prec).filter(|v| !v.is_zero()).map(|v| v.recip()),
            ErrorMode::Absolute => Some(Float::with_val(prec, 1)),
            ErrorMode::Weighted(w) => approx_at(w, x, prec),
        })
        .collect();
    p.basis()
        .exponents()
        .iter()
        .map(|&e| {
            let mut s = Float::new(prec);
            for (x, d) in grid.iter().zip(&denom) {
                if let Some(d) = d {
                    let v = Float::with_val(prec, Float::with_val(prec, x.pow(e)) * d).abs();
                    s.max_mut(&v);
                }
            }
            s * 2u32
        })
        .collect()
}

/// Machine formats for `p` with their certified effect.
#[derive(Clone, Debug)]
pub struct Assignment {
    pub fp: FpPoly,
    /// Certified error of the rounded polynomial against `f`.
    pub rounded_norm: NormResult,
    pub eval: EvalErrorBound,
}

fn monotone_steps(coeffs: &[FpCoeff], floor: &[FpKind]) -> Vec<FpKind> {
    let mut prev = coeffs[0].kind;
    coeffs[1..]
        .iter()
        .zip(floor)
        .map(|(c, &f)| {
            prev = prev.max(c.kind).max(f);
            prev
        })
        .collect()
}

/// Picks coefficient formats so that rounding moves the error by at most
/// `eps_bar / (4 terms)` per coefficient, then operation formats so that
/// the round-off bound stays below `eps_bar / 4`, and checks the rounded
/// polynomial with the certified norm.
pub fn assign_formats(p: &Poly, spec: &ApproxSpec, zero_mult: u32) -> Result<Assignment> {
    let prec = spec.prec;
    let terms = p.basis().len() as u32;
    let budget = Float::with_val(prec, &spec.eps_bar / (4 * terms));
    let sens = sensitivities(p, spec);
    let mut kinds: Vec<FpKind> = Vec::with_capacity(p.basis().len());
    for ((_, c), s) in p.terms().zip(&sens) {
        let mut chosen = None;
        for kind in FpKind::ALL {
            let parts = round_expansion(c, kind)?;
            let moved = Float::with_val(prec, c - super::format::expansion_value(&parts)).abs() * s;
            if moved <= budget {
                chosen = Some(kind);
                break;
            }
        }
        kinds.push(chosen.ok_or_else(|| Error::FormatOverflow(format!("coefficient {c} needs more than {}", FpKind::TD)))?);
    }
    let eval_budget = Float::with_val(prec, &spec.eps_bar / 4u32);
    for _ in 0..(3 * terms as usize + 1) {
        let mut coeffs: Vec<FpCoeff> = p
            .terms()
            .zip(&kinds)
            .map(|((e, c), &kind)| Ok(FpCoeff { exponent: e, kind, parts: round_expansion(c, kind)? }))
            .collect::<Result<_>>()?;
        coeffs.sort_by(|a, b| b.exponent.cmp(&a.exponent));
        let (fp, eval) = choose_steps(coeffs, &spec.interval, &eval_budget, prec)?;
        let g = error_handle(&fp.exact_poly(), &spec.f, &spec.mode, zero_mult)?;
        let rounded_norm = norm::infnorm_certified(&g, &spec.interval, norm::DEFAULT_TOL_LOG2, prec)?;
        if rounded_norm.upper_bound <= spec.eps_bar {
            return Ok(Assignment { fp, rounded_norm, eval });
        }
        // Widen the coefficient whose rounding moved the error most.
        let worst = p
            .terms()
            .zip(&kinds)
            .zip(&sens)
            .enumerate()
            .filter(|(_, ((_, k), _))| **k != FpKind::TD)
            .map(|(idx, (((_, c), k), s))| {
                let parts = round_expansion(c, *k).unwrap_or_default();
                let moved = Float::with_val(prec, c - super::format::expansion_value(&parts)).abs() * s;
                (idx, moved)
            })
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal).then(b.0.cmp(&a.0)));
        match worst {
            Some((idx, _)) => kinds[idx] = kinds[idx].next().expect("not TD"),
            None => break,
        }
    }
    Err(Error::FormatOverflow(format!(
        "rounded coefficients cannot meet 2^{:.1}",
        crate::mparith::log2_abs(&spec.eps_bar)
    )))
}

/// Narrowest monotone operation formats meeting `budget`, widening the
/// largest contributor first.
fn choose_steps(coeffs: Vec<FpCoeff>, i: &IvBox, budget: &Float, prec: Prec) -> Result<(FpPoly, EvalErrorBound)> {
    let n = coeffs.len() - 1;
    let mut floor = vec![FpKind::D; n];
    let mut final_floor = FpKind::D;
    loop {
        let steps = monotone_steps(&coeffs, &floor);
        let last = steps.last().copied().unwrap_or(coeffs[0].kind);
        let final_kind = last.max(final_floor);
        let fp = FpPoly::new(coeffs.clone(), &steps, final_kind)?;
        let eval = eval_error_bound(&fp, i, prec)?;
        if eval.bound <= *budget {
            return Ok((fp, eval));
        }
        let pick = eval
            .per_step
            .iter()
            .enumerate()
            .filter(|(_, s)| s.kind != FpKind::TD)
            .max_by(|a, b| {
                a.1.contribution.partial_cmp(&b.1.contribution).unwrap_or(std::cmp::Ordering::Equal).then(b.0.cmp(&a.0))
            })
            .map(|(k, s)| (k, s.kind));
        match pick {
            Some((k, kind)) if k < n => floor[k] = kind.next().expect("not TD"),
            Some((_, kind)) => final_floor = kind.next().expect("not TD"),
            None => {
                return Err(Error::FormatOverflow(format!(
                    "triple-double evaluation error 2^{:.1} exceeds the budget",
                    crate::mparith::log2_abs(&eval.bound)
                )))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(e: u32, v: f64) -> FpCoeff {
        FpCoeff { exponent: e, kind: FpKind::D, parts: vec![v] }
    }

    #[test]
    fn single_coefficient_has_no_rounding() {
        let fp = FpPoly::new(vec![d(0, 1.5)], &[], FpKind::D).unwrap();
        let b = eval_error_bound(&fp, &IvBox::from_f64s(0.0, 1.0).unwrap(), 128).unwrap();
        assert!(b.bound.is_zero());
        let fp = FpPoly::new(vec![d(1, 1.5)], &[], FpKind::D).unwrap();
        let b = eval_error_bound(&fp, &IvBox::from_f64s(0.5, 1.0).unwrap(), 128).unwrap();
        assert!(b.bound <= pow2(-52, 10));
    }

    #[test]
    fn bound_dominates_each_contribution() {
        let fp = FpPoly::new(vec![d(0, 1.0), d(1, 0.5), d(2, 0.25)], &[FpKind::D, FpKind::D], FpKind::D).unwrap();
        let b = eval_error_bound(&fp, &IvBox::from_f64s(0.0, 0.5).unwrap(), 128).unwrap();
        assert!(b.bound > 0 && b.bound < pow2(-50, 10));
        for s in &b.per_step {
            assert!(s.contribution <= b.bound);
        }
    }

    #[test]
    fn cancelling_machine_coefficients_are_rejected() {
        let fp = FpPoly::new(vec![d(0, 1.0), d(1, -4.0)], &[FpKind::D], FpKind::D).unwrap();
        let r = eval_error_bound(&fp, &IvBox::from_f64s(0.0, 0.5).unwrap(), 128);
        assert_eq!(r, Err(Error::CancellationReintroduced(0)));
    }
}
