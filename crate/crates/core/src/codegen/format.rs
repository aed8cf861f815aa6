use std::fmt;

use rug::Float;

use crate::error::{Error, Result};
use crate::poly::{MonomialBasis, Poly};

/// Precision wide enough to hold any sum of three binary64 values exactly.
pub const EXACT_PREC: u32 = 2200;

/// Machine format of a coefficient or of a Horner operation: one, two or
/// three binary64 values as an unevaluated sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FpKind {
    D,
    DD,
    TD,
}

impl FpKind {
    pub const ALL: [FpKind; 3] = [FpKind::D, FpKind::DD, FpKind::TD];

    pub fn parts(self) -> usize {
        match self {
            FpKind::D => 1,
            FpKind::DD => 2,
            FpKind::TD => 3,
        }
    }

    /// Nominal significand width.
    pub fn precision(self) -> u32 {
        match self {
            FpKind::D => 53,
            FpKind::DD => 107,
            FpKind::TD => 161,
        }
    }

    /// Relative error bound of one addition or multiplication, as a power
    /// of two.
    pub fn unit_roundoff_log2(self) -> i32 {
        match self {
            FpKind::D => -53,
            FpKind::DD => -102,
            FpKind::TD => -149,
        }
    }

    pub fn next(self) -> Option<FpKind> {
        match self {
            FpKind::D => Some(FpKind::DD),
            FpKind::DD => Some(FpKind::TD),
            FpKind::TD => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FpKind::D => "double",
            FpKind::DD => "double-double",
            FpKind::TD => "triple-double",
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            FpKind::D => "D",
            FpKind::DD => "DD",
            FpKind::TD => "TD",
        }
    }

    pub fn from_parts(n: usize) -> Option<FpKind> {
        match n {
            1 => Some(FpKind::D),
            2 => Some(FpKind::DD),
            3 => Some(FpKind::TD),
            _ => None,
        }
    }
}

impl fmt::Display for FpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short())
    }
}

/// Rounds `x` to nearest, one binary64 component at a time.
pub fn round_expansion(x: &Float, kind: FpKind) -> Result<Vec<f64>> {
    let mut rest = Float::with_val(EXACT_PREC.max(x.prec()), x);
    let mut parts = Vec::with_capacity(kind.parts());
    for _ in 0..kind.parts() {
        let v = rest.to_f64();
        if !v.is_finite() {
            return Err(Error::FormatOverflow(format!("{} does not fit in binary64", rest.to_f64())));
        }
        if v != 0.0 && v.abs() < f64::MIN_POSITIVE {
            // Subnormal components lose the expansion's precision guarantee.
            return Err(Error::FormatOverflow("expansion component underflows".into()));
        }
        parts.push(v);
        rest -= v;
    }
    Ok(parts)
}

/// Exact value of an expansion.
pub fn expansion_value(parts: &[f64]) -> Float {
    let mut s = Float::new(EXACT_PREC);
    for &p in parts {
        s += p;
    }
    s
}

#[derive(Clone, Debug, PartialEq)]
pub struct FpCoeff {
    pub exponent: u32,
    pub kind: FpKind,
    /// Components, largest first; `kind.parts()` of them.
    pub parts: Vec<f64>,
}

impl FpCoeff {
    pub fn value(&self) -> Float {
        expansion_value(&self.parts)
    }
}

/// One Horner step `acc = acc * x^power + c_exponent` in format `kind`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HornerOp {
    pub exponent: u32,
    pub power: u32,
    pub kind: FpKind,
}

/// A polynomial with machine coefficients and per-operation formats.
///
/// Evaluation starts from the leading coefficient, performs `steps` in
/// order and finally multiplies by `x^lowest` in `final_kind` when the
/// lowest exponent is positive.
#[derive(Clone, Debug, PartialEq)]
pub struct FpPoly {
    pub basis: MonomialBasis,
    /// Ordered by decreasing exponent.
    pub coeffs: Vec<FpCoeff>,
    pub steps: Vec<HornerOp>,
    pub final_kind: FpKind,
}

impl FpPoly {
    /// Builds the Horner schedule for `coeffs`, with `step_kinds[k]` for the
    /// step adding the `k+1`-th largest exponent. Formats must not narrow
    /// along the evaluation, nor drop below the coefficient being added.
    pub fn new(mut coeffs: Vec<FpCoeff>, step_kinds: &[FpKind], final_kind: FpKind) -> Result<FpPoly> {
        coeffs.sort_by(|a, b| b.exponent.cmp(&a.exponent));
        let basis = MonomialBasis::new(coeffs.iter().map(|c| c.exponent))?;
        if basis.len() != coeffs.len() {
            return Err(Error::InvalidArgument("duplicate exponents".into()));
        }
        if step_kinds.len() + 1 != coeffs.len() {
            return Err(Error::InvalidArgument(format!(
                "{} step formats for {} coefficients",
                step_kinds.len(),
                coeffs.len()
            )));
        }
        for c in &coeffs {
            if c.parts.len() != c.kind.parts() || c.parts.iter().any(|p| !p.is_finite()) {
                return Err(Error::InvalidArgument(format!("malformed coefficient of x^{}", c.exponent)));
            }
        }
        let mut prev = coeffs[0].kind;
        for (c, &k) in coeffs[1..].iter().zip(step_kinds) {
            if k < prev || k < c.kind {
                return Err(Error::InvalidArgument(format!(
                    "step adding x^{} in {k} is narrower than its inputs",
                    c.exponent
                )));
            }
            prev = k;
        }
        if coeffs[coeffs.len() - 1].exponent > 0 && final_kind < prev {
            return Err(Error::InvalidArgument("final multiplication narrower than the accumulator".into()));
        }
        let steps = coeffs
            .windows(2)
            .zip(step_kinds)
            .map(|(w, &kind)| HornerOp { exponent: w[1].exponent, power: w[0].exponent - w[1].exponent, kind })
            .collect();
        Ok(FpPoly { basis, coeffs, steps, final_kind })
    }

    pub fn lowest(&self) -> u32 {
        self.basis.lowest()
    }

    /// Format of the evaluation result.
    pub fn result_kind(&self) -> FpKind {
        if self.lowest() > 0 {
            self.final_kind
        } else {
            self.steps.last().map_or(self.coeffs[0].kind, |s| s.kind)
        }
    }

    pub fn coeff(&self, e: u32) -> Option<&FpCoeff> {
        self.coeffs.iter().find(|c| c.exponent == e)
    }

    /// The polynomial whose coefficients are the exact expansion values.
    pub fn exact_poly(&self) -> Poly {
        let mut terms: Vec<&FpCoeff> = self.coeffs.iter().collect();
        terms.sort_by_key(|c| c.exponent);
        Poly::new(self.basis.clone(), terms.iter().map(|c| c.value()).collect()).expect("basis matches")
    }

    /// Format of the operation feeding each coefficient's addition, the
    /// leading coefficient excluded.
    pub fn step_kinds(&self) -> Vec<FpKind> {
        self.steps.iter().map(|s| s.kind).collect()
    }
}

/// Left-to-right binary powering schedule for `x^d`: `true` squares, then
/// `false` multiplies by `x`. Empty for `d <= 1`.
pub fn power_schedule(d: u32) -> Vec<bool> {
    let mut ops = Vec::new();
    if d <= 1 {
        return ops;
    }
    let bits = 32 - d.leading_zeros();
    for b in (0..bits - 1).rev() {
        ops.push(true);
        if d >> b & 1 == 1 {
            ops.push(false);
        }
    }
    ops
}

/// Multiplications performed by [`power_schedule`].
pub fn power_mults(d: u32) -> u32 {
    power_schedule(d).len() as u32
}
