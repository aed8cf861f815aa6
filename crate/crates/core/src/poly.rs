//! Monomial bases and polynomials over them.

use std::fmt;
use std::sync::Arc;

use rug::Float;

use crate::error::{Error, Result};
use crate::functions::{FunctionHandle, RealFunction};
use crate::mparith::taylor::Series;
use crate::mparith::{IvBox, Prec};

/// A non-empty, strictly increasing set of exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MonomialBasis {
    exps: Vec<u32>,
}

impl MonomialBasis {
    pub fn new(exps: impl IntoIterator<Item = u32>) -> Result<MonomialBasis> {
        let mut exps: Vec<u32> = exps.into_iter().collect();
        exps.sort_unstable();
        exps.dedup();
        if exps.is_empty() {
            return Err(Error::InvalidArgument("empty monomial basis".into()));
        }
        Ok(MonomialBasis { exps })
    }

    /// `{x^lo, ..., x^hi}`.
    pub fn full(lo: u32, hi: u32) -> MonomialBasis {
        assert!(lo <= hi, "empty exponent range");
        MonomialBasis { exps: (lo..=hi).collect() }
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exps
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn degree(&self) -> u32 {
        *self.exps.last().expect("non-empty")
    }

    pub fn lowest(&self) -> u32 {
        self.exps[0]
    }

    pub fn contains(&self, e: u32) -> bool {
        self.exps.binary_search(&e).is_ok()
    }

    pub fn position(&self, e: u32) -> Option<usize> {
        self.exps.binary_search(&e).ok()
    }

    /// All exponents even, or all odd.
    pub fn same_parity(&self) -> bool {
        self.exps.iter().all(|e| e % 2 == self.exps[0] % 2)
    }

    pub fn without(&self, drop: &[u32]) -> Result<MonomialBasis> {
        MonomialBasis::new(self.exps.iter().copied().filter(|e| !drop.contains(e)))
    }
}

impl fmt::Display for MonomialBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, e) in self.exps.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "x^{e}")?;
        }
        write!(f, "}}")
    }
}

/// `sum_k c_k x^(e_k)` over a monomial basis; every basis exponent carries a
/// coefficient, possibly zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    basis: MonomialBasis,
    coeffs: Vec<Float>,
}

impl Poly {
    pub fn new(basis: MonomialBasis, coeffs: Vec<Float>) -> Result<Poly> {
        if coeffs.len() != basis.len() {
            return Err(Error::InvalidArgument(format!(
                "{} coefficients for a basis of {} monomials",
                coeffs.len(),
                basis.len()
            )));
        }
        Ok(Poly { basis, coeffs })
    }

    /// Builds a polynomial from dense coefficients `c_0..c_n`, keeping every
    /// exponent.
    pub fn from_dense(coeffs: Vec<Float>) -> Result<Poly> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("empty coefficient list".into()));
        }
        let basis = MonomialBasis::full(0, coeffs.len() as u32 - 1);
        Poly::new(basis, coeffs)
    }

    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    pub fn coeffs(&self) -> &[Float] {
        &self.coeffs
    }

    pub fn degree(&self) -> u32 {
        self.basis.degree()
    }

    /// Coefficient of `x^e`; `None` when `e` is not in the basis.
    pub fn coeff(&self, e: u32) -> Option<&Float> {
        self.basis.position(e).map(|k| &self.coeffs[k])
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &Float)> {
        self.basis.exps.iter().copied().zip(&self.coeffs)
    }

    /// Coefficients of `x^0..x^degree`, zero outside the basis.
    pub fn dense(&self) -> Vec<Float> {
        let prec = self.coeffs.iter().map(Float::prec).max().unwrap_or(53);
        let mut d = vec![Float::new(prec); self.degree() as usize + 1];
        for (e, c) in self.terms() {
            d[e as usize] = c.clone();
        }
        d
    }

    pub fn scale(&self, s: &Float) -> Poly {
        let coeffs = self.coeffs.iter().map(|c| Float::with_val(c.prec().max(s.prec()), c * s)).collect();
        Poly { basis: self.basis.clone(), coeffs }
    }

    /// `p(x) / x^m`; requires every exponent to be at least `m`.
    pub fn shift_down(&self, m: u32) -> Result<Poly> {
        if self.basis.lowest() < m {
            return Err(Error::InvalidArgument(format!("x^{m} does not divide the polynomial")));
        }
        let basis = MonomialBasis { exps: self.basis.exps.iter().map(|e| e - m).collect() };
        Ok(Poly { basis, coeffs: self.coeffs.clone() })
    }

    /// `x^m p(x)`.
    pub fn shift_up(&self, m: u32) -> Poly {
        let basis = MonomialBasis { exps: self.basis.exps.iter().map(|e| e + m).collect() };
        Poly { basis, coeffs: self.coeffs.clone() }
    }

    /// Horner evaluation at a point, rounded to nearest at `prec` per step.
    pub fn eval_f(&self, x: &Float, prec: Prec) -> Float {
        let d = self.dense();
        let mut acc = Float::with_val(prec, &d[d.len() - 1]);
        for c in d.iter().rev().skip(1) {
            acc *= x;
            acc += c;
        }
        acc
    }

    /// Interval Horner evaluation.
    pub fn eval_box(&self, x: &IvBox, prec: Prec) -> IvBox {
        let d = self.dense();
        let mut acc = IvBox::point(d[d.len() - 1].clone()).round_out(prec);
        for c in d.iter().rev().skip(1) {
            acc = acc.mul(x, prec).add_f(c, prec);
        }
        acc
    }

    /// Taylor coefficients at `base` by repeated synthetic division.
    pub fn taylor(&self, base: &IvBox, order: usize, prec: Prec) -> Series {
        let mut work: Vec<IvBox> = self.dense().into_iter().map(IvBox::point).collect();
        let n = work.len();
        let mut out = Vec::with_capacity(order + 1);
        for j in 0..=order {
            if j >= n {
                out.push(IvBox::zero(prec));
                continue;
            }
            // After this pass work[j] holds the j-th Taylor coefficient.
            for i in (j..n - 1).rev() {
                work[i] = work[i].add(&work[i + 1].mul(base, prec), prec);
            }
            out.push(work[j].round_out(prec));
        }
        Series::from_coeffs(out)
    }

    pub fn derivative(&self) -> Option<Poly> {
        let terms: Vec<(u32, Float)> = self
            .terms()
            .filter(|(e, _)| *e > 0)
            .map(|(e, c)| (e - 1, Float::with_val(c.prec() + 32, c * e)))
            .collect();
        if terms.is_empty() {
            return None;
        }
        let basis = MonomialBasis { exps: terms.iter().map(|t| t.0).collect() };
        Some(Poly { basis, coeffs: terms.into_iter().map(|t| t.1).collect() })
    }

    pub fn handle(&self) -> FunctionHandle {
        FunctionHandle::new(PolyFunction(Arc::new(self.clone())))
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (e, c)) in self.terms().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{} * x^{e}", crate::mparith::format_hex(c))?;
        }
        Ok(())
    }
}

struct PolyFunction(Arc<Poly>);

impl RealFunction for PolyFunction {
    fn eval(&self, x: &IvBox, prec: Prec) -> Result<IvBox> {
        Ok(self.0.eval_box(x, prec))
    }

    fn derivative(&self) -> Option<Result<Arc<dyn RealFunction>>> {
        let d = match self.0.derivative() {
            Some(d) => d,
            None => Poly::from_dense(vec![Float::new(53)]).expect("non-empty"),
        };
        Some(Ok(Arc::new(PolyFunction(Arc::new(d)))))
    }

    fn taylor(&self, base: &IvBox, order: usize, prec: Prec) -> Option<Result<Series>> {
        Some(Ok(self.0.taylor(base, order, prec)))
    }

    fn label(&self) -> String {
        format!("poly{}", self.0.basis)
    }
}
