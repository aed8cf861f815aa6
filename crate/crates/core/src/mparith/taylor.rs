//! Truncated Taylor series with interval coefficients.
//!
//! A [`Series`] of order `k` holds enclosures of `g^(j)(x)/j!` for
//! `j = 0..=k`. When the expansion point is itself a box, every coefficient
//! encloses the corresponding normalized derivative over the whole box, which
//! is what Lagrange remainder bounds need.

use rug::Float;

use super::{IvBox, Prec};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    c: Vec<IvBox>,
}

impl Series {
    pub fn from_coeffs(c: Vec<IvBox>) -> Series {
        assert!(!c.is_empty(), "a series has at least one coefficient");
        Series { c }
    }

    pub fn constant(v: IvBox, order: usize, prec: Prec) -> Series {
        let mut c = vec![IvBox::zero(prec); order + 1];
        c[0] = v;
        Series { c }
    }

    /// The independent variable expanded at `base`.
    pub fn variable(base: IvBox, order: usize, prec: Prec) -> Series {
        let mut s = Series::constant(base, order, prec);
        if order >= 1 {
            s.c[1] = IvBox::one(prec);
        }
        s
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn coeff(&self, j: usize) -> &IvBox {
        &self.c[j]
    }

    pub fn coeffs(&self) -> &[IvBox] {
        &self.c
    }

    pub fn into_coeffs(self) -> Vec<IvBox> {
        self.c
    }

    fn zip(&self, o: &Series, f: impl Fn(&IvBox, &IvBox) -> IvBox) -> Series {
        debug_assert_eq!(self.c.len(), o.c.len());
        Series { c: self.c.iter().zip(&o.c).map(|(a, b)| f(a, b)).collect() }
    }

    pub fn add(&self, o: &Series, prec: Prec) -> Series {
        self.zip(o, |a, b| a.add(b, prec))
    }

    pub fn sub(&self, o: &Series, prec: Prec) -> Series {
        self.zip(o, |a, b| a.sub(b, prec))
    }

    pub fn neg(&self) -> Series {
        Series { c: self.c.iter().map(IvBox::neg).collect() }
    }

    pub fn scale(&self, s: &IvBox, prec: Prec) -> Series {
        Series { c: self.c.iter().map(|a| a.mul(s, prec)).collect() }
    }

    pub fn add_const(&self, v: &IvBox, prec: Prec) -> Series {
        let mut r = self.clone();
        r.c[0] = r.c[0].add(v, prec);
        r
    }

    /// Cauchy product truncated to the common order.
    pub fn mul(&self, o: &Series, prec: Prec) -> Series {
        let n = self.c.len();
        let mut c = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = self.c[0].mul(&o.c[k], prec);
            for j in 1..=k {
                acc = acc.add(&self.c[j].mul(&o.c[k - j], prec), prec);
            }
            c.push(acc);
        }
        Series { c }
    }

    pub fn div(&self, o: &Series, prec: Prec) -> Result<Series> {
        let n = self.c.len();
        let d0 = &o.c[0];
        if d0.contains_zero() {
            return Err(Error::Domain("series division by a box containing zero".into()));
        }
        let mut w: Vec<IvBox> = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = self.c[k].clone();
            for j in 1..=k {
                acc = acc.sub(&o.c[j].mul(&w[k - j], prec), prec);
            }
            w.push(acc.div(d0, prec)?);
        }
        Ok(Series { c: w })
    }

    pub fn exp(&self, prec: Prec) -> Series {
        let n = self.c.len();
        let mut v = vec![self.c[0].exp(prec)];
        for k in 1..n {
            let mut acc = IvBox::zero(prec);
            for j in 1..=k {
                acc = acc.add(&self.c[j].mul_i(j as i64, prec).mul(&v[k - j], prec), prec);
            }
            v.push(acc.div_i(k as i64, prec));
        }
        Series { c: v }
    }

    pub fn log(&self, prec: Prec) -> Result<Series> {
        let n = self.c.len();
        let u0 = &self.c[0];
        let mut v = vec![u0.log(prec)?];
        for k in 1..n {
            let mut acc = IvBox::zero(prec);
            for j in 1..k {
                acc = acc.add(&v[j].mul_i(j as i64, prec).mul(&self.c[k - j], prec), prec);
            }
            let t = self.c[k].sub(&acc.div_i(k as i64, prec), prec);
            v.push(t.div(u0, prec)?);
        }
        Ok(Series { c: v })
    }

    /// `(sin u, cos u)`.
    pub fn sin_cos(&self, prec: Prec) -> (Series, Series) {
        let n = self.c.len();
        let mut s = vec![self.c[0].sin(prec)];
        let mut c = vec![self.c[0].cos(prec)];
        for k in 1..n {
            let mut acc_s = IvBox::zero(prec);
            let mut acc_c = IvBox::zero(prec);
            for j in 1..=k {
                let ju = self.c[j].mul_i(j as i64, prec);
                acc_s = acc_s.add(&ju.mul(&c[k - j], prec), prec);
                acc_c = acc_c.sub(&ju.mul(&s[k - j], prec), prec);
            }
            s.push(acc_s.div_i(k as i64, prec));
            c.push(acc_c.div_i(k as i64, prec));
        }
        (Series { c: s }, Series { c })
    }

    pub fn sqrt(&self, prec: Prec) -> Result<Series> {
        let n = self.c.len();
        if n > 1 && !self.c[0].is_positive() {
            return Err(Error::Domain("series sqrt at a non-positive box".into()));
        }
        let v0 = self.c[0].sqrt(prec)?;
        let two_v0 = v0.mul_i(2, prec);
        let mut v = vec![v0];
        for k in 1..n {
            let mut acc = self.c[k].clone();
            for j in 1..k {
                acc = acc.sub(&v[j].mul(&v[k - j], prec), prec);
            }
            v.push(acc.div(&two_v0, prec)?);
        }
        Ok(Series { c: v })
    }

    /// Uses `erf' = 2/sqrt(pi) * exp(-u^2)`.
    pub fn erf(&self, prec: Prec) -> Series {
        let n = self.c.len();
        let two_over_sqrt_pi = IvBox::pi(prec)
            .sqrt(prec)
            .expect("pi > 0")
            .recip(prec)
            .expect("sqrt(pi) > 0")
            .mul_i(2, prec);
        let w = self.mul(self, prec).neg().exp(prec).scale(&two_over_sqrt_pi, prec);
        let mut v = vec![self.c[0].erf(prec)];
        for k in 1..n {
            let mut acc = IvBox::zero(prec);
            for j in 1..=k {
                acc = acc.add(&self.c[j].mul_i(j as i64, prec).mul(&w.c[k - j], prec), prec);
            }
            v.push(acc.div_i(k as i64, prec));
        }
        Series { c: v }
    }

    pub fn powi(&self, k: i32, prec: Prec) -> Result<Series> {
        let order = self.order();
        if k < 0 {
            let p = self.powi(-k, prec)?;
            return Series::constant(IvBox::one(prec), order, prec).div(&p, prec);
        }
        let mut result = Series::constant(IvBox::one(prec), order, prec);
        let mut base = self.clone();
        let mut e = k as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base, prec);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base, prec);
            }
        }
        // The constant term is better served by the direct power.
        result.c[0] = self.c[0].powi(k, prec)?;
        Ok(result)
    }

    /// Interval Horner evaluation of the truncated series at offset `t`.
    pub fn eval(&self, t: &IvBox, prec: Prec) -> IvBox {
        let mut acc = self.c[self.c.len() - 1].clone();
        for a in self.c.iter().rev().skip(1) {
            acc = acc.mul(t, prec).add(a, prec);
        }
        acc
    }

    /// Drops coefficients of order `j < m` and shifts down: the series of
    /// `g(x)/x^m` around zero, given that those coefficients vanish there.
    pub fn shift_down(&self, m: usize) -> Series {
        Series { c: self.c[m..].to_vec() }
    }

    pub fn truncate(&self, order: usize) -> Series {
        Series { c: self.c[..=order].to_vec() }
    }

    pub fn mags(&self) -> Vec<Float> {
        self.c.iter().map(IvBox::mag).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::Rational;

    const P: Prec = 128;

    fn close(b: &IvBox, v: &Rational) -> bool {
        let f = Float::with_val(256, v);
        b.contains(&f) || (Float::with_val(256, b.mid(256) - &f).abs() < 1e-30)
    }

    #[test]
    fn exp_series_at_zero_is_inverse_factorials() {
        let x = Series::variable(IvBox::zero(P), 6, P);
        let e = x.exp(P);
        let mut fact = Rational::from(1);
        for j in 0..=6u32 {
            if j > 0 {
                fact *= j;
            }
            assert!(e.coeff(j as usize).contains(&Float::with_val(P, fact.clone().recip())));
        }
    }

    #[test]
    fn sin_cos_and_log_agree_with_known_expansions() {
        let x = Series::variable(IvBox::zero(P), 5, P);
        let (s, c) = x.sin_cos(P);
        assert!(close(s.coeff(3), &Rational::from((-1, 6))));
        assert!(close(c.coeff(4), &Rational::from((1, 24))));
        let one_plus_x = x.add_const(&IvBox::one(P), P);
        let l = one_plus_x.log(P).unwrap();
        assert!(close(l.coeff(3), &Rational::from((1, 3))));
        assert!(close(l.coeff(4), &Rational::from((-1, 4))));
        let r = one_plus_x.sqrt(P).unwrap();
        assert!(close(r.coeff(2), &Rational::from((-1, 8))));
    }

    #[test]
    fn erf_series_at_zero() {
        // erf x = 2/sqrt(pi) (x - x^3/3 + x^5/10 - ...)
        let x = Series::variable(IvBox::zero(P), 5, P);
        let e = x.erf(P);
        let k = 2.0 / std::f64::consts::PI.sqrt();
        assert!((e.coeff(1).mid(P).to_f64() - k).abs() < 1e-15);
        assert!((e.coeff(3).mid(P).to_f64() + k / 3.0).abs() < 1e-15);
        assert!((e.coeff(5).mid(P).to_f64() - k / 10.0).abs() < 1e-15);
        assert!(e.coeff(2).contains_zero());
    }

    #[test]
    fn division_round_trips_multiplication() {
        let x = Series::variable(IvBox::from_f64(0.5), 6, P);
        let a = x.exp(P);
        let b = x.sin_cos(P).1;
        let q = a.mul(&b, P).div(&b, P).unwrap();
        for j in 0..=6 {
            let d = Float::with_val(P, q.coeff(j).mid(P) - a.coeff(j).mid(P));
            assert!(d.abs() < 1e-30);
        }
    }

    #[test]
    fn powers_match_repeated_products() {
        let x = Series::variable(IvBox::from_f64(0.25), 4, P);
        let p3 = x.powi(3, P).unwrap();
        // (0.25 + t)^3 = 1/64 + 3/16 t + 3/4 t^2 + t^3
        assert!(close(p3.coeff(1), &Rational::from((3, 16))));
        assert!(close(p3.coeff(2), &Rational::from((3, 4))));
        assert!(close(p3.coeff(3), &Rational::from(1)));
        let pm1 = x.powi(-1, P).unwrap();
        assert!(close(pm1.coeff(1), &Rational::from(-16)));
    }

    #[test]
    fn box_base_encloses_point_bases() {
        let bx = IvBox::from_f64s(0.1, 0.2).unwrap();
        let sb = Series::variable(bx, 8, P).exp(P).sin_cos(P).0;
        for t in [0.1, 0.13, 0.2] {
            let sp = Series::variable(IvBox::from_f64(t), 8, P).exp(P).sin_cos(P).0;
            for j in 0..=8 {
                assert!(sp.coeff(j).is_subset_of(sb.coeff(j)), "t={t} j={j}");
            }
        }
    }
}
