use cfpoly::mparith::{pow2, IvBox};
use cfpoly::norm::{default_samples, infnorm_certified, infnorm_fast, DEFAULT_TOL_LOG2};
use cfpoly::poly::Poly;
use proptest::prelude::*;
use rug::Float;

const P: u32 = 128;

fn poly(c: &[f64]) -> Poly {
    Poly::from_dense(c.iter().map(|&v| Float::with_val(P, v)).collect()).unwrap()
}

/// Exact-enough value at an f64 point: Horner at 128 bits.
fn value(c: &[f64], x: f64) -> f64 {
    let mut acc = Float::with_val(P, 0);
    for &k in c.iter().rev() {
        acc = acc * x + k;
    }
    acc.to_f64().abs()
}

/// Max of |g| over `n` equispaced points, in f64 Horner with a bound on its
/// rounding error.
fn brute_max(c: &[f64], lo: f64, hi: f64, n: usize) -> (f64, f64) {
    let mut best = 0.0f64;
    let mut slack = 0.0f64;
    for k in 0..=n {
        let x = lo + (hi - lo) * k as f64 / n as f64;
        let (mut acc, mut abs) = (0.0f64, 0.0f64);
        for &ck in c.iter().rev() {
            acc = acc * x + ck;
            abs = abs * x.abs() + ck.abs();
        }
        if acc.abs() > best {
            best = acc.abs();
            slack = abs * (2 * c.len()) as f64 * f64::EPSILON;
        }
    }
    (best, slack)
}

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 1..8)
}

fn interval() -> impl Strategy<Value = (f64, f64)> {
    (-2.0f64..2.0, 0.01f64..2.0).prop_map(|(a, w)| (a, a + w))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn certified_norm_is_sound(c in coeffs(), (lo, hi) in interval()) {
        let g = poly(&c).handle();
        let i = IvBox::from_f64s(lo, hi).unwrap();
        let r = infnorm_certified(&g, &i, DEFAULT_TOL_LOG2, P).unwrap();
        prop_assert!(r.certified);
        let (brute, slack) = brute_max(&c, lo, hi, 100_000);
        prop_assert!(r.upper_bound.to_f64() >= brute - slack, "upper {} < brute {}", r.upper_bound, brute);
        // The witness is attained: compare with the grid plus the witness's own point.
        let at = value(&c, r.argmax.to_f64());
        let best = brute.max(at);
        prop_assert!(r.lower_witness.to_f64() <= (best + slack) * (1.0 + 2f64.powi(-30)));
        prop_assert!(r.lower_witness <= r.upper_bound);
        prop_assert!(*i.lo() <= r.argmax && r.argmax <= *i.hi());
    }

    #[test]
    fn certified_dominates_fast(c in coeffs(), (lo, hi) in interval()) {
        let g = poly(&c).handle();
        let i = IvBox::from_f64s(lo, hi).unwrap();
        let fast = infnorm_fast(&g, &i, default_samples(c.len()), P).unwrap();
        let cert = infnorm_certified(&g, &i, DEFAULT_TOL_LOG2, P).unwrap();
        prop_assert!(cert.upper_bound >= fast.lower_witness);
    }

    #[test]
    fn certified_bound_is_monotone_in_the_interval(c in coeffs(), (lo, hi) in interval(), s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let g = poly(&c).handle();
        let (s, t) = if s <= t { (s, t) } else { (t, s) };
        let (a, b) = (lo + s * (hi - lo), lo + t * (hi - lo));
        prop_assume!(a < b);
        let inner = infnorm_certified(&g, &IvBox::from_f64s(a, b).unwrap(), DEFAULT_TOL_LOG2, P).unwrap();
        let outer = infnorm_certified(&g, &IvBox::from_f64s(lo, hi).unwrap(), DEFAULT_TOL_LOG2, P).unwrap();
        let tol = Float::with_val(P, 1u32 + pow2(DEFAULT_TOL_LOG2, P));
        prop_assert!(inner.upper_bound <= Float::with_val(P, &outer.upper_bound * &tol));
    }
}

#[test]
fn zero_function_has_zero_norm() {
    let g = poly(&[0.0]).handle();
    let r = infnorm_certified(&g, &IvBox::from_f64s(-1.0, 3.0).unwrap(), DEFAULT_TOL_LOG2, P).unwrap();
    assert!(r.upper_bound.is_zero());
}

#[test]
fn chebyshev_polynomial_norm() {
    // T5 on [-1, 1] has norm exactly 1.
    let g = poly(&[0.0, 5.0, 0.0, -20.0, 0.0, 16.0]).handle();
    let r = infnorm_certified(&g, &IvBox::from_f64s(-1.0, 1.0).unwrap(), -30, P).unwrap();
    assert!(r.upper_bound >= 1 && r.upper_bound <= 1.0 + 1e-8);
    assert!(r.lower_witness <= 1 && r.lower_witness >= 1.0 - 1e-8);
}

/// `exp` seen only through interval evaluation and exact derivatives.
struct OpaqueExp(u8);

impl cfpoly::functions::RealFunction for OpaqueExp {
    fn eval(&self, x: &IvBox, prec: u32) -> cfpoly::Result<IvBox> {
        Ok(x.exp(prec))
    }

    fn derivative(&self) -> Option<cfpoly::Result<std::sync::Arc<dyn cfpoly::functions::RealFunction>>> {
        (self.0 < 2).then(|| Ok(std::sync::Arc::new(OpaqueExp(self.0 + 1)) as _))
    }

    fn label(&self) -> String {
        "opaque exp".into()
    }
}

#[test]
fn black_box_with_derivatives_matches_taylor_forms() {
    use cfpoly::functions::{parse, to_handle, FunctionHandle};
    use cfpoly::norm::{error_handle, ErrorMode};
    let mut c = vec![Float::with_val(P, 1)];
    for k in 1..8u32 {
        let prev = c[c.len() - 1].clone();
        c.push(prev / k);
    }
    let p = Poly::from_dense(c).unwrap();
    let i = IvBox::from_f64s(0.0, 0.0625).unwrap();
    let opaque = FunctionHandle::new(OpaqueExp(0));
    let parsed = to_handle(parse("exp(x)").unwrap());
    for mode in [ErrorMode::Relative, ErrorMode::Absolute] {
        let a = infnorm_certified(&error_handle(&p, &opaque, &mode, 0).unwrap(), &i, DEFAULT_TOL_LOG2, P).unwrap();
        let b = infnorm_certified(&error_handle(&p, &parsed, &mode, 0).unwrap(), &i, DEFAULT_TOL_LOG2, P).unwrap();
        assert!(a.certified && b.certified);
        let ratio = (a.upper_bound.clone() / &b.upper_bound).to_f64();
        assert!((ratio - 1.0).abs() < 0.01, "{} vs {}", a.upper_bound, b.upper_bound);
    }
}
