mod common;

use cfpoly::mparith::{format_f64_hex, format_hex, parse_exact, parse_f64_hex, pow2, ElemFn, IvBox};
use proptest::prelude::*;
use rug::{Float, Rational};

fn oracle(f: ElemFn, x: &Float, prec: u32) -> Float {
    match f {
        ElemFn::Exp => common::exp(x, prec),
        ElemFn::Log => common::ln(x, prec),
        ElemFn::Sin => common::sin(x, prec),
        ElemFn::Cos => common::cos(x, prec),
        ElemFn::Sqrt => Float::with_val(prec + 64, x.sqrt_ref()),
        ElemFn::Erf => common::erf(x, prec),
    }
}

fn arg_for(f: ElemFn, u: f64) -> f64 {
    match f {
        ElemFn::Log | ElemFn::Sqrt => 1e-3 + 8.0 * u.abs(),
        _ => 3.0 * u,
    }
}

/// Square root is checked by squaring the bounds exactly.
fn sqrt_contains(b: &IvBox, x: &Float) -> bool {
    let lo2 = Float::with_val(4000, b.lo().square_ref());
    let hi2 = Float::with_val(4000, b.hi().square_ref());
    lo2 <= *x && *x <= hi2
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn point_enclosures_match_the_series_oracle(k in 0usize..6, u in -1.0f64..1.0, prec in 60u32..300) {
        let f = ElemFn::ALL[k];
        let x = Float::with_val(53, arg_for(f, u));
        let b = IvBox::point(x.clone()).elem(f, prec).unwrap();
        if f == ElemFn::Sqrt {
            prop_assert!(sqrt_contains(&b, &x));
        } else {
            let v = oracle(f, &x, 2 * prec);
            let slack = Float::with_val(2 * prec, v.abs_ref()) >> (2 * prec as i32 - 8);
            prop_assert!(Float::with_val(2 * prec + 8, b.lo() - &slack) <= v, "{} at {} lo", f.name(), x);
            prop_assert!(Float::with_val(2 * prec + 8, b.hi() + &slack) >= v, "{} at {} hi", f.name(), x);
        }
        let mag = b.mag();
        if !mag.is_zero() && u.abs() > 1e-3 {
            let w = b.width(prec + 8);
            prop_assert!(w <= mag * pow2(2 - prec as i32, 10), "{} too wide at {}", f.name(), x);
        }
    }

    #[test]
    fn enclosures_tighten_with_precision(k in 0usize..6, a in -1.0f64..1.0, w in 0.0f64..0.5, p1 in 60u32..200, extra in 0u32..200) {
        let f = ElemFn::ALL[k];
        let lo = arg_for(f, a);
        let x = IvBox::from_f64s(lo, lo + w).unwrap();
        let coarse = x.elem(f, p1).unwrap();
        let fine = x.elem(f, p1 + extra).unwrap();
        let ulp = Float::with_val(p1, coarse.mag()) >> (p1 as i32 - 2);
        prop_assert!(fine.is_subset_of(&coarse.widen(&ulp, p1 + extra + 8)));
    }

    #[test]
    fn inclusion_isotonicity(k in 0usize..6, a in -1.0f64..1.0, w in 0.0f64..1.0, s in 0.0f64..1.0, t in 0.0f64..1.0, prec in 53u32..200) {
        let f = ElemFn::ALL[k];
        let lo = arg_for(f, a);
        let y = IvBox::from_f64s(lo, lo + w).unwrap();
        let (s, t) = if s <= t { (s, t) } else { (t, s) };
        let x = IvBox::from_f64s(lo + s * w, lo + t * w).unwrap();
        prop_assert!(x.is_subset_of(&y));
        prop_assert!(x.elem(f, prec).unwrap().is_subset_of(&y.elem(f, prec).unwrap()));
    }

    #[test]
    fn arithmetic_encloses_exact_results(a in -1e6f64..1e6, b in -1e6f64..1e6, c in -1e3f64..1e3, prec in 10u32..120) {
        let (ra, rb, rc) = (Rational::from_f64(a).unwrap(), Rational::from_f64(b).unwrap(), Rational::from_f64(c).unwrap());
        let (x, y, z) = (IvBox::from_f64(a), IvBox::from_f64(b), IvBox::from_f64(c));
        let exact = Rational::from(&ra * &rb) + &rc;
        let got = x.mul(&y, prec).add(&z, prec);
        prop_assert!(*got.lo() <= exact && *got.hi() >= exact);
        if c != 0.0 {
            let q = Rational::from(&ra / &rc);
            let got = x.div(&z, prec).unwrap();
            prop_assert!(*got.lo() <= q && *got.hi() >= q);
        }
    }

    #[test]
    fn hex_round_trip(bits in any::<u64>(), prec in 2u32..400, m in any::<i64>(), e in -3000i32..3000) {
        let x = f64::from_bits(bits);
        prop_assume!(x.is_finite());
        prop_assert_eq!(parse_f64_hex(&format_f64_hex(x)).unwrap().to_bits(), x.to_bits());
        let v = Float::with_val(prec, m) << e;
        let r = parse_exact(&format_hex(&v)).unwrap();
        prop_assert_eq!(Float::with_val(prec, &r), v);
    }
}

#[test]
fn oracle_self_check() {
    let x = Float::with_val(53, 0.75);
    assert!(common::close(&common::sin(&x, 200), &Float::with_val(200, x.sin_ref()), 190));
    assert!(common::close(&common::erf(&x, 300), &Float::with_val(300, x.erf_ref()), 290));
    assert!(common::close(&common::pi(300), &Float::with_val(300, rug::float::Constant::Pi), 295));
    assert!(common::close(&common::ln(&x, 200), &Float::with_val(200, x.ln_ref()), 190));
}

#[test]
fn pi_enclosure() {
    let p = IvBox::pi(300);
    let v = common::pi(600);
    assert!(*p.lo() <= v && *p.hi() >= v);
}
