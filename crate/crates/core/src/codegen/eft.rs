//! Error-free transformations and expansion arithmetic on binary64, in the
//! exact operation order of the emitted C helpers. Rust never contracts
//! `a * b + c` into an FMA, so results match the C code bit for bit when it
//! is compiled without contraction.

use super::format::{power_schedule, FpKind, FpPoly};

pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Requires `|a| >= |b|` or `a == 0`.
pub fn fast_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

/// Veltkamp splitting into two 26-bit halves.
pub fn split(a: f64) -> (f64, f64) {
    let c = 134217729.0 * a;
    let hi = c - (c - a);
    (hi, a - hi)
}

/// Dekker's exact product.
pub fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    let e = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
    (p, e)
}

pub fn dd_add(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    let (s1, s2) = two_sum(a[0], b[0]);
    let (t1, t2) = two_sum(a[1], b[1]);
    let s2 = s2 + t1;
    let (s1, s2) = fast_two_sum(s1, s2);
    let s2 = s2 + t2;
    let (s1, s2) = fast_two_sum(s1, s2);
    [s1, s2]
}

pub fn dd_mul(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    let (p, e) = two_prod(a[0], b[0]);
    let e = e + (a[0] * b[1] + a[1] * b[0]);
    let (p, e) = fast_two_sum(p, e);
    [p, e]
}

pub fn dd_mul_d(a: [f64; 2], b: f64) -> [f64; 2] {
    let (p, e) = two_prod(a[0], b);
    let e = e + a[1] * b;
    let (p, e) = fast_two_sum(p, e);
    [p, e]
}

/// One pass of cascaded `two_sum` from the tail: `v[0]` ends up holding
/// the rounded sum.
fn vec_sum(v: &mut [f64]) {
    for i in (1..v.len()).rev() {
        let (s, e) = two_sum(v[i - 1], v[i]);
        v[i - 1] = s;
        v[i] = e;
    }
}

/// Compresses terms listed by decreasing expected magnitude into a
/// three-component expansion.
pub fn td_compress(v: &mut [f64]) -> [f64; 3] {
    vec_sum(v);
    vec_sum(v);
    let r0 = v[0];
    vec_sum(&mut v[1..]);
    let r1 = v[1];
    let mut r2 = 0.0;
    for &t in &v[2..] {
        r2 += t;
    }
    let (r0, r1) = fast_two_sum(r0, r1);
    let (r1, r2) = fast_two_sum(r1, r2);
    [r0, r1, r2]
}

pub fn td_add(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    let mut v = [a[0], b[0], a[1], b[1], a[2], b[2]];
    td_compress(&mut v)
}

pub fn td_mul(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    let (p00, e00) = two_prod(a[0], b[0]);
    let (p01, e01) = two_prod(a[0], b[1]);
    let (p10, e10) = two_prod(a[1], b[0]);
    let mut v = [p00, e00, p01, p10, e01, e10, a[0] * b[2], a[2] * b[0], a[1] * b[1]];
    td_compress(&mut v)
}

pub fn td_mul_d(a: [f64; 3], b: f64) -> [f64; 3] {
    let (p0, e0) = two_prod(a[0], b);
    let (p1, e1) = two_prod(a[1], b);
    let mut v = [p0, e0, p1, e1, a[2] * b];
    td_compress(&mut v)
}

/// An expansion of up to three components; unused tail entries are zero.
pub type Acc = [f64; 3];

/// `x^d` in format `kind` along [`power_schedule`].
pub fn power(x: f64, d: u32, kind: FpKind) -> Acc {
    let mut r = [x, 0.0, 0.0];
    for square in power_schedule(d) {
        r = match kind {
            FpKind::D => [r[0] * if square { r[0] } else { x }, 0.0, 0.0],
            FpKind::DD => {
                let v = if square { dd_mul([r[0], r[1]], [r[0], r[1]]) } else { dd_mul_d([r[0], r[1]], x) };
                [v[0], v[1], 0.0]
            }
            FpKind::TD => {
                if square {
                    td_mul(r, r)
                } else {
                    td_mul_d(r, x)
                }
            }
        };
    }
    r
}

/// `a * b` in format `kind`.
pub fn mul(a: Acc, b: Acc, kind: FpKind) -> Acc {
    match kind {
        FpKind::D => [a[0] * b[0], 0.0, 0.0],
        FpKind::DD => {
            let v = dd_mul([a[0], a[1]], [b[0], b[1]]);
            [v[0], v[1], 0.0]
        }
        FpKind::TD => td_mul(a, b),
    }
}

/// `a + b` in format `kind`.
pub fn add(a: Acc, b: Acc, kind: FpKind) -> Acc {
    match kind {
        FpKind::D => [a[0] + b[0], 0.0, 0.0],
        FpKind::DD => {
            let v = dd_add([a[0], a[1]], [b[0], b[1]]);
            [v[0], v[1], 0.0]
        }
        FpKind::TD => td_add(a, b),
    }
}

fn widen(parts: &[f64]) -> Acc {
    let mut a = [0.0; 3];
    a[..parts.len()].copy_from_slice(parts);
    a
}

/// Evaluates `fp` at `x` exactly as the emitted C function does; returns
/// the result components (`fp.result_kind().parts()` of them are
/// meaningful).
pub fn simulate(fp: &FpPoly, x: f64) -> Acc {
    let mut acc = widen(&fp.coeffs[0].parts);
    for (step, c) in fp.steps.iter().zip(&fp.coeffs[1..]) {
        let p = power(x, step.power, step.kind);
        acc = add(mul(acc, p, step.kind), widen(&c.parts), step.kind);
    }
    if fp.lowest() > 0 {
        let p = power(x, fp.lowest(), fp.final_kind);
        acc = mul(acc, p, fp.final_kind);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::Float;

    fn exact(parts: &[f64]) -> Float {
        let mut s = Float::new(2200);
        for &p in parts {
            s += p;
        }
        s
    }

    #[test]
    fn error_free_transformations_are_exact() {
        let (a, b) = (0.1f64, 1e-17f64);
        let (s, e) = two_sum(a, b);
        assert_eq!(exact(&[s, e]), exact(&[a, b]));
        let (p, e) = two_prod(1.0 / 3.0, 3.0f64.sqrt());
        let want = Float::with_val(200, 1.0 / 3.0) * Float::with_val(200, 3.0f64.sqrt());
        assert_eq!(exact(&[p, e]), want);
    }

    #[test]
    fn expansion_products_are_accurate() {
        let third = Float::with_val(400, 1) / 3u32;
        let t = crate::codegen::format::round_expansion(&third, FpKind::TD).unwrap();
        let a = [t[0], t[1], t[2]];
        let sq = td_mul(a, a);
        let want = Float::with_val(400, exact(&t).square_ref());
        let rel = Float::with_val(400, (exact(&sq) - &want) / &want).abs();
        assert!(rel < crate::mparith::pow2(-149, 10), "{rel}");
        let d = dd_mul([t[0], t[1]], [t[0], t[1]]);
        let want = Float::with_val(400, exact(&t[..2]).square_ref());
        let rel = Float::with_val(400, (exact(&d) - &want) / &want).abs();
        assert!(rel < crate::mparith::pow2(-102, 10), "{rel}");
    }
}
