//! Range and sup-norm estimation over an interval.
//!
//! [`infnorm_fast`] samples on a Chebyshev grid and polishes local maxima;
//! it is uncertified. [`range_bounds`] and [`infnorm_certified`] use
//! interval branch and bound with Taylor-form enclosures, falling back to
//! plain interval evaluation for functions that cannot provide Taylor
//! coefficients.

mod error_fn;

pub use error_fn::{approx_at, error_handle, zero_multiplicity, ErrorFunction, ErrorMode};

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use rug::float::Constant;
use rug::Float;

use crate::error::{Error, Result};
use crate::functions::FunctionHandle;
use crate::mparith::{pow2, IvBox, Prec};

/// Subdivision limit for the certified procedures.
pub const MAX_BOXES: usize = 1 << 20;

/// Default relative tolerance of the certified procedures, as a power of two.
pub const DEFAULT_TOL_LOG2: i32 = -10;

/// Order of the Taylor forms used for box enclosures.
pub const TAYLOR_ORDER: usize = 20;

/// Sup-norm estimate: `lower_witness = |g(argmax)|` is attained, and
/// `upper_bound` is rigorous when `certified` is set.
#[derive(Clone, Debug, PartialEq)]
pub struct NormResult {
    pub lower_witness: Float,
    pub upper_bound: Float,
    pub argmax: Float,
    pub certified: bool,
}

impl NormResult {
    pub fn log2_upper(&self) -> f64 {
        crate::mparith::log2_abs(&self.upper_bound)
    }
}

/// Grid size for a polynomial of the given degree: `8 (degree + 2)`, at
/// least 17.
pub fn default_samples(degree: usize) -> usize {
    (8 * (degree + 2)).max(17)
}

/// `n` Chebyshev points of the second kind on `I`, ascending, endpoints
/// included and mirrored exactly about the midpoint.
pub fn chebyshev_grid(i: &IvBox, n: usize, prec: Prec) -> Vec<Float> {
    assert!(n >= 2, "a grid needs both endpoints");
    let mid = i.mid(prec);
    let rad = Float::with_val(prec, i.hi() - i.lo()) / 2u32;
    let pi = Float::with_val(prec, Constant::Pi);
    let mut pts = vec![Float::new(prec); n];
    pts[0] = Float::with_val(prec, i.lo());
    pts[n - 1] = Float::with_val(prec, i.hi());
    for k in 1..(n - 1 + 1) / 2 {
        let c = Float::with_val(prec, &pi * k as u32) / (n - 1) as u32;
        let off = Float::with_val(prec, c.cos() * &rad);
        pts[k] = Float::with_val(prec, &mid - &off);
        pts[n - 1 - k] = Float::with_val(prec, &mid + &off);
    }
    if n % 2 == 1 {
        pts[n / 2] = mid;
    }
    pts
}

/// Taylor-form enclosure of `g` over `x`: coefficients at the midpoint plus
/// a remainder term from the box coefficients, intersected with the plain
/// enclosure of `g(x)`. Without Taylor coefficients a mean-value form is
/// used when `g` has exact derivatives.
pub fn enclose(g: &FunctionHandle, x: &IvBox, prec: Prec) -> Result<IvBox> {
    if x.is_point() {
        return g.eval(x, prec);
    }
    let order = TAYLOR_ORDER;
    let c = x.mid(prec);
    let centre = IvBox::point(c.clone());
    let boxed = match g.taylor(x, order, prec) {
        None => return mean_value(g, x, prec),
        Some(Err(_)) => return g.eval(x, prec),
        Some(Ok(s)) => s,
    };
    let at_centre = match g.taylor(&centre, order - 1, prec) {
        Some(Ok(s)) => s,
        _ => return Ok(boxed.coeff(0).clone()),
    };
    let t = IvBox::new(
        Float::with_val_round(prec, x.lo() - &c, rug::float::Round::Down).0,
        Float::with_val_round(prec, x.hi() - &c, rug::float::Round::Up).0,
    )?;
    let mut acc = boxed.coeff(order).clone();
    for k in (0..order).rev() {
        acc = acc.mul(&t, prec).add(at_centre.coeff(k), prec);
    }
    Ok(acc.intersect(boxed.coeff(0)).unwrap_or(acc))
}

/// `g(c) + g'(X) t` or `g(c) + g'(c) t + g''(X) t^2 / 2` with `t = X - c`,
/// intersected with `g(X)`.
fn mean_value(g: &FunctionHandle, x: &IvBox, prec: Prec) -> Result<IvBox> {
    let plain = g.eval(x, prec)?;
    let Some(Ok(d1)) = g.arc().derivative() else { return Ok(plain) };
    let c = x.mid(prec);
    let centre = IvBox::point(c.clone());
    let t = IvBox::new(
        Float::with_val_round(prec, x.lo() - &c, rug::float::Round::Down).0,
        Float::with_val_round(prec, x.hi() - &c, rug::float::Round::Up).0,
    )?;
    let form = match d1.derivative() {
        Some(Ok(d2)) => {
            let quad = d2.eval(x, prec).map(|v| v.mul(&t.sqr(prec), prec).div_i(2, prec));
            quad.and_then(|q| Ok(g.eval(&centre, prec)?.add(&d1.eval(&centre, prec)?.mul(&t, prec), prec).add(&q, prec)))
        }
        _ => d1.eval(x, prec).and_then(|v| Ok(g.eval(&centre, prec)?.add(&v.mul(&t, prec), prec))),
    };
    match form {
        Ok(v) => Ok(v.intersect(&plain).unwrap_or(v)),
        Err(_) => Ok(plain),
    }
}

fn too_small(x: &IvBox, prec: Prec) -> bool {
    let w = x.width(prec);
    let scale = Float::with_val(prec, x.mag()).max(&pow2(-(prec as i32), 10));
    w <= scale * pow2(-(prec as i32) + 8, 10)
}

fn noise_floor(prec: Prec) -> Float {
    pow2(-(prec as i32) + 24, 10)
}

/// Certified `(inf, sup)` of `g` over `I`.
///
/// Boxes are bisected until every retained enclosure lies within
/// `2^tol_log2` (relative to the range magnitude) of the extreme point
/// values seen so far.
pub fn range_bounds(g: &FunctionHandle, i: &IvBox, tol_log2: i32, prec: Prec) -> Result<(Float, Float)> {
    let tol = pow2(tol_log2, 10);
    let floor = noise_floor(prec);
    let mut best_hi = Float::with_val(prec, f64::NEG_INFINITY);
    let mut best_lo = Float::with_val(prec, f64::INFINITY);
    for x in [i.lo(), i.hi()] {
        let v = g.eval_point(x, prec)?;
        best_hi.max_mut(v.lo());
        best_lo.min_mut(v.hi());
    }
    let mut out_hi = Float::with_val(prec, f64::NEG_INFINITY);
    let mut out_lo = Float::with_val(prec, f64::INFINITY);
    let mut queue = VecDeque::from([i.clone()]);
    let mut processed = 0usize;
    while let Some(x) = queue.pop_front() {
        processed += 1;
        if processed > MAX_BOXES {
            return Err(Error::Numerical(format!("range of {} needs more than 2^20 boxes", g.label())));
        }
        let enc = enclose(g, &x, prec);
        if let Ok(v) = g.eval_point(&x.mid(prec), prec) {
            best_hi.max_mut(v.lo());
            best_lo.min_mut(v.hi());
        }
        let small = too_small(&x, prec);
        let enc = match enc {
            Ok(e) => e,
            Err(e) if small => return Err(e),
            Err(_) => {
                let (a, b) = x.bisect(prec);
                queue.push_back(a);
                queue.push_back(b);
                continue;
            }
        };
        let scale = Float::with_val(prec, best_hi.abs_ref()).max(&Float::with_val(prec, best_lo.abs_ref()));
        let slack = Float::with_val(prec, &scale * &tol).max(&floor);
        let need_hi = *enc.hi() > Float::with_val(prec, &best_hi + &slack);
        let need_lo = *enc.lo() < Float::with_val(prec, &best_lo - &slack);
        if (!need_hi && !need_lo) || small {
            out_hi.max_mut(enc.hi());
            out_lo.min_mut(enc.lo());
        } else {
            let (a, b) = x.bisect(prec);
            queue.push_back(a);
            queue.push_back(b);
        }
    }
    Ok((out_lo, out_hi))
}

/// Maximizes `h` on `[a, b]` by Brent's method (golden section with
/// parabolic steps), starting from `x0`. Returns the best point and value.
pub fn maximize<H>(h: H, a: &Float, b: &Float, x0: &Float, tol: &Float, prec: Prec) -> (Float, Float)
where
    H: Fn(&Float) -> Option<Float>,
{
    let cgold = Float::with_val(prec, 3u32 - Float::with_val(prec, 5u32).sqrt()) / 2u32;
    let phi = |x: &Float| -> Float {
        match h(x) {
            Some(v) => -v,
            None => Float::with_val(prec, f64::INFINITY),
        }
    };
    let f = |v: Float| v;
    let mut a = Float::with_val(prec, a);
    let mut b = Float::with_val(prec, b);
    let mut x = Float::with_val(prec, x0);
    let mut w = x.clone();
    let mut v = x.clone();
    let mut fx = f(phi(&x));
    let mut fw = fx.clone();
    let mut fv = fx.clone();
    let zero = Float::new(prec);
    let mut d = zero.clone();
    let mut e = zero.clone();
    let tol1 = Float::with_val(prec, tol);
    let tol2 = Float::with_val(prec, tol * 2u32);
    for _ in 0..200 {
        let xm = Float::with_val(prec, &a + &b) / 2u32;
        let half = Float::with_val(prec, &b - &a) / 2u32;
        if Float::with_val(prec, &x - &xm).abs() <= Float::with_val(prec, &tol2 - &half) {
            break;
        }
        let mut golden = true;
        if Float::with_val(prec, e.abs_ref()) > tol1 {
            let r = Float::with_val(prec, &x - &w) * Float::with_val(prec, &fx - &fv);
            let mut q = Float::with_val(prec, &x - &v) * Float::with_val(prec, &fx - &fw);
            let mut p = Float::with_val(prec, &x - &v) * &q - Float::with_val(prec, &x - &w) * &r;
            q = Float::with_val(prec, &q - &r) * 2u32;
            if q > 0 {
                p = -p;
            }
            q.abs_mut();
            let etemp = e.clone();
            e = d.clone();
            let lim = Float::with_val(prec, &q * &etemp).abs() / 2u32;
            let below = Float::with_val(prec, &a - &x) * &q;
            let above = Float::with_val(prec, &b - &x) * &q;
            if !(Float::with_val(prec, p.abs_ref()) >= lim || p <= below || p >= above) && !q.is_zero() {
                d = Float::with_val(prec, &p / &q);
                let u = Float::with_val(prec, &x + &d);
                if Float::with_val(prec, &u - &a) < tol2 || Float::with_val(prec, &b - &u) < tol2 {
                    d = if xm >= x { tol1.clone() } else { -tol1.clone() };
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { Float::with_val(prec, &a - &x) } else { Float::with_val(prec, &b - &x) };
            d = Float::with_val(prec, &cgold * &e);
        }
        let u = if Float::with_val(prec, d.abs_ref()) >= tol1 {
            Float::with_val(prec, &x + &d)
        } else if d >= 0 {
            Float::with_val(prec, &x + &tol1)
        } else {
            Float::with_val(prec, &x - &tol1)
        };
        let fu = phi(&u);
        if fu <= fx {
            if u >= x {
                a = x.clone();
            } else {
                b = x.clone();
            }
            v = std::mem::replace(&mut w, x.clone());
            fv = std::mem::replace(&mut fw, fx.clone());
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u.clone();
            } else {
                b = u.clone();
            }
            if fu <= fw || w == x {
                v = std::mem::replace(&mut w, u);
                fv = std::mem::replace(&mut fw, fu);
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, -fx)
}

/// Uncertified sup norm of `g` on `I` from `samples` Chebyshev points, with
/// the larger local maxima polished to `2^-(prec/2)` relative to `|I|`.
pub fn infnorm_fast(g: &FunctionHandle, i: &IvBox, samples: usize, prec: Prec) -> Result<NormResult> {
    let grid = chebyshev_grid(i, samples.max(17), prec);
    let pts: Vec<(Float, Float)> = grid
        .into_iter()
        .filter_map(|x| approx_at(g, &x, prec).map(|v| (x, v.abs())))
        .collect();
    if pts.is_empty() {
        return Err(Error::Numerical(format!("{} cannot be evaluated on the grid", g.label())));
    }
    let grid_max = pts.iter().map(|p| p.1.clone()).fold(Float::new(prec), |m, v| if v > m { v } else { m });
    let threshold = Float::with_val(prec, &grid_max / 2u32);
    let tol = Float::with_val(prec, i.width(prec) * pow2(-((prec / 2) as i32), 10));
    let mut best = (pts[0].0.clone(), pts[0].1.clone());
    for k in 0..pts.len() {
        let vk = &pts[k].1;
        if *vk > best.1 {
            best = (pts[k].0.clone(), vk.clone());
        }
        let left_ok = k == 0 || *vk >= pts[k - 1].1;
        let right_ok = k + 1 == pts.len() || *vk >= pts[k + 1].1;
        if !(left_ok && right_ok) || *vk < threshold || vk.is_zero() {
            continue;
        }
        let a = if k == 0 { pts[0].0.clone() } else { pts[k - 1].0.clone() };
        let b = if k + 1 == pts.len() { pts[k].0.clone() } else { pts[k + 1].0.clone() };
        let (x, v) = maximize(|t| approx_at(g, t, prec).map(Float::abs), &a, &b, &pts[k].0, &tol, prec);
        if v > best.1 {
            best = (x, v);
        }
    }
    let upper = Float::with_val(prec, &best.1 * (1u32 + pow2(-20, prec)));
    Ok(NormResult { lower_witness: best.1, upper_bound: upper, argmax: best.0, certified: false })
}

struct Entry {
    key: Float,
    seq: usize,
    x: IvBox,
}

impl PartialEq for Entry {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Entry {
    fn cmp(&self, o: &Self) -> Ordering {
        self.key.partial_cmp(&o.key).unwrap_or(Ordering::Equal).then_with(|| o.seq.cmp(&self.seq))
    }
}

/// Certified sup norm of `g` on `I` by best-first branch and bound: boxes
/// whose enclosure of `|g|` cannot exceed the current witness by more than
/// `2^tol_log2` relative are never split.
pub fn infnorm_certified(g: &FunctionHandle, i: &IvBox, tol_log2: i32, prec: Prec) -> Result<NormResult> {
    let tol = pow2(tol_log2, 10);
    let floor = noise_floor(prec);
    let seed = infnorm_fast(g, i, 257, prec)?;
    let mut argmax = seed.argmax.clone();
    let mut lower = g.eval_point(&argmax, prec)?.mig();
    let mut retired = Float::new(prec);
    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    let push = |heap: &mut BinaryHeap<Entry>, x: IvBox, seq: &mut usize| {
        let key = match enclose(g, &x, prec) {
            Ok(e) => e.mag(),
            Err(_) => Float::with_val(prec, f64::INFINITY),
        };
        *seq += 1;
        heap.push(Entry { key, seq: *seq, x });
    };
    push(&mut heap, i.clone(), &mut seq);
    let mut processed = 0usize;
    while let Some(top) = heap.pop() {
        processed += 1;
        if processed > MAX_BOXES {
            return Err(Error::Numerical(format!("sup norm of {} needs more than 2^20 boxes", g.label())));
        }
        let goal = Float::with_val(prec, &lower * (1u32 + Float::with_val(prec, &tol))).max(&floor);
        if top.key <= goal {
            retired.max_mut(&top.key);
            break;
        }
        let mid = top.x.mid(prec);
        if let Ok(v) = g.eval_point(&mid, prec) {
            let m = v.mig();
            if m > lower {
                lower = m;
                argmax = mid;
            }
        }
        if too_small(&top.x, prec) {
            if top.key.is_infinite() {
                return Err(Error::Numerical(format!("{} cannot be enclosed near {}", g.label(), top.x.mid(53))));
            }
            retired.max_mut(&top.key);
            continue;
        }
        let (a, b) = top.x.bisect(prec);
        push(&mut heap, a, &mut seq);
        push(&mut heap, b, &mut seq);
    }
    let upper = retired.max(&lower);
    Ok(NormResult { lower_witness: lower, upper_bound: upper, argmax, certified: true })
}
