//! Remez exchange on arbitrary monomial bases.
//!
//! The classical algorithm assumes the Haar condition, which incomplete
//! bases violate on intervals containing zero. Nothing here proves
//! convergence; callers check the returned error a posteriori.

use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};
use crate::functions::FunctionHandle;
use crate::mparith::{pow2, IvBox, Prec};
use crate::norm::{self, approx_at, error_handle, maximize, zero_multiplicity, ErrorMode};
use crate::poly::{MonomialBasis, Poly};

/// Largest degree `guessdegree` will try.
pub const DEGREE_CAP: u32 = 64;

#[derive(Clone, Debug)]
pub struct RemezConfig {
    pub mode: ErrorMode,
    pub working_prec: Prec,
    pub max_exchanges: usize,
    /// Converged once `max |err| <= convergence_ratio * delta`.
    pub convergence_ratio: Float,
}

impl RemezConfig {
    pub fn new(mode: ErrorMode, working_prec: Prec) -> RemezConfig {
        RemezConfig {
            mode,
            working_prec,
            max_exchanges: 40,
            convergence_ratio: Float::with_val(working_prec, 1u32 + pow2(-8, 16)),
        }
    }

    fn relative(&self) -> bool {
        matches!(self.mode, ErrorMode::Relative)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RemezStatus {
    Converged,
    Stalled,
    ExchangeFailed,
}

impl RemezStatus {
    pub fn name(self) -> &'static str {
        match self {
            RemezStatus::Converged => "converged",
            RemezStatus::Stalled => "stalled",
            RemezStatus::ExchangeFailed => "exchange_failed",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RemezResult {
    pub poly: Poly,
    /// Leveled error `|delta|` of the last solve.
    pub delta: Float,
    /// Reference points of the last solve, strictly increasing.
    pub points: Vec<Float>,
    pub status: RemezStatus,
    /// Largest `|err|` found by the last exchange scan of `interval`.
    pub max_error: Float,
    /// Interval the points live on (half of the input after parity halving).
    pub interval: IvBox,
    pub exchanges: usize,
}

/// `m` Chebyshev nodes of the second kind on `I`, endpoints included.
pub fn initial_points(i: &IvBox, m: usize, prec: Prec) -> Vec<Float> {
    assert!(m >= 2, "need at least two points");
    norm::chebyshev_grid(i, m, prec)
}

/// The larger half `[0, hi]` or `[lo, 0]` when `0` is interior to `I` and
/// every exponent of `basis` has the same parity; `I` otherwise.
pub fn parity_halve(i: &IvBox, basis: &MonomialBasis) -> IvBox {
    if !i.zero_in_interior() || !basis.same_parity() {
        return i.clone();
    }
    let prec = i.lo().prec().max(i.hi().prec());
    let zero = Float::new(prec);
    if *i.hi() >= Float::with_val(prec, -i.lo()) {
        IvBox::new(zero, i.hi().clone()).expect("ordered")
    } else {
        IvBox::new(i.lo().clone(), zero).expect("ordered")
    }
}

/// Multiplicity of the zero of `f` at the origin that relative mode must
/// handle on `I`.
pub fn relative_multiplicity(f: &FunctionHandle, i: &IvBox, mode: &ErrorMode, prec: Prec) -> Result<u32> {
    if matches!(mode, ErrorMode::Relative) && i.contains_zero() {
        zero_multiplicity(f, prec)
    } else {
        Ok(0)
    }
}

fn guard_radius(i: &IvBox, prec: Prec) -> Float {
    Float::with_val(prec, i.width(prec) * pow2(-((prec / 4) as i32), 10))
}

/// Pushes points out of `(-rho, rho)`, toward the side `I` extends to.
fn apply_guard(points: &mut [Float], i: &IvBox, prec: Prec) {
    let rho = guard_radius(i, prec);
    for x in points.iter_mut() {
        if Float::with_val(prec, x.abs_ref()) < rho {
            let up = x.is_sign_positive() && !x.is_zero() || x.is_zero() && *i.hi() >= rho;
            *x = if up { rho.clone() } else { Float::with_val(prec, -&rho) };
        }
    }
}

fn strictly_increasing(points: &[Float]) -> bool {
    points.windows(2).all(|w| w[0] < w[1])
}

/// Solves the exchange system
/// `sum_k c_k x_j^(i_k) - (-1)^j delta D(x_j) = R(x_j)` for the coefficients
/// and `delta`, with `D = 1, R = f` (absolute), `D = R = f` (relative) or
/// `D = 1/w, R = f/w` (weighted). In relative mode each row is divided by
/// `x_j^m`, where `m` is the zero multiplicity of `f` at the origin.
pub fn solve_exchange_system(
    points: &[Float],
    basis: &MonomialBasis,
    f: &FunctionHandle,
    cfg: &RemezConfig,
    m: u32,
) -> Result<(Poly, Float)> {
    let prec = cfg.working_prec;
    let n = basis.len();
    if points.len() != n + 1 {
        return Err(Error::InvalidArgument(format!("{} points for a basis of {} monomials", points.len(), n)));
    }
    if !strictly_increasing(points) {
        return Err(Error::InvalidArgument("exchange points must be strictly increasing".into()));
    }
    let m = if cfg.relative() { m } else { 0 };
    let mut a: Vec<Vec<Float>> = Vec::with_capacity(n + 1);
    let mut b: Vec<Float> = Vec::with_capacity(n + 1);
    for (j, x) in points.iter().enumerate() {
        let x = Float::with_val(prec, x);
        if m > 0 && x.is_zero() {
            return Err(Error::Domain("exchange point at a zero of f in relative mode".into()));
        }
        let fx = f.approx(&x, prec)?;
        let (d, r) = match &cfg.mode {
            ErrorMode::Absolute => (Float::with_val(prec, 1), fx),
            ErrorMode::Relative => {
                let s = Float::with_val(prec, (&x).pow(m));
                let q = Float::with_val(prec, &fx / &s);
                (q.clone(), q)
            }
            ErrorMode::Weighted(w) => {
                let wx = w.approx(&x, prec)?;
                if wx.is_zero() {
                    return Err(Error::Domain("weight vanishes at an exchange point".into()));
                }
                (Float::with_val(prec, wx.recip_ref()), Float::with_val(prec, &fx / &wx))
            }
        };
        let mut row: Vec<Float> =
            basis.exponents().iter().map(|&e| Float::with_val(prec, (&x).pow(e - m))).collect();
        let sd = if j % 2 == 0 { -d } else { d };
        row.push(sd);
        a.push(row);
        b.push(r);
    }
    let y = solve_equilibrated(a, b, prec)?;
    let coeffs = y[..n].to_vec();
    let delta = Float::with_val(prec, y[n].abs_ref());
    Ok((Poly::new(basis.clone(), coeffs)?, delta))
}

/// Gaussian elimination with partial pivoting after column then row
/// equilibration.
fn solve_equilibrated(mut a: Vec<Vec<Float>>, mut b: Vec<Float>, prec: Prec) -> Result<Vec<Float>> {
    let n = b.len();
    let mut col_scale = Vec::with_capacity(n);
    for k in 0..n {
        let s = a.iter().map(|r| Float::with_val(prec, r[k].abs_ref())).fold(Float::new(prec), |m, v| m.max(&v));
        if s.is_zero() {
            return Err(Error::SingularSystem { pivot: k });
        }
        for r in a.iter_mut() {
            r[k] /= &s;
        }
        col_scale.push(s);
    }
    for (r, bj) in a.iter_mut().zip(b.iter_mut()) {
        let s = r.iter().map(|v| Float::with_val(prec, v.abs_ref())).fold(Float::new(prec), |m, v| m.max(&v));
        for v in r.iter_mut() {
            *v /= &s;
        }
        *bj /= &s;
    }
    let threshold = pow2(-((prec / 2) as i32), 10);
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| {
                let (x, y) = (Float::with_val(prec, a[i][k].abs_ref()), Float::with_val(prec, a[j][k].abs_ref()));
                // Prefer the earliest row on ties so the choice is deterministic.
                x.partial_cmp(&y).unwrap_or(std::cmp::Ordering::Equal).then(j.cmp(&i))
            })
            .expect("non-empty range");
        if Float::with_val(prec, a[p][k].abs_ref()) < threshold {
            return Err(Error::SingularSystem { pivot: k });
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in (k + 1)..n {
            let factor = Float::with_val(prec, &a[i][k] / &a[k][k]);
            if factor.is_zero() {
                continue;
            }
            for c in k..n {
                let t = Float::with_val(prec, &factor * &a[k][c]);
                a[i][c] -= t;
            }
            let t = Float::with_val(prec, &factor * &b[k]);
            b[i] -= t;
        }
    }
    let mut y = vec![Float::new(prec); n];
    for k in (0..n).rev() {
        let mut s = b[k].clone();
        for c in (k + 1)..n {
            s -= Float::with_val(prec, &a[k][c] * &y[c]);
        }
        y[k] = s / &a[k][k];
    }
    for (v, s) in y.iter_mut().zip(&col_scale) {
        *v /= s;
    }
    Ok(y)
}

struct Scan {
    points: Result<Vec<Float>>,
    max_err: Float,
}

fn sign_of(v: &Float) -> i8 {
    if v.is_zero() {
        0
    } else if v.is_sign_negative() {
        -1
    } else {
        1
    }
}

/// One exchange step: scan `err` on a Chebyshev grid merged with the current
/// points, polish the extremum of every sign run, and keep `count`
/// alternating extrema.
fn scan(err: &FunctionHandle, i: &IvBox, current: &[Float], count: usize, prec: Prec) -> Result<Scan> {
    let mut xs = norm::chebyshev_grid(i, (8 * count).max(17), prec);
    xs.extend(current.iter().filter(|x| i.contains(x)).cloned());
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite points"));
    xs.dedup();
    let samples: Vec<(Float, Float)> =
        xs.into_iter().filter_map(|x| approx_at(err, &x, prec).map(|v| (x, v))).collect();
    if samples.is_empty() {
        return Err(Error::Numerical(format!("{} cannot be evaluated on the exchange grid", err.label())));
    }
    // Sign runs as index ranges; zeros join the run they interrupt.
    let mut runs: Vec<(usize, usize, i8)> = Vec::new();
    for (k, (_, v)) in samples.iter().enumerate() {
        let s = sign_of(v);
        match runs.last_mut() {
            Some(r) if s == 0 || s == r.2 || r.2 == 0 => {
                r.1 = k;
                if r.2 == 0 {
                    r.2 = s;
                }
            }
            _ => runs.push((k, k, s)),
        }
    }
    let tol = Float::with_val(prec, i.width(prec) * pow2(-((prec / 2) as i32), 10));
    let mut ext: Vec<(Float, Float)> = Vec::with_capacity(runs.len());
    for &(start, end, s) in &runs {
        let k = (start..=end)
            .max_by(|&p, &q| {
                let (a, b) = (samples[p].1.clone().abs(), samples[q].1.clone().abs());
                a.partial_cmp(&b).unwrap_or(std::cmp::Ordering::Equal).then(q.cmp(&p))
            })
            .expect("non-empty run");
        let (x0, v0) = &samples[k];
        let lo = if k == 0 { x0.clone() } else { samples[k - 1].0.clone() };
        let hi = if k + 1 == samples.len() { x0.clone() } else { samples[k + 1].0.clone() };
        let (x, v) = if s == 0 || lo == hi {
            (x0.clone(), v0.clone())
        } else {
            let signed = |t: &Float| approx_at(err, t, prec).map(|v| if s < 0 { -v } else { v });
            let (x, sv) = maximize(signed, &lo, &hi, x0, &tol, prec);
            let v = if s < 0 { -sv } else { sv };
            if v.clone().abs() >= v0.clone().abs() {
                (x, v)
            } else {
                (x0.clone(), v0.clone())
            }
        };
        ext.push((x, v));
    }
    let max_err = ext.iter().map(|e| e.1.clone().abs()).fold(Float::new(prec), |m, v| m.max(&v));
    if ext.len() < count {
        let msg = format!("{} alternating extrema found, {} needed", ext.len(), count);
        return Ok(Scan { points: Err(Error::ExchangeFailed(msg)), max_err });
    }
    while ext.len() > count {
        let mags: Vec<Float> = ext.iter().map(|e| e.1.clone().abs()).collect();
        if ext.len() == count + 1 {
            if mags[0] < mags[mags.len() - 1] {
                ext.remove(0);
            } else {
                ext.pop();
            }
            continue;
        }
        let k = (0..mags.len())
            .min_by(|&p, &q| mags[p].partial_cmp(&mags[q]).unwrap_or(std::cmp::Ordering::Equal).then(p.cmp(&q)))
            .expect("non-empty");
        if k == 0 || k + 1 == ext.len() {
            ext.remove(k);
        } else {
            let nb = if mags[k - 1] <= mags[k + 1] { k - 1 } else { k + 1 };
            ext.remove(k.max(nb));
            ext.remove(k.min(nb));
        }
    }
    Ok(Scan { points: Ok(ext.into_iter().map(|e| e.0).collect()), max_err })
}

/// New reference of `count` points with alternating signs of `err`, one per
/// sign run, or `ExchangeFailed` when `err` alternates fewer times.
pub fn exchange(points: &[Float], err: &FunctionHandle, i: &IvBox, count: usize, prec: Prec) -> Result<Vec<Float>> {
    scan(err, i, points, count, prec)?.points
}

/// Solve with the bounded fallbacks for singular systems: perturb interior
/// points, then double the precision.
fn solve_robust(
    points: &[Float],
    basis: &MonomialBasis,
    f: &FunctionHandle,
    cfg: &RemezConfig,
    i: &IvBox,
    m: u32,
) -> Result<(Poly, Float)> {
    let first = match solve_exchange_system(points, basis, f, cfg, m) {
        Err(Error::SingularSystem { pivot }) => pivot,
        other => return other,
    };
    let prec = cfg.working_prec;
    let step = Float::with_val(prec, i.width(prec) * pow2(-20, 10)) / points.len() as u32;
    let mut moved = points.to_vec();
    let last = moved.len() - 1;
    for (k, x) in moved.iter_mut().enumerate().take(last).skip(1) {
        if k % 2 == 0 {
            *x += &step;
        } else {
            *x -= &step;
        }
    }
    if strictly_increasing(&moved) {
        match solve_exchange_system(&moved, basis, f, cfg, m) {
            Err(Error::SingularSystem { .. }) => {}
            other => return other,
        }
    }
    let wide = RemezConfig { working_prec: 2 * prec, ..cfg.clone() };
    match solve_exchange_system(points, basis, f, &wide, m) {
        Ok((p, d)) => {
            let coeffs = p.coeffs().iter().map(|c| Float::with_val(prec, c)).collect();
            Ok((Poly::new(basis.clone(), coeffs)?, Float::with_val(prec, d)))
        }
        Err(Error::SingularSystem { .. }) => Err(Error::SingularSystem { pivot: first }),
        Err(e) => Err(e),
    }
}

fn exact_floor(f: &FunctionHandle, points: &[Float], cfg: &RemezConfig) -> Float {
    let prec = cfg.working_prec;
    let scale = match cfg.mode {
        ErrorMode::Relative => Float::with_val(prec, 1),
        _ => points
            .iter()
            .filter_map(|x| f.approx(x, prec).ok())
            .map(|v| v.abs())
            .fold(Float::with_val(prec, 1), |m, v| m.max(&v)),
    };
    scale * pow2(-(prec as i32) + 10, 10)
}

/// Best approximation of `f` on `I` over `basis` in the mode of `cfg`.
///
/// Points are placed on [`parity_halve`]`(I, basis)`. In relative mode with
/// `f(0) = 0` the lowest exponent must be at least the zero multiplicity,
/// and points avoid a guard zone of radius `2^(-prec/4) |I|` around `0`.
/// Exchange failure returns the best polynomial seen, with its status.
pub fn remez(f: &FunctionHandle, i: &IvBox, basis: &MonomialBasis, cfg: &RemezConfig) -> Result<RemezResult> {
    let prec = cfg.working_prec;
    let m = relative_multiplicity(f, i, &cfg.mode, prec)?;
    if basis.lowest() < m {
        return Err(Error::Domain(format!(
            "relative error against {} needs exponents of at least {m}, basis is {basis}",
            f.label()
        )));
    }
    let half = parity_halve(i, basis);
    let count = basis.len() + 1;
    let mut points = initial_points(&half, count, prec);
    if m > 0 {
        apply_guard(&mut points, &half, prec);
    }
    let mut best: Option<RemezResult> = None;
    let mut status = RemezStatus::Stalled;
    for iter in 0..cfg.max_exchanges.max(1) {
        let (poly, delta) = solve_robust(&points, basis, f, cfg, &half, m)?;
        let err = error_handle(&poly, f, &cfg.mode, m)?;
        let s = scan(&err, &half, &points, count, prec)?;
        let candidate = RemezResult {
            poly,
            delta: delta.clone(),
            points: points.clone(),
            status,
            max_error: s.max_err.clone(),
            interval: half.clone(),
            exchanges: iter + 1,
        };
        if best.as_ref().is_none_or(|b| candidate.max_error < b.max_error) {
            best = Some(candidate);
        }
        let level = Float::with_val(prec, &delta * &cfg.convergence_ratio);
        if s.max_err <= level || s.max_err <= exact_floor(f, &points, cfg) {
            let mut r = best.take().expect("just stored");
            r.status = RemezStatus::Converged;
            r.exchanges = iter + 1;
            return Ok(r);
        }
        match s.points {
            Ok(mut next) => {
                if m > 0 {
                    apply_guard(&mut next, &half, prec);
                }
                if !strictly_increasing(&next) || next == points {
                    break;
                }
                points = next;
            }
            Err(Error::ExchangeFailed(_)) => {
                status = RemezStatus::ExchangeFailed;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let mut r = best.expect("at least one solve");
    r.status = status;
    Ok(r)
}

/// Smallest degree `n` such that one interpolation solve on the full basis
/// `{x^m, ..., x^n}` (`m` the relative-mode zero multiplicity, else 0) at
/// Chebyshev points has fast-norm error at most `eps`; doubling then
/// bisection, capped at [`DEGREE_CAP`].
pub fn guessdegree(f: &FunctionHandle, i: &IvBox, eps: &Float, cfg: &RemezConfig) -> Result<u32> {
    let prec = cfg.working_prec;
    let m = relative_multiplicity(f, i, &cfg.mode, prec)?;
    let fits = |n: u32| -> Result<bool> {
        let basis = MonomialBasis::full(m, n);
        let mut points = initial_points(i, basis.len() + 1, prec);
        if m > 0 {
            apply_guard(&mut points, i, prec);
        }
        let poly = match solve_exchange_system(&points, &basis, f, cfg, m) {
            Ok((p, _)) => p,
            Err(Error::SingularSystem { .. }) => return Ok(false),
            Err(e) => return Err(e),
        };
        let err = error_handle(&poly, f, &cfg.mode, m)?;
        let norm = norm::infnorm_fast(&err, i, norm::default_samples(n as usize), prec)?;
        Ok(norm.lower_witness <= *eps)
    };
    let mut failing: Option<u32> = None;
    let mut n = m;
    loop {
        if fits(n)? {
            break;
        }
        if n == DEGREE_CAP {
            return Err(Error::DegreeCapExceeded(DEGREE_CAP as usize));
        }
        failing = Some(n);
        n = if n == 0 { 1 } else { (2 * n).min(DEGREE_CAP) };
    }
    let Some(mut lo) = failing else { return Ok(n) };
    let mut hi = n;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if fits(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
