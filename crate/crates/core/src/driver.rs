//! The complete approximation loop: degree search, full-basis Remez,
//! cancellation analysis, incomplete-basis Remez and degree escalation,
//! followed by certified verification of the returned polynomial.

use rug::Float;

use crate::cancellation::{cancellation_basis, CancellationReport, Verdict};
use crate::error::{Error, Result};
use crate::functions::FunctionHandle;
use crate::mparith::{default_precision, log2_abs, IvBox, Prec};
use crate::norm::{self, error_handle, ErrorMode, NormResult};
use crate::poly::{MonomialBasis, Poly};
use crate::remez::{guessdegree, relative_multiplicity, remez, RemezConfig, RemezStatus, DEGREE_CAP};

#[derive(Clone, Debug)]
pub struct ApproxSpec {
    pub f: FunctionHandle,
    pub interval: IvBox,
    pub eps_bar: Float,
    pub iter_limit: usize,
    pub mode: ErrorMode,
    pub prec: Prec,
}

impl ApproxSpec {
    /// Iteration limit 8; working precision three times the target's bit
    /// count, at least 165.
    pub fn new(f: FunctionHandle, interval: IvBox, eps_bar: Float, mode: ErrorMode) -> Result<ApproxSpec> {
        if eps_bar <= 0 || !eps_bar.is_finite() {
            return Err(Error::InvalidArgument("target error must be positive".into()));
        }
        let prec = default_precision(log2_abs(&eps_bar));
        Ok(ApproxSpec { f, interval, eps_bar, iter_limit: 8, mode, prec })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    /// Degree search before the main loop.
    DegreeSearch,
    /// Full-basis polynomial inside the main loop, after an escalation.
    FullBasis,
    /// Static Horner simulation of the full-basis polynomial.
    Analysis,
    IncompleteBasis,
    /// Certified verification of a candidate.
    Verification,
    /// Remez rerun after the candidate itself failed the Horner re-check.
    Recheck,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::DegreeSearch => "degree_search",
            Stage::FullBasis => "full_basis",
            Stage::Analysis => "analysis",
            Stage::IncompleteBasis => "incomplete_basis",
            Stage::Verification => "verification",
            Stage::Recheck => "recheck",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    /// Outer loop counter `k`, `0` during the degree search.
    pub k: usize,
    pub stage: Stage,
    pub degree: u32,
    pub basis: MonomialBasis,
    /// `log2` of the error estimate (`inf` when no polynomial was obtained).
    pub log2_eps: f64,
    pub certified_norm: bool,
    pub verdicts: Vec<(u32, Verdict)>,
    pub note: Option<String>,
}

#[derive(Clone, Debug)]
pub struct VerificationRecord {
    pub norm: NormResult,
    pub cancellation: CancellationReport,
    pub eps_ok: bool,
}

impl VerificationRecord {
    pub fn passed(&self) -> bool {
        self.eps_ok && self.cancellation.cancellation_free
    }
}

#[derive(Clone, Debug)]
pub struct ApproxResult {
    pub poly: Poly,
    pub basis: MonomialBasis,
    /// Certified error bound.
    pub eps: Float,
    /// Error estimate used during the iteration.
    pub eps_estimate: Float,
    pub degree: u32,
    pub iterations: usize,
    pub verified_cancellation_free: bool,
    pub cancellation: CancellationReport,
    pub remez_status: RemezStatus,
    /// Zero multiplicity of `f` at the origin handled in relative mode.
    pub zero_multiplicity: u32,
    pub history: Vec<IterationRecord>,
}

#[derive(Clone, Debug)]
pub enum Outcome {
    Found(Box<ApproxResult>),
    /// No polynomial within the iteration limit.
    Bottom { history: Vec<IterationRecord> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum NormKind {
    Fast,
    Certified,
}

struct Candidate {
    poly: Poly,
    eps: Float,
    status: RemezStatus,
}

struct Run<'a> {
    spec: &'a ApproxSpec,
    cfg: RemezConfig,
    m: u32,
    norm: NormKind,
    history: Vec<IterationRecord>,
}

fn infinite(prec: Prec) -> Float {
    Float::with_val(prec, f64::INFINITY)
}

impl Run<'_> {
    fn error_norm(&self, p: &Poly) -> Result<Float> {
        let g = error_handle(p, &self.spec.f, &self.spec.mode, self.m)?;
        let prec = self.spec.prec;
        Ok(match self.norm {
            NormKind::Fast => {
                norm::infnorm_fast(&g, &self.spec.interval, norm::default_samples(p.degree() as usize), prec)?
                    .lower_witness
            }
            NormKind::Certified => {
                norm::infnorm_certified(&g, &self.spec.interval, norm::DEFAULT_TOL_LOG2, prec)?.upper_bound
            }
        })
    }

    /// Remez on `basis` with its error norm; a singular incomplete-basis
    /// system counts as infinite error.
    fn approx(&self, basis: &MonomialBasis) -> Result<Option<Candidate>> {
        match remez(&self.spec.f, &self.spec.interval, basis, &self.cfg) {
            Ok(r) => {
                let eps = self.error_norm(&r.poly)?;
                Ok(Some(Candidate { poly: r.poly, eps, status: r.status }))
            }
            Err(Error::SingularSystem { .. }) if basis.len() < (basis.degree() - basis.lowest() + 1) as usize => Ok(None),
            Err(e) => Err(e),
        }
    }

    fn record(&mut self, k: usize, stage: Stage, basis: &MonomialBasis, eps: Option<&Float>, note: Option<String>) {
        self.history.push(IterationRecord {
            k,
            stage,
            degree: basis.degree(),
            basis: basis.clone(),
            log2_eps: eps.map_or(f64::INFINITY, log2_abs),
            certified_norm: self.norm == NormKind::Certified,
            verdicts: Vec::new(),
            note,
        });
    }

    fn record_analysis(&mut self, k: usize, p: &Poly, rep: &CancellationReport) {
        self.history.push(IterationRecord {
            k,
            stage: Stage::Analysis,
            degree: p.degree(),
            basis: rep.basis.clone(),
            log2_eps: f64::NAN,
            certified_norm: self.norm == NormKind::Certified,
            verdicts: rep.steps.iter().map(|s| (s.index, s.verdict)).collect(),
            note: None,
        });
    }

    fn full(&mut self, k: usize, n: u32, stage: Stage) -> Result<Candidate> {
        if n > DEGREE_CAP {
            return Err(Error::DegreeCapExceeded(DEGREE_CAP as usize));
        }
        let basis = MonomialBasis::full(self.m, n);
        let c = self.approx(&basis)?.ok_or(Error::SingularSystem { pivot: 0 })?;
        self.record(k, stage, &basis, Some(&c.eps), None);
        Ok(c)
    }

    /// Certified check of a candidate, with one Remez rerun when the
    /// candidate's own Horner simulation cancels.
    fn finish(&mut self, k: usize, cand: Candidate) -> Result<Option<ApproxResult>> {
        let mut cand = cand;
        for attempt in 0..2 {
            let rec = check(&cand.poly, self.spec, self.m)?;
            let note = format!(
                "certified log2 eps {:.3}, horner re-check {}",
                log2_abs(&rec.norm.upper_bound),
                if rec.cancellation.cancellation_free { "free" } else { "cancelling" }
            );
            self.record(k, Stage::Verification, cand.poly.basis(), Some(&rec.norm.upper_bound), Some(note));
            if rec.passed() {
                let degree = cand.poly.degree();
                return Ok(Some(ApproxResult {
                    basis: cand.poly.basis().clone(),
                    poly: cand.poly,
                    eps: rec.norm.upper_bound,
                    eps_estimate: cand.eps,
                    degree,
                    iterations: k,
                    verified_cancellation_free: true,
                    cancellation: rec.cancellation,
                    remez_status: cand.status,
                    zero_multiplicity: self.m,
                    history: std::mem::take(&mut self.history),
                }));
            }
            if !rec.eps_ok {
                self.norm = NormKind::Certified;
                return Ok(None);
            }
            if attempt == 1 {
                break;
            }
            let drop = rec.cancellation.cancelling_exponents();
            let Ok(basis) = cand.poly.basis().without(&drop) else { return Ok(None) };
            match self.approx(&basis)? {
                Some(c) => {
                    self.record(k, Stage::Recheck, &basis, Some(&c.eps), Some(format!("dropped {drop:?}")));
                    if c.eps > self.spec.eps_bar {
                        return Ok(None);
                    }
                    cand = c;
                }
                None => {
                    self.record(k, Stage::Recheck, &basis, None, Some("singular system".into()));
                    return Ok(None);
                }
            }
        }
        Ok(None)
    }
}

/// Certified error and Horner re-check of `p`, without judging the result.
fn check(p: &Poly, spec: &ApproxSpec, m: u32) -> Result<VerificationRecord> {
    let g = error_handle(p, &spec.f, &spec.mode, m)?;
    let norm = norm::infnorm_certified(&g, &spec.interval, norm::DEFAULT_TOL_LOG2, spec.prec)?;
    let cancellation = cancellation_basis(p, &spec.interval, spec.prec)?;
    let eps_ok = norm.upper_bound <= spec.eps_bar;
    Ok(VerificationRecord { norm, cancellation, eps_ok })
}

/// Recomputes the error of `result` with the certified norm and re-runs the
/// Horner simulation on its polynomial.
pub fn verify(result: &ApproxResult, spec: &ApproxSpec) -> Result<VerificationRecord> {
    let rec = check(&result.poly, spec, result.zero_multiplicity)?;
    if !rec.eps_ok {
        return Err(Error::VerificationFailed(format!(
            "certified error 2^{:.3} exceeds the target 2^{:.3}",
            log2_abs(&rec.norm.upper_bound),
            log2_abs(&spec.eps_bar)
        )));
    }
    Ok(rec)
}

/// Finds a polynomial whose Horner evaluation on `I` is cancellation-free
/// and whose error is certified below `eps_bar`, or [`Outcome::Bottom`]
/// after `iter_limit` rounds.
pub fn cancellation_free_approx(spec: &ApproxSpec) -> Result<Outcome> {
    if spec.iter_limit == 0 {
        return Err(Error::InvalidArgument("iteration limit must be at least 1".into()));
    }
    let prec = spec.prec;
    let cfg = RemezConfig::new(spec.mode.clone(), prec);
    let m = relative_multiplicity(&spec.f, &spec.interval, &spec.mode, prec)?;
    let mut run = Run { spec, cfg, m, norm: NormKind::Fast, history: Vec::new() };

    let mut n = guessdegree(&spec.f, &spec.interval, &spec.eps_bar, &run.cfg)?.max(m);
    let mut best = loop {
        let c = run.full(0, n, Stage::DegreeSearch)?;
        if c.eps <= spec.eps_bar {
            break c;
        }
        n += 1;
    };

    for k in 1..=spec.iter_limit {
        let rep = cancellation_basis(&best.poly, &spec.interval, prec)?;
        run.record_analysis(k, &best.poly, &rep);
        let candidate = if rep.cancellation_free {
            Some(best)
        } else {
            match run.approx(&rep.basis)? {
                Some(c) => {
                    run.record(k, Stage::IncompleteBasis, &rep.basis, Some(&c.eps), None);
                    (c.eps <= spec.eps_bar).then_some(c)
                }
                None => {
                    let inf = infinite(prec);
                    run.record(k, Stage::IncompleteBasis, &rep.basis, Some(&inf), Some("singular system".into()));
                    None
                }
            }
        };
        if let Some(c) = candidate {
            if let Some(result) = run.finish(k, c)? {
                return Ok(Outcome::Found(Box::new(result)));
            }
        }
        if k == spec.iter_limit {
            break;
        }
        n += 1;
        best = run.full(k, n, Stage::FullBasis)?;
    }
    Ok(Outcome::Bottom { history: run.history })
}
