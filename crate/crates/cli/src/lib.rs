//! Batch front end: parse, approximate, verify, round, emit and report.

pub mod report;

use std::path::PathBuf;

use rug::{Float, Rational};

use cfpoly::codegen::{assign_formats, emit_horner_c, Assignment};
use cfpoly::driver::{cancellation_free_approx, ApproxSpec, Outcome};
use cfpoly::functions::{argerf, parse, plugin::plugin_handle, to_handle};
use cfpoly::mparith::{default_precision, log2_abs, parse_exact};
use cfpoly::norm::ErrorMode;
use cfpoly::{Error, FunctionHandle, IvBox, Prec, Result};

pub use report::{Report, REPORT_VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_BOTTOM: i32 = 2;

/// Expression text naming the built-in inverse error function.
pub const ARGERF_ALIAS: &str = "argerf(x)";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FunctionSource {
    Expression(String),
    Plugin { program: PathBuf, args: Vec<String> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeArg {
    Relative,
    Absolute,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub function: FunctionSource,
    /// `[lo;hi]`.
    pub domain: String,
    /// `2^-k`, `m*2^e`, a decimal or a hex float.
    pub target: String,
    pub mode: ModeArg,
    pub iter_limit: usize,
    pub emit_c: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub precision: Option<Prec>,
    /// Name of the emitted C function.
    pub name: String,
}

impl RunConfig {
    pub fn new(function: FunctionSource, domain: &str, target: &str) -> RunConfig {
        RunConfig {
            function,
            domain: domain.into(),
            target: target.into(),
            mode: ModeArg::Relative,
            iter_limit: 8,
            emit_c: None,
            report: None,
            precision: None,
            name: "poly".into(),
        }
    }
}

/// Parses `2^e`, `m*2^e`, decimals and hex floats, with an optional sign,
/// into the exact rational they denote.
pub fn parse_number(text: &str) -> Result<Rational> {
    let s = text.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest.trim_start()),
        None => (false, s.strip_prefix('+').unwrap_or(s).trim_start()),
    };
    let value = match body.split_once("2^") {
        Some((head, exp)) => {
            let scale = match head.trim() {
                "" => Rational::from(1),
                h => parse_exact(h.strip_suffix('*').ok_or_else(|| bad_number(text))?)?,
            };
            let e: i32 = exp.trim().parse().map_err(|_| bad_number(text))?;
            let pow = if e >= 0 {
                Rational::from(rug::Integer::from(1) << e.unsigned_abs())
            } else {
                Rational::from((1, rug::Integer::from(1) << e.unsigned_abs()))
            };
            scale * pow
        }
        None => parse_exact(body)?,
    };
    Ok(if neg { -value } else { value })
}

fn bad_number(text: &str) -> Error {
    Error::Parse { pos: 0, msg: format!("malformed number {text:?}") }
}

/// Parses `[lo;hi]` into bounds rounded outward to `prec` bits.
pub fn parse_domain(text: &str, prec: Prec) -> Result<IvBox> {
    let s = text.trim();
    let inner = s
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .ok_or_else(|| Error::Parse { pos: 0, msg: format!("domain must look like [lo;hi], got {text:?}") })?;
    let (lo, hi) = inner
        .split_once(';')
        .ok_or_else(|| Error::Parse { pos: 0, msg: format!("domain needs ';' between bounds, got {text:?}") })?;
    let (lo, hi) = (parse_number(lo)?, parse_number(hi)?);
    if lo >= hi {
        return Err(Error::InvalidArgument(format!("empty domain {text}")));
    }
    IvBox::hull_of(&lo, &hi, prec)
}

pub fn parse_target(text: &str) -> Result<Float> {
    let r = parse_number(text)?;
    if r <= 0 {
        return Err(Error::InvalidArgument(format!("target {text} must be positive")));
    }
    Ok(Float::with_val(64, Float::with_val_round(64, &r, rug::float::Round::Down).0))
}

/// Function handle for `source`; the `argerf(x)` alias is inverted on `i`
/// widened by a tenth of its width on each side.
pub fn function_handle(source: &FunctionSource, i: &IvBox, prec: Prec) -> Result<FunctionHandle> {
    match source {
        FunctionSource::Expression(e) if e.replace(' ', "") == ARGERF_ALIAS => {
            let pad = Float::with_val(prec, i.width(prec) / 10u32);
            argerf(i.widen(&pad, prec))
        }
        FunctionSource::Expression(e) => Ok(to_handle(parse(e)?)),
        FunctionSource::Plugin { program, args } => plugin_handle(program, args),
    }
}

/// Everything a run produced; `report` mirrors it as JSON.
pub struct RunOutcome {
    pub exit_code: i32,
    pub report: Report,
    pub spec: Option<ApproxSpec>,
    pub outcome: Option<Outcome>,
    pub assignment: Option<Assignment>,
    pub c_source: Option<String>,
}

/// Runs the pipeline without touching the file system.
pub fn execute(cfg: &RunConfig) -> RunOutcome {
    let mut report = Report::new(cfg);
    let mut out = RunOutcome { exit_code: EXIT_ERROR, report: Report::new(cfg), spec: None, outcome: None, assignment: None, c_source: None };
    let spec = match build_spec(cfg) {
        Ok(s) => s,
        Err(e) => {
            report.fail(&e);
            out.report = report;
            return out;
        }
    };
    report.set_spec(&spec);
    let outcome = match cancellation_free_approx(&spec) {
        Ok(o) => o,
        Err(e) => {
            report.fail(&e);
            out.report = report;
            out.spec = Some(spec);
            return out;
        }
    };
    match &outcome {
        Outcome::Bottom { history } => {
            report.set_bottom(history);
            out.exit_code = EXIT_BOTTOM;
        }
        Outcome::Found(r) => {
            report.set_result(r);
            match assign_formats(&r.poly, &spec, r.zero_multiplicity) {
                Ok(a) => {
                    report.set_assignment(&a);
                    match emit_horner_c(&a.fp, &cfg.name) {
                        Ok(src) => {
                            out.c_source = Some(src);
                            out.exit_code = if r.eps <= spec.eps_bar { EXIT_OK } else { EXIT_ERROR };
                        }
                        Err(e) => report.fail(&e),
                    }
                    out.assignment = Some(a);
                }
                Err(e) => report.fail(&e),
            }
        }
    }
    out.report = report;
    out.spec = Some(spec);
    out.outcome = Some(outcome);
    out
}

fn build_spec(cfg: &RunConfig) -> Result<ApproxSpec> {
    let eps = parse_target(&cfg.target)?;
    let prec = cfg.precision.unwrap_or_else(|| default_precision(log2_abs(&eps)));
    if prec < 64 {
        return Err(Error::InvalidArgument(format!("precision {prec} is below 64 bits")));
    }
    let i = parse_domain(&cfg.domain, prec)?;
    let f = function_handle(&cfg.function, &i, prec)?;
    let mode = match cfg.mode {
        ModeArg::Relative => ErrorMode::Relative,
        ModeArg::Absolute => ErrorMode::Absolute,
    };
    let mut spec = ApproxSpec::new(f, i, eps, mode)?;
    spec.prec = prec;
    spec.iter_limit = cfg.iter_limit;
    Ok(spec)
}

/// Runs the pipeline, writes the requested files and returns the exit code.
/// Diagnostics go to stderr.
pub fn run(cfg: &RunConfig) -> i32 {
    let mut out = execute(cfg);
    if let (Some(path), Some(src)) = (&cfg.emit_c, &out.c_source) {
        if let Err(e) = std::fs::write(path, src) {
            out.report.fail(&Error::InvalidArgument(format!("cannot write {}: {e}", path.display())));
            out.exit_code = EXIT_ERROR;
        }
    }
    if let Some(path) = &cfg.report {
        if let Err(e) = std::fs::write(path, out.report.to_json()) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return EXIT_ERROR;
        }
    }
    match (&out.report.error, out.exit_code) {
        (Some(msg), _) => eprintln!("error: {msg}"),
        (None, EXIT_BOTTOM) => eprintln!("no cancellation-free polynomial within {} iterations", cfg.iter_limit),
        (None, _) => eprintln!("{}", out.report.summary()),
    }
    out.exit_code
}
