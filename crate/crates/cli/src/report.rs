//! Versioned JSON report. Exact quantities are hex-float strings.

use rug::Float;
use serde::{Deserialize, Serialize};

use cfpoly::cancellation::CancellationReport;
use cfpoly::codegen::Assignment;
use cfpoly::driver::{ApproxResult, ApproxSpec, IterationRecord};
use cfpoly::mparith::{format_f64_hex, format_hex, log2_abs};
use cfpoly::Error;

use crate::{FunctionSource, ModeArg, RunConfig};

pub const REPORT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: u32,
    /// `found`, `bottom` or `error`.
    pub status: String,
    pub error: Option<String>,
    pub input: InputSection,
    pub result: Option<ResultSection>,
    pub evaluation: Option<EvaluationSection>,
    pub history: Vec<HistoryEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputSection {
    pub function: String,
    pub domain: String,
    pub target: String,
    pub mode: String,
    pub iter_limit: usize,
    /// Interval actually used, rounded outward.
    pub interval: Option<[String; 2]>,
    pub target_value: Option<String>,
    pub precision: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultSection {
    pub basis: Vec<u32>,
    pub degree: u32,
    pub zero_multiplicity: u32,
    /// Real coefficients by increasing exponent.
    pub coefficients: Vec<Coefficient>,
    pub eps: String,
    pub log2_eps: f64,
    pub eps_estimate: String,
    pub log2_eps_estimate: f64,
    pub iterations: usize,
    pub remez_status: String,
    pub cancellation_free: bool,
    pub cancellation: Vec<CancellationStep>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub exponent: u32,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CancellationStep {
    pub index: u32,
    pub verdict: String,
    pub alpha_lo: String,
    pub alpha_hi: String,
    pub coeff: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationSection {
    /// Machine coefficients by decreasing exponent.
    pub coefficients: Vec<MachineCoefficient>,
    /// Operation format of each Horner step, from the leading coefficient.
    pub steps: Vec<StepFormat>,
    pub final_format: String,
    pub bound: String,
    pub log2_bound: f64,
    /// Certified error of the rounded polynomial.
    pub rounded_eps: String,
    pub log2_rounded_eps: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MachineCoefficient {
    pub exponent: u32,
    pub format: String,
    pub parts: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepFormat {
    /// Exponent whose coefficient the step adds; absent for the final
    /// multiplication by the lowest power.
    pub exponent: Option<u32>,
    pub power: Option<u32>,
    pub format: String,
    pub log2_contribution: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub k: usize,
    pub stage: String,
    pub degree: u32,
    pub basis: Vec<u32>,
    /// `null` when the stage produced no error estimate.
    pub log2_eps: Option<f64>,
    pub certified: bool,
    pub cancelling: Vec<u32>,
    pub note: Option<String>,
}

/// `log2 |x|` rounded to four decimals; zero maps to `-1e9`.
fn log2(x: &Float) -> f64 {
    let v = log2_abs(x);
    if v.is_finite() {
        (v * 1e4).round() / 1e4
    } else if v.is_nan() {
        1e9
    } else {
        v.clamp(-1e9, 1e9)
    }
}

fn history(records: &[IterationRecord]) -> Vec<HistoryEntry> {
    records
        .iter()
        .map(|h| HistoryEntry {
            k: h.k,
            stage: h.stage.name().into(),
            degree: h.degree,
            basis: h.basis.exponents().to_vec(),
            log2_eps: h.log2_eps.is_finite().then(|| (h.log2_eps * 1e4).round() / 1e4),
            certified: h.certified_norm,
            cancelling: h
                .verdicts
                .iter()
                .filter(|v| v.1 == cfpoly::cancellation::Verdict::Cancelling)
                .map(|v| v.0)
                .collect(),
            note: h.note.clone(),
        })
        .collect()
}

fn cancellation(rep: &CancellationReport) -> Vec<CancellationStep> {
    rep.steps
        .iter()
        .map(|s| CancellationStep {
            index: s.index,
            verdict: s.verdict.name().into(),
            alpha_lo: format_hex(&s.alpha_lo),
            alpha_hi: format_hex(&s.alpha_hi),
            coeff: format_hex(&s.coeff),
        })
        .collect()
}

impl Report {
    pub fn new(cfg: &RunConfig) -> Report {
        let function = match &cfg.function {
            FunctionSource::Expression(e) => e.clone(),
            FunctionSource::Plugin { program, args } => {
                let mut s = format!("plugin:{}", program.display());
                for a in args {
                    s.push(' ');
                    s.push_str(a);
                }
                s
            }
        };
        Report {
            version: REPORT_VERSION,
            status: "error".into(),
            error: None,
            input: InputSection {
                function,
                domain: cfg.domain.clone(),
                target: cfg.target.clone(),
                mode: match cfg.mode {
                    ModeArg::Relative => "relative",
                    ModeArg::Absolute => "absolute",
                }
                .into(),
                iter_limit: cfg.iter_limit,
                interval: None,
                target_value: None,
                precision: None,
            },
            result: None,
            evaluation: None,
            history: Vec::new(),
        }
    }

    pub fn fail(&mut self, e: &Error) {
        self.status = "error".into();
        self.error = Some(e.to_string());
    }

    pub fn set_spec(&mut self, spec: &ApproxSpec) {
        self.input.interval = Some([format_hex(spec.interval.lo()), format_hex(spec.interval.hi())]);
        self.input.target_value = Some(format_hex(&spec.eps_bar));
        self.input.precision = Some(spec.prec);
    }

    pub fn set_bottom(&mut self, records: &[IterationRecord]) {
        self.status = "bottom".into();
        self.history = history(records);
    }

    pub fn set_result(&mut self, r: &ApproxResult) {
        self.status = "found".into();
        self.history = history(&r.history);
        self.result = Some(ResultSection {
            basis: r.basis.exponents().to_vec(),
            degree: r.degree,
            zero_multiplicity: r.zero_multiplicity,
            coefficients: r.poly.terms().map(|(e, c)| Coefficient { exponent: e, value: format_hex(c) }).collect(),
            eps: format_hex(&r.eps),
            log2_eps: log2(&r.eps),
            eps_estimate: format_hex(&r.eps_estimate),
            log2_eps_estimate: log2(&r.eps_estimate),
            iterations: r.iterations,
            remez_status: r.remez_status.name().into(),
            cancellation_free: r.verified_cancellation_free,
            cancellation: cancellation(&r.cancellation),
        });
    }

    pub fn set_assignment(&mut self, a: &Assignment) {
        let fp = &a.fp;
        let mut steps: Vec<StepFormat> = fp
            .steps
            .iter()
            .zip(&a.eval.per_step)
            .map(|(s, b)| StepFormat {
                exponent: Some(s.exponent),
                power: Some(s.power),
                format: s.kind.short().into(),
                log2_contribution: log2(&b.contribution),
            })
            .collect();
        if let Some(last) = a.eval.per_step.get(fp.steps.len()) {
            steps.push(StepFormat {
                exponent: None,
                power: Some(fp.lowest()),
                format: last.kind.short().into(),
                log2_contribution: log2(&last.contribution),
            });
        }
        self.evaluation = Some(EvaluationSection {
            coefficients: fp
                .coeffs
                .iter()
                .map(|c| MachineCoefficient {
                    exponent: c.exponent,
                    format: c.kind.short().into(),
                    parts: c.parts.iter().map(|&v| format_f64_hex(v)).collect(),
                })
                .collect(),
            steps,
            final_format: fp.final_kind.short().into(),
            bound: format_hex(&a.eval.bound),
            log2_bound: log2(&a.eval.bound),
            rounded_eps: format_hex(&a.rounded_norm.upper_bound),
            log2_rounded_eps: log2(&a.rounded_norm.upper_bound),
        });
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// One-line human summary.
    pub fn summary(&self) -> String {
        let Some(r) = &self.result else { return self.status.clone() };
        let eps = if r.eps == "0x0p+0" { "0".to_string() } else { format!("2^{:.2}", r.log2_eps) };
        match &self.evaluation {
            Some(e) => format!("basis {:?}, certified error {eps}, evaluation error 2^{:.2}", r.basis, e.log2_bound),
            None => format!("basis {:?}, certified error {eps}", r.basis),
        }
    }
}
