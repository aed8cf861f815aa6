//! C source generation for the Horner scheme of an [`FpPoly`].

use std::collections::BTreeSet;
use std::fmt::Write;

use super::format::{power_schedule, FpCoeff, FpKind, FpPoly};
use crate::error::{Error, Result};
use crate::mparith::{format_f64_hex, parse_f64_hex};

fn is_c_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn eft_helpers(p: &str) -> String {
    format!(
        r#"static inline void {p}_two_sum(double a, double b, double *s, double *e) {{
  double t = a + b;
  double bb = t - a;
  *e = (a - (t - bb)) + (b - bb);
  *s = t;
}}

/* Requires |a| >= |b| or a == 0. */
static inline void {p}_fast_two_sum(double a, double b, double *s, double *e) {{
  double t = a + b;
  *e = b - (t - a);
  *s = t;
}}

static inline void {p}_split(double a, double *hi, double *lo) {{
  double c = 134217729.0 * a;
  double h = c - (c - a);
  *hi = h;
  *lo = a - h;
}}

static inline void {p}_two_prod(double a, double b, double *p, double *e) {{
  double ah, al, bh, bl;
  double q = a * b;
  {p}_split(a, &ah, &al);
  {p}_split(b, &bh, &bl);
  *e = ((ah * bh - q) + ah * bl + al * bh) + al * bl;
  *p = q;
}}
"#
    )
}

fn dd_helpers(p: &str) -> String {
    format!(
        r#"
static inline void {p}_dd_add(const double *a, const double *b, double *r) {{
  double s1, s2, t1, t2;
  {p}_two_sum(a[0], b[0], &s1, &s2);
  {p}_two_sum(a[1], b[1], &t1, &t2);
  s2 = s2 + t1;
  {p}_fast_two_sum(s1, s2, &s1, &s2);
  s2 = s2 + t2;
  {p}_fast_two_sum(s1, s2, &s1, &s2);
  r[0] = s1;
  r[1] = s2;
}}

static inline void {p}_dd_mul(const double *a, const double *b, double *r) {{
  double q, e;
  {p}_two_prod(a[0], b[0], &q, &e);
  e = e + (a[0] * b[1] + a[1] * b[0]);
  {p}_fast_two_sum(q, e, &q, &e);
  r[0] = q;
  r[1] = e;
}}

static inline void {p}_dd_mul_d(const double *a, double b, double *r) {{
  double q, e;
  {p}_two_prod(a[0], b, &q, &e);
  e = e + a[1] * b;
  {p}_fast_two_sum(q, e, &q, &e);
  r[0] = q;
  r[1] = e;
}}
"#
    )
}

fn td_helpers(p: &str) -> String {
    format!(
        r#"
static inline void {p}_vec_sum(double *v, int n) {{
  for (int i = n - 1; i >= 1; i--) {{
    {p}_two_sum(v[i - 1], v[i], &v[i - 1], &v[i]);
  }}
}}

static inline void {p}_td_compress(double *v, int n, double *r) {{
  {p}_vec_sum(v, n);
  {p}_vec_sum(v, n);
  double r0 = v[0];
  {p}_vec_sum(v + 1, n - 1);
  double r1 = v[1];
  double r2 = 0.0;
  for (int i = 2; i < n; i++) {{
    r2 = r2 + v[i];
  }}
  {p}_fast_two_sum(r0, r1, &r0, &r1);
  {p}_fast_two_sum(r1, r2, &r1, &r2);
  r[0] = r0;
  r[1] = r1;
  r[2] = r2;
}}

static inline void {p}_td_add(const double *a, const double *b, double *r) {{
  double v[6] = {{a[0], b[0], a[1], b[1], a[2], b[2]}};
  {p}_td_compress(v, 6, r);
}}

static inline void {p}_td_mul(const double *a, const double *b, double *r) {{
  double p00, e00, p01, e01, p10, e10;
  {p}_two_prod(a[0], b[0], &p00, &e00);
  {p}_two_prod(a[0], b[1], &p01, &e01);
  {p}_two_prod(a[1], b[0], &p10, &e10);
  double v[9] = {{p00, e00, p01, p10, e01, e10, a[0] * b[2], a[2] * b[0], a[1] * b[1]}};
  {p}_td_compress(v, 9, r);
}}

static inline void {p}_td_mul_d(const double *a, double b, double *r) {{
  double p0, e0, p1, e1;
  {p}_two_prod(a[0], b, &p0, &e0);
  {p}_two_prod(a[1], b, &p1, &e1);
  double v[5] = {{p0, e0, p1, e1, a[2] * b}};
  {p}_td_compress(v, 5, r);
}}
"#
    )
}

fn lower(kind: FpKind) -> &'static str {
    match kind {
        FpKind::D => "d",
        FpKind::DD => "dd",
        FpKind::TD => "td",
    }
}

fn pow_var(d: u32, kind: FpKind) -> String {
    if d == 1 {
        "xw".into()
    } else {
        format!("x{d}_{}", lower(kind))
    }
}

/// `r = a * b` in `kind`; `r` may alias `a`.
fn mul_stmt(out: &mut String, p: &str, kind: FpKind, a: &str, b: &str, r: &str) {
    match kind {
        FpKind::D => writeln!(out, "  {r}[0] = {a}[0] * {b}[0];"),
        FpKind::DD => writeln!(out, "  {p}_dd_mul({a}, {b}, {r});"),
        FpKind::TD => writeln!(out, "  {p}_td_mul({a}, {b}, {r});"),
    }
    .expect("string write");
}

fn add_stmt(out: &mut String, p: &str, kind: FpKind, a: &str, b: &str, r: &str) {
    match kind {
        FpKind::D => writeln!(out, "  {r}[0] = {a}[0] + {b}[0];"),
        FpKind::DD => writeln!(out, "  {p}_dd_add({a}, {b}, {r});"),
        FpKind::TD => writeln!(out, "  {p}_td_add({a}, {b}, {r});"),
    }
    .expect("string write");
}

fn padded(parts: &[String]) -> String {
    let mut v = parts.to_vec();
    v.resize(3, "0.0".into());
    v.join(", ")
}

fn coeff_array(p: &str, c: &FpCoeff) -> String {
    format!("{p}_c{}", c.exponent)
}

/// Emits a self-contained C function evaluating `fp` with the same
/// operation sequence as [`super::eft::simulate`].
///
/// The result is `double NAME(double x)` for a double result, and returns
/// the leading component with the others stored through output pointers
/// (`lo`, or `mid` and `lo`) for expansion results.
pub fn emit_horner_c(fp: &FpPoly, name: &str) -> Result<String> {
    if !is_c_identifier(name) {
        return Err(Error::InvalidArgument(format!("{name:?} is not a C identifier")));
    }
    let p = name;
    let mut kinds: BTreeSet<FpKind> = fp.steps.iter().map(|s| s.kind).collect();
    if fp.lowest() > 0 {
        kinds.insert(fp.final_kind);
    }
    kinds.insert(fp.coeffs[0].kind);

    let mut out = String::new();
    writeln!(
        out,
        "/* Horner evaluation of a polynomial with {} monomials {}.\n * Requires IEEE-754 binary64 arithmetic with round-to-nearest and no\n * contraction of a*b+c into fused multiply-adds: compile with\n * -ffp-contract=off and without -ffast-math, on a target without x87\n * extended precision (for example -msse2 -mfpmath=sse on x86). */",
        fp.basis.len(),
        fp.basis
    )
    .expect("string write");
    // GCC ignores the standard pragma and warns about it.
    out.push_str("\n#if defined(__clang__) || !defined(__GNUC__)\n#pragma STDC FP_CONTRACT OFF\n#endif\n\n");

    for c in &fp.coeffs {
        let lits: Vec<String> = c.parts.iter().map(|&v| format_f64_hex(v)).collect();
        writeln!(
            out,
            "static const double {}[{}] = {{{}}}; /* x^{}, {} */",
            coeff_array(p, c),
            c.parts.len(),
            lits.join(", "),
            c.exponent,
            c.kind
        )
        .expect("string write");
    }
    out.push('\n');

    let expansions = kinds.iter().any(|&k| k != FpKind::D);
    if expansions {
        out.push_str(&eft_helpers(p));
    }
    if kinds.contains(&FpKind::DD) {
        out.push_str(&dd_helpers(p));
    }
    if kinds.contains(&FpKind::TD) {
        out.push_str(&td_helpers(p));
    }
    if expansions {
        out.push('\n');
    }

    let result = fp.result_kind();
    match result {
        FpKind::D => writeln!(out, "double {name}(double x) {{"),
        FpKind::DD => writeln!(out, "double {name}(double x, double *lo) {{"),
        FpKind::TD => writeln!(out, "double {name}(double x, double *mid, double *lo) {{"),
    }
    .expect("string write");

    let top = &fp.coeffs[0];
    let top_lits: Vec<String> = (0..top.parts.len()).map(|k| format!("{}[{k}]", coeff_array(p, top))).collect();
    writeln!(out, "  double acc[3] = {{{}}};", padded(&top_lits)).expect("string write");
    if !fp.steps.is_empty() {
        out.push_str("  double t[3] = {0.0, 0.0, 0.0};\n");
    }
    let uses_x = fp.steps.iter().any(|s| s.power == 1) || fp.lowest() == 1;
    if uses_x {
        out.push_str("  const double xw[3] = {x, 0.0, 0.0};\n");
    }

    // Powers of x, each computed once per format, in order of first use.
    let mut uses: Vec<(u32, FpKind)> = fp.steps.iter().map(|s| (s.power, s.kind)).collect();
    if fp.lowest() > 0 {
        uses.push((fp.lowest(), fp.final_kind));
    }
    let mut seen = BTreeSet::new();
    for (d, kind) in uses {
        if d == 1 || !seen.insert((d, kind)) {
            continue;
        }
        let v = pow_var(d, kind);
        writeln!(out, "  double {v}[3] = {{x, 0.0, 0.0}};").expect("string write");
        for square in power_schedule(d) {
            match (kind, square) {
                (FpKind::D, true) => writeln!(out, "  {v}[0] = {v}[0] * {v}[0];"),
                (FpKind::D, false) => writeln!(out, "  {v}[0] = {v}[0] * x;"),
                (FpKind::DD, true) => writeln!(out, "  {p}_dd_mul({v}, {v}, {v});"),
                (FpKind::DD, false) => writeln!(out, "  {p}_dd_mul_d({v}, x, {v});"),
                (FpKind::TD, true) => writeln!(out, "  {p}_td_mul({v}, {v}, {v});"),
                (FpKind::TD, false) => writeln!(out, "  {p}_td_mul_d({v}, x, {v});"),
            }
            .expect("string write");
        }
    }

    for (step, c) in fp.steps.iter().zip(&fp.coeffs[1..]) {
        writeln!(out, "  /* x^{}: multiply by x^{}, add in {} */", step.exponent, step.power, step.kind)
            .expect("string write");
        let coeff = if c.parts.len() < step.kind.parts() {
            let lits: Vec<String> = (0..c.parts.len()).map(|k| format!("{}[{k}]", coeff_array(p, c))).collect();
            let w = format!("cw{}", c.exponent);
            writeln!(out, "  const double {w}[3] = {{{}}};", padded(&lits)).expect("string write");
            w
        } else {
            coeff_array(p, c)
        };
        mul_stmt(&mut out, p, step.kind, "acc", &pow_var(step.power, step.kind), "t");
        add_stmt(&mut out, p, step.kind, "t", &coeff, "acc");
    }
    if fp.lowest() > 0 {
        writeln!(out, "  /* multiply by x^{} in {} */", fp.lowest(), fp.final_kind).expect("string write");
        mul_stmt(&mut out, p, fp.final_kind, "acc", &pow_var(fp.lowest(), fp.final_kind), "acc");
    }
    match result {
        FpKind::D => {}
        FpKind::DD => out.push_str("  *lo = acc[1];\n"),
        FpKind::TD => out.push_str("  *mid = acc[1];\n  *lo = acc[2];\n"),
    }
    out.push_str("  return acc[0];\n}\n");
    Ok(out)
}

/// Reads the coefficient tables back from emitted source, in emission
/// order (decreasing exponent).
pub fn decode_coefficients(src: &str) -> Result<Vec<FpCoeff>> {
    let bad = |line: &str| Error::Parse { pos: 0, msg: format!("malformed coefficient line {line:?}") };
    let mut out = Vec::new();
    for line in src.lines().filter(|l| l.starts_with("static const double ")) {
        let open = line.find('{').ok_or_else(|| bad(line))?;
        let close = line.find('}').ok_or_else(|| bad(line))?;
        let parts = line[open + 1..close]
            .split(',')
            .map(|s| parse_f64_hex(s.trim()))
            .collect::<Result<Vec<f64>>>()?;
        let comment = line[close..].split("/* x^").nth(1).ok_or_else(|| bad(line))?;
        let (exp, rest) = comment.split_once(',').ok_or_else(|| bad(line))?;
        let exponent: u32 = exp.trim().parse().map_err(|_| bad(line))?;
        let kind = match rest.trim().trim_end_matches("*/").trim() {
            "D" => FpKind::D,
            "DD" => FpKind::DD,
            "TD" => FpKind::TD,
            _ => return Err(bad(line)),
        };
        if parts.len() != kind.parts() {
            return Err(bad(line));
        }
        out.push(FpCoeff { exponent, kind, parts });
    }
    Ok(out)
}
