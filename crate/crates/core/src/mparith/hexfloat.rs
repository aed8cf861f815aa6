//! Bit-exact textual forms: C99 hex-float literals and exact decimal parsing.

use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};

/// Formats `m * 2^e` (with `m` odd or zero) as a normalized hex float.
fn format_integer_exp(neg: bool, mut m: Integer, mut e: i64) -> String {
    if m == 0 {
        return if neg { "-0x0p+0".into() } else { "0x0p+0".into() };
    }
    let tz = m.find_one(0).unwrap_or(0);
    m >>= tz;
    e += i64::from(tz);
    let bits = m.significant_bits();
    let exp = e + i64::from(bits) - 1;
    let frac_bits = bits - 1;
    let sign = if neg { "-" } else { "" };
    if frac_bits == 0 {
        return format!("{sign}0x1p{exp:+}");
    }
    let pad = (4 - frac_bits % 4) % 4;
    let digits = ((frac_bits + pad) / 4) as usize;
    let frac: Integer = (m - (Integer::from(1) << frac_bits)) << pad;
    format!("{sign}0x1.{:0>width$}p{exp:+}", frac.to_string_radix(16), width = digits)
}

/// Exact hex-float rendering of an MPFR number, e.g. `0x1.8p-3`.
pub fn format_hex(x: &Float) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x.is_sign_negative() { "-inf".into() } else { "inf".into() };
    }
    if x.is_zero() {
        return if x.is_sign_negative() { "-0x0p+0".into() } else { "0x0p+0".into() };
    }
    let (m, e) = x.to_integer_exp().expect("finite");
    let neg = m < 0;
    format_integer_exp(neg, m.abs(), i64::from(e))
}

/// Exact hex-float rendering of a binary64 value.
pub fn format_f64_hex(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x < 0.0 { "-inf".into() } else { "inf".into() };
    }
    let bits = x.to_bits();
    let neg = bits >> 63 == 1;
    let exp_field = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (m, e) = if exp_field == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp_field - 1075)
    };
    format_integer_exp(neg, Integer::from(m), e)
}

/// Exact decimal rendering of a finite MPFR number (binary fractions have
/// terminating decimal expansions).
pub fn format_decimal_exact(x: &Float) -> String {
    if !x.is_finite() {
        return format_hex(x);
    }
    if x.is_zero() {
        return "0".into();
    }
    let (m, e) = x.to_integer_exp().expect("finite");
    let sign = if m < 0 { "-" } else { "" };
    let m = m.abs();
    if e >= 0 {
        return format!("{sign}{}", m << e.unsigned_abs());
    }
    let k = e.unsigned_abs() as usize;
    let digits = (m * Integer::from(Integer::u_pow_u(5, k as u32))).to_string();
    let padded = format!("{digits:0>width$}", width = k + 1);
    let (int_part, frac_part) = padded.split_at(padded.len() - k);
    let frac_part = frac_part.trim_end_matches('0');
    if frac_part.is_empty() {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac_part}")
    }
}

fn hex_digit(c: u8) -> Option<u32> {
    (c as char).to_digit(16)
}

/// Parses a hex float (`[-]0x1.8p-3`), a decimal (`-0.125`, `1e-3`) or an
/// integer into the exact rational it denotes.
pub fn parse_exact(text: &str) -> Result<Rational> {
    let s = text.trim();
    let err = |msg: &str| Error::Parse { pos: 0, msg: format!("{msg}: {text:?}") };
    let (neg, body) = match s.as_bytes().first() {
        Some(b'-') => (true, &s[1..]),
        Some(b'+') => (false, &s[1..]),
        _ => (false, s),
    };
    if body.is_empty() {
        return Err(err("empty number"));
    }
    let value = if body.starts_with("0x") || body.starts_with("0X") {
        parse_hex_body(&body[2..]).ok_or_else(|| err("malformed hex float"))?
    } else {
        parse_decimal_body(body).ok_or_else(|| err("malformed decimal"))?
    };
    Ok(if neg { -value } else { value })
}

fn parse_hex_body(body: &str) -> Option<Rational> {
    let bytes = body.as_bytes();
    let mut i = 0;
    let mut mant = Integer::new();
    let mut frac_digits: i64 = 0;
    let mut seen_digit = false;
    let mut seen_point = false;
    while i < bytes.len() {
        let c = bytes[i];
        if c == b'.' {
            if seen_point {
                return None;
            }
            seen_point = true;
        } else if let Some(d) = hex_digit(c) {
            mant = (mant << 4) + d;
            seen_digit = true;
            if seen_point {
                frac_digits += 1;
            }
        } else {
            break;
        }
        i += 1;
    }
    if !seen_digit {
        return None;
    }
    let mut exp: i64 = 0;
    if i < bytes.len() {
        if bytes[i] != b'p' && bytes[i] != b'P' {
            return None;
        }
        exp = body[i + 1..].parse().ok()?;
    }
    let e = exp - 4 * frac_digits;
    Some(scale_pow(Rational::from(mant), 2, e))
}

fn parse_decimal_body(body: &str) -> Option<Rational> {
    let (mant_part, exp) = match body.find(['e', 'E']) {
        Some(k) => (&body[..k], body[k + 1..].parse::<i64>().ok()?),
        None => (body, 0),
    };
    let (int_part, frac_part) = match mant_part.find('.') {
        Some(k) => (&mant_part[..k], &mant_part[k + 1..]),
        None => (mant_part, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mant = Integer::from_str_radix(&digits, 10).ok()?;
    Some(scale_pow(Rational::from(mant), 10, exp - frac_part.len() as i64))
}

fn scale_pow(r: Rational, base: u32, e: i64) -> Rational {
    let p = Integer::from(Integer::u_pow_u(base, e.unsigned_abs() as u32));
    if e >= 0 {
        r * p
    } else {
        r / p
    }
}

/// Parses a hex-float literal that must denote a binary64 value exactly.
pub fn parse_f64_hex(text: &str) -> Result<f64> {
    let r = parse_exact(text)?;
    let f = Float::with_val(53, &r);
    let v = f.to_f64();
    if Rational::from_f64(v) != Some(r) && !(v == 0.0) {
        return Err(Error::Parse { pos: 0, msg: format!("{text:?} is not a binary64 value") });
    }
    if text.trim_start().starts_with('-') && v == 0.0 {
        return Ok(-0.0);
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_simple_values() {
        assert_eq!(format_f64_hex(1.0), "0x1p+0");
        assert_eq!(format_f64_hex(0.1875), "0x1.8p-3");
        assert_eq!(format_f64_hex(-2.5), "-0x1.4p+1");
        assert_eq!(format_f64_hex(0.0), "0x0p+0");
        assert_eq!(format_f64_hex(f64::MIN_POSITIVE / 4.0), "0x1p-1024");
        assert_eq!(format_hex(&(Float::with_val(200, 3) / 4)), "0x1.8p-1");
    }

    #[test]
    fn parses_hex_and_decimal_exactly() {
        assert_eq!(parse_exact("0x1.8p-3").unwrap(), Rational::from((3, 16)));
        assert_eq!(parse_exact("-0.125").unwrap(), Rational::from((-1, 8)));
        assert_eq!(parse_exact("1e-3").unwrap(), Rational::from((1, 1000)));
        assert_eq!(parse_exact("42").unwrap(), Rational::from(42));
        assert_eq!(parse_exact(".5").unwrap(), Rational::from((1, 2)));
        assert!(parse_exact("0x").is_err());
        assert!(parse_exact("1.2.3").is_err());
    }

    #[test]
    fn f64_round_trip_on_awkward_values() {
        for v in [1.0 / 3.0, -1e-300, 5e-324, f64::MAX, 0.1, -0.0] {
            let s = format_f64_hex(v);
            assert_eq!(parse_f64_hex(&s).unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert!(parse_f64_hex("0x1.00000000000001p+0").is_err());
    }

    #[test]
    fn exact_decimals() {
        assert_eq!(format_decimal_exact(&Float::with_val(53, 0.1875)), "0.1875");
        assert_eq!(format_decimal_exact(&Float::with_val(53, -12.5)), "-12.5");
        assert_eq!(format_decimal_exact(&Float::with_val(53, 1024)), "1024");
        let x = Float::with_val(200, 1) / Float::with_val(200, 3);
        assert_eq!(Float::with_val(200, &parse_exact(&format_decimal_exact(&x)).unwrap()), x);
    }

    #[test]
    fn big_round_trip() {
        let x = Float::with_val(300, 1) / Float::with_val(300, 3);
        let r = parse_exact(&format_hex(&x)).unwrap();
        assert_eq!(Float::with_val(300, &r), x);
    }
}
