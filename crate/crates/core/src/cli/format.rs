//! Text encodings for reports.

use std::fmt::Write as _;

use serde_json::Value;

const SIGNIFICANT: usize = 12;

/// Machine-readable decimal with 12 significant digits.
pub fn number(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIGNIFICANT as i32).contains(&exp) {
        let decimals = (SIGNIFICANT as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    if t == "-0" {
        "0".into()
    } else {
        t.to_string()
    }
}

/// The value a machine-format reader recovers from [`number`].
pub fn rounded(v: f64) -> f64 {
    number(v).parse().unwrap_or(v)
}

/// Two decimals, for human tables.
pub fn human(v: f64) -> String {
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

/// JSON number rounded like [`number`]; non-finite values become strings.
pub fn json_number(v: f64) -> Value {
    match serde_json::Number::from_f64(rounded(v)) {
        Some(n) => Value::Number(n),
        None => Value::String(number(v)),
    }
}

pub fn csv_line(fields: &[String]) -> String {
    let mut out = String::new();
    for (i, f) in fields.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        if f.contains([',', '"', '\n']) {
            let _ = write!(out, "\"{}\"", f.replace('"', "\"\""));
        } else {
            out.push_str(f);
        }
    }
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(number(-36.60444054552604), "-36.6044405455");
        assert_eq!(number(17.710840545526043), "17.7108405455");
        assert_eq!(number(0.5), "0.5");
        assert_eq!(number(1.0), "1");
        assert_eq!(number(-0.0), "0");
        assert_eq!(number(1234567.0), "1234567");
        assert_eq!(number(1.5e-7), "1.5e-7");
        assert_eq!(number(2.5e13), "2.5e13");
        assert_eq!(number(f64::INFINITY), "inf");
        assert_eq!(number(9.9999999999996), "10");
    }

    #[test]
    fn emitted_numbers_reparse_to_themselves() {
        for v in [std::f64::consts::PI, -1.0 / 3.0, 4.2e-9, 6.02e23, 42.94] {
            let r = rounded(v);
            assert_eq!(number(r), number(v));
            assert_eq!(json_number(v).as_f64(), Some(r));
            assert_eq!(
                serde_json::to_string(&json_number(v))
                    .unwrap()
                    .parse::<f64>()
                    .unwrap(),
                r
            );
        }
    }

    #[test]
    fn human_rounding() {
        assert_eq!(human(-36.60444), "-36.60");
        assert_eq!(human(-5.248222), "-5.25");
        assert_eq!(human(-0.001), "0.00");
    }

    #[test]
    fn csv_quoting() {
        assert_eq!(csv_line(&["a".into(), "b,c".into()]), "a,\"b,c\"\n");
    }
}
