//! Deterministic JSON emission: insertion-ordered keys and numbers printed
//! with 12 significant digits so reports are byte-identical across runs and
//! platforms.

use std::fmt::Write as _;

/// Significant digits used for every floating-point value in reports.
pub const SIG_DIGITS: usize = 12;

/// Format like C's `%.12g`: fixed notation for moderate exponents,
/// scientific otherwise, trailing zeros trimmed.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        // JSON has no NaN/Inf; callers should have filtered these out
        return "null".to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mant, exp) = sci.split_once('e').expect("exponential format");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -4 || exp >= SIG_DIGITS as i32 {
        let mant = mant.trim_end_matches('0').trim_end_matches('.');
        format!("{mant}e{exp}")
    } else {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        let fixed = format!("{x:.decimals$}");
        if fixed.contains('.') {
            fixed
                .trim_end_matches('0')
                .trim_end_matches('.')
                .to_string()
        } else {
            fixed
        }
    }
}

/// A minimal JSON tree with insertion-ordered objects.
#[derive(Debug, Clone)]
pub enum Json {
    Null,
    Bool(bool),
    Int(i64),
    Num(f64),
    Str(String),
    Arr(Vec<Json>),
    Obj(Vec<(String, Json)>),
}

impl Json {
    pub fn obj() -> Json {
        Json::Obj(Vec::new())
    }

    pub fn push(&mut self, key: &str, value: Json) -> &mut Json {
        match self {
            Json::Obj(fields) => fields.push((key.to_string(), value)),
            _ => panic!("push on non-object"),
        }
        self
    }

    /// Numeric value, mapping non-finite floats to null.
    pub fn num(x: f64) -> Json {
        if x.is_finite() {
            Json::Num(x)
        } else {
            Json::Null
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, 0);
        out.push('\n');
        out
    }

    fn write(&self, out: &mut String, indent: usize) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::Int(i) => {
                let _ = write!(out, "{i}");
            }
            Json::Num(x) => out.push_str(&fmt_sig(*x)),
            Json::Str(s) => write_escaped(out, s),
            Json::Arr(items) => {
                if items.is_empty() {
                    out.push_str("[]");
                    return;
                }
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push('\n');
                    out.push_str(&"  ".repeat(indent + 1));
                    item.write(out, indent + 1);
                }
                out.push('\n');
                out.push_str(&"  ".repeat(indent));
                out.push(']');
            }
            Json::Obj(fields) => {
                if fields.is_empty() {
                    out.push_str("{}");
                    return;
                }
                out.push('{');
                for (i, (k, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push('\n');
                    out.push_str(&"  ".repeat(indent + 1));
                    write_escaped(out, k);
                    out.push_str(": ");
                    v.write(out, indent + 1);
                }
                out.push('\n');
                out.push_str(&"  ".repeat(indent));
                out.push('}');
            }
        }
    }
}

fn write_escaped(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt_sig_cases() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(-2.5), "-2.5");
        assert_eq!(fmt_sig(0.36787944117144233), "0.367879441171");
        assert_eq!(fmt_sig(1234.5), "1234.5");
        assert_eq!(fmt_sig(1.23456789e-7), "1.23456789e-7");
        assert_eq!(fmt_sig(0.0001), "0.0001");
        // 12-digit rounding carries into the next decade
        assert_eq!(fmt_sig(9.999999999999e11), "1e12");
        assert_eq!(fmt_sig(1e12), "1e12");
        assert_eq!(fmt_sig(f64::NAN), "null");
    }

    #[test]
    fn renders_nested_objects_deterministically() {
        let mut j = Json::obj();
        j.push("b", Json::Int(2));
        j.push("a", Json::num(0.5));
        let mut inner = Json::obj();
        inner.push("x", Json::Bool(true));
        j.push("inner", inner);
        let s = j.render();
        assert!(s.starts_with("{\n  \"b\": 2,\n  \"a\": 0.5"));
        assert!(s.contains("\"inner\": {\n    \"x\": true\n  }"));
    }
}
