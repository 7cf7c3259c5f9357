//! Deterministic text output: every float is printed with 17 significant
//! digits so that equal results give byte-identical files.

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

/// `x` in scientific notation with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if x == 0.0 {
        // fold −0 into 0
        return format!("{:.16e}", 0.0);
    }
    format!("{x:.16e}")
}

/// Pretty-printed JSON in which floats use [`fmt17`].
pub fn to_json_17<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::Numerical(e.to_string()))?;
    let mut out = String::new();
    write_value(&v, 0, &mut out);
    out.push('\n');
    Ok(out)
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&fmt17(n.as_f64().unwrap_or(f64::NAN)));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            // short numeric rows stay on one line
            if items.iter().all(|x| x.is_number()) && items.len() <= 8 {
                out.push('[');
                for (i, x) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(x, indent, out);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(x, indent + 1, out);
                if i + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (i, (k, x)) in map.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(x, indent + 1, out);
                if i + 1 < map.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 2f64.sqrt(), -1e-300, 6.02e23, 1.0 / 3.0] {
            let s = fmt17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
        }
        assert_eq!(fmt17(-0.0), fmt17(0.0));
    }

    #[test]
    fn json_is_valid_and_stable() {
        #[derive(Serialize)]
        struct S {
            a: f64,
            n: usize,
            v: Vec<f64>,
            name: &'static str,
        }
        let s = S {
            a: 0.5,
            n: 3,
            v: vec![1.0, 2.5],
            name: "x\"y",
        };
        let text = to_json_17(&s).unwrap();
        assert_eq!(text, to_json_17(&s).unwrap());
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["a"].as_f64(), Some(0.5));
        assert_eq!(back["n"].as_u64(), Some(3));
        assert_eq!(back["name"].as_str(), Some("x\"y"));
        assert!(text.contains("5.0000000000000000e-1"));
    }
}
