//! Number formatting and the canonical JSON writer.
//!
//! Every float is written with 17 significant digits so that output files
//! round-trip bit-exactly; JSON objects are pretty-printed with sorted keys.

use serde_json::Value;

/// 17 significant digits in scientific notation; `inf`, `-inf`, `nan` for
/// non-finite values.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// JSON number for a float, or the string `"inf"`/`"-inf"`/`"nan"`.
pub fn float_value(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or_else(|| Value::String(fmt_num(x)), Value::Number)
}

/// Pretty-printed JSON with sorted keys and 17-digit floats.
pub fn to_canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(v, 0, &mut out);
    out.push('\n');
    out
}

fn indent(level: usize, out: &mut String) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn write_value(v: &Value, level: usize, out: &mut String) {
    match v {
        Value::Null | Value::Bool(_) | Value::String(_) => out.push_str(&v.to_string()),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&fmt_num(n.as_f64().expect("f64 number")));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            let flat = items.iter().all(|x| !x.is_array() && !x.is_object());
            out.push('[');
            for (k, item) in items.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                if flat {
                    if k > 0 {
                        out.push(' ');
                    }
                } else {
                    out.push('\n');
                    indent(level + 1, out);
                }
                write_value(item, level + 1, out);
            }
            if !flat {
                out.push('\n');
                indent(level, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (k, key) in keys.iter().enumerate() {
                indent(level + 1, out);
                out.push_str(&Value::String((*key).clone()).to_string());
                out.push_str(": ");
                write_value(&map[*key], level + 1, out);
                if k + 1 < keys.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            indent(level, out);
            out.push('}');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_num(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_num(-2.0), "-2.0000000000000000e0");
        assert_eq!(fmt_num(f64::INFINITY), "inf");
        let x = std::f64::consts::PI;
        assert_eq!(fmt_num(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn canonical_json_sorts_keys_and_parses_back() {
        let v = json!({"b": [1.5, 2], "a": {"z": true, "c": [[0.25]]}, "s": "x"});
        let text = to_canonical_json(&v);
        assert!(text.find("\"a\"").unwrap() < text.find("\"b\"").unwrap());
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["b"][0].as_f64(), Some(1.5));
        assert_eq!(back["b"][1].as_i64(), Some(2));
        assert_eq!(back["a"]["c"][0][0].as_f64(), Some(0.25));
    }

    #[test]
    fn non_finite_floats_become_strings() {
        assert_eq!(float_value(f64::INFINITY), json!("inf"));
        assert_eq!(float_value(0.5), json!(0.5));
    }
}
