use std::io::Write;

use serde_json::{json, Map, Number, Value};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// `%.17g`: 17 significant digits, trailing zeros dropped, exponent form
/// outside `[1e-5, 1e17)`.
pub fn g17(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..17).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        trim_zeros(&format!("{x:.*}", (16 - exp) as usize)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Rewrites every floating-point number in `value` to 17 significant digits.
pub fn normalize(value: Value) -> Value {
    match value {
        Value::Number(n) if n.as_u64().is_none() && n.as_i64().is_none() => match n.as_f64() {
            Some(x) if x.is_finite() => {
                Value::Number(g17(x).parse::<Number>().expect("valid number"))
            }
            _ => Value::Null,
        },
        Value::Array(items) => Value::Array(items.into_iter().map(normalize).collect()),
        Value::Object(map) => Value::Object(
            map.into_iter()
                .map(|(k, v)| (k, normalize(v)))
                .collect::<Map<_, _>>(),
        ),
        other => other,
    }
}

pub fn to_json<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

pub fn envelope(command: &str, parameters: Value, results: Value) -> Value {
    normalize(json!({
        "command": command,
        "parameters": parameters,
        "results": results,
        "tool_version": TOOL_VERSION,
    }))
}

pub fn print_json(value: &Value) {
    // A closed pipe downstream (`| head`) is not an error worth reporting.
    let mut out = std::io::stdout().lock();
    if serde_json::to_writer_pretty(&mut out, value).is_ok() {
        let _ = writeln!(out);
    }
}

pub fn print_csv(header: &[&str], rows: &[Vec<String>]) {
    let mut w = csv::Writer::from_writer(std::io::stdout().lock());
    let _ = std::iter::once(header.iter().map(|s| s.to_string()).collect::<Vec<_>>())
        .chain(rows.iter().cloned())
        .try_for_each(|row| w.write_record(&row))
        .and_then(|()| w.flush().map_err(Into::into));
}

pub fn print_error(command: &str, kind: &str, message: &str) {
    let value = json!({
        "command": command,
        "error": { "kind": kind, "message": message },
        "tool_version": TOOL_VERSION,
    });
    eprintln!("{}", serde_json::to_string(&value).expect("serializable"));
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_matches_printf() {
        // Reference strings from C printf("%.17g").
        assert_eq!(g17(1.0 / 70.0), "0.014285714285714285");
        assert_eq!(g17(4.0), "4");
        assert_eq!(g17(0.1), "0.10000000000000001");
        assert_eq!(g17(1e-7), "9.9999999999999995e-08");
        assert_eq!(g17(-2.5), "-2.5");
        assert_eq!(g17(1e20), "1e+20");
        assert_eq!(g17(3.066_887_856_112_827_5), "3.0668878561128277");
    }

    #[test]
    fn normalize_keeps_integers() {
        let v = normalize(json!({"a": 70, "b": [0.5, -3], "c": f64::NAN}));
        assert_eq!(
            serde_json::to_string(&v).unwrap(),
            r#"{"a":70,"b":[0.5,-3],"c":null}"#
        );
    }
}
