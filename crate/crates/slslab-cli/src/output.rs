//! Result serialization: JSON objects with fixed field order and CSV cells,
//! both carrying 17 significant digits so every float round-trips exactly.

use std::path::Path;

use crate::CliError;

/// 17 significant digits; parses back to the identical bit pattern.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

/// JSON rendering of one number. JSON has no infinity literal, so infinite
/// values (legal for the leverage quantile) become tagged strings.
pub fn json_num(v: f64) -> String {
    if v.is_finite() {
        fmt_num(v)
    } else if v == f64::INFINITY {
        "\"inf\"".into()
    } else if v == f64::NEG_INFINITY {
        "\"-inf\"".into()
    } else {
        "\"nan\"".into()
    }
}

pub fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

/// Order-preserving JSON object builder.
pub struct JsonObj {
    fields: Vec<String>,
}

impl JsonObj {
    pub fn new() -> Self {
        Self { fields: Vec::new() }
    }

    pub fn num(mut self, key: &str, v: f64) -> Self {
        self.fields.push(format!("\"{key}\":{}", json_num(v)));
        self
    }

    pub fn opt_num(self, key: &str, v: Option<f64>) -> Self {
        match v {
            Some(x) => self.num(key, x),
            None => self.raw(key, "null".into()),
        }
    }

    pub fn int(mut self, key: &str, v: u64) -> Self {
        self.fields.push(format!("\"{key}\":{v}"));
        self
    }

    pub fn text(mut self, key: &str, v: &str) -> Self {
        self.fields.push(format!("\"{key}\":\"{}\"", json_escape(v)));
        self
    }

    pub fn raw(mut self, key: &str, v: String) -> Self {
        self.fields.push(format!("\"{key}\":{v}"));
        self
    }

    pub fn build(self) -> String {
        format!("{{{}}}", self.fields.join(","))
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [0.0, -1.5, 3.0, 0.339, 2.0f64.sqrt(), 1e-300, -7.15e-4] {
            assert_eq!(fmt_num(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn infinities_become_tagged_strings() {
        assert_eq!(json_num(f64::INFINITY), "\"inf\"");
        assert_eq!(json_num(f64::NEG_INFINITY), "\"-inf\"");
    }

    #[test]
    fn object_preserves_field_order() {
        let s = JsonObj::new().int("b", 1).num("a", 2.0).text("c", "x\"y").build();
        assert!(s.starts_with("{\"b\":1,\"a\":2.00"));
        assert!(s.contains("\"c\":\"x\\\"y\""));
        serde_json::from_str::<serde_json::Value>(&s).unwrap();
    }
}
