//! Report documents: `{suite, config_echo, checks, constants, timing_ms}`,
//! written with 17 significant digits and `null` for non-finite values.

use crate::error::Result;
use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::{Map, Value};
use std::io;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub measured: f64,
    pub bound: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub suite: String,
    pub config_echo: Value,
    pub checks: Vec<Check>,
    pub constants: Map<String, Value>,
    /// Always null so that reports are reproducible byte for byte.
    pub timing_ms: Option<f64>,
}

impl Report {
    pub fn new(suite: &str, config_echo: Value) -> Self {
        Report { suite: suite.to_string(), config_echo, checks: Vec::new(), constants: Map::new(), timing_ms: None }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status == Status::Pass)
    }

    /// measured <= bound (1 + tolerance).
    pub fn at_most(&mut self, name: impl Into<String>, measured: f64, bound: f64, tolerance: f64) -> bool {
        let ok = measured.is_finite() && measured <= bound * (1.0 + tolerance);
        self.push(name, ok, measured, bound, tolerance)
    }

    /// |measured - bound| <= tolerance.
    pub fn close(&mut self, name: impl Into<String>, measured: f64, expected: f64, tolerance: f64) -> bool {
        let ok = (measured - expected).abs() <= tolerance;
        self.push(name, ok, measured, expected, tolerance)
    }

    /// measured >= bound.
    pub fn at_least(&mut self, name: impl Into<String>, measured: f64, bound: f64) -> bool {
        let ok = measured >= bound;
        self.push(name, ok, measured, bound, 0.0)
    }

    /// Boolean outcome recorded as measured 1/0 against bound 1.
    pub fn holds(&mut self, name: impl Into<String>, ok: bool) -> bool {
        self.push(name, ok, if ok { 1.0 } else { 0.0 }, 1.0, 0.0)
    }

    pub fn push(&mut self, name: impl Into<String>, ok: bool, measured: f64, bound: f64, tolerance: f64) -> bool {
        self.checks.push(Check { name: name.into(), status: Status::from_bool(ok), measured, bound, tolerance });
        ok
    }

    pub fn constant<T: Serialize>(&mut self, key: &str, value: T) {
        self.constants.insert(key.to_string(), to_value(&value));
    }

    /// Fold another report's checks in under a name prefix.
    pub fn absorb(&mut self, other: Report) {
        let prefix = other.suite.clone();
        for mut c in other.checks {
            c.name = format!("{prefix}.{}", c.name);
            self.checks.push(c);
        }
        self.constants.insert(prefix, Value::Object(other.constants));
    }

    pub fn to_json(&self) -> Result<String> {
        to_json_string(self)
    }
}

/// serde_json value of `v`, with non-finite floats mapped to null.
pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

struct SigFigs;

impl Formatter for SigFigs {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(w, "{value:.16e}")
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
}

/// JSON text with every float printed as `d.dddddddddddddddde±x`.
pub fn to_json_string<T: Serialize>(v: &T) -> Result<String> {
    // serde_json::Value keeps floats as f64, so the formatter sees every one
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigFigs);
    v.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_use_seventeen_digits() {
        let s = to_json_string(&vec![0.1, 1.0, f64::NAN, f64::INFINITY]).unwrap();
        assert_eq!(s.trim(), "[1.0000000000000001e-1,1.0000000000000000e0,null,null]");
        let back: Vec<Option<f64>> = serde_json::from_str(&s).unwrap();
        assert_eq!(back[0], Some(0.1));
    }

    #[test]
    fn report_status() {
        let mut r = Report::new("x", Value::Null);
        assert!(r.at_most("a", 1.0, 1.0, 0.0));
        assert!(!r.at_most("b", f64::NAN, 1.0, 0.0));
        assert!(!r.passed());
        let s = r.to_json().unwrap();
        assert!(s.contains("\"timing_ms\":null"));
        assert!(s.contains("\"status\":\"fail\""));
    }
}
