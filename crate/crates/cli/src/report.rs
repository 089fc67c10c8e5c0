//! Check records, the consolidated report, and its JSON rendering.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;

use crate::config::Module;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// `measured ≤ tolerance`.
    AtMost,
    /// `measured ≥ tolerance`.
    AtLeast,
    /// `measured == expected`.
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub module: Module,
    pub name: String,
    pub measured: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub bound: Bound,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Check {
    pub fn at_most(module: Module, name: impl Into<String>, measured: f64, tol: f64) -> Self {
        Check {
            module,
            name: name.into(),
            measured: json(&measured),
            expected: None,
            tolerance: Some(tol),
            bound: Bound::AtMost,
            pass: measured <= tol,
            detail: None,
            error: None,
        }
    }

    pub fn at_least(module: Module, name: impl Into<String>, measured: f64, min: f64) -> Self {
        Check {
            bound: Bound::AtLeast,
            pass: measured >= min,
            ..Check::at_most(module, name, measured, min)
        }
    }

    pub fn exact<T: Serialize>(module: Module, name: impl Into<String>, measured: &T, expected: &T) -> Self {
        let (m, e) = (json(measured), json(expected));
        Check {
            module,
            name: name.into(),
            pass: m == e,
            measured: m,
            expected: Some(e),
            tolerance: None,
            bound: Bound::Exact,
            detail: None,
            error: None,
        }
    }

    /// A check whose computation itself failed.
    pub fn failed(module: Module, name: impl Into<String>, err: impl std::fmt::Display) -> Self {
        Check {
            module,
            name: name.into(),
            measured: Value::Null,
            expected: None,
            tolerance: None,
            bound: Bound::Exact,
            pass: false,
            detail: None,
            error: Some(err.to_string()),
        }
    }

    pub fn with_detail<T: Serialize>(mut self, detail: &T) -> Self {
        self.detail = Some(json(detail));
        self
    }
}

pub fn json<T: Serialize + ?Sized>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub checks: usize,
    pub failed: usize,
    pub failed_names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: Value,
    pub config: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    pub checks: Vec<Check>,
    pub summary: Summary,
    pub pass: bool,
    pub wall_time_s: f64,
}

impl Report {
    pub fn new(command: Value, config: Value, result: Option<Value>, checks: Vec<Check>, wall_time_s: f64) -> Self {
        let failed_names: Vec<String> = checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| format!("{}/{}", c.module, c.name))
            .collect();
        Report {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command,
            config,
            result,
            summary: Summary {
                checks: checks.len(),
                failed: failed_names.len(),
                failed_names,
            },
            pass: checks.iter().all(|c| c.pass),
            checks,
            wall_time_s,
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        to_json_string(self)
    }
}

/// Pretty printer that writes every float with 17 significant digits.
pub struct SigDigits17 {
    inner: PrettyFormatter<'static>,
}

impl Default for SigDigits17 {
    fn default() -> Self {
        SigDigits17 {
            inner: PrettyFormatter::with_indent(b"  "),
        }
    }
}

impl Formatter for SigDigits17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        // Non-finite values never reach here; serde_json writes them as null.
        write!(w, "{v:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.inner.end_object_value(w)
    }
}

pub fn to_json_string<T: Serialize + ?Sized>(v: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigits17::default());
    v.serialize(&mut ser).expect("serializing to memory");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_seventeen_digits() {
        let s = to_json_string(&[0.1f64, 2.622_057_554_292_119_8, 1e-300, -3.0]);
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        assert!(s.contains("2.6220575542921196e0"), "{s}");
        assert!(s.contains("-3.0000000000000000e0"), "{s}");
        let back: Vec<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![0.1, 2.622_057_554_292_119_8, 1e-300, -3.0]);
    }

    #[test]
    fn non_finite_values_become_null() {
        let s = to_json_string(&serde_json::json!({"a": 1}));
        assert!(s.contains("\"a\": 1"));
        let c = Check::at_most(Module::Nodal, "x", f64::NAN, 1.0);
        assert!(!c.pass);
        assert!(to_json_string(&c).contains("\"measured\": null"));
    }

    #[test]
    fn any_failure_fails_the_report() {
        let ok = Check::at_most(Module::Picard, "a", 0.5, 1.0);
        let bad = Check::at_least(Module::Picard, "b", 0.5, 1.0);
        let r = Report::new(Value::Null, Value::Null, None, vec![ok.clone()], 0.0);
        assert_eq!(r.exit_code(), 0);
        let r = Report::new(Value::Null, Value::Null, None, vec![ok, bad], 0.0);
        assert_eq!(r.exit_code(), 1);
        assert_eq!(r.summary.failed_names, vec!["picard/b".to_string()]);
    }

    #[test]
    fn exact_checks_compare_json() {
        assert!(Check::exact(Module::Picard, "q", &vec![1, 2], &vec![1, 2]).pass);
        assert!(!Check::exact(Module::Picard, "q", &-4i64, &4i64).pass);
    }
}
