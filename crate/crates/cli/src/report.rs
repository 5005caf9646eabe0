//! Deterministic JSON reports and CSV samples.
//!
//! Field order is the declaration order of the structs below; every float is
//! written with 17 significant digits (`{:.16e}`), non-finite values as the
//! strings `"inf"`, `"-inf"` and `"nan"`.

use std::io::{self, Write};
use std::str::FromStr;

use serde::{Serialize, Serializer};

use dbarg_core::verify::CheckEntry;

/// Serialize an `f64` with 17 significant digits.
pub fn fixed<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_nan() {
        s.serialize_str("nan")
    } else if x.is_infinite() {
        s.serialize_str(if *x > 0.0 { "inf" } else { "-inf" })
    } else {
        // with arbitrary precision the digits are written verbatim
        serde_json::Number::from_str(&format_float(*x))
            .expect("formatted float is a JSON number")
            .serialize(s)
    }
}

fn fixed_opt<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => fixed(v, s),
        None => s.serialize_none(),
    }
}

fn fixed_pairs<S: Serializer>(v: &[(String, f64)], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = s.serialize_map(Some(v.len()))?;
    for (k, x) in v {
        map.serialize_entry(k, &Fixed(*x))?;
    }
    map.end()
}

struct Fixed(f64);

impl Serialize for Fixed {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        fixed(&self.0, s)
    }
}

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PsiReport {
    pub family: String,
    #[serde(serialize_with = "fixed_pairs")]
    pub params: Vec<(String, f64)>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub coeffs: Vec<Fixed64>,
    #[serde(serialize_with = "fixed")]
    pub mu: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Fixed64(#[serde(serialize_with = "fixed")] pub f64);

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub kind: &'static str,
    pub nu_minus: Option<i64>,
    pub nu_plus: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DomainReport {
    pub ladder: &'static str,
    pub shape: &'static str,
    #[serde(serialize_with = "fixed")]
    pub inner_r2: f64,
    #[serde(serialize_with = "fixed")]
    pub outer_r2: f64,
    pub origin_included: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightReport {
    pub kind: &'static str,
    pub density: Option<&'static str>,
    pub frame_dual: bool,
    pub frame_shift: i64,
    #[serde(serialize_with = "fixed")]
    pub scale: f64,
    #[serde(serialize_with = "fixed")]
    pub normalization: f64,
    #[serde(serialize_with = "fixed")]
    pub abscissa: f64,
    pub feasibility: Option<&'static str>,
    pub atoms: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelReport {
    #[serde(serialize_with = "fixed")]
    pub u_min: f64,
    #[serde(serialize_with = "fixed")]
    pub u_max: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    #[serde(serialize_with = "fixed")]
    pub target: f64,
    #[serde(serialize_with = "fixed")]
    pub computed: f64,
    #[serde(serialize_with = "fixed")]
    pub abs_err: f64,
    #[serde(serialize_with = "fixed")]
    pub rel_err: f64,
    #[serde(serialize_with = "fixed")]
    pub tol: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl From<&CheckEntry> for CheckReport {
    fn from(e: &CheckEntry) -> Self {
        CheckReport {
            name: e.name.clone(),
            target: e.target,
            computed: e.computed,
            abs_err: e.abs_err,
            rel_err: e.rel_err,
            tol: e.tol,
            pass: e.pass,
            message: None,
        }
    }
}

impl CheckReport {
    /// A check that could not be evaluated.
    pub fn error(name: impl Into<String>, message: impl Into<String>) -> Self {
        CheckReport {
            name: name.into(),
            target: f64::NAN,
            computed: f64::NAN,
            abs_err: f64::NAN,
            rel_err: f64::NAN,
            tol: f64::NAN,
            pass: false,
            message: Some(message.into()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub psi: PsiReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight: Option<WeightReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelReport>,
    pub settings: Settings,
    pub checks: Vec<CheckReport>,
    pub passed: bool,
    pub first_failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Settings {
    pub dim: usize,
    pub offset: Option<i64>,
    #[serde(serialize_with = "fixed_opt")]
    pub tol: Option<f64>,
    #[serde(serialize_with = "fixed")]
    pub x_min: f64,
    #[serde(serialize_with = "fixed")]
    pub x_max: f64,
    pub points: usize,
    pub n_max: i64,
}

impl Report {
    /// Recompute `passed` / `first_failure` from the checks.
    pub fn finish(&mut self) {
        self.passed = self.checks.iter().all(|c| c.pass);
        self.first_failure = self.checks.iter().find(|c| !c.pass).map(|c| match &c.message {
            Some(m) => format!("{}: {m}", c.name),
            None => format!("{}: rel_err {} > tol {}", c.name, format_float(c.rel_err), format_float(c.tol)),
        });
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Columns of a CSV export.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn write<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", self.header.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|x| format_float(*x)).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct T {
        #[serde(serialize_with = "fixed")]
        x: f64,
        #[serde(serialize_with = "fixed")]
        y: f64,
    }

    #[test]
    fn seventeen_significant_digits() {
        let s = serde_json::to_string(&T { x: 0.1, y: f64::INFINITY }).unwrap();
        assert_eq!(s, r#"{"x":1.0000000000000001e-1,"y":"inf"}"#);
        let v: serde_json::Value = serde_json::from_str(&serde_json::to_string(&T { x: 1.0 / 3.0, y: -2.5e-300 }).unwrap()).unwrap();
        assert_eq!(v["x"].as_f64(), Some(1.0 / 3.0));
        assert_eq!(v["y"].as_f64(), Some(-2.5e-300));
    }

    #[test]
    fn csv_has_header() {
        let t = Table {
            header: &["x", "F"],
            rows: vec![vec![1.0, 0.5]],
        };
        let mut buf = Vec::new();
        t.write(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "x,F\n1.0000000000000000e0,5.0000000000000000e-1\n");
    }
}
