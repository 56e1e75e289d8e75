//! Check reports and their JSON, CSV and text renderings. Numbers carry 17
//! significant digits so that every `f64` round-trips.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::config::Format;

/// `{:.16e}` as a raw JSON number; non-finite values become `null`.
pub fn format17(x: f64) -> String {
    format!("{x:.16e}")
}

mod num17 {
    use super::*;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            RawValue::from_string(format17(*x)).map_err(serde::ser::Error::custom)?.serialize(s)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

mod num17_opt {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => num17::serialize(v, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Option::<f64>::deserialize(d)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub q: i64,
    #[serde(with = "num17_opt")]
    pub eps: Option<f64>,
    #[serde(with = "num17_opt")]
    pub a: Option<f64>,
    pub unit_mode: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Formula or claim the check reproduces.
    #[serde(rename = "paper_ref")]
    pub reference: String,
    #[serde(with = "num17")]
    pub closed_form: f64,
    #[serde(with = "num17")]
    pub quadrature: f64,
    #[serde(with = "num17")]
    pub rel_dev: f64,
    #[serde(with = "num17")]
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// `rel_dev = |quadrature - closed| / |closed|`.
    pub fn compare(
        name: impl Into<String>,
        reference: impl Into<String>,
        closed_form: f64,
        quadrature: f64,
        tolerance: f64,
    ) -> Self {
        let dev = (quadrature - closed_form).abs() / closed_form.abs();
        Self::with_dev(name, reference, closed_form, quadrature, dev, tolerance)
    }

    pub fn with_dev(
        name: impl Into<String>,
        reference: impl Into<String>,
        closed_form: f64,
        quadrature: f64,
        rel_dev: f64,
        tolerance: f64,
    ) -> Self {
        Self {
            name: name.into(),
            reference: reference.into(),
            closed_form,
            quadrature,
            rel_dev,
            tolerance,
            pass: rel_dev <= tolerance,
        }
    }

    /// A check whose outcome is decided elsewhere.
    pub fn verdict(mut self, pass: bool) -> Self {
        self.pass = pass;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    #[serde(with = "num17")]
    pub a: f64,
    #[serde(with = "num17")]
    pub epsilon: f64,
    #[serde(with = "num17")]
    pub mu: f64,
    #[serde(with = "num17")]
    pub u_ele: f64,
    #[serde(with = "num17")]
    pub u_mag: f64,
    #[serde(with = "num17")]
    pub ratio: f64,
    pub warn: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub meta: Meta,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution: Option<Solution>,
}

impl Report {
    pub fn new(meta: Meta) -> Self {
        Self { meta, checks: Vec::new(), solution: None }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["name", "paper_ref", "closed_form", "quadrature", "rel_dev", "tolerance", "pass"])
            .expect("in-memory write");
        for c in &self.checks {
            w.write_record([
                c.name.as_str(),
                c.reference.as_str(),
                &format17(c.closed_form),
                &format17(c.quadrature),
                &format17(c.rel_dev),
                &format17(c.tolerance),
                if c.pass { "true" } else { "false" },
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }

    pub fn to_text(&self) -> String {
        let m = &self.meta;
        let opt = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:e}"));
        let mut out = format!(
            "colombeau-kit {}  q={}  eps={}  a={}  units={}\n",
            m.version,
            m.q,
            opt(m.eps),
            opt(m.a),
            m.unit_mode
        );
        if let Some(s) = &self.solution {
            out += &format!(
                "solution: a={:.10e} eps={:.10e} mu={:.10e} U_ele={:.10e} U_mag={:.10e} eps/a={:.4e}{}\n",
                s.a,
                s.epsilon,
                s.mu,
                s.u_ele,
                s.u_mag,
                s.ratio,
                if s.warn { " WARN" } else { "" }
            );
        }
        let width = self.checks.iter().map(|c| c.name.chars().count()).max().unwrap_or(4).max(5);
        out += &format!(
            "{:<width$}  {:>24}  {:>24}  {:>10}  {:>8}  {}\n",
            "check", "closed_form", "quadrature", "rel_dev", "tol", "result"
        );
        for c in &self.checks {
            out += &format!(
                "{:<width$}  {:>24.16e}  {:>24.16e}  {:>10.3e}  {:>8.1e}  {}\n",
                c.name,
                c.closed_form,
                c.quadrature,
                c.rel_dev,
                c.tolerance,
                if c.pass { "PASS" } else { "FAIL" }
            );
        }
        out
    }

    pub fn emit(&self, format: Format) -> Vec<u8> {
        match format {
            Format::Text => self.to_text(),
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
        .into_bytes()
    }
}
