//! Tolerances and aggregated check records.
//!
//! A residual `r` of an equation whose largest summand has modulus `s` passes
//! when `|r| ≤ max(tol_rel · s, tol_abs)`. Records aggregate the worst such
//! residual over a set of sample points.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::conditions::Residual;

/// Relative tolerance with an absolute floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rel: 1e-7, abs: 1e-10 }
    }
}

impl Tolerance {
    pub fn new(rel: f64, abs: f64) -> Self {
        Tolerance { rel, abs }
    }

    pub fn bound(&self, scale: f64) -> f64 {
        (self.rel * scale).max(self.abs)
    }

    pub fn accepts(&self, residual: f64, scale: f64) -> bool {
        residual.is_finite() && residual <= self.bound(scale)
    }
}

/// Worst-case outcome of one labelled check over a set of points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub label: String,
    pub max_residual: f64,
    /// Residual divided by its tolerance bound, maximised over points.
    pub max_ratio: f64,
    pub points_checked: usize,
    pub pass: bool,
    /// Alternative transcriptions reported for comparison only; they do not
    /// enter [`Report::all_pass`].
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub informational: bool,
}

/// Ordered collection of check records keyed by label.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub records: BTreeMap<String, CheckRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    /// Folds one residual into the record with the same label.
    pub fn add(&mut self, r: &Residual, tol: &Tolerance) {
        let ratio = r.residual / tol.bound(r.scale);
        let pass = r.passes(tol);
        let rec = self.records.entry(r.label.clone()).or_insert_with(|| CheckRecord {
            label: r.label.clone(),
            max_residual: 0.0,
            max_ratio: 0.0,
            points_checked: 0,
            pass: true,
            informational: crate::conditions::is_informational(&r.label),
        });
        rec.points_checked += 1;
        if r.residual > rec.max_residual || r.residual.is_nan() {
            rec.max_residual = r.residual;
        }
        if ratio > rec.max_ratio || ratio.is_nan() {
            rec.max_ratio = ratio;
        }
        rec.pass &= pass;
    }

    pub fn extend<'a>(&mut self, rs: impl IntoIterator<Item = &'a Residual>, tol: &Tolerance) {
        for r in rs {
            self.add(r, tol);
        }
    }

    pub fn merge(&mut self, other: Report) {
        for (k, v) in other.records {
            match self.records.get_mut(&k) {
                Some(rec) => {
                    rec.points_checked += v.points_checked;
                    rec.max_residual = rec.max_residual.max(v.max_residual);
                    rec.max_ratio = rec.max_ratio.max(v.max_ratio);
                    rec.pass &= v.pass;
                }
                None => {
                    self.records.insert(k, v);
                }
            }
        }
        self.notes.extend(other.notes);
    }

    pub fn get(&self, label: &str) -> Option<&CheckRecord> {
        self.records.get(label)
    }

    /// Whether every record except the informational ones passes.
    pub fn all_pass(&self) -> bool {
        self.records.values().all(|r| r.pass || r.informational)
    }

    /// Records whose label starts with `prefix`.
    pub fn with_prefix<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a CheckRecord> + 'a {
        self.records.values().filter(move |r| r.label.starts_with(prefix))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One line per record.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for r in self.records.values() {
            s.push_str(&format!(
                "{:<28} {:>4}  max {:10.3e}  ratio {:10.3e}  {}\n",
                r.label,
                r.points_checked,
                r.max_residual,
                r.max_ratio,
                match (r.pass, r.informational) {
                    (true, _) => "pass",
                    (false, false) => "FAIL",
                    (false, true) => "fail (informational)",
                }
            ));
        }
        for n in &self.notes {
            s.push_str(&format!("note: {n}\n"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn res(label: &str, residual: f64, scale: f64) -> Residual {
        Residual { label: label.into(), residual, scale }
    }

    #[test]
    fn absolute_floor_applies_to_tiny_scales() {
        let tol = Tolerance::default();
        assert!(tol.accepts(5e-11, 0.0));
        assert!(!tol.accepts(5e-10, 0.0));
        assert!(tol.accepts(5e-8, 1.0));
        assert!(!tol.accepts(5e-7, 1.0));
        assert!(!tol.accepts(f64::NAN, 1.0));
    }

    #[test]
    fn records_keep_the_worst_point() {
        let tol = Tolerance::default();
        let mut r = Report::new();
        r.add(&res("a", 1e-12, 1.0), &tol);
        r.add(&res("a", 1e-3, 1.0), &tol);
        r.add(&res("b", 0.0, 1.0), &tol);
        let a = r.get("a").unwrap();
        assert_eq!(a.points_checked, 2);
        assert_eq!(a.max_residual, 1e-3);
        assert!(!a.pass);
        assert!(r.get("b").unwrap().pass);
        assert!(!r.all_pass());
    }

    #[test]
    fn informational_records_do_not_decide_the_verdict() {
        let tol = Tolerance::default();
        let mut r = Report::new();
        r.add(&res("determining.gprime", 0.0, 1.0), &tol);
        r.add(&res("determining.gprime.literal", 1.0, 1.0), &tol);
        r.add(&res("integrability.zeta_vhat_full", 1.0, 1.0), &tol);
        assert!(r.get("determining.gprime.literal").unwrap().informational);
        assert!(r.all_pass());
        r.add(&res("determining.gprime", 1.0, 1.0), &tol);
        assert!(!r.all_pass());
    }

    #[test]
    fn json_roundtrip() {
        let tol = Tolerance::default();
        let mut r = Report::new();
        r.add(&res("determining.zeta", 1e-14, 2.0), &tol);
        let back: Report = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}
