//! Structured verification output.
//!
//! A report serializes to JSON with a fixed field order and sorted maps, so
//! identical inputs give byte-identical files. Error sequences also export as
//! RFC 4180 CSV with 17 significant digits.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Relative-error denominator floor.
pub const REL_ERR_FLOOR: f64 = 1e-8;

pub fn relative_error(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(REL_ERR_FLOOR)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// How `value` is compared with `tolerance`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    /// `value <= tolerance`
    AtMost,
    /// `value < tolerance`
    Below,
    /// `value` counts order violations in a sequence; `tolerance` is how many
    /// are allowed.
    Inversions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Criterion {
    pub name: String,
    /// `None` when the measured value is not finite.
    pub value: Option<f64>,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Criterion {
    fn judge(name: &str, value: f64, tolerance: f64, comparison: Comparison) -> Self {
        let ok = value.is_finite()
            && match comparison {
                Comparison::AtMost | Comparison::Inversions => value <= tolerance,
                Comparison::Below => value < tolerance,
            };
        Self {
            name: name.to_string(),
            value: value.is_finite().then_some(value),
            tolerance,
            comparison,
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
            note: None,
        }
    }

    pub fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self::judge(name, value, tolerance, Comparison::AtMost)
    }

    pub fn below(name: &str, value: f64, tolerance: f64) -> Self {
        Self::judge(name, value, tolerance, Comparison::Below)
    }

    /// The sequence must strictly decrease, except that steps where both
    /// values are at or below `floor` are ignored and `allowed` violations are
    /// tolerated.
    pub fn decreasing(name: &str, seq: &[f64], floor: f64, allowed: usize) -> Self {
        let v = inversions(seq, floor);
        let mut c = Self::judge(name, v as f64, allowed as f64, Comparison::Inversions);
        if seq.iter().any(|x| !x.is_finite()) {
            c.value = None;
            c.verdict = Verdict::Fail;
        }
        c
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Number of steps `i` with `seq[i+1] >= seq[i]`, skipping steps where both
/// values are at or below `floor`.
pub fn inversions(seq: &[f64], floor: f64) -> usize {
    seq.windows(2)
        .filter(|w| !(w[0] <= floor && w[1] <= floor) && w[1] >= w[0])
        .count()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorPoint {
    /// `N` or `ε`.
    pub key: f64,
    pub max_abs_err: f64,
    pub max_rel_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorSeries {
    pub name: String,
    /// `"N"` or `"eps"`.
    pub key_label: String,
    pub points: Vec<ErrorPoint>,
}

impl ErrorSeries {
    pub fn new(name: &str, key_label: &str) -> Self {
        Self {
            name: name.to_string(),
            key_label: key_label.to_string(),
            points: Vec::new(),
        }
    }

    pub fn push(&mut self, key: f64, max_abs_err: f64, max_rel_err: f64) {
        self.points.push(ErrorPoint {
            key,
            max_abs_err,
            max_rel_err,
        });
    }

    pub fn abs_errors(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.max_abs_err).collect()
    }

    pub fn rel_errors(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.max_rel_err).collect()
    }

    /// Least-squares slope of `log2(max_abs_err)` against `log2(key)`.
    pub fn log2_slope(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .points
            .iter()
            .filter(|p| p.key > 0.0 && p.max_abs_err > 0.0)
            .map(|p| (p.key.log2(), p.max_abs_err.log2()))
            .collect();
        least_squares_slope(&pts).map(|(s, _)| s)
    }

    /// RFC 4180 table with columns `N_or_eps,max_abs_err,max_rel_err`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["N_or_eps", "max_abs_err", "max_rel_err"])
            .map_err(csv_err)?;
        for p in &self.points {
            w.write_record([fmt17(p.key), fmt17(p.max_abs_err), fmt17(p.max_rel_err)])
                .map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("ascii"))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

/// Scientific notation with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Ordinary least squares `y = slope x + intercept`; `None` with fewer than two
/// distinct abscissae.
pub fn least_squares_slope(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub model: String,
    pub profile: Value,
    pub asymptotic: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Audit {
    pub library_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normal_method: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicates: Option<u64>,
    /// Free-form remarks, e.g. which tolerances are empirical calibrations.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Audit {
    pub fn new() -> Self {
        Self {
            library_version: env!("CARGO_PKG_VERSION").to_string(),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub scenario: Scenario,
    pub parameters: BTreeMap<String, Value>,
    pub series: Vec<ErrorSeries>,
    pub slopes: BTreeMap<String, f64>,
    pub criteria: Vec<Criterion>,
    pub audit: Audit,
}

impl Report {
    pub fn new(command: &str, scenario: Scenario) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            scenario,
            parameters: BTreeMap::new(),
            series: Vec::new(),
            slopes: BTreeMap::new(),
            criteria: Vec::new(),
            audit: Audit::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.parameters.insert(key.to_string(), v);
    }

    pub fn passed(&self) -> bool {
        self.criteria.iter().all(Criterion::passed)
    }

    pub fn criterion(&self, name: &str) -> Option<&Criterion> {
        self.criteria.iter().find(|c| c.name == name)
    }

    pub fn series_named(&self, name: &str) -> Option<&ErrorSeries> {
        self.series.iter().find(|s| s.name == name)
    }

    /// Pretty JSON. Non-finite numbers (which JSON cannot carry) are rejected
    /// rather than silently written as `null`.
    pub fn to_json(&self) -> Result<String> {
        let finite = self.series.iter().all(|s| {
            s.points
                .iter()
                .all(|p| p.key.is_finite() && p.max_abs_err.is_finite() && p.max_rel_err.is_finite())
        }) && self.slopes.values().all(|v| v.is_finite())
            && self.criteria.iter().all(|c| c.tolerance.is_finite());
        if !finite {
            return Err(Error::Domain("report contains non-finite numbers".into()));
        }
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// One line per criterion: `PASS name value <= tol`.
    pub fn summary_lines(&self) -> Vec<String> {
        self.criteria
            .iter()
            .map(|c| {
                let verdict = if c.passed() { "PASS" } else { "FAIL" };
                let op = match c.comparison {
                    Comparison::AtMost => "<=",
                    Comparison::Below => "<",
                    Comparison::Inversions => "inversions <=",
                };
                let value = c.value.map_or("non-finite".to_string(), |v| format!("{v:.6e}"));
                format!("{verdict} {} {value} {op} {:.3e}", c.name, c.tolerance)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::new(
            "verify-invariance",
            Scenario {
                name: "fwn-sine".into(),
                model: "fwn".into(),
                profile: serde_json::json!({"kind": "constant", "params": {"value": 0.75}}),
                asymptotic: "fwn".into(),
            },
        );
        r.param("n_ladder", [64, 256]);
        r.param("alpha", 0.1);
        let mut s = ErrorSeries::new("invariance", "N");
        s.push(64.0, 0.1 + 0.2, 1.0 / 3.0);
        s.push(256.0, 1e-300, 5e-324);
        r.series.push(s);
        r.slopes.insert("invariance".into(), -0.7);
        r.criteria.push(Criterion::below("final", 0.01, 0.05));
        r.criteria.push(Criterion::decreasing("decay", &[3.0, 2.0, 2.5], 0.0, 0).with_note("x"));
        r
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let r = sample();
        let s = r.to_json().unwrap();
        let back = Report::from_json(&s).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_json().unwrap(), s);
    }

    #[test]
    fn verdicts() {
        let r = sample();
        assert!(r.criterion("final").unwrap().passed());
        assert!(!r.criterion("decay").unwrap().passed());
        assert!(!r.passed());
        assert_eq!(inversions(&[1.0, 0.5, 0.25], 0.0), 0);
        assert_eq!(inversions(&[1e-13, 2e-13, 1e-14], 1e-12), 0);
        assert_eq!(inversions(&[1.0, 1.0], 0.0), 1);
        assert!(!Criterion::at_most("nan", f64::NAN, 1.0).passed());
    }

    #[test]
    fn csv_has_17_digits() {
        let r = sample();
        let csv = r.series[0].to_csv().unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "N_or_eps,max_abs_err,max_rel_err");
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first[0], "6.4000000000000000e1");
        assert_eq!(first[1].parse::<f64>().unwrap(), 0.1 + 0.2);
        assert_eq!(first[2].parse::<f64>().unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn non_finite_reports_are_rejected() {
        let mut r = sample();
        r.series[0].push(1024.0, f64::NAN, 0.0);
        assert!(r.to_json().is_err());
    }

    #[test]
    fn slope_fit() {
        let mut s = ErrorSeries::new("x", "N");
        for k in 1..6 {
            let n = 2f64.powi(k);
            s.push(n, 3.0 * n.powf(-1.5), 0.0);
        }
        assert!((s.log2_slope().unwrap() + 1.5).abs() < 1e-12);
    }
}
