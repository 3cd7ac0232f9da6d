//! Multifractional functions `h : [0, ∞) → [a, b] ⊂ (1/2, 1)`.
//!
//! Only parametric families are supported so that `h'` is exact.

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};

/// Smoothness class of a profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum Regularity {
    Continuous,
    C1,
    C2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProfileKind {
    Constant {
        value: f64,
    },
    /// `clamp(intercept + slope * t, a, b)`.
    LinearClamped {
        intercept: f64,
        slope: f64,
    },
    /// `mean + amplitude * sin(frequency * t + phase)`.
    Sinusoidal {
        mean: f64,
        amplitude: f64,
        frequency: f64,
        phase: f64,
    },
    /// Linear interpolation through `(t, h)` knots, constant beyond the ends.
    PiecewiseLinear {
        knots: Vec<(f64, f64)>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HurstProfile {
    kind: ProfileKind,
    a: f64,
    b: f64,
    holder_exponent_hint: Option<Regularity>,
}

fn check_range(a: f64, b: f64) -> Result<()> {
    if !(a > 0.5 && b < 1.0 && a <= b) {
        return Err(Error::Domain(format!(
            "profile range [a, b] = [{a}, {b}] must satisfy 1/2 < a <= b < 1"
        )));
    }
    Ok(())
}

impl HurstProfile {
    /// Build a profile; `range` defaults to the natural range of the family
    /// (required for `linear-clamped`).
    pub fn new(kind: ProfileKind, range: Option<(f64, f64)>) -> Result<Self> {
        let natural = match &kind {
            ProfileKind::Constant { value } => Some((*value, *value)),
            ProfileKind::LinearClamped { .. } => None,
            ProfileKind::Sinusoidal {
                mean, amplitude, ..
            } => Some((mean - amplitude.abs(), mean + amplitude.abs())),
            ProfileKind::PiecewiseLinear { knots } => {
                if knots.is_empty() {
                    return Err(Error::Domain("piecewise-linear profile needs knots".into()));
                }
                for w in knots.windows(2) {
                    if !(w[1].0 > w[0].0) {
                        return Err(Error::Domain(
                            "piecewise-linear knots must have strictly increasing t".into(),
                        ));
                    }
                }
                if knots[0].0 < 0.0 {
                    return Err(Error::Domain("piecewise-linear knots must have t >= 0".into()));
                }
                let lo = knots.iter().map(|k| k.1).fold(f64::INFINITY, f64::min);
                let hi = knots.iter().map(|k| k.1).fold(f64::NEG_INFINITY, f64::max);
                Some((lo, hi))
            }
        };
        if let ProfileKind::Sinusoidal {
            frequency, phase, ..
        } = &kind
        {
            if !frequency.is_finite() || !phase.is_finite() {
                return Err(Error::Domain("sinusoidal frequency/phase must be finite".into()));
            }
        }
        if let ProfileKind::LinearClamped { intercept, slope } = &kind {
            if !intercept.is_finite() || !slope.is_finite() {
                return Err(Error::Domain("linear-clamped coefficients must be finite".into()));
            }
        }
        let (a, b) = match (range, natural) {
            (Some(r), _) => r,
            (None, Some(n)) => n,
            (None, None) => {
                return Err(Error::Domain(
                    "linear-clamped profile requires explicit bounds a and b".into(),
                ))
            }
        };
        check_range(a, b)?;
        if let Some((lo, hi)) = natural {
            if !(lo >= a && hi <= b) {
                return Err(Error::Domain(format!(
                    "profile values span [{lo}, {hi}], outside the declared range [{a}, {b}]"
                )));
            }
        }
        Ok(Self {
            kind,
            a,
            b,
            holder_exponent_hint: None,
        })
    }

    pub fn constant(value: f64) -> Result<Self> {
        Self::new(ProfileKind::Constant { value }, None)
    }

    /// `mean + amplitude * sin(t)`.
    pub fn sinusoidal(mean: f64, amplitude: f64) -> Result<Self> {
        Self::new(
            ProfileKind::Sinusoidal {
                mean,
                amplitude,
                frequency: 1.0,
                phase: 0.0,
            },
            None,
        )
    }

    pub fn linear_clamped(intercept: f64, slope: f64, a: f64, b: f64) -> Result<Self> {
        Self::new(ProfileKind::LinearClamped { intercept, slope }, Some((a, b)))
    }

    pub fn piecewise_linear(knots: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(ProfileKind::PiecewiseLinear { knots }, None)
    }

    pub fn with_hint(mut self, hint: Regularity) -> Self {
        self.holder_exponent_hint = Some(hint);
        self
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn hint(&self) -> Option<Regularity> {
        self.holder_exponent_hint
    }

    pub fn regularity(&self) -> Regularity {
        match self.kind {
            ProfileKind::Constant { .. } | ProfileKind::Sinusoidal { .. } => Regularity::C2,
            ProfileKind::LinearClamped { .. } | ProfileKind::PiecewiseLinear { .. } => {
                Regularity::Continuous
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, ProfileKind::Constant { .. })
            || matches!(self.kind, ProfileKind::Sinusoidal { amplitude, .. } if amplitude == 0.0)
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("profile evaluated at t = {t} < 0")));
        }
        Ok(self.value(t))
    }

    /// Unchecked evaluation for `t >= 0`.
    pub(crate) fn value(&self, t: f64) -> f64 {
        match &self.kind {
            ProfileKind::Constant { value } => *value,
            ProfileKind::LinearClamped { intercept, slope } => {
                (intercept + slope * t).clamp(self.a, self.b)
            }
            ProfileKind::Sinusoidal {
                mean,
                amplitude,
                frequency,
                phase,
            } => mean + amplitude * (frequency * t + phase).sin(),
            ProfileKind::PiecewiseLinear { knots } => {
                let first = knots[0];
                let last = knots[knots.len() - 1];
                if t <= first.0 {
                    return first.1;
                }
                if t >= last.0 {
                    return last.1;
                }
                let i = knots.partition_point(|k| k.0 <= t);
                let (t0, h0) = knots[i - 1];
                let (t1, h1) = knots[i];
                h0 + (h1 - h0) * (t - t0) / (t1 - t0)
            }
        }
    }

    /// Exact derivative `h'(t)`; undefined at clamping corners and knots.
    pub fn derivative(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("profile derivative at t = {t} < 0")));
        }
        match &self.kind {
            ProfileKind::Constant { .. } => Ok(0.0),
            ProfileKind::Sinusoidal {
                amplitude,
                frequency,
                phase,
                ..
            } => Ok(amplitude * frequency * (frequency * t + phase).cos()),
            ProfileKind::LinearClamped { intercept, slope } => {
                let raw = intercept + slope * t;
                if *slope != 0.0 && (raw == self.a || raw == self.b) {
                    return Err(Error::UnsupportedProfile(format!(
                        "linear-clamped profile has a clamping corner at t = {t}"
                    )));
                }
                if raw > self.a && raw < self.b {
                    Ok(*slope)
                } else {
                    Ok(0.0)
                }
            }
            ProfileKind::PiecewiseLinear { knots } => {
                if knots.iter().any(|k| k.0 == t) && knots.len() > 1 {
                    return Err(Error::UnsupportedProfile(format!(
                        "piecewise-linear profile is not differentiable at knot t = {t}"
                    )));
                }
                let first = knots[0];
                let last = knots[knots.len() - 1];
                if t < first.0 || t > last.0 {
                    return Ok(0.0);
                }
                let i = knots.partition_point(|k| k.0 <= t);
                let (t0, h0) = knots[i - 1];
                let (t1, h1) = knots[i];
                Ok((h1 - h0) / (t1 - t0))
            }
        }
    }

    /// Minimum of `h` over `[t0, t1]`, by dense sampling plus the endpoints.
    pub fn min_on(&self, t0: f64, t1: f64) -> f64 {
        let steps = 256;
        (0..=steps)
            .map(|i| self.value(t0 + (t1 - t0) * i as f64 / steps as f64))
            .fold(f64::INFINITY, f64::min)
    }

    /// Parse a `{"kind": ..., "params": {...}, "a": .., "b": ..}` declaration.
    /// Errors carry the JSON path of the offending field.
    pub fn from_json(v: &Value, path: &str) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::config(path, "profile must be an object"))?;
        for key in obj.keys() {
            if !matches!(key.as_str(), "kind" | "params" | "a" | "b" | "holder_exponent_hint") {
                return Err(Error::config(format!("{path}.{key}"), "unknown field"));
            }
        }
        let kind = obj
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::config(format!("{path}.kind"), "missing string field"))?;
        let empty = Map::new();
        let params = match obj.get("params") {
            None => &empty,
            Some(p) => p
                .as_object()
                .ok_or_else(|| Error::config(format!("{path}.params"), "must be an object"))?,
        };
        let ppath = format!("{path}.params");
        let num = |name: &str, default: Option<f64>| -> Result<f64> {
            match params.get(name) {
                Some(x) => x.as_f64().filter(|x| x.is_finite()).ok_or_else(|| {
                    Error::config(format!("{ppath}.{name}"), "must be a finite number")
                }),
                None => default
                    .ok_or_else(|| Error::config(format!("{ppath}.{name}"), "missing field")),
            }
        };
        let allowed: &[&str] = match kind {
            "constant" => &["value"],
            "linear-clamped" => &["intercept", "slope"],
            "sinusoidal" => &["mean", "amplitude", "frequency", "phase"],
            "piecewise-linear" => &["knots"],
            other => {
                return Err(Error::config(
                    format!("{path}.kind"),
                    format!(
                        "unknown profile kind `{other}` (expected constant, linear-clamped, sinusoidal or piecewise-linear)"
                    ),
                ))
            }
        };
        for key in params.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(Error::config(format!("{ppath}.{key}"), "unknown parameter"));
            }
        }
        let kind = match kind {
            "constant" => ProfileKind::Constant {
                value: num("value", None)?,
            },
            "linear-clamped" => ProfileKind::LinearClamped {
                intercept: num("intercept", None)?,
                slope: num("slope", None)?,
            },
            "sinusoidal" => ProfileKind::Sinusoidal {
                mean: num("mean", None)?,
                amplitude: num("amplitude", None)?,
                frequency: num("frequency", Some(1.0))?,
                phase: num("phase", Some(0.0))?,
            },
            _ => {
                let kpath = format!("{ppath}.knots");
                let arr = params
                    .get("knots")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::config(&kpath, "must be an array of [t, h] pairs"))?;
                let mut knots = Vec::with_capacity(arr.len());
                for (i, k) in arr.iter().enumerate() {
                    let pair = k
                        .as_array()
                        .filter(|p| p.len() == 2)
                        .and_then(|p| Some((p[0].as_f64()?, p[1].as_f64()?)))
                        .filter(|p| p.0.is_finite() && p.1.is_finite())
                        .ok_or_else(|| {
                            Error::config(format!("{kpath}[{i}]"), "must be a [t, h] number pair")
                        })?;
                    knots.push(pair);
                }
                ProfileKind::PiecewiseLinear { knots }
            }
        };
        let bound = |name: &str| -> Result<Option<f64>> {
            match obj.get(name) {
                None => Ok(None),
                Some(x) => x
                    .as_f64()
                    .filter(|x| x.is_finite())
                    .map(Some)
                    .ok_or_else(|| Error::config(format!("{path}.{name}"), "must be a number")),
            }
        };
        let range = match (bound("a")?, bound("b")?) {
            (Some(a), Some(b)) => Some((a, b)),
            (None, None) => None,
            _ => {
                return Err(Error::config(
                    path,
                    "bounds a and b must be given together",
                ))
            }
        };
        if let Some((a, b)) = range {
            if !(a > 0.5 && a < 1.0) {
                return Err(Error::config(
                    format!("{path}.a"),
                    format!("a = {a} violates the constraint 1/2 < a <= b < 1"),
                ));
            }
            if !(b > 0.5 && b < 1.0 && a <= b) {
                return Err(Error::config(
                    format!("{path}.b"),
                    format!("b = {b} violates the constraint 1/2 < a <= b < 1"),
                ));
            }
        }
        let hint = match obj.get("holder_exponent_hint") {
            None | Some(Value::Null) => None,
            Some(h) => Some(serde_json::from_value::<Regularity>(h.clone()).map_err(|_| {
                Error::config(
                    format!("{path}.holder_exponent_hint"),
                    "expected continuous, c1 or c2",
                )
            })?),
        };
        let mut profile = Self::new(kind, range).map_err(|e| match e {
            Error::Domain(msg) => Error::config(path, msg),
            other => other,
        })?;
        profile.holder_exponent_hint = hint;
        Ok(profile)
    }

    pub fn to_json(&self) -> Value {
        let mut v = serde_json::to_value(&self.kind).expect("profile kind serializes");
        let obj = v.as_object_mut().expect("tagged enum is an object");
        let kind = obj.remove("kind").expect("tag present");
        let params = match &self.kind {
            ProfileKind::PiecewiseLinear { knots } => {
                json!({ "knots": knots.iter().map(|k| vec![k.0, k.1]).collect::<Vec<_>>() })
            }
            _ => Value::Object(obj.clone()),
        };
        let mut out = json!({ "kind": kind, "params": params, "a": self.a, "b": self.b });
        if let Some(h) = self.holder_exponent_hint {
            out["holder_exponent_hint"] = serde_json::to_value(h).expect("hint serializes");
        }
        out
    }
}
