//! Scenario configuration: a single JSON document, dot-path overrides, shipped
//! presets, and the validation that turns it into library objects.
//!
//! Structural validation (types, unknown keys) happens during
//! deserialization and reports the offending path; [`ScenarioConfig::resolve`]
//! adds the semantic checks. The published schema is generated from these
//! types by [`schema_json`].

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::analysis::{HolderParams, TangentParams};
use crate::error::{Error, Result};
use crate::fields::{FieldKind, FieldModel};
use crate::hprofile::{HurstProfile, Regularity};
use crate::kernels::{AsymptoticCovariance, LimitKernel};
use crate::quadrature::QuadSettings;
use crate::report::Scenario;
use crate::simulate::MAX_INDEX;

/// Names of the presets shipped with the library.
pub const PRESET_NAMES: [&str; 4] = ["fwn-constant", "fwn-sine", "farima-sine", "farima-asymmetry"];

/// Raw JSON of a shipped preset.
pub fn preset(name: &str) -> Option<&'static str> {
    Some(match name {
        "fwn-constant" => include_str!("../../../presets/fwn-constant.json"),
        "fwn-sine" => include_str!("../../../presets/fwn-sine.json"),
        "farima-sine" => include_str!("../../../presets/farima-sine.json"),
        "farima-asymmetry" => include_str!("../../../presets/farima-asymmetry.json"),
        _ => return None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: FieldKind,
    /// Lower end of the Hurst range, in (1/2, 1).
    pub a: f64,
    /// Upper end of the Hurst range, in [a, 1).
    pub b: f64,
}

/// Profile declaration; only used to describe the schema; parsing goes
/// through [`HurstProfile::from_json`].
#[derive(JsonSchema)]
#[allow(dead_code)]
#[serde(deny_unknown_fields)]
struct ProfileDecl {
    kind: ProfileName,
    /// constant: value; linear-clamped: intercept, slope; sinusoidal: mean,
    /// amplitude, frequency (1), phase (0); piecewise-linear: knots as
    /// [t, h] pairs.
    #[serde(default)]
    params: serde_json::Map<String, Value>,
    a: Option<f64>,
    b: Option<f64>,
    holder_exponent_hint: Option<Regularity>,
}

#[derive(JsonSchema)]
#[allow(dead_code)]
#[serde(rename_all = "kebab-case")]
enum ProfileName {
    Constant,
    LinearClamped,
    Sinusoidal,
    PiecewiseLinear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct HolderConfig {
    pub t0: Vec<f64>,
    pub window: f64,
    pub points: usize,
    /// Lags in grid steps.
    pub lags: Vec<usize>,
}

impl Default for HolderConfig {
    fn default() -> Self {
        let p = HolderParams::default();
        Self {
            t0: vec![0.5, 1.0],
            window: p.window,
            points: p.points,
            lags: p.lags,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    pub n: u64,
    pub band: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { n: 8192, band: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct RenormConfig {
    /// Scales for the fixed-point check on the limit increments.
    pub fixed_ladder: Vec<u64>,
    /// Scales for the discrete field.
    pub field_ladder: Vec<u64>,
    /// Hurst pairs; defaults to corners and midpoint of the model range.
    pub hurst_pairs: Option<Vec<(f64, f64)>>,
}

impl Default for RenormConfig {
    fn default() -> Self {
        Self {
            fixed_ladder: vec![2, 4, 8],
            field_ladder: vec![4, 16, 64],
            hurst_pairs: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct RepresentationConfig {
    pub t: f64,
    pub s: f64,
    pub dh: f64,
    pub step: f64,
}

impl Default for RepresentationConfig {
    fn default() -> Self {
        Self {
            t: 1.0,
            s: 1.0,
            dh: 1e-3,
            step: 1.0 / 512.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum SampleSource {
    /// The limit process.
    Limit,
    /// The normalized partial-sum process at scale `n`.
    PartialSum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct SampleConfig {
    pub source: SampleSource,
    /// Paths are sampled at `t_max * k / points`, `k = 1..=points`.
    pub points: usize,
    pub t_max: f64,
    /// Scale of the partial-sum source.
    pub n: u64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self {
            source: SampleSource::Limit,
            points: 64,
            t_max: 1.0,
            n: 1024,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct KernelsConfig {
    /// `(H1, H2)` pairs; defaults to the 3x3 grid over `{a, (a+b)/2, b}`.
    pub pairs: Option<Vec<(f64, f64)>>,
    /// Largest lag of the spectral comparison.
    pub max_lag: u64,
}

impl Default for KernelsConfig {
    fn default() -> Self {
        Self {
            pairs: None,
            max_lag: 16,
        }
    }
}

/// Pass/fail thresholds. The decay tolerances are empirical calibrations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub invariance: f64,
    pub oracle: f64,
    pub tangent_distinct: f64,
    pub tangent_inversions: usize,
    pub holder: f64,
    pub holder_constant: f64,
    pub representation: f64,
    pub renorm: f64,
    pub spectral: f64,
    pub diagonal_constant: f64,
    pub factorization: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            invariance: 0.05,
            oracle: 1e-3,
            tangent_distinct: 1e-2,
            tangent_inversions: 1,
            holder: 0.07,
            holder_constant: 0.05,
            representation: 1e-2,
            renorm: 1e-10,
            spectral: 1e-5,
            diagonal_constant: 1e-3,
            factorization: 1e-9,
        }
    }
}

fn default_n_ladder() -> Vec<u64> {
    vec![64, 256, 1024, 4096]
}

fn default_time_grid() -> Vec<f64> {
    vec![0.25, 0.5, 0.75, 1.0]
}

fn default_eps_ladder() -> Vec<f64> {
    (2..=8).map(|j| 2f64.powi(-j)).collect()
}

fn default_replicates() -> usize {
    1000
}

fn default_seed() -> u64 {
    HolderParams::default().seed
}

fn default_output_dir() -> String {
    "out".into()
}

/// A scenario: model, profile and the parameters of every check. Only
/// `model` and `profile` are required.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub model: ModelConfig,
    #[schemars(with = "ProfileDecl")]
    pub profile: Value,
    /// Defaults to the asymptotic covariance of the model.
    #[serde(default)]
    pub asymptotic: Option<AsymptoticCovariance>,
    #[serde(default = "default_n_ladder")]
    pub n_ladder: Vec<u64>,
    #[serde(default = "default_time_grid")]
    pub time_grid: Vec<f64>,
    #[serde(default = "default_eps_ladder")]
    pub eps_ladder: Vec<f64>,
    #[serde(default)]
    pub tangent: TangentParams,
    #[serde(default)]
    pub holder: HolderConfig,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub renorm: RenormConfig,
    #[serde(default)]
    pub representation: RepresentationConfig,
    #[serde(default)]
    pub sample: SampleConfig,
    #[serde(default)]
    pub kernels: KernelsConfig,
    #[serde(default)]
    pub quadrature: QuadSettings,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
}

/// The JSON schema of [`ScenarioConfig`], pretty-printed.
pub fn schema_json() -> String {
    let schema = schemars::schema_for!(ScenarioConfig);
    let mut s = serde_json::to_string_pretty(&schema).expect("schema serializes");
    s.push('\n');
    s
}

/// Set `path` (dot-separated, numeric segments index arrays) to `raw`, parsed
/// as JSON when possible and taken as a string otherwise. Missing objects
/// along the path are created.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::config(assignment, "override must look like path=value"))?;
    let path = path.trim();
    if path.is_empty() || path.split('.').any(str::is_empty) {
        return Err(Error::config(path, "override path has an empty segment"));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let segments: Vec<&str> = path.split('.').collect();
    for (i, seg) in segments.iter().enumerate() {
        let here = segments[..=i].join(".");
        let last = i + 1 == segments.len();
        node = match node {
            Value::Array(items) => {
                let idx: usize = seg
                    .parse()
                    .map_err(|_| Error::config(&here, "array segment must be an index"))?;
                let len = items.len();
                items
                    .get_mut(idx)
                    .ok_or_else(|| Error::config(&here, format!("index out of bounds (len {len})")))?
            }
            Value::Object(map) => map
                .entry(seg.to_string())
                .or_insert_with(|| if last { Value::Null } else { Value::Object(Default::default()) }),
            Value::Null => {
                *node = Value::Object(Default::default());
                node.as_object_mut()
                    .unwrap()
                    .entry(seg.to_string())
                    .or_insert_with(|| if last { Value::Null } else { Value::Object(Default::default()) })
            }
            _ => return Err(Error::config(&here, "cannot descend into a scalar")),
        };
    }
    *node = value;
    Ok(())
}

/// Everything a subcommand needs, validated.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: ScenarioConfig,
    pub model: FieldModel,
    pub profile: HurstProfile,
    pub asympt: AsymptoticCovariance,
    pub kernel: LimitKernel,
}

impl Resolved {
    pub fn name(&self) -> String {
        self.config
            .name
            .clone()
            .unwrap_or_else(|| format!("{}-{}", self.model.kind().name(), profile_kind(&self.config.profile)))
    }

    pub fn scenario(&self) -> Scenario {
        Scenario {
            name: self.name(),
            model: self.model.kind().name().into(),
            profile: self.profile.to_json(),
            asymptotic: self.asympt.name().into(),
        }
    }

    pub fn holder_params(&self) -> HolderParams {
        let h = &self.config.holder;
        HolderParams {
            window: h.window,
            points: h.points,
            lags: h.lags.clone(),
            replicates: self.config.replicates,
            seed: self.config.seed,
        }
    }

    /// The Hölder tolerance: tighter for constant profiles.
    pub fn holder_tolerance(&self) -> f64 {
        let t = &self.config.tolerances;
        if self.profile.is_constant() {
            t.holder_constant
        } else {
            t.holder
        }
    }

    pub fn renorm_pairs(&self) -> Vec<(f64, f64)> {
        self.config.renorm.hurst_pairs.clone().unwrap_or_else(|| {
            let (a, b) = (self.model.a(), self.model.b());
            let m = 0.5 * (a + b);
            let mut v = vec![(a, a), (m, m), (b, b), (a, b), (b, a)];
            v.dedup();
            v
        })
    }

    pub fn kernel_pairs(&self) -> Vec<(f64, f64)> {
        self.config.kernels.pairs.clone().unwrap_or_else(|| {
            let (a, b) = (self.model.a(), self.model.b());
            let mut g = vec![a, 0.5 * (a + b), b];
            g.dedup();
            g.iter().flat_map(|&x| g.iter().map(move |&y| (x, y))).collect()
        })
    }
}

fn profile_kind(v: &Value) -> &str {
    v.get("kind").and_then(Value::as_str).unwrap_or("profile")
}

fn positive(path: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::config(path, format!("must be positive and finite, got {x}")))
    }
}

fn nonnegative(path: &str, x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::config(path, format!("must be nonnegative and finite, got {x}")))
    }
}

fn check_hurst(path: &str, h: f64, model: &FieldModel) -> Result<()> {
    model
        .check(h)
        .map_err(|_| Error::config(path, format!("H = {h} outside the model range [{}, {}]", model.a(), model.b())))
}

impl ScenarioConfig {
    /// Parse a config document, applying `overrides` (`path=value`) to the
    /// raw JSON first.
    pub fn parse(text: &str, overrides: &[String]) -> Result<Self> {
        let mut value: Value = serde_json::from_str(text)
            .map_err(|e| Error::config("", format!("invalid JSON: {e}")))?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        Self::from_value(value)
    }

    pub fn from_value(value: Value) -> Result<Self> {
        serde_path_to_error::deserialize(value).map_err(|e| {
            let path = e.path().to_string();
            let path = if path == "." { String::new() } else { path };
            Error::config(path, e.into_inner().to_string())
        })
    }

    /// Load a shipped preset.
    pub fn preset(name: &str, overrides: &[String]) -> Result<Self> {
        let text = preset(name).ok_or_else(|| {
            Error::config(
                "preset",
                format!("unknown preset `{name}` (expected one of {})", PRESET_NAMES.join(", ")),
            )
        })?;
        Self::parse(text, overrides)
    }

    /// Semantic validation; returns the library objects.
    pub fn resolve(&self) -> Result<Resolved> {
        let m = &self.model;
        for (path, x) in [("model.a", m.a), ("model.b", m.b)] {
            if !(x > 0.5 && x < 1.0) {
                return Err(Error::config(
                    path,
                    format!("{x} violates the constraint 1/2 < a <= b < 1"),
                ));
            }
        }
        let model = FieldModel::new(m.kind, m.a, m.b)
            .map_err(|_| Error::config("model.b", "b must satisfy a <= b (1/2 < a <= b < 1)"))?;
        let profile = HurstProfile::from_json(&self.profile, "profile")?;
        if profile.a() < model.a() || profile.b() > model.b() {
            return Err(Error::config(
                "profile",
                format!(
                    "profile range [{}, {}] must lie inside the model range [{}, {}]",
                    profile.a(),
                    profile.b(),
                    model.a(),
                    model.b()
                ),
            ));
        }
        let asympt = match &self.asymptotic {
            None => model.asympt(),
            Some(AsymptoticCovariance::Constant { c }) => AsymptoticCovariance::constant(*c)
                .map_err(|e| Error::config("asymptotic.c", e.to_string()))?,
            Some(AsymptoticCovariance::UserTable { h1, h2, values }) => {
                AsymptoticCovariance::user_table(h1.clone(), h2.clone(), values.clone())
                    .map_err(|e| Error::config("asymptotic", e.to_string()))?
            }
            Some(other) => other.clone(),
        };
        self.check_ladders()?;
        self.check_sections(&model)?;
        let q = self.quadrature;
        positive("quadrature.rel_tol", q.rel_tol)?;
        nonnegative("quadrature.abs_tol", q.abs_tol)?;
        if q.max_panels == 0 {
            return Err(Error::config("quadrature.max_panels", "must be at least 1"));
        }
        let t = self.tolerances;
        for (name, x) in [
            ("invariance", t.invariance),
            ("oracle", t.oracle),
            ("tangent_distinct", t.tangent_distinct),
            ("holder", t.holder),
            ("holder_constant", t.holder_constant),
            ("representation", t.representation),
            ("renorm", t.renorm),
            ("spectral", t.spectral),
            ("diagonal_constant", t.diagonal_constant),
            ("factorization", t.factorization),
        ] {
            positive(&format!("tolerances.{name}"), x)?;
        }
        if self.output_dir.is_empty() {
            return Err(Error::config("output_dir", "must not be empty"));
        }
        let kernel = LimitKernel::new(profile.clone(), asympt.clone()).with_quad(q);
        Ok(Resolved {
            config: self.clone(),
            model,
            profile,
            asympt,
            kernel,
        })
    }

    fn check_ladders(&self) -> Result<()> {
        let n = &self.n_ladder;
        if n.is_empty() || n[0] == 0 || n.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("n_ladder", "must be nonempty, positive and strictly increasing"));
        }
        let g = &self.time_grid;
        if g.is_empty() || g.iter().any(|t| !(*t > 0.0 && t.is_finite())) || g.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("time_grid", "must be nonempty, positive and strictly increasing"));
        }
        let t_max = *g.last().unwrap();
        let n_max = *n.last().unwrap();
        if n_max as f64 * t_max > MAX_INDEX as f64 {
            return Err(Error::config(
                "n_ladder",
                format!("N * max(t) = {} exceeds the index limit {MAX_INDEX}", n_max as f64 * t_max),
            ));
        }
        let e = &self.eps_ladder;
        if e.is_empty() || e.iter().any(|x| !(*x > 0.0 && x.is_finite())) || e.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::config("eps_ladder", "must be nonempty, positive and strictly decreasing"));
        }
        Ok(())
    }

    fn check_sections(&self, model: &FieldModel) -> Result<()> {
        let tg = &self.tangent;
        nonnegative("tangent.base", tg.base)?;
        nonnegative("tangent.other_base", tg.other_base)?;
        if tg.base == tg.other_base {
            return Err(Error::config("tangent.other_base", "must differ from tangent.base"));
        }
        positive("tangent.u", tg.u)?;
        positive("tangent.v", tg.v)?;

        let h = &self.holder;
        if h.t0.is_empty() {
            return Err(Error::config("holder.t0", "must not be empty"));
        }
        for (i, t) in h.t0.iter().enumerate() {
            nonnegative(&format!("holder.t0[{i}]"), *t)?;
        }
        positive("holder.window", h.window)?;
        if h.points < 3 || h.points > 2049 {
            return Err(Error::config("holder.points", "must be between 3 and 2049"));
        }
        if h.lags.is_empty() || h.lags.iter().any(|l| *l == 0 || *l >= h.points) {
            return Err(Error::config("holder.lags", "lags must be in [1, points - 1]"));
        }
        if self.replicates == 0 || self.replicates > 1_000_000 {
            return Err(Error::config("replicates", "must be between 1 and 10^6"));
        }

        let o = self.oracle;
        if o.n == 0 || o.band == 0 {
            return Err(Error::config("oracle", "n and band must be at least 1"));
        }
        if o.n as f64 * self.time_grid.last().unwrap() > MAX_INDEX as f64 {
            return Err(Error::config("oracle.n", format!("N * max(t) exceeds the index limit {MAX_INDEX}")));
        }

        let r = &self.renorm;
        for (path, ladder) in [("renorm.fixed_ladder", &r.fixed_ladder), ("renorm.field_ladder", &r.field_ladder)] {
            if ladder.is_empty() || ladder.iter().any(|n| *n == 0 || *n > 4096) {
                return Err(Error::config(path, "scales must be in [1, 4096]"));
            }
        }
        if let Some(pairs) = &r.hurst_pairs {
            if pairs.is_empty() {
                return Err(Error::config("renorm.hurst_pairs", "must not be empty"));
            }
            for (i, (h1, h2)) in pairs.iter().enumerate() {
                check_hurst(&format!("renorm.hurst_pairs[{i}]"), *h1, model)?;
                check_hurst(&format!("renorm.hurst_pairs[{i}]"), *h2, model)?;
            }
        }

        let rep = self.representation;
        nonnegative("representation.t", rep.t)?;
        nonnegative("representation.s", rep.s)?;
        positive("representation.dh", rep.dh)?;
        positive("representation.step", rep.step)?;

        let s = self.sample;
        if s.points == 0 || s.points > 4096 {
            return Err(Error::config("sample.points", "must be between 1 and 4096"));
        }
        positive("sample.t_max", s.t_max)?;
        if s.n == 0 || s.n as f64 * s.t_max > MAX_INDEX as f64 {
            return Err(Error::config("sample.n", format!("must be positive with n * t_max <= {MAX_INDEX}")));
        }

        let k = &self.kernels;
        if let Some(pairs) = &k.pairs {
            if pairs.is_empty() {
                return Err(Error::config("kernels.pairs", "must not be empty"));
            }
            for (i, (h1, h2)) in pairs.iter().enumerate() {
                for h in [h1, h2] {
                    if !(*h > 0.5 && *h < 1.0) {
                        return Err(Error::config(
                            format!("kernels.pairs[{i}]"),
                            format!("H = {h} violates 1/2 < H < 1"),
                        ));
                    }
                }
            }
        }
        if k.max_lag > crate::fields::SPECTRAL_ORACLE_MAX_LAG {
            return Err(Error::config(
                "kernels.max_lag",
                format!("at most {}", crate::fields::SPECTRAL_ORACLE_MAX_LAG),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> Value {
        serde_json::json!({
            "model": {"kind": "farima", "a": 0.6, "b": 0.9},
            "profile": {"kind": "sinusoidal", "params": {"mean": 0.75, "amplitude": 0.15}}
        })
    }

    fn config_path(e: Error) -> String {
        match e {
            Error::Config { path, .. } => path,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn presets_resolve() {
        for name in PRESET_NAMES {
            let c = ScenarioConfig::preset(name, &[]).unwrap();
            let r = c.resolve().unwrap();
            assert_eq!(r.name(), name);
        }
        assert!(ScenarioConfig::preset("nope", &[]).is_err());
    }

    #[test]
    fn defaults_fill_in() {
        let c = ScenarioConfig::from_value(minimal()).unwrap();
        assert_eq!(c.n_ladder, vec![64, 256, 1024, 4096]);
        assert_eq!(c.eps_ladder.len(), 7);
        assert_eq!(c.replicates, 1000);
        assert_eq!(c.oracle, OracleConfig { n: 8192, band: 4 });
        let r = c.resolve().unwrap();
        assert_eq!(r.asympt, AsymptoticCovariance::Farima);
        assert_eq!(r.name(), "farima-sinusoidal");
    }

    #[test]
    fn bad_hurst_range_cites_constraint() {
        let mut v = minimal();
        v["model"]["a"] = 0.4.into();
        let e = ScenarioConfig::from_value(v).unwrap().resolve().unwrap_err();
        assert!(e.to_string().contains("1/2 < a <= b < 1"), "{e}");
        assert_eq!(config_path(e), "model.a");
    }

    #[test]
    fn structural_errors_carry_paths() {
        let mut v = minimal();
        v["oracle"] = serde_json::json!({"n": "many"});
        assert_eq!(config_path(ScenarioConfig::from_value(v).unwrap_err()), "oracle.n");
        let mut v = minimal();
        v["tolerances"] = serde_json::json!({"invarance": 0.1});
        assert_eq!(config_path(ScenarioConfig::from_value(v).unwrap_err()), "tolerances.invarance");
        let mut v = minimal();
        v.as_object_mut().unwrap().remove("profile");
        assert!(ScenarioConfig::from_value(v).is_err());
    }

    #[test]
    fn profile_outside_model_range() {
        let mut v = minimal();
        v["model"]["b"] = 0.8.into();
        let e = ScenarioConfig::from_value(v).unwrap().resolve().unwrap_err();
        assert_eq!(config_path(e), "profile");
    }

    #[test]
    fn overrides_apply_before_validation() {
        let text = minimal().to_string();
        let c = ScenarioConfig::parse(
            &text,
            &["quadrature.rel_tol=1e-6".into(), "n_ladder=[8,16]".into(), "name=run".into()],
        )
        .unwrap();
        assert_eq!(c.quadrature.rel_tol, 1e-6);
        assert_eq!(c.n_ladder, vec![8, 16]);
        assert_eq!(c.name.as_deref(), Some("run"));
        let e = ScenarioConfig::parse(&text, &["quadrature.rel_tol=fast".into()]).unwrap_err();
        assert_eq!(config_path(e), "quadrature.rel_tol");
    }

    #[test]
    fn override_paths() {
        let mut v = serde_json::json!({"a": [1, 2], "b": 3});
        apply_override(&mut v, "a.1=5").unwrap();
        apply_override(&mut v, "c.d=true").unwrap();
        assert_eq!(v, serde_json::json!({"a": [1, 5], "b": 3, "c": {"d": true}}));
        assert!(apply_override(&mut v, "a.7=1").is_err());
        assert!(apply_override(&mut v, "b.x=1").is_err());
        assert!(apply_override(&mut v, "a..b=1").is_err());
        assert!(apply_override(&mut v, "noequals").is_err());
    }

    #[test]
    fn index_limit_enforced() {
        let text = minimal().to_string();
        let e = ScenarioConfig::parse(&text, &["n_ladder=[1000000]".into()])
            .unwrap()
            .resolve()
            .unwrap_err();
        assert_eq!(config_path(e), "n_ladder");
    }

    #[test]
    fn schema_lists_required_fields() {
        let s: Value = serde_json::from_str(&schema_json()).unwrap();
        let req = s["required"].as_array().unwrap();
        assert!(req.contains(&"model".into()) && req.contains(&"profile".into()));
        assert_eq!(req.len(), 2);
    }

    #[test]
    fn published_schema_is_current() {
        let published = include_str!("../../../schema/scenario.schema.json");
        assert_eq!(published, schema_json(), "regenerate schema/scenario.schema.json");
    }
}
