//! Globally adaptive Gauss–Kronrod (10/21) quadrature.
//!
//! The worst panel is bisected until the summed error estimate meets the
//! tolerance or the panel budget runs out. Integrands may be fallible so that
//! nested integrals can propagate an inner non-convergence.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

// Kronrod abscissae on [0, 1]; odd indices are the 10-point Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_352,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_5,
    0.149_445_554_002_916_9,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

/// Tolerances and budget for one adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct QuadSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-14,
            max_panels: 10_000,
        }
    }
}

impl QuadSettings {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod21<F>(f: &mut F, a: f64, b: f64) -> Result<Panel>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let width = half.abs();
    let value = res_k * half;
    res_abs *= width;
    res_asc *= width;
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    if !value.is_finite() || !err.is_finite() {
        return Err(Error::QuadratureNonConvergence {
            estimate: value,
            error: err,
            panels: 1,
        });
    }
    Ok(Panel {
        a,
        b,
        value,
        error: err,
    })
}

/// Integrate a fallible integrand over `[a, b]`.
pub fn integrate_try<F>(mut f: F, a: f64, b: f64, settings: &QuadSettings) -> Result<QuadResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            panels: 0,
        });
    }
    let first = kronrod21(&mut f, a, b)?;
    let mut total = first.value;
    let mut total_err = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut panels = 1;
    // panels too narrow to bisect are parked here and no longer refined
    let mut frozen_value = 0.0;
    let mut frozen_err = 0.0;

    loop {
        let tol = settings.abs_tol.max(settings.rel_tol * total.abs());
        if total_err <= tol {
            break;
        }
        let Some(worst) = heap.pop() else {
            break;
        };
        let mid = 0.5 * (worst.a + worst.b);
        let scale = worst.a.abs().max(worst.b.abs()).max(f64::MIN_POSITIVE);
        if (worst.b - worst.a).abs() <= 64.0 * f64::EPSILON * scale {
            frozen_value += worst.value;
            frozen_err += worst.error;
            continue;
        }
        if panels >= settings.max_panels {
            heap.push(worst);
            break;
        }
        let left = kronrod21(&mut f, worst.a, mid)?;
        let right = kronrod21(&mut f, mid, worst.b)?;
        panels += 1;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // recompute sums from the panels to shed accumulated update roundoff
    let value = heap.iter().map(|p| p.value).sum::<f64>() + frozen_value;
    let error = heap.iter().map(|p| p.error).sum::<f64>() + frozen_err;
    let tol = settings.abs_tol.max(settings.rel_tol * value.abs());
    if error > tol {
        return Err(Error::QuadratureNonConvergence {
            estimate: value,
            error,
            panels,
        });
    }
    Ok(QuadResult {
        value,
        error,
        panels,
    })
}

/// Integrate an infallible integrand over `[a, b]`.
pub fn integrate<F>(mut f: F, a: f64, b: f64, settings: &QuadSettings) -> Result<QuadResult>
where
    F: FnMut(f64) -> f64,
{
    integrate_try(|x| Ok(f(x)), a, b, settings)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tight() -> QuadSettings {
        QuadSettings::default().with_rel_tol(1e-12).with_abs_tol(0.0)
    }

    #[test]
    fn polynomials_exact_in_one_panel() {
        for deg in 0..=29 {
            let r = integrate(|x: f64| x.powi(deg), 0.0, 1.0, &tight()).unwrap();
            let want = 1.0 / (deg as f64 + 1.0);
            assert!((r.value - want).abs() < 1e-14, "deg {deg}");
        }
    }

    #[test]
    fn endpoint_singularity() {
        // ∫_0^1 x^{-0.8} dx = 5
        let r = integrate(|x: f64| x.powf(-0.8), 0.0, 1.0, &QuadSettings::default()).unwrap();
        assert!((r.value - 5.0).abs() < 5e-8, "{}", r.value);
    }

    #[test]
    fn oscillatory() {
        let r = integrate(|x: f64| (20.0 * x).cos(), 0.0, std::f64::consts::PI / 3.0, &tight())
            .unwrap();
        let want = (20.0 * std::f64::consts::PI / 3.0).sin() / 20.0;
        assert!((r.value - want).abs() < 1e-12);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let s = QuadSettings {
            rel_tol: 1e-15,
            abs_tol: 0.0,
            max_panels: 3,
        };
        let err = integrate(|x: f64| x.powf(-0.95), 0.0, 1.0, &s).unwrap_err();
        assert!(matches!(err, Error::QuadratureNonConvergence { .. }));
    }

    #[test]
    fn inner_errors_propagate() {
        let err = integrate_try(
            |x| {
                if x > 0.5 {
                    Err(Error::Domain("boom".into()))
                } else {
                    Ok(x)
                }
            },
            0.0,
            1.0,
            &QuadSettings::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn reversed_interval_negates() {
        let s = tight();
        let fwd = integrate(|x: f64| x.exp(), 0.0, 1.0, &s).unwrap().value;
        let rev = integrate(|x: f64| x.exp(), 1.0, 0.0, &s).unwrap().value;
        assert!((fwd + rev).abs() < 1e-14);
    }
}
