//! Gamma-function primitives and the two normalization constants every kernel
//! is built from: the harmonizable fBm constant `C(H)` and the multifractional
//! Brownian motion coefficient `D(H1, H2)`.
//!
//! Products and quotients of gamma values are always formed in log-space.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pair of Hurst indices, both in the long-memory range `(1/2, 1)`.
///
/// The FARIMA memory parameters are `d = H - 1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HurstPair {
    h1: f64,
    h2: f64,
}

impl HurstPair {
    pub fn new(h1: f64, h2: f64) -> Result<Self> {
        for (name, h) in [("h1", h1), ("h2", h2)] {
            if !(h > 0.5 && h < 1.0) {
                return Err(Error::Domain(format!(
                    "{name} = {h} must lie in the open interval (1/2, 1)"
                )));
            }
        }
        Ok(Self { h1, h2 })
    }

    pub fn h1(&self) -> f64 {
        self.h1
    }

    pub fn h2(&self) -> f64 {
        self.h2
    }

    /// `H1 + H2`, the joint scaling exponent.
    pub fn sum(&self) -> f64 {
        self.h1 + self.h2
    }

    pub fn swap(&self) -> Self {
        Self {
            h1: self.h2,
            h2: self.h1,
        }
    }

    /// FARIMA memory parameters `(H1 - 1/2, H2 - 1/2)`.
    pub fn memory(&self) -> (f64, f64) {
        (self.h1 - 0.5, self.h2 - 0.5)
    }
}

const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

// B_{2k} / (2k (2k - 1)) for k = 1..=8.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

const STIRLING_MIN: f64 = 10.0;

fn ln_gamma_stirling(x: f64) -> f64 {
    (x - 0.5) * x.ln() - x + HALF_LN_TWO_PI + stirling_series(x)
}

/// Natural logarithm of the gamma function for positive arguments.
///
/// Arguments below 10 are shifted up by the recurrence and evaluated with an
/// eight-term Stirling series. The absolute error is below
/// `1e-13 * max(1, |ln Γ(x)|)` on `(0.05, 50]`; the scale floor matters only
/// near the zeros at `x = 1` and `x = 2`, which are returned exactly.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(ln_gamma(x))
}

/// Unchecked [`log_gamma`] for internal callers whose argument is positive by
/// construction.
pub(crate) fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x == 1.0 || x == 2.0 {
        return 0.0;
    }
    if x >= STIRLING_MIN {
        return ln_gamma_stirling(x);
    }
    let mut prod = 1.0;
    let mut y = x;
    while y < STIRLING_MIN {
        prod *= y;
        y += 1.0;
    }
    ln_gamma_stirling(y) - prod.ln()
}

fn stirling_series(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut pow = inv;
    for c in STIRLING {
        series += c * pow;
        pow *= inv2;
    }
    series
}

/// `ln Γ(x + δ) - ln Γ(x)` without the cancellation of subtracting two large
/// log-gammas. Requires `x > 0` and `x + δ > 0`.
pub(crate) fn ln_gamma_ratio(x: f64, delta: f64) -> f64 {
    let y = x + delta;
    if x < STIRLING_MIN + 1.0 || y < STIRLING_MIN {
        return ln_gamma(y) - ln_gamma(x);
    }
    // (y - 1/2) ln y - (x - 1/2) ln x = δ ln x + (y - 1/2) ln(1 + δ/x)
    delta * x.ln() + (y - 0.5) * (delta / x).ln_1p() - delta + stirling_series(y)
        - stirling_series(x)
}

/// The fBm spectral normalization `C(H) = sqrt(pi / (H Γ(2H) sin(pi H)))`.
pub fn c_norm(h: f64) -> Result<f64> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::Domain(format!(
            "c_norm requires H in (0, 1), got {h}"
        )));
    }
    Ok((0.5 * ln_c_norm_sq(h)).exp())
}

pub(crate) fn ln_c_norm_sq(h: f64) -> f64 {
    PI.ln() - h.ln() - ln_gamma(2.0 * h) - (PI * h).sin().ln()
}

/// The multifractional Brownian motion coefficient
///
/// ```text
/// D(H1, H2) = sqrt(Γ(2H1+1) Γ(2H2+1) sin(πH1) sin(πH2))
///             / (2 Γ(H1+H2+1) sin(π(H1+H2)/2))
/// ```
///
/// which equals `1/2` on the diagonal.
pub fn d_coef(p: HurstPair) -> f64 {
    d_coef_raw(p.h1(), p.h2())
}

pub(crate) fn d_coef_raw(h1: f64, h2: f64) -> f64 {
    let k = h1 + h2;
    let ln_ratio = 0.5 * (ln_gamma(2.0 * h1 + 1.0) + ln_gamma(2.0 * h2 + 1.0)) - ln_gamma(k + 1.0);
    let sines = ((PI * h1).sin() * (PI * h2).sin()).sqrt();
    ln_ratio.exp() * sines / (2.0 * (0.5 * PI * k).sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from a 40-digit evaluation, frozen.
    const LN_GAMMA_REF: [(f64, f64); 16] = [
        (0.05, 2.968_879_201_051_730_8),
        (0.1, 2.252_712_651_734_206),
        (0.2, 1.524_063_822_430_784_5),
        (0.5, 0.572_364_942_924_700_1),
        (0.6, 0.398_233_858_069_234_9),
        (0.8, 0.152_059_678_399_837_6),
        (1.5, -0.120_782_237_635_245_22),
        (2.5, 0.284_682_870_472_919_16),
        (3.7, 1.428_072_326_665_387_9),
        (7.3, 7.147_892_523_022_249),
        (10.0, 12.801_827_480_081_47),
        (15.5, 26.536_914_491_115_614),
        (27.25, 62.082_178_189_628_43),
        (50.0, 144.565_743_946_344_9),
        (123.456, 469.605_547_129_968_7),
        (1000.5, 5908.674_175_848_677),
    ];

    #[test]
    fn log_gamma_matches_reference() {
        for (x, want) in LN_GAMMA_REF {
            let got = log_gamma(x).unwrap();
            let tol = 1e-13 * want.abs().max(1.0);
            assert!((got - want).abs() <= tol, "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn log_gamma_trivial_points() {
        assert_eq!(log_gamma(1.0).unwrap(), 0.0);
        assert_eq!(log_gamma(2.0).unwrap(), 0.0);
        let half = log_gamma(0.5).unwrap();
        assert!((half - PI.sqrt().ln()).abs() < 1e-14);
        assert!((log_gamma(0.2).unwrap() - 4.590_843_711_998_803_f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn log_gamma_rejects_nonpositive() {
        assert!(matches!(log_gamma(0.0), Err(Error::Domain(_))));
        assert!(matches!(log_gamma(-1.5), Err(Error::Domain(_))));
        assert!(matches!(log_gamma(f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn log_gamma_recurrence() {
        let mut x = 0.05;
        while x < 60.0 {
            let lhs = ln_gamma(x + 1.0);
            let rhs = ln_gamma(x) + x.ln();
            assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0), "x={x}");
            x += 0.0371;
        }
    }

    #[test]
    fn ln_gamma_ratio_matches_reference() {
        // ln Γ(x + δ) - ln Γ(x), 40-digit reference values
        let cases = [
            (1.0e6 + 1.0, 0.2 - 1.0, -11.052_408_526_371_427),
            (1.0e4 + 0.8, -0.4, -3.684_140_148_910_470_4),
            (20.5, -0.6, -1.788_412_393_294_587_6),
            (3.0, 0.25, 0.242_654_750_548_780_05),
        ];
        for (x, d, want) in cases {
            let got = ln_gamma_ratio(x, d);
            assert!((got - want).abs() < 1e-14 * want.abs().max(1.0), "{x} {d}: {got}");
        }
    }

    #[test]
    fn c_norm_values() {
        assert!((c_norm(0.5).unwrap() - (2.0 * PI).sqrt()).abs() < 1e-14);
        let c = c_norm(0.75).unwrap();
        assert!((c * c - 6.684_342_065_682_668).abs() < 1e-12);
        assert!((c - 2.585_409_458_032_260_7).abs() < 1e-12);
        assert!(c_norm(1.0).is_err());
        assert!(c_norm(0.0).is_err());
    }

    #[test]
    fn c_norm_is_continuous_on_long_memory_range() {
        let mut prev = c_norm(0.501).unwrap();
        let mut h = 0.501;
        while h < 0.999 {
            h += 1e-4;
            let c = c_norm(h).unwrap();
            assert!(c.is_finite() && c > 0.0);
            // C(H) ~ (1 - H)^{-1/2} near 1, so compare relative steps
            assert!((c - prev).abs() < 0.1 * c, "jump at {h}");
            prev = c;
        }
    }

    #[test]
    fn d_coef_values() {
        let p = HurstPair::new(0.6, 0.8).unwrap();
        assert!((d_coef(p) - 0.466_881_787_620_486_7).abs() < 1e-13);
        for i in 1..50 {
            let h = 0.5 + i as f64 / 100.0;
            let p = HurstPair::new(h, h).unwrap();
            assert!((d_coef(p) - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn d_coef_relates_to_c_norm() {
        // D(H1,H2) = C((H1+H2)/2)^2 / (2 C(H1) C(H2))
        for (h1, h2) in [(0.6, 0.8), (0.55, 0.95), (0.7, 0.71)] {
            let c = c_norm(0.5 * (h1 + h2)).unwrap();
            let via_c = c * c / (2.0 * c_norm(h1).unwrap() * c_norm(h2).unwrap());
            let d = d_coef(HurstPair::new(h1, h2).unwrap());
            assert!((d - via_c).abs() < 1e-13);
        }
    }

    #[test]
    fn hurst_pair_validation() {
        assert!(HurstPair::new(0.5, 0.7).is_err());
        assert!(HurstPair::new(0.7, 1.0).is_err());
        assert!(HurstPair::new(0.4, 0.7).is_err());
        let p = HurstPair::new(0.6, 0.8).unwrap();
        assert_eq!(p.swap().h1(), 0.8);
        let (d1, d2) = p.memory();
        assert!((d1 - 0.1).abs() < 1e-15 && (d2 - 0.3).abs() < 1e-15);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn d_coef_symmetric(h1 in 0.5001f64..0.9999, h2 in 0.5001f64..0.9999) {
                let p = HurstPair::new(h1, h2).unwrap();
                prop_assert!((d_coef(p) - d_coef(p.swap())).abs() <= 1e-15);
            }
        }
    }
}
