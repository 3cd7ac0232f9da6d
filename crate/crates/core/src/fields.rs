//! Exact cross-covariances of the two discrete field models, fractional white
//! noise (FWN) and FARIMA, with diagnostics for their long-lag behavior.
//!
//! Index convention: in `cov(j, k, H1, H2)` the Hurst index `H1` belongs to
//! `X_j` and `H2` to `X_k`. For FARIMA this is what makes `R` asymmetric: for
//! `j > k` the later index carries `H1`.

use std::f64::consts::PI;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{r_farima_raw, r_fwn_raw, AsymptoticCovariance};
use crate::quadrature::{integrate, QuadSettings};
use crate::specialfn::{c_norm, ln_gamma, ln_gamma_ratio, HurstPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    Fwn,
    Farima,
}

impl FieldKind {
    pub fn name(self) -> &'static str {
        match self {
            FieldKind::Fwn => "fwn",
            FieldKind::Farima => "farima",
        }
    }
}

/// A discrete centered Gaussian field `{X_n(H)}` with Hurst indices in
/// `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldModel {
    kind: FieldKind,
    a: f64,
    b: f64,
}

/// Per-index constants cached for fast evaluation over many pairs.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Prepared {
    pub h: f64,
    p: f64,
    q: f64,
}

impl FieldModel {
    pub fn new(kind: FieldKind, a: f64, b: f64) -> Result<Self> {
        if !(0.5 < a && a <= b && b < 1.0) {
            return Err(Error::Domain(format!(
                "hurst range [{a}, {b}] must satisfy 1/2 < a <= b < 1"
            )));
        }
        Ok(Self { kind, a, b })
    }

    /// Error unless `h` lies in `[a, b]`.
    pub fn check(&self, h: f64) -> Result<()> {
        if (self.a..=self.b).contains(&h) {
            Ok(())
        } else {
            Err(Error::Domain(format!("H = {h} outside the model range [{}, {}]", self.a, self.b)))
        }
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// The model's asymptotic covariance `R`.
    pub fn asympt(&self) -> AsymptoticCovariance {
        match self.kind {
            FieldKind::Fwn => AsymptoticCovariance::Fwn,
            FieldKind::Farima => AsymptoticCovariance::Farima,
        }
    }

    /// `E[X_j(H1) X_k(H2)]`.
    pub fn cov(&self, j: u64, k: u64, p: HurstPair) -> f64 {
        self.cov_raw(j, k, p.h1(), p.h2())
    }

    pub(crate) fn cov_raw(&self, j: u64, k: u64, h1: f64, h2: f64) -> f64 {
        match self.kind {
            FieldKind::Fwn => fwn_cov_lag(j.abs_diff(k), h1, h2),
            FieldKind::Farima if j >= k => farima_cov_lag(j - k, h1 - 0.5, h2 - 0.5),
            FieldKind::Farima => farima_cov_lag(k - j, h2 - 0.5, h1 - 0.5),
        }
    }

    pub(crate) fn prepare(&self, h: f64) -> Prepared {
        match self.kind {
            FieldKind::Fwn => Prepared {
                h,
                p: ln_gamma(2.0 * h + 1.0),
                q: (PI * h).sin(),
            },
            FieldKind::Farima => {
                let d = h - 0.5;
                Prepared {
                    h,
                    p: ln_gamma(d),
                    q: ln_gamma(1.0 - d),
                }
            }
        }
    }

    /// Covariance at lag `n >= 0` between the later variable (`later`) and the
    /// earlier one, from cached per-index constants.
    #[inline]
    pub(crate) fn cov_prepared(&self, n: u64, later: &Prepared, earlier: &Prepared) -> f64 {
        let k = later.h + earlier.h;
        match self.kind {
            FieldKind::Fwn => {
                let ln_ratio = 0.5 * (later.p + earlier.p) - ln_gamma(k + 1.0);
                let d = ln_ratio.exp() * (later.q * earlier.q).sqrt() / (2.0 * (0.5 * PI * k).sin());
                d * second_difference(n, k)
            }
            FieldKind::Farima => {
                let (d1, d2) = (later.h - 0.5, earlier.h - 0.5);
                let nf = n as f64;
                (ln_gamma_ratio(nf + 1.0 - d2, d1 + d2 - 1.0) + ln_gamma(1.0 - d1 - d2)
                    - later.p
                    - later.q)
                    .exp()
            }
        }
    }

    /// Uniform bound: `sup |cov(j, k, H1, H2)|` over `|j - k| <= max_lag` and a
    /// `points x points` grid of `[a, b]^2`.
    pub fn local_sup(&self, max_lag: u64, points: usize) -> f64 {
        let grid = hurst_grid(self.a, self.b, points);
        let mut sup: f64 = 0.0;
        for &h1 in &grid {
            for &h2 in &grid {
                for n in 0..=max_lag {
                    sup = sup
                        .max(self.cov_raw(n, 0, h1, h2).abs())
                        .max(self.cov_raw(0, n, h1, h2).abs());
                }
            }
        }
        sup
    }
}

pub(crate) fn hurst_grid(a: f64, b: f64, points: usize) -> Vec<f64> {
    if points <= 1 || a == b {
        return vec![a];
    }
    (0..points)
        .map(|i| a + (b - a) * i as f64 / (points - 1) as f64)
        .collect()
}

/// `|n+1|^K + |n-1|^K - 2|n|^K`, the second difference of `|x|^K`, evaluated
/// without cancellation at large `n` through its binomial series.
pub fn second_difference(n: u64, k: f64) -> f64 {
    match n {
        0 => 2.0,
        1 => 2f64.powf(k) - 2.0,
        2 => 3f64.powf(k) + 1.0 - 2.0 * 2f64.powf(k),
        _ => {
            let nf = n as f64;
            let x2 = 1.0 / (nf * nf);
            // 2 n^K Σ_{m>=1} binom(K, 2m) n^{-2m}
            let mut coef = 0.5 * k * (k - 1.0);
            let mut pow = x2;
            let mut sum = 0.0;
            for m in 1..64 {
                let term = coef * pow;
                sum += term;
                if term.abs() <= 1e-17 * sum.abs() {
                    break;
                }
                let m2 = 2.0 * m as f64;
                coef *= (k - m2) * (k - m2 - 1.0) / ((m2 + 1.0) * (m2 + 2.0));
                pow *= x2;
            }
            2.0 * nf.powf(k) * sum
        }
    }
}

/// FWN cross-covariance `D(H1,H2) (|n+1|^K + |n-1|^K - 2|n|^K)` with
/// `n = j - k`, `K = H1 + H2`.
///
/// The prefactor is `C(K/2)^2 / (2 C(H1) C(H2)) = D(H1, H2)`, fixed by the
/// spectral integral [`fwn_spectral_oracle`].
pub fn fwn_cov(j: u64, k: u64, p: HurstPair) -> f64 {
    fwn_cov_lag(j.abs_diff(k), p.h1(), p.h2())
}

pub(crate) fn fwn_cov_lag(n: u64, h1: f64, h2: f64) -> f64 {
    crate::specialfn::d_coef_raw(h1, h2) * second_difference(n, h1 + h2)
}

// Truncation point of the spectral integral: a multiple of 2π, so every
// integer-frequency cosine has phase zero there and the tail expansion is
// exact up to O(X^{-p-5}).
const SPECTRAL_CUTOFF_PERIODS: f64 = 64.0;

/// `∫_R e^{-inx} |e^{-ix} - 1|^2 / |x|^{k+1} dx` for `k ∈ (0, 2)`.
///
/// At `n = 0` with `k = 2H` this is `C(H)^2`.
pub fn spectral_increment_integral(n: u64, k: f64) -> Result<f64> {
    if !(k > 0.0 && k < 2.0) {
        return Err(Error::Domain(format!("spectral exponent must be in (0, 2), got {k}")));
    }
    let p = k + 1.0;
    let nf = n as f64;
    let g = |x: f64| {
        let s = (0.5 * x).sin();
        (nf * x).cos() * 4.0 * s * s / x.powf(p)
    };
    let quad = QuadSettings {
        rel_tol: 1e-12,
        abs_tol: 1e-14,
        max_panels: 2000,
    };
    // (0, 1]: x = v^q makes the x^{1-k} singularity bounded
    let q = 1.0 / (2.0 - k);
    let head = integrate(
        |v: f64| {
            if v == 0.0 {
                return 0.0;
            }
            let x = v.powf(q);
            g(x) * q * x / v
        },
        0.0,
        1.0,
        &quad,
    )?
    .value;
    let cutoff = 2.0 * PI * SPECTRAL_CUTOFF_PERIODS;
    let mut body = integrate(g, 1.0, PI, &quad)?.value;
    let panels = (2.0 * SPECTRAL_CUTOFF_PERIODS) as usize;
    for i in 1..panels {
        let lo = i as f64 * PI;
        body += integrate(g, lo, lo + PI, &quad)?.value;
    }
    // cos(nx) 4 sin^2(x/2) = 2cos(nx) - cos((n+1)x) - cos((n-1)x)
    let tail_one = |omega: f64| -> f64 {
        if omega == 0.0 {
            cutoff.powf(1.0 - p) / (p - 1.0)
        } else {
            let w2 = omega * omega;
            p / (w2 * cutoff.powf(p + 1.0)) - p * (p + 1.0) * (p + 2.0) / (w2 * w2 * cutoff.powf(p + 3.0))
        }
    };
    let tail = 2.0 * tail_one(nf) - tail_one(nf + 1.0) - tail_one((nf - 1.0).abs());
    Ok(2.0 * (head + body + tail))
}

/// Largest lag accepted by [`fwn_spectral_oracle`].
pub const SPECTRAL_ORACLE_MAX_LAG: u64 = 64;

/// `E[X_j(H1) X_k(H2)]` for FWN as the harmonizable integral
/// `(C(H1) C(H2))^{-1} ∫ e^{-i(j-k)x} |e^{-ix} - 1|^2 / |x|^{H1+H2+1} dx`.
/// Independent of [`fwn_cov`]; used to pin its normalization.
pub fn fwn_spectral_oracle(j: u64, k: u64, p: HurstPair) -> Result<f64> {
    let n = j.abs_diff(k);
    if n > SPECTRAL_ORACLE_MAX_LAG {
        return Err(Error::SizeLimit(format!(
            "spectral oracle limited to |j-k| <= {SPECTRAL_ORACLE_MAX_LAG}, got {n}"
        )));
    }
    let integral = spectral_increment_integral(n, p.sum())?;
    Ok(integral / (c_norm(p.h1())? * c_norm(p.h2())?))
}

/// FARIMA moving-average coefficient `ψ_l(d) = Γ(d+l) / (l! Γ(d))`, with
/// `ψ_0 = 1`. Intended for `d ∈ (0, 1/2)`.
pub fn farima_psi(l: u64, d: f64) -> f64 {
    if l < 16 {
        let mut psi = 1.0;
        for i in 1..=l {
            let i = i as f64;
            psi *= (d + i - 1.0) / i;
        }
        return psi;
    }
    (ln_gamma_ratio(l as f64 + 1.0, d - 1.0) - ln_gamma(d)).exp()
}

/// FARIMA cross-covariance `E[Φ_j^{d1} Φ_k^{d2}] = Σ_{l>=0} ψ_{n+l}(d1) ψ_l(d2)`
/// for `j >= k`, `n = j - k`, `d_i = H_i - 1/2`, in closed form
///
/// ```text
/// Γ(n+d1) Γ(1-d1-d2) / (Γ(d1) Γ(1-d1) Γ(n+1-d2))
/// ```
///
/// (Gauss's summation of the hypergeometric series at 1). For `j < k` the
/// roles of `H1` and `H2` swap.
pub fn farima_cov(j: u64, k: u64, p: HurstPair) -> f64 {
    FieldModel {
        kind: FieldKind::Farima,
        a: p.h1().min(p.h2()),
        b: p.h1().max(p.h2()),
    }
    .cov_raw(j, k, p.h1(), p.h2())
}

pub(crate) fn farima_cov_lag(n: u64, d1: f64, d2: f64) -> f64 {
    let nf = n as f64;
    (ln_gamma_ratio(nf + 1.0 - d2, d1 + d2 - 1.0) + ln_gamma(1.0 - d1 - d2)
        - ln_gamma(d1)
        - ln_gamma(1.0 - d1))
        .exp()
}

/// Minimum number of explicitly summed terms in [`farima_cov_series`].
pub const FARIMA_SERIES_MIN_TERMS: u64 = 1000;

/// Direct summation of `Σ_{l>=0} ψ_{n+l}(d1) ψ_l(d2)`: `max(1000, 8n)` terms
/// by recurrence, then the remainder by Euler-Maclaurin on the gamma-ratio
/// interpolant of the summand. Serves as the check on [`farima_cov`].
pub fn farima_cov_series(n: u64, d1: f64, d2: f64) -> Result<f64> {
    for d in [d1, d2] {
        if !(d > 0.0 && d < 0.5) {
            return Err(Error::Domain(format!("memory parameter {d} outside (0, 1/2)")));
        }
    }
    let terms = FARIMA_SERIES_MIN_TERMS.max(8 * n);
    let nf = n as f64;
    let mut a = farima_psi(n, d1);
    let mut b = 1.0;
    let mut sum = 0.0;
    let mut comp = 0.0;
    for l in 0..terms {
        let lf = l as f64;
        // Neumaier-compensated accumulation
        let term = a * b;
        let t = sum + term;
        comp += if sum.abs() >= term.abs() {
            (sum - t) + term
        } else {
            (term - t) + sum
        };
        sum = t;
        a *= (d1 + nf + lf) / (nf + lf + 1.0);
        b *= (d2 + lf) / (lf + 1.0);
    }
    let lg = ln_gamma(d1) + ln_gamma(d2);
    let f = |u: f64| {
        (ln_gamma_ratio(nf + u + 1.0, d1 - 1.0) + ln_gamma_ratio(u + 1.0, d2 - 1.0) - lg).exp()
    };
    let big_l = terms as f64;
    let e = d1 + d2 - 1.0;
    // ∫_L^∞ f: u = L / v, v = z^{1/(-e)}
    let r = -1.0 / e;
    let integral = integrate(
        |z: f64| {
            if z == 0.0 {
                return 0.0;
            }
            let v = z.powf(r);
            let u = big_l / v;
            f(u) * big_l / (v * v) * r * v / z
        },
        0.0,
        1.0,
        &QuadSettings {
            rel_tol: 1e-12,
            abs_tol: 0.0,
            max_panels: 2000,
        },
    )?
    .value;
    let f_l = f(big_l);
    let dlog = (d1 - 1.0) / (nf + big_l + 0.5 * d1) + (d2 - 1.0) / (big_l + 0.5 * d2);
    let tail = integral + 0.5 * f_l - f_l * dlog / 12.0;
    Ok(sum + comp + tail)
}

/// `sup` over a 21 x 21 grid of `[a, b]^2` of
/// `|n^{2-H1-H2} E[X_n(H1) X_0(H2)] - R(H1, H2)|`.
pub fn decay_residual(model: &FieldModel, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("decay_residual needs n >= 1".into()));
    }
    let grid = hurst_grid(model.a, model.b, 21);
    let mut sup: f64 = 0.0;
    for &h1 in &grid {
        for &h2 in &grid {
            sup = sup.max(residual_at(model, n, h1, h2));
        }
    }
    Ok(sup)
}

/// The [`decay_residual`] at a single `(H1, H2)`.
pub fn decay_residual_at(model: &FieldModel, n: u64, p: HurstPair) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("decay_residual needs n >= 1".into()));
    }
    Ok(residual_at(model, n, p.h1(), p.h2()))
}

fn residual_at(model: &FieldModel, n: u64, h1: f64, h2: f64) -> f64 {
    let scaled = (n as f64).powf(2.0 - h1 - h2) * model.cov_raw(n, 0, h1, h2);
    let r = match model.kind {
        FieldKind::Fwn => r_fwn_raw(h1, h2),
        FieldKind::Farima => r_farima_raw(h1, h2),
    };
    (scaled - r).abs()
}

/// `∫_0^∞ (1+u)^{d1-1} u^{d2-1} du = Γ(d2) Γ(1-d1-d2) / Γ(1-d1)`.
pub fn tail_sum_limit(d1: f64, d2: f64) -> f64 {
    (ln_gamma(d2) + ln_gamma(1.0 - d1 - d2) - ln_gamma(1.0 - d1)).exp()
}

/// `|n^{1-d1-d2} Σ_{l>=1} Γ(d1+n+l)/(n+l)! Γ(d2+l)/l! - ∫_0^∞ (1+u)^{d1-1} u^{d2-1} du|`.
///
/// The sum equals `Γ(d1) Γ(d2) (farima_cov(n) - ψ_n(d1))`, which is how it is
/// evaluated.
pub fn tail_sum_residual(n: u64, d1: f64, d2: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("tail_sum_residual needs n >= 1".into()));
    }
    for d in [d1, d2] {
        if !(d > 0.0 && d < 0.5) {
            return Err(Error::Domain(format!("memory parameter {d} outside (0, 1/2)")));
        }
    }
    let sum = (ln_gamma(d1) + ln_gamma(d2)).exp() * (farima_cov_lag(n, d1, d2) - farima_psi(n, d1));
    let scaled = (n as f64).powf(1.0 - d1 - d2) * sum;
    Ok((scaled - tail_sum_limit(d1, d2)).abs())
}
