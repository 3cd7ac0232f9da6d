//! Continuous-parameter covariance kernels: asymptotic covariances `R`, the
//! composite kernels `𝓡` and `𝓡*`, the limit covariance `I(t, s)`, the
//! universal field covariance, the mBm covariance and the tangent covariance.

use std::f64::consts::PI;

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hprofile::{HurstProfile, ProfileKind};
use crate::quadrature::{integrate_try, QuadSettings};
use crate::specialfn::{d_coef_raw, ln_gamma, HurstPair};

/// The limit `R(H1, H2)` of `(j-k)^{2-H1-H2} E[X_j(H1) X_k(H2)]` as `j - k → ∞`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AsymptoticCovariance {
    Fwn,
    Farima,
    Constant {
        c: f64,
    },
    /// Bilinear interpolation of `values[i][j] = R(h1[i], h2[j])`, clamped to
    /// the grid edges.
    UserTable {
        h1: Vec<f64>,
        h2: Vec<f64>,
        values: Vec<Vec<f64>>,
    },
}

impl AsymptoticCovariance {
    pub fn constant(c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Domain(format!("constant R must be positive, got {c}")));
        }
        Ok(Self::Constant { c })
    }

    pub fn user_table(h1: Vec<f64>, h2: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        let increasing = |g: &[f64]| g.windows(2).all(|w| w[1] > w[0]);
        if h1.len() < 2 || h2.len() < 2 || !increasing(&h1) || !increasing(&h2) {
            return Err(Error::Domain(
                "user-table grids need at least two strictly increasing nodes".into(),
            ));
        }
        if values.len() != h1.len() || values.iter().any(|r| r.len() != h2.len()) {
            return Err(Error::Domain("user-table values must be h1.len() x h2.len()".into()));
        }
        if values.iter().flatten().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Domain("user-table values must be positive and finite".into()));
        }
        Ok(Self::UserTable { h1, h2, values })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Fwn => "fwn",
            Self::Farima => "farima",
            Self::Constant { .. } => "constant",
            Self::UserTable { .. } => "user-table",
        }
    }

    /// Whether `R` is smooth in `(H1, H2)`, as the representation
    /// formula requires.
    pub fn is_smooth(&self) -> bool {
        matches!(self, Self::Fwn | Self::Farima | Self::Constant { .. })
    }

    /// Evaluate `R(h1, h2)`. Arguments are assumed to lie in `(1/2, 1)`.
    pub fn eval(&self, h1: f64, h2: f64) -> f64 {
        match self {
            Self::Fwn => r_fwn_raw(h1, h2),
            Self::Farima => r_farima_raw(h1, h2),
            Self::Constant { c } => *c,
            Self::UserTable { h1: g1, h2: g2, values } => {
                let (i, u) = locate(g1, h1);
                let (j, v) = locate(g2, h2);
                let f00 = values[i][j];
                let f01 = values[i][j + 1];
                let f10 = values[i + 1][j];
                let f11 = values[i + 1][j + 1];
                (1.0 - u) * ((1.0 - v) * f00 + v * f01) + u * ((1.0 - v) * f10 + v * f11)
            }
        }
    }

    pub fn at(&self, p: HurstPair) -> f64 {
        self.eval(p.h1(), p.h2())
    }

    /// Supremum of `R` over a 50 x 50 grid of `[a, b]^2`.
    pub fn sup_on(&self, a: f64, b: f64) -> f64 {
        let n = 50;
        let node = |i: usize| a + (b - a) * i as f64 / (n - 1) as f64;
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (node(i), node(j))))
            .map(|(x, y)| self.eval(x, y))
            .fold(0.0, f64::max)
    }
}

fn locate(grid: &[f64], x: f64) -> (usize, f64) {
    let last = grid.len() - 1;
    if x <= grid[0] {
        return (0, 0.0);
    }
    if x >= grid[last] {
        return (last - 1, 1.0);
    }
    let i = grid.partition_point(|g| *g <= x) - 1;
    (i, (x - grid[i]) / (grid[i + 1] - grid[i]))
}

/// Asymptotic covariance of the fractional-white-noise field,
/// `(H1+H2)(H1+H2-1) D(H1, H2)`, which is `H(2H-1)` on the diagonal.
pub fn r_fwn(p: HurstPair) -> f64 {
    r_fwn_raw(p.h1(), p.h2())
}

pub(crate) fn r_fwn_raw(h1: f64, h2: f64) -> f64 {
    let k = h1 + h2;
    k * (k - 1.0) * d_coef_raw(h1, h2)
}

/// The fractional-white-noise constant with the cross-covariance prefactor
/// `C((H1+H2)/2)^2 / (C(H1) C(H2))` taken at face value (no factor 1/2).
/// Twice [`r_fwn`]; kept for reporting only.
pub fn r_fwn_unhalved(p: HurstPair) -> f64 {
    2.0 * r_fwn(p)
}

/// FARIMA asymptotic covariance `sin(π(H1 - 1/2)) Γ(2 - H1 - H2) / π`.
/// Not symmetric: `H1` belongs to the later time index.
pub fn r_farima(p: HurstPair) -> f64 {
    r_farima_raw(p.h1(), p.h2())
}

pub(crate) fn r_farima_raw(h1: f64, h2: f64) -> f64 {
    (PI * (h1 - 0.5)).sin() * ln_gamma(2.0 - h1 - h2).exp() / PI
}

/// `𝓡(t, s; H1, H2) = R(H1, H2) 1{t >= s} + R(H2, H1) 1{t < s}`.
pub fn script_r(t: f64, s: f64, p: HurstPair, asympt: &AsymptoticCovariance) -> f64 {
    script_r_raw(t, s, p.h1(), p.h2(), asympt)
}

#[inline]
pub(crate) fn script_r_raw(t: f64, s: f64, h1: f64, h2: f64, asympt: &AsymptoticCovariance) -> f64 {
    if t >= s {
        asympt.eval(h1, h2)
    } else {
        asympt.eval(h2, h1)
    }
}

/// `𝓡*(θ, σ) = 𝓡(θ, σ; h(θ), h(σ)) |θ - σ|^{h(θ)+h(σ)-2}`, singular on the
/// diagonal.
pub fn script_r_star(
    theta: f64,
    sigma: f64,
    profile: &HurstProfile,
    asympt: &AsymptoticCovariance,
) -> Result<f64> {
    if theta == sigma {
        return Err(Error::SingularPoint(theta));
    }
    let ht = profile.eval(theta)?;
    let hs = profile.eval(sigma)?;
    Ok(script_r_raw(theta, sigma, ht, hs, asympt) * (theta - sigma).abs().powf(ht + hs - 2.0))
}

/// Covariance of the limit field `W̃(t, H)`:
///
/// ```text
/// [R(H2,H1) s^K + R(H1,H2) t^K - 𝓡(t,s;H1,H2) |t-s|^K] / (K (K-1)),  K = H1 + H2
/// ```
pub fn field_cov(p: HurstPair, t: f64, s: f64, asympt: &AsymptoticCovariance) -> f64 {
    field_cov_raw(p.h1(), p.h2(), t, s, asympt)
}

pub(crate) fn field_cov_raw(h1: f64, h2: f64, t: f64, s: f64, asympt: &AsymptoticCovariance) -> f64 {
    let k = h1 + h2;
    let r12 = asympt.eval(h1, h2);
    let r21 = asympt.eval(h2, h1);
    let cross = if t >= s { r12 } else { r21 };
    (r21 * s.powf(k) + r12 * t.powf(k) - cross * (t - s).abs().powf(k)) / (k * (k - 1.0))
}

/// Covariance of multifractional Brownian motion,
/// `D(h(t), h(s)) (t^K + s^K - |t-s|^K)` with `K = h(t) + h(s)`.
pub fn mbm_cov(profile: &HurstProfile, t: f64, s: f64) -> Result<f64> {
    let ht = profile.eval(t)?;
    let hs = profile.eval(s)?;
    let k = ht + hs;
    Ok(d_coef_raw(ht, hs) * (t.powf(k) + s.powf(k) - (t - s).abs().powf(k)))
}

/// Covariance `E[T(t, u) T(s, v)]` of the tangent field: an fBm of index
/// `h(t)` with variance `R(h,h) / (2h^2 - h)` at `u = 1` when `t == s`, and
/// zero across distinct base points.
pub fn tangent_cov(
    t: f64,
    s: f64,
    u: f64,
    v: f64,
    profile: &HurstProfile,
    asympt: &AsymptoticCovariance,
) -> Result<f64> {
    if !(u >= 0.0 && v >= 0.0) {
        return Err(Error::Domain("tangent lags must be nonnegative".into()));
    }
    if t != s {
        profile.eval(s)?;
        return Ok(0.0);
    }
    let h = profile.eval(t)?;
    let e = 2.0 * h;
    let scale = asympt.eval(h, h) / (4.0 * h * h - 2.0 * h);
    Ok(scale * (u.powf(e) + v.powf(e) - (u - v).abs().powf(e)))
}

/// The covariance `I(t, s) = ∫_0^t ∫_0^s 𝓡*(θ, σ) dσ dθ` of the limit process,
/// evaluated by diagonal-split adaptive quadrature.
#[derive(Debug, Clone)]
pub struct LimitKernel {
    pub profile: HurstProfile,
    pub asympt: AsymptoticCovariance,
    pub quad: QuadSettings,
}

impl LimitKernel {
    pub fn new(profile: HurstProfile, asympt: AsymptoticCovariance) -> Self {
        Self {
            profile,
            asympt,
            quad: QuadSettings::default(),
        }
    }

    pub fn with_quad(mut self, quad: QuadSettings) -> Self {
        self.quad = quad;
        self
    }

    pub fn limit_cov(&self, t: f64, s: f64) -> Result<f64> {
        if !(t >= 0.0 && s >= 0.0) {
            return Err(Error::Domain(format!("limit_cov needs t, s >= 0, got ({t}, {s})")));
        }
        self.rect((0.0, t), (0.0, s))
    }

    /// `E[(S̃(t1) - S̃(t0)) (S̃(s1) - S̃(s0))]`, the integral of `𝓡*` over
    /// `[t0, t1] x [s0, s1]`, without the cancellation of differencing
    /// `limit_cov` values.
    pub fn increment_cov(&self, t: (f64, f64), s: (f64, f64)) -> Result<f64> {
        if !(t.0 >= 0.0 && t.1 >= t.0 && s.0 >= 0.0 && s.1 >= s.0) {
            return Err(Error::Domain("increment_cov needs 0 <= t0 <= t1, 0 <= s0 <= s1".into()));
        }
        self.rect(t, s)
    }

    /// [`limit_cov`](Self::limit_cov) forced through the singular quadrature
    /// even when a closed form exists.
    pub fn limit_cov_quadrature(&self, t: f64, s: f64) -> Result<f64> {
        if !(t >= 0.0 && s >= 0.0) {
            return Err(Error::Domain(format!("limit_cov needs t, s >= 0, got ({t}, {s})")));
        }
        self.rect_integral((0.0, t), (0.0, s))
    }

    fn rect(&self, th: (f64, f64), sg: (f64, f64)) -> Result<f64> {
        match self.profile.kind() {
            ProfileKind::Constant { value } => Ok(self.constant_rect(*value, th, sg)),
            _ => self.rect_integral(th, sg),
        }
    }

    /// With `h ≡ H`, `∫∫ c |θ-σ|^{2H-2} = c/(2H(2H-1)) Σ ± |x|^{2H}` over the
    /// corner differences.
    fn constant_rect(&self, h: f64, th: (f64, f64), sg: (f64, f64)) -> f64 {
        if th.1 <= th.0 || sg.1 <= sg.0 {
            return 0.0;
        }
        let c = self.asympt.eval(h, h);
        let e = 2.0 * h;
        let g = |x: f64| x.abs().powf(e);
        c * (g(th.1 - sg.0) + g(th.0 - sg.1) - g(th.1 - sg.1) - g(th.0 - sg.0)) / (e * (e - 1.0))
    }

    /// `𝓡*` evaluated from a precomputed distance `w = |θ - σ| > 0`.
    #[inline]
    fn kernel(&self, theta: f64, sigma: f64, ht: f64, hs: f64, w: f64) -> f64 {
        script_r_raw(theta, sigma, ht, hs, &self.asympt) * w.powf(ht + hs - 2.0)
    }

    fn inner_settings(&self) -> QuadSettings {
        QuadSettings {
            rel_tol: self.quad.rel_tol * 0.1,
            abs_tol: self.quad.abs_tol * 0.1,
            max_panels: self.quad.max_panels,
        }
    }

    fn rect_integral(&self, th: (f64, f64), sg: (f64, f64)) -> Result<f64> {
        if th.1 <= th.0 || sg.1 <= sg.0 {
            return Ok(0.0);
        }
        let c0 = th.0.max(sg.0);
        let c1 = th.1.min(sg.1);
        if c0 >= c1 {
            return self.corner_rect(th, sg);
        }
        let th_parts = [(th.0, c0), (c0, c1), (c1, th.1)];
        let sg_parts = [(sg.0, c0), (c0, c1), (c1, sg.1)];
        let mut total = 0.0;
        for (i, tp) in th_parts.iter().enumerate() {
            for (j, sp) in sg_parts.iter().enumerate() {
                if tp.1 <= tp.0 || sp.1 <= sp.0 {
                    continue;
                }
                total += if i == 1 && j == 1 {
                    2.0 * self.triangle(c0, c1)?
                } else {
                    self.corner_rect(*tp, *sp)?
                };
            }
        }
        Ok(total)
    }

    /// Rectangle lying on one side of the diagonal, touching it at most at a
    /// corner.
    fn corner_rect(&self, th: (f64, f64), sg: (f64, f64)) -> Result<f64> {
        // 𝓡* is symmetric, so orient the rectangle below the diagonal.
        let (th, sg) = if th.0 >= sg.1 { (th, sg) } else { (sg, th) };
        debug_assert!(th.0 >= sg.1);
        let gap = th.0 - sg.1;
        let lx = th.1 - th.0;
        let ly = sg.1 - sg.0;
        if gap > 0.25 * lx.max(ly) {
            // smooth integrand: plain nested quadrature
            let inner_q = self.inner_settings();
            let outer = |x: f64| -> Result<f64> {
                let theta = th.0 + x;
                let ht = self.profile.value(theta);
                let inner = |y: f64| -> f64 {
                    let sigma = sg.1 - y;
                    self.kernel(theta, sigma, ht, self.profile.value(sigma), gap + x + y)
                };
                Ok(integrate_try(|y| Ok(inner(y)), 0.0, ly, &inner_q)?.value)
            };
            return Ok(integrate_try(outer, 0.0, lx, &self.quad)?.value);
        }
        Ok(self.duffy_half(th.0, sg.1, gap, lx, ly, false)? + self.duffy_half(th.0, sg.1, gap, lx, ly, true)?)
    }

    /// Half of a corner rectangle split along the line from the corner to the
    /// opposite vertex: `x = lx r`, `y = ly r s` (or with `x`, `y` swapped
    /// roles), where `x = θ - θ0`, `y = σ0 - σ`. The kernel then behaves like
    /// `r^{h_c - 2}` times a smooth function and `r = v^{1/h_c}` absorbs the
    /// Jacobian `r`.
    fn duffy_half(&self, t0: f64, s0: f64, gap: f64, lx: f64, ly: f64, swap: bool) -> Result<f64> {
        let hc = self.profile.value(t0) + self.profile.value(s0) - 1.0;
        let q = 1.0 / hc;
        let inner_q = self.inner_settings();
        let outer = |s: f64| -> Result<f64> {
            let inner = |v: f64| -> f64 {
                if v <= 0.0 {
                    return 0.0;
                }
                let r = v.powf(q);
                let (x, y) = if swap { (lx * r * s, ly * r) } else { (lx * r, ly * r * s) };
                let theta = t0 + x;
                let sigma = s0 - y;
                let ht = self.profile.value(theta);
                let hs = self.profile.value(sigma);
                // dr = q v^{q-1} dv, area element lx ly r dr ds
                let jac = lx * ly * r * q * r / v;
                self.kernel(theta, sigma, ht, hs, gap + x + y) * jac
            };
            Ok(integrate_try(|v| Ok(inner(v)), 0.0, 1.0, &inner_q)?.value)
        };
        Ok(integrate_try(outer, 0.0, 1.0, &self.quad)?.value)
    }

    /// `∫_{c0}^{c1} dθ ∫_{c0}^{θ} dσ 𝓡*(θ, σ)`, the half of the square
    /// `[c0, c1]^2` below the diagonal.
    fn triangle(&self, c0: f64, c1: f64) -> Result<f64> {
        let len = c1 - c0;
        let q = 1.0 / (2.0 * self.profile.value(c0) - 1.0);
        let inner_q = self.inner_settings();
        let outer = |v: f64| -> Result<f64> {
            let vq = v.powf(q);
            let span = len * vq;
            let theta = c0 + span;
            let jac_v = len * q * vq / v;
            if !(jac_v > 0.0) || !(span > 0.0) {
                return Ok(0.0);
            }
            let ht = self.profile.value(theta);
            let p = 1.0 / (2.0 * ht - 1.0);
            // w = θ - σ = span u^p
            let inner = |u: f64| -> f64 {
                let up = u.powf(p);
                let w = span * up;
                let jac_u = span * p * up / u;
                if !(jac_u > 0.0) {
                    return 0.0;
                }
                let sigma = theta - w;
                let hs = self.profile.value(sigma.max(c0));
                self.kernel(theta, sigma, ht, hs, w) * jac_u
            };
            let r = integrate_try(|u| Ok(inner(u)), 0.0, 1.0, &inner_q)?;
            Ok(r.value * jac_v)
        };
        Ok(integrate_try(outer, 0.0, 1.0, &self.quad)?.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;

    fn pair(a: f64, b: f64) -> HurstPair {
        HurstPair::new(a, b).unwrap()
    }

    fn const_kernel() -> LimitKernel {
        LimitKernel::new(
            HurstProfile::constant(0.75).unwrap(),
            AsymptoticCovariance::constant(0.375).unwrap(),
        )
    }

    fn sine() -> HurstProfile {
        HurstProfile::sinusoidal(0.75, 0.15).unwrap()
    }

    #[test]
    fn r_fwn_values() {
        assert!((r_fwn(pair(0.75, 0.75)) - 0.375).abs() < 1e-15);
        assert!((r_fwn(pair(0.7, 0.7)) - 0.28).abs() < 1e-14);
        assert!((r_fwn(pair(0.6, 0.8)) - 0.261_453_801_067_472_5).abs() < 1e-13);
        assert_eq!(r_fwn(pair(0.6, 0.8)), r_fwn(pair(0.8, 0.6)));
        assert!((r_fwn_unhalved(pair(0.6, 0.8)) - 0.522_907_602_134_945_1).abs() < 1e-13);
    }

    #[test]
    fn r_farima_values() {
        assert!((r_farima(pair(0.7, 0.7)) - 0.278_624_678_053_099).abs() < 1e-13);
        assert!((r_farima(pair(0.6, 0.8)) - 0.146_481_661_856_691_3).abs() < 1e-13);
        assert!((r_farima(pair(0.8, 0.6)) - 0.383_493_969_469_386_84).abs() < 1e-13);
    }

    #[test]
    fn r_farima_matches_beta_integral() {
        // Γ(d1)^{-1} Γ(d2)^{-1} ∫_0^∞ (1+u)^{d1-1} u^{d2-1} du, split at 1 and
        // mapped onto (0, 1] with u = 1/x on the tail
        let q = QuadSettings::default().with_rel_tol(1e-12).with_abs_tol(0.0);
        for (h1, h2) in [
            (0.7, 0.7),
            (0.6, 0.8),
            (0.8, 0.6),
            (0.55, 0.9),
            (0.9, 0.55),
            (0.65, 0.66),
            (0.58, 0.61),
            (0.83, 0.77),
            (0.95, 0.52),
            (0.52, 0.95),
        ] {
            let (d1, d2) = (h1 - 0.5, h2 - 0.5);
            // near 0: u^{d2-1} singular; substitute u = z^{1/d2}
            let head = integrate(
                |z: f64| {
                    let u = z.powf(1.0 / d2);
                    (1.0 + u).powf(d1 - 1.0) / d2
                },
                0.0,
                1.0,
                &q,
            )
            .unwrap()
            .value;
            // u = 1/x: (1+1/x)^{d1-1} x^{1-d2} x^{-2} = (1+x)^{d1-1} x^{-d1-d2}
            // then x = z^{1/e}, e = 1 - d1 - d2
            let e = 1.0 - d1 - d2;
            let tail = integrate(
                |z: f64| {
                    let x = z.powf(1.0 / e);
                    (1.0 + x).powf(d1 - 1.0) / e
                },
                0.0,
                1.0,
                &q,
            )
            .unwrap()
            .value;
            let want = (head + tail) / (ln_gamma(d1).exp() * ln_gamma(d2).exp());
            let got = r_farima(pair(h1, h2));
            assert!(((got - want) / want).abs() < 1e-8, "({h1},{h2}): {got} vs {want}");
        }
    }

    #[test]
    fn script_r_branches() {
        let far = AsymptoticCovariance::Farima;
        let p = pair(0.6, 0.8);
        assert_eq!(script_r(2.0, 1.0, p, &far), r_farima(p));
        assert_eq!(script_r(1.0, 1.0, p, &far), r_farima(p));
        assert!((script_r(1.0, 2.0, p, &far) - 0.383_493_969_469_386_84).abs() < 1e-13);
    }

    #[test]
    fn script_r_star_examples() {
        let h = HurstProfile::constant(0.75).unwrap();
        let r = AsymptoticCovariance::constant(0.375).unwrap();
        assert!((script_r_star(1.0, 0.0, &h, &r).unwrap() - 0.375).abs() < 1e-15);
        assert!((script_r_star(4.5, 0.5, &h, &r).unwrap() - 0.1875).abs() < 1e-15);
        assert!(matches!(
            script_r_star(1.0, 1.0, &h, &r),
            Err(Error::SingularPoint(_))
        ));
    }

    #[test]
    fn user_table_interpolates_bilinearly() {
        let t = AsymptoticCovariance::user_table(
            vec![0.6, 0.8],
            vec![0.6, 0.8],
            vec![vec![1.0, 2.0], vec![3.0, 4.0]],
        )
        .unwrap();
        assert_eq!(t.eval(0.6, 0.6), 1.0);
        assert!((t.eval(0.7, 0.7) - 2.5).abs() < 1e-14);
        assert_eq!(t.eval(0.9, 0.5), 3.0);
        assert!(AsymptoticCovariance::user_table(vec![0.6, 0.8], vec![0.6, 0.8], vec![vec![1.0, -2.0], vec![3.0, 4.0]]).is_err());
    }

    #[test]
    fn sup_is_finite_and_positive() {
        for r in [AsymptoticCovariance::Fwn, AsymptoticCovariance::Farima] {
            let s = r.sup_on(0.6, 0.9);
            assert!(s.is_finite() && s > 0.0);
        }
    }

    #[test]
    fn limit_cov_constant_closed_form() {
        let k = const_kernel();
        assert!((k.limit_cov(1.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((k.limit_cov(2.0, 2.0).unwrap() - 2f64.powf(1.5)).abs() < 1e-14);
        assert!((k.limit_cov_quadrature(1.0, 1.0).unwrap() - 1.0).abs() < 1e-8);
        assert!((k.limit_cov_quadrature(2.0, 2.0).unwrap() - 2f64.powf(1.5)).abs() < 3e-8);
        // I(t,s) = c [t^{2H} + s^{2H} - |t-s|^{2H}] / (2H(2H-1))
        for (t, s) in [(2.0, 1.0), (0.3, 1.7), (1.0, 0.25), (0.5, 0.5)] {
            let want = 0.375 * (f64::powf(t, 1.5) + f64::powf(s, 1.5) - f64::powf((t - s).abs(), 1.5)) / 0.75;
            let got = k.limit_cov_quadrature(t, s).unwrap();
            assert!(((got - want) / want).abs() < 1e-8, "({t},{s}) {got} vs {want}");
            assert!(((k.limit_cov(t, s).unwrap() - want) / want).abs() < 1e-14);
        }
        assert_eq!(k.limit_cov(0.0, 1.0).unwrap(), 0.0);
        assert_eq!(k.limit_cov_quadrature(0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn limit_cov_symmetric_for_nonconstant_profile() {
        let k = LimitKernel::new(sine(), AsymptoticCovariance::Farima);
        for (t, s) in [(1.0, 0.4), (2.0, 0.7), (0.25, 1.5)] {
            let a = k.limit_cov(t, s).unwrap();
            let b = k.limit_cov(s, t).unwrap();
            assert!(((a - b) / a).abs() < 1e-8);
        }
    }

    #[test]
    fn limit_cov_matches_independent_fine_quadrature() {
        // 2 ∫_0^1 dθ ∫_0^θ dw 𝓡*(θ, θ-w), evaluated once with 20-digit
        // tanh-sinh quadrature and frozen.
        let k = LimitKernel::new(sine(), AsymptoticCovariance::Farima);
        let got = k.limit_cov(1.0, 1.0).unwrap();
        let want = 1.319_446_483_967_732_3;
        assert!(((got - want) / want).abs() < 1e-8, "{got}");
        let fwn = LimitKernel::new(sine(), AsymptoticCovariance::Fwn);
        let got = fwn.limit_cov(1.0, 1.0).unwrap();
        assert!(((got - 0.993_380_261_310_210_9) / got).abs() < 1e-8, "{got}");
    }

    #[test]
    fn increment_cov_consistent_with_differences() {
        let k = LimitKernel::new(sine(), AsymptoticCovariance::Fwn);
        let inc = k.increment_cov((0.5, 1.0), (0.25, 0.75)).unwrap();
        let diff = k.limit_cov(1.0, 0.75).unwrap() - k.limit_cov(0.5, 0.75).unwrap()
            - k.limit_cov(1.0, 0.25).unwrap()
            + k.limit_cov(0.5, 0.25).unwrap();
        assert!((inc - diff).abs() < 1e-7);
    }

    #[test]
    fn field_cov_examples() {
        let c = AsymptoticCovariance::constant(0.375).unwrap();
        assert!((field_cov(pair(0.75, 0.75), 1.0, 1.0, &c) - 1.0).abs() < 1e-15);
        let far = AsymptoticCovariance::Farima;
        let p = pair(0.6, 0.8);
        for (t, s) in [(1.0, 2.0), (0.3, 0.9), (2.5, 1.1)] {
            let base = field_cov(p, t, s, &far);
            let scaled = field_cov(p, 2.0 * t, 2.0 * s, &far);
            assert!((scaled - 2f64.powf(1.4) * base).abs() < 1e-13 * scaled.abs().max(1.0));
        }
    }

    #[test]
    fn field_cov_matches_double_integral() {
        // ∫_0^2 ∫_0^1 𝓡(θ,σ;0.6,0.8) |θ-σ|^{-0.6} dσ dθ with a constant
        // profile stand-in: split at θ = σ and integrate each piece exactly in
        // θ, leaving a 1-D quadrature in σ.
        let far = AsymptoticCovariance::Farima;
        let p = pair(0.6, 0.8);
        let (r12, r21) = (r_farima(p), r_farima(p.swap()));
        let a = 0.4; // α + 1 where α = -0.6
        let q = QuadSettings::default().with_rel_tol(1e-12).with_abs_tol(0.0);
        // θ ∈ [σ, 2]: ∫ (θ-σ)^{-0.6} = (2-σ)^{0.4}/0.4 ; θ ∈ [0, σ]: σ^{0.4}/0.4
        let above = integrate(|s: f64| (2.0 - s).powf(a) / a, 0.0, 1.0, &q).unwrap().value;
        let below = integrate(|s: f64| s.powf(a) / a, 0.0, 1.0, &q).unwrap().value;
        let want = r12 * above + r21 * below;
        let got = field_cov(p, 2.0, 1.0, &far);
        assert!((got - want).abs() < 1e-6, "{got} vs {want}");
    }

    #[test]
    fn mbm_cov_examples() {
        let s = sine();
        assert!((mbm_cov(&s, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(mbm_cov(&s, 0.0, 1.0).unwrap(), 0.0);
        let c = HurstProfile::constant(0.75).unwrap();
        assert!((mbm_cov(&c, 2.0, 1.0).unwrap() - 2f64.powf(1.5) / 2.0).abs() < 1e-14);
        let t = 1.7;
        let ht = s.eval(t).unwrap();
        assert!((mbm_cov(&s, t, t).unwrap() - t.powf(2.0 * ht)).abs() < 1e-13);
        assert_eq!(mbm_cov(&s, 0.4, 1.3).unwrap(), mbm_cov(&s, 1.3, 0.4).unwrap());
    }

    #[test]
    fn tangent_cov_examples() {
        let s = sine();
        let fwn = AsymptoticCovariance::Fwn;
        for t in [0.0, 0.5, 1.0, 3.0] {
            assert!((tangent_cov(t, t, 1.0, 1.0, &s, &fwn).unwrap() - 1.0).abs() < 1e-14);
            assert_eq!(tangent_cov(t, t, 0.0, 1.0, &s, &fwn).unwrap(), 0.0);
        }
        assert_eq!(tangent_cov(1.0, 2.0, 1.0, 1.0, &s, &fwn).unwrap(), 0.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn script_r_symmetry(t in 0.0f64..5.0, s in 0.0f64..5.0, h1 in 0.51f64..0.99, h2 in 0.51f64..0.99) {
                for r in [AsymptoticCovariance::Fwn, AsymptoticCovariance::Farima] {
                    let p = pair(h1, h2);
                    prop_assert_eq!(script_r(t, s, p, &r), script_r(s, t, p.swap(), &r));
                }
            }

            #[test]
            fn field_cov_homogeneity(t in 0.0f64..5.0, s in 0.0f64..5.0, h1 in 0.51f64..0.99, h2 in 0.51f64..0.99) {
                let p = pair(h1, h2);
                for r in [AsymptoticCovariance::Fwn, AsymptoticCovariance::Farima] {
                    let base = field_cov(p, t, s, &r);
                    let scaled = field_cov(p, 2.0 * t, 2.0 * s, &r);
                    prop_assert!((scaled - 2f64.powf(h1 + h2) * base).abs() <= 1e-12 * scaled.abs().max(1.0));
                }
            }
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(10_000))]
            #[test]
            fn script_r_star_envelope(theta in 0.0f64..10.0, sigma in 0.0f64..10.0) {
                prop_assume!(theta != sigma);
                let prof = HurstProfile::sinusoidal(0.75, 0.15).unwrap();
                for r in [AsymptoticCovariance::Fwn, AsymptoticCovariance::Farima] {
                    let c = r.sup_on(prof.a(), prof.b());
                    let w = (theta - sigma).abs();
                    let v = script_r_star(theta, sigma, &prof, &r).unwrap();
                    let bound = c * (w.powf(2.0 * prof.a() - 2.0) + w.powf(2.0 * prof.b() - 2.0));
                    prop_assert!(v.abs() <= bound * (1.0 + 1e-12));
                }
            }
        }
    }
}
