//! Verification engine: invariance-principle error sequences, the Riemann-sum
//! oracle for the limit covariance, local self-similarity (tangent process),
//! Hölder exponent estimation and the covariance of the representation
//! formula.

use rayon::prelude::*;
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::FieldModel;
use crate::hprofile::{HurstProfile, Regularity};
use crate::kernels::{field_cov_raw, script_r_raw, tangent_cov, AsymptoticCovariance, LimitKernel};
use crate::fields::{fwn_cov, fwn_spectral_oracle};
use crate::kernels::{r_farima, r_fwn, r_fwn_unhalved};
use crate::report::{fmt17, relative_error, Criterion, ErrorSeries, Report, Scenario, REL_ERR_FLOOR};
use crate::specialfn::{c_norm, d_coef, HurstPair};
use crate::simulate::{
    floor_scaled, partial_sum_cov_exact, renormalize_cov, CovMatrix, DiscreteCov, IncrementField,
    PartialSumSpec, Samples, MAX_INDEX, NORMAL_METHOD, RNG_NAME,
};

/// Below this, successive errors are treated as equal noise in decay checks.
pub const DECAY_FLOOR: f64 = 1e-12;

/// How the diagonal band `|j - k| <= M` enters the Riemann oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BandTreatment {
    /// Drop the band, as the plain Riemann sum does.
    Exclude,
    /// Replace each band cell by the exact integral of `|θ-σ|^α` over the cell
    /// pair, with the smooth factor frozen at the grid point.
    CellIntegral,
}

/// `(1/N^2) Σ_j Σ_k 𝓡(j/N, k/N) |(j-k)/N|^{h_j + h_k - 2}` over
/// `1 <= j <= ⌊Nt_a⌋`, `1 <= k <= ⌊Nt_b⌋`, for every pair of `times`.
///
/// Pairs inside the band `|j-k| <= band` are handled per `treatment`.
pub fn riemann_oracle_grid(
    kernel: &LimitKernel,
    times: &[f64],
    n: u64,
    band: u64,
    treatment: BandTreatment,
) -> Result<CovMatrix> {
    if n == 0 || band == 0 {
        return Err(Error::Domain("riemann oracle needs N >= 1 and M >= 1".into()));
    }
    if times.is_empty()
        || times.iter().any(|t| !(*t >= 0.0 && t.is_finite()))
        || times.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::Domain("oracle times must be nonnegative and strictly increasing".into()));
    }
    let counts: Vec<u64> = times.iter().map(|&t| floor_scaled(n, t)).collect();
    let total = *counts.last().unwrap();
    if total > MAX_INDEX {
        return Err(Error::SizeLimit(format!("floor(N t) = {total} exceeds {MAX_INDEX}")));
    }
    let nb = times.len();
    let total = total as usize;
    let nf = n as f64;
    let mut bin = Vec::with_capacity(total);
    let mut b = 0;
    for j in 1..=total as u64 {
        while counts[b] < j {
            b += 1;
        }
        bin.push(b);
    }
    let h: Vec<f64> = (1..=total).map(|j| kernel.profile.value(j as f64 / nf)).collect();
    let ln_n = nf.ln();
    let term = |lag: usize, later: usize, earlier: usize| -> f64 {
        let (hl, he) = (h[later], h[earlier]);
        let alpha = hl + he - 2.0;
        let g = script_r_raw(1.0, 0.0, hl, he, &kernel.asympt);
        let weight = if lag as u64 > band {
            (lag as f64).powf(alpha)
        } else {
            match treatment {
                BandTreatment::Exclude => return 0.0,
                BandTreatment::CellIntegral => cell_weight(lag as f64, alpha),
            }
        };
        g * weight * (-(2.0 + alpha) * ln_n).exp()
    };
    let blocks: Vec<(usize, usize)> = (0..total).step_by(128).map(|s| (s, (s + 128).min(total))).collect();
    let partials: Vec<Vec<f64>> = blocks
        .par_iter()
        .map(|&(lo, hi)| {
            let mut acc = vec![0.0; nb * nb];
            let mut row = vec![0.0; nb];
            for j in lo..hi {
                row.iter_mut().for_each(|x| *x = 0.0);
                for k in 0..j {
                    row[bin[k]] += term(j - k, j, k);
                }
                let bj = bin[j];
                acc[bj * nb + bj] += term(0, j, j);
                for (bk, &r) in row.iter().enumerate() {
                    acc[bj * nb + bk] += r;
                    acc[bk * nb + bj] += r;
                }
            }
            acc
        })
        .collect();
    let mut bins = vec![0.0; nb * nb];
    for part in &partials {
        for (d, s) in bins.iter_mut().zip(part) {
            *d += s;
        }
    }
    let mut prefix = vec![0.0; nb * nb];
    for i in 0..nb {
        for j in 0..nb {
            let mut v = bins[i * nb + j];
            if i > 0 {
                v += prefix[(i - 1) * nb + j];
            }
            if j > 0 {
                v += prefix[i * nb + j - 1];
            }
            if i > 0 && j > 0 {
                v -= prefix[(i - 1) * nb + j - 1];
            }
            prefix[i * nb + j] = v;
        }
    }
    Ok(CovMatrix::from_fn(nb, |i, j| prefix[i * nb + j]))
}

/// `∫∫ |x - y|^α` over unit cells whose indices differ by `lag`:
/// `F(lag+1) + F(lag-1) - 2F(lag)` with `F(x) = |x|^{α+2} / ((α+1)(α+2))`.
fn cell_weight(lag: f64, alpha: f64) -> f64 {
    let e = alpha + 2.0;
    let f = |x: f64| x.abs().powf(e);
    (f(lag + 1.0) + f(lag - 1.0) - 2.0 * f(lag)) / ((alpha + 1.0) * e)
}

/// The Riemann oracle for a single `(t, s)`.
pub fn riemann_oracle(
    kernel: &LimitKernel,
    t: f64,
    s: f64,
    n: u64,
    band: u64,
    treatment: BandTreatment,
) -> Result<f64> {
    if t == s {
        return Ok(riemann_oracle_grid(kernel, &[t], n, band, treatment)?.get(0, 0));
    }
    let (lo, hi) = if t < s { (t, s) } else { (s, t) };
    Ok(riemann_oracle_grid(kernel, &[lo, hi], n, band, treatment)?.get(1, 0))
}

/// Limit covariance matrix `[I(t_i, t_j)]`, entries computed in parallel.
pub fn limit_cov_matrix(kernel: &LimitKernel, times: &[f64]) -> Result<CovMatrix> {
    CovMatrix::try_from_fn_par(times.len(), |i, j| kernel.limit_cov(times[i], times[j]))
}

fn max_errors(got: &CovMatrix, want: &CovMatrix) -> (f64, f64) {
    let mut abs: f64 = 0.0;
    let mut rel: f64 = 0.0;
    for i in 0..want.dim() {
        for j in 0..=i {
            abs = abs.max((got.get(i, j) - want.get(i, j)).abs());
            rel = rel.max(relative_error(got.get(i, j), want.get(i, j)));
        }
    }
    (abs, rel)
}

/// Convergence of exact partial-sum covariances to the limit
/// covariance over the time grid, for each `N`.
pub fn invariance_report(
    scenario: Scenario,
    model: &FieldModel,
    kernel: &LimitKernel,
    n_ladder: &[u64],
    times: &[f64],
    tolerance: f64,
) -> Result<Report> {
    if n_ladder.is_empty() || n_ladder.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("N ladder must be nonempty and increasing".into()));
    }
    let limit = limit_cov_matrix(kernel, times)?;
    let mut series = ErrorSeries::new("invariance", "N");
    for &n in n_ladder {
        let spec = PartialSumSpec::new(*model, kernel.profile.clone(), n, times.to_vec())?;
        let exact = partial_sum_cov_exact(&spec)?;
        let (abs, rel) = max_errors(&exact, &limit);
        series.push(n as f64, abs, rel);
    }
    let rel = series.rel_errors();
    let mut report = Report::new("verify-invariance", scenario);
    report.param("n_ladder", n_ladder);
    report.param("time_grid", times);
    report.param("quadrature", kernel.quad);
    let floor = decay_floor(kernel);
    report.criteria.push(
        Criterion::decreasing("invariance.decreasing", &rel, floor, 0)
            .with_note(format!("steps with both errors <= {floor:e} count as converged")),
    );
    report.criteria.push(
        Criterion::below("invariance.final_rel_err", *rel.last().unwrap(), tolerance)
            .with_note("tolerance is an empirical calibration"),
    );
    if let Some(s) = series.log2_slope() {
        report.slopes.insert("invariance.log2_abs_err_vs_log2_N".into(), s);
    }
    report.series.push(series);
    Ok(report)
}

/// Noise floor for decay checks: quadrature accuracy when the limit needs
/// quadrature, roundoff otherwise.
fn decay_floor(kernel: &LimitKernel) -> f64 {
    if kernel.profile.is_constant() {
        DECAY_FLOOR
    } else {
        10.0 * kernel.quad.rel_tol
    }
}

/// Quadrature against the Riemann oracle on a grid.
pub fn oracle_report(
    scenario: Scenario,
    kernel: &LimitKernel,
    times: &[f64],
    n: u64,
    band: u64,
    tolerance: f64,
) -> Result<Report> {
    let quad = limit_cov_matrix(kernel, times)?;
    let mut report = Report::new("oracle-compare", scenario);
    report.param("n", n);
    report.param("band", band);
    report.param("time_grid", times);
    for (name, treatment) in [
        ("oracle.cell-integral", BandTreatment::CellIntegral),
        ("oracle.exclude", BandTreatment::Exclude),
    ] {
        let oracle = riemann_oracle_grid(kernel, times, n, band, treatment)?;
        let (abs, rel) = max_errors(&oracle, &quad);
        let mut s = ErrorSeries::new(name, "N");
        s.push(n as f64, abs, rel);
        report.series.push(s);
        if treatment == BandTreatment::CellIntegral {
            report.criteria.push(Criterion::at_most("oracle.max_rel_err", rel, tolerance));
        }
    }
    Ok(report)
}

/// Parameters of a tangent-process check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct TangentParams {
    pub base: f64,
    pub other_base: f64,
    pub u: f64,
    pub v: f64,
}

impl Default for TangentParams {
    fn default() -> Self {
        Self {
            base: 1.0,
            other_base: 2.0,
            u: 1.0,
            v: 1.0,
        }
    }
}

/// Local self-similarity: `E[(S̃(t+εu)-S̃(t))(S̃(s+εv)-S̃(s))] / ε^{h(t)+h(s)}`
/// against the tangent covariance, along `eps`.
pub fn tangent_report(
    scenario: Scenario,
    kernel: &LimitKernel,
    params: TangentParams,
    eps: &[f64],
    distinct_tolerance: f64,
    allowed_inversions: usize,
) -> Result<Report> {
    if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0)) || eps.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Domain("epsilon ladder must be positive and decreasing".into()));
    }
    let TangentParams { base: t, other_base: s, u, v } = params;
    let prof = &kernel.profile;
    let (ht, hs) = (prof.eval(t)?, prof.eval(s)?);
    let target = tangent_cov(t, t, u, v, prof, &kernel.asympt)?;
    let rows: Vec<(f64, f64)> = eps
        .par_iter()
        .map(|&e| -> Result<(f64, f64)> {
            let same = kernel.increment_cov((t, t + e * u), (t, t + e * v))? / e.powf(2.0 * ht);
            let cross = kernel.increment_cov((t, t + e * u), (s, s + e * v))? / e.powf(ht + hs);
            Ok((same, cross))
        })
        .collect::<Result<_>>()?;
    let mut same = ErrorSeries::new("tangent.same-base", "eps");
    let mut cross = ErrorSeries::new("tangent.distinct-base", "eps");
    for (&e, &(a, c)) in eps.iter().zip(&rows) {
        same.push(e, (a - target).abs(), relative_error(a, target));
        cross.push(e, c.abs(), c.abs() / target.abs().max(f64::MIN_POSITIVE));
    }
    let mut report = Report::new("tangent-check", scenario);
    report.param("tangent", params);
    report.param("eps_ladder", eps);
    report.param("tangent_cov", target);
    let floor = decay_floor(kernel);
    report.criteria.push(Criterion::decreasing(
        "tangent.same_base_decreasing",
        &same.abs_errors(),
        floor,
        allowed_inversions,
    ));
    report.criteria.push(Criterion::decreasing(
        "tangent.distinct_base_decreasing",
        &cross.abs_errors(),
        0.0,
        allowed_inversions,
    ));
    report.criteria.push(Criterion::below(
        "tangent.distinct_base_final",
        *cross.abs_errors().last().unwrap(),
        distinct_tolerance,
    ));
    if prof.is_constant() {
        let worst = same.rel_errors().into_iter().fold(0.0, f64::max);
        report
            .criteria
            .push(Criterion::at_most("tangent.constant_h_exact", worst, 1e-12));
    }
    if let Some(sl) = same.log2_slope() {
        report.slopes.insert("tangent.same_base".into(), sl);
    }
    if let Some(sl) = cross.log2_slope() {
        report.slopes.insert("tangent.distinct_base".into(), sl);
    }
    report.series.push(same);
    report.series.push(cross);
    Ok(report)
}

/// Settings of the Hölder estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HolderParams {
    /// Width of the sampling window centred on `t0`.
    pub window: f64,
    /// Number of grid points in the window (increments = points - 1).
    pub points: usize,
    /// Lags in grid steps.
    pub lags: Vec<usize>,
    pub replicates: usize,
    pub seed: u64,
}

impl Default for HolderParams {
    fn default() -> Self {
        Self {
            window: 0.1,
            points: 65,
            lags: vec![1, 2, 4, 8, 16],
            replicates: 1000,
            seed: 20_240_917,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderEstimate {
    pub t0: f64,
    pub estimate: f64,
    /// Log-log slope, twice the estimate.
    pub slope: f64,
    pub lags: Vec<f64>,
    pub second_moments: Vec<f64>,
    /// Diagonal jitter used to factor the increment covariance.
    pub jitter: f64,
}

/// Covariance matrix of the increments `S̃(τ_{i+1}) - S̃(τ_i)` over a grid of
/// `points` equally spaced times in `[t0 - window/2, t0 + window/2]`
/// (shifted right if needed to keep it in `[0, ∞)`).
pub fn increment_cov_matrix(
    kernel: &LimitKernel,
    t0: f64,
    window: f64,
    points: usize,
) -> Result<(CovMatrix, f64)> {
    if points < 3 || !(window > 0.0) {
        return Err(Error::Domain("need at least 3 points and a positive window".into()));
    }
    let start = (t0 - 0.5 * window).max(0.0);
    let dt = window / (points - 1) as f64;
    let cells = points - 1;
    let edge = |i: usize| start + i as f64 * dt;
    let m = CovMatrix::try_from_fn_par(cells, |i, j| {
        kernel.increment_cov((edge(i), edge(i + 1)), (edge(j), edge(j + 1)))
    })?;
    Ok((m, dt))
}

/// Estimate the pointwise Hölder exponent at `t0`: sample the limit process on
/// a local grid, regress the log mean squared increment on log lag, and halve
/// the slope.
pub fn holder_estimate(kernel: &LimitKernel, t0: f64, params: &HolderParams) -> Result<HolderEstimate> {
    if params.replicates < 1 {
        return Err(Error::Domain("replicates must be at least 1".into()));
    }
    let (cov, dt) = increment_cov_matrix(kernel, t0, params.window, params.points)?;
    let factored = cov.factorize()?;
    let jitter = factored.factor().map_or(0.0, |f| f.jitter);
    let samples = factored.sample_paths(params.replicates, params.seed)?;
    let cells = samples.dim;
    let mut lags = Vec::new();
    let mut moments = Vec::new();
    for &lag in &params.lags {
        if lag == 0 || lag > cells {
            continue;
        }
        let mut acc = 0.0;
        let mut count = 0usize;
        for r in 0..samples.replicates {
            let inc = samples.row(r);
            // running window sum of `lag` consecutive increments
            let mut w: f64 = inc[..lag].iter().sum();
            acc += w * w;
            count += 1;
            for i in lag..cells {
                w += inc[i] - inc[i - lag];
                acc += w * w;
                count += 1;
            }
        }
        let m = acc / count as f64;
        if m > 0.0 && m.is_finite() {
            lags.push(lag as f64 * dt);
            moments.push(m);
        }
    }
    if lags.len() < 4 {
        return Err(Error::IllConditioned(format!(
            "only {} usable lags, need at least 4",
            lags.len()
        )));
    }
    let pts: Vec<(f64, f64)> = lags.iter().zip(&moments).map(|(l, m)| (l.ln(), m.ln())).collect();
    let (slope, _) = crate::report::least_squares_slope(&pts)
        .ok_or_else(|| Error::IllConditioned("degenerate lag set".into()))?;
    Ok(HolderEstimate {
        t0,
        estimate: 0.5 * slope,
        slope,
        lags,
        second_moments: moments,
        jitter,
    })
}

pub fn holder_report(
    scenario: Scenario,
    kernel: &LimitKernel,
    t0s: &[f64],
    params: &HolderParams,
    tolerance: f64,
) -> Result<Report> {
    let mut report = Report::new("holder", scenario);
    report.param("t0", t0s);
    report.param("holder", params);
    report.audit.rng = Some(RNG_NAME.into());
    report.audit.normal_method = Some(NORMAL_METHOD.into());
    report.audit.seed = Some(params.seed);
    report.audit.replicates = Some(params.replicates as u64);
    let mut estimates = Vec::new();
    for &t0 in t0s {
        let est = holder_estimate(kernel, t0, params)?;
        let target = kernel.profile.eval(t0)?;
        report.criteria.push(
            Criterion::at_most(&format!("holder.t0={t0}"), (est.estimate - target).abs(), tolerance)
                .with_note(format!("estimate {:.6}, h(t0) {:.6}", est.estimate, target)),
        );
        report.slopes.insert(format!("holder.t0={t0}"), est.slope);
        estimates.push(est);
    }
    report.param("estimates", &estimates);
    Ok(report)
}

/// Covariance of `W̃(t, h(t)) - ∫_0^t h'(θ) ∂_H W̃(θ, H)|_{H=h(θ)} dθ` at
/// `(t, s)`, computed from the field covariance: `H`-derivatives by central
/// differences of width `dh`, `θ`-integrals by midpoint sums of step about
/// `step`.
pub fn representation_cov(kernel: &LimitKernel, t: f64, s: f64, dh: f64, step: f64) -> Result<f64> {
    let prof = &kernel.profile;
    if prof.regularity() != Regularity::C2 {
        return Err(Error::UnsupportedProfile(
            "the representation formula needs a twice continuously differentiable profile".into(),
        ));
    }
    if !kernel.asympt.is_smooth() {
        return Err(Error::UnsupportedProfile(
            "the representation formula needs a smooth asymptotic covariance".into(),
        ));
    }
    if !(t >= 0.0 && s >= 0.0) || !(dh > 0.0) || !(step > 0.0) {
        return Err(Error::Domain("need t, s >= 0 and positive dh, step".into()));
    }
    if prof.a() - dh <= 0.5 || prof.b() + dh >= 1.0 {
        return Err(Error::Domain(format!(
            "H +/- dh leaves (1/2, 1) for profile range [{}, {}]",
            prof.a(),
            prof.b()
        )));
    }
    let r = &kernel.asympt;
    let f = |h1: f64, h2: f64, x: f64, y: f64| field_cov_raw(h1, h2, x, y, r);
    let d1 = |h1: f64, h2: f64, x: f64, y: f64| (f(h1 + dh, h2, x, y) - f(h1 - dh, h2, x, y)) / (2.0 * dh);
    let d2 = |h1: f64, h2: f64, x: f64, y: f64| (f(h1, h2 + dh, x, y) - f(h1, h2 - dh, x, y)) / (2.0 * dh);
    let d12 = |h1: f64, h2: f64, x: f64, y: f64| {
        (f(h1 + dh, h2 + dh, x, y) - f(h1 + dh, h2 - dh, x, y) - f(h1 - dh, h2 + dh, x, y)
            + f(h1 - dh, h2 - dh, x, y))
            / (4.0 * dh * dh)
    };
    let nodes = |end: f64| -> Result<Vec<(f64, f64, f64)>> {
        let n = ((end / step).round() as usize).max(1);
        let w = end / n as f64;
        (0..n)
            .map(|i| {
                let x = (i as f64 + 0.5) * w;
                Ok((x, prof.eval(x)?, prof.derivative(x)? * w))
            })
            .collect()
    };
    let (ht, hs) = (prof.eval(t)?, prof.eval(s)?);
    let main = f(ht, hs, t, s);
    if prof.is_constant() {
        return Ok(main);
    }
    let tn = nodes(t)?;
    let sn = nodes(s)?;
    let cross_s: f64 = sn.iter().map(|&(y, hy, wy)| wy * d2(ht, hy, t, y)).sum();
    let cross_t: f64 = tn.iter().map(|&(x, hx, wx)| wx * d1(hx, hs, x, s)).sum();
    let rows: Vec<f64> = tn
        .par_iter()
        .map(|&(x, hx, wx)| wx * sn.iter().map(|&(y, hy, wy)| wy * d12(hx, hy, x, y)).sum::<f64>())
        .collect();
    let double: f64 = rows.iter().sum();
    Ok(main - cross_s - cross_t + double)
}

/// Representation check at `(t, s)`: discrepancy against the limit covariance
/// at `(dh, step)` and at `(dh/2, step/2)`.
pub fn representation_report(
    scenario: Scenario,
    kernel: &LimitKernel,
    t: f64,
    s: f64,
    dh: f64,
    step: f64,
    tolerance: f64,
) -> Result<Report> {
    let limit = kernel.limit_cov(t, s)?;
    let mut series = ErrorSeries::new("representation", "step");
    for k in 0..2 {
        let scale = 0.5f64.powi(k);
        let rep = representation_cov(kernel, t, s, dh * scale, step * scale)?;
        series.push(step * scale, (rep - limit).abs(), relative_error(rep, limit));
    }
    let rel = series.rel_errors();
    let mut report = Report::new("representation-check", scenario);
    report.param("t", t);
    report.param("s", s);
    report.param("dh", dh);
    report.param("step", step);
    report.param("limit_cov", limit);
    report
        .criteria
        .push(Criterion::at_most("representation.rel_err", rel[0], tolerance));
    let floor = 10.0 * kernel.quad.rel_tol;
    report.criteria.push(
        Criterion::decreasing("representation.refinement_decreasing", &rel, floor, 0)
            .with_note("dh and step halved together"),
    );
    report.series.push(series);
    Ok(report)
}

/// Increment variance next to two upper bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncrementBound {
    /// `E[(S̃(t)-S̃(s))^2]` by quadrature.
    pub variance: f64,
    /// `sup R |t-s|^{2m}` with `m = min h` on `[s, t]`, as usually quoted.
    pub loose: f64,
    /// `sup R ∫∫_{[s,t]^2} |θ-σ|^{2m-2} = sup R |t-s|^{2m} / (m(2m-1))`.
    /// Holds for `|t-s| <= 1`. The loose form drops the factor
    /// `1/(m(2m-1)) > 1`, so it can fail when `h` stays close to its
    /// minimum on the interval.
    pub sharp: f64,
}

/// Increment variance bound for `0 <= s`, `|t - s| <= 1`.
pub fn increment_variance_bound(kernel: &LimitKernel, s: f64, t: f64) -> Result<IncrementBound> {
    let (lo, hi) = if s <= t { (s, t) } else { (t, s) };
    if hi - lo > 1.0 || lo < 0.0 {
        return Err(Error::Domain("bound applies for 0 <= s, |t - s| <= 1".into()));
    }
    let variance = kernel.increment_cov((lo, hi), (lo, hi))?;
    let prof = &kernel.profile;
    let sup = kernel.asympt.sup_on(prof.a(), prof.b());
    let m = prof.min_on(lo, hi);
    let loose = sup * (hi - lo).powf(2.0 * m);
    Ok(IncrementBound {
        variance,
        loose,
        sharp: loose / (m * (2.0 * m - 1.0)),
    })
}

/// Index pairs checked by the renormalization reports: diagonal and lag one
/// in both directions.
pub const RENORM_INDEX_PAIRS: [(u64, u64); 3] = [(0, 0), (1, 0), (0, 1)];

/// Fixed point of the renormalization semigroup: `cov(T_N Z)` against
/// `cov(Z)` for `Z` the increments of the limit field, and `cov(T_N X)` for the
/// discrete field `X` of `model`, over the given Hurst pairs.
pub fn renorm_report(
    scenario: Scenario,
    model: &FieldModel,
    asympt: &AsymptoticCovariance,
    fixed_ladder: &[u64],
    field_ladder: &[u64],
    hurst_pairs: &[(f64, f64)],
    fixed_tolerance: f64,
) -> Result<Report> {
    for &(h1, h2) in hurst_pairs {
        model.check(h1)?;
        model.check(h2)?;
    }
    let z = IncrementField { asympt: asympt.clone() };
    let errors = |source: &dyn DiscreteCov, n: u64| -> Result<(f64, f64)> {
        let mut abs: f64 = 0.0;
        let mut rel: f64 = 0.0;
        for &idx in &RENORM_INDEX_PAIRS {
            for &h in hurst_pairs {
                let got = renormalize_cov(source, n, idx, h)?;
                let want = z.cov(idx.0, idx.1, h.0, h.1);
                abs = abs.max((got - want).abs());
                rel = rel.max(relative_error(got, want));
            }
        }
        Ok((abs, rel))
    };
    let mut fixed = ErrorSeries::new("renorm.fixed-point", "N");
    for &n in fixed_ladder {
        let (a, r) = errors(&z, n)?;
        fixed.push(n as f64, a, r);
    }
    let mut field = ErrorSeries::new(&format!("renorm.{}", model.kind().name()), "N");
    for &n in field_ladder {
        let (a, r) = errors(model, n)?;
        field.push(n as f64, a, r);
    }
    let mut report = Report::new("renorm-check", scenario);
    report.param("fixed_ladder", fixed_ladder);
    report.param("field_ladder", field_ladder);
    report.param("hurst_pairs", hurst_pairs);
    report.param("index_pairs", RENORM_INDEX_PAIRS);
    let worst = fixed.abs_errors().into_iter().fold(0.0, f64::max);
    report
        .criteria
        .push(Criterion::at_most("renorm.fixed_point", worst, fixed_tolerance));
    report.criteria.push(
        Criterion::decreasing("renorm.field_decreasing", &field.abs_errors(), DECAY_FLOOR, 0)
            .with_note(format!("steps with both errors <= {DECAY_FLOOR:e} count as converged")),
    );
    report.series.push(fixed);
    report.series.push(field);
    Ok(report)
}

/// Lag used to read off the long-range constant `n^{2-H1-H2} E[X_{j+n} X_j]`.
const LONG_LAG: u64 = 1 << 20;

/// Closed-form constants at each `(H1, H2)`, the spectral check of the FWN
/// covariance up to `max_lag`, and the diagonal constant induced by the FWN
/// covariance against `H(2H-1)`.
pub fn kernels_report(
    scenario: Scenario,
    asympt: &AsymptoticCovariance,
    pairs: &[(f64, f64)],
    max_lag: u64,
    spectral_tolerance: f64,
    diagonal_tolerance: f64,
) -> Result<Report> {
    #[derive(Serialize)]
    struct Row {
        h1: f64,
        h2: f64,
        d_coef: f64,
        r_fwn: f64,
        r_fwn_unhalved: f64,
        r_farima: f64,
        r_selected: f64,
        c_norm_h1: f64,
        c_norm_h2: f64,
        spectral_max_rel_err: f64,
    }
    let rows: Vec<Row> = pairs
        .par_iter()
        .map(|&(h1, h2)| -> Result<Row> {
            let p = HurstPair::new(h1, h2)?;
            let mut worst: f64 = 0.0;
            for n in 0..=max_lag {
                let got = fwn_cov(n, 0, p);
                let want = fwn_spectral_oracle(n, 0, p)?;
                worst = worst.max(((got - want) / want.abs().max(REL_ERR_FLOOR)).abs());
            }
            Ok(Row {
                h1,
                h2,
                d_coef: d_coef(p),
                r_fwn: r_fwn(p),
                r_fwn_unhalved: r_fwn_unhalved(p),
                r_farima: r_farima(p),
                r_selected: asympt.at(p),
                c_norm_h1: c_norm(h1)?,
                c_norm_h2: c_norm(h2)?,
                spectral_max_rel_err: worst,
            })
        })
        .collect::<Result<_>>()?;
    let spectral = rows.iter().map(|r| r.spectral_max_rel_err).fold(0.0, f64::max);
    let mut diagonal: f64 = 0.0;
    let mut diag_hs = Vec::new();
    for &(h1, h2) in pairs {
        for h in [h1, h2] {
            if diag_hs.contains(&h) {
                continue;
            }
            diag_hs.push(h);
            let p = HurstPair::new(h, h)?;
            let induced = fwn_cov(LONG_LAG, 0, p) * (LONG_LAG as f64).powf(2.0 - 2.0 * h);
            diagonal = diagonal.max((induced - h * (2.0 * h - 1.0)).abs());
        }
    }
    let mut report = Report::new("kernels", scenario);
    report.param("pairs", pairs);
    report.param("max_lag", max_lag);
    report.param("long_lag", LONG_LAG);
    report.param("constants", &rows);
    report.criteria.push(
        Criterion::at_most("kernels.fwn_spectral", spectral, spectral_tolerance)
            .with_note("fwn_cov against the spectral integral, lags 0..=max_lag"),
    );
    report.criteria.push(
        Criterion::at_most("kernels.fwn_diagonal_constant", diagonal, diagonal_tolerance)
            .with_note(format!("n^(2-2H) E[X_n X_0] at n = {LONG_LAG} against H(2H-1)")),
    );
    Ok(report)
}

/// Sampled paths together with the report describing them.
#[derive(Debug, Clone)]
pub struct SampleRun {
    pub times: Vec<f64>,
    pub samples: Samples,
    pub report: Report,
}

impl SampleRun {
    /// One row per replicate, one column per time.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["replicate".to_string()];
        header.extend(self.times.iter().map(|t| fmt17(*t)));
        w.write_record(&header).map_err(csv_err)?;
        for r in 0..self.samples.replicates {
            let mut rec = vec![r.to_string()];
            rec.extend(self.samples.row(r).iter().map(|x| fmt17(*x)));
            w.write_record(&rec).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

/// Where sampled paths come from.
#[derive(Debug, Clone, Copy)]
pub enum PathSource<'a> {
    Limit(&'a LimitKernel),
    PartialSum { model: &'a FieldModel, profile: &'a HurstProfile, n: u64 },
}

/// Sample Gaussian paths at `times` by factoring the exact covariance.
pub fn sample_run(
    scenario: Scenario,
    source: PathSource<'_>,
    times: &[f64],
    replicates: usize,
    seed: u64,
    factorization_tolerance: f64,
) -> Result<SampleRun> {
    let cov = match source {
        PathSource::Limit(k) => limit_cov_matrix(k, times)?,
        PathSource::PartialSum { model, profile, n } => {
            partial_sum_cov_exact(&PartialSumSpec::new(*model, profile.clone(), n, times.to_vec())?)?
        }
    };
    let min_eig = cov.min_eigenvalue();
    let cov = cov.factorize()?;
    let f = cov.factor().expect("factorized");
    let rec = cov.reconstruction_error().unwrap_or(0.0);
    let samples = cov.sample_paths(replicates, seed)?;
    let mut report = Report::new("sample", scenario);
    report.param("times", times);
    report.param(
        "source",
        match source {
            PathSource::Limit(_) => "limit".to_string(),
            PathSource::PartialSum { n, .. } => format!("partial-sum N={n}"),
        },
    );
    report.param("min_eigenvalue", min_eig);
    report.param("jitter_attempts", &f.attempts);
    report.param("jitter", f.jitter);
    report.audit.rng = Some(RNG_NAME.into());
    report.audit.normal_method = Some(NORMAL_METHOD.into());
    report.audit.seed = Some(seed);
    report.audit.replicates = Some(replicates as u64);
    report.criteria.push(
        Criterion::at_most("sample.factorization_roundtrip", rec, factorization_tolerance)
            .with_note("max |L L^T - Sigma| against the unjittered matrix"),
    );
    Ok(SampleRun {
        times: times.to_vec(),
        samples,
        report,
    })
}

/// Guard against nonsensical profile/time combinations in reports.
pub fn check_profile_times(profile: &HurstProfile, times: &[f64]) -> Result<()> {
    for &t in times {
        profile.eval(t)?;
    }
    Ok(())
}
