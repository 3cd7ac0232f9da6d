//! Covariance matrices and Gaussian sampling: exact partial-sum covariances,
//! grid covariances of the two-parameter fields, Cholesky factorization with a
//! logged jitter policy, reproducible path sampling and the renormalization
//! operator `T_N` acting on covariances.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::FieldModel;
use crate::hprofile::HurstProfile;
use crate::kernels::{field_cov_raw, AsymptoticCovariance};

/// Upper bound on `⌊N t⌋` accepted by the O(N^2) double sums.
pub const MAX_INDEX: u64 = 100_000;

/// Description of the random number generator, recorded in reports.
pub const RNG_NAME: &str = "ChaCha20 (rand_chacha), seed expanded by SeedableRng::seed_from_u64, stream = replicate index";
/// Description of the Gaussian transform, recorded in reports.
pub const NORMAL_METHOD: &str = "rand_distr::StandardNormal (ziggurat)";

const JITTER_START: f64 = 1e-12;
const JITTER_GROWTH: f64 = 10.0;
const JITTER_ATTEMPTS: usize = 3;

/// One attempted diagonal jitter during factorization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JitterAttempt {
    pub jitter: f64,
    pub success: bool,
}

#[derive(Debug, Clone)]
pub struct Factorization {
    lower: DMatrix<f64>,
    /// Unjittered attempt first, then each jittered retry.
    pub attempts: Vec<JitterAttempt>,
    /// Diagonal shift actually applied (0 when none was needed).
    pub jitter: f64,
}

impl Factorization {
    pub fn lower(&self) -> &DMatrix<f64> {
        &self.lower
    }
}

/// Symmetric matrix stored as its packed lower triangle, optionally carrying a
/// Cholesky factor.
#[derive(Debug, Clone)]
pub struct CovMatrix {
    dim: usize,
    packed: Vec<f64>,
    factor: Option<Factorization>,
}

#[inline]
fn packed_index(i: usize, j: usize) -> usize {
    let (r, c) = if i >= j { (i, j) } else { (j, i) };
    r * (r + 1) / 2 + c
}

impl CovMatrix {
    /// Build from `f(i, j)` evaluated on the lower triangle `i >= j`.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut packed = Vec::with_capacity(dim * (dim + 1) / 2);
        for i in 0..dim {
            for j in 0..=i {
                packed.push(f(i, j));
            }
        }
        Self {
            dim,
            packed,
            factor: None,
        }
    }

    /// Parallel, fallible construction. Entries are computed independently so
    /// the result does not depend on scheduling.
    pub fn try_from_fn_par<F>(dim: usize, f: F) -> Result<Self>
    where
        F: Fn(usize, usize) -> Result<f64> + Sync,
    {
        let pairs: Vec<(usize, usize)> = (0..dim).flat_map(|i| (0..=i).map(move |j| (i, j))).collect();
        let packed = pairs
            .par_iter()
            .map(|&(i, j)| f(i, j))
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self {
            dim,
            packed,
            factor: None,
        })
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Domain("covariance matrix must be square".into()));
        }
        Ok(Self::from_fn(m.nrows(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)])))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.packed[packed_index(i, j)]
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j))
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.packed.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn factor(&self) -> Option<&Factorization> {
        self.factor.as_ref()
    }

    /// Smallest eigenvalue of the symmetric matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        if self.dim == 0 {
            return 0.0;
        }
        self.to_dense()
            .symmetric_eigenvalues()
            .iter()
            .fold(f64::INFINITY, |m, &x| m.min(x))
    }

    /// `min eigenvalue >= -rel_tol * trace`.
    pub fn is_psd_within(&self, rel_tol: f64) -> bool {
        self.min_eigenvalue() >= -rel_tol * self.trace().abs()
    }

    /// Cholesky factorization. A matrix that is only positive semidefinite in
    /// floating point gets up to three diagonal jitters, starting at
    /// `1e-12 * trace / dim` and growing tenfold; every attempt is recorded.
    pub fn factorize(mut self) -> Result<Self> {
        if self.packed.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("covariance matrix has non-finite entries".into()));
        }
        let n = self.dim;
        if self.max_abs() == 0.0 {
            self.factor = Some(Factorization {
                lower: DMatrix::zeros(n, n),
                attempts: Vec::new(),
                jitter: 0.0,
            });
            return Ok(self);
        }
        let dense = self.to_dense();
        let base = JITTER_START * self.trace().abs() / n as f64;
        let mut attempts = Vec::new();
        for attempt in 0..=JITTER_ATTEMPTS {
            let jitter = if attempt == 0 {
                0.0
            } else {
                base * JITTER_GROWTH.powi(attempt as i32 - 1)
            };
            let mut m = dense.clone();
            for i in 0..n {
                m[(i, i)] += jitter;
            }
            let chol = nalgebra::Cholesky::new(m);
            attempts.push(JitterAttempt {
                jitter,
                success: chol.is_some(),
            });
            if let Some(c) = chol {
                self.factor = Some(Factorization {
                    lower: c.unpack(),
                    attempts,
                    jitter,
                });
                return Ok(self);
            }
        }
        Err(Error::NotPsd {
            attempts: JITTER_ATTEMPTS,
            last_jitter: base * JITTER_GROWTH.powi(JITTER_ATTEMPTS as i32 - 1),
        })
    }

    /// `max |L L^T - Σ|` against the unjittered matrix.
    pub fn reconstruction_error(&self) -> Option<f64> {
        let f = self.factor.as_ref()?;
        let rec = &f.lower * f.lower.transpose();
        let mut err: f64 = 0.0;
        for i in 0..self.dim {
            for j in 0..=i {
                err = err.max((rec[(i, j)] - self.get(i, j)).abs());
            }
        }
        Some(err)
    }

    /// Draw `replicates` independent centered Gaussian vectors with this
    /// covariance. Replicate `r` uses its own ChaCha20 stream keyed by
    /// `(seed, r)`, so output is bit-identical for any thread count.
    pub fn sample_paths(&self, replicates: usize, seed: u64) -> Result<Samples> {
        let f = self.factor.as_ref().ok_or_else(|| {
            Error::Domain("sample_paths needs a factorized matrix".into())
        })?;
        if replicates == 0 {
            return Err(Error::Domain("replicates must be at least 1".into()));
        }
        let n = self.dim;
        let l = &f.lower;
        let rows: Vec<Vec<f64>> = (0..replicates)
            .into_par_iter()
            .map(|r| {
                let mut rng = replicate_rng(seed, r as u64);
                let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                (0..n)
                    .map(|i| (0..=i).map(|j| l[(i, j)] * z[j]).sum())
                    .collect()
            })
            .collect();
        Ok(Samples {
            replicates,
            dim: n,
            data: rows.into_iter().flatten().collect(),
        })
    }
}

/// Generator for replicate `r` under `seed`.
pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

/// Row-major `replicates x dim` sample matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    pub replicates: usize,
    pub dim: usize,
    pub data: Vec<f64>,
}

impl Samples {
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }
}

/// Partial sums `S_h^N(t) = Σ_{n=1}^{⌊Nt⌋} X_n(h(n/N)) / N^{h(n/N)}` observed
/// at `times`.
#[derive(Debug, Clone)]
pub struct PartialSumSpec {
    pub model: FieldModel,
    pub profile: HurstProfile,
    pub n: u64,
    pub times: Vec<f64>,
}

impl PartialSumSpec {
    pub fn new(model: FieldModel, profile: HurstProfile, n: u64, times: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("scale N must be at least 1".into()));
        }
        if times.is_empty() || times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return Err(Error::Domain("evaluation times must be nonnegative and finite".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("evaluation times must be strictly increasing".into()));
        }
        let tol = 1e-12;
        if profile.a() < model.a() - tol || profile.b() > model.b() + tol {
            return Err(Error::Domain(format!(
                "profile range [{}, {}] exceeds model range [{}, {}]",
                profile.a(),
                profile.b(),
                model.a(),
                model.b()
            )));
        }
        Ok(Self {
            model,
            profile,
            n,
            times,
        })
    }

    /// `⌊N t_i⌋` for every time, tolerant to representation error in `N t`.
    pub fn counts(&self) -> Vec<u64> {
        self.times.iter().map(|&t| floor_scaled(self.n, t)).collect()
    }
}

pub(crate) fn floor_scaled(n: u64, t: f64) -> u64 {
    let x = n as f64 * t;
    (x + 1e-9 * x.max(1.0)).floor() as u64
}

const ROW_BLOCK: usize = 128;

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    #[inline]
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        self.comp += if self.sum.abs() >= x.abs() {
            (self.sum - t) + x
        } else {
            (x - t) + self.sum
        };
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Exact covariance matrix `E[S_h^N(t_i) S_h^N(t_j)]` as the double sum of
/// discrete field covariances.
///
/// Every pair `(n, m)` is visited once and added to the bin of
/// `(first i with ⌊N t_i⌋ >= n, same for m)`; the matrix is then a 2-D prefix
/// sum over bins. Rows are processed in fixed blocks and the block results
/// combined in order, so the value is independent of the thread count.
pub fn partial_sum_cov_exact(spec: &PartialSumSpec) -> Result<CovMatrix> {
    let counts = spec.counts();
    let total = *counts.last().expect("times nonempty");
    if total > MAX_INDEX {
        return Err(Error::SizeLimit(format!(
            "floor(N t) = {total} exceeds the limit {MAX_INDEX}"
        )));
    }
    let nb = counts.len();
    let total = total as usize;
    let nf = spec.n as f64;
    // index n = 1..=total stored at n - 1
    let mut bin = Vec::with_capacity(total);
    let mut b = 0;
    for n in 1..=total as u64 {
        while counts[b] < n {
            b += 1;
        }
        bin.push(b);
    }
    let prep: Vec<_> = (1..=total)
        .map(|n| spec.model.prepare(spec.profile.value(n as f64 / nf)))
        .collect();
    let scale: Vec<f64> = prep.iter().map(|p| nf.powf(-p.h)).collect();

    let blocks: Vec<(usize, usize)> = (0..total)
        .step_by(ROW_BLOCK)
        .map(|s| (s, (s + ROW_BLOCK).min(total)))
        .collect();
    let partials: Vec<Vec<Compensated>> = blocks
        .par_iter()
        .map(|&(lo, hi)| {
            let mut acc = vec![Compensated::default(); nb * nb];
            let mut row = vec![0.0; nb];
            for i in lo..hi {
                row.iter_mut().for_each(|x| *x = 0.0);
                let (pi, si, bi) = (&prep[i], scale[i], bin[i]);
                for j in 0..i {
                    let c = spec.model.cov_prepared((i - j) as u64, pi, &prep[j]) * scale[j];
                    row[bin[j]] += c;
                }
                let diag = spec.model.cov_prepared(0, pi, pi) * si * si;
                acc[bi * nb + bi].add(diag);
                for (bj, &r) in row.iter().enumerate() {
                    if r != 0.0 {
                        let c = r * si;
                        acc[bi * nb + bj].add(c);
                        acc[bj * nb + bi].add(c);
                    }
                }
            }
            acc
        })
        .collect();
    let mut bins = vec![Compensated::default(); nb * nb];
    for part in &partials {
        for (dst, src) in bins.iter_mut().zip(part) {
            dst.add(src.sum);
            dst.add(src.comp);
        }
    }
    // 2-D prefix sums
    let mut prefix = vec![0.0; nb * nb];
    for i in 0..nb {
        for j in 0..nb {
            let mut v = bins[i * nb + j].value();
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

/// Which two-parameter field a grid covariance is taken from.
#[derive(Debug, Clone, Copy)]
pub enum GridSource<'a> {
    /// The limit field `W̃(t, H)`.
    Limit(&'a AsymptoticCovariance),
    /// `S^N(t, H) = N^{-H} Σ_{n=1}^{⌊Nt⌋} X_n(H)` at scale `n`.
    Discrete { model: &'a FieldModel, n: u64 },
}

/// Gram matrix of the field over the `(t, H)` grid.
pub fn field_grid_cov(source: GridSource<'_>, grid: &[(f64, f64)]) -> Result<CovMatrix> {
    for &(t, h) in grid {
        if !(t >= 0.0 && t.is_finite()) || !(h > 0.5 && h < 1.0) {
            return Err(Error::Domain(format!("grid point ({t}, {h}) needs t >= 0, H in (1/2, 1)")));
        }
    }
    match source {
        GridSource::Limit(asympt) => Ok(CovMatrix::from_fn(grid.len(), |i, j| {
            let ((t, h1), (s, h2)) = (grid[i], grid[j]);
            field_cov_raw(h1, h2, t, s, asympt)
        })),
        GridSource::Discrete { model, n } => {
            for &(t, h) in grid {
                if floor_scaled(n, t) > MAX_INDEX {
                    return Err(Error::SizeLimit(format!("floor(N t) exceeds {MAX_INDEX}")));
                }
                if h < model.a() - 1e-12 || h > model.b() + 1e-12 {
                    return Err(Error::Domain(format!("H = {h} outside the model range")));
                }
            }
            CovMatrix::try_from_fn_par(grid.len(), |i, j| {
                let ((t, h1), (s, h2)) = (grid[i], grid[j]);
                let (na, nb) = (floor_scaled(n, t), floor_scaled(n, s));
                Ok(block_sum(model, na, nb, h1, h2) * (n as f64).powf(-h1 - h2))
            })
        }
    }
}

/// `Σ_{j=1}^{A} Σ_{k=1}^{B} E[X_j(H1) X_k(H2)]` grouped by lag.
fn block_sum(model: &FieldModel, a: u64, b: u64, h1: f64, h2: f64) -> f64 {
    if a == 0 || b == 0 {
        return 0.0;
    }
    let mut acc = Compensated::default();
    // lag L = j - k ranges over [1 - B, A - 1]
    for lag in -(b as i64 - 1)..=(a as i64 - 1) {
        let lo = 1.max(1 + lag);
        let hi = (a as i64).min(b as i64 + lag);
        let count = hi - lo + 1;
        if count <= 0 {
            continue;
        }
        let c = if lag >= 0 {
            model.cov_raw(lag as u64, 0, h1, h2)
        } else {
            model.cov_raw(0, (-lag) as u64, h1, h2)
        };
        acc.add(count as f64 * c);
    }
    acc.value()
}

/// A jointly defined family `{X_n(H)}`, `n >= 0`, given by its covariance.
pub trait DiscreteCov: Sync {
    fn cov(&self, j: u64, k: u64, h1: f64, h2: f64) -> f64;
}

impl DiscreteCov for FieldModel {
    fn cov(&self, j: u64, k: u64, h1: f64, h2: f64) -> f64 {
        self.cov_raw(j, k, h1, h2)
    }
}

/// Increments `Z_n(H) = W̃(n+1, H) - W̃(n, H)` of the limit field.
#[derive(Debug, Clone)]
pub struct IncrementField {
    pub asympt: AsymptoticCovariance,
}

impl DiscreteCov for IncrementField {
    fn cov(&self, j: u64, k: u64, h1: f64, h2: f64) -> f64 {
        let f = |t: u64, s: u64| field_cov_raw(h1, h2, t as f64, s as f64, &self.asympt);
        f(j + 1, k + 1) - f(j, k + 1) - f(j + 1, k) + f(j, k)
    }
}

/// `E[(T_N X)_{i1}(H1) (T_N X)_{i2}(H2)]` where
/// `(T_N X)_i(H) = N^{-H} Σ_{j=iN}^{(i+1)N-1} X_j(H)` (blocks of `N`
/// consecutive variables, indices from 0).
pub fn renormalize_cov(
    source: &dyn DiscreteCov,
    n: u64,
    index: (u64, u64),
    hurst: (f64, f64),
) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("renormalization scale must be at least 1".into()));
    }
    let (i1, i2) = index;
    let (h1, h2) = hurst;
    let mut acc = Compensated::default();
    for j in i1 * n..(i1 + 1) * n {
        for k in i2 * n..(i2 + 1) * n {
            acc.add(source.cov(j, k, h1, h2));
        }
    }
    Ok(acc.value() * (n as f64).powf(-h1 - h2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::FieldKind;
    use crate::kernels::mbm_cov;

    fn fwn() -> FieldModel {
        FieldModel::new(FieldKind::Fwn, 0.6, 0.9).unwrap()
    }

    fn farima() -> FieldModel {
        FieldModel::new(FieldKind::Farima, 0.6, 0.9).unwrap()
    }

    #[test]
    fn factorize_closed_forms() {
        let id = CovMatrix::from_fn(3, |i, j| if i == j { 1.0 } else { 0.0 }).factorize().unwrap();
        assert_eq!(id.factor().unwrap().lower(), &DMatrix::identity(3, 3));
        let m = CovMatrix::from_fn(2, |i, j| if i == j { 1.0 } else { 0.5 }).factorize().unwrap();
        let l = m.factor().unwrap().lower();
        assert!((l[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((l[(1, 0)] - 0.5).abs() < 1e-15);
        assert!((l[(1, 1)] - 0.75f64.sqrt()).abs() < 1e-15);
        assert_eq!(l[(0, 1)], 0.0);
        assert_eq!(m.factor().unwrap().jitter, 0.0);
    }

    #[test]
    fn singular_psd_matrix_needs_jitter() {
        // rank one
        let m = CovMatrix::from_fn(3, |_, _| 1.0).factorize().unwrap();
        let f = m.factor().unwrap();
        assert!(f.jitter > 0.0 && f.jitter <= 1e-10 * 3.0 / 3.0);
        assert!(!f.attempts[0].success);
        assert!(m.reconstruction_error().unwrap() < 1e-9);
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let m = CovMatrix::from_fn(2, |i, j| if i == j { 1.0 } else { 2.0 });
        assert!(matches!(m.factorize(), Err(Error::NotPsd { attempts: 3, .. })));
    }

    #[test]
    fn zero_matrix_samples_zero() {
        let m = CovMatrix::from_fn(4, |_, _| 0.0).factorize().unwrap();
        let s = m.sample_paths(10, 7).unwrap();
        assert!(s.data.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn unit_variance_sampling() {
        let m = CovMatrix::from_fn(1, |_, _| 1.0).factorize().unwrap();
        let s = m.sample_paths(100_000, 42).unwrap();
        let var = s.data.iter().map(|x| x * x).sum::<f64>() / s.data.len() as f64;
        assert!((0.98..=1.02).contains(&var), "{var}");
    }

    #[test]
    fn sampling_is_deterministic() {
        let m = CovMatrix::from_fn(5, |i, j| 0.5f64.powi((i as i32 - j as i32).abs()))
            .factorize()
            .unwrap();
        let a = m.sample_paths(64, 9).unwrap();
        let b = m.sample_paths(64, 9).unwrap();
        assert_eq!(a, b);
        let c = m.sample_paths(64, 10).unwrap();
        assert_ne!(a, c);
        // replicate r does not depend on how many replicates were requested
        let d = m.sample_paths(3, 9).unwrap();
        assert_eq!(d.row(2), a.row(2));
    }

    #[test]
    fn constant_h_partial_sums_are_fbm() {
        let prof = HurstProfile::constant(0.75).unwrap();
        for n in [1u64, 7, 64] {
            let times = vec![0.25, 0.5, 1.0, 1.5];
            let spec = PartialSumSpec::new(fwn(), prof.clone(), n, times.clone()).unwrap();
            let m = partial_sum_cov_exact(&spec).unwrap();
            let counts = spec.counts();
            for i in 0..times.len() {
                for j in 0..times.len() {
                    let (a, b) = (counts[i] as f64, counts[j] as f64);
                    let want = 0.5 * (a.powf(1.5) + b.powf(1.5) - (a - b).abs().powf(1.5))
                        * (n as f64).powf(-1.5);
                    assert!((m.get(i, j) - want).abs() < 1e-12, "N={n} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn single_term_sum() {
        let prof = HurstProfile::sinusoidal(0.75, 0.15).unwrap();
        let spec = PartialSumSpec::new(farima(), prof.clone(), 1, vec![1.0]).unwrap();
        let m = partial_sum_cov_exact(&spec).unwrap();
        let h = prof.eval(1.0).unwrap();
        assert!((m.get(0, 0) - farima().cov_raw(1, 1, h, h)).abs() < 1e-15);
    }

    #[test]
    fn partial_sums_match_brute_force() {
        let prof = HurstProfile::sinusoidal(0.75, 0.15).unwrap();
        let model = farima();
        let n = 37u64;
        let times = vec![0.3, 0.8, 1.1];
        let spec = PartialSumSpec::new(model, prof.clone(), n, times.clone()).unwrap();
        let m = partial_sum_cov_exact(&spec).unwrap();
        let counts = spec.counts();
        let h = |i: u64| prof.eval(i as f64 / n as f64).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let mut want = 0.0;
                for i in 1..=counts[a] {
                    for j in 1..=counts[b] {
                        want += model.cov_raw(i, j, h(i), h(j)) * (n as f64).powf(-h(i) - h(j));
                    }
                }
                assert!((m.get(a, b) - want).abs() < 1e-12 * want.abs().max(1.0));
            }
        }
        assert!(m.is_psd_within(1e-10));
    }

    #[test]
    fn size_guard() {
        let prof = HurstProfile::constant(0.75).unwrap();
        let spec = PartialSumSpec::new(fwn(), prof, 100_000, vec![2.0]).unwrap();
        assert!(matches!(partial_sum_cov_exact(&spec), Err(Error::SizeLimit(_))));
    }

    #[test]
    fn spec_validation() {
        let prof = HurstProfile::constant(0.75).unwrap();
        assert!(PartialSumSpec::new(fwn(), prof.clone(), 0, vec![1.0]).is_err());
        assert!(PartialSumSpec::new(fwn(), prof.clone(), 4, vec![1.0, 1.0]).is_err());
        assert!(PartialSumSpec::new(fwn(), prof, 4, vec![-1.0]).is_err());
    }

    #[test]
    fn limit_grid_reductions() {
        let h = 0.75;
        let r = AsymptoticCovariance::constant(h * (2.0 * h - 1.0)).unwrap();
        let m = field_grid_cov(GridSource::Limit(&r), &[(1.0, h), (2.0, h)]).unwrap();
        assert!((m.get(0, 0) - 1.0).abs() < 1e-15);
        let fbm = HurstProfile::constant(h).unwrap();
        assert!((m.get(1, 0) - mbm_cov(&fbm, 2.0, 1.0).unwrap()).abs() < 1e-14);
        let grid: Vec<(f64, f64)> = [0.5, 1.0, 2.0]
            .iter()
            .flat_map(|&t| [0.6, 0.75, 0.9].map(|h| (t, h)))
            .collect();
        let m = field_grid_cov(GridSource::Limit(&AsymptoticCovariance::Farima), &grid).unwrap();
        assert!(m.is_psd_within(1e-8));
    }

    #[test]
    fn discrete_grid_approaches_limit() {
        let model = farima();
        let grid = [(1.0, 0.65), (0.5, 0.85)];
        let lim = field_grid_cov(GridSource::Limit(&model.asympt()), &grid).unwrap();
        let mut prev = f64::INFINITY;
        for n in [64u64, 256, 1024, 4096] {
            let m = field_grid_cov(GridSource::Discrete { model: &model, n }, &grid).unwrap();
            let err = (0..2)
                .flat_map(|i| (0..2).map(move |j| (i, j)))
                .map(|(i, j)| ((m.get(i, j) - lim.get(i, j)) / lim.get(i, j)).abs())
                .fold(0.0, f64::max);
            assert!(err < prev, "N={n}: {err}");
            prev = err;
        }
        assert!(prev < 0.05);
    }

    #[test]
    fn renormalization_identity_and_fixed_point() {
        let model = farima();
        for (j, k) in [(0u64, 0u64), (3, 1)] {
            let t1 = renormalize_cov(&model, 1, (j, k), (0.7, 0.8)).unwrap();
            assert_eq!(t1, model.cov_raw(j, k, 0.7, 0.8));
        }
        let z = IncrementField {
            asympt: AsymptoticCovariance::Farima,
        };
        for n in [2u64, 4, 8] {
            for (idx, hs) in [((0u64, 0u64), (0.7, 0.7)), ((1, 0), (0.6, 0.8)), ((0, 1), (0.6, 0.8))] {
                let t = renormalize_cov(&z, n, idx, hs).unwrap();
                let base = z.cov(idx.0, idx.1, hs.0, hs.1);
                assert!((t - base).abs() < 1e-10, "N={n}");
            }
        }
    }
}
