//! Closed forms checked against values computed independently at 40 digits.

use mfgauss::fields::{farima_cov, farima_cov_series, fwn_cov, fwn_spectral_oracle};
use mfgauss::kernels::{r_farima, r_fwn};
use mfgauss::specialfn::{c_norm, d_coef};
use mfgauss::{AsymptoticCovariance, HurstPair, HurstProfile, LimitKernel};

fn pair(h1: f64, h2: f64) -> HurstPair {
    HurstPair::new(h1, h2).unwrap()
}

fn close(got: f64, want: f64, rel: f64) {
    assert!(((got - want) / want).abs() <= rel, "got {got:e}, want {want:e}");
}

#[test]
fn mixed_coefficient_and_constants() {
    close(d_coef(pair(0.6, 0.9)), 0.391_918_358_845_308_5, 1e-13);
    close(r_fwn(pair(0.6, 0.9)), 0.293_938_769_133_981_4, 1e-13);
    close(c_norm(0.75).unwrap(), 2.585_409_458_032_260_7, 1e-13);
    for h in [0.55, 0.7, 0.95] {
        close(d_coef(pair(h, h)), 0.5, 1e-13);
        close(r_fwn(pair(h, h)), h * (2.0 * h - 1.0), 1e-13);
    }
}

#[test]
fn farima_constant_is_asymmetric() {
    close(r_farima(pair(0.7, 0.6)), 0.242_863_370_691_297_5, 1e-13);
    close(r_farima(pair(0.6, 0.7)), 0.127_680_829_966_537_2, 1e-13);
}

#[test]
fn farima_covariance_matches_hypergeometric_sum() {
    // d = H - 1/2; the later index carries H1
    close(farima_cov(10, 3, pair(0.7, 0.6)), 0.061_872_835_382_684_03, 1e-12);
    close(farima_cov(5, 5, pair(0.8, 0.8)), 1.316_456_062_130_004_7, 1e-12);
    close(farima_cov_series(7, 0.2, 0.1).unwrap(), 0.061_872_835_382_684_03, 1e-9);
    assert_eq!(farima_cov(3, 10, pair(0.6, 0.7)), farima_cov(10, 3, pair(0.7, 0.6)));
}

#[test]
fn fwn_covariance_agrees_with_its_spectral_integral() {
    for (h1, h2) in [(0.6, 0.6), (0.6, 0.9), (0.75, 0.8)] {
        for (j, k) in [(1, 1), (4, 1), (9, 3)] {
            let exact = fwn_cov(j, k, pair(h1, h2));
            let spectral = fwn_spectral_oracle(j, k, pair(h1, h2)).unwrap();
            close(exact, spectral, 1e-7);
        }
    }
}

#[test]
fn constant_profile_limit_is_fractional_brownian_motion() {
    let h = 0.75;
    let k = LimitKernel::new(HurstProfile::constant(h).unwrap(), AsymptoticCovariance::Fwn);
    for (t, s) in [(1.0f64, 0.4f64), (0.3, 0.3), (0.2, 0.9)] {
        let fbm = 0.5 * (t.powf(2.0 * h) + s.powf(2.0 * h) - (t - s).abs().powf(2.0 * h));
        close(k.limit_cov(t, s).unwrap(), fbm, 1e-13);
        close(k.limit_cov_quadrature(t, s).unwrap(), fbm, 1e-8);
    }
}

#[test]
fn varying_profile_limit_is_symmetric_for_symmetric_kernels() {
    let k = LimitKernel::new(HurstProfile::sinusoidal(0.75, 0.15).unwrap(), AsymptoticCovariance::Fwn);
    let a = k.limit_cov(0.8, 0.3).unwrap();
    let b = k.limit_cov(0.3, 0.8).unwrap();
    close(a, b, 1e-9);
    let var = k.limit_cov(0.8, 0.8).unwrap();
    let var2 = k.limit_cov(0.3, 0.3).unwrap();
    assert!(a * a <= var * var2);
}
