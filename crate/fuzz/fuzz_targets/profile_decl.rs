//! Hurst profile declarations. An accepted profile stays inside its declared
//! range and re-parses from its own JSON.
//!
//! Run with: `cargo +nightly fuzz run profile_decl`
#![no_main]
use libfuzzer_sys::fuzz_target;
use mfgauss::HurstProfile;

fuzz_target!(|data: &str| {
    let Ok(v) = serde_json::from_str::<serde_json::Value>(data) else {
        return;
    };
    let Ok(h) = HurstProfile::from_json(&v, "profile") else {
        return;
    };
    for k in 0..=32 {
        let t = k as f64 / 8.0;
        let x = h.eval(t).expect("t >= 0");
        assert!(x.is_finite() && x >= h.a() - 1e-12 && x <= h.b() + 1e-12, "h({t}) = {x}");
    }
    let again = HurstProfile::from_json(&h.to_json(), "profile").expect("own JSON parses");
    assert_eq!(h, again);
});
