//! `--set PATH=VALUE` overrides. The first line is the document, every
//! following line one assignment.
//!
//! Run with: `cargo +nightly fuzz run set_override`
#![no_main]
use libfuzzer_sys::fuzz_target;
use mfgauss::config::apply_override;

fuzz_target!(|data: &str| {
    let mut lines = data.lines();
    let Some(head) = lines.next() else { return };
    let Ok(mut root) = serde_json::from_str::<serde_json::Value>(head) else {
        return;
    };
    for line in lines {
        if apply_override(&mut root, line).is_err() {
            break;
        }
    }
});
