//! Reports read back from disk.
//!
//! Run with: `cargo +nightly fuzz run report_roundtrip`
#![no_main]
use libfuzzer_sys::fuzz_target;
use mfgauss::Report;

fuzz_target!(|data: &str| {
    if let Ok(report) = Report::from_json(data) {
        if let Ok(text) = report.to_json() {
            let again = Report::from_json(&text).expect("written report parses");
            assert_eq!(report, again);
        }
        let _ = report.summary_lines();
        for s in &report.series {
            let _ = s.to_csv();
        }
    }
});
