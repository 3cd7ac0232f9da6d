//! Scenario configs: parsing and semantic resolution must reject bad input
//! with an error, never a panic. Accepted configs survive a JSON round trip.
//!
//! Run with: `cargo +nightly fuzz run config_parse`
#![no_main]
use libfuzzer_sys::fuzz_target;
use mfgauss::ScenarioConfig;

fuzz_target!(|data: &str| {
    let Ok(config) = ScenarioConfig::parse(data, &[]) else {
        return;
    };
    let text = serde_json::to_string(&config).expect("accepted config serializes");
    let again = ScenarioConfig::parse(&text, &[]).expect("serialized config parses");
    assert_eq!(config, again);
    let _ = config.resolve();
});
