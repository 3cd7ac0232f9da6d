//! Acceptance suite for `mfgauss`; see `tests/acceptance.rs`. Run it with
//! `cargo test -p mfgauss-validation --test acceptance`.
