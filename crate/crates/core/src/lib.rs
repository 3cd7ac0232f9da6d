//! Covariance-level toolkit for multifractional Gaussian processes with long
//! memory: discrete field models (fractional white noise, FARIMA), their
//! partial sums, the limit covariance as a singular double integral, and the
//! checks that tie them together.

pub mod analysis;
pub mod config;
pub mod error;
pub mod fields;
pub mod hprofile;
pub mod kernels;
pub mod quadrature;
pub mod report;
pub mod simulate;
pub mod specialfn;

pub use config::ScenarioConfig;
pub use error::{Error, Result};
pub use fields::{FieldKind, FieldModel};
pub use hprofile::HurstProfile;
pub use kernels::{AsymptoticCovariance, LimitKernel};
pub use report::Report;
pub use specialfn::HurstPair;
