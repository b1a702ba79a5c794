//! Spectral-peak audio fingerprinting with a noise-robustness benchmark.

pub mod augment;
pub mod bench;
pub mod denoise;
pub mod error;
pub mod exec;
pub mod fingerprint;
pub mod fpindex;
pub mod landmark;
pub mod metrics;
pub mod peakpipe;
pub mod spectro;
pub mod synth;

pub use error::{Error, Result};
pub use exec::Execution;
