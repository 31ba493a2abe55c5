//! Reed-Muller codes decoded by recursive projection aggregation (RPA), the
//! sparse multi-decoder variant (k-SRPA), and a Monte-Carlo BLER harness.
//!
//! The crate is organised bottom-up:
//!
//! - [`bitspace`]: index points of F₂^m, one-dimensional subspaces and their cosets.
//! - [`rmcode`]: code construction, encoding and message recovery.
//! - [`crc3`]: CRC-3-GSM (x³ + x + 1) for candidate screening.
//! - [`channel`]: BPSK/AWGN and BSC channels producing LLR vectors.
//! - [`fhtdec`]: fast Hadamard transform and ML decoding of first-order codes.
//! - [`rpa`]: projections, aggregation and the full RPA decoder.
//! - [`srpa`]: sparse plans, k-SRPA decoding and the closed-form budget.
//! - [`harness`]: SNR sweeps, CSV/SVG output and budget comparison.

pub mod bitspace;
pub mod budget;
pub mod channel;
pub mod crc3;
pub mod error;
pub mod fhtdec;
pub mod harness;
pub mod rmcode;
pub mod rng;
pub mod rpa;
pub mod srpa;

pub use budget::BudgetReport;
pub use error::{Error, Result};
