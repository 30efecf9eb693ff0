//! Cell-less RF wireless power transfer: channel generation, closed-form AP
//! selection and energy beamforming, a small-cell baseline, charging and
//! RF-exposure metrics, and a seeded Monte Carlo harness.

pub mod channel;
pub mod error;
pub mod metrics;
pub mod optimizer;
pub mod sim;
pub mod smallcell;
pub mod topology;

pub use error::{Error, Result};
