//! Full statistics of homodyne correlation measurements.
//!
//! Two linear photodetectors record the outputs of a linear optical network
//! fed by a signal mode and a local oscillator. The correlation variable is
//! `M = c₁c₂`, the product of the mean-centered detector counts. This crate
//! evaluates its probability density for coherent, Gaussian and Fock inputs,
//! its moments, two nonclassicality indicators, and a sampling oracle for
//! classical states.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod lon;
pub mod moments;
pub mod oracle;
pub mod quadrature;
pub mod special;
pub mod state;
pub mod statistics;

pub use error::{Error, Result};
pub use lon::{DetectionContext, Detector, DetectorConfig, LocalOscillator, LonMatrix};
pub use state::{SignalState, StateKind};
pub use statistics::{CorrelationPdf, DensityValue};

pub use num_complex::Complex64;
