//! Black-box interventional auditing of sequence-context scoring models.
//!
//! A model is scored on each original record and on two matched perturbations:
//! one that edits the positions a structural prior marks as mechanistic, and
//! one that edits an equally sized random set of the remaining positions.
//! Distribution-level coherence metrics (QBM, WCM, TI-WCM) compare the
//! original and perturbed score profiles, and the spurious-minus-mechanistic
//! contrast summarizes whether the model reads the prior positions.

pub mod error;
pub mod intervention;
pub mod metrics;
pub mod pipeline;
pub mod rng;
pub mod scoring;
pub mod stats;

pub use error::{AdapterError, Error, Result};
pub use metrics::{contrast, evaluate, qbm, ti_wcm, wcm, MetricKind, MetricValue, QuantileGrid, ResponseProfile};
