//! Stochastic two-period overlapping-generations economy with Epstein-Zin-Weil
//! households, CES production and lognormal productivity shocks.
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature. Parallel campaign execution is available behind `parallel`.
//!
//! Module map:
//!
//! * [`model`]: parameters, technology, rate conversion, shock streams.
//! * [`quadrature`]: expectation rules over next-period productivity.
//! * [`household`]: saving problem, shadow safe rate, equations of motion.
//! * [`calibration`]: fitting parameters to annual rate targets.
//! * [`analytics`]: closed-form marginal welfare calculus.
//! * [`experiments`]: steady state, transfer grids, debt rollovers, scenarios.
//! * [`ingest`]: rate-growth differential series and summary statistics.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]
// Negated comparisons are deliberate: they reject NaN alongside out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analytics;
pub mod calibration;
mod error;
pub mod experiments;
pub mod household;
pub mod ingest;
pub mod model;
mod parallel;
pub mod quadrature;
pub mod root;

pub use error::{Error, Result};
pub use model::{
    annual_to_generational, generational_to_annual, EconomyParams, PeriodState, RateTargets,
    ShockStream, Technology,
};
