//! Curtains and curtain-separation metrics on a catalogue of CAT(0) model spaces.
//!
//! The crate is organised bottom-up: [`geom`] provides distances, geodesics and
//! closest-point projections; [`curtains`] classifies points against curtains and
//! builds chains; [`separation`] estimates the `d_L` metrics and `d̂`; [`morse`]
//! handles sublinear functions and contraction diagnostics; [`hyperbolicity`] runs
//! four-point and grid scans; [`experiments`] packages named end-to-end runs.

pub mod curtains;
pub mod error;
pub mod experiments;
pub mod geom;
pub mod hyperbolicity;
pub mod morse;
pub mod numeric;
pub mod report;
pub mod rng;
pub mod separation;

pub use error::{Error, Result};

/// Version string stamped into every output row.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
