//! Reduced-order fuel-rate models for light-duty vehicles.
//!
//! A forward reference simulator produces high-fidelity traces; engine and
//! transmission maps are extracted from them and used by a semi-principled
//! model; a simplified polynomial model is fitted on top. Dynamometer logs
//! can be post-processed into profiles, and everything can be compared with
//! the validation module.

pub mod cycle;
pub mod dyno;
pub mod extraction;
pub mod interp;
pub mod poly;
pub mod reference;
pub mod semi;
pub mod simplified;
pub mod stats;
pub mod synthetic;
pub mod trace;
pub mod units;
pub mod validation;
pub mod vehicle;
