//! Dynamic simulation of a grate belt clinker cooler.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![cfg_attr(test, allow(clippy::needless_range_loop))]

pub mod error;
pub mod kinetics;
pub mod model;
pub mod output;
pub mod run;
pub mod scenario;
pub mod solver;
pub mod species;
pub mod thermo;
pub mod transport;

pub use error::{ModelError, SolverError, ThermoError};
pub use species::{Phase, SpeciesId, SpeciesTable};
