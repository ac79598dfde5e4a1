//! Exact response-time analysis for fixed-priority sporadic tasks with
//! release jitter, through its equivalence with the Mixing Set integer
//! program.
//!
//! The crate is organized bottom-up:
//!
//! * [`model`] and [`bounds`] hold the task model and the bounds on a response time.
//! * [`mixing`] solves Mixing Set instances.
//! * [`rta`] computes response times, using the mixing solvers as decision oracles.
//! * [`reverse`] solves Mixing Set instances with a response-time oracle.
//! * [`blockip`] covers the 4-block integer-programming view.
//! * [`gen`] builds instances and [`sim`] replays schedules for validation.

pub mod arith;
pub mod blockip;
pub mod bounds;
pub mod error;
pub mod gen;
pub mod mixing;
pub mod model;
pub mod reverse;
pub mod rta;
pub mod sim;

pub use bounds::{query_bounds, response_bounds, BoundsResult};
pub use error::{Error, Result};
pub use mixing::{MixInstance, MixSolution, MixTerm};
pub use model::{Task, TaskSystem};
pub use rta::{analyze_system, Algorithm, ResponseQuery, SystemReport};
