//! Cold-atom cavity optomechanics: collective-mode coupling, linear
//! response and noise of a driven cavity with a trapped atomic ensemble,
//! static and dynamical nonlinearity, self-organization under side pumping,
//! and single-atom transits with detection feedback.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod consts;
pub mod coupling;
pub mod error;
pub mod exec;
pub mod linear;
pub mod noise;
pub mod nonlinear;
pub mod params;
pub mod poly;
pub mod selforg;
pub mod single_atom;
pub mod spectrum;
pub mod stats;
pub mod trajectory;

pub use error::{ConfigError, PhysicsError};
pub use exec::Execution;
