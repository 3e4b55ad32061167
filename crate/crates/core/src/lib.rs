//! Exact verification of shallow ReLU networks through zonotopes and
//! hyperplane arrangements.

pub mod approx;
pub mod arrangement;
pub mod error;
pub mod icnn;
pub mod linalg;
pub mod lp;
pub mod network;
pub mod norm;
pub mod rational;
pub mod reduce;
pub mod regions;
pub mod verify;
pub mod zonotope;

pub use error::{Error, Result};
pub use rational::Rational;
