//! No-signalling assisted zero-error communication and simulation of quantum
//! channels, computed through semidefinite programming.

pub mod error;
pub mod matcore;
pub mod model;
pub mod nosig;
pub mod quantities;
pub mod random;
pub mod regress;
pub mod sdp;

pub use error::{Error, Result};
