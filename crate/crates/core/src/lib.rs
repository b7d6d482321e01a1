pub mod ensembles;
pub mod error;
pub mod kernels;
mod linalg;
pub mod quad;
pub mod rmt_sim;
pub mod specfun;
pub mod verify;

pub use error::{Error, Result};
