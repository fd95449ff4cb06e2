pub mod asymptotics;
pub mod error;
pub mod estimators;
pub mod hermite;
pub mod io;
pub mod lrd_sim;
pub mod montecarlo;
pub mod quadrature;
pub mod rng;
pub mod special;
pub mod uprocess;

pub use error::{Error, Result};
