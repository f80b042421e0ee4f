pub mod cli;
pub mod error;
pub mod hypothesis;
pub mod inference;
pub mod io;
pub mod lyapunov;
pub mod mle;
pub mod model;
pub mod montecarlo;
pub mod optimize;
pub mod quad;
pub mod stable;

pub use error::{Error, Result};
