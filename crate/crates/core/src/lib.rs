pub mod cli;
pub mod dist;
pub mod error;
pub mod eval;
pub mod io;
pub mod model;
pub mod network;
pub mod posterior;
pub mod rng;
pub mod simulate;

pub use error::{Error, Result};
