//! File formats, the synthetic Directions experiment and the command-line
//! front end for `phonobias-core`.

pub mod emissions;
pub mod error;
pub mod experiment;
pub mod io;
pub mod pool;
pub mod resources;
pub mod stats;

pub use error::Error;
pub use resources::Resources;
