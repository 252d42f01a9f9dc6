//! Command-line and HTTP front ends for the `pivotcube` engine.

pub mod cli;
pub mod error;
pub mod server;
pub mod snapshot;

pub use error::AppError;
