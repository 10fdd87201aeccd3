pub mod config;
pub mod counterexample;
pub mod error;
pub mod hermite;
pub mod numcore;
pub mod radialnd;
pub mod rearrange;
pub mod sl1d;
pub mod sweep;
pub mod weights;

pub use error::{Error, Result};
