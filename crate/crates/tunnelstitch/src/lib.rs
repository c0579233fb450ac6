//! File formats, experiment pipeline and command-line front end for
//! [`tunnelstitch_core`].

pub mod cli;
pub mod config;
pub mod error;
pub mod imageio;
pub mod meshio;
pub mod pipeline;
pub mod trajfile;

pub use config::ExperimentConfig;
pub use error::{Error, Result};
