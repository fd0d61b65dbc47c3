//! File formats, parallel experiment drivers, reports, rendering and the command-line
//! front end for `lipembed-core`.

pub mod ci;
pub mod cli;
pub mod config;
pub mod drive;
pub mod dump;
pub mod error;
pub mod format;
pub mod instance;
pub mod manifest;
pub mod render;
pub mod report;

pub use error::{Error, Result};
