//! File formats, configuration and the command pipeline behind the `geovox`
//! binary. The numerical core lives in `geovox-core`; this crate owns
//! everything that touches the filesystem.

pub mod cli;
pub mod config;
pub mod error;
pub mod obj;
pub mod pipeline;
pub mod report;
pub mod svg;
pub mod table;
pub mod vgf;
pub mod xyz;

pub use error::{AppError, AppResult};
