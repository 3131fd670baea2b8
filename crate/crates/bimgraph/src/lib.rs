//! File formats, the external denoiser backend, offline and online
//! pipelines, benchmarks and the `bimgraph` command-line tool built on
//! `bimgraph-core`.

pub mod bench;
pub mod config;
pub mod denoise;
pub mod error;
pub mod io;
pub mod pipeline;
pub mod world;

pub use error::{AppError, AppResult};
