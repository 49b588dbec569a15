//! Pipeline stages and HTTP service behind the `storylink` binary.

pub mod pipeline;
pub mod server;
