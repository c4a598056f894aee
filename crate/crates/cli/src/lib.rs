//! Library surface of the `stencil-tune` command-line tool, split out so
//! integration tests can drive commands and reload reports directly.

pub mod commands;
pub mod report;
