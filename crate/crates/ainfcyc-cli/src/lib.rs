//! Library surface of the CLI: file formats, report rendering and the
//! command implementations, reused by the binary and the test suites.

pub mod commands;
pub mod report;
pub mod schema;
