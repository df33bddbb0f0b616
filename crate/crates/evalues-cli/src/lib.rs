//! Support modules for the `evalues` binary: config files, report format,
//! output formatting, function-id parsing, and SVG rendering. Split out as
//! a library so the integration tests can exercise them directly.

pub mod config;
pub mod format;
pub mod funcid;
pub mod report;
pub mod svg;
