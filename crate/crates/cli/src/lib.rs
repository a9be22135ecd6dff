//! Parser, subcommand dispatch, and deterministic report emission for
//! the ktc toolkit's line-based description format.

pub mod commands;
pub mod format;
pub mod report;

pub use commands::{run_command, CliError, CommandKind, Options};
pub use format::{parse_document, Document, ParseError};
pub use report::{Report, ReportFormat};
