//! Command-line front end for `bpetk`: dictionary files, token output
//! formats and the subcommands of the `bpetk` binary.

pub mod commands;
pub mod dictfile;
pub mod error;
pub mod text;

pub use commands::{run, Cli, Streams};
pub use error::CliError;
