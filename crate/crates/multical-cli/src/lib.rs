//! Library side of the `multical` binary: CSV ingestion, schema handling,
//! report documents, and the subcommand implementations.

pub mod cli_error;
pub mod commands;
pub mod csv_io;
pub mod report;
pub mod schema;
