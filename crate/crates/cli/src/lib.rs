//! Batch checker and translator for the lambda-free frameworks and their
//! traditional-framework embedding.
//!
//! Source files use the `.tft` extension in three dialects: `tf` (binders
//! unannotated), `tfk` (binders labelled with kinds) and `lf` (the
//! traditional framework).  Every subcommand reads files, emits one
//! machine-readable `STATUS<TAB>item<TAB>detail` line per item, and exits 0
//! on success, 1 on check failures, 2 on parse or arity errors.

pub mod lexer;
pub mod parse;
pub mod run;

pub use parse::{emit_derivation, parse_derivation, parse_file, Dialect, ParseError};
pub use run::{run, Command, Options, Outcome};
