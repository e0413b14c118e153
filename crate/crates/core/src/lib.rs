//! Core of the research-assistant workbench.
//!
//! The workflow runs in four steps. A [`catalog`] scenario turns user inputs
//! into a prompt for a chat agent. [`ingest`] reads the agent's pasted reply
//! back into tables. [`comparison`] holds the resulting matrix and applies
//! post-edits. [`export`] writes CSV for spreadsheets or for knowledge-graph
//! import. [`workspace`] keeps all of it on local disk, and [`session`] ties
//! the steps together for the CLI and the HTTP service.

pub mod catalog;
pub mod comparison;
pub mod export;
pub mod gateway;
pub mod ingest;
pub mod session;
#[cfg(any(test, feature = "test-support"))]
pub mod testing;
pub mod workspace;

pub use catalog::{Catalog, ScenarioId, ScenarioInputs};
pub use comparison::{Comparison, EditCommand, MergeStrategy};
pub use export::{ExportProfile, Flavor};
pub use ingest::{extract_tables, classify_and_parse, validate_dimension_name, ParsedIngest, RawTable};
pub use session::SessionError;
pub use workspace::Workspace;
