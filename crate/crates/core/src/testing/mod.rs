//! Helpers shared by this crate's tests and by downstream test suites.

pub mod corpus;
pub mod edit_model;
pub mod export_check;
pub mod golden;
pub mod persistence_check;
mod stub;
pub mod tokenizer_check;

pub use stub::{StubReply, StubServer};
