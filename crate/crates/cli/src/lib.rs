//! Model language, reports and command line front end.

pub mod app;
pub mod corpus;
pub mod dot;
pub mod dsl;
pub mod error;
pub mod query;
pub mod report;

pub use app::run;
