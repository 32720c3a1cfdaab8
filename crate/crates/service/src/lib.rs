//! Live lecture sessions over HTTP, plus the `lectern` command-line driver.
//!
//! [`service::Lectern`] owns the maps and sessions of one data directory,
//! [`http::router`] exposes it as JSON endpoints, and [`cli::run`] is the
//! whole of the `lectern` binary.

pub mod cli;
pub mod error;
pub mod http;
pub mod service;
pub mod session;
pub mod store;

pub use error::ServiceError;
pub use service::Lectern;
pub use store::Store;
