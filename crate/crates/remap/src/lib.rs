//! HTTP/JSON query service and command-line front end for `remap-core`.
//!
//! [`api::dispatch`] answers every `/api/v1` request; the HTTP service in
//! [`service`] and `remap query` both call it, so their payloads are
//! byte-identical.

pub mod api;
pub mod cli;
pub mod json;
pub mod service;

pub use api::{dispatch, Defaults, Response};
pub use service::{serve, Service, ServiceConfig};
