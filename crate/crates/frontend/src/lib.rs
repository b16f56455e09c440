//! Command line client and HTTP service around the `htmlflow` converter.

pub mod cli;
pub mod fetch;
pub mod request;
pub mod service;

pub use fetch::{fetch_url, FetchError, Fetched};
pub use request::{convert, ConversionOutput, ConversionRequest, RequestError, RulesSource};
