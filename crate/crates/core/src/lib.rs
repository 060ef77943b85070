//! Deterministic simulator and cost model for three-tier task offloading:
//! an infinite-server Cloud, a single FIFO Edge server at the core network
//! gateway, and a Vehicular Cloud made of idle on-board processors reached
//! through the base station.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod compute;
pub mod config;
pub mod controller;
pub mod costmodel;
pub mod engine;
pub mod report;
pub mod scenario;
pub mod stats;
pub mod sweep;

use thiserror::Error;

pub use config::{ConfigFile, RunConfig, Strategy};
pub use engine::{run, summarize, Aggregates, OffloadRecord, Outcome};

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {what}: {msg}")]
    Invalid { what: &'static str, msg: String },

    #[error("{}`{key}`: {msg}", line_prefix(*.line))]
    Config { key: String, line: usize, msg: String },

    #[error("{0}")]
    Csv(#[from] csv::Error),

    #[error("{0}")]
    Io(#[from] std::io::Error),
}

fn line_prefix(line: usize) -> String {
    if line == 0 {
        String::new()
    } else {
        format!("line {line}: ")
    }
}

impl Error {
    pub(crate) fn invalid(what: &'static str, msg: impl Into<String>) -> Self {
        Error::Invalid { what, msg: msg.into() }
    }
}
