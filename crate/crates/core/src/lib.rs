//! Injects order-dependent flakiness into stable test classes by deleting
//! single statements, then detects and classifies the resulting victims and
//! brittles.
//!
//! Test frameworks are reached through a language-neutral adapter protocol
//! ([`protocol`]). A deterministic in-process adapter ([`sim`]) ships with
//! the crate and serves both as a test bed and as the ground truth for the
//! detection pipeline.

pub mod analytics;
pub mod cache;
pub mod cli;
pub mod dataset;
pub mod model;
pub mod order;
pub mod pipeline;
pub mod protocol;
pub mod report;
pub mod selftest;
pub mod sim;
