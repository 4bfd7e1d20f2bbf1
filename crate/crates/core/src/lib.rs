//! Shared-buffer admission control: a packet-level simulator and a fluid
//! analyzer for Dynamic Thresholds, Complete Sharing and FB.

pub mod cli;
pub mod engine;
pub mod error;
pub mod fluid;
pub mod metrics;
pub mod model;
pub mod policy;
pub mod workload;
