//! Scenario construction: files, presets, traffic sources and sweeps.

mod cdf;
mod config;
pub mod presets;
mod source;
mod sweep;

pub use cdf::{load_cdf, parse_cdf, SizeCdf};
pub use config::{
    decode_scenario, format_alpha, load_scenario, parse_alpha, parse_scenario, serialize_scenario, BurstSize,
    ScenarioConfig, SizeDist, SourceKind, SourceSpec, ALPHA_LIMIT, DEFAULT_SAMPLE_INTERVAL,
    MAX_SOURCE_PACKETS,
};
pub use presets::{preset, PRESETS};
pub use source::{build_sources, burst_duration, Arrival};
pub use sweep::{sweep, SweepAxis};
