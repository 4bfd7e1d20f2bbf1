//! Scenario files.
//!
//! A scenario is a TOML document:
//!
//! ```toml
//! name = "fig2"
//! horizon = 250.0
//! seed = 1
//!
//! [switch]
//! buffer = 60
//! ports = 2
//! mode = "multi"              # or "single"
//! congestion_threshold = 0
//! sample_interval = 0.1
//! staleness = 0.0
//!
//! [policy]
//! kind = "dt"                 # cs, dt, fb, fb-single, fba
//! fba_period = 1.0            # fba only; "event" ticks before every arrival
//!
//! [[classes]]
//! id = 0
//! alpha = "1/2"
//! priority = 0
//!
//! [[sources]]
//! kind = "constant"
//! port = 1
//! class = 0
//! rate = 2.0
//! start = 0.0
//! ```
//!
//! Burst sources take `rate`, `start` and either `duration` or
//! `size_fraction` (of the buffer). Poisson flow sources take
//! `mean_interarrival`, `flow_rate` and one of `cdf = "default"`,
//! `cdf_file = "sizes.txt"` or `cdf_points = [[1, 0.5], [10, 1.0]]`.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use super::cdf::{load_cdf, SizeCdf};
use crate::error::{ConfigError, ParseError, ScenarioError};
use crate::model::{ClassId, Frac, PriorityId, QueueMode, SwitchLayout, TrafficClass};
use crate::policy::{AlphaTable, FbaPeriod, PolicyKind};

/// Largest numerator or denominator accepted for α.
pub const ALPHA_LIMIT: i64 = 1_000_000;

pub const DEFAULT_SAMPLE_INTERVAL: f64 = 0.1;

/// Upper bound on arrivals (flows, for Poisson sources) one source may
/// generate, so a typo in a rate cannot exhaust memory.
pub const MAX_SOURCE_PACKETS: f64 = 5e7;

#[derive(Debug, Clone, PartialEq)]
pub enum BurstSize {
    Duration(f64),
    /// Fraction of the buffer; the duration is `fraction · B / rate`.
    Fraction(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SizeDist {
    Default,
    File { path: PathBuf, cdf: SizeCdf },
    Points(SizeCdf),
}

impl SizeDist {
    pub fn cdf(&self) -> SizeCdf {
        match self {
            SizeDist::Default => SizeCdf::synthetic_default(),
            SizeDist::File { cdf, .. } | SizeDist::Points(cdf) => cdf.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SourceKind {
    /// One packet every `1/rate` from `start` until `stop` (or the horizon).
    Constant {
        rate: f64,
        start: f64,
        stop: Option<f64>,
    },
    /// An aggregate incast of normalized rate `rate`.
    Burst { rate: f64, size: BurstSize, start: f64 },
    /// Flows arrive as a Poisson process; each flow sends its size in packets
    /// at `flow_rate`.
    Poisson {
        mean_interarrival: f64,
        flow_rate: f64,
        sizes: SizeDist,
        start: f64,
        stop: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec {
    pub port: usize,
    pub class: ClassId,
    pub kind: SourceKind,
}

impl SourceSpec {
    pub fn start(&self) -> f64 {
        match &self.kind {
            SourceKind::Constant { start, .. }
            | SourceKind::Burst { start, .. }
            | SourceKind::Poisson { start, .. } => *start,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub buffer: u64,
    pub ports: usize,
    pub mode: QueueMode,
    pub congestion_threshold: u64,
    pub classes: Vec<TrafficClass>,
    pub policy: PolicyKind,
    pub sources: Vec<SourceSpec>,
    pub horizon: f64,
    pub seed: u64,
    pub sample_interval: f64,
    /// Age of the aggregate state that thresholds are computed from.
    pub staleness: f64,
    /// Stop after this many events; the trace is then marked incomplete.
    pub max_events: Option<u64>,
}

impl ScenarioConfig {
    pub fn layout(&self) -> SwitchLayout {
        SwitchLayout::new(self.buffer, self.ports, self.mode, self.classes.clone()).expect("validated layout")
    }

    pub fn alpha_table(&self) -> AlphaTable {
        AlphaTable::from_layout(&self.layout())
    }

    pub fn class(&self, id: ClassId) -> Option<&TrafficClass> {
        self.classes.iter().find(|c| c.id == id)
    }

    /// Check every invariant the engine relies on.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.buffer == 0 {
            return Err(inv("switch.buffer", "must be at least 1 packet"));
        }
        if self.ports == 0 {
            return Err(inv("switch.ports", "must be at least 1"));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(inv("horizon", format!("must be positive, got {}", self.horizon)));
        }
        if !(self.sample_interval.is_finite() && self.sample_interval > 0.0) {
            return Err(inv(
                "switch.sample_interval",
                format!("must be positive, got {}", self.sample_interval),
            ));
        }
        if self.horizon / self.sample_interval > MAX_SOURCE_PACKETS {
            return Err(inv(
                "switch.sample_interval",
                format!("too many occupancy samples over horizon {}", self.horizon),
            ));
        }
        if !(self.staleness.is_finite() && self.staleness >= 0.0) {
            return Err(inv(
                "switch.staleness",
                format!("must be >= 0, got {}", self.staleness),
            ));
        }
        if self.classes.is_empty() {
            return Err(inv("classes", "at least one class is required"));
        }
        let mut seen = BTreeSet::new();
        for (i, c) in self.classes.iter().enumerate() {
            if !seen.insert(c.id) {
                return Err(inv(
                    format!("classes[{i}].id"),
                    format!("duplicate class {}", c.id),
                ));
            }
            if !c.alpha.is_positive() {
                return Err(inv(
                    format!("classes[{i}].alpha"),
                    format!("must be > 0, got {}", c.alpha),
                ));
            }
        }
        match self.policy {
            PolicyKind::FbSingleQueue if self.mode != QueueMode::Single => {
                return Err(inv("policy.kind", "fb-single requires switch.mode = \"single\""));
            }
            PolicyKind::Fba(FbaPeriod::Every(p)) if !(p.is_finite() && p > 0.0) => {
                return Err(inv("policy.fba_period", format!("must be positive, got {p}")));
            }
            _ => {}
        }
        for (i, s) in self.sources.iter().enumerate() {
            let field = |f: &str| format!("sources[{i}].{f}");
            if s.port >= self.ports {
                return Err(inv(
                    field("port"),
                    format!("port {} out of range 0..{}", s.port, self.ports),
                ));
            }
            if self.class(s.class).is_none() {
                return Err(inv(field("class"), format!("class {} is not defined", s.class)));
            }
            let positive = |name: &str, x: f64| {
                if x.is_finite() && x > 0.0 {
                    Ok(())
                } else {
                    Err(inv(field(name), format!("must be positive, got {x}")))
                }
            };
            let start = s.start();
            if !(start.is_finite() && start >= 0.0) {
                return Err(inv(field("start"), format!("must be >= 0, got {start}")));
            }
            if start >= self.horizon {
                return Err(inv(
                    field("start"),
                    format!("starts at {start}, not before the horizon {}", self.horizon),
                ));
            }
            let span = self.horizon - start;
            let expected = match &s.kind {
                SourceKind::Constant { rate, stop, .. } => {
                    positive("rate", *rate)?;
                    check_stop(&field("stop"), start, *stop)?;
                    rate * span
                }
                SourceKind::Burst { rate, size, .. } => {
                    positive("rate", *rate)?;
                    match size {
                        BurstSize::Duration(d) => {
                            positive("duration", *d)?;
                            rate * d
                        }
                        BurstSize::Fraction(f) => {
                            positive("size_fraction", *f)?;
                            f * self.buffer as f64
                        }
                    }
                }
                SourceKind::Poisson {
                    mean_interarrival,
                    flow_rate,
                    stop,
                    ..
                } => {
                    positive("mean_interarrival", *mean_interarrival)?;
                    positive("flow_rate", *flow_rate)?;
                    check_stop(&field("stop"), start, *stop)?;
                    span / mean_interarrival
                }
            };
            if expected > MAX_SOURCE_PACKETS {
                return Err(inv(
                    field("kind"),
                    format!("would generate about {expected:.0} arrivals, limit is {MAX_SOURCE_PACKETS}"),
                ));
            }
        }
        Ok(())
    }
}

fn inv(field: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::invalid(field, message)
}

fn check_stop(field: &str, start: f64, stop: Option<f64>) -> Result<(), ConfigError> {
    match stop {
        Some(s) if !(s.is_finite() && s > start) => Err(ConfigError::invalid(
            field,
            format!("must be after start {start}, got {s}"),
        )),
        _ => Ok(()),
    }
}

/// Parse `"p/q"`, an integer, or a decimal such as `"0.5"` into an exact
/// fraction with numerator and denominator at most [`ALPHA_LIMIT`].
pub fn parse_alpha(text: &str) -> Result<Frac, String> {
    let t = text.trim();
    let frac = if let Some((n, d)) = t.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|e| format!("numerator {n:?}: {e}"))?;
        let d: i64 = d.trim().parse().map_err(|e| format!("denominator {d:?}: {e}"))?;
        if d == 0 {
            return Err("zero denominator".into());
        }
        if n.abs() > ALPHA_LIMIT || d.abs() > ALPHA_LIMIT {
            return Err(format!("numerator and denominator must be at most {ALPHA_LIMIT}"));
        }
        Frac::new(n, d)
    } else if let Some((int, dec)) = t.split_once('.') {
        if dec.len() > 6 || !dec.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("{t:?}: at most 6 decimal digits"));
        }
        let negative = int.starts_with('-');
        let whole: i64 = if int.is_empty() || int == "-" {
            0
        } else {
            int.parse().map_err(|e| format!("{t:?}: {e}"))?
        };
        if whole.abs() > ALPHA_LIMIT {
            return Err(format!("{t:?} exceeds {ALPHA_LIMIT}"));
        }
        let scale = 10i64.pow(dec.len() as u32);
        let part: i64 = if dec.is_empty() {
            0
        } else {
            dec.parse().map_err(|e| format!("{t:?}: {e}"))?
        };
        let mag = Frac::new(whole.abs() * scale + part, scale);
        if negative {
            -mag
        } else {
            mag
        }
    } else {
        let n: i64 = t.parse().map_err(|e| format!("{t:?}: {e}"))?;
        if n.abs() > ALPHA_LIMIT {
            return Err(format!("{t:?} exceeds {ALPHA_LIMIT}"));
        }
        Frac::from_integer(n)
    };
    if frac.numer().abs() > ALPHA_LIMIT || *frac.denom() > ALPHA_LIMIT {
        return Err(format!("{t:?}: reduced fraction exceeds {ALPHA_LIMIT}"));
    }
    Ok(frac)
}

pub fn format_alpha(a: Frac) -> String {
    if a.denom() == &1 {
        a.numer().to_string()
    } else {
        format!("{}/{}", a.numer(), a.denom())
    }
}

// On-disk shape.

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    #[serde(default)]
    name: String,
    horizon: f64,
    #[serde(default)]
    seed: u64,
    switch: RawSwitch,
    policy: RawPolicy,
    classes: Vec<RawClass>,
    #[serde(default)]
    sources: Vec<RawSource>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSwitch {
    buffer: u64,
    ports: usize,
    #[serde(default)]
    mode: QueueMode,
    #[serde(default)]
    congestion_threshold: u64,
    #[serde(default = "default_sample_interval")]
    sample_interval: f64,
    #[serde(default)]
    staleness: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_events: Option<u64>,
}

fn default_sample_interval() -> f64 {
    DEFAULT_SAMPLE_INTERVAL
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RawPeriod {
    Every(f64),
    Word(String),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPolicy {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fba_period: Option<RawPeriod>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RawAlpha {
    Int(i64),
    Float(f64),
    Text(String),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawClass {
    id: u32,
    alpha: RawAlpha,
    priority: u32,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum RawSource {
    Constant {
        port: usize,
        class: u32,
        rate: f64,
        #[serde(default)]
        start: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        stop: Option<f64>,
    },
    Burst {
        port: usize,
        class: u32,
        rate: f64,
        #[serde(default)]
        start: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        duration: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        size_fraction: Option<f64>,
    },
    Poisson {
        port: usize,
        class: u32,
        mean_interarrival: f64,
        #[serde(default = "one")]
        flow_rate: f64,
        #[serde(default)]
        start: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        stop: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cdf: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cdf_file: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cdf_points: Option<Vec<(u64, f64)>>,
    },
}

fn one() -> f64 {
    1.0
}

fn value_err(field: impl Into<String>, message: impl Into<String>) -> ParseError {
    ParseError::Value {
        field: field.into(),
        message: message.into(),
    }
}

fn decode_policy(raw: &RawPolicy) -> Result<PolicyKind, ParseError> {
    let kind = match raw.kind.as_str() {
        "cs" => PolicyKind::CompleteSharing,
        "dt" => PolicyKind::DynamicThresholds,
        "fb" => PolicyKind::Fb,
        "fb-single" => PolicyKind::FbSingleQueue,
        "fba" => {
            let period = match &raw.fba_period {
                None => FbaPeriod::Every(1.0),
                Some(RawPeriod::Every(p)) => FbaPeriod::Every(*p),
                Some(RawPeriod::Word(w)) if w == "event" => FbaPeriod::PerEvent,
                Some(RawPeriod::Word(w)) => {
                    return Err(value_err(
                        "policy.fba_period",
                        format!("expected a number or \"event\", got {w:?}"),
                    ))
                }
            };
            PolicyKind::Fba(period)
        }
        other => {
            return Err(value_err(
                "policy.kind",
                format!("unknown policy {other:?} (expected cs, dt, fb, fb-single or fba)"),
            ))
        }
    };
    if raw.fba_period.is_some() && !matches!(kind, PolicyKind::Fba(_)) {
        return Err(value_err("policy.fba_period", "only valid with kind = \"fba\""));
    }
    Ok(kind)
}

fn decode_alpha(field: String, raw: &RawAlpha) -> Result<Frac, ParseError> {
    let text = match raw {
        RawAlpha::Int(n) => n.to_string(),
        RawAlpha::Float(x) => {
            if !x.is_finite() {
                return Err(value_err(field, format!("{x} is not finite")));
            }
            format!("{x}")
        }
        RawAlpha::Text(s) => s.clone(),
    };
    parse_alpha(&text).map_err(|m| value_err(field, m))
}

fn decode_source(i: usize, raw: &RawSource, base: Option<&Path>) -> Result<SourceSpec, ParseError> {
    Ok(match raw {
        RawSource::Constant {
            port,
            class,
            rate,
            start,
            stop,
        } => SourceSpec {
            port: *port,
            class: ClassId(*class),
            kind: SourceKind::Constant {
                rate: *rate,
                start: *start,
                stop: *stop,
            },
        },
        RawSource::Burst {
            port,
            class,
            rate,
            start,
            duration,
            size_fraction,
        } => {
            let size = match (duration, size_fraction) {
                (Some(d), None) => BurstSize::Duration(*d),
                (None, Some(f)) => BurstSize::Fraction(*f),
                _ => {
                    return Err(value_err(
                        format!("sources[{i}]"),
                        "burst needs exactly one of duration or size_fraction",
                    ))
                }
            };
            SourceSpec {
                port: *port,
                class: ClassId(*class),
                kind: SourceKind::Burst {
                    rate: *rate,
                    size,
                    start: *start,
                },
            }
        }
        RawSource::Poisson {
            port,
            class,
            mean_interarrival,
            flow_rate,
            start,
            stop,
            cdf,
            cdf_file,
            cdf_points,
        } => {
            let field = format!("sources[{i}]");
            let sizes = match (cdf.as_deref(), cdf_file, cdf_points) {
                (None | Some("default"), None, None) => SizeDist::Default,
                (Some(other), None, None) => {
                    return Err(value_err(
                        format!("{field}.cdf"),
                        format!("unknown distribution {other:?} (only \"default\" is built in)"),
                    ))
                }
                (None, Some(path), None) => {
                    let path = PathBuf::from(path);
                    let resolved = match base {
                        Some(dir) if path.is_relative() => dir.join(&path),
                        _ => path.clone(),
                    };
                    let cdf = load_cdf(&resolved).map_err(|e| {
                        value_err(
                            format!("{field}.cdf_file"),
                            format!("{}: {e}", resolved.display()),
                        )
                    })?;
                    SizeDist::File { path, cdf }
                }
                (None, None, Some(points)) => SizeDist::Points(
                    SizeCdf::new(points.clone()).map_err(|m| value_err(format!("{field}.cdf_points"), m))?,
                ),
                _ => return Err(value_err(field, "give at most one of cdf, cdf_file, cdf_points")),
            };
            SourceSpec {
                port: *port,
                class: ClassId(*class),
                kind: SourceKind::Poisson {
                    mean_interarrival: *mean_interarrival,
                    flow_rate: *flow_rate,
                    sizes,
                    start: *start,
                    stop: *stop,
                },
            }
        }
    })
}

/// Decode a scenario without validating it. `base` resolves relative
/// `cdf_file` paths.
pub fn decode_scenario(text: &str, base: Option<&Path>) -> Result<ScenarioConfig, ParseError> {
    let raw: RawScenario = toml::from_str(text)?;
    let classes = raw
        .classes
        .iter()
        .enumerate()
        .map(|(i, c)| {
            Ok(TrafficClass {
                id: ClassId(c.id),
                alpha: decode_alpha(format!("classes[{i}].alpha"), &c.alpha)?,
                priority: PriorityId(c.priority),
            })
        })
        .collect::<Result<Vec<_>, ParseError>>()?;
    let sources = raw
        .sources
        .iter()
        .enumerate()
        .map(|(i, s)| decode_source(i, s, base))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ScenarioConfig {
        name: raw.name,
        buffer: raw.switch.buffer,
        ports: raw.switch.ports,
        mode: raw.switch.mode,
        congestion_threshold: raw.switch.congestion_threshold,
        classes,
        policy: decode_policy(&raw.policy)?,
        sources,
        horizon: raw.horizon,
        seed: raw.seed,
        sample_interval: raw.switch.sample_interval,
        staleness: raw.switch.staleness,
        max_events: raw.switch.max_events,
    })
}

/// Decode and validate.
pub fn parse_scenario(text: &str, base: Option<&Path>) -> Result<ScenarioConfig, ScenarioError> {
    let cfg = decode_scenario(text, base)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_scenario(path: &Path) -> Result<ScenarioConfig, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(ParseError::from)?;
    parse_scenario(&text, path.parent())
}

fn encode_source(s: &SourceSpec) -> RawSource {
    let port = s.port;
    let class = s.class.0;
    match &s.kind {
        SourceKind::Constant { rate, start, stop } => RawSource::Constant {
            port,
            class,
            rate: *rate,
            start: *start,
            stop: *stop,
        },
        SourceKind::Burst { rate, size, start } => {
            let (duration, size_fraction) = match size {
                BurstSize::Duration(d) => (Some(*d), None),
                BurstSize::Fraction(f) => (None, Some(*f)),
            };
            RawSource::Burst {
                port,
                class,
                rate: *rate,
                start: *start,
                duration,
                size_fraction,
            }
        }
        SourceKind::Poisson {
            mean_interarrival,
            flow_rate,
            sizes,
            start,
            stop,
        } => {
            let (cdf, cdf_file, cdf_points) = match sizes {
                SizeDist::Default => (Some("default".to_string()), None, None),
                SizeDist::File { path, .. } => (None, Some(path.display().to_string()), None),
                SizeDist::Points(c) => (None, None, Some(c.points().to_vec())),
            };
            RawSource::Poisson {
                port,
                class,
                mean_interarrival: *mean_interarrival,
                flow_rate: *flow_rate,
                start: *start,
                stop: *stop,
                cdf,
                cdf_file,
                cdf_points,
            }
        }
    }
}

/// Serialize to the on-disk form. Parsing the output yields `cfg` again.
pub fn serialize_scenario(cfg: &ScenarioConfig) -> String {
    let (kind, fba_period) = match cfg.policy {
        PolicyKind::Fba(FbaPeriod::Every(p)) => ("fba", Some(RawPeriod::Every(p))),
        PolicyKind::Fba(FbaPeriod::PerEvent) => ("fba", Some(RawPeriod::Word("event".into()))),
        other => (other.label(), None),
    };
    let raw = RawScenario {
        name: cfg.name.clone(),
        horizon: cfg.horizon,
        seed: cfg.seed,
        switch: RawSwitch {
            buffer: cfg.buffer,
            ports: cfg.ports,
            mode: cfg.mode,
            congestion_threshold: cfg.congestion_threshold,
            sample_interval: cfg.sample_interval,
            staleness: cfg.staleness,
            max_events: cfg.max_events,
        },
        policy: RawPolicy {
            kind: kind.to_string(),
            fba_period,
        },
        classes: cfg
            .classes
            .iter()
            .map(|c| RawClass {
                id: c.id.0,
                alpha: RawAlpha::Text(format_alpha(c.alpha)),
                priority: c.priority.0,
            })
            .collect(),
        sources: cfg.sources.iter().map(encode_source).collect(),
    };
    toml::to_string(&raw).expect("scenario serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
name = "sample"
horizon = 100.0
seed = 3

[switch]
buffer = 60
ports = 2

[policy]
kind = "fba"
fba_period = "event"

[[classes]]
id = 0
alpha = "1/2"
priority = 0

[[classes]]
id = 1
alpha = 2
priority = 1

[[sources]]
kind = "constant"
port = 1
class = 0
rate = 2.0

[[sources]]
kind = "burst"
port = 0
class = 1
rate = 5.0
size_fraction = 0.3
start = 50.0

[[sources]]
kind = "poisson"
port = 1
class = 0
mean_interarrival = 10.0
cdf_points = [[1, 0.5], [10, 1.0]]
"#;

    #[test]
    fn parses_sample() {
        let cfg = parse_scenario(SAMPLE, None).unwrap();
        assert_eq!(cfg.classes[0].alpha, Frac::new(1, 2));
        assert_eq!(cfg.policy, PolicyKind::Fba(FbaPeriod::PerEvent));
        assert_eq!(cfg.sample_interval, DEFAULT_SAMPLE_INTERVAL);
        assert_eq!(cfg.sources.len(), 3);
    }

    #[test]
    fn round_trip_is_identity() {
        let cfg = parse_scenario(SAMPLE, None).unwrap();
        let again = parse_scenario(&serialize_scenario(&cfg), None).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn alpha_forms() {
        assert_eq!(parse_alpha("3/6"), Ok(Frac::new(1, 2)));
        assert_eq!(parse_alpha("0.25"), Ok(Frac::new(1, 4)));
        assert_eq!(parse_alpha("20"), Ok(Frac::from_integer(20)));
        assert_eq!(parse_alpha(".5"), Ok(Frac::new(1, 2)));
        assert!(parse_alpha("1/0").is_err());
        assert!(parse_alpha("2000000").is_err());
        assert!(parse_alpha("0.1234567").is_err());
        assert!(parse_alpha("abc").is_err());
    }

    #[test]
    fn bad_alpha_is_a_validation_error() {
        let text = SAMPLE.replace("alpha = \"1/2\"", "alpha = \"-1/2\"");
        match parse_scenario(&text, None) {
            Err(ScenarioError::Config(ConfigError::Invalid { field, .. })) => {
                assert_eq!(field, "classes[0].alpha")
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_input_is_a_parse_error() {
        assert!(matches!(
            parse_scenario("horizon = [", None),
            Err(ScenarioError::Parse(_))
        ));
        let text = SAMPLE.replace("kind = \"fba\"", "kind = \"red\"");
        assert!(matches!(
            parse_scenario(&text, None),
            Err(ScenarioError::Parse(ParseError::Value { .. }))
        ));
        let text = SAMPLE.replace("seed = 3", "seed = 3\ncolour = 1");
        assert!(matches!(
            parse_scenario(&text, None),
            Err(ScenarioError::Parse(_))
        ));
    }

    #[test]
    fn source_checks() {
        let text = SAMPLE.replace(
            "port = 1\nclass = 0\nrate = 2.0",
            "port = 9\nclass = 0\nrate = 2.0",
        );
        assert!(matches!(
            parse_scenario(&text, None),
            Err(ScenarioError::Config(_))
        ));
        let text = SAMPLE.replace("start = 50.0", "start = 150.0");
        assert!(matches!(
            parse_scenario(&text, None),
            Err(ScenarioError::Config(_))
        ));
    }
}
