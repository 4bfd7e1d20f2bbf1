//! Built-in scenarios on a 60-packet buffer.

use super::config::{BurstSize, ScenarioConfig, SourceKind, SourceSpec, DEFAULT_SAMPLE_INTERVAL};
use crate::error::ConfigError;
use crate::model::{ClassId, Frac, PriorityId, QueueMode, TrafficClass};
use crate::policy::PolicyKind;

pub const PRESET_BUFFER: u64 = 60;

/// Time at which bursts start, after the background queues have settled.
pub const WARMUP: f64 = 50.0;

/// Start offset between consecutive sources of the steady presets.
pub const STAGGER: f64 = 0.125;

pub const PRESETS: &[(&str, &str)] = &[
    (
        "fig2",
        "DT; Q1 (alpha 1) alone, then Q2 (alpha 2) on another port from t=100",
    ),
    (
        "fig4_steady",
        "DT; one high queue (alpha 2) and three low queues (alpha 1), own ports",
    ),
    (
        "fig4_incast",
        "DT; five low queues on one port, then a 5:1 high-priority incast",
    ),
    ("fig5_steady", "FB; the fig4_steady layout"),
    ("fig5_incast", "FB; the fig4_incast layout"),
    (
        "dt_scaling",
        "DT; one high and one low queue, for sweeping n_low_queues",
    ),
];

fn class(id: u32, alpha: i64, priority: u32) -> TrafficClass {
    TrafficClass {
        id: ClassId(id),
        alpha: Frac::from_integer(alpha),
        priority: PriorityId(priority),
    }
}

fn constant(port: usize, class: u32, rate: f64, start: f64) -> SourceSpec {
    SourceSpec {
        port,
        class: ClassId(class),
        kind: SourceKind::Constant {
            rate,
            start,
            stop: None,
        },
    }
}

fn base(name: &str, policy: PolicyKind, ports: usize, classes: Vec<TrafficClass>) -> ScenarioConfig {
    ScenarioConfig {
        name: name.to_string(),
        buffer: PRESET_BUFFER,
        ports,
        mode: QueueMode::Multi,
        congestion_threshold: 0,
        classes,
        policy,
        sources: Vec::new(),
        horizon: 200.0,
        seed: 1,
        sample_interval: DEFAULT_SAMPLE_INTERVAL,
        staleness: 0.0,
        max_events: None,
    }
}

/// High-priority queue on port 0, low queues on ports 1..=3, all saturated.
///
/// Sources start a fraction of a service time apart. In lockstep every port
/// dequeues at the same instant, occupancy dips by one packet per port at
/// once, and the queues settle wherever the tie order leaves them instead of
/// at their thresholds.
fn steady(name: &str, policy: PolicyKind) -> ScenarioConfig {
    let mut cfg = base(name, policy, 4, vec![class(0, 1, 0), class(1, 2, 1)]);
    cfg.sources.push(constant(0, 1, 2.0, 0.0));
    for p in 1..4 {
        cfg.sources.push(constant(p, 0, 2.0, p as f64 * STAGGER));
    }
    cfg
}

/// Five low classes sharing port 1 (one queue each), and a high-priority
/// burst of rate 5 for 4 time units into empty port 0.
fn incast(name: &str, policy: PolicyKind) -> ScenarioConfig {
    let mut classes: Vec<TrafficClass> = (0..5).map(|c| class(c, 1, 0)).collect();
    classes.push(class(5, 2, 1));
    let mut cfg = base(name, policy, 2, classes);
    cfg.horizon = 80.0;
    for c in 0..5 {
        cfg.sources.push(constant(1, c, 1.0, 0.0));
    }
    cfg.sources.push(SourceSpec {
        port: 0,
        class: ClassId(5),
        kind: SourceKind::Burst {
            rate: 5.0,
            size: BurstSize::Duration(4.0),
            start: WARMUP,
        },
    });
    cfg
}

pub fn preset(name: &str) -> Result<ScenarioConfig, ConfigError> {
    Ok(match name {
        "fig2" => {
            let mut cfg = base(
                name,
                PolicyKind::DynamicThresholds,
                2,
                vec![class(0, 1, 0), class(1, 2, 1)],
            );
            cfg.horizon = 250.0;
            cfg.sources.push(constant(1, 0, 2.0, 0.0));
            cfg.sources.push(constant(0, 1, 2.0, 100.0));
            cfg
        }
        "fig4_steady" => steady(name, PolicyKind::DynamicThresholds),
        "fig5_steady" => steady(name, PolicyKind::Fb),
        "fig4_incast" => incast(name, PolicyKind::DynamicThresholds),
        "fig5_incast" => incast(name, PolicyKind::Fb),
        "dt_scaling" => {
            let mut cfg = base(
                name,
                PolicyKind::DynamicThresholds,
                2,
                vec![class(0, 1, 0), class(1, 2, 1)],
            );
            cfg.sources.push(constant(0, 1, 2.0, 0.0));
            cfg.sources.push(constant(1, 0, 2.0, 0.0));
            cfg
        }
        other => {
            let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
            return Err(ConfigError::invalid(
                "preset",
                format!("unknown preset {other:?}; expected one of {}", names.join(", ")),
            ));
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_listed_preset_is_valid() {
        for (name, _) in PRESETS {
            let cfg = preset(name).unwrap();
            cfg.validate().unwrap();
            assert_eq!(cfg.buffer, 60);
        }
        assert!(preset("fig9").is_err());
    }

    #[test]
    fn incast_layout() {
        let cfg = preset("fig4_incast").unwrap();
        assert_eq!(cfg.classes.len(), 6);
        let lows = cfg.sources.iter().filter(|s| s.port == 1).count();
        assert_eq!(lows, 5);
    }
}
