use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use super::config::{BurstSize, ScenarioConfig, SourceKind, SourceSpec};
use crate::error::SweepError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Offered rate of every lowest-priority background source.
    Load,
    /// Burst size as a fraction of the buffer.
    BurstSize,
    /// Number of lowest-priority saturated queues, one per port.
    NLowQueues,
    /// Burst rate.
    Rate,
}

impl SweepAxis {
    pub fn label(&self) -> &'static str {
        match self {
            SweepAxis::Load => "load",
            SweepAxis::BurstSize => "burst_size",
            SweepAxis::NLowQueues => "n_low_queues",
            SweepAxis::Rate => "r",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "load" => Ok(SweepAxis::Load),
            "burst_size" => Ok(SweepAxis::BurstSize),
            "n_low_queues" => Ok(SweepAxis::NLowQueues),
            "r" => Ok(SweepAxis::Rate),
            other => Err(format!(
                "unknown axis {other:?} (expected load, burst_size, n_low_queues or r)"
            )),
        }
    }
}

fn incompatible(axis: SweepAxis, reason: impl Into<String>) -> SweepError {
    SweepError::IncompatibleAxis {
        axis: axis.to_string(),
        reason: reason.into(),
    }
}

fn is_low(base: &ScenarioConfig, s: &SourceSpec) -> bool {
    let lowest = base.classes.iter().map(|c| c.priority).min();
    base.class(s.class).map(|c| c.priority) == lowest
}

fn positive(axis: SweepAxis, v: f64) -> Result<(), SweepError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(incompatible(axis, format!("value {v} must be positive")))
    }
}

/// One configuration per value; everything except the swept quantity is
/// copied from `base`.
pub fn sweep(
    base: &ScenarioConfig,
    axis: SweepAxis,
    values: &[f64],
) -> Result<Vec<ScenarioConfig>, SweepError> {
    if values.is_empty() {
        return Ok(Vec::new());
    }
    let bursts = base
        .sources
        .iter()
        .any(|s| matches!(s.kind, SourceKind::Burst { .. }));
    match axis {
        SweepAxis::BurstSize | SweepAxis::Rate if !bursts => {
            return Err(incompatible(axis, "scenario has no burst source"));
        }
        SweepAxis::Load => {
            let any = base.sources.iter().any(|s| {
                is_low(base, s) && matches!(s.kind, SourceKind::Constant { .. } | SourceKind::Poisson { .. })
            });
            if !any {
                return Err(incompatible(
                    axis,
                    "scenario has no low-priority background source",
                ));
            }
        }
        _ => {}
    }
    values
        .iter()
        .map(|&v| {
            positive(axis, v)?;
            let mut cfg = base.clone();
            match axis {
                SweepAxis::Load => {
                    for s in cfg.sources.iter_mut().filter(|s| is_low(base, s)) {
                        match &mut s.kind {
                            SourceKind::Constant { rate, .. } => *rate = v,
                            SourceKind::Poisson {
                                mean_interarrival,
                                sizes,
                                ..
                            } => {
                                // offered packets per time unit = mean size / gap
                                *mean_interarrival = sizes.cdf().mean() / v;
                            }
                            SourceKind::Burst { .. } => {}
                        }
                    }
                }
                SweepAxis::BurstSize => {
                    for s in &mut cfg.sources {
                        if let SourceKind::Burst { size, .. } = &mut s.kind {
                            *size = BurstSize::Fraction(v);
                        }
                    }
                }
                SweepAxis::Rate => {
                    for s in &mut cfg.sources {
                        if let SourceKind::Burst { rate, .. } = &mut s.kind {
                            *rate = v;
                        }
                    }
                }
                SweepAxis::NLowQueues => set_low_queues(base, &mut cfg, v)?,
            }
            cfg.validate()
                .map_err(|e| incompatible(axis, format!("value {v}: {e}")))?;
            Ok(cfg)
        })
        .collect()
}

fn set_low_queues(base: &ScenarioConfig, cfg: &mut ScenarioConfig, v: f64) -> Result<(), SweepError> {
    let axis = SweepAxis::NLowQueues;
    if v.fract() != 0.0 || v > 4096.0 {
        return Err(incompatible(axis, format!("value {v} is not a queue count")));
    }
    let n = v as usize;
    let (lows, rest): (Vec<SourceSpec>, Vec<SourceSpec>) = base
        .sources
        .iter()
        .cloned()
        .partition(|s| is_low(base, s) && matches!(s.kind, SourceKind::Constant { .. }));
    let Some(template) = lows.first() else {
        return Err(incompatible(
            axis,
            "scenario has no saturated low-priority source",
        ));
    };
    let ports: BTreeSet<usize> = lows.iter().map(|s| s.port).collect();
    if lows.iter().any(|s| s.class != template.class) || ports.len() != lows.len() {
        return Err(incompatible(
            axis,
            "low-priority sources must share one class and sit on distinct ports",
        ));
    }
    let taken: BTreeSet<usize> = rest.iter().map(|s| s.port).collect();
    let free = (0..).filter(|p| !taken.contains(p)).take(n);
    let mut sources = rest;
    let mut top = 0;
    for port in free {
        top = top.max(port + 1);
        sources.push(SourceSpec {
            port,
            ..template.clone()
        });
    }
    cfg.ports = base.ports.max(top);
    cfg.sources = sources;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workload::presets::preset;

    #[test]
    fn burst_size_axis() {
        let base = preset("fig4_incast").unwrap();
        let values: Vec<f64> = (1..=9).map(|k| k as f64 / 10.0).collect();
        let out = sweep(&base, SweepAxis::BurstSize, &values).unwrap();
        assert_eq!(out.len(), 9);
        for (cfg, v) in out.iter().zip(&values) {
            let mut reset = cfg.clone();
            for (s, b) in reset.sources.iter_mut().zip(&base.sources) {
                if let SourceKind::Burst { size, .. } = &mut s.kind {
                    assert_eq!(*size, BurstSize::Fraction(*v));
                    *s = b.clone();
                }
            }
            assert_eq!(reset, base);
        }
    }

    #[test]
    fn low_queue_axis() {
        let base = preset("dt_scaling").unwrap();
        let values: Vec<f64> = (1..=32).map(f64::from).collect();
        let out = sweep(&base, SweepAxis::NLowQueues, &values).unwrap();
        assert_eq!(out.len(), 32);
        assert_eq!(out[31].ports, 33);
        assert_eq!(out[31].sources.len(), 33);
        assert_eq!(out[0], base);
    }

    #[test]
    fn empty_and_incompatible() {
        let base = preset("fig4_steady").unwrap();
        assert!(sweep(&base, SweepAxis::Rate, &[]).unwrap().is_empty());
        assert!(matches!(
            sweep(&base, SweepAxis::Rate, &[2.0]),
            Err(SweepError::IncompatibleAxis { .. })
        ));
        let incast = preset("fig4_incast").unwrap();
        assert!(sweep(&incast, SweepAxis::NLowQueues, &[3.0]).is_err());
    }
}
