use std::collections::BTreeMap;
use std::io::Write;

use num_rational::BigRational;

use super::omega::{FluidPolicy, FluidQueueSpec};
use super::transient::{analyze, Case, Extended, TransientScenario};
use crate::error::FluidError;
use crate::model::{PriorityId, QueueId};

/// 1 MB of 1500-byte packets.
pub const FIG12_BUFFER_PACKETS: i64 = 667;

#[derive(Debug, Clone, PartialEq)]
pub struct CurveConfig {
    pub buffer: BigRational,
    pub alpha_low: BigRational,
    pub alpha_high: BigRational,
    pub rates: Vec<BigRational>,
    /// Numbers of pre-occupied low-priority queues, each on its own port.
    pub counts: Vec<usize>,
}

impl Default for CurveConfig {
    fn default() -> Self {
        CurveConfig {
            buffer: super::int(FIG12_BUFFER_PACKETS),
            alpha_low: super::ratio(1, 2),
            alpha_high: super::int(20),
            rates: (2..=32).map(super::int).collect(),
            counts: vec![1, 2, 4, 8, 16, 32],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub scheme: &'static str,
    pub rate: BigRational,
    pub n_low_queues: usize,
    pub case: Case,
    pub t1: Extended,
    pub burst_tolerance: Extended,
}

fn scenario(cfg: &CurveConfig, policy: FluidPolicy, count: usize, rate: &BigRational) -> TransientScenario {
    let old: Vec<FluidQueueSpec> = (1..=count)
        .map(|p| FluidQueueSpec {
            id: QueueId::new(p, 0),
            alpha: cfg.alpha_low.clone(),
            priority: PriorityId(0),
        })
        .collect();
    let new = [FluidQueueSpec {
        id: QueueId::new(0, 1),
        alpha: cfg.alpha_high.clone(),
        priority: PriorityId(1),
    }];
    TransientScenario::build(policy, cfg.buffer.clone(), &old, &new, rate.clone())
}

/// Burst tolerance of one high-priority queue arriving on an empty port while
/// `count` low-priority queues hold their steady share, for FB and DT.
pub fn burst_absorption_curve(cfg: &CurveConfig) -> Result<Vec<CurveRow>, FluidError> {
    let mut rows = Vec::with_capacity(2 * cfg.rates.len() * cfg.counts.len());
    for (scheme, policy) in [("fb", FluidPolicy::Fb), ("dt", FluidPolicy::Dt)] {
        for &count in &cfg.counts {
            for rate in &cfg.rates {
                let res = analyze(&scenario(cfg, policy, count, rate))?;
                let t1 = res.t1.ok_or(FluidError::NonPositiveDenominator)?;
                rows.push(CurveRow {
                    scheme,
                    rate: rate.clone(),
                    n_low_queues: count,
                    case: res.case,
                    burst_tolerance: t1.scale(rate),
                    t1,
                });
            }
        }
    }
    Ok(rows)
}

/// True when, at every rate, FB's single-queue burst tolerance is no larger
/// than the tolerance with any other number of pre-occupied queues.
pub fn fb_lower_bound_holds(rows: &[CurveRow]) -> bool {
    let mut by_rate: BTreeMap<&BigRational, Vec<&CurveRow>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.scheme == "fb") {
        by_rate.entry(&r.rate).or_default().push(r);
    }
    by_rate
        .values()
        .all(|group| match group.iter().find(|r| r.n_low_queues == 1) {
            Some(base) => group.iter().all(|r| base.burst_tolerance <= r.burst_tolerance),
            None => false,
        })
}

pub fn write_curve_csv<W: Write>(rows: &[CurveRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["scheme", "r", "n_low_queues", "case", "t1", "burst_tolerance"])?;
    for r in rows {
        w.write_record([
            r.scheme.to_string(),
            super::to_f64(&r.rate).to_string(),
            r.n_low_queues.to_string(),
            r.case.to_string(),
            r.t1.to_string(),
            r.burst_tolerance.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fb_single_queue_is_the_floor() {
        let rows = burst_absorption_curve(&CurveConfig::default()).unwrap();
        assert!(fb_lower_bound_holds(&rows));
    }

    #[test]
    fn dt_has_no_floor() {
        let cfg = CurveConfig {
            rates: vec![super::super::int(8)],
            counts: vec![1, 32, 256],
            ..Default::default()
        };
        let rows = burst_absorption_curve(&cfg).unwrap();
        let get = |scheme: &str, n: usize| {
            rows.iter()
                .find(|r| r.scheme == scheme && r.n_low_queues == n)
                .unwrap()
                .burst_tolerance
                .clone()
        };
        // once the old queues track their thresholds, DT keeps shrinking
        assert!(get("dt", 256) < get("dt", 32));
        assert!(get("dt", 32) < get("dt", 1));
        assert!(get("dt", 256) < get("fb", 1));
    }

    #[test]
    fn csv_has_header_and_rows() {
        let cfg = CurveConfig {
            rates: vec![super::super::int(4)],
            counts: vec![1],
            ..Default::default()
        };
        let rows = burst_absorption_curve(&cfg).unwrap();
        let mut buf = Vec::new();
        write_curve_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next(),
            Some("scheme,r,n_low_queues,case,t1,burst_tolerance")
        );
        assert_eq!(lines.count(), 2);
    }
}
