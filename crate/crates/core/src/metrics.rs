//! Run summaries computed from event traces.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Serialize, Serializer};

use crate::engine::{Action, EventTrace};
use crate::error::MetricsError;
use crate::model::ClassId;
use crate::workload::{ScenarioConfig, SourceKind};

/// Writes non-finite values as `"inf"`, `"-inf"` or `"nan"`.
fn ser_f64<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_str(&fmt_f64(*x))
    }
}

fn ser_opt_f64<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => ser_f64(v, s),
        None => s.serialize_none(),
    }
}

fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueueMetrics {
    pub queue: String,
    pub port: usize,
    pub arrivals: u64,
    pub admitted: u64,
    pub dropped: u64,
    pub departed: u64,
    pub final_length: u64,
    #[serde(serialize_with = "ser_f64")]
    pub first_drop_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ClassMetrics {
    pub arrivals: u64,
    pub admitted: u64,
    pub dropped: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetrics {
    pub queues: Vec<QueueMetrics>,
    pub classes: BTreeMap<ClassId, ClassMetrics>,
    /// Earliest drop anywhere; infinite when nothing was dropped.
    #[serde(serialize_with = "ser_f64")]
    pub first_drop_time: f64,
    /// First drop of a burst packet.
    #[serde(serialize_with = "ser_f64")]
    pub burst_first_drop_time: f64,
    /// Admitted over offered burst packets; 1 without bursts.
    pub burst_admitted_fraction: f64,
    /// From the first burst start until the last admitted burst packet
    /// departs. `None` without bursts or if a burst packet is still queued.
    #[serde(serialize_with = "ser_opt_f64")]
    pub burst_drain_completion_time: Option<f64>,
    /// Departures per time unit over the horizon, per port.
    pub throughput: Vec<f64>,
    pub occupancy_mean: f64,
    pub occupancy_p99: f64,
    pub occupancy_max: u64,
    /// The trace stopped early; totals cover only the processed events.
    pub partial: bool,
}

/// Nearest-rank percentile of `sorted` (ascending).
pub fn nearest_rank(sorted: &[u64], pct: f64) -> u64 {
    if sorted.is_empty() {
        return 0;
    }
    let rank = ((pct / 100.0) * sorted.len() as f64).ceil().max(1.0) as usize;
    sorted[rank.min(sorted.len()) - 1]
}

pub fn compute(trace: &EventTrace, cfg: &ScenarioConfig) -> RunMetrics {
    let totals = trace.totals();
    let mut first_drop = vec![f64::INFINITY; totals.len()];
    let mut classes: BTreeMap<ClassId, ClassMetrics> = cfg
        .classes
        .iter()
        .map(|c| (c.id, ClassMetrics::default()))
        .collect();
    let is_burst: Vec<bool> = cfg
        .sources
        .iter()
        .map(|s| matches!(s.kind, SourceKind::Burst { .. }))
        .collect();
    let burst_start = cfg
        .sources
        .iter()
        .filter(|s| matches!(s.kind, SourceKind::Burst { .. }))
        .map(|s| s.start())
        .fold(f64::INFINITY, f64::min);
    let (mut b_offered, mut b_admitted, mut b_departed) = (0u64, 0u64, 0u64);
    let mut b_last_departure = f64::NEG_INFINITY;
    let mut burst_first_drop = f64::INFINITY;
    let mut departures = vec![0u64; cfg.ports];
    let mut occ_max = 0u64;

    for r in &trace.records {
        let burst = is_burst.get(r.source).copied().unwrap_or(false);
        let c = classes.entry(r.class).or_default();
        match r.action {
            Action::Admitted => {
                c.arrivals += 1;
                c.admitted += 1;
                occ_max = occ_max.max(r.occupancy + 1);
                if burst {
                    b_offered += 1;
                    b_admitted += 1;
                }
            }
            Action::Dropped => {
                c.arrivals += 1;
                c.dropped += 1;
                first_drop[r.queue] = first_drop[r.queue].min(r.time);
                if burst {
                    b_offered += 1;
                    burst_first_drop = burst_first_drop.min(r.time);
                }
            }
            Action::Departed => {
                departures[r.port] += 1;
                if burst {
                    b_departed += 1;
                    b_last_departure = b_last_departure.max(r.time);
                }
            }
        }
    }

    let queues = totals
        .iter()
        .enumerate()
        .map(|(q, t)| QueueMetrics {
            queue: trace.queue_labels[q].clone(),
            port: trace.queue_ports[q],
            arrivals: t.arrivals,
            admitted: t.admitted,
            dropped: t.dropped,
            departed: t.departed,
            final_length: trace.final_lengths.get(q).copied().unwrap_or(0),
            first_drop_time: first_drop[q],
        })
        .collect();

    let mut occ: Vec<u64> = trace.samples.iter().map(|s| s.occupancy).collect();
    let mean = if occ.is_empty() {
        0.0
    } else {
        occ.iter().sum::<u64>() as f64 / occ.len() as f64
    };
    occ.sort_unstable();
    occ_max = occ_max.max(occ.last().copied().unwrap_or(0));

    RunMetrics {
        queues,
        classes,
        first_drop_time: first_drop.iter().copied().fold(f64::INFINITY, f64::min),
        burst_first_drop_time: burst_first_drop,
        burst_admitted_fraction: if b_offered == 0 {
            1.0
        } else {
            b_admitted as f64 / b_offered as f64
        },
        burst_drain_completion_time: (b_admitted > 0 && b_departed == b_admitted)
            .then_some(b_last_departure - burst_start),
        throughput: departures.iter().map(|&d| d as f64 / trace.horizon).collect(),
        occupancy_mean: mean,
        occupancy_p99: nearest_rank(&occ, 99.0) as f64,
        occupancy_max: occ_max,
        partial: !trace.complete,
    }
}

/// The scalar metrics compared across runs, by name.
fn scalars(m: &RunMetrics) -> Vec<(&'static str, f64)> {
    let drops: u64 = m.queues.iter().map(|q| q.dropped).sum();
    let thp = if m.throughput.is_empty() {
        0.0
    } else {
        m.throughput.iter().sum::<f64>() / m.throughput.len() as f64
    };
    vec![
        ("burst_admitted_fraction", m.burst_admitted_fraction),
        (
            "burst_drain_completion_time",
            m.burst_drain_completion_time.unwrap_or(f64::NAN),
        ),
        ("drops", drops as f64),
        ("first_drop_time", m.first_drop_time),
        ("occupancy_mean", m.occupancy_mean),
        ("occupancy_p99", m.occupancy_p99),
        ("occupancy_max", m.occupancy_max as f64),
        ("throughput_mean", thp),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Delta {
    pub label: String,
    pub metric: &'static str,
    #[serde(serialize_with = "ser_f64")]
    pub baseline: f64,
    #[serde(serialize_with = "ser_f64")]
    pub value: f64,
    /// `100 · (value − baseline) / baseline`; zero when both are equal.
    #[serde(serialize_with = "ser_f64")]
    pub delta_pct: f64,
}

fn pct(baseline: f64, value: f64) -> f64 {
    if baseline == value || (baseline.is_nan() && value.is_nan()) {
        0.0
    } else {
        100.0 * (value - baseline) / baseline
    }
}

/// Percentage change of each run against the run labelled `baseline`.
pub fn compare(runs: &[(String, RunMetrics)], baseline: &str) -> Result<Vec<Delta>, MetricsError> {
    if runs.len() < 2 {
        return Err(MetricsError::TooFewRuns(runs.len()));
    }
    let base = runs
        .iter()
        .find(|(l, _)| l == baseline)
        .map(|(_, m)| m)
        .ok_or_else(|| MetricsError::MissingBaseline(baseline.to_string()))?;
    let base_queues: Vec<&str> = base.queues.iter().map(|q| q.queue.as_str()).collect();
    let base_scalars = scalars(base);
    let mut out = Vec::new();
    for (label, m) in runs {
        let qs: Vec<&str> = m.queues.iter().map(|q| q.queue.as_str()).collect();
        if qs != base_queues {
            return Err(MetricsError::AxisMismatch { label: label.clone() });
        }
        if label == baseline {
            continue;
        }
        for ((name, b), (_, v)) in base_scalars.iter().zip(scalars(m)) {
            out.push(Delta {
                label: label.clone(),
                metric: name,
                baseline: *b,
                value: v,
                delta_pct: pct(*b, v),
            });
        }
    }
    Ok(out)
}

/// Per-queue CSV: `queue, port, arrivals, admitted, dropped, departed,
/// final_length, first_drop_time`.
pub fn write_metrics_csv<W: Write>(m: &RunMetrics, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "queue",
        "port",
        "arrivals",
        "admitted",
        "dropped",
        "departed",
        "final_length",
        "first_drop_time",
    ])?;
    for q in &m.queues {
        w.write_record([
            q.queue.clone(),
            q.port.to_string(),
            q.arrivals.to_string(),
            q.admitted.to_string(),
            q.dropped.to_string(),
            q.departed.to_string(),
            q.final_length.to_string(),
            fmt_f64(q.first_drop_time),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_deltas_csv<W: Write>(deltas: &[Delta], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["label", "metric", "baseline", "value", "delta_pct"])?;
    for d in deltas {
        w.write_record([
            d.label.clone(),
            d.metric.to_string(),
            fmt_f64(d.baseline),
            fmt_f64(d.value),
            fmt_f64(d.delta_pct),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::run;
    use crate::workload::preset;

    #[test]
    fn nearest_rank_examples() {
        let v: Vec<u64> = (1..=100).collect();
        assert_eq!(nearest_rank(&v, 99.0), 99);
        assert_eq!(nearest_rank(&v, 100.0), 100);
        assert_eq!(nearest_rank(&[5], 99.0), 5);
        assert_eq!(nearest_rank(&[], 99.0), 0);
    }

    #[test]
    fn idle_run() {
        let mut cfg = preset("fig2").unwrap();
        cfg.sources.clear();
        let m = compute(&run(&cfg).unwrap(), &cfg);
        assert_eq!(m.first_drop_time, f64::INFINITY);
        assert_eq!(m.burst_admitted_fraction, 1.0);
        assert!(m.throughput.iter().all(|&t| t == 0.0));
        let json = serde_json::to_string(&m).unwrap();
        assert!(json.contains("\"first_drop_time\":\"inf\""));
    }

    #[test]
    fn compare_errors_and_identity() {
        let cfg = preset("fig4_incast").unwrap();
        let m = compute(&run(&cfg).unwrap(), &cfg);
        let runs = vec![("a".to_string(), m.clone()), ("b".to_string(), m.clone())];
        let d = compare(&runs, "a").unwrap();
        assert!(d.iter().all(|x| x.delta_pct == 0.0));
        assert_eq!(
            compare(&runs, "zzz"),
            Err(MetricsError::MissingBaseline("zzz".into()))
        );
        assert_eq!(compare(&runs[..1], "a"), Err(MetricsError::TooFewRuns(1)));
        let other = preset("fig4_steady").unwrap();
        let m2 = compute(&run(&other).unwrap(), &other);
        let runs = vec![("a".to_string(), m), ("c".to_string(), m2)];
        assert!(matches!(
            compare(&runs, "a"),
            Err(MetricsError::AxisMismatch { .. })
        ));
    }
}
