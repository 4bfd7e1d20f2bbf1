use std::io::Write;

use num_traits::ToPrimitive;
use serde::Serialize;

use crate::model::{ClassId, Frac, QueueId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Admitted,
    Dropped,
    Departed,
}

impl Action {
    pub fn as_str(&self) -> &'static str {
        match self {
            Action::Admitted => "admitted",
            Action::Dropped => "dropped",
            Action::Departed => "departed",
        }
    }
}

/// One packet-level event. Lengths and occupancy are taken before the
/// action is applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub time: f64,
    pub port: usize,
    pub class: ClassId,
    /// Queue index in the switch layout.
    pub queue: usize,
    pub action: Action,
    pub queue_len: u64,
    /// Threshold the admission decision used; `None` for departures.
    pub threshold: Option<Frac>,
    pub occupancy: u64,
    pub source: usize,
}

/// An α table emitted by the FBA controller. It governs every admission from
/// record index `first_record` on, until the next tick.
#[derive(Debug, Clone, PartialEq)]
pub struct TickRecord {
    pub time: f64,
    pub first_record: usize,
    pub alphas: Vec<(QueueId, Frac)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OccupancySample {
    pub time: f64,
    pub occupancy: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventTrace {
    /// Printable name of each queue, indexed like `TraceRecord::queue`.
    pub queue_labels: Vec<String>,
    pub queue_ports: Vec<usize>,
    pub records: Vec<TraceRecord>,
    pub ticks: Vec<TickRecord>,
    pub samples: Vec<OccupancySample>,
    pub final_lengths: Vec<u64>,
    pub horizon: f64,
    pub events_processed: u64,
    /// `false` when the run stopped at the event cap before the horizon.
    pub complete: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct QueueTotals {
    pub arrivals: u64,
    pub admitted: u64,
    pub dropped: u64,
    pub departed: u64,
}

impl EventTrace {
    pub fn totals(&self) -> Vec<QueueTotals> {
        let mut t = vec![QueueTotals::default(); self.queue_labels.len()];
        for r in &self.records {
            let q = &mut t[r.queue];
            match r.action {
                Action::Admitted => {
                    q.arrivals += 1;
                    q.admitted += 1;
                }
                Action::Dropped => {
                    q.arrivals += 1;
                    q.dropped += 1;
                }
                Action::Departed => q.departed += 1,
            }
        }
        t
    }

    /// Per queue: admitted = departed + final length.
    pub fn is_conserved(&self) -> bool {
        self.totals()
            .iter()
            .zip(&self.final_lengths)
            .all(|(t, &len)| t.admitted == t.departed + len)
    }

    /// Records that are admissions or drops.
    pub fn decisions(&self) -> impl Iterator<Item = &TraceRecord> {
        self.records.iter().filter(|r| r.action != Action::Departed)
    }

    pub fn first_drop(&self) -> Option<&TraceRecord> {
        self.records.iter().find(|r| r.action == Action::Dropped)
    }
}

fn threshold_text(t: Option<Frac>) -> String {
    match t {
        Some(f) => {
            let x = f.numer().to_f64().unwrap_or(f64::NAN) / f.denom().to_f64().unwrap_or(f64::NAN);
            format!("{x}")
        }
        None => String::new(),
    }
}

/// CSV with columns `time, port, class, queue, queue_len, action, threshold,
/// occupancy, source`.
pub fn write_trace_csv<W: Write>(trace: &EventTrace, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "time",
        "port",
        "class",
        "queue",
        "queue_len",
        "action",
        "threshold",
        "occupancy",
        "source",
    ])?;
    for r in &trace.records {
        w.write_record([
            format!("{}", r.time),
            r.port.to_string(),
            r.class.to_string(),
            trace.queue_labels[r.queue].clone(),
            r.queue_len.to_string(),
            r.action.as_str().to_string(),
            threshold_text(r.threshold),
            r.occupancy.to_string(),
            r.source.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
