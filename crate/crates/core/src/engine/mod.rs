//! Discrete-event simulation of one shared-buffer switch.
//!
//! Every port transmits one packet per time unit. When a transmission ends,
//! the port takes the head packet of the next non-empty queue in round-robin
//! order. Packets are never evicted once admitted.

mod event;
mod trace;

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

pub use event::{Event, EventKind};
pub use trace::{write_trace_csv, Action, EventTrace, OccupancySample, QueueTotals, TickRecord, TraceRecord};

use crate::error::ConfigError;
use crate::model::{
    derive_aggregates, BufferSnapshot, ClassId, CongestionRule, Frac, QueueMode, SwitchLayout,
};
use crate::policy::{admit, fba_recompute_alphas, AlphaTable, FbaPeriod, PolicyKind};
use crate::workload::{build_sources, ScenarioConfig};

/// Time to transmit one packet.
pub const SERVICE_TIME: f64 = 1.0;

#[derive(Debug, Clone, Copy)]
struct PacketMeta {
    source: usize,
}

struct Switch<'a> {
    cfg: &'a ScenarioConfig,
    layout: SwitchLayout,
    rule: CongestionRule,
    base_alphas: AlphaTable,
    alphas: AlphaTable,
    queues: Vec<VecDeque<PacketMeta>>,
    lengths: Vec<u64>,
    total: u64,
    /// Offset within the port's queue range of the next queue to consider.
    cursor: Vec<usize>,
    busy: Vec<bool>,
    /// Length vectors after each change, for stale snapshots.
    history: VecDeque<(f64, Vec<u64>)>,
    heap: BinaryHeap<Reverse<Event>>,
    seq: u64,
    trace: EventTrace,
}

impl<'a> Switch<'a> {
    fn new(cfg: &'a ScenarioConfig) -> Self {
        let layout = cfg.layout();
        let n = layout.queue_count();
        let base_alphas = AlphaTable::from_layout(&layout);
        let queue_labels = (0..n)
            .map(|q| match layout.queue_id(q) {
                Some(id) => id.to_string(),
                None => format!("p{}", layout.port_of(q)),
            })
            .collect();
        let queue_ports = (0..n).map(|q| layout.port_of(q)).collect();
        Switch {
            cfg,
            rule: CongestionRule {
                threshold: cfg.congestion_threshold,
            },
            alphas: base_alphas.clone(),
            base_alphas,
            queues: vec![VecDeque::new(); n],
            lengths: vec![0; n],
            total: 0,
            cursor: vec![0; layout.ports()],
            busy: vec![false; layout.ports()],
            history: VecDeque::from([(0.0, vec![0; n])]),
            heap: BinaryHeap::new(),
            seq: 0,
            trace: EventTrace {
                queue_labels,
                queue_ports,
                records: Vec::new(),
                ticks: Vec::new(),
                samples: Vec::new(),
                final_lengths: Vec::new(),
                horizon: cfg.horizon,
                events_processed: 0,
                complete: true,
            },
            layout,
        }
    }

    fn schedule(&mut self, time: f64, kind: EventKind) {
        self.heap.push(Reverse(Event {
            time,
            kind,
            seq: self.seq,
        }));
        self.seq += 1;
    }

    fn snapshot_of(&self, lengths: &[u64], time: f64) -> BufferSnapshot {
        derive_aggregates(&self.layout, lengths, self.rule, time).expect("lengths within capacity")
    }

    fn stale_lengths(&self, now: f64) -> &[u64] {
        let cutoff = now - self.cfg.staleness;
        self.history
            .iter()
            .rev()
            .find(|(t, _)| *t <= cutoff)
            .or_else(|| self.history.front())
            .map(|(_, l)| l.as_slice())
            .expect("history is never empty")
    }

    fn note_change(&mut self, time: f64) {
        if self.cfg.staleness <= 0.0 {
            return;
        }
        self.history.push_back((time, self.lengths.clone()));
        let cutoff = time - self.cfg.staleness;
        while self.history.len() > 1 && self.history[1].0 <= cutoff {
            self.history.pop_front();
        }
    }

    fn tick(&mut self, time: f64) {
        let snap = self.snapshot_of(&self.lengths, time);
        self.alphas = fba_recompute_alphas(&self.layout, &snap, &self.base_alphas);
        let alphas = (0..self.layout.queue_count())
            .filter_map(|q| {
                let id = self.layout.queue_id(q)?;
                Some((id, self.alphas.get(id.port, id.class)?))
            })
            .collect();
        self.trace.ticks.push(TickRecord {
            time,
            first_record: self.trace.records.len(),
            alphas,
        });
    }

    fn arrival(&mut self, time: f64, port: usize, class: ClassId, source: usize) {
        let q = self
            .layout
            .queue_index(port, class)
            .expect("validated source target");
        let snap = if self.cfg.staleness > 0.0 {
            self.snapshot_of(self.stale_lengths(time), time)
        } else {
            self.snapshot_of(&self.lengths, time)
        };
        if self.cfg.policy == PolicyKind::Fba(FbaPeriod::PerEvent) {
            self.alphas = fba_recompute_alphas(&self.layout, &snap, &self.base_alphas);
        }
        let decision =
            admit(self.cfg.policy, &self.alphas, &self.layout, &snap, port, class).expect("validated class");
        let len = self.lengths[q];
        let admitted = self.total < self.layout.buffer()
            && match self.cfg.policy {
                PolicyKind::CompleteSharing => true,
                _ => Frac::from_integer(len as i64) < decision.threshold,
            };
        self.trace.records.push(TraceRecord {
            time,
            port,
            class,
            queue: q,
            action: if admitted {
                Action::Admitted
            } else {
                Action::Dropped
            },
            queue_len: len,
            threshold: Some(decision.threshold),
            occupancy: self.total,
            source,
        });
        if admitted {
            self.queues[q].push_back(PacketMeta { source });
            self.lengths[q] += 1;
            self.total += 1;
            self.note_change(time);
            if !self.busy[port] {
                self.busy[port] = true;
                self.schedule(time + SERVICE_TIME, EventKind::ServiceCompletion { port });
            }
        }
    }

    fn service(&mut self, time: f64, port: usize) {
        let range = self.layout.port_queues(port);
        let width = range.len();
        let pick = (0..width)
            .map(|k| (self.cursor[port] + k) % width)
            .find(|&off| !self.queues[range.start + off].is_empty());
        let Some(off) = pick else {
            self.busy[port] = false;
            return;
        };
        let q = range.start + off;
        let pkt = self.queues[q].pop_front().expect("non-empty queue");
        let id = self.layout.queue_id(q);
        let class = id.map_or(ClassId(0), |i| i.class);
        self.trace.records.push(TraceRecord {
            time,
            port,
            class: match self.layout.mode() {
                QueueMode::Multi => class,
                QueueMode::Single => self.cfg.sources[pkt.source].class,
            },
            queue: q,
            action: Action::Departed,
            queue_len: self.lengths[q],
            threshold: None,
            occupancy: self.total,
            source: pkt.source,
        });
        self.lengths[q] -= 1;
        self.total -= 1;
        self.note_change(time);
        self.cursor[port] = (off + 1) % width;
        if self.lengths[range].iter().any(|&l| l > 0) {
            self.schedule(time + SERVICE_TIME, EventKind::ServiceCompletion { port });
        } else {
            self.busy[port] = false;
        }
    }
}

/// Simulate `cfg` up to its horizon.
///
/// Identical configurations produce identical traces.
pub fn run(cfg: &ScenarioConfig) -> Result<EventTrace, ConfigError> {
    cfg.validate()?;
    let mut sw = Switch::new(cfg);
    for a in build_sources(cfg) {
        sw.schedule(
            a.time,
            EventKind::Arrival {
                port: a.port,
                class: a.class,
                source: a.source,
            },
        );
    }
    let period = match cfg.policy {
        PolicyKind::Fba(FbaPeriod::Every(p)) => {
            sw.tick(0.0);
            sw.schedule(p, EventKind::ControllerTick);
            Some(p)
        }
        _ => None,
    };
    let mut tick_count = 1u64;
    let mut sample_count = 0u64;
    sw.schedule(0.0, EventKind::Sample);

    while let Some(Reverse(ev)) = sw.heap.pop() {
        if ev.time > cfg.horizon {
            break;
        }
        if cfg.max_events.is_some_and(|cap| sw.trace.events_processed >= cap) {
            sw.trace.complete = false;
            break;
        }
        sw.trace.events_processed += 1;
        match ev.kind {
            EventKind::Arrival { port, class, source } => sw.arrival(ev.time, port, class, source),
            EventKind::ServiceCompletion { port } => sw.service(ev.time, port),
            EventKind::ControllerTick => {
                sw.tick(ev.time);
                if let Some(p) = period {
                    tick_count += 1;
                    sw.schedule(tick_count as f64 * p, EventKind::ControllerTick);
                }
            }
            EventKind::Sample => {
                sw.trace.samples.push(OccupancySample {
                    time: ev.time,
                    occupancy: sw.total,
                });
                sample_count += 1;
                sw.schedule(sample_count as f64 * cfg.sample_interval, EventKind::Sample);
            }
        }
    }
    sw.trace.final_lengths = sw.lengths.clone();
    Ok(sw.trace)
}
