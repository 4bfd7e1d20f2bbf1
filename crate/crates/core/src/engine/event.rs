use std::cmp::Ordering;

use crate::model::ClassId;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EventKind {
    Arrival {
        port: usize,
        class: ClassId,
        source: usize,
    },
    ServiceCompletion {
        port: usize,
    },
    ControllerTick,
    Sample,
}

impl EventKind {
    /// Order among events with the same timestamp: arrivals first, then
    /// services, then controller ticks, then occupancy samples.
    fn rank(&self) -> u8 {
        match self {
            EventKind::Arrival { .. } => 0,
            EventKind::ServiceCompletion { .. } => 1,
            EventKind::ControllerTick => 2,
            EventKind::Sample => 3,
        }
    }
}

/// A scheduled event. Ordered by `(time, rank, seq)`.
#[derive(Debug, Clone, Copy)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
    pub seq: u64,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.kind.rank().cmp(&other.kind.rank()))
            .then(self.seq.cmp(&other.seq))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    #[test]
    fn ties_break_by_kind_then_sequence() {
        let mk = |time, kind, seq| Reverse(Event { time, kind, seq });
        let mut heap = BinaryHeap::new();
        heap.push(mk(1.0, EventKind::Sample, 0));
        heap.push(mk(1.0, EventKind::ControllerTick, 1));
        heap.push(mk(1.0, EventKind::ServiceCompletion { port: 0 }, 2));
        heap.push(mk(
            1.0,
            EventKind::Arrival {
                port: 0,
                class: ClassId(0),
                source: 0,
            },
            4,
        ));
        heap.push(mk(
            1.0,
            EventKind::Arrival {
                port: 0,
                class: ClassId(0),
                source: 0,
            },
            3,
        ));
        heap.push(mk(0.5, EventKind::Sample, 9));
        let order: Vec<u64> = std::iter::from_fn(|| heap.pop().map(|Reverse(e)| e.seq)).collect();
        assert_eq!(order, vec![9, 3, 4, 2, 1, 0]);
    }
}
