//! Domain types shared by the policies, the packet engine and the fluid model.
//!
//! Unit conventions: the buffer is counted in unit-size packets, every port
//! drains exactly one packet per time unit, and all rates are multiples of a
//! single port's drain rate.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Exact fraction used for α values, thresholds and dequeue shares.
pub type Frac = Ratio<i64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PriorityId(pub u32);

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for PriorityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A (port, class) pair. At most one queue exists per pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QueueId {
    pub port: usize,
    pub class: ClassId,
}

impl QueueId {
    pub fn new(port: usize, class: u32) -> Self {
        QueueId {
            port,
            class: ClassId(class),
        }
    }
}

impl fmt::Display for QueueId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}c{}", self.port, self.class.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrafficClass {
    pub id: ClassId,
    pub alpha: Frac,
    pub priority: PriorityId,
}

/// Classes sharing one priority level, with the group's largest α.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriorityGroup {
    pub id: PriorityId,
    pub members: Vec<ClassId>,
    pub alpha_max: Frac,
}

impl PriorityGroup {
    /// Partition a class list into priority groups, ordered by priority id.
    pub fn from_classes(classes: &[TrafficClass]) -> Vec<PriorityGroup> {
        let mut groups: BTreeMap<PriorityId, PriorityGroup> = BTreeMap::new();
        for c in classes {
            let g = groups.entry(c.priority).or_insert_with(|| PriorityGroup {
                id: c.priority,
                members: Vec::new(),
                alpha_max: c.alpha,
            });
            g.members.push(c.id);
            if c.alpha > g.alpha_max {
                g.alpha_max = c.alpha;
            }
        }
        groups.into_values().collect()
    }
}

/// Whether each port carries one queue per class or a single shared queue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueueMode {
    #[default]
    Multi,
    Single,
}

/// A queue counts as congested when its length exceeds `threshold` packets.
/// The default of zero means "non-empty".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CongestionRule {
    pub threshold: u64,
}

impl CongestionRule {
    pub fn is_congested(&self, len: u64) -> bool {
        len > self.threshold
    }
}

/// Static shape of the switch: buffer size, ports, classes and queue mapping.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchLayout {
    buffer: u64,
    ports: usize,
    mode: QueueMode,
    classes: Vec<TrafficClass>,
    class_index: BTreeMap<ClassId, usize>,
}

impl SwitchLayout {
    pub fn new(
        buffer: u64,
        ports: usize,
        mode: QueueMode,
        classes: Vec<TrafficClass>,
    ) -> Result<Self, ModelError> {
        let class_index = classes
            .iter()
            .enumerate()
            .map(|(i, c)| (c.id, i))
            .collect::<BTreeMap<_, _>>();
        Ok(SwitchLayout {
            buffer,
            ports,
            mode,
            classes,
            class_index,
        })
    }

    pub fn buffer(&self) -> u64 {
        self.buffer
    }

    pub fn ports(&self) -> usize {
        self.ports
    }

    pub fn mode(&self) -> QueueMode {
        self.mode
    }

    pub fn classes(&self) -> &[TrafficClass] {
        &self.classes
    }

    pub fn class(&self, id: ClassId) -> Option<&TrafficClass> {
        self.class_index.get(&id).map(|&i| &self.classes[i])
    }

    pub fn queue_count(&self) -> usize {
        match self.mode {
            QueueMode::Multi => self.ports * self.classes.len(),
            QueueMode::Single => self.ports,
        }
    }

    /// Index of the queue that stores packets of `class` bound to `port`.
    pub fn queue_index(&self, port: usize, class: ClassId) -> Result<usize, ModelError> {
        let ci = *self
            .class_index
            .get(&class)
            .ok_or(ModelError::UnknownQueue { port, class: class.0 })?;
        if port >= self.ports {
            return Err(ModelError::UnknownQueue { port, class: class.0 });
        }
        Ok(match self.mode {
            QueueMode::Multi => port * self.classes.len() + ci,
            QueueMode::Single => port,
        })
    }

    pub fn port_of(&self, queue: usize) -> usize {
        match self.mode {
            QueueMode::Multi => queue / self.classes.len(),
            QueueMode::Single => queue,
        }
    }

    /// Class served by a queue in multi-queue mode; `None` for shared queues.
    pub fn class_of(&self, queue: usize) -> Option<&TrafficClass> {
        match self.mode {
            QueueMode::Multi => Some(&self.classes[queue % self.classes.len()]),
            QueueMode::Single => None,
        }
    }

    pub fn queue_id(&self, queue: usize) -> Option<QueueId> {
        self.class_of(queue).map(|c| QueueId {
            port: self.port_of(queue),
            class: c.id,
        })
    }

    /// Range of queue indices attached to `port`.
    pub fn port_queues(&self, port: usize) -> std::ops::Range<usize> {
        match self.mode {
            QueueMode::Multi => {
                let n = self.classes.len();
                port * n..(port + 1) * n
            }
            QueueMode::Single => port..port + 1,
        }
    }
}

/// Instantaneous buffer state and the aggregates the threshold policies consume.
#[derive(Debug, Clone, PartialEq)]
pub struct BufferSnapshot {
    pub time: f64,
    pub buffer: u64,
    pub lengths: Vec<u64>,
    pub total: u64,
    pub congested: Vec<bool>,
    /// Congested queues per priority (multi-queue mode only).
    pub congested_per_priority: BTreeMap<PriorityId, usize>,
    pub congested_total: usize,
    /// Congested queues per port.
    pub congested_per_port: Vec<usize>,
    /// Round-robin normalized dequeue rate per queue.
    pub gamma: Vec<Frac>,
}

impl BufferSnapshot {
    pub fn remaining(&self) -> u64 {
        self.buffer - self.total
    }

    pub fn congested_in(&self, priority: PriorityId) -> usize {
        self.congested_per_priority.get(&priority).copied().unwrap_or(0)
    }

    /// `(N_p, γ)` seen by a packet arriving to `queue`. The queue counts as
    /// congested even if it is not yet, so `N_p ≥ 1` and `γ > 0`.
    pub fn admission_shares(&self, layout: &SwitchLayout, queue: usize) -> (usize, Frac) {
        let extra = usize::from(!self.congested[queue]);
        match layout.mode() {
            QueueMode::Multi => {
                let prio = layout
                    .class_of(queue)
                    .map(|c| c.priority)
                    .unwrap_or(PriorityId(0));
                let n_p = self.congested_in(prio) + extra;
                let on_port = self.congested_per_port[layout.port_of(queue)] + extra;
                (n_p, Frac::new(1, on_port as i64))
            }
            QueueMode::Single => (self.congested_total + extra, Frac::one()),
        }
    }
}

/// Build a snapshot from raw per-queue lengths.
///
/// γ follows round-robin: each active queue on a port gets `1/n` of the port,
/// where the active set is the congested queues (falling back to the
/// non-empty ones if the congestion threshold hides all of them).
pub fn derive_aggregates(
    layout: &SwitchLayout,
    lengths: &[u64],
    rule: CongestionRule,
    time: f64,
) -> Result<BufferSnapshot, ModelError> {
    if lengths.len() != layout.queue_count() {
        return Err(ModelError::LengthMismatch {
            got: lengths.len(),
            expected: layout.queue_count(),
        });
    }
    let total: u64 = lengths.iter().sum();
    if total > layout.buffer() {
        return Err(ModelError::CapacityViolation {
            total,
            buffer: layout.buffer(),
        });
    }
    let congested: Vec<bool> = lengths.iter().map(|&l| rule.is_congested(l)).collect();

    let mut congested_per_priority = BTreeMap::new();
    if layout.mode() == QueueMode::Multi {
        for c in layout.classes() {
            congested_per_priority.entry(c.priority).or_insert(0usize);
        }
        for (q, &is_c) in congested.iter().enumerate() {
            if is_c {
                let p = layout.class_of(q).expect("multi-queue class").priority;
                *congested_per_priority.entry(p).or_insert(0) += 1;
            }
        }
    }
    let congested_total = congested.iter().filter(|&&c| c).count();

    let mut congested_per_port = vec![0usize; layout.ports()];
    let mut gamma = vec![Frac::zero(); lengths.len()];
    for (port, slot) in congested_per_port.iter_mut().enumerate() {
        let range = layout.port_queues(port);
        let n_cong = range.clone().filter(|&q| congested[q]).count();
        *slot = n_cong;
        let active: Vec<usize> = if n_cong > 0 {
            range.filter(|&q| congested[q]).collect()
        } else {
            range.filter(|&q| lengths[q] > 0).collect()
        };
        if !active.is_empty() {
            let share = Frac::new(1, active.len() as i64);
            for q in active {
                gamma[q] = share;
            }
        }
    }

    Ok(BufferSnapshot {
        time,
        buffer: layout.buffer(),
        lengths: lengths.to_vec(),
        total,
        congested,
        congested_per_priority,
        congested_total,
        congested_per_port,
        gamma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_class_layout(ports: usize) -> SwitchLayout {
        SwitchLayout::new(
            60,
            ports,
            QueueMode::Multi,
            vec![
                TrafficClass {
                    id: ClassId(0),
                    alpha: Frac::from_integer(1),
                    priority: PriorityId(0),
                },
                TrafficClass {
                    id: ClassId(1),
                    alpha: Frac::from_integer(2),
                    priority: PriorityId(1),
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn empty_buffer() {
        let layout = two_class_layout(4);
        let snap = derive_aggregates(&layout, &[0; 8], CongestionRule::default(), 0.0).unwrap();
        assert_eq!(snap.total, 0);
        assert_eq!(snap.remaining(), 60);
        assert!(snap.congested_per_priority.values().all(|&n| n == 0));
    }

    #[test]
    fn five_low_queues_share_one_port() {
        let classes = (0..5)
            .map(|i| TrafficClass {
                id: ClassId(i),
                alpha: Frac::from_integer(1),
                priority: PriorityId(0),
            })
            .collect();
        let layout = SwitchLayout::new(60, 2, QueueMode::Multi, classes).unwrap();
        let mut lengths = vec![0; 10];
        for q in layout.port_queues(1) {
            lengths[q] = 10;
        }
        let snap = derive_aggregates(&layout, &lengths, CongestionRule::default(), 0.0).unwrap();
        for q in layout.port_queues(1) {
            assert_eq!(snap.gamma[q], Frac::new(1, 5));
        }
        assert_eq!(snap.congested_in(PriorityId(0)), 5);
    }

    #[test]
    fn one_queue_per_port_gets_full_rate() {
        let layout = two_class_layout(4);
        let mut lengths = vec![0; 8];
        // high on port 0, lows on ports 1..4
        lengths[layout.queue_index(0, ClassId(1)).unwrap()] = 20;
        for p in 1..4 {
            lengths[layout.queue_index(p, ClassId(0)).unwrap()] = 10;
        }
        let snap = derive_aggregates(&layout, &lengths, CongestionRule::default(), 0.0).unwrap();
        for (q, &l) in lengths.iter().enumerate() {
            if l > 0 {
                assert_eq!(snap.gamma[q], Frac::one());
            }
        }
        assert_eq!(snap.congested_in(PriorityId(0)), 3);
        assert_eq!(snap.congested_in(PriorityId(1)), 1);
    }

    #[test]
    fn inactive_queue_on_busy_port_has_zero_gamma() {
        let layout = two_class_layout(1);
        let snap = derive_aggregates(&layout, &[3, 0], CongestionRule::default(), 0.0).unwrap();
        assert_eq!(snap.gamma, vec![Frac::one(), Frac::zero()]);
        // an arrival to the empty queue counts itself
        assert_eq!(snap.admission_shares(&layout, 1), (1, Frac::new(1, 2)));
    }

    #[test]
    fn capacity_violation() {
        let layout = two_class_layout(1);
        let err = derive_aggregates(&layout, &[40, 21], CongestionRule::default(), 0.0).unwrap_err();
        assert_eq!(
            err,
            ModelError::CapacityViolation {
                total: 61,
                buffer: 60
            }
        );
    }

    #[test]
    fn congestion_threshold_hides_short_queues() {
        let layout = two_class_layout(1);
        let rule = CongestionRule { threshold: 5 };
        let snap = derive_aggregates(&layout, &[3, 8], rule, 0.0).unwrap();
        assert_eq!(snap.congested, vec![false, true]);
        assert_eq!(snap.gamma, vec![Frac::zero(), Frac::one()]);
        let snap = derive_aggregates(&layout, &[3, 2], rule, 0.0).unwrap();
        // nobody congested: fall back to the non-empty queues for γ
        assert_eq!(snap.gamma, vec![Frac::new(1, 2), Frac::new(1, 2)]);
    }

    #[test]
    fn priority_groups_take_the_largest_alpha() {
        let classes = vec![
            TrafficClass {
                id: ClassId(0),
                alpha: Frac::new(1, 2),
                priority: PriorityId(0),
            },
            TrafficClass {
                id: ClassId(1),
                alpha: Frac::from_integer(1),
                priority: PriorityId(0),
            },
            TrafficClass {
                id: ClassId(2),
                alpha: Frac::from_integer(20),
                priority: PriorityId(1),
            },
        ];
        let groups = PriorityGroup::from_classes(&classes);
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[0].alpha_max, Frac::from_integer(1));
        assert_eq!(groups[0].members, vec![ClassId(0), ClassId(1)]);
        assert_eq!(groups[1].alpha_max, Frac::from_integer(20));
    }
}
