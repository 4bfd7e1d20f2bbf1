//! Admission policies: Complete Sharing, Dynamic Thresholds, FB (multi-queue
//! and single-queue-per-port) and the FBA periodic-α controller.
//!
//! Every policy is a pure function of a [`BufferSnapshot`]. Thresholds are
//! exact fractions of a packet; a packet is admitted iff its queue is strictly
//! below the threshold and the buffer is not full.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::error::ModelError;
use crate::model::{BufferSnapshot, ClassId, Frac, QueueId, QueueMode, SwitchLayout};

/// How often the FBA controller rewrites the α table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FbaPeriod {
    /// Tick every `period` time units, starting at t = 0.
    Every(f64),
    /// Tick immediately before every admission decision.
    PerEvent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicyKind {
    CompleteSharing,
    DynamicThresholds,
    Fb,
    FbSingleQueue,
    Fba(FbaPeriod),
}

impl PolicyKind {
    pub fn label(&self) -> &'static str {
        match self {
            PolicyKind::CompleteSharing => "cs",
            PolicyKind::DynamicThresholds => "dt",
            PolicyKind::Fb => "fb",
            PolicyKind::FbSingleQueue => "fb-single",
            PolicyKind::Fba(_) => "fba",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// α per class, optionally overridden per (port, class) queue.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AlphaTable {
    pub by_class: BTreeMap<ClassId, Frac>,
    pub by_queue: BTreeMap<QueueId, Frac>,
}

impl AlphaTable {
    pub fn from_layout(layout: &SwitchLayout) -> Self {
        AlphaTable {
            by_class: layout.classes().iter().map(|c| (c.id, c.alpha)).collect(),
            by_queue: BTreeMap::new(),
        }
    }

    pub fn get(&self, port: usize, class: ClassId) -> Option<Frac> {
        self.by_queue
            .get(&QueueId { port, class })
            .or_else(|| self.by_class.get(&class))
            .copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdmissionDecision {
    pub admit: bool,
    pub threshold: Frac,
    pub queue_len: u64,
}

fn remaining(snapshot: &BufferSnapshot) -> Frac {
    Frac::from_integer(snapshot.buffer.saturating_sub(snapshot.total) as i64)
}

/// `α · (B − Q)`.
pub fn dt_threshold(alpha: Frac, snapshot: &BufferSnapshot) -> Frac {
    alpha * remaining(snapshot)
}

/// `α · (1/N_p) · γ · (B − Q)`.
pub fn fb_threshold(
    alpha: Frac,
    n_p: usize,
    gamma: Frac,
    snapshot: &BufferSnapshot,
) -> Result<Frac, ModelError> {
    if n_p == 0 {
        return Err(ModelError::NoCongestedQueue);
    }
    if gamma < Frac::zero() || gamma > Frac::one() {
        return Err(ModelError::GammaOutOfRange(gamma.to_string()));
    }
    Ok(alpha * Frac::new(1, n_p as i64) * gamma * remaining(snapshot))
}

/// Per-class threshold applied to a port's shared queue: γ is 1 and `N`
/// counts every congested queue in the buffer.
pub fn fb_single_queue_threshold(
    alpha: Frac,
    n_total: usize,
    snapshot: &BufferSnapshot,
) -> Result<Frac, ModelError> {
    fb_threshold(alpha, n_total, Frac::one(), snapshot)
}

/// Decide whether a packet of `class` bound to `port` is stored.
///
/// `alphas` is the table in force: the configured one for DT and FB, the
/// controller's last emitted table for FBA.
pub fn admit(
    policy: PolicyKind,
    alphas: &AlphaTable,
    layout: &SwitchLayout,
    snapshot: &BufferSnapshot,
    port: usize,
    class: ClassId,
) -> Result<AdmissionDecision, ModelError> {
    let queue = layout.queue_index(port, class)?;
    let queue_len = snapshot.lengths[queue];
    let has_space = snapshot.total < snapshot.buffer;
    let alpha = || alphas.get(port, class).ok_or(ModelError::UnknownClass(class.0));

    let threshold = match policy {
        PolicyKind::CompleteSharing => Frac::from_integer(snapshot.buffer as i64),
        PolicyKind::DynamicThresholds | PolicyKind::Fba(_) => dt_threshold(alpha()?, snapshot),
        PolicyKind::Fb | PolicyKind::FbSingleQueue => {
            let (n, gamma) = snapshot.admission_shares(layout, queue);
            match layout.mode() {
                QueueMode::Multi => fb_threshold(alpha()?, n, gamma, snapshot)?,
                QueueMode::Single => fb_single_queue_threshold(alpha()?, n, snapshot)?,
            }
        }
    };
    let admit = match policy {
        PolicyKind::CompleteSharing => has_space,
        _ => has_space && Frac::from_integer(queue_len as i64) < threshold,
    };
    Ok(AdmissionDecision {
        admit,
        threshold,
        queue_len,
    })
}

/// FBA controller step: emit `α_dt = α_c · (1/N_p) · γ` for every queue.
///
/// Each queue is evaluated as if it were congested, so an empty queue gets
/// the α that FB would apply to its first packet. In single-queue mode the
/// base table is returned unchanged (FBA degenerates to DT there).
pub fn fba_recompute_alphas(
    layout: &SwitchLayout,
    snapshot: &BufferSnapshot,
    base: &AlphaTable,
) -> AlphaTable {
    if layout.mode() == QueueMode::Single {
        return base.clone();
    }
    let mut out = AlphaTable {
        by_class: base.by_class.clone(),
        by_queue: BTreeMap::new(),
    };
    for q in 0..layout.queue_count() {
        let id = layout.queue_id(q).expect("multi-queue id");
        let Some(alpha) = base.get(id.port, id.class) else {
            continue;
        };
        let (n_p, gamma) = snapshot.admission_shares(layout, q);
        let n_p = n_p.max(1);
        out.by_queue.insert(id, alpha * Frac::new(1, n_p as i64) * gamma);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{derive_aggregates, CongestionRule, PriorityId, TrafficClass};

    fn snap(buffer: u64, total: u64) -> BufferSnapshot {
        BufferSnapshot {
            time: 0.0,
            buffer,
            lengths: vec![total],
            total,
            congested: vec![total > 0],
            congested_per_priority: BTreeMap::new(),
            congested_total: usize::from(total > 0),
            congested_per_port: vec![usize::from(total > 0)],
            gamma: vec![Frac::one()],
        }
    }

    fn f(n: i64, d: i64) -> Frac {
        Frac::new(n, d)
    }

    #[test]
    fn dt_examples() {
        assert_eq!(dt_threshold(f(1, 1), &snap(60, 30)), f(30, 1));
        assert_eq!(dt_threshold(f(2, 1), &snap(60, 50)), f(20, 1));
        assert_eq!(dt_threshold(f(7, 3), &snap(60, 60)), f(0, 1));
    }

    #[test]
    fn fb_examples() {
        assert_eq!(
            fb_threshold(f(2, 1), 1, f(1, 1), &snap(60, 45)).unwrap(),
            f(30, 1)
        );
        assert_eq!(fb_threshold(f(1, 1), 3, f(1, 1), &snap(60, 45)).unwrap(), f(5, 1));
        assert_eq!(fb_threshold(f(1, 1), 1, f(1, 1), &snap(60, 0)).unwrap(), f(60, 1));
        assert_eq!(
            fb_threshold(f(1, 1), 0, f(1, 1), &snap(60, 0)),
            Err(ModelError::NoCongestedQueue)
        );
    }

    #[test]
    fn fb_single_queue_examples() {
        assert_eq!(
            fb_single_queue_threshold(f(20, 1), 2, &snap(60, 30)).unwrap(),
            f(300, 1)
        );
        assert_eq!(
            fb_single_queue_threshold(f(1, 2), 1, &snap(60, 0)).unwrap(),
            f(30, 1)
        );
        assert_eq!(
            fb_single_queue_threshold(f(20, 1), 3, &snap(60, 60)).unwrap(),
            f(0, 1)
        );
    }

    fn layout() -> SwitchLayout {
        SwitchLayout::new(
            60,
            4,
            QueueMode::Multi,
            vec![
                TrafficClass {
                    id: ClassId(0),
                    alpha: f(1, 1),
                    priority: PriorityId(0),
                },
                TrafficClass {
                    id: ClassId(1),
                    alpha: f(2, 1),
                    priority: PriorityId(1),
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn complete_sharing_admits_until_full() {
        let l = layout();
        let alphas = AlphaTable::from_layout(&l);
        let mut lengths = vec![0; 8];
        lengths[2] = 59;
        let s = derive_aggregates(&l, &lengths, CongestionRule::default(), 0.0).unwrap();
        let d = admit(PolicyKind::CompleteSharing, &alphas, &l, &s, 1, ClassId(0)).unwrap();
        assert!(d.admit);
        lengths[2] = 60;
        let s = derive_aggregates(&l, &lengths, CongestionRule::default(), 0.0).unwrap();
        let d = admit(PolicyKind::CompleteSharing, &alphas, &l, &s, 1, ClassId(0)).unwrap();
        assert!(!d.admit);
    }

    #[test]
    fn dt_drops_at_threshold() {
        let l = layout();
        let alphas = AlphaTable::from_layout(&l);
        let mut lengths = vec![0; 8];
        lengths[l.queue_index(1, ClassId(0)).unwrap()] = 30;
        let s = derive_aggregates(&l, &lengths, CongestionRule::default(), 0.0).unwrap();
        let d = admit(PolicyKind::DynamicThresholds, &alphas, &l, &s, 1, ClassId(0)).unwrap();
        assert_eq!(d.threshold, f(30, 1));
        assert!(!d.admit);
    }

    #[test]
    fn fb_admits_high_below_threshold() {
        // high at 29, three lows holding 16 -> remaining 15, T_high = 30
        let l = layout();
        let alphas = AlphaTable::from_layout(&l);
        let mut lengths = vec![0; 8];
        lengths[l.queue_index(0, ClassId(1)).unwrap()] = 29;
        lengths[l.queue_index(1, ClassId(0)).unwrap()] = 6;
        lengths[l.queue_index(2, ClassId(0)).unwrap()] = 5;
        lengths[l.queue_index(3, ClassId(0)).unwrap()] = 5;
        let s = derive_aggregates(&l, &lengths, CongestionRule::default(), 0.0).unwrap();
        let d = admit(PolicyKind::Fb, &alphas, &l, &s, 0, ClassId(1)).unwrap();
        assert_eq!(d.threshold, f(30, 1));
        assert!(d.admit);
    }

    #[test]
    fn unknown_queue_is_a_config_error() {
        let l = layout();
        let alphas = AlphaTable::from_layout(&l);
        let s = derive_aggregates(&l, &[0; 8], CongestionRule::default(), 0.0).unwrap();
        assert!(matches!(
            admit(PolicyKind::Fb, &alphas, &l, &s, 9, ClassId(0)),
            Err(ModelError::UnknownQueue { .. })
        ));
        assert!(matches!(
            admit(PolicyKind::Fb, &alphas, &l, &s, 0, ClassId(7)),
            Err(ModelError::UnknownQueue { .. })
        ));
    }

    #[test]
    fn fba_alpha_examples() {
        // α_c=20, N_p=2, γ=1/2 -> 5
        let classes = vec![TrafficClass {
            id: ClassId(0),
            alpha: f(20, 1),
            priority: PriorityId(0),
        }];
        let two = SwitchLayout::new(1000, 2, QueueMode::Multi, classes.clone()).unwrap();
        let s = derive_aggregates(&two, &[4, 4], CongestionRule::default(), 0.0).unwrap();
        let shared = SwitchLayout::new(
            1000,
            1,
            QueueMode::Multi,
            vec![
                classes[0].clone(),
                TrafficClass {
                    id: ClassId(1),
                    alpha: f(20, 1),
                    priority: PriorityId(0),
                },
            ],
        )
        .unwrap();
        let s2 = derive_aggregates(&shared, &[4, 4], CongestionRule::default(), 0.0).unwrap();
        let t = fba_recompute_alphas(&shared, &s2, &AlphaTable::from_layout(&shared));
        assert_eq!(t.get(0, ClassId(0)), Some(f(5, 1)));
        let t = fba_recompute_alphas(&two, &s, &AlphaTable::from_layout(&two));
        assert_eq!(t.get(0, ClassId(0)), Some(f(10, 1)));

        // α_c=1/2 alone: identity
        let lone = SwitchLayout::new(
            100,
            1,
            QueueMode::Multi,
            vec![TrafficClass {
                id: ClassId(0),
                alpha: f(1, 2),
                priority: PriorityId(0),
            }],
        )
        .unwrap();
        let s = derive_aggregates(&lone, &[3], CongestionRule::default(), 0.0).unwrap();
        let t = fba_recompute_alphas(&lone, &s, &AlphaTable::from_layout(&lone));
        assert_eq!(t.get(0, ClassId(0)), Some(f(1, 2)));

        // three lows on own ports -> 1/3 each
        let l = layout();
        let mut lengths = vec![0; 8];
        for p in 1..4 {
            lengths[l.queue_index(p, ClassId(0)).unwrap()] = 5;
        }
        let s = derive_aggregates(&l, &lengths, CongestionRule::default(), 0.0).unwrap();
        let t = fba_recompute_alphas(&l, &s, &AlphaTable::from_layout(&l));
        for p in 1..4 {
            assert_eq!(t.get(p, ClassId(0)), Some(f(1, 3)));
        }
    }

    #[test]
    fn fba_is_dt_in_single_queue_mode() {
        let l = SwitchLayout::new(60, 2, QueueMode::Single, layout().classes().to_vec()).unwrap();
        let base = AlphaTable::from_layout(&l);
        let s = derive_aggregates(&l, &[5, 7], CongestionRule::default(), 0.0).unwrap();
        assert_eq!(fba_recompute_alphas(&l, &s, &base), base);
    }
}
