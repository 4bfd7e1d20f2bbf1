use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::model::{PriorityId, QueueId};

/// Which threshold rule the fluid queues follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluidPolicy {
    /// ω = α.
    Dt,
    /// ω = α · β_P · γ.
    Fb,
}

/// A congested queue as seen by the fluid model.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidQueueSpec {
    pub id: QueueId,
    pub alpha: BigRational,
    pub priority: PriorityId,
}

/// ω per queue.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OmegaVector(pub BTreeMap<QueueId, BigRational>);

impl OmegaVector {
    pub fn sum(&self) -> BigRational {
        self.0.values().fold(BigRational::zero(), |a, b| a + b)
    }

    pub fn get(&self, id: &QueueId) -> Option<&BigRational> {
        self.0.get(id)
    }
}

/// `β_P · γ` for every queue in `congested` (the per-unit-α share of ω).
pub(crate) fn shares(policy: FluidPolicy, congested: &[FluidQueueSpec]) -> BTreeMap<QueueId, BigRational> {
    let gammas = round_robin_gammas(congested);
    let mut per_priority: BTreeMap<PriorityId, i64> = BTreeMap::new();
    for q in congested {
        *per_priority.entry(q.priority).or_default() += 1;
    }
    congested
        .iter()
        .map(|q| {
            let share = match policy {
                FluidPolicy::Dt => BigRational::one(),
                FluidPolicy::Fb => {
                    let beta = super::ratio(1, per_priority[&q.priority]);
                    beta * &gammas[&q.id]
                }
            };
            (q.id, share)
        })
        .collect()
}

/// γ under round-robin: 1/n for each of the n congested queues of a port.
pub(crate) fn round_robin_gammas(congested: &[FluidQueueSpec]) -> BTreeMap<QueueId, BigRational> {
    let mut per_port: BTreeMap<usize, i64> = BTreeMap::new();
    for q in congested {
        *per_port.entry(q.id.port).or_default() += 1;
    }
    congested
        .iter()
        .map(|q| (q.id, super::ratio(1, per_port[&q.id.port])))
        .collect()
}

/// ω for a set of simultaneously congested queues.
pub fn omega_vector(policy: FluidPolicy, congested: &[FluidQueueSpec]) -> OmegaVector {
    let shares = shares(policy, congested);
    OmegaVector(
        congested
            .iter()
            .map(|q| (q.id, &q.alpha * &shares[&q.id]))
            .collect(),
    )
}

/// One queue of a transient scenario.
///
/// `share_before` and `share` are `β·γ` (or 1 under DT) before and during the
/// transient, so `ω = α · share`. `gamma` is the dequeue rate during the
/// transient.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidQueue {
    pub id: QueueId,
    pub alpha: BigRational,
    pub share_before: BigRational,
    pub share: BigRational,
    pub gamma: BigRational,
}

impl FluidQueue {
    /// A queue whose ω and γ are unchanged by the transient.
    pub fn steady(id: QueueId, omega: BigRational, gamma: BigRational) -> Self {
        FluidQueue {
            id,
            alpha: omega,
            share_before: BigRational::one(),
            share: BigRational::one(),
            gamma,
        }
    }

    pub fn omega(&self) -> BigRational {
        &self.alpha * &self.share
    }

    pub fn omega_before(&self) -> BigRational {
        &self.alpha * &self.share_before
    }

    pub fn is_affected(&self) -> bool {
        self.share != self.share_before
    }
}
