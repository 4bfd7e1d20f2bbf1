//! Transient analysis: a steady buffer is hit by traffic to previously empty
//! queues, each fed at normalized rate `r`. `t1` is the time at which a new
//! queue first touches its (falling) threshold and starts to drop.

use std::cmp::Ordering;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::omega::{round_robin_gammas, shares, FluidPolicy, FluidQueue, FluidQueueSpec};
use super::steady::{steady_state, SteadyState};
use super::OmegaVector;
use crate::error::FluidError;
use crate::model::QueueId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Case {
    /// Pre-existing queues shrink fast enough to track their thresholds.
    Case1,
    /// Pre-existing queues stay above their thresholds throughout.
    Case2,
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Case::Case1 => "case1",
            Case::Case2 => "case2",
        })
    }
}

/// A nonnegative quantity that may be unbounded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Extended {
    Finite(BigRational),
    Infinite,
}

impl Extended {
    pub fn to_f64(&self) -> f64 {
        match self {
            Extended::Finite(x) => super::to_f64(x),
            Extended::Infinite => f64::INFINITY,
        }
    }

    pub fn finite(&self) -> Option<&BigRational> {
        match self {
            Extended::Finite(x) => Some(x),
            Extended::Infinite => None,
        }
    }

    pub fn scale(&self, k: &BigRational) -> Extended {
        match self {
            Extended::Finite(x) => Extended::Finite(x * k),
            Extended::Infinite => Extended::Infinite,
        }
    }
}

impl PartialOrd for Extended {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Extended {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Extended::Finite(a), Extended::Finite(b)) => a.cmp(b),
            (Extended::Finite(_), Extended::Infinite) => Ordering::Less,
            (Extended::Infinite, Extended::Finite(_)) => Ordering::Greater,
            (Extended::Infinite, Extended::Infinite) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(x) => write!(f, "{}", super::to_f64(x)),
            Extended::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransientScenario {
    pub buffer: BigRational,
    /// Queues congested before the burst (S_old).
    pub old: Vec<FluidQueue>,
    /// Queues that start receiving traffic at t = 0 (S_new).
    pub new: Vec<FluidQueue>,
    /// Arrival rate into each new queue.
    pub rate: BigRational,
}

fn sum<'a>(it: impl Iterator<Item = BigRational> + 'a) -> BigRational {
    it.fold(BigRational::zero(), |a, b| a + b)
}

impl TransientScenario {
    /// Derive ω and γ before and after the burst from a queue layout.
    pub fn build(
        policy: FluidPolicy,
        buffer: BigRational,
        old: &[FluidQueueSpec],
        new: &[FluidQueueSpec],
        rate: BigRational,
    ) -> Self {
        let before = shares(policy, old);
        let all: Vec<FluidQueueSpec> = old.iter().chain(new).cloned().collect();
        let after = shares(policy, &all);
        let gammas = round_robin_gammas(&all);
        let mk = |q: &FluidQueueSpec, share_before: BigRational| FluidQueue {
            id: q.id,
            alpha: q.alpha.clone(),
            share_before,
            share: after[&q.id].clone(),
            gamma: gammas[&q.id].clone(),
        };
        TransientScenario {
            buffer,
            old: old.iter().map(|q| mk(q, before[&q.id].clone())).collect(),
            new: new.iter().map(|q| mk(q, after[&q.id].clone())).collect(),
            rate,
        }
    }

    /// G_e: old queues whose ω drops when the new queues appear.
    pub fn affected(&self) -> impl Iterator<Item = &FluidQueue> {
        self.old.iter().filter(|q| q.is_affected())
    }

    /// G_ne: old queues whose ω is unchanged.
    pub fn unaffected(&self) -> impl Iterator<Item = &FluidQueue> {
        self.old.iter().filter(|q| !q.is_affected())
    }

    /// Σγ over S_old: the number of congested old ports under round-robin.
    pub fn num(&self) -> BigRational {
        sum(self.old.iter().map(|q| q.gamma.clone()))
    }

    pub(crate) fn omega_old_before(&self) -> BigRational {
        sum(self.old.iter().map(|q| q.omega_before()))
    }

    /// Σ(r − γ) over S_new.
    pub(crate) fn new_excess(&self) -> BigRational {
        sum(self.new.iter().map(|q| &self.rate - &q.gamma))
    }

    /// Largest `r` for which the scenario is Case 1, or `None` when no old
    /// queue bounds it.
    pub fn case_boundary(&self) -> Option<BigRational> {
        if self.old.is_empty() {
            return None;
        }
        let n_new = super::int(self.new.len() as i64);
        let has_ne = self.unaffected().next().is_some();
        let (first, star): (BigRational, Vec<&FluidQueue>) = if has_ne {
            (
                sum(self.new.iter().chain(self.affected()).map(|q| q.gamma.clone())),
                self.unaffected().collect(),
            )
        } else {
            (
                sum(self.new.iter().map(|q| q.gamma.clone())),
                self.affected().collect(),
            )
        };
        let star_gamma = sum(star.iter().map(|q| q.gamma.clone()));
        let star_omega = sum(star.iter().map(|q| q.omega()));
        if !star_omega.is_positive() {
            return None;
        }
        Some(first / &n_new + star_gamma * (BigRational::one() + &star_omega) / (star_omega * n_new))
    }

    fn check_new(&self) -> Result<(), FluidError> {
        if self.new.is_empty() {
            Err(FluidError::NoNewQueues)
        } else {
            Ok(())
        }
    }

    /// All queues with their post-burst ω.
    pub fn omegas_after(&self) -> OmegaVector {
        OmegaVector(
            self.old
                .iter()
                .chain(&self.new)
                .map(|q| (q.id, q.omega()))
                .collect(),
        )
    }
}

/// Case 1 iff `r` does not exceed the tracking bound of the old queues.
/// With no old queues the scenario is Case 1.
pub fn classify_case(ts: &TransientScenario) -> Result<Case, FluidError> {
    ts.check_new()?;
    Ok(match ts.case_boundary() {
        Some(bound) if ts.rate > bound => Case::Case2,
        _ => Case::Case1,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct T1Report {
    pub case: Case,
    pub per_queue: Vec<(QueueId, Extended)>,
    /// Earliest crossing over all new queues.
    pub first: Extended,
}

fn report(case: Case, per_queue: Vec<(QueueId, Extended)>) -> T1Report {
    let first = per_queue
        .iter()
        .map(|(_, t)| t.clone())
        .min()
        .unwrap_or(Extended::Infinite);
    T1Report {
        case,
        per_queue,
        first,
    }
}

/// Crossing time when old queues track their thresholds.
///
/// Guarantees require γ to stay constant (no affected queues); the affected
/// terms are still evaluated when present.
pub fn t1_case1(ts: &TransientScenario) -> Result<T1Report, FluidError> {
    let case = classify_case(ts)?;
    if case != Case::Case1 {
        return Err(FluidError::WrongCase {
            expected: Case::Case1,
            actual: case,
        });
    }
    let one = BigRational::one();
    let omega_ne = sum(ts.unaffected().map(|q| q.omega()));
    let gamma_e = sum(ts.affected().map(|q| q.gamma.clone()));
    let initial = &one + ts.omega_old_before();
    let excess = ts.new_excess();
    let per_queue = ts
        .new
        .iter()
        .map(|q| {
            let fill = &ts.rate - &q.gamma;
            if !fill.is_positive() {
                return (q.id, Extended::Infinite);
            }
            let w = q.omega();
            let track = &one + &omega_ne;
            let den = &initial * (&fill * &track + &w * (&excess - &gamma_e));
            if !den.is_positive() {
                return (q.id, Extended::Infinite);
            }
            (q.id, Extended::Finite(&w * &ts.buffer * track / den))
        })
        .collect();
    Ok(report(case, per_queue))
}

/// Crossing time when old queues stay above their thresholds and drain at γ.
pub fn t1_case2(ts: &TransientScenario) -> Result<T1Report, FluidError> {
    let case = classify_case(ts)?;
    if case != Case::Case2 {
        return Err(FluidError::WrongCase {
            expected: Case::Case2,
            actual: case,
        });
    }
    let initial = BigRational::one() + ts.omega_old_before();
    let net = ts.new_excess() - ts.num();
    let mut per_queue = Vec::with_capacity(ts.new.len());
    for q in &ts.new {
        let fill = &ts.rate - &q.gamma;
        if !fill.is_positive() {
            per_queue.push((q.id, Extended::Infinite));
            continue;
        }
        let w = q.omega();
        let den = &initial * (fill + &w * &net);
        if !den.is_positive() {
            return Err(FluidError::NonPositiveDenominator);
        }
        per_queue.push((q.id, Extended::Finite(w * &ts.buffer / den)));
    }
    Ok(report(case, per_queue))
}

/// `t1` using whichever case applies.
pub fn t1(ts: &TransientScenario) -> Result<T1Report, FluidError> {
    match classify_case(ts)? {
        Case::Case1 => t1_case1(ts),
        Case::Case2 => t1_case2(ts),
    }
}

/// Largest burst `r · t1` absorbed before the first drop, per new queue.
pub fn burst_tolerance(ts: &TransientScenario) -> Result<Vec<(QueueId, Extended)>, FluidError> {
    Ok(t1(ts)?
        .per_queue
        .into_iter()
        .map(|(id, t)| (id, t.scale(&ts.rate)))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisResult {
    /// Steady state once every old and new queue sits at its threshold.
    pub steady: SteadyState,
    pub case: Case,
    /// `None` when the Case-2 denominator is not positive.
    pub t1: Option<Extended>,
    pub burst_tolerance: Option<Extended>,
    pub per_queue_t1: Vec<(QueueId, Extended)>,
    pub feasible: bool,
}

pub fn analyze(ts: &TransientScenario) -> Result<AnalysisResult, FluidError> {
    let case = classify_case(ts)?;
    let steady = steady_state(&ts.omegas_after(), &ts.buffer);
    match t1(ts) {
        Ok(rep) => Ok(AnalysisResult {
            steady,
            case,
            burst_tolerance: Some(rep.first.scale(&ts.rate)),
            t1: Some(rep.first),
            per_queue_t1: rep.per_queue,
            feasible: true,
        }),
        Err(FluidError::NonPositiveDenominator) => Ok(AnalysisResult {
            steady,
            case,
            t1: None,
            burst_tolerance: None,
            per_queue_t1: Vec::new(),
            feasible: false,
        }),
        Err(e) => Err(e),
    }
}
