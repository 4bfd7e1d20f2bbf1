use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::omega::OmegaVector;
use crate::model::QueueId;

/// Steady-state allocation where every congested queue sits at its threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub occupancy: BigRational,
    pub remaining: BigRational,
    pub thresholds: BTreeMap<QueueId, BigRational>,
}

/// `Q = B·Σω/(1+Σω)`, `remaining = B/(1+Σω)`, `T = B·ω/(1+Σω)`.
///
/// Under DT pass ω = α for every congested queue.
pub fn steady_state(omegas: &OmegaVector, buffer: &BigRational) -> SteadyState {
    let denom = BigRational::one() + omegas.sum();
    let remaining = buffer / &denom;
    let thresholds = omegas.0.iter().map(|(id, w)| (*id, &remaining * w)).collect();
    SteadyState {
        occupancy: buffer - &remaining,
        remaining,
        thresholds,
    }
}

/// Upper bound on steady occupancy under FB: `B·Σα_max/(1+Σα_max)`, one
/// `α_max` per priority level.
pub fn occupancy_bound(alpha_max: &[BigRational], buffer: &BigRational) -> BigRational {
    let s = alpha_max.iter().fold(BigRational::zero(), |a, b| a + b);
    buffer * &s / (BigRational::one() + &s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fluid::{int, omega_vector, ratio, FluidPolicy, FluidQueueSpec};
    use crate::model::PriorityId;

    fn spec(port: usize, class: u32, alpha: BigRational, prio: u32) -> FluidQueueSpec {
        FluidQueueSpec {
            id: QueueId::new(port, class),
            alpha,
            priority: PriorityId(prio),
        }
    }

    fn fig4a() -> Vec<FluidQueueSpec> {
        let mut v = vec![spec(0, 1, int(2), 1)];
        for p in 1..4 {
            v.push(spec(p, 0, int(1), 0));
        }
        v
    }

    #[test]
    fn dt_four_queues() {
        let s = steady_state(&omega_vector(FluidPolicy::Dt, &fig4a()), &int(60));
        assert_eq!(s.occupancy, int(50));
        assert_eq!(s.remaining, int(10));
        assert_eq!(s.thresholds[&QueueId::new(0, 1)], int(20));
        for p in 1..4 {
            assert_eq!(s.thresholds[&QueueId::new(p, 0)], int(10));
        }
    }

    #[test]
    fn fb_four_queues() {
        let w = omega_vector(FluidPolicy::Fb, &fig4a());
        assert_eq!(w.sum(), int(3));
        let s = steady_state(&w, &int(60));
        assert_eq!(s.occupancy, int(45));
        assert_eq!(s.remaining, int(15));
        assert_eq!(s.thresholds[&QueueId::new(0, 1)], int(30));
        for p in 1..4 {
            assert_eq!(s.thresholds[&QueueId::new(p, 0)], int(5));
        }
    }

    #[test]
    fn single_queue() {
        let s = steady_state(&omega_vector(FluidPolicy::Dt, &[spec(0, 0, int(1), 0)]), &int(60));
        assert_eq!(s.occupancy, int(30));
        assert_eq!(s.remaining, int(30));
    }

    #[test]
    fn occupancy_bound_examples() {
        assert_eq!(occupancy_bound(&[int(1), int(2)], &int(60)), int(45));
        assert_eq!(
            occupancy_bound(&[ratio(1, 2), int(20)], &int(86)),
            int(86) * ratio(41, 2) / ratio(43, 2)
        );
        assert_eq!(occupancy_bound(&[int(1)], &int(60)), int(30));
    }
}
