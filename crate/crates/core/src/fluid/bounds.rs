//! α-configuration solvers for burst-tolerance guarantees.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::transient::{classify_case, Case, TransientScenario};
use crate::error::FluidError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlphaBound {
    AtMost(BigRational),
    AtLeast(BigRational),
    GreaterThan(BigRational),
    /// Any positive α satisfies the requirement.
    Unconstrained,
    /// No positive α satisfies the requirement.
    Infeasible,
}

impl AlphaBound {
    pub fn value(&self) -> Option<&BigRational> {
        match self {
            AlphaBound::AtMost(v) | AlphaBound::AtLeast(v) | AlphaBound::GreaterThan(v) => Some(v),
            _ => None,
        }
    }

    /// Does `alpha` meet the bound?
    pub fn admits(&self, alpha: &BigRational) -> bool {
        match self {
            AlphaBound::AtMost(v) => alpha <= v,
            AlphaBound::AtLeast(v) => alpha >= v,
            AlphaBound::GreaterThan(v) => alpha > v,
            AlphaBound::Unconstrained => true,
            AlphaBound::Infeasible => false,
        }
    }
}

impl fmt::Display for AlphaBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |x: &BigRational| super::to_f64(x);
        match self {
            AlphaBound::AtMost(v) => write!(f, "<= {} ({})", show(v), v),
            AlphaBound::AtLeast(v) => write!(f, ">= {} ({})", show(v), v),
            AlphaBound::GreaterThan(v) => write!(f, "> {} ({})", show(v), v),
            AlphaBound::Unconstrained => f.write_str("unconstrained"),
            AlphaBound::Infeasible => f.write_str("infeasible"),
        }
    }
}

impl Serialize for AlphaBound {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

fn positive(name: &'static str, x: &BigRational) -> Result<(), FluidError> {
    if x.is_positive() {
        Ok(())
    } else {
        Err(FluidError::InvalidArgument {
            name,
            message: format!("must be > 0, got {x}"),
        })
    }
}

/// Largest low-priority α that lets a burst of rate `r` reach its
/// steady-state share without transient drops: `α_L ≤ 1/(r − (NUM+1))`.
pub fn alpha_l_for_zero_transient(rate: &BigRational, num: u32) -> Result<AlphaBound, FluidError> {
    positive("rate", rate)?;
    if num == 0 {
        return Err(FluidError::InvalidArgument {
            name: "num",
            message: "must be >= 1".into(),
        });
    }
    let den = rate - super::int(i64::from(num) + 1);
    Ok(if den.is_positive() {
        AlphaBound::AtMost(den.recip())
    } else {
        AlphaBound::Unconstrained
    })
}

/// `α_L ≤ B/((r−2)·t) − 1` for a burst `(r, t)` to pass without drops.
pub fn alpha_l_for_burst(
    buffer: &BigRational,
    rate: &BigRational,
    duration: &BigRational,
) -> Result<AlphaBound, FluidError> {
    positive("buffer", buffer)?;
    positive("duration", duration)?;
    let two = super::int(2);
    if rate <= &two {
        return Ok(AlphaBound::Unconstrained);
    }
    let bound = buffer / ((rate - two) * duration) - BigRational::one();
    Ok(if bound.is_positive() {
        AlphaBound::AtMost(bound)
    } else {
        AlphaBound::Infeasible
    })
}

/// `α_H > 1 / (B/((r−1)·t·(1+α_L)) − (r−2)/(r−1))`.
pub fn alpha_h_for_burst(
    buffer: &BigRational,
    rate: &BigRational,
    duration: &BigRational,
    alpha_l: &BigRational,
) -> Result<AlphaBound, FluidError> {
    positive("buffer", buffer)?;
    positive("duration", duration)?;
    let one = BigRational::one();
    if rate <= &one {
        return Err(FluidError::InvalidArgument {
            name: "rate",
            message: format!("must be > 1, got {rate}"),
        });
    }
    if alpha_l.is_negative() {
        return Err(FluidError::InvalidArgument {
            name: "alpha_l",
            message: format!("must be >= 0, got {alpha_l}"),
        });
    }
    let r1 = rate - &one;
    let den = buffer / (&r1 * duration * (&one + alpha_l)) - (rate - super::int(2)) / &r1;
    Ok(if den.is_positive() {
        AlphaBound::GreaterThan(den.recip())
    } else {
        AlphaBound::Infeasible
    })
}

/// α_H with every lower priority's `α_max` summed into a single α_L.
pub fn multi_priority_alpha_h(
    lower: &[BigRational],
    buffer: &BigRational,
    rate: &BigRational,
    duration: &BigRational,
) -> Result<AlphaBound, FluidError> {
    let alpha_x = lower.iter().fold(BigRational::zero(), |a, b| a + b);
    alpha_h_for_burst(buffer, rate, duration, &alpha_x)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralBounds {
    pub case: Case,
    /// Low-priority α under which the scenario stays in Case 1.
    pub alpha_l: AlphaBound,
    /// Smallest α for the first new queue so that `t1 ≥ t`.
    pub alpha_h: AlphaBound,
}

/// Bounds for an arbitrary transient scenario.
///
/// The α_L condition uses the unaffected old queues' γ sum, or the affected
/// ones when every old queue is affected. The α_H bound inverts the `t1`
/// expression of the scenario's case, with the old queues' ω sum standing in
/// for α_L.
pub fn alpha_bounds_general(
    ts: &TransientScenario,
    duration: &BigRational,
) -> Result<GeneralBounds, FluidError> {
    positive("duration", duration)?;
    let case = classify_case(ts)?;
    let one = BigRational::one();
    let n_new = super::int(ts.new.len() as i64);
    let sum = |it: &mut dyn Iterator<Item = BigRational>| it.fold(BigRational::zero(), |a, b| a + b);

    let alpha_l = if ts.old.is_empty() {
        AlphaBound::Unconstrained
    } else {
        let has_ne = ts.unaffected().next().is_some();
        let (first, star_gamma) = if has_ne {
            (
                sum(&mut ts.new.iter().chain(ts.affected()).map(|q| q.gamma.clone())),
                sum(&mut ts.unaffected().map(|q| q.gamma.clone())),
            )
        } else {
            (
                sum(&mut ts.new.iter().map(|q| q.gamma.clone())),
                sum(&mut ts.affected().map(|q| q.gamma.clone())),
            )
        };
        let den = &n_new / &star_gamma * (&ts.rate - first / &n_new) - &one;
        if den.is_positive() {
            AlphaBound::AtMost(den.recip())
        } else {
            AlphaBound::Unconstrained
        }
    };

    let target = &ts.new[0];
    let fill = &ts.rate - &target.gamma;
    let alpha_h = if !fill.is_positive() {
        AlphaBound::Unconstrained
    } else {
        let low = &one + ts.omega_old_before();
        let excess = ts.new_excess();
        let (num, den) = match case {
            Case::Case1 => {
                let omega_ne = sum(&mut ts.unaffected().map(|q| q.omega()));
                let gamma_e = sum(&mut ts.affected().map(|q| q.gamma.clone()));
                let track = &one + &omega_ne;
                (
                    duration * &low * &fill * &track,
                    &ts.buffer * &track - duration * &low * (&excess - gamma_e),
                )
            }
            Case::Case2 => (
                duration * &low * &fill,
                &ts.buffer - duration * &low * (&excess - ts.num()),
            ),
        };
        if den.is_positive() {
            AlphaBound::AtLeast(num / den / &target.share)
        } else {
            AlphaBound::Infeasible
        }
    };

    Ok(GeneralBounds {
        case,
        alpha_l,
        alpha_h,
    })
}
