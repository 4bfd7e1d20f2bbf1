//! Numerical integration of the fluid transient.
//!
//! Every queue is either *tracking* (it sits on its threshold `ω(B − ΣQ)` and
//! admits as much as it needs to stay there) or *free* (it moves at a fixed
//! rate: new queues fill at `r − γ` below threshold, old queues above
//! threshold drain at `γ`). Tracking rates are solved jointly each step, with
//! queues whose solved rate would leave `[−γ, r − γ]` demoted to free.

use num_traits::Signed;
use serde::Serialize;

use super::to_f64;
use super::transient::TransientScenario;
use crate::error::FluidError;
use crate::model::QueueId;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationOptions {
    /// Fixed step. Defaults to `B / 1e4`.
    pub step: Option<f64>,
    /// Stop time. Defaults to the latest time any new queue could cross.
    pub horizon: Option<f64>,
    /// Absolute tolerance on threshold comparisons, as a fraction of `B`.
    pub tolerance: f64,
    /// Upper bound on stored samples; the trajectory is thinned to fit.
    pub max_samples: usize,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        IntegrationOptions {
            step: None,
            horizon: None,
            tolerance: 1e-9,
            max_samples: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ResolutionWarning {
    /// The first crossing fell inside the first step.
    CrossingInFirstStep,
    /// The step exceeds a tenth of the horizon.
    CoarseStep,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    /// Old queues first, then new queues.
    pub queues: Vec<QueueId>,
    pub times: Vec<f64>,
    /// `lengths[k][i]` is queue `i` at `times[k]`.
    pub lengths: Vec<Vec<f64>>,
    pub thresholds: Vec<Vec<f64>>,
    /// Crossing time per new queue, `None` if it never crossed.
    pub crossings: Vec<(QueueId, Option<f64>)>,
    pub first_crossing: Option<f64>,
    pub step: f64,
    pub warnings: Vec<ResolutionWarning>,
}

struct Lane {
    omega: f64,
    gamma: f64,
    /// Rate bound while tracking (`r − γ` for new queues, unbounded for old).
    upper: f64,
    is_new: bool,
    crossed: Option<f64>,
}

fn f(x: &num_rational::BigRational) -> f64 {
    to_f64(x)
}

/// Rate of each queue given the current lengths.
fn rates(lanes: &[Lane], q: &[f64], buffer: f64, rate: f64, tol: f64) -> Vec<f64> {
    let total: f64 = q.iter().sum();
    let remaining = buffer - total;
    let mut tracking: Vec<bool> = lanes
        .iter()
        .zip(q)
        .map(|(l, &len)| {
            let thr = l.omega * remaining;
            if l.is_new {
                l.crossed.is_some()
            } else {
                len <= thr + tol
            }
        })
        .collect();
    let mut fixed: Vec<f64> = lanes
        .iter()
        .map(|l| if l.is_new { rate - l.gamma } else { -l.gamma })
        .collect();
    loop {
        let free_sum: f64 = (0..lanes.len()).filter(|&i| !tracking[i]).map(|i| fixed[i]).sum();
        let omega_c: f64 = (0..lanes.len())
            .filter(|&i| tracking[i])
            .map(|i| lanes[i].omega)
            .sum();
        let d = free_sum / (1.0 + omega_c);
        let mut changed = false;
        for (i, l) in lanes.iter().enumerate() {
            if !tracking[i] {
                continue;
            }
            let want = -l.omega * d;
            if want < -l.gamma {
                fixed[i] = -l.gamma;
            } else if want > l.upper {
                fixed[i] = l.upper;
            } else {
                continue;
            }
            tracking[i] = false;
            changed = true;
        }
        if !changed {
            return (0..lanes.len())
                .map(|i| {
                    if tracking[i] {
                        -lanes[i].omega * d
                    } else {
                        fixed[i]
                    }
                })
                .collect();
        }
    }
}

/// Integrate the transient with a fixed explicit step.
///
/// Tracking queues are snapped back onto their thresholds after each step so
/// round-off does not accumulate. A crossing is located by linear
/// interpolation inside the step in which it happens.
pub fn integrate_transient(
    ts: &TransientScenario,
    opts: &IntegrationOptions,
) -> Result<Trajectory, FluidError> {
    if ts.new.is_empty() {
        return Err(FluidError::NoNewQueues);
    }
    if !ts.buffer.is_positive() || !ts.rate.is_positive() {
        return Err(FluidError::InvalidArgument {
            name: "scenario",
            message: "buffer and rate must be positive".into(),
        });
    }
    let buffer = f(&ts.buffer);
    let rate = f(&ts.rate);
    let tol = opts.tolerance * buffer;
    let step = opts.step.unwrap_or(buffer / 1e4);
    if !(step.is_finite() && step > 0.0) {
        return Err(FluidError::InvalidArgument {
            name: "step",
            message: format!("must be positive, got {step}"),
        });
    }

    let mut lanes: Vec<Lane> = Vec::with_capacity(ts.old.len() + ts.new.len());
    let mut q: Vec<f64> = Vec::with_capacity(lanes.capacity());
    let omega_before: f64 = ts.old.iter().map(|x| f(&x.omega_before())).sum();
    for x in &ts.old {
        lanes.push(Lane {
            omega: f(&x.omega()),
            gamma: f(&x.gamma),
            upper: f64::INFINITY,
            is_new: false,
            crossed: None,
        });
        q.push(buffer * f(&x.omega_before()) / (1.0 + omega_before));
    }
    for x in &ts.new {
        lanes.push(Lane {
            omega: f(&x.omega()),
            gamma: f(&x.gamma),
            upper: rate - f(&x.gamma),
            is_new: true,
            crossed: None,
        });
        q.push(0.0);
    }
    let min_fill = ts
        .new
        .iter()
        .map(|x| rate - f(&x.gamma))
        .fold(f64::INFINITY, f64::min);
    // A new queue filling at r − γ cannot stay below a threshold under B.
    let horizon = opts.horizon.unwrap_or(if min_fill > 0.0 {
        1.01 * buffer / min_fill
    } else {
        buffer
    });

    let mut warnings = Vec::new();
    if step > horizon / 10.0 {
        warnings.push(ResolutionWarning::CoarseStep);
    }
    let total_steps = (horizon / step).ceil() as usize;
    let stride = (total_steps / opts.max_samples.max(1)).max(1);
    let queues: Vec<QueueId> = ts.old.iter().chain(&ts.new).map(|x| x.id).collect();
    let omegas = lanes_omegas(ts);
    let mut times = Vec::new();
    let mut lengths = Vec::new();
    let mut thresholds = Vec::new();
    let record = |t: f64,
                  q: &[f64],
                  times: &mut Vec<f64>,
                  lengths: &mut Vec<Vec<f64>>,
                  thresholds: &mut Vec<Vec<f64>>| {
        let rem = buffer - q.iter().sum::<f64>();
        times.push(t);
        lengths.push(q.to_vec());
        thresholds.push(lanes_thresholds(&omegas, rem));
    };
    record(0.0, &q, &mut times, &mut lengths, &mut thresholds);

    let mut t = 0.0;
    for k in 1..=total_steps {
        let d = rates(&lanes, &q, buffer, rate, tol);
        let prev = q.clone();
        let prev_rem = buffer - prev.iter().sum::<f64>();
        for i in 0..q.len() {
            q[i] = (q[i] + d[i] * step).max(0.0);
        }
        let rem = buffer - q.iter().sum::<f64>();
        let next_t = t + step;
        for i in 0..lanes.len() {
            let l = &lanes[i];
            if !l.is_new || l.crossed.is_some() {
                continue;
            }
            let g0 = prev[i] - l.omega * prev_rem;
            let g1 = q[i] - l.omega * rem;
            if g1 >= -tol {
                let frac = if g1 > g0 {
                    (-g0 / (g1 - g0)).clamp(0.0, 1.0)
                } else {
                    1.0
                };
                lanes[i].crossed = Some(t + frac * step);
                if k == 1 {
                    warnings.push(ResolutionWarning::CrossingInFirstStep);
                }
            }
        }
        // snap tracking queues onto their thresholds
        let tracking: Vec<bool> = lanes
            .iter()
            .zip(&q)
            .map(|(l, &len)| {
                if l.is_new {
                    l.crossed.is_some()
                } else {
                    len <= l.omega * rem + tol
                }
            })
            .collect();
        let loose: f64 = (0..q.len()).filter(|&i| !tracking[i]).map(|i| q[i]).sum();
        let omega_c: f64 = (0..q.len())
            .filter(|&i| tracking[i])
            .map(|i| lanes[i].omega)
            .sum();
        let snapped_rem = (buffer - loose) / (1.0 + omega_c);
        for i in 0..q.len() {
            if tracking[i] {
                q[i] = lanes[i].omega * snapped_rem;
            }
        }
        t = next_t;
        if k % stride == 0 || k == total_steps {
            record(t, &q, &mut times, &mut lengths, &mut thresholds);
        }
        if lanes.iter().all(|l| !l.is_new || l.crossed.is_some()) {
            if k % stride != 0 {
                record(t, &q, &mut times, &mut lengths, &mut thresholds);
            }
            break;
        }
    }

    let crossings: Vec<(QueueId, Option<f64>)> = ts
        .new
        .iter()
        .zip(lanes.iter().filter(|l| l.is_new))
        .map(|(x, l)| (x.id, l.crossed))
        .collect();
    let first_crossing = crossings
        .iter()
        .filter_map(|(_, c)| *c)
        .fold(None, |acc: Option<f64>, c| Some(acc.map_or(c, |a| a.min(c))));
    Ok(Trajectory {
        queues,
        times,
        lengths,
        thresholds,
        crossings,
        first_crossing,
        step,
        warnings,
    })
}

fn lanes_omegas(ts: &TransientScenario) -> Vec<f64> {
    ts.old.iter().chain(&ts.new).map(|x| f(&x.omega())).collect()
}

fn lanes_thresholds(omegas: &[f64], remaining: f64) -> Vec<f64> {
    omegas.iter().map(|w| w * remaining).collect()
}

/// First crossing time, refining the step until two successive halvings
/// agree to within 0.1%. Returns the trajectory of the finest run.
pub fn estimate_t1(ts: &TransientScenario, opts: &IntegrationOptions) -> Result<Trajectory, FluidError> {
    let mut o = *opts;
    let mut run = integrate_transient(ts, &o)?;
    for _ in 0..10 {
        o.step = Some(run.step / 2.0);
        let finer = integrate_transient(ts, &o)?;
        let settled = match (run.first_crossing, finer.first_crossing) {
            (Some(a), Some(b)) => (a - b).abs() <= 1e-3 * b.abs().max(f64::MIN_POSITIVE),
            (None, None) => true,
            _ => false,
        };
        run = finer;
        if settled {
            break;
        }
    }
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fluid::{int, ratio, t1, FluidQueue};

    fn q(port: usize, class: u32, omega: num_rational::BigRational) -> FluidQueue {
        FluidQueue::steady(QueueId::new(port, class), omega, int(1))
    }

    fn three_lows(rate: i64) -> TransientScenario {
        TransientScenario {
            buffer: int(60),
            old: (1..4).map(|p| q(p, 0, ratio(1, 3))).collect(),
            new: vec![q(0, 1, int(2))],
            rate: int(rate),
        }
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-3 * b.abs()
    }

    #[test]
    fn matches_case1_closed_form() {
        let run = estimate_t1(&three_lows(4), &IntegrationOptions::default()).unwrap();
        let t = run.first_crossing.unwrap();
        assert!(close(t, 10.0), "{t}");
        assert!(run.warnings.is_empty());
    }

    #[test]
    fn matches_case2_closed_form() {
        let ts = three_lows(10);
        let run = estimate_t1(&ts, &IntegrationOptions::default()).unwrap();
        let exact = t1(&ts).unwrap().first.to_f64();
        assert!(close(run.first_crossing.unwrap(), exact));
    }

    #[test]
    fn never_crosses_when_rate_matches_service() {
        let run = integrate_transient(&three_lows(1), &IntegrationOptions::default()).unwrap();
        assert_eq!(run.first_crossing, None);
    }

    #[test]
    fn coarse_step_is_flagged() {
        let opts = IntegrationOptions {
            step: Some(30.0),
            ..Default::default()
        };
        let run = integrate_transient(&three_lows(4), &opts).unwrap();
        assert!(run.warnings.contains(&ResolutionWarning::CoarseStep));
        assert!(run.warnings.contains(&ResolutionWarning::CrossingInFirstStep));
    }

    #[test]
    fn occupancy_never_exceeds_buffer() {
        let run = integrate_transient(&three_lows(10), &IntegrationOptions::default()).unwrap();
        for row in &run.lengths {
            assert!(row.iter().sum::<f64>() <= 60.0 + 1e-6);
        }
    }
}
