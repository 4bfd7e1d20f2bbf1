use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use super::config::{BurstSize, ScenarioConfig, SourceKind, SourceSpec};
use crate::model::ClassId;

/// One packet offered to the switch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arrival {
    pub time: f64,
    pub port: usize,
    pub class: ClassId,
    /// Index of the generating source in the scenario.
    pub source: usize,
}

/// Number of packets a burst of rate `rate` sends in `[0, duration)`.
fn burst_count(rate: f64, duration: f64) -> u64 {
    (rate * duration - 1e-9).ceil().max(0.0) as u64
}

/// Burst duration in time units.
pub fn burst_duration(rate: f64, size: &BurstSize, buffer: u64) -> f64 {
    match size {
        BurstSize::Duration(d) => *d,
        BurstSize::Fraction(f) => f * buffer as f64 / rate,
    }
}

fn periodic(
    out: &mut Vec<Arrival>,
    s: &SourceSpec,
    idx: usize,
    start: f64,
    rate: f64,
    end: f64,
    limit: Option<u64>,
) {
    let mut k = 0u64;
    loop {
        if limit.is_some_and(|n| k >= n) {
            break;
        }
        let t = start + k as f64 / rate;
        if t >= end {
            break;
        }
        out.push(Arrival {
            time: t,
            port: s.port,
            class: s.class,
            source: idx,
        });
        k += 1;
    }
}

/// Realize every source of `cfg` up to its horizon, ordered by time and then
/// by source index.
///
/// Each source draws from its own stream of a generator seeded by
/// `cfg.seed`, so adding a source does not perturb the others.
pub fn build_sources(cfg: &ScenarioConfig) -> Vec<Arrival> {
    let mut out = Vec::new();
    // events exactly at the horizon are still processed
    let end = cfg.horizon + f64::EPSILON * cfg.horizon.max(1.0);
    for (idx, s) in cfg.sources.iter().enumerate() {
        match &s.kind {
            SourceKind::Constant { rate, start, stop } => {
                let stop = stop.map_or(end, |x| x.min(end));
                periodic(&mut out, s, idx, *start, *rate, stop, None);
            }
            SourceKind::Burst { rate, size, start } => {
                let n = burst_count(*rate, burst_duration(*rate, size, cfg.buffer));
                periodic(&mut out, s, idx, *start, *rate, end, Some(n));
            }
            SourceKind::Poisson {
                mean_interarrival,
                flow_rate,
                sizes,
                start,
                stop,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(idx as u64);
                let gaps = Exp::new(1.0 / mean_interarrival).expect("validated rate");
                let cdf = sizes.cdf();
                let stop = stop.map_or(end, |x| x.min(end));
                let mut t = *start;
                loop {
                    t += gaps.sample(&mut rng);
                    if t >= stop {
                        break;
                    }
                    let n = cdf.sample(&mut rng);
                    periodic(&mut out, s, idx, t, *flow_rate, end, Some(n));
                }
            }
        }
    }
    out.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.source.cmp(&b.source)));
    out
}
