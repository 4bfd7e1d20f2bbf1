//! On large buffers the packet simulator's first burst drop lands where the
//! fluid model puts t1.

use fbsim::engine::{run, Action};
use fbsim::fluid::{analyze, scenario_fluid};
use fbsim::model::ClassId;
use fbsim::workload::{preset, BurstSize, ScenarioConfig, SourceKind};

/// Relative agreement required between first-drop delay and fluid t1.
const TOLERANCE: f64 = 0.05;

/// The incast preset with the buffer scaled by `k`. The burst starts once the
/// low queues have filled and lasts twice the fluid t1.
fn scaled(name: &str, k: u64) -> (ScenarioConfig, f64) {
    let mut cfg = preset(name).unwrap();
    cfg.buffer *= k;
    let start = cfg.buffer as f64 / 2.0;
    let t1 = {
        let ts = scenario_fluid(&cfg).unwrap().transient().unwrap();
        analyze(&ts).unwrap().t1.unwrap().to_f64()
    };
    for s in &mut cfg.sources {
        if let SourceKind::Burst { size, start: st, .. } = &mut s.kind {
            *size = BurstSize::Duration(2.0 * t1);
            *st = start;
        }
    }
    cfg.horizon = start + 2.0 * t1 + 1.0;
    (cfg, t1)
}

fn first_burst_drop_delay(cfg: &ScenarioConfig) -> f64 {
    let start = cfg
        .sources
        .iter()
        .find_map(|s| match s.kind {
            SourceKind::Burst { start, .. } => Some(start),
            _ => None,
        })
        .unwrap();
    let trace = run(cfg).unwrap();
    let drop = trace
        .records
        .iter()
        .find(|r| r.action == Action::Dropped && r.class == ClassId(5))
        .expect("burst is dropped eventually");
    drop.time - start
}

#[test]
fn dt_incast_first_drop_matches_t1() {
    let (cfg, t1) = scaled("fig4_incast", 100);
    assert!((t1 - 200.0).abs() < 1e-9);
    let delay = first_burst_drop_delay(&cfg);
    assert!(
        (delay - t1).abs() <= TOLERANCE * t1,
        "first drop after {delay}, t1 = {t1}"
    );
}

#[test]
fn fb_incast_first_drop_matches_t1() {
    let (cfg, t1) = scaled("fig5_incast", 100);
    assert!((t1 - 937.5).abs() < 1e-9);
    let delay = first_burst_drop_delay(&cfg);
    assert!(
        (delay - t1).abs() <= TOLERANCE * t1,
        "first drop after {delay}, t1 = {t1}"
    );
}
