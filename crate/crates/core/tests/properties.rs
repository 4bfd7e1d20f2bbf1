use fbsim::engine::{run, Action};
use fbsim::fluid::{int, omega_vector, ratio, steady_state, FluidPolicy, FluidQueueSpec};
use fbsim::model::{ClassId, Frac, PriorityId, QueueId, QueueMode, TrafficClass};
use fbsim::policy::{FbaPeriod, PolicyKind};
use fbsim::workload::{
    format_alpha, parse_alpha, parse_cdf, parse_scenario, preset, serialize_scenario, BurstSize,
    ScenarioConfig, SizeDist, SourceKind, SourceSpec,
};
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

fn alpha() -> impl Strategy<Value = Frac> {
    (1i64..=40, 1i64..=8).prop_map(|(n, d)| Frac::new(n, d))
}

fn policy() -> impl Strategy<Value = PolicyKind> {
    prop_oneof![
        Just(PolicyKind::CompleteSharing),
        Just(PolicyKind::DynamicThresholds),
        Just(PolicyKind::Fb),
        Just(PolicyKind::FbSingleQueue),
        Just(PolicyKind::Fba(FbaPeriod::PerEvent)),
        (1u32..=8).prop_map(|p| PolicyKind::Fba(FbaPeriod::Every(f64::from(p) / 2.0))),
    ]
}

fn source(ports: usize, classes: u32) -> impl Strategy<Value = SourceSpec> {
    let kind = prop_oneof![
        (1u32..=12, 0u32..=20).prop_map(|(r, s)| SourceKind::Constant {
            rate: f64::from(r) / 4.0,
            start: f64::from(s),
            stop: None,
        }),
        (5u32..=40, 1u32..=8, 0u32..=40).prop_map(|(r, d, s)| SourceKind::Burst {
            rate: f64::from(r) / 4.0,
            size: BurstSize::Duration(f64::from(d)),
            start: f64::from(s),
        }),
        (1u32..=9, 2u32..=16, 0u32..=10).prop_map(|(f, r, s)| SourceKind::Burst {
            rate: f64::from(r) / 2.0,
            size: BurstSize::Fraction(f64::from(f) / 10.0),
            start: f64::from(s),
        }),
        (2u32..=30, 1u32..=8).prop_map(|(m, r)| SourceKind::Poisson {
            mean_interarrival: f64::from(m),
            flow_rate: f64::from(r) / 2.0,
            sizes: SizeDist::Default,
            start: 0.0,
            stop: Some(70.0),
        }),
    ];
    (0..ports, 0..classes, kind).prop_map(|(port, class, kind)| SourceSpec {
        port,
        class: ClassId(class),
        kind,
    })
}

prop_compose! {
    fn scenario()(
        buffer in 4u64..=200,
        ports in 1usize..=4,
        n_classes in 1u32..=4,
        pol in policy(),
        seed in any::<u64>(),
        staleness in prop_oneof![Just(0.0), (1u32..=4).prop_map(|s| f64::from(s) / 2.0)],
        threshold in 0u64..=2,
    )(
        classes in proptest::collection::vec((alpha(), 0u32..=2), n_classes as usize),
        sources in proptest::collection::vec(source(ports, n_classes), 1..=6),
        buffer in Just(buffer),
        ports in Just(ports),
        pol in Just(pol),
        seed in Just(seed),
        staleness in Just(staleness),
        threshold in Just(threshold),
    ) -> ScenarioConfig {
        let mut cfg = preset("fig2").unwrap();
        cfg.name = "prop".into();
        cfg.buffer = buffer;
        cfg.ports = ports;
        cfg.mode = if pol == PolicyKind::FbSingleQueue { QueueMode::Single } else { QueueMode::Multi };
        cfg.policy = pol;
        cfg.classes = classes
            .into_iter()
            .enumerate()
            .map(|(i, (a, p))| TrafficClass { id: ClassId(i as u32), alpha: a, priority: PriorityId(p) })
            .collect();
        cfg.sources = sources;
        cfg.horizon = 80.0;
        cfg.seed = seed;
        cfg.sample_interval = 0.5;
        cfg.staleness = staleness;
        cfg.congestion_threshold = threshold;
        cfg
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn packets_are_conserved_and_capacity_holds(cfg in scenario()) {
        let trace = run(&cfg).unwrap();
        prop_assert!(trace.is_conserved());
        prop_assert!(trace.complete);
        let mut total = 0u64;
        for r in &trace.records {
            prop_assert_eq!(r.occupancy, total);
            match r.action {
                Action::Admitted => total += 1,
                Action::Departed => total -= 1,
                Action::Dropped => {}
            }
            prop_assert!(total <= cfg.buffer);
        }
        prop_assert_eq!(total, trace.final_lengths.iter().sum::<u64>());
        prop_assert!(trace.samples.iter().all(|s| s.occupancy <= cfg.buffer));
    }

    #[test]
    fn identical_configs_give_identical_traces(cfg in scenario()) {
        prop_assert_eq!(run(&cfg).unwrap(), run(&cfg).unwrap());
    }

    #[test]
    fn fresh_decisions_follow_the_threshold_rule(cfg in scenario()) {
        let mut cfg = cfg;
        cfg.staleness = 0.0;
        let trace = run(&cfg).unwrap();
        for r in trace.decisions() {
            let thr = r.threshold.unwrap();
            prop_assert!(thr >= Frac::zero());
            let room = r.occupancy < cfg.buffer;
            let want = match cfg.policy {
                PolicyKind::CompleteSharing => room,
                _ => room && Frac::from_integer(r.queue_len as i64) < thr,
            };
            prop_assert_eq!(r.action == Action::Admitted, want, "record {:?}", r);
            if cfg.policy == PolicyKind::DynamicThresholds {
                let a = cfg.class(r.class).unwrap().alpha;
                prop_assert_eq!(thr, a * Frac::from_integer((cfg.buffer - r.occupancy) as i64));
            }
        }
    }

    #[test]
    fn serialized_scenarios_parse_back(cfg in scenario()) {
        let text = serialize_scenario(&cfg);
        let back = parse_scenario(&text, None).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(serialize_scenario(&back), text);
    }

    #[test]
    fn alpha_text_round_trips(n in 1i64..=1_000_000, d in 1i64..=1_000_000) {
        let a = Frac::new(n, d);
        prop_assert_eq!(parse_alpha(&format_alpha(a)), Ok(a));
    }

    #[test]
    fn parsers_never_panic(text in "\\PC{0,200}") {
        let _ = parse_scenario(&text, None);
        let _ = parse_cdf(&text);
        let _ = parse_alpha(&text);
    }

    #[test]
    fn steady_state_partitions_the_buffer(
        buffer in 1i64..=100_000,
        queues in proptest::collection::vec((0usize..6, 0u32..4, 1i64..=50, 1i64..=10, 0u32..3), 1..10),
        fb in any::<bool>(),
    ) {
        let mut specs: Vec<FluidQueueSpec> = queues
            .into_iter()
            .map(|(p, c, n, d, pr)| FluidQueueSpec {
                id: QueueId::new(p, c),
                alpha: ratio(n, d),
                priority: PriorityId(pr),
            })
            .collect();
        specs.sort_by_key(|q| q.id);
        specs.dedup_by_key(|q| q.id);
        let policy = if fb { FluidPolicy::Fb } else { FluidPolicy::Dt };
        let omegas = omega_vector(policy, &specs);
        let ss = steady_state(&omegas, &int(buffer));
        prop_assert_eq!(&ss.occupancy + &ss.remaining, int(buffer));
        let sum: BigRational = ss.thresholds.values().cloned().sum();
        prop_assert_eq!(sum, ss.occupancy.clone());
        prop_assert!(ss.occupancy < int(buffer));
        if fb {
            // Per priority, ω sums to at most α_max.
            for p in 0..3 {
                let members: Vec<&FluidQueueSpec> = specs.iter().filter(|q| q.priority == PriorityId(p)).collect();
                let total: BigRational = members.iter().map(|q| omegas.get(&q.id).unwrap().clone()).sum();
                let max = members.iter().map(|q| q.alpha.clone()).max().unwrap_or_else(BigRational::zero);
                prop_assert!(total <= max);
            }
        } else {
            for q in &specs {
                prop_assert_eq!(omegas.get(&q.id).unwrap(), &q.alpha);
            }
        }
        prop_assert!(ss.remaining > BigRational::zero());
    }
}
