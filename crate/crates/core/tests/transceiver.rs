use ifdma::complexity::{count, Link, Role, Scenario, System};
use ifdma::conventional::{rx_streams, split_blocks, tx_aggregate};
use ifdma::spectral::OpCount;
use ifdma::unified::{unified_detect_nofde_streams, unified_detect_streams, unified_multiplex_counted, Semantics};
use ifdma::verify::{three_node_allocations, random_blocks};
use ifdma::{
    allocate, build_schedule, rx_conventional, tx_time_domain, unified_detect, unified_detect_nofde,
    unified_multiplex, ChannelModel, ComplexSample, DecompositionPlan, Direction, NodeBlocks, RequestProfile,
    StreamAllocation, Transform, Variant,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug)]
struct Case {
    plan: DecompositionPlan,
    allocs: Vec<StreamAllocation>,
    blocks: NodeBlocks,
}

fn case() -> impl Strategy<Value = Case> {
    (1u32..=6, prop::collection::vec(1usize..=64, 1..6), any::<u64>()).prop_map(|(m, raw, seed)| {
        let band = 1usize << m;
        let mut left = band;
        let mut requests = Vec::new();
        for n in raw {
            let n = n.min(left);
            if n > 0 {
                requests.push((format!("n{}", requests.len()), n));
                left -= n;
            }
        }
        let allocs = allocate(&RequestProfile::new(band, requests)).unwrap();
        let blocks = random_blocks(&mut ChaCha8Rng::seed_from_u64(seed), &allocs);
        Case { plan: DecompositionPlan::radix2(m), allocs, blocks }
    })
}

fn max_diff(a: &[ComplexSample], b: &[ComplexSample]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn close(a: &NodeBlocks, b: &NodeBlocks) -> bool {
    a.len() == b.len() && a.iter().all(|(k, v)| max_diff(v, &b[k]) < 1e-9 * (1.0 + v.len() as f64))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn aggregate_is_the_sum_of_streams(c in case()) {
        let band = c.plan.size();
        let mut sum = vec![Complex64::ZERO; band];
        for (a, block) in c.allocs.iter().zip(split_blocks(&c.blocks, &c.allocs).unwrap()) {
            for (s, v) in sum.iter_mut().zip(tx_time_domain(block, band, a.shift).unwrap()) {
                *s += v;
            }
        }
        prop_assert!(max_diff(&sum, &tx_aggregate(&c.blocks, &c.allocs).unwrap()) < 1e-9);
    }

    #[test]
    fn unified_transmitter_matches_the_chain(c in case()) {
        let schedule = build_schedule(&c.allocs, &c.plan, Variant::Transmit).unwrap();
        let unified = unified_multiplex(&c.blocks, &schedule).unwrap();
        prop_assert!(max_diff(&unified, &tx_aggregate(&c.blocks, &c.allocs).unwrap()) < 1e-9);
    }

    #[test]
    fn detectors_recover_what_was_sent(c in case()) {
        let signal = tx_aggregate(&c.blocks, &c.allocs).unwrap();
        let spectrum = Transform::new(c.plan.clone()).run(&signal, Direction::Forward).unwrap();
        let with = build_schedule(&c.allocs, &c.plan, Variant::WithFde).unwrap();
        let without = build_schedule(&c.allocs, &c.plan, Variant::NoFde).unwrap();
        let chain = rx_conventional(&signal, &c.allocs, &ChannelModel::identity(c.plan.size())).unwrap();
        prop_assert!(close(&chain, &c.blocks));
        prop_assert!(close(&unified_detect(&spectrum, &with).unwrap(), &c.blocks));
        prop_assert!(close(&unified_detect_nofde(&signal, &without).unwrap(), &c.blocks));
    }

    #[test]
    fn no_fde_detector_equals_forward_then_with_fde(c in case(), seed in any::<u64>()) {
        // on arbitrary input, not only on well-formed signals
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = ifdma::verify::random_blocks(&mut rng, &allocate(&RequestProfile::new(c.plan.size(), [("x", c.plan.size())])).unwrap());
        let x = &x[&"x".into()];
        let spectrum = Transform::new(c.plan.clone()).run(x, Direction::Forward).unwrap();
        let with = build_schedule(&c.allocs, &c.plan, Variant::WithFde).unwrap();
        let without = build_schedule(&c.allocs, &c.plan, Variant::NoFde).unwrap();
        let a = unified_detect_streams(&spectrum, &with, Semantics::Broadcast, &mut OpCount::default()).unwrap();
        let b = unified_detect_nofde_streams(x, &without, &mut OpCount::default()).unwrap();
        let oracle = rx_streams(x, &c.allocs, &ChannelModel::identity(c.plan.size())).unwrap();
        for i in 0..a.len() {
            prop_assert!(max_diff(&a[i], &b[i]) < 1e-9 * c.plan.size() as f64);
            prop_assert!(max_diff(&a[i], &oracle[i]) < 1e-9 * c.plan.size() as f64);
        }
    }

    #[test]
    fn exited_lines_can_keep_flowing(c in case(), seed in any::<u64>()) {
        let with = build_schedule(&c.allocs, &c.plan, Variant::WithFde).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let full = allocate(&RequestProfile::new(c.plan.size(), [("x", c.plan.size())])).unwrap();
        let x = random_blocks(&mut rng, &full).remove(&"x".into()).unwrap();
        let broadcast = unified_detect_streams(&x, &with, Semantics::Broadcast, &mut OpCount::default()).unwrap();
        let strict = unified_detect_streams(&x, &with, Semantics::Strict, &mut OpCount::default()).unwrap();
        prop_assert_eq!(broadcast, strict);
    }

    #[test]
    fn two_tap_channel_is_equalized(c in case()) {
        let band = c.plan.size();
        let channel = ChannelModel::from_taps(vec![Complex64::ONE, Complex64::new(0.5, 0.0)], band).unwrap();
        let tx = tx_aggregate(&c.blocks, &c.allocs).unwrap();
        let rx = rx_conventional(&channel.apply_circular(&tx).unwrap(), &c.allocs, &channel).unwrap();
        prop_assert!(close(&rx, &c.blocks));
    }
}

#[test]
fn instrumented_count_matches_the_ledger() {
    for m in 1..=10u32 {
        let band = 1usize << m;
        let plan = DecompositionPlan::radix2(m);
        let full = allocate(&RequestProfile::new(band, [("x", band)])).unwrap();
        let ledger = count(Scenario::new(System::Multi, Link::Uplink, Role::UnifiedNoFde), band).unwrap();
        let with = build_schedule(&full, &plan, Variant::WithFde).unwrap();
        let mut ops = OpCount::default();
        unified_detect_streams(&vec![Complex64::ONE; band], &with, Semantics::Broadcast, &mut ops).unwrap();
        assert_eq!(ops.complex_mults, ledger.exact_multipliers);
        assert_eq!(ledger.exact_multipliers, (band as u64 / 2) * m as u64);

        // single-subcarrier streams are the worst case: every stage runs
        let singles: Vec<_> =
            (0..band).map(|b| StreamAllocation::from_bins(format!("s{b}"), b..b + 1, &plan).unwrap()).collect();
        let without = build_schedule(&singles, &plan, Variant::NoFde).unwrap();
        let mut ops = OpCount::default();
        unified_detect_nofde_streams(&vec![Complex64::ONE; band], &without, &mut ops).unwrap();
        assert_eq!(ops.complex_mults, ledger.exact_multipliers);
        let tx = build_schedule(&singles, &plan, Variant::Transmit).unwrap();
        let blocks: NodeBlocks = singles.iter().map(|s| (s.node.clone(), vec![Complex64::ONE])).collect();
        let mut tx_ops = OpCount::default();
        unified_multiplex_counted(&blocks, &tx, &mut tx_ops).unwrap();
        assert_eq!(tx_ops.complex_mults, ledger.exact_multipliers);
    }
}

#[test]
fn three_node_scenario() {
    let plan = DecompositionPlan::radix2(3);
    let allocs = three_node_allocations();
    let with = build_schedule(&allocs, &plan, Variant::WithFde).unwrap();
    let without = build_schedule(&allocs, &plan, Variant::NoFde).unwrap();
    assert_eq!((0..3).map(|i| with.stream_stage(i)).collect::<Vec<_>>(), vec![2, 1, 0]);
    assert_eq!((0..3).map(|i| without.stream_stage(i)).collect::<Vec<_>>(), vec![1, 2, 3]);
    // one line carries no data
    assert_eq!((0..8).filter(|&l| with.owner(l).is_none()).count(), 1);
    assert_eq!(with.switch_count(), 32);

    let blocks: NodeBlocks = [
        ("A".into(), vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(-1.0, 0.0), Complex64::new(0.0, -1.0)]),
        ("B".into(), vec![Complex64::new(2.0, 1.0), Complex64::new(-1.0, 1.0)]),
        ("C".into(), vec![Complex64::new(0.5, -0.5)]),
    ]
    .into_iter()
    .collect();
    let signal = unified_multiplex(&blocks, &build_schedule(&allocs, &plan, Variant::Transmit).unwrap()).unwrap();
    assert!(close(&unified_detect_nofde(&signal, &without).unwrap(), &blocks));
}
