use ifdma::allocation::{check_feasibility, group_by_node, minimal_partition};
use ifdma::spectral::bit_reverse_index;
use ifdma::{allocate, allocate_composite, DecompositionPlan, Error, RequestProfile, StreamAllocation};
use proptest::prelude::*;

fn profile() -> impl Strategy<Value = RequestProfile> {
    (1u32..=10).prop_flat_map(|m| {
        let band = 1usize << m;
        prop::collection::vec(1..=band, 1..8).prop_map(move |mut sizes| {
            // trim to a feasible total
            let mut left = band;
            sizes.retain_mut(|n| {
                *n = (*n).min(left);
                left -= *n;
                *n > 0
            });
            RequestProfile::new(band, sizes.into_iter().enumerate().map(|(i, n)| (format!("n{i}"), n)))
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn streams_are_disjoint_and_evenly_spaced(p in profile()) {
        let allocs = allocate(&p).unwrap();
        let band = p.band_size;
        let bits = band.trailing_zeros();
        let mut used = vec![false; band];
        for a in &allocs {
            prop_assert!(a.size.is_power_of_two());
            prop_assert!(a.is_evenly_spaced());
            prop_assert_eq!(a.bins.start % a.size, 0);
            let mut image: Vec<_> = a.bins.clone().map(|b| bit_reverse_index(b, bits).unwrap()).collect();
            image.sort_unstable();
            prop_assert_eq!(&image, &a.subcarriers);
            for &k in &a.subcarriers {
                prop_assert!(!used[k]);
                used[k] = true;
            }
        }
        for node in group_by_node(&allocs) {
            let req = p.requests.iter().find(|r| r.node == node.node).unwrap();
            prop_assert_eq!(node.total(), req.count);
            prop_assert_eq!(node.streams.len(), req.count.count_ones() as usize);
        }
        if p.total() == band {
            prop_assert!(used.iter().all(|&u| u));
        }
    }

    #[test]
    fn partition_uses_popcount_parts(n in 1usize..=4096) {
        let parts = minimal_partition(n).unwrap();
        prop_assert_eq!(parts.iter().sum::<usize>(), n);
        prop_assert_eq!(parts.len(), n.count_ones() as usize);
        prop_assert!(parts.iter().all(|p| p.is_power_of_two()));
    }
}

#[test]
fn infeasible_requests_are_rejected() {
    let over = RequestProfile::new(8, [("a", 5), ("b", 4)]);
    assert!(!check_feasibility(&over));
    assert!(matches!(allocate(&over), Err(Error::Infeasible { requested: 9, available: 8 })));
    assert!(matches!(allocate(&RequestProfile::new(8, [("a", 0)])), Err(Error::ZeroRequest)));
    assert!(matches!(allocate(&RequestProfile::new(12, [("a", 1)])), Err(Error::NotPowerOfTwo(12))));
}

#[test]
fn eight_subcarrier_example() {
    let allocs = allocate(&RequestProfile::new(8, [("A", 2), ("B", 1), ("C", 4)])).unwrap();
    let got: Vec<_> = allocs.iter().map(|a| (a.node.to_string(), a.subcarriers.clone())).collect();
    assert_eq!(
        got,
        vec![("C".into(), vec![0, 2, 4, 6]), ("A".into(), vec![1, 5]), ("B".into(), vec![3])]
    );
}

#[test]
fn node_needing_three_subcarriers_gets_two_streams() {
    let allocs = allocate(&RequestProfile::new(16, [("a", 3), ("b", 8)])).unwrap();
    let a: Vec<_> = allocs.iter().filter(|s| s.node.0 == "a").map(|s| s.size).collect();
    assert_eq!(a, vec![2, 1]);
}

#[test]
fn twelve_point_placement() {
    let plan = DecompositionPlan::new(vec![2, 3, 2]).unwrap();
    assert_eq!(plan.admissible_sizes(), vec![12, 6, 2, 1]);
    let a = StreamAllocation::from_bins("A", 6..12, &plan).unwrap();
    let b = StreamAllocation::from_bins("B", 2..4, &plan).unwrap();
    let c = StreamAllocation::from_bins("C", 0..1, &plan).unwrap();
    assert_eq!(a.subcarriers, vec![1, 3, 5, 7, 9, 11]);
    assert_eq!(b.subcarriers, vec![2, 8]);
    assert_eq!(c.subcarriers, vec![0]);
    assert!(matches!(StreamAllocation::from_bins("D", 1..3, &plan), Err(Error::MisalignedBins { .. })));
}

#[test]
fn composite_rejects_inadmissible_sizes_and_lists_the_set() {
    let plan = DecompositionPlan::new(vec![2, 3, 2]).unwrap();
    let err = allocate_composite(&RequestProfile::new(12, [("A", 4)]), &plan).unwrap_err();
    match &err {
        Error::InadmissibleSize { size: 4, admissible } => assert_eq!(admissible, &vec![12, 6, 2, 1]),
        other => panic!("unexpected {other:?}"),
    }
    assert!(err.to_string().contains("12, 6, 2, 1") || err.to_string().contains("[12, 6, 2, 1]"));
    let packed = allocate_composite(&RequestProfile::new(12, [("A", 6), ("B", 2), ("C", 1)]), &plan).unwrap();
    assert!(packed.iter().all(StreamAllocation::is_evenly_spaced));
}
