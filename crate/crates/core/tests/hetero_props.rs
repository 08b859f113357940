use coded_matmul::encoder::proposed_mv_plan;
use coded_matmul::hetero::{
    assign_hetero, completions_in_order, expand_profile, failure_sweep, recover_from_partial, DeviceProfile,
};
use proptest::prelude::*;

fn profile_strategy() -> impl Strategy<Value = DeviceProfile> {
    (1usize..=12)
        .prop_flat_map(|d| (prop::collection::vec(1usize..5, d), 0..d))
        .prop_map(|(mut caps, split)| {
            caps.sort_unstable_by(|a, b| b.cmp(a));
            *caps.last_mut().unwrap() = 1;
            DeviceProfile { capacities: caps, split }
        })
}

proptest! {
    #[test]
    fn ranges_partition_virtual_workers(p in profile_strategy()) {
        let map = expand_profile(&p).unwrap();
        prop_assert_eq!(map.n, p.capacities.iter().sum::<usize>());
        prop_assert_eq!(map.n, map.k_a + map.s);
        let mut next = 0;
        for (d, r) in map.ranges.iter().enumerate() {
            prop_assert_eq!(r.start, next);
            prop_assert_eq!(r.len(), p.capacities[d]);
            next = r.end;
        }
        prop_assert_eq!(next, map.n);
    }

    #[test]
    fn unit_capacities_match_plain_plan(d in 2usize..12, seed in any::<u64>()) {
        let split = d - (d / 3).max(1);
        let profile = DeviceProfile::new(vec![1; d], split).unwrap();
        let (plan, _) = assign_hetero(&profile, seed).unwrap();
        prop_assert_eq!(plan, proposed_mv_plan(d, split, d - split, seed).unwrap());
    }
}

#[test]
fn unsorted_profile_rejected() {
    assert!(expand_profile(&DeviceProfile { capacities: vec![2, 3, 1], split: 1 }).is_err());
}

#[test]
fn failure_budget_respected_on_several_profiles() {
    for (caps, split) in [
        (vec![3, 2, 2, 1, 1, 1, 1, 1], 5),
        (vec![2, 2, 1, 1, 1, 1], 4),
        (vec![4, 2, 1, 1, 1], 3),
        (vec![1, 1, 1, 1, 1], 3),
    ] {
        let profile = DeviceProfile::new(caps.clone(), split).unwrap();
        let (plan, map) = assign_hetero(&profile, 21).unwrap();
        let sweep = failure_sweep(&plan, &map).unwrap();
        assert!(sweep.failures.is_empty(), "{caps:?}: {:?}", sweep.failures);
    }
}

#[test]
fn partial_results_beat_whole_device_loss() {
    let profile = DeviceProfile::new(vec![3, 2, 2, 1, 1, 1, 1, 1], 5).unwrap();
    let (plan, map) = assign_hetero(&profile, 2).unwrap();
    // every device delivers something, three tasks in total are missing
    let done = completions_in_order(&map, &[1, 1, 1, 1, 1, 1, 1, 1]).unwrap();
    assert!(!recover_from_partial(&done, &plan, &map).unwrap().decodable);
    let done = completions_in_order(&map, &[3, 1, 1, 1, 1, 1, 1, 0]).unwrap();
    let r = recover_from_partial(&done, &plan, &map).unwrap();
    assert!(r.decodable);
    assert_eq!(r.subset.unwrap().len(), 9);
}
