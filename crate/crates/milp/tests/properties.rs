mod common;

use chargeplan_milp::{
    branch_and_bound, branch_and_bound_observed, relative_gap, NodeEvent, SolverConfig, Status,
};
use common::random_milp;
use proptest::prelude::*;

fn trace(m: &chargeplan_milp::LinearModel, cfg: &SolverConfig) -> (Vec<NodeEvent>, chargeplan_milp::Solution) {
    let mut events = Vec::new();
    let s = branch_and_bound_observed(m, cfg, &mut |e| events.push(e)).unwrap();
    (events, s)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn returned_points_pass_an_independent_recheck(
        seed in any::<u64>(), bin in 1usize..12, cont in 0usize..4, rows in 1usize..10,
        gap in prop_oneof![Just(0.0), Just(1e-2), Just(0.2)],
    ) {
        let m = random_milp(seed, bin, cont, rows).to_model();
        let s = branch_and_bound(&m, &SolverConfig::with_gap(gap)).unwrap();
        prop_assert!(s.status.has_solution());
        prop_assert!(m.check_solution(&s.values, 1e-6).is_empty());
        prop_assert!(s.best_bound <= s.objective + 1e-9);
        prop_assert_eq!(s.gap, relative_gap(s.objective, s.best_bound));
        if s.status == Status::Optimal {
            prop_assert!(s.gap <= gap);
        }
    }

    #[test]
    fn search_is_deterministic(seed in any::<u64>(), bin in 4usize..12, rows in 2usize..10) {
        let m = random_milp(seed, bin, 2, rows).to_model();
        let cfg = SolverConfig::with_gap(0.0);
        let (e1, s1) = trace(&m, &cfg);
        let (e2, s2) = trace(&m, &cfg);
        prop_assert_eq!(e1, e2);
        prop_assert_eq!(s1.values, s2.values);
        prop_assert_eq!(s1.nodes, s2.nodes);
        prop_assert_eq!(s1.objective.to_bits(), s2.objective.to_bits());
    }

    #[test]
    fn incumbent_falls_and_bound_rises(seed in any::<u64>(), bin in 4usize..12, rows in 2usize..10) {
        let m = random_milp(seed, bin, 1, rows).to_model();
        let (events, s) = trace(&m, &SolverConfig::with_gap(0.0));
        for w in events.windows(2) {
            prop_assert!(w[1].bound >= w[0].bound);
            if let (Some(a), Some(b)) = (w[0].incumbent, w[1].incumbent) {
                prop_assert!(b <= a);
            }
            prop_assert!(!(w[0].incumbent.is_some() && w[1].incumbent.is_none()));
        }
        if let Some(last) = events.last() {
            prop_assert!(last.bound <= s.objective + 1e-9);
        }
    }
}
