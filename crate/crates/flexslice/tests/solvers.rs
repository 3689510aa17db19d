//! Cross-solver integration and property tests: every solver's output must
//! validate, the exhaustive search dominates the heuristics, and flexibility
//! never hurts.

mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use common::{pin_to_config, random_network, random_slice};
use flexslice::bnb::{self, BnbOptions, BranchLimit};
use flexslice::exact::{self, SearchLimits};
use flexslice::model::{
    apply_embedding, objective_value, validate_embedding, AdmissionDecision, NodeId, PhysicalNetwork, Resources,
    SliceId, SliceRequest, Vnf, VnfId,
};
use flexslice::{bfn, configs};

fn validate_all(net: &PhysicalNetwork, slices: &[SliceRequest], decisions: &[AdmissionDecision]) {
    let pairs: Vec<(&SliceRequest, &AdmissionDecision)> = slices.iter().zip(decisions.iter()).collect();
    let report = validate_embedding(net, pairs);
    assert!(report.is_ok(), "violations: {:?}", report.violations);
}

#[test]
fn every_solver_output_validates_on_seeded_instances() {
    let mut rng = StdRng::seed_from_u64(0xf00d);
    for trial in 0..100 {
        let nodes = rng.gen_range(4..=6);
        let net = random_network(&mut rng, nodes, 0.3, (2, 8), (3, 12));
        let n_slices = rng.gen_range(1..=2);
        let slices: Vec<SliceRequest> = (0..n_slices)
            .map(|i| {
                let vnfs = rng.gen_range(2..=3);
                let flexible = rng.gen_range(0..=vnfs.min(2));
                random_slice(&mut rng, i, vnfs, flexible, (1, 3), (1, 4))
            })
            .collect();

        let (exact_decisions, _) = exact::brute_force(&net, &slices, 0.999, &SearchLimits::default()).unwrap();
        validate_all(&net, &slices, &exact_decisions);

        let bnb_result = bnb::solve_all(&net, &slices, &BnbOptions::default()).unwrap();
        validate_all(&net, &slices, &bnb_result.decisions);

        let bfn_result = bfn::solve_all(&net, &slices, &bfn::BfnOptions { seed: trial as u64, gamma: 0.999 }).unwrap();
        validate_all(&net, &slices, &bfn_result.decisions);
    }
}

#[test]
fn oracle_dominates_heuristics() {
    let mut rng = StdRng::seed_from_u64(0xabcd);
    for _ in 0..60 {
        let nodes = rng.gen_range(4..=6);
        let net = random_network(&mut rng, nodes, 0.35, (2, 8), (3, 12));
        let n_slices = rng.gen_range(1..=2);
        let slices: Vec<SliceRequest> = (0..n_slices)
            .map(|i| {
                let vnfs = rng.gen_range(2..=3);
                let flexible = rng.gen_range(0..=2);
                random_slice(&mut rng, i, vnfs, flexible, (1, 3), (1, 4))
            })
            .collect();
        let (_, oracle) = exact::brute_force(&net, &slices, 0.999, &SearchLimits::default()).unwrap();
        let bnb_obj = bnb::solve_all(&net, &slices, &BnbOptions::default()).unwrap().objective;
        let bfn_obj = bfn::solve_all(&net, &slices, &bfn::BfnOptions::default()).unwrap().objective;
        assert!(oracle >= bnb_obj - 1e-9, "oracle {oracle} < bnb {bnb_obj}");
        assert!(oracle >= bfn_obj - 1e-9, "oracle {oracle} < bfn {bfn_obj}");
    }
}

#[test]
fn line_network_objective_matches_exhaustive_usage_count() {
    // Two accepted slices on a 4-node line; usage pairs counted by hand from
    // the returned paths must reproduce the solver's objective.
    let mut net = PhysicalNetwork::new(vec!["units".into()]);
    for i in 0..4 {
        net.add_node(format!("n{i}"), Resources::scalar(4)).unwrap();
    }
    for i in 0..3u32 {
        net.add_undirected(NodeId(i), NodeId(i + 1), 10).unwrap();
    }
    let mk = |id: u32| {
        let vnfs = vec![
            Vnf { name: "a".into(), demand: Resources::scalar(2) },
            Vnf { name: "b".into(), demand: Resources::scalar(2) },
        ];
        let fixed: BTreeMap<VnfId, usize> = [(VnfId(0), 1), (VnfId(1), 2)].into();
        let demands: BTreeMap<(VnfId, VnfId), u64> = [((VnfId(0), VnfId(1)), 2)].into();
        SliceRequest::new(SliceId(id), vnfs, fixed, demands).unwrap()
    };
    let slices = vec![mk(0), mk(1)];
    let (decisions, objective) = exact::brute_force(&net, &slices, 0.999, &SearchLimits::default()).unwrap();
    let usage: usize = decisions
        .iter()
        .filter_map(|d| d.accepted.as_ref())
        .flat_map(|a| a.embedding.link_paths.values())
        .map(Vec::len)
        .sum();
    let accepted = decisions.iter().filter(|d| d.is_accepted()).count();
    let by_hand = 0.999 * accepted as f64 - 0.001 * usage as f64;
    assert!((objective - by_hand).abs() < 1e-12);
    assert_eq!(objective, objective_value(&decisions, 0.999).unwrap());
}

#[test]
fn bnb_flexible_dominates_fixed_configurations() {
    let mut rng = StdRng::seed_from_u64(0xbeef);
    for trial in 0..50 {
        let nodes = rng.gen_range(4..=7);
        let net = random_network(&mut rng, nodes, 0.3, (2, 8), (3, 12));
        let slice = random_slice(&mut rng, 0, 3, 2, (1, 3), (1, 4));
        let flexible = bnb::solve_slice(&net, &slice, &BnbOptions::default()).unwrap();
        for k in 0..configs::enumerate_configs(&slice).unwrap().len() {
            let pinned = pin_to_config(&slice, k);
            let restricted = bnb::solve_slice(&net, &pinned, &BnbOptions::default()).unwrap();
            if let Some(r) = restricted {
                let f = flexible
                    .as_ref()
                    .unwrap_or_else(|| panic!("trial {trial}: restricted k{k} succeeded but flexible failed"));
                assert!(
                    f.cost <= r.cost + 1e-9,
                    "trial {trial}: flexible cost {} above restricted k{k} cost {}",
                    f.cost,
                    r.cost
                );
            }
        }
    }
}

#[test]
fn bfn_flexible_acceptance_dominates_fixed() {
    let mut rng = StdRng::seed_from_u64(0xcafe);
    for seed in 0..50u64 {
        let nodes = rng.gen_range(4..=7);
        let net = random_network(&mut rng, nodes, 0.3, (2, 8), (3, 12));
        let slice = random_slice(&mut rng, 0, 3, 2, (1, 3), (1, 4));
        let opts = bfn::BfnOptions { seed, gamma: 0.999 };
        let flexible_accepts = bfn::solve_all(&net, std::slice::from_ref(&slice), &opts)
            .unwrap()
            .accepted_count();
        for k in 0..configs::enumerate_configs(&slice).unwrap().len() {
            let pinned = vec![pin_to_config(&slice, k)];
            let fixed_accepts = bfn::solve_all(&net, &pinned, &opts).unwrap().accepted_count();
            assert!(flexible_accepts >= fixed_accepts);
        }
    }
}

#[test]
fn exact_flexible_objective_dominates_fixed() {
    let mut rng = StdRng::seed_from_u64(0x5ca1e);
    for _ in 0..25 {
        let nodes = rng.gen_range(4..=5);
        let net = random_network(&mut rng, nodes, 0.3, (2, 6), (2, 8));
        let slices: Vec<SliceRequest> = (0..2)
            .map(|i| random_slice(&mut rng, i, 2, 2, (1, 3), (1, 3)))
            .collect();
        let (_, flexible) = exact::brute_force(&net, &slices, 0.999, &SearchLimits::default()).unwrap();
        for k in 0..2 {
            let pinned: Vec<SliceRequest> = slices.iter().map(|s| pin_to_config(s, k)).collect();
            let (_, fixed) = exact::brute_force(&net, &pinned, 0.999, &SearchLimits::default()).unwrap();
            assert!(flexible >= fixed - 1e-12, "flexible {flexible} < fixed k{k} {fixed}");
        }
    }
}

#[test]
fn beta_monotone_on_seeded_instances() {
    let mut rng = StdRng::seed_from_u64(0xda7a);
    for trial in 0..30 {
        let nodes = rng.gen_range(5..=8);
        let net = random_network(&mut rng, nodes, 0.3, (3, 9), (4, 12));
        let slice = random_slice(&mut rng, 0, 3, 2, (1, 3), (1, 4));
        let mut costs: Vec<Option<f64>> = Vec::new();
        for beta in [Some(1), Some(3), None] {
            let opts = BnbOptions { beta: BranchLimit::new(beta).unwrap(), ..BnbOptions::default() };
            costs.push(bnb::solve_slice(&net, &slice, &opts).unwrap().map(|s| s.cost));
        }
        // success(beta small) implies success(beta large); larger beta never
        // returns a strictly worse solution.
        for pair in costs.windows(2) {
            match (pair[0], pair[1]) {
                (Some(small), Some(large)) => {
                    assert!(large <= small + 1e-9, "trial {trial}: {large} > {small}")
                }
                (Some(_), None) => panic!("trial {trial}: smaller beta succeeded, larger failed"),
                _ => {}
            }
        }
    }
}

#[test]
fn sequencing_matters_and_bnb_keeps_the_cheap_placement() {
    // Line E-A-B-C-D-F. Slice one (two VNFs of demand 2, bandwidth 8) is
    // cheapest on the adjacent mid-capacity pair (B, C). Slice two needs
    // capacity 8 nodes, which only E and F provide. Any placement of slice
    // one that touches E or F would block slice two; the minimum-cost one
    // does not.
    let mut net = PhysicalNetwork::new(vec!["units".into()]);
    let caps = [("E", 8), ("A", 2), ("B", 4), ("C", 4), ("D", 2), ("F", 8)];
    for (name, cap) in caps {
        net.add_node(name, Resources::scalar(cap)).unwrap();
    }
    for w in ["E", "A", "B", "C", "D", "F"].windows(2) {
        let a = net.node_by_name(w[0]).unwrap();
        let b = net.node_by_name(w[1]).unwrap();
        net.add_undirected(a, b, 10).unwrap();
    }
    let mk = |id: u32, demand: u64, bw: u64| {
        let vnfs = vec![
            Vnf { name: "a".into(), demand: Resources::scalar(demand) },
            Vnf { name: "b".into(), demand: Resources::scalar(demand) },
        ];
        let fixed: BTreeMap<VnfId, usize> = [(VnfId(0), 1), (VnfId(1), 2)].into();
        let demands: BTreeMap<(VnfId, VnfId), u64> = [((VnfId(0), VnfId(1)), bw)].into();
        SliceRequest::new(SliceId(id), vnfs, fixed, demands).unwrap()
    };
    let slices = vec![mk(0, 2, 8), mk(1, 8, 8)];

    let result = bnb::solve_all(&net, &slices, &BnbOptions::default()).unwrap();
    assert_eq!(result.accepted_count(), 2, "sequential search must keep room for slice two");
    let first = result.decisions[0].accepted.as_ref().unwrap();
    let b = net.node_by_name("B").unwrap();
    let c = net.node_by_name("C").unwrap();
    let hosts: Vec<NodeId> = first.embedding.node_map.values().copied().collect();
    assert!(hosts.contains(&b) && hosts.contains(&c), "slice one should sit on (B, C)");

    // The oracle agrees that both slices are embeddable.
    let (oracle_decisions, _) = exact::brute_force(&net, &slices, 0.999, &SearchLimits::default()).unwrap();
    assert_eq!(oracle_decisions.iter().filter(|d| d.is_accepted()).count(), 2);

    // A capacity-greedy placement of slice one onto E would have blocked
    // slice two outright.
    let mut spoiled = net.clone();
    let e = spoiled.node_by_name("E").unwrap();
    let a = spoiled.node_by_name("A").unwrap();
    let mut emb = flexslice::model::Embedding::new(SliceId(0), flexslice::model::ConfigId(0));
    emb.node_map.insert(VnfId(0), e);
    emb.node_map.insert(VnfId(1), a);
    emb.link_paths
        .insert((VnfId(0), VnfId(1)), vec![spoiled.link_between(e, a).unwrap()]);
    apply_embedding(&mut spoiled, &slices[0], &emb).unwrap();
    assert!(
        bnb::solve_slice(&spoiled, &slices[1], &BnbOptions::default()).unwrap().is_none(),
        "slice two must be infeasible once E is partially consumed"
    );
}

#[test]
fn bnb_scenario_results_revalidate_against_fresh_network() {
    let mut rng = StdRng::seed_from_u64(0x90de);
    let net = random_network(&mut rng, 8, 0.3, (4, 10), (5, 15));
    let slices: Vec<SliceRequest> = (0..4)
        .map(|i| random_slice(&mut rng, i, 3, 1, (1, 3), (1, 4)))
        .collect();
    let result = bnb::solve_all(&net, &slices, &BnbOptions::default()).unwrap();
    validate_all(&net, &slices, &result.decisions);
    assert_eq!(result.objective, objective_value(&result.decisions, 0.999).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Configuration enumeration yields exactly factorial(|flexible|)
    /// pairwise-distinct configurations that all honor the pins.
    #[test]
    fn config_count_is_factorial(vnfs in 1usize..=5, flexible_seed in 0usize..100, seed in 0u64..1000) {
        let mut rng = StdRng::seed_from_u64(seed);
        let flexible = flexible_seed % (vnfs + 1).min(5);
        let slice = random_slice(&mut rng, 0, vnfs, flexible.min(vnfs), (1, 3), (1, 3));
        let configs = configs::enumerate_configs(&slice).unwrap();
        let expected: usize = (1..=slice.flexible().len()).product();
        prop_assert_eq!(configs.len(), expected);
        for (i, c) in configs.iter().enumerate() {
            for (&v, &p) in slice.fixed_positions() {
                prop_assert_eq!(c.order()[p - 1], v);
            }
            for earlier in &configs[..i] {
                prop_assert_ne!(earlier.order(), c.order());
            }
        }
    }

    /// Committing an embedding and reverting it restores the network
    /// bit-exactly, for arbitrary feasible solver output.
    #[test]
    fn apply_revert_round_trip(seed in 0u64..500) {
        let mut rng = StdRng::seed_from_u64(seed);
        let nodes = rng.gen_range(4..=7);
        let net = random_network(&mut rng, nodes, 0.4, (2, 9), (3, 10));
        let vnfs = rng.gen_range(2..=3);
        let slice = random_slice(&mut rng, 0, vnfs, 1, (1, 3), (1, 3));
        if let Some(solution) = bnb::solve_slice(&net, &slice, &BnbOptions::default()).unwrap() {
            let mut working = net.clone();
            apply_embedding(&mut working, &slice, &solution.embedding).unwrap();
            flexslice::model::revert_embedding(&mut working, &slice, &solution.embedding).unwrap();
            prop_assert_eq!(working, net);
        }
    }
}
