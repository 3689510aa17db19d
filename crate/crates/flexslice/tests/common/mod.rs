//! Shared instance generators and independent oracles for integration tests.

#![allow(dead_code)]

use std::collections::{BTreeMap, VecDeque};

use rand::rngs::StdRng;
use rand::Rng;

use flexslice::configs::enumerate_configs;
use flexslice::model::{NodeId, PhysicalNetwork, Resources, SliceId, SliceRequest, Vnf, VnfId};

/// Connected random network: a random spanning tree plus extra edges.
pub fn random_network(rng: &mut StdRng, nodes: usize, extra_edge_prob: f64, cap: (u64, u64), bw: (u64, u64)) -> PhysicalNetwork {
    let mut net = PhysicalNetwork::new(vec!["units".into()]);
    for i in 0..nodes {
        let c = rng.gen_range(cap.0..=cap.1);
        net.add_node(format!("n{i}"), Resources::scalar(c)).unwrap();
    }
    for i in 1..nodes as u32 {
        let j = rng.gen_range(0..i);
        net.add_undirected(NodeId(j), NodeId(i), rng.gen_range(bw.0..=bw.1)).unwrap();
    }
    for a in 0..nodes as u32 {
        for b in a + 1..nodes as u32 {
            if net.link_between(NodeId(a), NodeId(b)).is_none() && rng.gen_bool(extra_edge_prob) {
                net.add_undirected(NodeId(a), NodeId(b), rng.gen_range(bw.0..=bw.1)).unwrap();
            }
        }
    }
    net
}

/// Random slice with `flexible` of its `vnfs` VNFs unpinned and a demand for
/// every ordered pair, so any ordering is admissible.
pub fn random_slice(
    rng: &mut StdRng,
    id: u32,
    vnfs: usize,
    flexible: usize,
    demand: (u64, u64),
    bw: (u64, u64),
) -> SliceRequest {
    assert!(flexible <= vnfs);
    let vnf_list: Vec<Vnf> = (0..vnfs)
        .map(|i| Vnf {
            name: format!("f{i}"),
            demand: Resources::scalar(rng.gen_range(demand.0..=demand.1)),
        })
        .collect();
    // The first `vnfs - flexible` VNFs are pinned onto random distinct slots.
    let mut slots: Vec<usize> = (1..=vnfs).collect();
    for i in (1..slots.len()).rev() {
        let j = rng.gen_range(0..=i);
        slots.swap(i, j);
    }
    let fixed: BTreeMap<VnfId, usize> = (0..vnfs - flexible)
        .map(|i| (VnfId(i as u32), slots[i]))
        .collect();
    let mut link_demands = BTreeMap::new();
    for v in 0..vnfs as u32 {
        for w in 0..vnfs as u32 {
            if v != w {
                link_demands.insert((VnfId(v), VnfId(w)), rng.gen_range(bw.0..=bw.1));
            }
        }
    }
    SliceRequest::new(SliceId(id), vnf_list, fixed, link_demands).unwrap()
}

/// The same slice with every position pinned to its configuration `k`.
pub fn pin_to_config(slice: &SliceRequest, k: usize) -> SliceRequest {
    let configs = enumerate_configs(slice).unwrap();
    let config = &configs[k];
    let fixed: BTreeMap<VnfId, usize> = config
        .order()
        .iter()
        .enumerate()
        .map(|(p0, &v)| (v, p0 + 1))
        .collect();
    let vnfs: Vec<Vnf> = slice.vnf_ids().map(|v| slice.vnf(v).clone()).collect();
    SliceRequest::new(slice.id, vnfs, fixed, slice.link_demands().clone()).unwrap()
}

/// BFS hop count on the capacity-filtered subgraph; the shortest-path oracle.
pub fn bfs_hops(net: &PhysicalNetwork, src: NodeId, dst: NodeId, demand: u64) -> Option<usize> {
    let mut dist = vec![usize::MAX; net.node_count()];
    let mut queue = VecDeque::new();
    dist[src.index()] = 0;
    queue.push_back(src);
    while let Some(u) = queue.pop_front() {
        if u == dst {
            return Some(dist[u.index()]);
        }
        for &l in net.out_links(u) {
            let link = net.link(l);
            if link.remaining >= demand && dist[link.dst.index()] == usize::MAX {
                dist[link.dst.index()] = dist[u.index()] + 1;
                queue.push_back(link.dst);
            }
        }
    }
    None
}
