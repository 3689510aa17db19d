//! Resource-feasible minimum-hop path search. Links whose remaining
//! bandwidth is below the demand are invisible to the search, so "no path"
//! and "no feasible path" are the same outcome.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::model::{LinkId, NodeId, PhysicalNetwork};

const UNREACHED: u32 = u32::MAX;

/// Reusable search workspace; solvers keep one around to avoid reallocating
/// per query.
#[derive(Default)]
pub struct PathFinder {
    dist_to_dst: Vec<u32>,
    queue: VecDeque<NodeId>,
}

impl PathFinder {
    pub fn new() -> Self {
        PathFinder::default()
    }

    /// Minimum-hop directed path from `src` to `dst` over links with
    /// remaining capacity at least `demand`. Among equal-hop paths the
    /// lexicographically smallest link-id sequence is returned, which makes
    /// results independent of interior state. `src == dst` yields an empty
    /// path.
    pub fn find(&mut self, net: &PhysicalNetwork, src: NodeId, dst: NodeId, demand: u64) -> Option<Vec<LinkId>> {
        if src == dst {
            return Some(Vec::new());
        }
        // Backward BFS from dst gives each node its hop distance to dst.
        self.dist_to_dst.clear();
        self.dist_to_dst.resize(net.node_count(), UNREACHED);
        self.queue.clear();
        self.dist_to_dst[dst.index()] = 0;
        self.queue.push_back(dst);
        while let Some(u) = self.queue.pop_front() {
            let du = self.dist_to_dst[u.index()];
            if u == src {
                break; // layers beyond src cannot appear on a shortest path
            }
            for &l in net.in_links(u) {
                let link = net.link(l);
                if link.remaining < demand {
                    continue;
                }
                let p = link.src;
                if self.dist_to_dst[p.index()] == UNREACHED {
                    self.dist_to_dst[p.index()] = du + 1;
                    self.queue.push_back(p);
                }
            }
        }
        let total = self.dist_to_dst[src.index()];
        if total == UNREACHED {
            return None;
        }
        // Walk forward, always taking the smallest link id that stays on a
        // shortest path.
        let mut path = Vec::with_capacity(total as usize);
        let mut at = src;
        while at != dst {
            let need = self.dist_to_dst[at.index()] - 1;
            let step = net
                .out_links(at)
                .iter()
                .copied()
                .find(|&l| {
                    let link = net.link(l);
                    link.remaining >= demand && self.dist_to_dst[link.dst.index()] == need
                })
                .expect("BFS-reached node has a successor on a shortest path");
            path.push(step);
            at = net.link(step).dst;
        }
        Some(path)
    }
}

/// One-shot wrapper around [`PathFinder::find`] that validates endpoints.
pub fn shortest_path(
    net: &PhysicalNetwork,
    src: NodeId,
    dst: NodeId,
    demand: u64,
) -> Result<Option<Vec<LinkId>>> {
    if !net.contains_node(src) {
        return Err(Error::Parameter(format!("unknown node id {src}")));
    }
    if !net.contains_node(dst) {
        return Err(Error::Parameter(format!("unknown node id {dst}")));
    }
    Ok(PathFinder::new().find(net, src, dst, demand))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Resources;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::collections::HashSet;

    fn net_with_edges(n: usize, edges: &[(u32, u32, u64)]) -> PhysicalNetwork {
        let mut net = PhysicalNetwork::new(vec!["units".into()]);
        for i in 0..n {
            net.add_node(format!("n{i}"), Resources::scalar(1)).unwrap();
        }
        for &(a, b, bw) in edges {
            net.add_undirected(NodeId(a), NodeId(b), bw).unwrap();
        }
        net
    }

    /// Plain BFS hop count on the capacity-filtered subgraph; the oracle the
    /// path search is checked against.
    fn bfs_distance(net: &PhysicalNetwork, src: NodeId, dst: NodeId, demand: u64) -> Option<usize> {
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

    fn random_net(rng: &mut StdRng, n: usize) -> PhysicalNetwork {
        let mut edges = Vec::new();
        for i in 1..n as u32 {
            edges.push((rng.gen_range(0..i), i, rng.gen_range(1..=10)));
        }
        for a in 0..n as u32 {
            for b in a + 1..n as u32 {
                if edges.iter().any(|&(x, y, _)| (x, y) == (a, b)) {
                    continue;
                }
                if rng.gen_bool(0.25) {
                    edges.push((a, b, rng.gen_range(1..=10)));
                }
            }
        }
        net_with_edges(n, &edges)
    }

    #[test]
    fn same_endpoints_give_empty_path() {
        let net = net_with_edges(2, &[(0, 1, 5)]);
        assert_eq!(shortest_path(&net, NodeId(0), NodeId(0), 3).unwrap(), Some(vec![]));
    }

    #[test]
    fn line_graph_unique_path() {
        let net = net_with_edges(4, &[(0, 1, 9), (1, 2, 9), (2, 3, 9)]);
        let path = shortest_path(&net, NodeId(0), NodeId(3), 5).unwrap().unwrap();
        let hops: Vec<(NodeId, NodeId)> = path.iter().map(|&l| (net.link(l).src, net.link(l).dst)).collect();
        assert_eq!(
            hops,
            [(NodeId(0), NodeId(1)), (NodeId(1), NodeId(2)), (NodeId(2), NodeId(3))]
        );
    }

    #[test]
    fn unknown_node_is_parameter_error() {
        let net = net_with_edges(2, &[(0, 1, 5)]);
        assert!(shortest_path(&net, NodeId(0), NodeId(9), 1).is_err());
    }

    #[test]
    fn capacity_filter_hides_links() {
        // Direct link too small; detour has room.
        let net = net_with_edges(3, &[(0, 2, 2), (0, 1, 10), (1, 2, 10)]);
        let path = shortest_path(&net, NodeId(0), NodeId(2), 5).unwrap().unwrap();
        assert_eq!(path.len(), 2);
        assert_eq!(shortest_path(&net, NodeId(0), NodeId(2), 2).unwrap().unwrap().len(), 1);
        assert_eq!(shortest_path(&net, NodeId(0), NodeId(2), 11).unwrap(), None);
    }

    #[test]
    fn matches_bfs_oracle_on_random_graphs() {
        let mut rng = StdRng::seed_from_u64(0x5eed);
        for _ in 0..200 {
            let n = rng.gen_range(3..=8);
            let net = random_net(&mut rng, n);
            let demand = rng.gen_range(1..=10);
            let src = NodeId(rng.gen_range(0..n as u32));
            let dst = NodeId(rng.gen_range(0..n as u32));
            let got = shortest_path(&net, src, dst, demand).unwrap();
            let want = bfs_distance(&net, src, dst, demand);
            assert_eq!(got.as_ref().map(Vec::len), want, "src {src} dst {dst} demand {demand}");
            if let Some(path) = got {
                // Path is connected, simple, and every hop satisfies the demand.
                let mut at = src;
                let mut visited = HashSet::from([src]);
                for &l in &path {
                    let link = net.link(l);
                    assert_eq!(link.src, at);
                    assert!(link.remaining >= demand);
                    at = link.dst;
                    assert!(visited.insert(at), "revisited {at}");
                }
                assert_eq!(at, dst);
            }
        }
    }

    #[test]
    fn optimal_among_all_simple_paths() {
        // Exhaustive path enumeration on small graphs confirms minimality.
        fn all_simple_paths(
            net: &PhysicalNetwork,
            at: NodeId,
            dst: NodeId,
            demand: u64,
            visited: &mut Vec<bool>,
            len: usize,
            best: &mut Option<usize>,
        ) {
            if at == dst {
                *best = Some(best.map_or(len, |b: usize| b.min(len)));
                return;
            }
            for &l in net.out_links(at) {
                let link = net.link(l);
                if link.remaining < demand || visited[link.dst.index()] {
                    continue;
                }
                visited[link.dst.index()] = true;
                all_simple_paths(net, link.dst, dst, demand, visited, len + 1, best);
                visited[link.dst.index()] = false;
            }
        }
        let mut rng = StdRng::seed_from_u64(77);
        for _ in 0..50 {
            let n = rng.gen_range(3..=8);
            let net = random_net(&mut rng, n);
            let demand = rng.gen_range(1..=10);
            let src = NodeId(rng.gen_range(0..n as u32));
            let dst = NodeId(rng.gen_range(0..n as u32));
            let mut visited = vec![false; n];
            visited[src.index()] = true;
            let mut best = None;
            all_simple_paths(&net, src, dst, demand, &mut visited, 0, &mut best);
            let got = shortest_path(&net, src, dst, demand).unwrap();
            assert_eq!(got.map(|p| p.len()), best);
        }
    }

    #[test]
    fn deterministic_across_calls() {
        let mut rng = StdRng::seed_from_u64(11);
        let net = random_net(&mut rng, 8);
        for _ in 0..20 {
            let src = NodeId(rng.gen_range(0..8));
            let dst = NodeId(rng.gen_range(0..8));
            let a = shortest_path(&net, src, dst, 3).unwrap();
            let b = shortest_path(&net, src, dst, 3).unwrap();
            assert_eq!(a, b);
        }
    }
}
