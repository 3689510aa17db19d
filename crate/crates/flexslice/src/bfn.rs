//! Greedy baseline: the first VNF lands on the node with the most spare
//! capacity, each following VNF on the best node in the nearest hop ring
//! around its predecessor, with consecutive VNFs joined by shortest paths.
//! Per slice, every configuration is tried on a scratch copy and the one
//! with the best marginal objective wins; ties are broken by seeded RNG.

use std::collections::VecDeque;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::configs::enumerate_configs;
use crate::error::{Error, Result};
use crate::model::{
    apply_embedding, AdmissionDecision, Embedding, NodeId, PhysicalNetwork, ScenarioResult, SliceConfiguration,
    SliceRequest,
};
use crate::pathing::PathFinder;

#[derive(Clone, Copy, Debug)]
pub struct BfnOptions {
    pub seed: u64,
    pub gamma: f64,
}

impl Default for BfnOptions {
    fn default() -> Self {
        BfnOptions { seed: 0, gamma: 0.999 }
    }
}

/// Bottleneck-normalized spare capacity: the minimum over resource axes of
/// remaining divided by original capacity. Higher is "more resources".
fn capacity_score(net: &PhysicalNetwork, i: NodeId) -> f64 {
    let node = net.node(i);
    (0..node.capacity.axes())
        .map(|a| {
            let cap = node.capacity.get(a);
            if cap == 0 {
                0.0
            } else {
                node.remaining.get(a) as f64 / cap as f64
            }
        })
        .fold(f64::INFINITY, f64::min)
}

/// Hop distances from `from` over the directed graph, ignoring capacities;
/// unreachable nodes get `u32::MAX`.
fn hop_distances(net: &PhysicalNetwork, from: NodeId) -> Vec<u32> {
    let mut dist = vec![u32::MAX; net.node_count()];
    let mut queue = VecDeque::new();
    dist[from.index()] = 0;
    queue.push_back(from);
    while let Some(u) = queue.pop_front() {
        for &l in net.out_links(u) {
            let v = net.link(l).dst;
            if dist[v.index()] == u32::MAX {
                dist[v.index()] = dist[u.index()] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Greedily maps one configuration onto a scratch copy of the network.
/// Returns `None` as soon as a VNF or a virtual link cannot be placed; no
/// other candidate is retried, keeping the baseline deliberately greedy.
pub fn map_config(
    net: &PhysicalNetwork,
    slice: &SliceRequest,
    config: &SliceConfiguration,
) -> Result<Option<Embedding>> {
    let mut scratch = net.clone();
    let mut finder = PathFinder::new();
    let mut used = vec![false; scratch.node_count()];
    let mut embedding = Embedding::new(slice.id, config.id);
    let mut prev: Option<NodeId> = None;

    for (p, &v) in config.order().iter().enumerate() {
        let demand = slice.demand(v).clone();
        let chosen = match prev {
            None => {
                // Highest spare capacity anywhere; ties to the smallest id.
                let mut best: Option<(f64, NodeId)> = None;
                for (i, node) in scratch.nodes() {
                    if used[i.index()] || !demand.fits_within(&node.remaining) {
                        continue;
                    }
                    let score = capacity_score(&scratch, i);
                    if best.is_none_or(|(s, _)| score > s) {
                        best = Some((score, i));
                    }
                }
                match best {
                    Some((_, i)) => i,
                    None => return Ok(None),
                }
            }
            Some(anchor) => {
                // Nearest ring around the previous VNF that holds a fitting
                // node; within the ring, highest spare capacity wins.
                let dist = hop_distances(&scratch, anchor);
                let mut best: Option<(u32, f64, NodeId)> = None;
                for (i, node) in scratch.nodes() {
                    if used[i.index()] || dist[i.index()] == u32::MAX {
                        continue;
                    }
                    if !demand.fits_within(&node.remaining) {
                        continue;
                    }
                    let d = dist[i.index()];
                    let score = capacity_score(&scratch, i);
                    let better = match best {
                        None => true,
                        Some((bd, bs, _)) => d < bd || (d == bd && score > bs),
                    };
                    if better {
                        best = Some((d, score, i));
                    }
                }
                match best {
                    Some((_, _, i)) => i,
                    None => return Ok(None),
                }
            }
        };

        scratch.debit_node(chosen, &demand)?;
        used[chosen.index()] = true;
        embedding.node_map.insert(v, chosen);
        if let Some(anchor) = prev {
            let w_prev = config.order()[p - 1];
            let bw = slice
                .link_demand(w_prev, v)
                .ok_or_else(|| Error::Specification(format!("slice {}: missing chain demand", slice.id)))?;
            match finder.find(&scratch, anchor, chosen, bw) {
                Some(path) => {
                    for &l in &path {
                        scratch.debit_link(l, bw)?;
                    }
                    embedding.link_paths.insert((w_prev, v), path);
                }
                None => return Ok(None),
            }
        }
        prev = Some(chosen);
    }
    Ok(Some(embedding))
}

/// Embeds a batch of slices. For each slice all configurations are attempted
/// on the current network state; among the mappable ones the configuration
/// with the highest marginal objective (fewest physical links used) is
/// committed, with uniform random tie-breaking driven by the seed.
pub fn solve_all(net: &PhysicalNetwork, slices: &[SliceRequest], opts: &BfnOptions) -> Result<ScenarioResult> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut working = net.clone();
    let mut decisions = Vec::with_capacity(slices.len());
    for slice in slices {
        let configs = enumerate_configs(slice)?;
        let mut mappable: Vec<(SliceConfiguration, Embedding, f64)> = Vec::new();
        for config in configs {
            if let Some(embedding) = map_config(&working, slice, &config)? {
                let marginal = opts.gamma - (1.0 - opts.gamma) * embedding.usage_pairs() as f64;
                mappable.push((config, embedding, marginal));
            }
        }
        if mappable.is_empty() {
            decisions.push(AdmissionDecision::rejected(slice.id));
            continue;
        }
        let best = mappable.iter().map(|(_, _, m)| *m).fold(f64::NEG_INFINITY, f64::max);
        let tied: Vec<usize> = (0..mappable.len()).filter(|&i| mappable[i].2 == best).collect();
        let pick = if tied.len() == 1 {
            tied[0]
        } else {
            tied[rng.gen_range(0..tied.len())]
        };
        let (config, embedding, _) = mappable.swap_remove(pick);
        apply_embedding(&mut working, slice, &embedding)?;
        decisions.push(AdmissionDecision::accepted(slice.id, config, embedding));
    }
    ScenarioResult::from_decisions(decisions, opts.gamma, start.elapsed())
}
