//! Ground-truth machinery: an exhaustive joint optimizer for small instances
//! and an exporter/importer for the linearized mixed-binary model (see
//! [`lp`]). The optimizer enumerates admission subsets, configuration
//! choices, injective placements and all simple feasible paths, so it is the
//! oracle every heuristic is measured against.

pub mod lp;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::configs::enumerate_configs;
use crate::error::{Error, Result};
use crate::model::{
    objective_value, AdmissionDecision, Embedding, LinkId, NodeId, PhysicalNetwork, SliceConfiguration, SliceRequest,
};

/// Size guard for the exhaustive search.
#[derive(Clone, Copy, Debug)]
pub struct SearchLimits {
    /// Upper bound on the product of `|N| ^ |N_s|` placement spaces.
    pub placement_bound: f64,
    /// Hop cap per virtual-link path; `None` means simple paths of any length.
    pub max_hops: Option<usize>,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            placement_bound: 1e7,
            max_hops: None,
        }
    }
}

/// Joint exhaustive optimization of admission, ordering and embedding.
/// Deterministic: ties resolve toward the earliest point in enumeration
/// order. Work is split over admission/configuration combinations and, with
/// the `parallel` feature, evaluated on all cores.
pub fn brute_force(
    net: &PhysicalNetwork,
    slices: &[SliceRequest],
    gamma: f64,
    limits: &SearchLimits,
) -> Result<(Vec<AdmissionDecision>, f64)> {
    brute_force_with(net, slices, gamma, limits, cfg!(feature = "parallel"))
}

/// [`brute_force`] with explicit control over parallel evaluation; the
/// sequential route exists as a fallback and for benchmarking.
pub fn brute_force_with(
    net: &PhysicalNetwork,
    slices: &[SliceRequest],
    gamma: f64,
    limits: &SearchLimits,
    parallel: bool,
) -> Result<(Vec<AdmissionDecision>, f64)> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Parameter(format!("gamma {gamma} outside [0, 1]")));
    }
    let mut factor = 1.0f64;
    for slice in slices {
        factor *= (net.node_count() as f64).powi(slice.len() as i32);
    }
    if factor > limits.placement_bound {
        return Err(Error::SizeGuard {
            factor,
            bound: limits.placement_bound,
        });
    }

    let configs: Vec<Vec<SliceConfiguration>> = slices.iter().map(enumerate_configs).collect::<Result<_>>()?;

    // One work item per combination of per-slice choices (reject or one of
    // the slice's configurations), in nested enumeration order.
    let mut items: Vec<Vec<Option<usize>>> = vec![Vec::new()];
    for slice_configs in &configs {
        let mut grown = Vec::with_capacity(items.len() * (1 + slice_configs.len()));
        for prefix in &items {
            let mut rejected = prefix.clone();
            rejected.push(None);
            grown.push(rejected);
            for k in 0..slice_configs.len() {
                let mut chosen = prefix.clone();
                chosen.push(Some(k));
                grown.push(chosen);
            }
        }
        items = grown;
    }

    let evaluate = |hint: &mut f64, item: &Vec<Option<usize>>| -> Option<(f64, Vec<AdmissionDecision>)> {
        let result = evaluate_item(net, slices, &configs, item, gamma, limits.max_hops, *hint);
        if let Some((objective, _)) = &result {
            if *objective > *hint {
                *hint = *objective;
            }
        }
        result
    };

    let evaluated: Vec<Option<(f64, Vec<AdmissionDecision>)>> = run_items(&items, parallel, evaluate);

    let mut best: Option<(f64, Vec<AdmissionDecision>)> = None;
    for candidate in evaluated.into_iter().flatten() {
        let better = match &best {
            None => true,
            Some((obj, _)) => candidate.0 > *obj,
        };
        if better {
            best = Some(candidate);
        }
    }
    let (objective, decisions) = best.expect("the all-reject combination always evaluates");
    Ok((decisions, objective))
}

#[cfg(feature = "parallel")]
fn run_items<F>(items: &[Vec<Option<usize>>], parallel: bool, evaluate: F) -> Vec<Option<(f64, Vec<AdmissionDecision>)>>
where
    F: Fn(&mut f64, &Vec<Option<usize>>) -> Option<(f64, Vec<AdmissionDecision>)> + Sync,
{
    if parallel {
        // Each worker keeps a local incumbent hint; skipping items the hint
        // dominates cannot change the maximum, only the work done. Coarse
        // splits keep the fork-join overhead below the per-item search cost.
        items
            .par_iter()
            .with_min_len(items.len().div_ceil(4 * rayon::current_num_threads()).max(1))
            .map_init(|| f64::NEG_INFINITY, |hint, item| evaluate(hint, item))
            .collect()
    } else {
        run_items_seq(items, evaluate)
    }
}

#[cfg(not(feature = "parallel"))]
fn run_items<F>(items: &[Vec<Option<usize>>], _parallel: bool, evaluate: F) -> Vec<Option<(f64, Vec<AdmissionDecision>)>>
where
    F: Fn(&mut f64, &Vec<Option<usize>>) -> Option<(f64, Vec<AdmissionDecision>)> + Sync,
{
    run_items_seq(items, evaluate)
}

fn run_items_seq<F>(items: &[Vec<Option<usize>>], evaluate: F) -> Vec<Option<(f64, Vec<AdmissionDecision>)>>
where
    F: Fn(&mut f64, &Vec<Option<usize>>) -> Option<(f64, Vec<AdmissionDecision>)>,
{
    let mut hint = f64::NEG_INFINITY;
    items.iter().map(|item| evaluate(&mut hint, item)).collect()
}

/// Partial embedding state for one slice during the joint search.
#[derive(Clone)]
struct SliceWork {
    nodes: Vec<NodeId>,
    paths: Vec<Vec<LinkId>>,
}

struct ItemSearch<'a> {
    net: PhysicalNetwork,
    slices: &'a [SliceRequest],
    accepted: Vec<(usize, &'a SliceConfiguration)>,
    max_hops: usize,
    usage: usize,
    best_usage: usize,
    work: Vec<SliceWork>,
    best: Option<Vec<SliceWork>>,
    node_used: Vec<Vec<bool>>,
}

impl ItemSearch<'_> {
    fn remaining_links_from(&self, accepted_idx: usize, placed_in_current: usize) -> usize {
        // Lower bound on usage still to come: each unplaced virtual link
        // needs at least one physical link.
        let mut pending = 0;
        for (pos, (s, _)) in self.accepted.iter().enumerate() {
            let links = self.slices[*s].len() - 1;
            if pos > accepted_idx {
                pending += links;
            } else if pos == accepted_idx {
                pending += links.saturating_sub(placed_in_current);
            }
        }
        pending
    }

    fn place_slice(&mut self, accepted_idx: usize) {
        if accepted_idx == self.accepted.len() {
            if self.usage < self.best_usage {
                self.best_usage = self.usage;
                self.best = Some(self.work.clone());
            }
            return;
        }
        self.place_vnf(accepted_idx, 0);
    }

    fn place_vnf(&mut self, accepted_idx: usize, depth: usize) {
        let (s, config) = self.accepted[accepted_idx];
        let slice = &self.slices[s];
        if depth == slice.len() {
            self.place_slice(accepted_idx + 1);
            return;
        }
        let v = config.order()[depth];
        let demand = slice.demand(v).clone();
        for raw in 0..self.net.node_count() {
            let i = NodeId(raw as u32);
            if self.node_used[accepted_idx][i.index()] || !demand.fits_within(&self.net.node(i).remaining) {
                continue;
            }
            self.net.debit_node(i, &demand).expect("feasibility checked");
            self.node_used[accepted_idx][i.index()] = true;
            self.work[accepted_idx].nodes.push(i);
            if depth == 0 {
                self.place_vnf(accepted_idx, 1);
            } else {
                let w_prev = config.order()[depth - 1];
                let bw = slice.link_demand(w_prev, v).expect("configurations validated");
                let from = self.work[accepted_idx].nodes[depth - 1];
                let mut visited = vec![false; self.net.node_count()];
                visited[from.index()] = true;
                self.enumerate_paths(accepted_idx, depth, from, i, bw, &mut visited, &mut Vec::new());
            }
            self.work[accepted_idx].nodes.pop();
            self.node_used[accepted_idx][i.index()] = false;
            self.net.credit_node(i, &demand);
        }
    }

    /// Enumerates every simple feasible path `at -> target` in ascending
    /// link-id order, recursing into the rest of the search for each.
    #[allow(clippy::too_many_arguments)]
    fn enumerate_paths(
        &mut self,
        accepted_idx: usize,
        depth: usize,
        at: NodeId,
        target: NodeId,
        bw: u64,
        visited: &mut Vec<bool>,
        prefix: &mut Vec<LinkId>,
    ) {
        // Lower bound on the final usage: the current prefix (plus one hop
        // if the target is not reached yet) and one hop per pending link.
        let this_link_min = if at == target { prefix.len() } else { prefix.len() + 1 };
        let pending_after = self.remaining_links_from(accepted_idx, depth);
        if self.usage + this_link_min + pending_after >= self.best_usage {
            return; // cannot improve on the best complete assignment
        }
        if at == target {
            self.work[accepted_idx].paths.push(prefix.clone());
            self.usage += prefix.len();
            self.place_vnf(accepted_idx, depth + 1);
            self.usage -= prefix.len();
            self.work[accepted_idx].paths.pop();
            return;
        }
        if prefix.len() >= self.max_hops {
            return;
        }
        let outgoing: Vec<LinkId> = self.net.out_links(at).to_vec();
        for l in outgoing {
            let link = *self.net.link(l);
            if link.remaining < bw || visited[link.dst.index()] {
                continue;
            }
            visited[link.dst.index()] = true;
            prefix.push(l);
            self.net.debit_link(l, bw).expect("capacity checked");
            self.enumerate_paths(accepted_idx, depth, link.dst, target, bw, visited, prefix);
            self.net.credit_link(l, bw);
            prefix.pop();
            visited[link.dst.index()] = false;
        }
    }
}

fn evaluate_item(
    net: &PhysicalNetwork,
    slices: &[SliceRequest],
    configs: &[Vec<SliceConfiguration>],
    item: &[Option<usize>],
    gamma: f64,
    max_hops: Option<usize>,
    hint: f64,
) -> Option<(f64, Vec<AdmissionDecision>)> {
    let accepted: Vec<(usize, &SliceConfiguration)> = item
        .iter()
        .enumerate()
        .filter_map(|(s, choice)| choice.map(|k| (s, &configs[s][k])))
        .collect();
    // An item can never beat the hint when even a zero-usage embedding of
    // its accepted set falls short (usage of a non-empty chain is positive).
    if gamma * (accepted.len() as f64) < hint {
        return None;
    }
    let mut search = ItemSearch {
        net: net.clone(),
        slices,
        max_hops: max_hops.unwrap_or_else(|| net.node_count().saturating_sub(1)),
        usage: 0,
        best_usage: usize::MAX,
        work: accepted
            .iter()
            .map(|_| SliceWork {
                nodes: Vec::new(),
                paths: Vec::new(),
            })
            .collect(),
        best: None,
        node_used: accepted.iter().map(|_| vec![false; net.node_count()]).collect(),
        accepted,
    };
    search.place_slice(0);
    let best = search.best?;
    let mut decisions = Vec::with_capacity(slices.len());
    let mut accepted_iter = search.accepted.iter().zip(best.iter());
    for (s, slice) in slices.iter().enumerate() {
        match item[s] {
            None => decisions.push(AdmissionDecision::rejected(slice.id)),
            Some(_) => {
                let ((_, config), work) = accepted_iter.next().expect("one work entry per accepted slice");
                let mut embedding = Embedding::new(slice.id, config.id);
                for (p, &node) in work.nodes.iter().enumerate() {
                    embedding.node_map.insert(config.order()[p], node);
                }
                for (p, path) in work.paths.iter().enumerate() {
                    let v = config.order()[p];
                    let w = config.order()[p + 1];
                    embedding.link_paths.insert((v, w), path.clone());
                }
                decisions.push(AdmissionDecision::accepted(slice.id, (*config).clone(), embedding));
            }
        }
    }
    let objective = objective_value(&decisions, gamma).expect("gamma validated");
    Some((objective, decisions))
}
