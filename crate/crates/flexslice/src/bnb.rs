//! Depth-first branch-and-bound over VNF-to-node assignments, one tree per
//! slice configuration. Branches are bounded by `g + h`, where `g` is the
//! normalized resource usage committed so far and `h` estimates how
//! unbalanced the partial mapping leaves the network. An optional branch
//! limit caps the number of complete solutions explored per configuration.

use std::time::Instant;

use crate::configs::enumerate_configs;
use crate::error::{Error, Result};
use crate::model::{
    apply_embedding, AdmissionDecision, Embedding, LinkId, NodeId, PhysicalNetwork, Resources, ScenarioResult,
    SliceConfiguration, SliceRequest, VnfId,
};
use crate::pathing::PathFinder;

/// Cost comparisons use this absolute tolerance so floating-point ties do
/// not flip the incumbent.
pub const COST_EPS: f64 = 1e-9;

/// Cap on complete feasible solutions explored per configuration.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BranchLimit {
    Unlimited,
    Limit(u64),
}

impl BranchLimit {
    pub fn new(limit: Option<u64>) -> Result<Self> {
        match limit {
            None => Ok(BranchLimit::Unlimited),
            Some(0) => Err(Error::Parameter("branch limit must be at least 1".into())),
            Some(n) => Ok(BranchLimit::Limit(n)),
        }
    }

    fn reached(self, found: u64) -> bool {
        match self {
            BranchLimit::Unlimited => false,
            BranchLimit::Limit(n) => found >= n,
        }
    }
}

impl std::fmt::Display for BranchLimit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BranchLimit::Unlimited => f.write_str("inf"),
            BranchLimit::Limit(n) => write!(f, "{n}"),
        }
    }
}

/// Weights of node and link usage in both cost terms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostWeights {
    pub node: f64,
    pub link: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        // Equal contribution of node and link usage.
        CostWeights { node: 0.5, link: 0.5 }
    }
}

#[derive(Clone, Debug)]
pub struct BnbOptions {
    pub beta: BranchLimit,
    pub weights: CostWeights,
    /// When false the load-balance estimate is dropped from the bound, which
    /// makes `g` alone the bound and the search provably exhaustive over the
    /// cost order.
    pub balance_term: bool,
    /// Objective weight used for reporting the scenario value.
    pub gamma: f64,
}

impl Default for BnbOptions {
    fn default() -> Self {
        BnbOptions {
            beta: BranchLimit::Unlimited,
            weights: CostWeights::default(),
            balance_term: true,
            gamma: 0.999,
        }
    }
}

/// Mean over resource axes of demand divided by reference capacity.
fn node_fraction(demand: &Resources, reference: &Resources) -> Result<f64> {
    let axes = demand.axes();
    let mut total = 0.0;
    for a in 0..axes {
        let cap = reference.get(a);
        if cap == 0 {
            return Err(Error::Specification("zero-capacity denominator in cost".into()));
        }
        total += demand.get(a) as f64 / cap as f64;
    }
    Ok(total / axes as f64)
}

/// Actual cost of a (possibly partial) embedding: the weighted sum of
/// normalized node and link usage. Denominators are the capacities available
/// when the slice arrived, held fixed for the whole per-slice search so the
/// cost stays additive along a branch.
pub fn actual_cost(
    net_at_arrival: &PhysicalNetwork,
    slice: &SliceRequest,
    partial: &Embedding,
    weights: &CostWeights,
) -> Result<f64> {
    let mut g = 0.0;
    for (&v, &i) in &partial.node_map {
        g += weights.node * node_fraction(slice.demand(v), &net_at_arrival.node(i).remaining)?;
    }
    for (&(v, w), path) in &partial.link_paths {
        let demand = slice
            .link_demand(v, w)
            .ok_or_else(|| Error::Specification(format!("slice {}: no demand for pair ({v}, {w})", slice.id)))?;
        for &l in path {
            let cap = net_at_arrival.link(l).remaining;
            if cap == 0 {
                return Err(Error::Specification("zero-capacity denominator in cost".into()));
            }
            g += weights.link * demand as f64 / cap as f64;
        }
    }
    Ok(g)
}

/// Population standard deviation of integer samples, computed through the
/// exact integer identity `n * sum(x^2) - sum(x)^2` to avoid cancellation.
fn population_stddev(sum: u64, sumsq: u128, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let num = (n as u128) * sumsq - (sum as u128) * (sum as u128);
    (num as f64).sqrt() / n as f64
}

/// Estimated cost of the current network state: per-axis standard deviation
/// of remaining node capacities normalized by total original capacity, plus
/// the same statistic over links. Uniform remaining capacities give exactly
/// zero.
pub fn estimated_cost(net: &PhysicalNetwork, weights: &CostWeights) -> f64 {
    let axes = net.axes().len();
    let n = net.node_count() as u64;
    let mut node_term = 0.0;
    for a in 0..axes {
        let mut sum = 0u64;
        let mut sumsq = 0u128;
        let mut cap_total = 0u64;
        for (_, node) in net.nodes() {
            let r = node.remaining.get(a);
            sum += r;
            sumsq += (r as u128) * (r as u128);
            cap_total += node.capacity.get(a);
        }
        if cap_total > 0 {
            node_term += population_stddev(sum, sumsq, n) / cap_total as f64;
        }
    }
    if axes > 0 {
        node_term /= axes as f64;
    }
    let mut link_sum = 0u64;
    let mut link_sumsq = 0u128;
    let mut link_cap_total = 0u64;
    for (_, link) in net.links() {
        link_sum += link.remaining;
        link_sumsq += (link.remaining as u128) * (link.remaining as u128);
        link_cap_total += link.capacity;
    }
    let link_term = if link_cap_total > 0 {
        population_stddev(link_sum, link_sumsq, net.link_count() as u64) / link_cap_total as f64
    } else {
        0.0
    };
    weights.node * node_term + weights.link * link_term
}

/// A complete per-slice solution: the chosen configuration, its embedding,
/// and the bound value it achieved.
#[derive(Clone, Debug)]
pub struct SliceSolution {
    pub configuration: SliceConfiguration,
    pub embedding: Embedding,
    pub cost: f64,
}

/// Running sums for the balance estimate, updated on every debit/credit so
/// the per-expansion cost stays constant. All integer arithmetic; the
/// derived standard deviations equal the direct recomputation exactly.
struct BalanceStats {
    node_sum: Vec<u64>,
    node_sumsq: Vec<u128>,
    node_cap_total: Vec<u64>,
    node_count: u64,
    link_sum: u64,
    link_sumsq: u128,
    link_cap_total: u64,
    link_count: u64,
}

impl BalanceStats {
    fn capture(net: &PhysicalNetwork) -> Self {
        let axes = net.axes().len();
        let mut stats = BalanceStats {
            node_sum: vec![0; axes],
            node_sumsq: vec![0; axes],
            node_cap_total: vec![0; axes],
            node_count: net.node_count() as u64,
            link_sum: 0,
            link_sumsq: 0,
            link_cap_total: 0,
            link_count: net.link_count() as u64,
        };
        for (_, node) in net.nodes() {
            for a in 0..axes {
                let r = node.remaining.get(a);
                stats.node_sum[a] += r;
                stats.node_sumsq[a] += (r as u128) * (r as u128);
                stats.node_cap_total[a] += node.capacity.get(a);
            }
        }
        for (_, link) in net.links() {
            stats.link_sum += link.remaining;
            stats.link_sumsq += (link.remaining as u128) * (link.remaining as u128);
            stats.link_cap_total += link.capacity;
        }
        stats
    }

    fn node_changed(&mut self, axis: usize, old: u64, new: u64) {
        self.node_sum[axis] = self.node_sum[axis] - old + new;
        self.node_sumsq[axis] = self.node_sumsq[axis] - (old as u128) * (old as u128) + (new as u128) * (new as u128);
    }

    fn link_changed(&mut self, old: u64, new: u64) {
        self.link_sum = self.link_sum - old + new;
        self.link_sumsq = self.link_sumsq - (old as u128) * (old as u128) + (new as u128) * (new as u128);
    }

    fn estimate(&self, weights: &CostWeights) -> f64 {
        let axes = self.node_sum.len();
        let mut node_term = 0.0;
        for a in 0..axes {
            if self.node_cap_total[a] > 0 {
                node_term += population_stddev(self.node_sum[a], self.node_sumsq[a], self.node_count)
                    / self.node_cap_total[a] as f64;
            }
        }
        if axes > 0 {
            node_term /= axes as f64;
        }
        let link_term = if self.link_cap_total > 0 {
            population_stddev(self.link_sum, self.link_sumsq, self.link_count) / self.link_cap_total as f64
        } else {
            0.0
        };
        weights.node * node_term + weights.link * link_term
    }
}

/// Snapshot of the best complete assignment found so far.
struct Incumbent {
    config_index: usize,
    nodes: Vec<NodeId>,
    paths: Vec<Vec<LinkId>>,
    cost: f64,
}

struct Search<'a> {
    net: PhysicalNetwork,
    slice: &'a SliceRequest,
    opts: &'a BnbOptions,
    arrival_nodes: Vec<Resources>,
    arrival_links: Vec<u64>,
    stats: BalanceStats,
    finder: PathFinder,
    used: Vec<bool>,
    assigned: Vec<NodeId>,
    paths: Vec<Vec<LinkId>>,
    incumbent: f64,
    best: Option<Incumbent>,
    solutions_in_config: u64,
    config_index: usize,
}

enum Flow {
    Continue,
    StopConfig,
}

impl Search<'_> {
    fn node_term(&self, v: VnfId, i: NodeId) -> Result<f64> {
        Ok(self.opts.weights.node * node_fraction(self.slice.demand(v), &self.arrival_nodes[i.index()])?)
    }

    fn link_term(&self, demand: u64, path: &[LinkId]) -> f64 {
        let mut g = 0.0;
        for &l in path {
            g += self.opts.weights.link * demand as f64 / self.arrival_links[l.index()] as f64;
        }
        g
    }

    fn commit_node(&mut self, i: NodeId, demand: &Resources) {
        for a in 0..demand.axes() {
            let old = self.net.node(i).remaining.get(a);
            self.stats.node_changed(a, old, old - demand.get(a));
        }
        self.net.debit_node(i, demand).expect("feasibility checked");
    }

    fn uncommit_node(&mut self, i: NodeId, demand: &Resources) {
        self.net.credit_node(i, demand);
        for a in 0..demand.axes() {
            let new = self.net.node(i).remaining.get(a);
            self.stats.node_changed(a, new - demand.get(a), new);
        }
    }

    fn commit_link(&mut self, l: LinkId, demand: u64) {
        let old = self.net.link(l).remaining;
        self.stats.link_changed(old, old - demand);
        self.net.debit_link(l, demand).expect("path links feasible");
    }

    fn uncommit_link(&mut self, l: LinkId, demand: u64) {
        self.net.credit_link(l, demand);
        let new = self.net.link(l).remaining;
        self.stats.link_changed(new - demand, new);
    }

    fn backtrack(&mut self, order: &[VnfId], depth: usize, g: f64) -> Result<Flow> {
        let v = order[depth];
        let demand = self.slice.demand(v).clone();
        let link_demand = if depth > 0 {
            Some(
                self.slice
                    .link_demand(order[depth - 1], v)
                    .ok_or_else(|| Error::Specification(format!("slice {}: missing chain demand", self.slice.id)))?,
            )
        } else {
            None
        };
        let leaf = depth + 1 == order.len();
        for raw in 0..self.net.node_count() {
            let i = NodeId(raw as u32);
            if self.used[i.index()] || !demand.fits_within(&self.net.node(i).remaining) {
                continue;
            }
            // Both remaining cost terms are nonnegative, so a partial g that
            // already meets the incumbent rules this candidate out before
            // the path search. Leaves still run in full: every complete
            // feasible solution reached must count toward the branch limit.
            let node_g = self.node_term(v, i)?;
            if !leaf && g + node_g >= self.incumbent - COST_EPS {
                continue;
            }
            let path = match link_demand {
                Some(d) => {
                    let prev = self.assigned[depth - 1];
                    match self.finder.find(&self.net, prev, i, d) {
                        Some(p) => Some(p),
                        None => continue, // no feasible route to this node
                    }
                }
                None => None,
            };
            let g_next = g + node_g + path.as_ref().map_or(0.0, |p| self.link_term(link_demand.unwrap_or(0), p));
            if !leaf && g_next >= self.incumbent - COST_EPS {
                continue;
            }

            // Tentatively commit the assignment.
            self.commit_node(i, &demand);
            self.used[i.index()] = true;
            self.assigned.push(i);
            if let Some(p) = path {
                let d = link_demand.expect("path implies demand");
                for &l in &p {
                    self.commit_link(l, d);
                }
                self.paths.push(p);
            }
            let bound = if self.opts.balance_term {
                g_next + self.stats.estimate(&self.opts.weights)
            } else {
                g_next
            };

            let mut flow = Flow::Continue;
            if leaf {
                // Complete feasible solution reached.
                self.solutions_in_config += 1;
                if bound < self.incumbent - COST_EPS {
                    self.incumbent = bound;
                    self.best = Some(Incumbent {
                        config_index: self.config_index,
                        nodes: self.assigned.clone(),
                        paths: self.paths.clone(),
                        cost: bound,
                    });
                }
                if self.opts.beta.reached(self.solutions_in_config) {
                    flow = Flow::StopConfig;
                }
            } else if bound < self.incumbent - COST_EPS {
                flow = self.backtrack(order, depth + 1, g_next)?;
            }

            // Undo.
            if depth > 0 {
                let d = link_demand.expect("checked above");
                let p = self.paths.pop().expect("pushed above");
                for &l in &p {
                    self.uncommit_link(l, d);
                }
            }
            self.assigned.pop();
            self.used[i.index()] = false;
            self.uncommit_node(i, &demand);

            if let Flow::StopConfig = flow {
                return Ok(Flow::StopConfig);
            }
        }
        Ok(Flow::Continue)
    }
}

/// Searches every configuration of a slice and returns the cheapest complete
/// embedding, or `None` when no configuration fits the current network. The
/// incumbent carries across configurations, so earlier configurations prune
/// later ones.
pub fn solve_slice(net: &PhysicalNetwork, slice: &SliceRequest, opts: &BnbOptions) -> Result<Option<SliceSolution>> {
    let configs = enumerate_configs(slice)?;
    let mut search = Search {
        net: net.clone(),
        slice,
        opts,
        arrival_nodes: net.nodes().map(|(_, n)| n.remaining.clone()).collect(),
        arrival_links: net.links().map(|(_, l)| l.remaining).collect(),
        stats: BalanceStats::capture(net),
        finder: PathFinder::new(),
        used: vec![false; net.node_count()],
        assigned: Vec::with_capacity(slice.len()),
        paths: Vec::with_capacity(slice.len().saturating_sub(1)),
        incumbent: f64::INFINITY,
        best: None,
        solutions_in_config: 0,
        config_index: 0,
    };
    for (idx, config) in configs.iter().enumerate() {
        search.config_index = idx;
        search.solutions_in_config = 0;
        search.backtrack(config.order(), 0, 0.0)?;
        debug_assert!(search.assigned.is_empty() && search.paths.is_empty());
        debug_assert_eq!(
            search.stats.estimate(&opts.weights),
            estimated_cost(&search.net, &opts.weights)
        );
    }
    Ok(search.best.map(|found| {
        let configuration = configs[found.config_index].clone();
        let mut embedding = Embedding::new(slice.id, configuration.id);
        for (p, &node) in found.nodes.iter().enumerate() {
            embedding.node_map.insert(configuration.order()[p], node);
        }
        for (p, path) in found.paths.into_iter().enumerate() {
            let v = configuration.order()[p];
            let w = configuration.order()[p + 1];
            embedding.link_paths.insert((v, w), path);
        }
        SliceSolution { configuration, embedding, cost: found.cost }
    }))
}

/// Embeds a batch of slices sequentially, committing each accepted slice
/// before attempting the next.
pub fn solve_all(net: &PhysicalNetwork, slices: &[SliceRequest], opts: &BnbOptions) -> Result<ScenarioResult> {
    let start = Instant::now();
    let mut working = net.clone();
    let mut decisions = Vec::with_capacity(slices.len());
    for slice in slices {
        match solve_slice(&working, slice, opts)? {
            Some(solution) => {
                apply_embedding(&mut working, slice, &solution.embedding)?;
                decisions.push(AdmissionDecision::accepted(
                    slice.id,
                    solution.configuration,
                    solution.embedding,
                ));
            }
            None => decisions.push(AdmissionDecision::rejected(slice.id)),
        }
    }
    ScenarioResult::from_decisions(decisions, opts.gamma, start.elapsed())
}
