//! Domain types for physical networks, slice requests, configurations and
//! embeddings, plus the objective function, the constraint validator and the
//! resource commit/revert operations shared by all solvers.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::time::Duration;

use crate::error::{Error, Result};

/// Index of a physical node within its network.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct NodeId(pub u32);

/// Index of a directed physical link within its network.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct LinkId(pub u32);

/// Identifier of a slice request within a scenario.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct SliceId(pub u32);

/// Index of a VNF within its slice's `vnfs` list.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct VnfId(pub u32);

/// Index of a configuration within a slice's enumeration order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct ConfigId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl LinkId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl VnfId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

impl fmt::Display for LinkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "l{}", self.0)
    }
}

impl fmt::Display for SliceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

impl fmt::Display for VnfId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Display for ConfigId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k{}", self.0 + 1)
    }
}

/// A vector of node-resource quantities, one entry per named axis of the
/// network (for example `[compute, storage]`). Quantities are integral so
/// that commit followed by revert restores a network bit-exactly.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Resources(Vec<u64>);

impl Resources {
    pub fn new(values: Vec<u64>) -> Self {
        Resources(values)
    }

    /// Single-axis quantity, convenient for tests and uniform scenarios.
    pub fn scalar(value: u64) -> Self {
        Resources(vec![value])
    }

    pub fn axes(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, axis: usize) -> u64 {
        self.0[axis]
    }

    pub fn values(&self) -> &[u64] {
        &self.0
    }

    /// True when every axis of `self` fits within `avail`.
    pub fn fits_within(&self, avail: &Resources) -> bool {
        self.0.len() == avail.0.len() && self.0.iter().zip(&avail.0).all(|(d, a)| d <= a)
    }

    pub fn all_positive(&self) -> bool {
        self.0.iter().all(|&v| v > 0)
    }

    fn checked_sub_assign(&mut self, other: &Resources) -> bool {
        if !other.fits_within(self) {
            return false;
        }
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a -= b;
        }
        true
    }

    fn add_assign(&mut self, other: &Resources) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b;
        }
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct NodeState {
    pub name: String,
    pub capacity: Resources,
    pub remaining: Resources,
}

#[derive(Clone, Copy, PartialEq, Debug)]
pub struct LinkState {
    pub src: NodeId,
    pub dst: NodeId,
    pub capacity: u64,
    pub remaining: u64,
}

/// Capacitated directed graph of physical nodes and links. Undirected inputs
/// are stored as two directed links with equal capacity. The network is a
/// plain value: solvers clone it, mutate their copy and throw it away.
#[derive(Clone, PartialEq, Debug, Default)]
pub struct PhysicalNetwork {
    axes: Vec<String>,
    nodes: Vec<NodeState>,
    links: Vec<LinkState>,
    out: Vec<Vec<LinkId>>,
    inc: Vec<Vec<LinkId>>,
    by_endpoints: HashMap<(NodeId, NodeId), LinkId>,
    by_name: HashMap<String, NodeId>,
}

impl PhysicalNetwork {
    pub fn new(axes: Vec<String>) -> Self {
        PhysicalNetwork {
            axes,
            ..Default::default()
        }
    }

    pub fn axes(&self) -> &[String] {
        &self.axes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn add_node(&mut self, name: impl Into<String>, capacity: Resources) -> Result<NodeId> {
        let name = name.into();
        if capacity.axes() != self.axes.len() {
            return Err(Error::Parameter(format!(
                "node {name}: expected {} resource axes, got {}",
                self.axes.len(),
                capacity.axes()
            )));
        }
        if self.by_name.contains_key(&name) {
            return Err(Error::Parameter(format!("duplicate node id {name}")));
        }
        let id = NodeId(self.nodes.len() as u32);
        self.by_name.insert(name.clone(), id);
        self.nodes.push(NodeState {
            name,
            remaining: capacity.clone(),
            capacity,
        });
        self.out.push(Vec::new());
        self.inc.push(Vec::new());
        Ok(id)
    }

    /// Adds one directed link. At most one directed link may exist per
    /// ordered node pair and self-loops are rejected.
    pub fn add_link(&mut self, src: NodeId, dst: NodeId, bandwidth: u64) -> Result<LinkId> {
        self.check_node(src)?;
        self.check_node(dst)?;
        if src == dst {
            return Err(Error::Parameter(format!("self-loop on {}", self.node_name(src))));
        }
        if self.by_endpoints.contains_key(&(src, dst)) {
            return Err(Error::Parameter(format!(
                "duplicate link {} -> {}",
                self.node_name(src),
                self.node_name(dst)
            )));
        }
        let id = LinkId(self.links.len() as u32);
        self.links.push(LinkState {
            src,
            dst,
            capacity: bandwidth,
            remaining: bandwidth,
        });
        self.by_endpoints.insert((src, dst), id);
        self.out[src.index()].push(id);
        self.inc[dst.index()].push(id);
        Ok(id)
    }

    /// Adds both directions of an undirected connection with equal capacity.
    pub fn add_undirected(&mut self, a: NodeId, b: NodeId, bandwidth: u64) -> Result<(LinkId, LinkId)> {
        let fwd = self.add_link(a, b, bandwidth)?;
        let bwd = self.add_link(b, a, bandwidth)?;
        Ok((fwd, bwd))
    }

    pub fn node(&self, id: NodeId) -> &NodeState {
        &self.nodes[id.index()]
    }

    pub fn node_name(&self, id: NodeId) -> &str {
        &self.nodes[id.index()].name
    }

    pub fn node_by_name(&self, name: &str) -> Option<NodeId> {
        self.by_name.get(name).copied()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &NodeState)> {
        self.nodes.iter().enumerate().map(|(i, n)| (NodeId(i as u32), n))
    }

    pub fn link(&self, id: LinkId) -> &LinkState {
        &self.links[id.index()]
    }

    pub fn links(&self) -> impl Iterator<Item = (LinkId, &LinkState)> {
        self.links.iter().enumerate().map(|(i, l)| (LinkId(i as u32), l))
    }

    pub fn link_between(&self, src: NodeId, dst: NodeId) -> Option<LinkId> {
        self.by_endpoints.get(&(src, dst)).copied()
    }

    /// Outgoing links of `id` in ascending link-id order.
    pub fn out_links(&self, id: NodeId) -> &[LinkId] {
        &self.out[id.index()]
    }

    /// Incoming links of `id` in ascending link-id order.
    pub fn in_links(&self, id: NodeId) -> &[LinkId] {
        &self.inc[id.index()]
    }

    pub fn contains_node(&self, id: NodeId) -> bool {
        id.index() < self.nodes.len()
    }

    fn check_node(&self, id: NodeId) -> Result<()> {
        if self.contains_node(id) {
            Ok(())
        } else {
            Err(Error::Parameter(format!("unknown node id {id}")))
        }
    }

    pub fn debit_node(&mut self, id: NodeId, demand: &Resources) -> Result<()> {
        let node = &mut self.nodes[id.index()];
        if !node.remaining.checked_sub_assign(demand) {
            return Err(Error::Commit(format!(
                "node {} lacks {:?} (remaining {:?})",
                node.name, demand, node.remaining
            )));
        }
        Ok(())
    }

    pub fn credit_node(&mut self, id: NodeId, demand: &Resources) {
        let node = &mut self.nodes[id.index()];
        node.remaining.add_assign(demand);
        debug_assert!(node.remaining.fits_within(&node.capacity));
    }

    pub fn debit_link(&mut self, id: LinkId, demand: u64) -> Result<()> {
        let link = &mut self.links[id.index()];
        if link.remaining < demand {
            return Err(Error::Commit(format!(
                "link {} -> {} lacks {} (remaining {})",
                link.src, link.dst, demand, link.remaining
            )));
        }
        link.remaining -= demand;
        Ok(())
    }

    pub fn credit_link(&mut self, id: LinkId, demand: u64) {
        let link = &mut self.links[id.index()];
        link.remaining += demand;
        debug_assert!(link.remaining <= link.capacity);
    }
}

/// One VNF of a slice with its node-resource demand.
#[derive(Clone, PartialEq, Debug)]
pub struct Vnf {
    pub name: String,
    pub demand: Resources,
}

/// A slice request: an unordered set of VNFs, optional fixed chain positions
/// for some of them, and bandwidth demands for every ordered VNF pair that
/// may become a virtual link in some configuration.
#[derive(Clone, PartialEq, Debug)]
pub struct SliceRequest {
    pub id: SliceId,
    vnfs: Vec<Vnf>,
    fixed_positions: BTreeMap<VnfId, usize>,
    link_demands: BTreeMap<(VnfId, VnfId), u64>,
}

impl SliceRequest {
    pub fn new(
        id: SliceId,
        vnfs: Vec<Vnf>,
        fixed_positions: BTreeMap<VnfId, usize>,
        link_demands: BTreeMap<(VnfId, VnfId), u64>,
    ) -> Result<Self> {
        if vnfs.is_empty() {
            return Err(Error::Specification(format!("slice {id} has no VNFs")));
        }
        let n = vnfs.len();
        let axes = vnfs[0].demand.axes();
        for (i, vnf) in vnfs.iter().enumerate() {
            if vnf.demand.axes() != axes {
                return Err(Error::Specification(format!(
                    "slice {id}: VNF {} has {} resource axes, expected {axes}",
                    vnf.name,
                    vnf.demand.axes()
                )));
            }
            if !vnf.demand.all_positive() {
                return Err(Error::Specification(format!(
                    "slice {id}: VNF {} must have strictly positive demands",
                    vnf.name
                )));
            }
            if vnfs[..i].iter().any(|v| v.name == vnf.name) {
                return Err(Error::Specification(format!(
                    "slice {id}: duplicate VNF name {}",
                    vnf.name
                )));
            }
        }
        let mut seen = vec![false; n];
        for (&v, &p) in &fixed_positions {
            if v.index() >= n {
                return Err(Error::Specification(format!("slice {id}: fixed position for unknown VNF {v}")));
            }
            if p < 1 || p > n {
                return Err(Error::Specification(format!(
                    "slice {id}: fixed position {p} for {} out of range 1..={n}",
                    vnfs[v.index()].name
                )));
            }
            if seen[p - 1] {
                return Err(Error::Specification(format!("slice {id}: duplicate fixed position {p}")));
            }
            seen[p - 1] = true;
        }
        for (&(v, w), &d) in &link_demands {
            if v.index() >= n || w.index() >= n {
                return Err(Error::Specification(format!("slice {id}: link demand for unknown pair ({v}, {w})")));
            }
            if v == w {
                return Err(Error::Specification(format!("slice {id}: link demand on identical pair ({v}, {v})")));
            }
            if d == 0 {
                return Err(Error::Specification(format!(
                    "slice {id}: link demand for ({v}, {w}) must be strictly positive"
                )));
            }
        }
        Ok(SliceRequest {
            id,
            vnfs,
            fixed_positions,
            link_demands,
        })
    }

    pub fn len(&self) -> usize {
        self.vnfs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vnfs.is_empty()
    }

    pub fn vnf(&self, v: VnfId) -> &Vnf {
        &self.vnfs[v.index()]
    }

    pub fn vnf_ids(&self) -> impl Iterator<Item = VnfId> {
        (0..self.vnfs.len() as u32).map(VnfId)
    }

    pub fn demand(&self, v: VnfId) -> &Resources {
        &self.vnfs[v.index()].demand
    }

    pub fn fixed_positions(&self) -> &BTreeMap<VnfId, usize> {
        &self.fixed_positions
    }

    /// VNFs without a fixed position, in ascending id order.
    pub fn flexible(&self) -> Vec<VnfId> {
        self.vnf_ids().filter(|v| !self.fixed_positions.contains_key(v)).collect()
    }

    pub fn link_demand(&self, v: VnfId, w: VnfId) -> Option<u64> {
        self.link_demands.get(&(v, w)).copied()
    }

    pub fn link_demands(&self) -> &BTreeMap<(VnfId, VnfId), u64> {
        &self.link_demands
    }

    pub fn resource_axes(&self) -> usize {
        self.vnfs[0].demand.axes()
    }
}

/// One admissible ordering of a slice's VNFs. `order[p-1]` is the VNF placed
/// at chain position `p`; the virtual-link chain follows consecutive
/// positions.
#[derive(Clone, PartialEq, Debug)]
pub struct SliceConfiguration {
    pub slice: SliceId,
    pub id: ConfigId,
    order: Vec<VnfId>,
}

impl SliceConfiguration {
    pub fn from_order(slice: &SliceRequest, id: ConfigId, order: Vec<VnfId>) -> Result<Self> {
        let n = slice.len();
        if order.len() != n {
            return Err(Error::Specification(format!(
                "configuration {id} of slice {} has {} positions, expected {n}",
                slice.id,
                order.len()
            )));
        }
        let mut seen = vec![false; n];
        for &v in &order {
            if v.index() >= n || seen[v.index()] {
                return Err(Error::Specification(format!(
                    "configuration {id} of slice {} is not a permutation",
                    slice.id
                )));
            }
            seen[v.index()] = true;
        }
        for (&v, &p) in slice.fixed_positions() {
            if order[p - 1] != v {
                return Err(Error::Specification(format!(
                    "configuration {id} of slice {} does not pin {} at position {p}",
                    slice.id,
                    slice.vnf(v).name
                )));
            }
        }
        Ok(SliceConfiguration { slice: slice.id, id, order })
    }

    pub fn order(&self) -> &[VnfId] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// 1-based chain position of a VNF.
    pub fn position_of(&self, v: VnfId) -> usize {
        self.order.iter().position(|&x| x == v).expect("vnf in configuration") + 1
    }

    /// The chain links (v, w) with position(w) = position(v) + 1, in order.
    pub fn chain(&self) -> impl Iterator<Item = (VnfId, VnfId)> + '_ {
        self.order.windows(2).map(|w| (w[0], w[1]))
    }
}

/// Mapping of one slice configuration onto the physical network: a node per
/// VNF and a directed physical path per virtual link.
#[derive(Clone, PartialEq, Debug)]
pub struct Embedding {
    pub slice: SliceId,
    pub config: ConfigId,
    pub node_map: BTreeMap<VnfId, NodeId>,
    pub link_paths: BTreeMap<(VnfId, VnfId), Vec<LinkId>>,
}

impl Embedding {
    pub fn new(slice: SliceId, config: ConfigId) -> Self {
        Embedding {
            slice,
            config,
            node_map: BTreeMap::new(),
            link_paths: BTreeMap::new(),
        }
    }

    /// Number of (virtual link, physical link) usage pairs; a physical link
    /// carrying two virtual links counts twice.
    pub fn usage_pairs(&self) -> usize {
        self.link_paths.values().map(Vec::len).sum()
    }
}

/// Accepted outcome of admission control for one slice.
#[derive(Clone, PartialEq, Debug)]
pub struct AcceptedSlice {
    pub configuration: SliceConfiguration,
    pub embedding: Embedding,
}

/// Admission decision for one slice; a slice is accepted exactly when it
/// carries a configuration and an embedding.
#[derive(Clone, PartialEq, Debug)]
pub struct AdmissionDecision {
    pub slice: SliceId,
    pub accepted: Option<AcceptedSlice>,
}

impl AdmissionDecision {
    pub fn rejected(slice: SliceId) -> Self {
        AdmissionDecision { slice, accepted: None }
    }

    pub fn accepted(slice: SliceId, configuration: SliceConfiguration, embedding: Embedding) -> Self {
        AdmissionDecision {
            slice,
            accepted: Some(AcceptedSlice { configuration, embedding }),
        }
    }

    pub fn is_accepted(&self) -> bool {
        self.accepted.is_some()
    }
}

/// Outcome of one solver run over a batch of slices.
#[derive(Clone, Debug)]
pub struct ScenarioResult {
    pub decisions: Vec<AdmissionDecision>,
    /// Absent when the run contained no slices (0/0 has no meaningful rate).
    pub acceptance_rate: Option<f64>,
    pub objective: f64,
    pub per_config_counts: BTreeMap<ConfigId, usize>,
    pub wall_time: Duration,
}

impl ScenarioResult {
    pub fn from_decisions(decisions: Vec<AdmissionDecision>, gamma: f64, wall_time: Duration) -> Result<Self> {
        let objective = objective_value(&decisions, gamma)?;
        let total = decisions.len();
        let accepted = decisions.iter().filter(|d| d.is_accepted()).count();
        let mut per_config_counts = BTreeMap::new();
        for d in &decisions {
            if let Some(a) = &d.accepted {
                *per_config_counts.entry(a.configuration.id).or_insert(0) += 1;
            }
        }
        Ok(ScenarioResult {
            decisions,
            acceptance_rate: if total == 0 { None } else { Some(accepted as f64 / total as f64) },
            objective,
            per_config_counts,
            wall_time,
        })
    }

    pub fn accepted_count(&self) -> usize {
        self.decisions.iter().filter(|d| d.is_accepted()).count()
    }
}

/// Scalarized value of a decision set: `gamma` times the number of accepted
/// slices minus `1 - gamma` times the total count of (virtual link, physical
/// link) usage pairs over all accepted embeddings.
pub fn objective_value(decisions: &[AdmissionDecision], gamma: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Parameter(format!("gamma {gamma} outside [0, 1]")));
    }
    let accepted = decisions.iter().filter(|d| d.is_accepted()).count();
    let usage: usize = decisions
        .iter()
        .filter_map(|d| d.accepted.as_ref())
        .map(|a| a.embedding.usage_pairs())
        .sum();
    Ok(gamma * accepted as f64 - (1.0 - gamma) * usage as f64)
}

/// The constraint a violation refers to, named by what it checks.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ConstraintKind {
    /// Joint per-node demand exceeds the node's available resources.
    NodeCapacity,
    /// Joint per-link demand exceeds the link's available bandwidth.
    LinkCapacity,
    /// Two VNFs of one slice share a physical node.
    NodeReuse,
    /// An accepted slice left a VNF unmapped.
    MissingVnfMapping,
    /// A virtual link of the chosen chain has no physical path.
    MissingLinkPath,
    /// A path does not form a connected walk between its mapped endpoints.
    PathEndpoints,
    /// The chosen chain is malformed (wrong link set or loops).
    ChainStructure,
    /// The position assignment is not a bijection onto chain positions.
    PositionAssignment,
    /// A VNF with a required position sits elsewhere.
    FixedPosition,
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ConstraintKind::NodeCapacity => "node-capacity",
            ConstraintKind::LinkCapacity => "link-capacity",
            ConstraintKind::NodeReuse => "node-reuse",
            ConstraintKind::MissingVnfMapping => "missing-vnf-mapping",
            ConstraintKind::MissingLinkPath => "missing-link-path",
            ConstraintKind::PathEndpoints => "path-endpoints",
            ConstraintKind::ChainStructure => "chain-structure",
            ConstraintKind::PositionAssignment => "position-assignment",
            ConstraintKind::FixedPosition => "fixed-position",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
pub struct Violation {
    pub slice: Option<SliceId>,
    pub kind: ConstraintKind,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.slice {
            Some(s) => write!(f, "[{}] {}: {}", self.kind, s, self.detail),
            None => write!(f, "[{}] {}", self.kind, self.detail),
        }
    }
}

/// Every violation found by [`validate_embedding`]; empty means the solution
/// is feasible against the given network state.
#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, slice: Option<SliceId>, kind: ConstraintKind, detail: String) {
        self.violations.push(Violation { slice, kind, detail });
    }
}

/// Checks a full decision set against the remaining capacities of `net`.
/// All violations are collected rather than failing on the first, so a bad
/// solver run can be diagnosed in one pass.
pub fn validate_embedding<'a>(
    net: &PhysicalNetwork,
    pairs: impl IntoIterator<Item = (&'a SliceRequest, &'a AdmissionDecision)>,
) -> ValidationReport {
    let mut report = ValidationReport::default();
    let axes = net.axes().len();
    let mut node_load: Vec<Vec<u64>> = vec![vec![0; axes]; net.node_count()];
    let mut link_load: Vec<u64> = vec![0; net.link_count()];

    for (slice, decision) in pairs {
        let sid = slice.id;
        let accepted = match &decision.accepted {
            Some(a) => a,
            None => continue,
        };
        if slice.resource_axes() != axes {
            report.push(
                Some(sid),
                ConstraintKind::NodeCapacity,
                format!("slice declares {} resource axes, network has {axes}", slice.resource_axes()),
            );
            continue;
        }
        let config = &accepted.configuration;
        let emb = &accepted.embedding;
        let n = slice.len();

        // Position assignment must be a permutation of this slice's VNFs.
        let mut seen = vec![false; n];
        let mut permutation = config.order().len() == n;
        for &v in config.order() {
            if v.index() >= n || seen[v.index()] {
                permutation = false;
                break;
            }
            seen[v.index()] = true;
        }
        if !permutation {
            report.push(
                Some(sid),
                ConstraintKind::PositionAssignment,
                format!("configuration {} is not a bijection onto positions", config.id),
            );
        }
        for (&v, &p) in slice.fixed_positions() {
            if permutation && config.order()[p - 1] != v {
                report.push(
                    Some(sid),
                    ConstraintKind::FixedPosition,
                    format!("{} must sit at position {p}", slice.vnf(v).name),
                );
            }
        }

        // Every VNF mapped, each to a distinct node.
        let mut hosts: HashMap<NodeId, VnfId> = HashMap::new();
        for v in slice.vnf_ids() {
            match emb.node_map.get(&v) {
                None => report.push(
                    Some(sid),
                    ConstraintKind::MissingVnfMapping,
                    format!("{} is not mapped", slice.vnf(v).name),
                ),
                Some(&i) => {
                    if !net.contains_node(i) {
                        report.push(
                            Some(sid),
                            ConstraintKind::MissingVnfMapping,
                            format!("{} mapped to unknown node {i}", slice.vnf(v).name),
                        );
                        continue;
                    }
                    if let Some(&other) = hosts.get(&i) {
                        report.push(
                            Some(sid),
                            ConstraintKind::NodeReuse,
                            format!(
                                "{} and {} share node {}",
                                slice.vnf(other).name,
                                slice.vnf(v).name,
                                net.node_name(i)
                            ),
                        );
                    } else {
                        hosts.insert(i, v);
                    }
                    for (axis, load) in node_load[i.index()].iter_mut().enumerate() {
                        *load += slice.demand(v).get(axis);
                    }
                }
            }
        }

        // The embedded link set must be exactly the chain of the chosen
        // configuration, and each path must connect its endpoints.
        if permutation {
            let chain: Vec<(VnfId, VnfId)> = config.chain().collect();
            for &(v, w) in &chain {
                match emb.link_paths.get(&(v, w)) {
                    None => report.push(
                        Some(sid),
                        ConstraintKind::MissingLinkPath,
                        format!("virtual link {}->{} has no path", slice.vnf(v).name, slice.vnf(w).name),
                    ),
                    Some(path) => {
                        let demand = slice.link_demand(v, w);
                        if demand.is_none() {
                            report.push(
                                Some(sid),
                                ConstraintKind::ChainStructure,
                                format!(
                                    "no bandwidth demand declared for {}->{}",
                                    slice.vnf(v).name,
                                    slice.vnf(w).name
                                ),
                            );
                        }
                        check_walk(net, slice, emb, v, w, path, &mut report);
                        if let Some(d) = demand {
                            for &l in path {
                                if l.index() < net.link_count() {
                                    link_load[l.index()] += d;
                                }
                            }
                        }
                    }
                }
            }
            for &(v, w) in emb.link_paths.keys() {
                if !chain.contains(&(v, w)) {
                    report.push(
                        Some(sid),
                        ConstraintKind::ChainStructure,
                        format!(
                            "path for {}->{} is not part of the chosen chain",
                            slice.vnf(v).name,
                            slice.vnf(w).name
                        ),
                    );
                }
            }
        }
    }

    for (i, loads) in node_load.iter().enumerate() {
        let node = net.node(NodeId(i as u32));
        for (axis, &load) in loads.iter().enumerate() {
            if load > node.remaining.get(axis) {
                report.push(
                    None,
                    ConstraintKind::NodeCapacity,
                    format!(
                        "node {} axis {}: demand {} exceeds available {}",
                        node.name,
                        net.axes()[axis],
                        load,
                        node.remaining.get(axis)
                    ),
                );
            }
        }
    }
    for (i, &load) in link_load.iter().enumerate() {
        let link = net.link(LinkId(i as u32));
        if load > link.remaining {
            report.push(
                None,
                ConstraintKind::LinkCapacity,
                format!(
                    "link {} -> {}: demand {} exceeds available {}",
                    net.node_name(link.src),
                    net.node_name(link.dst),
                    load,
                    link.remaining
                ),
            );
        }
    }
    report
}

fn check_walk(
    net: &PhysicalNetwork,
    slice: &SliceRequest,
    emb: &Embedding,
    v: VnfId,
    w: VnfId,
    path: &[LinkId],
    report: &mut ValidationReport,
) {
    let (src, dst) = match (emb.node_map.get(&v), emb.node_map.get(&w)) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return, // missing mapping already reported
    };
    let label = || format!("{}->{}", slice.vnf(v).name, slice.vnf(w).name);
    if path.is_empty() {
        if src != dst {
            report.push(
                Some(slice.id),
                ConstraintKind::PathEndpoints,
                format!("{}: empty path between distinct nodes", label()),
            );
        }
        return;
    }
    let mut at = src;
    for &l in path {
        if l.index() >= net.link_count() {
            report.push(
                Some(slice.id),
                ConstraintKind::PathEndpoints,
                format!("{}: unknown link {l}", label()),
            );
            return;
        }
        let link = net.link(l);
        if link.src != at {
            report.push(
                Some(slice.id),
                ConstraintKind::PathEndpoints,
                format!("{}: disconnected walk at {}", label(), net.node_name(at)),
            );
            return;
        }
        at = link.dst;
    }
    if at != dst {
        report.push(
            Some(slice.id),
            ConstraintKind::PathEndpoints,
            format!("{}: walk ends at {} instead of {}", label(), net.node_name(at), net.node_name(dst)),
        );
    }
}

/// Commits an embedding: debits every mapped node by its VNF demand and every
/// physical link on a virtual-link path by that link's bandwidth demand.
/// All-or-nothing: on insufficient capacity the network is left unchanged.
pub fn apply_embedding(net: &mut PhysicalNetwork, slice: &SliceRequest, emb: &Embedding) -> Result<()> {
    let axes = net.axes().len();
    let mut node_need: BTreeMap<NodeId, Vec<u64>> = BTreeMap::new();
    let mut link_need: BTreeMap<LinkId, u64> = BTreeMap::new();
    for (&v, &i) in &emb.node_map {
        let entry = node_need.entry(i).or_insert_with(|| vec![0; axes]);
        for (axis, e) in entry.iter_mut().enumerate() {
            *e += slice.demand(v).get(axis);
        }
    }
    for (&(v, w), path) in &emb.link_paths {
        let demand = slice
            .link_demand(v, w)
            .ok_or_else(|| Error::Specification(format!("slice {}: no demand for pair ({v}, {w})", slice.id)))?;
        for &l in path {
            *link_need.entry(l).or_insert(0) += demand;
        }
    }
    for (&i, need) in &node_need {
        let node = net.node(i);
        for (axis, &n) in need.iter().enumerate() {
            if n > node.remaining.get(axis) {
                return Err(Error::Commit(format!(
                    "node {} axis {} lacks {} (remaining {})",
                    node.name,
                    net.axes()[axis],
                    n,
                    node.remaining.get(axis)
                )));
            }
        }
    }
    for (&l, &need) in &link_need {
        if need > net.link(l).remaining {
            return Err(Error::Commit(format!(
                "link {l} lacks {need} (remaining {})",
                net.link(l).remaining
            )));
        }
    }
    for (i, need) in node_need {
        net.debit_node(i, &Resources::new(need)).expect("checked above");
    }
    for (l, need) in link_need {
        net.debit_link(l, need).expect("checked above");
    }
    Ok(())
}

/// Reverses [`apply_embedding`], restoring the exact prior capacities.
pub fn revert_embedding(net: &mut PhysicalNetwork, slice: &SliceRequest, emb: &Embedding) -> Result<()> {
    for (&v, &i) in &emb.node_map {
        net.credit_node(i, slice.demand(v));
    }
    for (&(v, w), path) in &emb.link_paths {
        let demand = slice
            .link_demand(v, w)
            .ok_or_else(|| Error::Specification(format!("slice {}: no demand for pair ({v}, {w})", slice.id)))?;
        for &l in path {
            net.credit_link(l, demand);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_network(caps: &[u64], bw: u64) -> PhysicalNetwork {
        let mut net = PhysicalNetwork::new(vec!["units".into()]);
        let ids: Vec<NodeId> = caps
            .iter()
            .enumerate()
            .map(|(i, &c)| net.add_node(format!("n{i}"), Resources::scalar(c)).unwrap())
            .collect();
        for w in ids.windows(2) {
            net.add_undirected(w[0], w[1], bw).unwrap();
        }
        net
    }

    fn two_vnf_slice(id: u32, demand: u64, bw: u64) -> SliceRequest {
        let vnfs = vec![
            Vnf { name: "a".into(), demand: Resources::scalar(demand) },
            Vnf { name: "b".into(), demand: Resources::scalar(demand) },
        ];
        let mut fixed = BTreeMap::new();
        fixed.insert(VnfId(0), 1);
        fixed.insert(VnfId(1), 2);
        let mut demands = BTreeMap::new();
        demands.insert((VnfId(0), VnfId(1)), bw);
        SliceRequest::new(SliceId(id), vnfs, fixed, demands).unwrap()
    }

    fn embed_on(net: &PhysicalNetwork, slice: &SliceRequest, a: &str, b: &str) -> (SliceConfiguration, Embedding) {
        let cfg = SliceConfiguration::from_order(slice, ConfigId(0), vec![VnfId(0), VnfId(1)]).unwrap();
        let na = net.node_by_name(a).unwrap();
        let nb = net.node_by_name(b).unwrap();
        let mut emb = Embedding::new(slice.id, cfg.id);
        emb.node_map.insert(VnfId(0), na);
        emb.node_map.insert(VnfId(1), nb);
        emb.link_paths
            .insert((VnfId(0), VnfId(1)), vec![net.link_between(na, nb).unwrap()]);
        (cfg, emb)
    }

    #[test]
    fn objective_all_rejected_is_zero() {
        let decisions = vec![AdmissionDecision::rejected(SliceId(0)), AdmissionDecision::rejected(SliceId(1))];
        assert_eq!(objective_value(&decisions, 0.42).unwrap(), 0.0);
    }

    #[test]
    fn objective_single_slice_four_usage_pairs() {
        // One accepted slice whose 4 virtual links each occupy one physical link.
        let net = line_network(&[10, 10, 10, 10, 10], 100);
        let vnfs: Vec<Vnf> = (0..5)
            .map(|i| Vnf { name: format!("f{i}"), demand: Resources::scalar(1) })
            .collect();
        let fixed: BTreeMap<VnfId, usize> = (0..5u32).map(|i| (VnfId(i), i as usize + 1)).collect();
        let demands: BTreeMap<(VnfId, VnfId), u64> =
            (0..4u32).map(|i| ((VnfId(i), VnfId(i + 1)), 1)).collect();
        let slice = SliceRequest::new(SliceId(0), vnfs, fixed, demands).unwrap();
        let cfg = SliceConfiguration::from_order(&slice, ConfigId(0), (0..5u32).map(VnfId).collect()).unwrap();
        let mut emb = Embedding::new(slice.id, cfg.id);
        for i in 0..5u32 {
            emb.node_map.insert(VnfId(i), NodeId(i));
        }
        for i in 0..4u32 {
            let l = net.link_between(NodeId(i), NodeId(i + 1)).unwrap();
            emb.link_paths.insert((VnfId(i), VnfId(i + 1)), vec![l]);
        }
        let decisions = vec![AdmissionDecision::accepted(slice.id, cfg, emb)];
        let got = objective_value(&decisions, 0.999).unwrap();
        assert!((got - 0.995).abs() < 1e-12, "got {got}");
    }

    #[test]
    fn objective_rejects_bad_gamma() {
        assert!(matches!(objective_value(&[], 1.5), Err(Error::Parameter(_))));
        assert!(matches!(objective_value(&[], -0.1), Err(Error::Parameter(_))));
    }

    #[test]
    fn validate_empty_is_ok() {
        let net = line_network(&[5], 10);
        let report = validate_embedding(&net, std::iter::empty());
        assert!(report.is_ok());
    }

    #[test]
    fn validate_flags_node_reuse_and_capacity() {
        // Two VNFs of 3 units each forced onto one node of capacity 5.
        let net = line_network(&[5, 5], 10);
        let slice = two_vnf_slice(0, 3, 1);
        let cfg = SliceConfiguration::from_order(&slice, ConfigId(0), vec![VnfId(0), VnfId(1)]).unwrap();
        let mut emb = Embedding::new(slice.id, cfg.id);
        emb.node_map.insert(VnfId(0), NodeId(0));
        emb.node_map.insert(VnfId(1), NodeId(0));
        emb.link_paths.insert((VnfId(0), VnfId(1)), vec![]);
        let decision = AdmissionDecision::accepted(slice.id, cfg, emb);
        let report = validate_embedding(&net, [(&slice, &decision)]);
        let kinds: Vec<ConstraintKind> = report.violations.iter().map(|v| v.kind).collect();
        assert!(kinds.contains(&ConstraintKind::NodeReuse));
        assert!(kinds.contains(&ConstraintKind::NodeCapacity));
    }

    #[test]
    fn validate_flags_fixed_position() {
        let net = line_network(&[5, 5], 10);
        let slice = two_vnf_slice(0, 1, 1);
        // Swap the order despite both positions being pinned.
        let cfg = SliceConfiguration { slice: slice.id, id: ConfigId(0), order: vec![VnfId(1), VnfId(0)] };
        let mut emb = Embedding::new(slice.id, cfg.id);
        emb.node_map.insert(VnfId(0), NodeId(1));
        emb.node_map.insert(VnfId(1), NodeId(0));
        emb.link_paths
            .insert((VnfId(1), VnfId(0)), vec![net.link_between(NodeId(0), NodeId(1)).unwrap()]);
        let decision = AdmissionDecision::accepted(slice.id, cfg, emb);
        let report = validate_embedding(&net, [(&slice, &decision)]);
        assert!(report.violations.iter().any(|v| v.kind == ConstraintKind::FixedPosition));
    }

    #[test]
    fn apply_exact_fit_drains_node() {
        let mut net = line_network(&[2, 5], 10);
        let slice = two_vnf_slice(0, 2, 1);
        let (_, emb) = embed_on(&net, &slice, "n0", "n1");
        apply_embedding(&mut net, &slice, &emb).unwrap();
        assert_eq!(net.node(NodeId(0)).remaining, Resources::scalar(0));
        assert_eq!(net.node(NodeId(1)).remaining, Resources::scalar(3));
    }

    #[test]
    fn apply_debits_every_hop() {
        let mut net = line_network(&[5, 5, 5], 20);
        let vnfs = vec![
            Vnf { name: "a".into(), demand: Resources::scalar(1) },
            Vnf { name: "b".into(), demand: Resources::scalar(1) },
        ];
        let fixed: BTreeMap<VnfId, usize> = [(VnfId(0), 1), (VnfId(1), 2)].into();
        let demands: BTreeMap<(VnfId, VnfId), u64> = [((VnfId(0), VnfId(1)), 10)].into();
        let slice = SliceRequest::new(SliceId(0), vnfs, fixed, demands).unwrap();
        let cfg = SliceConfiguration::from_order(&slice, ConfigId(0), vec![VnfId(0), VnfId(1)]).unwrap();
        let mut emb = Embedding::new(slice.id, cfg.id);
        emb.node_map.insert(VnfId(0), NodeId(0));
        emb.node_map.insert(VnfId(1), NodeId(2));
        let l01 = net.link_between(NodeId(0), NodeId(1)).unwrap();
        let l12 = net.link_between(NodeId(1), NodeId(2)).unwrap();
        emb.link_paths.insert((VnfId(0), VnfId(1)), vec![l01, l12]);
        apply_embedding(&mut net, &slice, &emb).unwrap();
        assert_eq!(net.link(l01).remaining, 10);
        assert_eq!(net.link(l12).remaining, 10);
    }

    #[test]
    fn second_identical_commit_fails_and_leaves_network_unchanged() {
        let mut net = line_network(&[3, 3], 10);
        let slice = two_vnf_slice(0, 2, 1);
        let (_, emb) = embed_on(&net, &slice, "n0", "n1");
        apply_embedding(&mut net, &slice, &emb).unwrap();
        let before = net.clone();
        let err = apply_embedding(&mut net, &slice, &emb);
        assert!(matches!(err, Err(Error::Commit(_))));
        assert_eq!(net, before);
    }

    #[test]
    fn apply_then_revert_is_identity() {
        let mut net = line_network(&[4, 7, 9], 15);
        let original = net.clone();
        let slice = two_vnf_slice(3, 2, 5);
        let (_, emb) = embed_on(&net, &slice, "n1", "n2");
        apply_embedding(&mut net, &slice, &emb).unwrap();
        assert_ne!(net, original);
        revert_embedding(&mut net, &slice, &emb).unwrap();
        assert_eq!(net, original);
    }

    #[test]
    fn duplicate_directed_link_rejected() {
        let mut net = PhysicalNetwork::new(vec!["units".into()]);
        let a = net.add_node("a", Resources::scalar(1)).unwrap();
        let b = net.add_node("b", Resources::scalar(1)).unwrap();
        net.add_link(a, b, 5).unwrap();
        assert!(net.add_link(a, b, 5).is_err());
        net.add_link(b, a, 5).unwrap();
    }

    #[test]
    fn objective_monotonicity() {
        // With total link usage held at 2, more accepted slices raises the
        // value; with acceptance held at 1, more usage lowers it.
        let net = line_network(&[5, 5, 5], 10);
        let slice0 = two_vnf_slice(0, 1, 1);
        let slice1 = two_vnf_slice(1, 1, 1);
        let (c0, e0) = embed_on(&net, &slice0, "n0", "n1");
        let (c1, e1) = embed_on(&net, &slice1, "n1", "n2");
        let mut two_hop = e0.clone();
        two_hop.link_paths.insert(
            (VnfId(0), VnfId(1)),
            vec![
                net.link_between(NodeId(0), NodeId(1)).unwrap(),
                net.link_between(NodeId(1), NodeId(2)).unwrap(),
            ],
        );
        let one_accept_h2 = vec![
            AdmissionDecision::accepted(slice0.id, c0.clone(), two_hop),
            AdmissionDecision::rejected(slice1.id),
        ];
        let two_accept_h2 = vec![
            AdmissionDecision::accepted(slice0.id, c0.clone(), e0.clone()),
            AdmissionDecision::accepted(slice1.id, c1, e1),
        ];
        let one_accept_h1 = vec![
            AdmissionDecision::accepted(slice0.id, c0, e0),
            AdmissionDecision::rejected(slice1.id),
        ];
        for gamma in [0.5, 0.9, 0.999] {
            let h2n1 = objective_value(&one_accept_h2, gamma).unwrap();
            let h2n2 = objective_value(&two_accept_h2, gamma).unwrap();
            let h1n1 = objective_value(&one_accept_h1, gamma).unwrap();
            assert!(h2n2 > h2n1, "same usage, more accepts must win (gamma {gamma})");
            assert!(h1n1 > h2n1, "same accepts, less usage must win (gamma {gamma})");
        }
    }
}
