//! Layered fat-tree generation and ingestion of JSON graph descriptions
//! (Abilene- and Cost266-style WAN topologies ship as bundled documents).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{NodeId, PhysicalNetwork, Resources};

/// Per-layer node capacities as (compute, storage) plus per-tier link
/// bandwidths of a fat-tree.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LayerCapacities {
    pub host: (u64, u64),
    pub edge: (u64, u64),
    pub agg: (u64, u64),
    pub core: (u64, u64),
    pub host_edge_bw: u64,
    pub edge_agg_bw: u64,
    pub agg_core_bw: u64,
}

impl Default for LayerCapacities {
    fn default() -> Self {
        // Hosts 2 vCPU / 2 GB, edges 6/4, aggregations 12/32, cores 32/120;
        // 10 Gbps access links, 20 Gbps above.
        LayerCapacities {
            host: (2, 2),
            edge: (6, 4),
            agg: (12, 32),
            core: (32, 120),
            host_edge_bw: 10,
            edge_agg_bw: 20,
            agg_core_bw: 20,
        }
    }
}

/// Explicit layer counts of a fat-tree. The named presets reproduce the two
/// evaluation trees (18 nodes / 40 directed links and 99 / 324).
#[derive(Clone, Debug, PartialEq)]
pub struct FatTreePreset {
    pub name: String,
    pub pods: usize,
    pub aggs_per_pod: usize,
    pub edges_per_pod: usize,
    pub hosts_per_edge: usize,
    pub cores: usize,
    /// Core links per aggregation node, assigned round-robin over cores.
    pub agg_core_degree: usize,
    pub capacities: LayerCapacities,
}

impl FatTreePreset {
    pub fn two_ary() -> Self {
        FatTreePreset {
            name: "2-ary".into(),
            pods: 2,
            aggs_per_pod: 2,
            edges_per_pod: 2,
            hosts_per_edge: 2,
            cores: 2,
            agg_core_degree: 1,
            capacities: LayerCapacities::default(),
        }
    }

    pub fn six_ary() -> Self {
        FatTreePreset {
            name: "6-ary".into(),
            pods: 6,
            aggs_per_pod: 3,
            edges_per_pod: 3,
            hosts_per_edge: 3,
            cores: 9,
            agg_core_degree: 3,
            capacities: LayerCapacities::default(),
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "2-ary" => Some(Self::two_ary()),
            "6-ary" => Some(Self::six_ary()),
            _ => None,
        }
    }

    pub fn node_total(&self) -> usize {
        self.cores + self.pods * (self.aggs_per_pod + self.edges_per_pod) + self.pods * self.edges_per_pod * self.hosts_per_edge
    }
}

/// Builds a fat-tree. Node ids run cores, aggregations, edges, hosts, so that
/// ascending-id iteration visits layers in decreasing capacity.
///
/// Wiring: every host hangs off exactly one edge node; inside a pod the edge
/// and aggregation layers form a complete bipartite graph; each aggregation
/// node connects to `agg_core_degree` cores assigned round-robin.
pub fn gen_fat_tree(preset: &FatTreePreset) -> Result<PhysicalNetwork> {
    if preset.pods == 0
        || preset.aggs_per_pod == 0
        || preset.edges_per_pod == 0
        || preset.hosts_per_edge == 0
        || preset.cores == 0
        || preset.agg_core_degree == 0
    {
        return Err(Error::Parameter("fat-tree preset counts must be at least 1".into()));
    }
    if preset.agg_core_degree > preset.cores {
        return Err(Error::Parameter(format!(
            "agg_core_degree {} exceeds core count {}",
            preset.agg_core_degree, preset.cores
        )));
    }
    let caps = &preset.capacities;
    let mut net = PhysicalNetwork::new(vec!["compute".into(), "storage".into()]);
    let res = |c: (u64, u64)| Resources::new(vec![c.0, c.1]);

    let cores: Vec<NodeId> = (0..preset.cores)
        .map(|c| net.add_node(format!("core{c}"), res(caps.core)))
        .collect::<Result<_>>()?;
    let mut aggs = Vec::with_capacity(preset.pods * preset.aggs_per_pod);
    for p in 0..preset.pods {
        for a in 0..preset.aggs_per_pod {
            aggs.push(net.add_node(format!("pod{p}-agg{a}"), res(caps.agg))?);
        }
    }
    let mut edges = Vec::with_capacity(preset.pods * preset.edges_per_pod);
    for p in 0..preset.pods {
        for e in 0..preset.edges_per_pod {
            edges.push(net.add_node(format!("pod{p}-edge{e}"), res(caps.edge))?);
        }
    }
    let mut hosts = Vec::with_capacity(preset.pods * preset.edges_per_pod * preset.hosts_per_edge);
    for p in 0..preset.pods {
        for e in 0..preset.edges_per_pod {
            for h in 0..preset.hosts_per_edge {
                hosts.push(net.add_node(format!("pod{p}-edge{e}-host{h}"), res(caps.host))?);
            }
        }
    }

    let mut next_core = 0usize;
    for &agg in &aggs {
        for _ in 0..preset.agg_core_degree {
            net.add_undirected(agg, cores[next_core % preset.cores], caps.agg_core_bw)?;
            next_core += 1;
        }
    }
    for p in 0..preset.pods {
        for e in 0..preset.edges_per_pod {
            let edge = edges[p * preset.edges_per_pod + e];
            for a in 0..preset.aggs_per_pod {
                net.add_undirected(edge, aggs[p * preset.aggs_per_pod + a], caps.edge_agg_bw)?;
            }
        }
    }
    for (h, &host) in hosts.iter().enumerate() {
        let edge = edges[h / preset.hosts_per_edge];
        net.add_undirected(host, edge, caps.host_edge_bw)?;
    }
    Ok(net)
}

#[derive(Serialize, Deserialize, Default)]
struct GraphDefaults {
    compute: Option<u64>,
    storage: Option<u64>,
    bandwidth: Option<u64>,
}

#[derive(Serialize, Deserialize)]
struct GraphNodeDoc {
    id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    compute: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    storage: Option<u64>,
}

#[derive(Serialize, Deserialize)]
struct GraphEdgeDoc {
    a: String,
    b: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    bandwidth: Option<u64>,
}

#[derive(Serialize, Deserialize)]
struct GraphDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    notes: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    defaults: Option<GraphDefaults>,
    nodes: Vec<GraphNodeDoc>,
    edges: Vec<GraphEdgeDoc>,
}

/// Parses a JSON graph description into a network. Every undirected edge
/// becomes two directed links of equal capacity; per-node and per-edge
/// capacity overrides fall back to the document's `defaults` section.
pub fn load_graph(document: &str) -> Result<PhysicalNetwork> {
    let doc: GraphDoc = serde_json::from_str(document)
        .map_err(|e| Error::parse(format!("document:{}:{}", e.line(), e.column()), e.to_string()))?;
    if doc.nodes.is_empty() {
        return Err(Error::parse("nodes", "node list is empty"));
    }
    let defaults = doc.defaults.unwrap_or_default();
    let mut net = PhysicalNetwork::new(vec!["compute".into(), "storage".into()]);
    for (idx, node) in doc.nodes.iter().enumerate() {
        let loc = || format!("nodes[{idx}]");
        let compute = node
            .compute
            .or(defaults.compute)
            .ok_or_else(|| Error::parse(loc(), format!("node {} has no compute capacity and no default", node.id)))?;
        let storage = node
            .storage
            .or(defaults.storage)
            .ok_or_else(|| Error::parse(loc(), format!("node {} has no storage capacity and no default", node.id)))?;
        net.add_node(node.id.clone(), Resources::new(vec![compute, storage]))
            .map_err(|e| Error::parse(loc(), e.to_string()))?;
    }
    for (idx, edge) in doc.edges.iter().enumerate() {
        let loc = || format!("edges[{idx}]");
        let a = net
            .node_by_name(&edge.a)
            .ok_or_else(|| Error::parse(loc(), format!("unknown endpoint {}", edge.a)))?;
        let b = net
            .node_by_name(&edge.b)
            .ok_or_else(|| Error::parse(loc(), format!("unknown endpoint {}", edge.b)))?;
        let bw = edge
            .bandwidth
            .or(defaults.bandwidth)
            .ok_or_else(|| Error::parse(loc(), format!("edge {}-{} has no bandwidth and no default", edge.a, edge.b)))?;
        net.add_undirected(a, b, bw)
            .map_err(|e| Error::parse(loc(), e.to_string()))?;
    }
    Ok(net)
}

/// Writes a network back to the graph-description document format.
/// Capacities are emitted; remaining amounts are not part of the format, so
/// only fresh networks round-trip through `load_graph`.
pub fn serialize_graph(net: &PhysicalNetwork) -> Result<String> {
    let nodes = net
        .nodes()
        .map(|(_, n)| GraphNodeDoc {
            id: n.name.clone(),
            compute: Some(n.capacity.get(0)),
            storage: Some(n.capacity.get(1)),
        })
        .collect();
    // Each undirected pair is written once, oriented as its first-created
    // direction, so a reload reproduces the exact link numbering.
    let mut edges = Vec::with_capacity(net.link_count() / 2);
    for (id, link) in net.links() {
        let reverse = net
            .link_between(link.dst, link.src)
            .ok_or_else(|| Error::Parameter("network has a one-way link; not representable".into()))?;
        if net.link(reverse).capacity != link.capacity {
            return Err(Error::Parameter("asymmetric link capacities; not representable".into()));
        }
        if reverse > id {
            edges.push(GraphEdgeDoc {
                a: net.node_name(link.src).to_string(),
                b: net.node_name(link.dst).to_string(),
                bandwidth: Some(link.capacity),
            });
        }
    }
    let doc = GraphDoc {
        name: None,
        notes: None,
        defaults: None,
        nodes,
        edges,
    };
    Ok(serde_json::to_string_pretty(&doc).expect("graph document serializes"))
}

pub fn abilene() -> PhysicalNetwork {
    load_graph(include_str!("../data/abilene.json")).expect("bundled abilene document is valid")
}

pub fn cost266() -> PhysicalNetwork {
    load_graph(include_str!("../data/cost266.json")).expect("bundled cost266 document is valid")
}

/// Resolves a topology argument: a preset name, a bundled WAN name, or a path
/// to a graph-description file.
pub fn by_name_or_path(spec: &str) -> Result<PhysicalNetwork> {
    if let Some(preset) = FatTreePreset::by_name(spec) {
        return gen_fat_tree(&preset);
    }
    match spec {
        "abilene" => Ok(abilene()),
        "cost266" => Ok(cost266()),
        path => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read topology {path}: {e}")))?;
            load_graph(&text)
        }
    }
}

/// True when every node can reach every other over directed links.
pub fn is_connected(net: &PhysicalNetwork) -> bool {
    let n = net.node_count();
    if n == 0 {
        return true;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![NodeId(0)];
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for &l in net.out_links(u) {
            let v = net.link(l).dst;
            if !seen[v.index()] {
                seen[v.index()] = true;
                count += 1;
                stack.push(v);
            }
        }
    }
    count == n
}
