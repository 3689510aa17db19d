//! Text export of the full linearized admission-and-embedding model in the
//! industry LP file format, plus an importer that turns a solver's
//! `name value` assignment back into admission decisions.
//!
//! Variable naming (all binary):
//!   pi_s{s}                admission indicator
//!   xn_s{s}_v{v}_n{i}      VNF v of slice s on node i
//!   xl_s{s}_v{v}_w{w}_l{l} virtual link (v, w) over directed link l
//!   y_s{s}_v{v}_w{w}       virtual link (v, w) part of the chosen chain
//!   z_s{s}_v{v}_w{w}_l{l}  product x * y, used in link capacity rows
//!   th_s{s}_v{v}_p{p}      VNF v at chain position p

use std::fmt::Write as _;

use crate::configs::enumerate_configs;
use crate::error::{Error, Result};
use crate::model::{
    AdmissionDecision, Embedding, LinkId, NodeId, PhysicalNetwork, SliceRequest, VnfId,
};

fn pi(s: usize) -> String {
    format!("pi_s{s}")
}

fn xn(s: usize, v: VnfId, i: NodeId) -> String {
    format!("xn_s{s}_v{}_n{}", v.0, i.0)
}

fn xl(s: usize, v: VnfId, w: VnfId, l: LinkId) -> String {
    format!("xl_s{s}_v{}_w{}_l{}", v.0, w.0, l.0)
}

fn yv(s: usize, v: VnfId, w: VnfId) -> String {
    format!("y_s{s}_v{}_w{}", v.0, w.0)
}

fn zv(s: usize, v: VnfId, w: VnfId, l: LinkId) -> String {
    format!("z_s{s}_v{}_w{}_l{}", v.0, w.0, l.0)
}

fn th(s: usize, v: VnfId, p: usize) -> String {
    format!("th_s{s}_v{}_p{p}", v.0)
}

/// One linear row, written as `name: terms sense rhs`.
struct Row {
    name: String,
    terms: Vec<(f64, String)>,
    sense: &'static str,
    rhs: f64,
}

fn format_terms(out: &mut String, terms: &[(f64, String)]) {
    for (idx, (coef, var)) in terms.iter().enumerate() {
        if idx == 0 {
            if *coef == 1.0 {
                let _ = write!(out, "{var}");
            } else if *coef == -1.0 {
                let _ = write!(out, "- {var}");
            } else if *coef < 0.0 {
                let _ = write!(out, "- {} {var}", -coef);
            } else {
                let _ = write!(out, "{coef} {var}");
            }
        } else if *coef == 1.0 {
            let _ = write!(out, " + {var}");
        } else if *coef == -1.0 {
            let _ = write!(out, " - {var}");
        } else if *coef < 0.0 {
            let _ = write!(out, " - {} {var}", -coef);
        } else {
            let _ = write!(out, " + {coef} {var}");
        }
    }
}

/// Emits the complete mixed-binary model for the given network state and
/// slice batch. `big_m` overrides the per-constraint defaults (chain length
/// plus one for position rows, link count plus one for flow and removal
/// rows); it must dominate both.
pub fn export_lp(
    net: &PhysicalNetwork,
    slices: &[SliceRequest],
    gamma: f64,
    big_m: Option<f64>,
) -> Result<String> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Parameter(format!("gamma {gamma} outside [0, 1]")));
    }
    let longest_chain = slices.iter().map(SliceRequest::len).max().unwrap_or(0);
    if let Some(m) = big_m {
        if m <= longest_chain.max(net.link_count()) as f64 {
            return Err(Error::Parameter(format!(
                "big-M {m} must exceed both the longest chain ({longest_chain}) and the link count ({})",
                net.link_count()
            )));
        }
    }

    let mut rows: Vec<Row> = Vec::new();
    let mut objective: Vec<(f64, String)> = Vec::new();
    let mut binaries: Vec<String> = Vec::new();
    let link_penalty = 1.0 - gamma;

    // Per-node capacity across all slices, one row per resource axis.
    let mut node_cap_terms: Vec<Vec<Vec<(f64, String)>>> =
        vec![vec![Vec::new(); net.axes().len()]; net.node_count()];
    // Per-link capacity across all slices, through the z product variables.
    let mut link_cap_terms: Vec<Vec<(f64, String)>> = vec![Vec::new(); net.link_count()];

    for (s, slice) in slices.iter().enumerate() {
        let n = slice.len();
        let flow_m = big_m.unwrap_or(net.link_count() as f64 + 1.0);
        let pos_m = big_m.unwrap_or(n as f64 + 1.0);
        binaries.push(pi(s));
        objective.push((gamma, pi(s)));

        for v in slice.vnf_ids() {
            for (i, _) in net.nodes() {
                binaries.push(xn(s, v, i));
                for (axis, bucket) in node_cap_terms[i.index()].iter_mut().enumerate() {
                    bucket.push((slice.demand(v).get(axis) as f64, xn(s, v, i)));
                }
            }
            for p in 1..=n {
                binaries.push(th(s, v, p));
            }
        }
        let pairs: Vec<(VnfId, VnfId)> = slice.link_demands().keys().copied().collect();
        for &(v, w) in &pairs {
            binaries.push(yv(s, v, w));
            let demand = slice.link_demand(v, w).expect("key exists") as f64;
            for (l, _) in net.links() {
                binaries.push(xl(s, v, w, l));
                binaries.push(zv(s, v, w, l));
                objective.push((-link_penalty, xl(s, v, w, l)));
                link_cap_terms[l.index()].push((demand, zv(s, v, w, l)));
                // z = x * y linearization.
                rows.push(Row {
                    name: format!("zx_s{s}_v{}_w{}_l{}", v.0, w.0, l.0),
                    terms: vec![(1.0, zv(s, v, w, l)), (-1.0, xl(s, v, w, l))],
                    sense: "<=",
                    rhs: 0.0,
                });
                rows.push(Row {
                    name: format!("zy_s{s}_v{}_w{}_l{}", v.0, w.0, l.0),
                    terms: vec![(1.0, zv(s, v, w, l)), (-1.0, yv(s, v, w))],
                    sense: "<=",
                    rhs: 0.0,
                });
                rows.push(Row {
                    name: format!("zxy_s{s}_v{}_w{}_l{}", v.0, w.0, l.0),
                    terms: vec![(1.0, zv(s, v, w, l)), (-1.0, xl(s, v, w, l)), (-1.0, yv(s, v, w))],
                    sense: ">=",
                    rhs: -1.0,
                });
            }
        }

        // Each physical node hosts at most one VNF of an accepted slice.
        for (i, _) in net.nodes() {
            let mut terms: Vec<(f64, String)> = slice.vnf_ids().map(|v| (1.0, xn(s, v, i))).collect();
            terms.push((-1.0, pi(s)));
            rows.push(Row {
                name: format!("once_s{s}_n{}", i.0),
                terms,
                sense: "<=",
                rhs: 0.0,
            });
        }
        // Accepted slices map every VNF exactly once.
        for v in slice.vnf_ids() {
            let mut terms: Vec<(f64, String)> = net.nodes().map(|(i, _)| (1.0, xn(s, v, i))).collect();
            terms.push((-1.0, pi(s)));
            rows.push(Row {
                name: format!("serve_s{s}_v{}", v.0),
                terms,
                sense: "=",
                rhs: 0.0,
            });
        }
        // Flow conservation per candidate virtual link, active when chosen.
        for &(v, w) in &pairs {
            for (i, _) in net.nodes() {
                let mut base: Vec<(f64, String)> = Vec::new();
                for &l in net.out_links(i) {
                    base.push((1.0, xl(s, v, w, l)));
                }
                for &l in net.in_links(i) {
                    base.push((-1.0, xl(s, v, w, l)));
                }
                base.push((-1.0, xn(s, v, i)));
                base.push((1.0, xn(s, w, i)));
                let mut ub = base.clone();
                ub.push((flow_m, yv(s, v, w)));
                rows.push(Row {
                    name: format!("flow_ub_s{s}_v{}_w{}_n{}", v.0, w.0, i.0),
                    terms: ub,
                    sense: "<=",
                    rhs: flow_m,
                });
                let mut lb = base;
                lb.push((-flow_m, yv(s, v, w)));
                rows.push(Row {
                    name: format!("flow_lb_s{s}_v{}_w{}_n{}", v.0, w.0, i.0),
                    terms: lb,
                    sense: ">=",
                    rhs: -flow_m,
                });
            }
        }
        // Chain degree: at most one chosen outgoing and incoming virtual
        // link per VNF, and a chain uses exactly n - 1 links when accepted.
        for u in slice.vnf_ids() {
            let incoming: Vec<(f64, String)> = pairs
                .iter()
                .filter(|&&(_, w)| w == u)
                .map(|&(v, w)| (1.0, yv(s, v, w)))
                .collect();
            if !incoming.is_empty() {
                let mut terms = incoming;
                terms.push((-1.0, pi(s)));
                rows.push(Row {
                    name: format!("deg_in_s{s}_v{}", u.0),
                    terms,
                    sense: "<=",
                    rhs: 0.0,
                });
            }
            let outgoing: Vec<(f64, String)> = pairs
                .iter()
                .filter(|&&(v, _)| v == u)
                .map(|&(v, w)| (1.0, yv(s, v, w)))
                .collect();
            if !outgoing.is_empty() {
                let mut terms = outgoing;
                terms.push((-1.0, pi(s)));
                rows.push(Row {
                    name: format!("deg_out_s{s}_v{}", u.0),
                    terms,
                    sense: "<=",
                    rhs: 0.0,
                });
            }
        }
        for &(v, w) in &pairs {
            if v < w && slice.link_demand(w, v).is_some() {
                rows.push(Row {
                    name: format!("loop_s{s}_v{}_w{}", v.0, w.0),
                    terms: vec![(1.0, yv(s, v, w)), (1.0, yv(s, w, v)), (-1.0, pi(s))],
                    sense: "<=",
                    rhs: 0.0,
                });
            }
        }
        {
            let mut terms: Vec<(f64, String)> = pairs.iter().map(|&(v, w)| (1.0, yv(s, v, w))).collect();
            terms.push((-((n - 1) as f64), pi(s)));
            rows.push(Row {
                name: format!("chain_s{s}"),
                terms,
                sense: "=",
                rhs: 0.0,
            });
        }
        // Chosen virtual links join consecutive positions.
        for &(v, w) in &pairs {
            let mut base: Vec<(f64, String)> = Vec::new();
            for p in 1..=n {
                base.push((p as f64, th(s, w, p)));
                base.push((-(p as f64), th(s, v, p)));
            }
            let mut ub = base.clone();
            ub.push((pos_m, yv(s, v, w)));
            rows.push(Row {
                name: format!("pos_ub_s{s}_v{}_w{}", v.0, w.0),
                terms: ub,
                sense: "<=",
                rhs: 1.0 + pos_m,
            });
            let mut lb = base;
            lb.push((-pos_m, yv(s, v, w)));
            rows.push(Row {
                name: format!("pos_lb_s{s}_v{}_w{}", v.0, w.0),
                terms: lb,
                sense: ">=",
                rhs: 1.0 - pos_m,
            });
        }
        // Unchosen virtual links carry no physical mapping.
        for &(v, w) in &pairs {
            let mut terms: Vec<(f64, String)> = net.links().map(|(l, _)| (1.0, xl(s, v, w, l))).collect();
            terms.push((-flow_m, yv(s, v, w)));
            rows.push(Row {
                name: format!("unused_s{s}_v{}_w{}", v.0, w.0),
                terms,
                sense: "<=",
                rhs: 0.0,
            });
        }
        // Every VNF of an accepted slice occupies exactly one position and
        // every position exactly one VNF.
        for v in slice.vnf_ids() {
            let mut terms: Vec<(f64, String)> = (1..=n).map(|p| (1.0, th(s, v, p))).collect();
            terms.push((-1.0, pi(s)));
            rows.push(Row {
                name: format!("onepos_s{s}_v{}", v.0),
                terms,
                sense: "=",
                rhs: 0.0,
            });
        }
        for p in 1..=n {
            let mut terms: Vec<(f64, String)> = slice.vnf_ids().map(|v| (1.0, th(s, v, p))).collect();
            terms.push((-1.0, pi(s)));
            rows.push(Row {
                name: format!("onevnf_s{s}_p{p}"),
                terms,
                sense: "=",
                rhs: 0.0,
            });
        }
        // Pinned positions, and chain links forced by adjacent pins.
        let fixed = slice.fixed_positions();
        for (&v, &p) in fixed {
            rows.push(Row {
                name: format!("fixpos_s{s}_v{}", v.0),
                terms: vec![(1.0, th(s, v, p)), (-1.0, pi(s))],
                sense: "=",
                rhs: 0.0,
            });
        }
        for (&v, &p) in fixed {
            for (&w, &q) in fixed {
                if q == p + 1 {
                    if slice.link_demand(v, w).is_none() {
                        return Err(Error::Specification(format!(
                            "slice {}: pinned pair {} -> {} has no declared demand",
                            slice.id,
                            slice.vnf(v).name,
                            slice.vnf(w).name
                        )));
                    }
                    rows.push(Row {
                        name: format!("fixlink_s{s}_v{}_w{}", v.0, w.0),
                        terms: vec![(1.0, yv(s, v, w)), (-1.0, pi(s))],
                        sense: "=",
                        rhs: 0.0,
                    });
                }
            }
        }
    }

    for (i, node) in net.nodes() {
        for (axis, bucket) in node_cap_terms[i.index()].iter_mut().enumerate() {
            let terms = std::mem::take(bucket);
            if !terms.is_empty() {
                rows.push(Row {
                    name: format!("cap_n{}_a{axis}", i.0),
                    terms,
                    sense: "<=",
                    rhs: node.remaining.get(axis) as f64,
                });
            }
        }
    }
    for (l, link) in net.links() {
        let terms = std::mem::take(&mut link_cap_terms[l.index()]);
        if !terms.is_empty() {
            rows.push(Row {
                name: format!("cap_l{}", l.0),
                terms,
                sense: "<=",
                rhs: link.remaining as f64,
            });
        }
    }

    let mut out = String::new();
    let _ = writeln!(out, "\\ slice admission and embedding model");
    let _ = writeln!(out, "Maximize");
    let mut obj_line = String::from(" obj: ");
    format_terms(&mut obj_line, &objective);
    let _ = writeln!(out, "{}", obj_line.trim_end());
    let _ = writeln!(out, "Subject To");
    for row in &rows {
        let mut line = format!(" {}: ", row.name);
        format_terms(&mut line, &row.terms);
        let _ = writeln!(out, "{} {} {}", line, row.sense, row.rhs);
    }
    let _ = writeln!(out, "Binary");
    for var in &binaries {
        let _ = writeln!(out, " {var}");
    }
    let _ = writeln!(out, "End");
    Ok(out)
}

fn parse_index(token: &str, prefix: char, name: &str) -> Result<u32> {
    token
        .strip_prefix(prefix)
        .and_then(|rest| rest.parse().ok())
        .ok_or_else(|| Error::parse(name.to_string(), format!("malformed index token {token}")))
}

#[derive(Default)]
struct SliceAssignment {
    pi: bool,
    positions: Vec<(VnfId, usize)>,
    nodes: Vec<(VnfId, NodeId)>,
    links: Vec<((VnfId, VnfId), LinkId)>,
}

/// Parses a `name value` assignment produced by an external solver (or by
/// [`encode_solution`]) back into admission decisions. Unknown variable
/// names and fractional binaries are rejected; missing variables count as
/// zero.
pub fn import_solution(
    text: &str,
    net: &PhysicalNetwork,
    slices: &[SliceRequest],
) -> Result<Vec<AdmissionDecision>> {
    let mut assignments: Vec<SliceAssignment> = slices.iter().map(|_| SliceAssignment::default()).collect();
    for (line_no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('\\') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let (name, value) = match (fields.next(), fields.next()) {
            (Some(n), Some(v)) => (n, v),
            _ => return Err(Error::parse(format!("line {}", line_no + 1), "expected `name value`")),
        };
        let value: f64 = value
            .parse()
            .map_err(|_| Error::parse(format!("line {}", line_no + 1), format!("bad value for {name}")))?;
        let rounded = value.round();
        if (value - rounded).abs() > 1e-6 || !(rounded == 0.0 || rounded == 1.0) {
            return Err(Error::parse(
                format!("line {}", line_no + 1),
                format!("{name} = {value} is not binary"),
            ));
        }
        let set = rounded == 1.0;
        let tokens: Vec<&str> = name.split('_').collect();
        let slice_of = |idx: usize| -> Result<usize> {
            let s = parse_index(tokens[idx], 's', name)? as usize;
            if s >= slices.len() {
                return Err(Error::parse(name.to_string(), format!("slice index {s} out of range")));
            }
            Ok(s)
        };
        match tokens.first() {
            Some(&"pi") if tokens.len() == 2 => {
                let s = slice_of(1)?;
                assignments[s].pi = set;
            }
            Some(&"xn") if tokens.len() == 4 => {
                let s = slice_of(1)?;
                if set {
                    let v = VnfId(parse_index(tokens[2], 'v', name)?);
                    let i = NodeId(parse_index(tokens[3], 'n', name)?);
                    assignments[s].nodes.push((v, i));
                }
            }
            Some(&"xl") if tokens.len() == 5 => {
                let s = slice_of(1)?;
                if set {
                    let v = VnfId(parse_index(tokens[2], 'v', name)?);
                    let w = VnfId(parse_index(tokens[3], 'w', name)?);
                    let l = LinkId(parse_index(tokens[4], 'l', name)?);
                    assignments[s].links.push(((v, w), l));
                }
            }
            Some(&"th") if tokens.len() == 4 => {
                let s = slice_of(1)?;
                if set {
                    let v = VnfId(parse_index(tokens[2], 'v', name)?);
                    let p = parse_index(tokens[3], 'p', name)? as usize;
                    assignments[s].positions.push((v, p));
                }
            }
            Some(&"y") if tokens.len() == 4 => {
                slice_of(1)?; // chain selection is implied by positions
            }
            Some(&"z") if tokens.len() == 5 => {
                slice_of(1)?; // product variable, informational
            }
            _ => {
                return Err(Error::parse(name.to_string(), "unknown variable name"));
            }
        }
    }

    let mut decisions = Vec::with_capacity(slices.len());
    for (s, slice) in slices.iter().enumerate() {
        let assignment = &assignments[s];
        if !assignment.pi {
            decisions.push(AdmissionDecision::rejected(slice.id));
            continue;
        }
        let n = slice.len();
        let mut order: Vec<Option<VnfId>> = vec![None; n];
        for &(v, p) in &assignment.positions {
            if p < 1 || p > n || v.index() >= n {
                return Err(Error::parse(format!("slice {}", slice.id), format!("position ({v}, {p}) out of range")));
            }
            if order[p - 1].replace(v).is_some() {
                return Err(Error::parse(format!("slice {}", slice.id), format!("position {p} assigned twice")));
            }
        }
        let order: Vec<VnfId> = order
            .into_iter()
            .collect::<Option<_>>()
            .ok_or_else(|| Error::parse(format!("slice {}", slice.id), "incomplete position assignment"))?;
        let configuration = enumerate_configs(slice)?
            .into_iter()
            .find(|c| c.order() == order)
            .ok_or_else(|| Error::parse(format!("slice {}", slice.id), "positions match no admissible configuration"))?;

        let mut embedding = Embedding::new(slice.id, configuration.id);
        for &(v, i) in &assignment.nodes {
            if !net.contains_node(i) {
                return Err(Error::parse(format!("slice {}", slice.id), format!("unknown node {i}")));
            }
            if embedding.node_map.insert(v, i).is_some() {
                return Err(Error::parse(format!("slice {}", slice.id), format!("{v} mapped twice")));
            }
        }
        let mut per_pair: std::collections::BTreeMap<(VnfId, VnfId), Vec<LinkId>> = std::collections::BTreeMap::new();
        for &(pair, l) in &assignment.links {
            per_pair.entry(pair).or_default().push(l);
        }
        for (v, w) in configuration.chain() {
            let mut pool = per_pair.remove(&(v, w)).unwrap_or_default();
            let src = *embedding
                .node_map
                .get(&v)
                .ok_or_else(|| Error::parse(format!("slice {}", slice.id), format!("{v} unmapped")))?;
            let dst = *embedding
                .node_map
                .get(&w)
                .ok_or_else(|| Error::parse(format!("slice {}", slice.id), format!("{w} unmapped")))?;
            let mut path = Vec::with_capacity(pool.len());
            let mut at = src;
            while at != dst {
                let next = pool
                    .iter()
                    .position(|&l| net.link(l).src == at)
                    .ok_or_else(|| Error::parse(format!("slice {}", slice.id), format!("broken walk for ({v}, {w})")))?;
                let l = pool.swap_remove(next);
                path.push(l);
                at = net.link(l).dst;
            }
            if !pool.is_empty() {
                return Err(Error::parse(
                    format!("slice {}", slice.id),
                    format!("stray links on virtual link ({v}, {w})"),
                ));
            }
            embedding.link_paths.insert((v, w), path);
        }
        if let Some(((v, w), _)) = per_pair.into_iter().next() {
            return Err(Error::parse(
                format!("slice {}", slice.id),
                format!("links mapped for pair ({v}, {w}) outside the chain"),
            ));
        }
        decisions.push(AdmissionDecision::accepted(slice.id, configuration, embedding));
    }
    Ok(decisions)
}

/// Renders decisions as the `name value` lines [`import_solution`] accepts.
/// Admission variables are always present; other variables appear when set.
/// Decision order defines the slice indices, matching [`export_lp`].
pub fn encode_solution(decisions: &[AdmissionDecision]) -> String {
    let mut out = String::new();
    for (s, decision) in decisions.iter().enumerate() {
        let accepted = match &decision.accepted {
            Some(a) => {
                let _ = writeln!(out, "{} 1", pi(s));
                a
            }
            None => {
                let _ = writeln!(out, "{} 0", pi(s));
                continue;
            }
        };
        let config = &accepted.configuration;
        for (p0, &v) in config.order().iter().enumerate() {
            let _ = writeln!(out, "{} 1", th(s, v, p0 + 1));
        }
        for (&v, &i) in &accepted.embedding.node_map {
            let _ = writeln!(out, "{} 1", xn(s, v, i));
        }
        for (&(v, w), path) in &accepted.embedding.link_paths {
            let _ = writeln!(out, "{} 1", yv(s, v, w));
            for &l in path {
                let _ = writeln!(out, "{} 1", xl(s, v, w, l));
                let _ = writeln!(out, "{} 1", zv(s, v, w, l));
            }
        }
    }
    out
}
