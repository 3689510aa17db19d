//! Scenario runner: builds the experiment matrix (topology x algorithm x
//! slice setting), runs solvers, re-validates their output and emits
//! machine-readable reports. The JSON report is fully deterministic for a
//! given spec and seed; wall-clock timing goes into the CSV row only.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{
    validate_embedding, AdmissionDecision, ConfigId, PhysicalNetwork, Resources, ScenarioResult, SliceId,
    SliceRequest, Vnf, VnfId,
};
use crate::{bfn, bnb, configs, exact, topology};

pub const REPORT_VERSION: u32 = 1;

/// Which VNF orderings a run may use: everything the template allows, or one
/// ordering pinned for every slice.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum Setting {
    #[serde(rename = "k1")]
    K1Only,
    #[serde(rename = "k2")]
    K2Only,
    #[serde(rename = "flexible")]
    Flexible,
}

impl Setting {
    pub fn parse(token: &str) -> Result<Self> {
        match token {
            "k1" => Ok(Setting::K1Only),
            "k2" => Ok(Setting::K2Only),
            "flex" | "flexible" => Ok(Setting::Flexible),
            other => Err(Error::Config(format!("unknown setting {other}; use k1, k2 or flex"))),
        }
    }

    /// Index of the pinned template configuration, if any.
    fn pinned_index(self) -> Option<usize> {
        match self {
            Setting::K1Only => Some(0),
            Setting::K2Only => Some(1),
            Setting::Flexible => None,
        }
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Setting::K1Only => f.write_str("k1"),
            Setting::K2Only => f.write_str("k2"),
            Setting::Flexible => f.write_str("flexible"),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgoKind {
    Exact,
    Bnb,
    Bfn,
}

impl AlgoKind {
    pub fn parse(token: &str) -> Result<Self> {
        match token {
            "exact" => Ok(AlgoKind::Exact),
            "bnb" => Ok(AlgoKind::Bnb),
            "bfn" => Ok(AlgoKind::Bfn),
            other => Err(Error::Config(format!("unknown algorithm {other}; use exact, bnb or bfn"))),
        }
    }
}

impl fmt::Display for AlgoKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgoKind::Exact => f.write_str("exact"),
            AlgoKind::Bnb => f.write_str("bnb"),
            AlgoKind::Bfn => f.write_str("bfn"),
        }
    }
}

fn default_gamma() -> f64 {
    0.999
}

fn default_rho() -> f64 {
    0.5
}

fn default_scale() -> f64 {
    1.0
}

/// One run of the experiment matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    /// Preset name (`2-ary`, `6-ary`), bundled WAN (`abilene`, `cost266`),
    /// or path to a graph-description file.
    pub topology: String,
    /// Bundled template name (`video`) or path to a slice-template file.
    pub slices: String,
    /// Number of identical slice replicas to embed.
    pub count: usize,
    pub setting: Setting,
    pub algo: AlgoKind,
    /// Branch limit for `bnb`; absent means unlimited.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<u64>,
    /// Tie-break seed for `bfn`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_rho")]
    pub rho1: f64,
    #[serde(default = "default_rho")]
    pub rho2: f64,
    /// Multiplier applied to every template demand before rounding.
    #[serde(default = "default_scale")]
    pub demand_scale: f64,
}

impl ScenarioSpec {
    pub fn new(topology: &str, slices: &str, count: usize, setting: Setting, algo: AlgoKind) -> Self {
        ScenarioSpec {
            topology: topology.into(),
            slices: slices.into(),
            count,
            setting,
            algo,
            beta: None,
            seed: None,
            gamma: default_gamma(),
            rho1: default_rho(),
            rho2: default_rho(),
            demand_scale: default_scale(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::Config(format!("gamma {} outside [0, 1]", self.gamma)));
        }
        if self.beta == Some(0) {
            return Err(Error::Config("beta must be at least 1".into()));
        }
        if self.beta.is_some() && self.algo != AlgoKind::Bnb {
            return Err(Error::Config("beta only applies to the bnb algorithm".into()));
        }
        if self.seed.is_some() && self.algo != AlgoKind::Bfn {
            return Err(Error::Config("seed only applies to the bfn algorithm".into()));
        }
        if self.demand_scale <= 0.0 || !self.demand_scale.is_finite() {
            return Err(Error::Config(format!("demand scale {} must be positive", self.demand_scale)));
        }
        Ok(())
    }

    /// Short label such as `bnb-3`, `bnb-inf`, `bfn`, `exact`.
    pub fn algorithm_label(&self) -> String {
        match self.algo {
            AlgoKind::Exact => "exact".into(),
            AlgoKind::Bfn => "bfn".into(),
            AlgoKind::Bnb => match self.beta {
                Some(b) => format!("bnb-{b}"),
                None => "bnb-inf".into(),
            },
        }
    }
}

#[derive(Serialize, Deserialize)]
struct TemplateVnfDoc {
    id: String,
    compute: u64,
    storage: u64,
}

#[derive(Serialize, Deserialize)]
struct TemplateLinkDoc {
    from: String,
    to: String,
    bandwidth: u64,
}

#[derive(Serialize, Deserialize)]
struct TemplateDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    notes: Option<String>,
    vnfs: Vec<TemplateVnfDoc>,
    #[serde(default)]
    fixed: BTreeMap<String, usize>,
    link_demands: Vec<TemplateLinkDoc>,
}

/// A slice blueprint loaded from JSON; scenario runs stamp out identical
/// replicas of it.
pub struct SliceTemplate {
    doc: TemplateDoc,
}

impl SliceTemplate {
    pub fn parse(text: &str) -> Result<Self> {
        let doc: TemplateDoc = serde_json::from_str(text)
            .map_err(|e| Error::parse(format!("template:{}:{}", e.line(), e.column()), e.to_string()))?;
        if doc.vnfs.is_empty() {
            return Err(Error::parse("vnfs", "template has no VNFs"));
        }
        Ok(SliceTemplate { doc })
    }

    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "video" => Some(Self::parse(include_str!("../data/slice_video.json")).expect("bundled template is valid")),
            _ => None,
        }
    }

    pub fn by_name_or_path(spec: &str) -> Result<Self> {
        if let Some(t) = Self::builtin(spec) {
            return Ok(t);
        }
        let text = std::fs::read_to_string(spec)
            .map_err(|e| Error::Config(format!("cannot read slice template {spec}: {e}")))?;
        Self::parse(&text)
    }

    fn vnf_index(&self, name: &str) -> Result<VnfId> {
        self.doc
            .vnfs
            .iter()
            .position(|v| v.id == name)
            .map(|i| VnfId(i as u32))
            .ok_or_else(|| Error::parse("template", format!("unknown VNF id {name}")))
    }

    fn scale_value(value: u64, scale: f64) -> u64 {
        ((value as f64 * scale).round()).max(1.0) as u64
    }

    /// Instantiates one replica with the template's own fixed positions.
    pub fn instantiate(&self, id: SliceId, scale: f64) -> Result<SliceRequest> {
        let vnfs = self
            .doc
            .vnfs
            .iter()
            .map(|v| Vnf {
                name: v.id.clone(),
                demand: Resources::new(vec![
                    Self::scale_value(v.compute, scale),
                    Self::scale_value(v.storage, scale),
                ]),
            })
            .collect();
        let mut fixed = BTreeMap::new();
        for (name, &position) in &self.doc.fixed {
            fixed.insert(self.vnf_index(name)?, position);
        }
        let mut link_demands = BTreeMap::new();
        for link in &self.doc.link_demands {
            let pair = (self.vnf_index(&link.from)?, self.vnf_index(&link.to)?);
            if link_demands.insert(pair, Self::scale_value(link.bandwidth, scale)).is_some() {
                return Err(Error::parse(
                    "template",
                    format!("duplicate link demand {} -> {}", link.from, link.to),
                ));
            }
        }
        SliceRequest::new(id, vnfs, fixed, link_demands)
    }

    /// Instantiates one replica with every position pinned to the template's
    /// configuration `config_idx`, so only that ordering is admissible.
    pub fn instantiate_pinned(&self, id: SliceId, scale: f64, config_idx: usize) -> Result<SliceRequest> {
        let free = self.instantiate(id, scale)?;
        let all = configs::enumerate_configs(&free)?;
        let config = all.get(config_idx).ok_or_else(|| {
            Error::Config(format!(
                "template has {} configurations; setting needs configuration {}",
                all.len(),
                config_idx + 1
            ))
        })?;
        let fixed: BTreeMap<VnfId, usize> = config
            .order()
            .iter()
            .enumerate()
            .map(|(p0, &v)| (v, p0 + 1))
            .collect();
        let vnfs = free.vnf_ids().map(|v| free.vnf(v).clone()).collect();
        SliceRequest::new(id, vnfs, fixed, free.link_demands().clone())
    }
}

/// Builds the slice batch for a spec: `count` identical replicas, pinned or
/// flexible according to the setting.
pub fn build_slices(template: &SliceTemplate, spec: &ScenarioSpec) -> Result<Vec<SliceRequest>> {
    (0..spec.count)
        .map(|i| {
            let id = SliceId(i as u32);
            match spec.setting.pinned_index() {
                Some(k) => template.instantiate_pinned(id, spec.demand_scale, k),
                None => template.instantiate(id, spec.demand_scale),
            }
        })
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DecisionDoc {
    pub slice: u32,
    pub accepted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<BTreeMap<String, String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub paths: Option<BTreeMap<String, Vec<String>>>,
    pub links_used: usize,
}

/// Deterministic JSON report of one run; see `docs/report_schema.md`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Report {
    pub report_version: u32,
    pub scenario: ScenarioSpec,
    pub total: usize,
    pub accepted: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub acceptance_rate: Option<f64>,
    pub objective: f64,
    pub per_config_counts: BTreeMap<String, usize>,
    pub decisions: Vec<DecisionDoc>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

/// Everything a run produces: the in-memory result plus the report document.
#[derive(Clone)]
pub struct RunOutput {
    pub result: ScenarioResult,
    pub report: Report,
}

/// Maps a run-local configuration id to the template's numbering: pinned
/// settings collapse every slice to one local configuration that stands for
/// the pinned template ordering.
fn template_config_label(setting: Setting, local: ConfigId) -> String {
    match setting.pinned_index() {
        Some(k) => format!("k{}", k + 1),
        None => format!("k{}", local.0 + 1),
    }
}

/// Runs one scenario end to end: topology, slice batch, solver, joint
/// re-validation of every accepted embedding, report construction.
pub fn run_scenario(spec: &ScenarioSpec) -> Result<RunOutput> {
    spec.validate()?;
    let net = topology::by_name_or_path(&spec.topology)?;
    let template = SliceTemplate::by_name_or_path(&spec.slices)?;
    let slices = build_slices(&template, spec)?;

    let result = match spec.algo {
        AlgoKind::Exact => {
            let start = std::time::Instant::now();
            let (decisions, _) = exact::brute_force(&net, &slices, spec.gamma, &exact::SearchLimits::default())?;
            ScenarioResult::from_decisions(decisions, spec.gamma, start.elapsed())?
        }
        AlgoKind::Bnb => {
            let opts = bnb::BnbOptions {
                beta: bnb::BranchLimit::new(spec.beta)?,
                weights: bnb::CostWeights { node: spec.rho1, link: spec.rho2 },
                balance_term: true,
                gamma: spec.gamma,
            };
            bnb::solve_all(&net, &slices, &opts)?
        }
        AlgoKind::Bfn => {
            let opts = bfn::BfnOptions {
                seed: spec.seed.unwrap_or(0),
                gamma: spec.gamma,
            };
            bfn::solve_all(&net, &slices, &opts)?
        }
    };

    let pairs: Vec<(&SliceRequest, &AdmissionDecision)> = slices.iter().zip(result.decisions.iter()).collect();
    let report_check = validate_embedding(&net, pairs);
    if !report_check.is_ok() {
        let detail: Vec<String> = report_check.violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::Internal(detail.join("; ")));
    }

    let report = build_report(spec, &net, &slices, &result);
    Ok(RunOutput { result, report })
}

fn build_report(spec: &ScenarioSpec, net: &PhysicalNetwork, slices: &[SliceRequest], result: &ScenarioResult) -> Report {
    let mut per_config_counts: BTreeMap<String, usize> = BTreeMap::new();
    for (&local, &count) in &result.per_config_counts {
        *per_config_counts.entry(template_config_label(spec.setting, local)).or_insert(0) += count;
    }
    let decisions = slices
        .iter()
        .zip(result.decisions.iter())
        .map(|(slice, decision)| match &decision.accepted {
            None => DecisionDoc {
                slice: decision.slice.0,
                accepted: false,
                config: None,
                nodes: None,
                paths: None,
                links_used: 0,
            },
            Some(a) => {
                let nodes = a
                    .embedding
                    .node_map
                    .iter()
                    .map(|(&v, &i)| (slice.vnf(v).name.clone(), net.node_name(i).to_string()))
                    .collect();
                let paths = a
                    .embedding
                    .link_paths
                    .iter()
                    .map(|(&(v, w), path)| {
                        let key = format!("{}->{}", slice.vnf(v).name, slice.vnf(w).name);
                        let hops = path
                            .iter()
                            .map(|&l| {
                                let link = net.link(l);
                                format!("{}->{}", net.node_name(link.src), net.node_name(link.dst))
                            })
                            .collect();
                        (key, hops)
                    })
                    .collect();
                DecisionDoc {
                    slice: decision.slice.0,
                    accepted: true,
                    config: Some(template_config_label(spec.setting, a.configuration.id)),
                    nodes: Some(nodes),
                    paths: Some(paths),
                    links_used: a.embedding.usage_pairs(),
                }
            }
        })
        .collect();
    Report {
        report_version: REPORT_VERSION,
        scenario: spec.clone(),
        total: slices.len(),
        accepted: result.accepted_count(),
        acceptance_rate: result.acceptance_rate,
        objective: result.objective,
        per_config_counts,
        decisions,
    }
}

pub fn csv_header() -> &'static str {
    "topology,slices,count,setting,algo,gamma,rho1,rho2,demand_scale,accepted,total,acceptance_rate,objective,wall_time_secs,per_config"
}

/// One plot-ready CSV line per run; this is where wall-clock time lives.
pub fn csv_row(spec: &ScenarioSpec, report: &Report, result: &ScenarioResult) -> String {
    let rate = report
        .acceptance_rate
        .map(|r| format!("{r}"))
        .unwrap_or_default();
    let per_config = report
        .per_config_counts
        .iter()
        .map(|(k, v)| format!("{k}:{v}"))
        .collect::<Vec<_>>()
        .join(";");
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{:.6},{}",
        spec.topology,
        spec.slices,
        spec.count,
        spec.setting,
        spec.algorithm_label(),
        spec.gamma,
        spec.rho1,
        spec.rho2,
        spec.demand_scale,
        report.accepted,
        report.total,
        rate,
        report.objective,
        result.wall_time.as_secs_f64(),
        per_config
    )
}

#[derive(Clone, Debug)]
pub struct ComparisonRow {
    pub spec: ScenarioSpec,
    pub report: Report,
    pub wall_time_secs: f64,
}

/// Side-by-side table over settings/algorithms on one topology and batch.
#[derive(Clone, Debug, Default)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
}

impl Comparison {
    pub fn to_csv(&self) -> String {
        let mut labels: Vec<String> = Vec::new();
        for row in &self.rows {
            for key in row.report.per_config_counts.keys() {
                if !labels.contains(key) {
                    labels.push(key.clone());
                }
            }
        }
        labels.sort();
        let mut out = String::from("setting,algo,accepted,total,acceptance_rate,objective,wall_time_secs");
        for label in &labels {
            out.push_str(&format!(",{label}_accepts"));
        }
        out.push('\n');
        for row in &self.rows {
            let rate = row
                .report
                .acceptance_rate
                .map(|r| format!("{r}"))
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{:.6}",
                row.spec.setting,
                row.spec.algorithm_label(),
                row.report.accepted,
                row.report.total,
                rate,
                row.report.objective,
                row.wall_time_secs
            ));
            for label in &labels {
                let count = row.report.per_config_counts.get(label).copied().unwrap_or(0);
                out.push_str(&format!(",{count}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Runs every spec of a comparison batch. All specs must target the same
/// topology and slice batch; they may differ in setting and algorithm.
/// Independent runs execute in parallel when the `parallel` feature is on.
pub fn compare_settings(specs: &[ScenarioSpec]) -> Result<Comparison> {
    if specs.is_empty() {
        return Err(Error::Config("comparison needs at least one spec".into()));
    }
    let base = &specs[0];
    for spec in &specs[1..] {
        if spec.topology != base.topology {
            return Err(Error::Config(format!(
                "mismatched topologies in comparison: {} vs {}",
                base.topology, spec.topology
            )));
        }
        if spec.slices != base.slices || spec.count != base.count {
            return Err(Error::Config("comparison specs must share the slice batch".into()));
        }
        if spec.gamma != base.gamma || spec.demand_scale != base.demand_scale {
            return Err(Error::Config("comparison specs must share gamma and demand scale".into()));
        }
    }
    let outputs = run_specs(specs)?;
    Ok(Comparison {
        rows: specs
            .iter()
            .zip(outputs)
            .map(|(spec, output)| ComparisonRow {
                spec: spec.clone(),
                wall_time_secs: output.result.wall_time.as_secs_f64(),
                report: output.report,
            })
            .collect(),
    })
}

#[cfg(feature = "parallel")]
fn run_specs(specs: &[ScenarioSpec]) -> Result<Vec<RunOutput>> {
    specs.par_iter().map(run_scenario).collect()
}

#[cfg(not(feature = "parallel"))]
fn run_specs(specs: &[ScenarioSpec]) -> Result<Vec<RunOutput>> {
    specs.iter().map(run_scenario).collect()
}
