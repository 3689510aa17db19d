use std::fs;
use std::io::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use flexslice::harness::{self, AlgoKind, ScenarioSpec, Setting};
use flexslice::{exact, topology};

#[derive(Parser)]
#[command(name = "flexslice", version, about = "Network-slice admission control and embedding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate or inspect physical topologies.
    Topo {
        #[command(subcommand)]
        command: TopoCommand,
    },
    /// Embed a batch of slices with one algorithm and write a report.
    Solve(SolveArgs),
    /// Export the linearized model in LP format for an external MILP solver.
    ExportLp(ExportArgs),
    /// Run several settings/algorithms on one instance and tabulate them.
    Compare {
        /// JSON file holding an array of scenario specs.
        #[arg(long)]
        specs: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum TopoCommand {
    /// Generate a fat-tree preset (2-ary or 6-ary).
    Gen {
        preset: String,
        /// Write the graph description to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Load and validate a graph description.
    Load { file: PathBuf },
}

#[derive(Args)]
struct InstanceArgs {
    /// Topology: 2-ary, 6-ary, abilene, cost266, or a graph file path.
    #[arg(long)]
    topology: String,
    /// Slice template: bundled name (video) or a template file path.
    #[arg(long, default_value = "video")]
    slices: String,
    /// Number of slice replicas to embed.
    #[arg(long, default_value_t = 15)]
    count: usize,
    /// Ordering setting: k1, k2 or flex.
    #[arg(long, default_value = "flex")]
    setting: String,
    /// Objective weight between acceptance count and link usage.
    #[arg(long, default_value_t = 0.999)]
    gamma: f64,
    /// Multiplier on all template demands.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Algorithm: exact, bnb or bfn.
    #[arg(long)]
    algo: String,
    /// Branch limit for bnb (omit for unlimited).
    #[arg(long)]
    beta: Option<u64>,
    /// Tie-break seed for bfn.
    #[arg(long)]
    seed: Option<u64>,
    /// Node-usage weight of the search cost.
    #[arg(long, default_value_t = 0.5)]
    rho1: f64,
    /// Link-usage weight of the search cost.
    #[arg(long, default_value_t = 0.5)]
    rho2: f64,
    /// Report file (JSON).
    #[arg(long)]
    out: PathBuf,
    /// Append a CSV row (with runtime) to this file.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Big-M override; defaults are derived per constraint family.
    #[arg(long)]
    big_m: Option<f64>,
    /// Model file (LP format).
    #[arg(long)]
    out: PathBuf,
}

fn build_spec(instance: &InstanceArgs, algo: AlgoKind) -> anyhow::Result<ScenarioSpec> {
    let mut spec = ScenarioSpec::new(
        &instance.topology,
        &instance.slices,
        instance.count,
        Setting::parse(&instance.setting)?,
        algo,
    );
    spec.gamma = instance.gamma;
    spec.demand_scale = instance.scale;
    Ok(spec)
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Topo { command } => match command {
            TopoCommand::Gen { preset, out } => {
                let Some(p) = topology::FatTreePreset::by_name(&preset) else {
                    bail!("unknown preset {preset}; available: 2-ary, 6-ary");
                };
                let net = topology::gen_fat_tree(&p)?;
                println!("{}: {} nodes, {} directed links", preset, net.node_count(), net.link_count());
                if let Some(path) = out {
                    fs::write(&path, topology::serialize_graph(&net)?)
                        .with_context(|| format!("writing {}", path.display()))?;
                    println!("wrote {}", path.display());
                }
            }
            TopoCommand::Load { file } => {
                let text = fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
                let net = topology::load_graph(&text)?;
                let connected = if topology::is_connected(&net) { "connected" } else { "NOT connected" };
                println!(
                    "{}: {} nodes, {} directed links, {}",
                    file.display(),
                    net.node_count(),
                    net.link_count(),
                    connected
                );
            }
        },
        Command::Solve(args) => {
            let mut spec = build_spec(&args.instance, AlgoKind::parse(&args.algo)?)?;
            spec.beta = args.beta;
            spec.seed = args.seed;
            spec.rho1 = args.rho1;
            spec.rho2 = args.rho2;
            let output = harness::run_scenario(&spec)?;
            output.report.write(&args.out)?;
            println!(
                "{} on {} [{}]: accepted {}/{}, objective {:.6}, {:.3}s",
                spec.algorithm_label(),
                spec.topology,
                spec.setting,
                output.report.accepted,
                output.report.total,
                output.report.objective,
                output.result.wall_time.as_secs_f64()
            );
            println!("report: {}", args.out.display());
            if let Some(csv_path) = args.csv {
                let mut line = String::new();
                if !csv_path.exists() {
                    line.push_str(harness::csv_header());
                    line.push('\n');
                }
                line.push_str(&harness::csv_row(&spec, &output.report, &output.result));
                line.push('\n');
                fs::OpenOptions::new()
                    .create(true)
                    .append(true)
                    .open(&csv_path)
                    .and_then(|mut f| f.write_all(line.as_bytes()))
                    .with_context(|| format!("appending {}", csv_path.display()))?;
            }
        }
        Command::ExportLp(args) => {
            let spec = build_spec(&args.instance, AlgoKind::Exact)?;
            spec.validate()?;
            let net = topology::by_name_or_path(&spec.topology)?;
            let template = harness::SliceTemplate::by_name_or_path(&spec.slices)?;
            let slices = harness::build_slices(&template, &spec)?;
            let text = exact::lp::export_lp(&net, &slices, spec.gamma, args.big_m)?;
            fs::write(&args.out, text).with_context(|| format!("writing {}", args.out.display()))?;
            println!("wrote {}", args.out.display());
        }
        Command::Compare { specs, out } => {
            let text = fs::read_to_string(&specs).with_context(|| format!("reading {}", specs.display()))?;
            let specs: Vec<ScenarioSpec> = serde_json::from_str(&text).context("parsing scenario specs")?;
            let comparison = harness::compare_settings(&specs)?;
            let csv = comparison.to_csv();
            fs::write(&out, &csv).with_context(|| format!("writing {}", out.display()))?;
            print!("{csv}");
            println!("table: {}", out.display());
        }
    }
    Ok(())
}
