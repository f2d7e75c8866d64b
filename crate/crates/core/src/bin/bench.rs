use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use degnn::bench::{
    self, dataset_report_line, emit_report, load_named, resolve_data_dir, run_benchmark, write_run_log,
    ExperimentPlan, KvConfig, Profile, BENCHMARK_DATASETS, DEFAULT_SEARCH_BUDGET,
};
use degnn::data::{convert_json, convert_linqs, convert_pubmed_tab, write_geomgcn_format, DatasetStats};
use degnn::features::DeVariant;
use degnn::model::{Preset, SampleCache};

#[derive(Parser)]
#[command(name = "bench", about = "Distance-encoding GNN node-classification benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train and evaluate one model on one dataset over several seeds.
    Run(RunArgs),
    /// Print node, edge, feature and class counts and the homophily ratio.
    Stats(StatsArgs),
    /// Run the oracle, gradient and invariance checks.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Convert a citation-network mirror into the two-file dataset layout.
    Convert(ConvertArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Default,
    Search,
}

#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` file with any of the options below; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dataset: Option<String>,
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// M1..M8
    #[arg(long)]
    model: Option<String>,
    /// spd or rw; required for M1-M3.
    #[arg(long)]
    de: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    /// Ego-subgraph radius; defaults to max(layers, k).
    #[arg(long)]
    hops: Option<usize>,
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long)]
    base_seed: Option<u64>,
    #[arg(long, value_enum)]
    profile: Option<ProfileArg>,
    /// Random-search trials for `--profile search`.
    #[arg(long)]
    budget: Option<usize>,
    /// Caps the number of training epochs.
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    /// Dataset name, comma-separated list, or `all`.
    #[arg(long, default_value = "all")]
    dataset: String,
    #[arg(long)]
    data_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceFormat {
    /// `<name>.content` and `<name>.cites`
    Linqs,
    /// Pubmed-Diabetes `*.NODE.paper.tab` and `*.DIRECTED.cites.tab`
    PubmedTab,
    /// `{"features": .., "labels": .., "edges": ..}`
    Json,
}

#[derive(Args)]
struct ConvertArgs {
    #[arg(long, value_enum)]
    format: SourceFormat,
    /// Node file (`.content`, node `.tab`, or the JSON file).
    #[arg(long)]
    nodes: PathBuf,
    /// Citation file; not used for JSON.
    #[arg(long)]
    edges: Option<PathBuf>,
    #[arg(long)]
    name: String,
    /// Output directory; the dataset is written to `<out>/<name>/`.
    #[arg(long)]
    out: PathBuf,
}

const CONFIG_KEYS: [&str; 13] = [
    "dataset", "data-dir", "model", "de", "k", "hops", "seeds", "base-seed", "profile", "budget", "epochs", "out",
    "config",
];

fn pick<T: std::str::FromStr>(flag: Option<T>, file: &KvConfig, key: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    match flag {
        Some(v) => Ok(Some(v)),
        None => Ok(file.parsed(key)?),
    }
}

fn run(args: RunArgs) -> Result<()> {
    let file = match &args.config {
        Some(path) => KvConfig::load(path)?,
        None => KvConfig::default(),
    };
    let unknown = file.unknown_keys(&CONFIG_KEYS);
    if !unknown.is_empty() {
        bail!("unknown config keys: {}", unknown.join(", "));
    }
    let dataset: String = pick(args.dataset, &file, "dataset")?.context("--dataset is required")?;
    let model: String = pick(args.model, &file, "model")?.context("--model is required")?;
    let preset: Preset = model.parse()?;
    let de = pick(args.de, &file, "de")?
        .map(|s: String| s.parse::<DeVariant>())
        .transpose()?;
    let data_dir = resolve_data_dir(pick(args.data_dir, &file, "data-dir")?.as_deref());
    let profile = match (args.profile, file.get("profile")) {
        (Some(p), _) => p,
        (None, Some(s)) => ProfileArg::from_str(s, true).map_err(|e| anyhow::anyhow!("config profile: {e}"))?,
        (None, None) => ProfileArg::Default,
    };
    let budget = pick(args.budget, &file, "budget")?.unwrap_or(DEFAULT_SEARCH_BUDGET);
    let out: PathBuf = pick(args.out, &file, "out")?.unwrap_or_else(|| PathBuf::from("results"));

    let mut plan = ExperimentPlan::new(&dataset, preset, de);
    plan.k = pick(args.k, &file, "k")?;
    plan.hops = pick(args.hops, &file, "hops")?;
    plan.num_seeds = pick(args.seeds, &file, "seeds")?.unwrap_or(10);
    plan.base_seed = pick(args.base_seed, &file, "base-seed")?.unwrap_or(0);
    plan.max_epochs = pick(args.epochs, &file, "epochs")?;
    plan.profile = match profile {
        ProfileArg::Default => Profile::Default,
        ProfileArg::Search => Profile::Search { budget },
    };

    let ds = load_named(&data_dir, &dataset)?;
    eprintln!(
        "{}: {} nodes, {} edges, {} features, {} classes; running {} x {} seeds",
        ds.name,
        ds.num_nodes(),
        ds.graph.num_edges(),
        ds.features.dim(),
        ds.num_classes(),
        plan.model_label(),
        plan.num_seeds
    );
    let cache = SampleCache::new(true);
    let log_dir = out.clone();
    let on_run = move |r: &bench::RunRecord| {
        if let Err(e) = write_run_log(&log_dir, r.seed, &r.log) {
            eprintln!("warning: {e}");
        }
        eprintln!("seed {}: test accuracy {:.2}%", r.seed, 100.0 * r.test_accuracy);
    };
    let result = run_benchmark(&plan, &ds, &cache, &on_run)?;
    emit_report(std::slice::from_ref(&result), &out)?;
    print!("{}", bench::results_table(std::slice::from_ref(&result)));
    eprintln!("wrote {}", out.join("results.csv").display());
    Ok(())
}

fn stats(args: StatsArgs) -> Result<()> {
    let data_dir = resolve_data_dir(args.data_dir.as_deref());
    let names: Vec<String> = if args.dataset.eq_ignore_ascii_case("all") {
        BENCHMARK_DATASETS.iter().map(|s| s.to_string()).collect()
    } else {
        args.dataset.split(',').map(|s| s.trim().to_string()).collect()
    };
    println!("{}", DatasetStats::HEADER);
    let mut missing = 0;
    for name in &names {
        match dataset_report_line(&data_dir, name) {
            Ok(line) => println!("{line}"),
            Err(e) => {
                missing += 1;
                eprintln!("{name}: {e}");
            }
        }
    }
    if missing > 0 {
        bail!("{missing} of {} datasets could not be loaded", names.len());
    }
    Ok(())
}

fn convert(args: ConvertArgs) -> Result<()> {
    let edges = || args.edges.as_deref().context("--edges is required for this format");
    let ds = match args.format {
        SourceFormat::Linqs => convert_linqs(&args.nodes, edges()?, &args.name)?,
        SourceFormat::PubmedTab => convert_pubmed_tab(&args.nodes, edges()?, &args.name)?,
        SourceFormat::Json => convert_json(&args.nodes, &args.name)?,
    };
    let dir = args.out.join(&args.name);
    write_geomgcn_format(&ds, &dir)?;
    eprintln!(
        "wrote {} ({} nodes, {} edges, {} features, {} classes)",
        dir.display(),
        ds.num_nodes(),
        ds.graph.num_edges(),
        ds.features.dim(),
        ds.num_classes()
    );
    Ok(())
}

fn selftest(seed: u64) -> Result<bool> {
    let outcomes = degnn::selftest::run_all(seed);
    for o in &outcomes {
        println!("{}", o.line());
    }
    Ok(outcomes.iter().all(|o| o.passed))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => run(a).map(|_| true),
        Command::Stats(a) => stats(a).map(|_| true),
        Command::Selftest { seed } => selftest(seed),
        Command::Convert(a) => convert(a).map(|_| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
