//! `densitrace` command-line driver.

mod config;
mod pipeline;
mod stages;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use densitrace::cpgraph::WeightRule;

use config::{ClassifierChoice, PipelineConfig, Stage};
use pipeline::Sources;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("stage {stage} failed: {message}")]
    Stage { stage: String, message: String },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Stage { .. } => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "densitrace", version, about = "Critical-point tracing and motif classification for density maps")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(flatten)]
    thresholds: ThresholdArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ThresholdArgs {
    #[arg(long, global = true)]
    merge_distance: Option<f64>,
    #[arg(long, global = true)]
    link_distance: Option<f64>,
    #[arg(long, global = true)]
    side_chain_distance: Option<f64>,
    #[arg(long, global = true)]
    density_k: Option<f64>,
    #[arg(long, global = true)]
    hierarchy_distance: Option<f64>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum WeightArg {
    PassDensity,
    PathMinimum,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize a density map from a PDB file.
    Synth {
        #[arg(long)]
        structure: Option<PathBuf>,
        #[arg(long)]
        resolution: Option<f64>,
        #[arg(long)]
        spacing: Option<f64>,
        #[arg(long)]
        padding: Option<f64>,
        #[arg(long)]
        periodic: bool,
    },
    /// Locate and classify critical points.
    Extract {
        #[arg(long)]
        map: Option<PathBuf>,
        /// Keep pales and pits and drop the density floor.
        #[arg(long)]
        all_types: bool,
    },
    /// Connect passes to peaks and keep the minimum spanning forest.
    Graph {
        #[arg(long)]
        map: Option<PathBuf>,
        #[arg(long)]
        points: Option<PathBuf>,
        #[arg(long, value_enum)]
        weight_rule: Option<WeightArg>,
    },
    /// Trace backbone chains through the graph.
    Trace {
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Export per-point geometric features.
    Features {
        #[command(flatten)]
        chains: ChainArgs,
    },
    /// Train classifiers on annotated PDB files.
    Train {
        files: Vec<PathBuf>,
        #[arg(long, value_enum)]
        classifier: Option<ClassifierChoice>,
    },
    /// Label chain points and extract segments.
    Classify {
        #[command(flatten)]
        chains: ChainArgs,
        #[arg(long)]
        mycin_model: Option<PathBuf>,
        #[arg(long)]
        bayes_model: Option<PathBuf>,
        #[arg(long, value_enum)]
        classifier: Option<ClassifierChoice>,
    },
    /// Score segments against an annotated reference.
    Eval {
        #[arg(long)]
        segments: Option<PathBuf>,
        #[arg(long)]
        reference: Option<PathBuf>,
        #[command(flatten)]
        chains: ChainArgs,
    },
    /// Group medium-resolution peaks under low-resolution peaks.
    Hierarchy {
        #[arg(long)]
        low: PathBuf,
        #[arg(long)]
        medium: PathBuf,
    },
    /// Run the configured stages end to end.
    Pipeline {
        #[arg(long, value_enum, value_delimiter = ',')]
        stages: Option<Vec<Stage>>,
    },
}

#[derive(Debug, Args)]
struct ChainArgs {
    /// Traced chains (chains.json).
    #[arg(long, conflicts_with = "structure")]
    chains: Option<PathBuf>,
    /// PDB file whose residue centroids form the chains.
    #[arg(long)]
    structure: Option<PathBuf>,
}

fn apply_chain_args(cfg: &mut PipelineConfig, sources: &mut Sources, a: ChainArgs) {
    if a.chains.is_some() {
        sources.chains = a.chains;
    }
    if a.structure.is_some() {
        cfg.input.structure = a.structure;
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = PipelineConfig::load(cli.config.as_deref())?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = cli.out {
        cfg.out = o;
    }
    let t = cli.thresholds;
    let th = &mut cfg.thresholds;
    for (slot, v) in [
        (&mut th.merge_distance, t.merge_distance),
        (&mut th.link_distance, t.link_distance),
        (&mut th.side_chain_distance, t.side_chain_distance),
        (&mut th.density_k, t.density_k),
        (&mut th.hierarchy_distance, t.hierarchy_distance),
    ] {
        if let Some(v) = v {
            *slot = v;
        }
    }
    let mut sources = Sources::default();
    let stages = match cli.command {
        Command::Synth { structure, resolution, spacing, padding, periodic } => {
            cfg.input.structure = structure.or(cfg.input.structure);
            cfg.synth.resolution = resolution.unwrap_or(cfg.synth.resolution);
            cfg.synth.spacing = spacing.or(cfg.synth.spacing);
            cfg.synth.padding = padding.or(cfg.synth.padding);
            cfg.synth.periodic |= periodic;
            vec![Stage::Synth]
        }
        Command::Extract { map, all_types } => {
            cfg.input.map = map.or(cfg.input.map);
            cfg.all_types |= all_types;
            vec![Stage::Extract]
        }
        Command::Graph { map, points, weight_rule } => {
            cfg.input.map = map.or(cfg.input.map);
            sources.points = points;
            if let Some(w) = weight_rule {
                cfg.weight_rule = match w {
                    WeightArg::PassDensity => WeightRule::PassDensity,
                    WeightArg::PathMinimum => WeightRule::PathMinimum,
                };
            }
            vec![Stage::Graph]
        }
        Command::Trace { graph } => {
            sources.graph = graph;
            vec![Stage::Trace]
        }
        Command::Features { chains } => {
            apply_chain_args(&mut cfg, &mut sources, chains);
            vec![Stage::Features]
        }
        Command::Train { files, classifier } => {
            if !files.is_empty() {
                cfg.input.train = files;
            }
            cfg.classify.classifier = classifier.unwrap_or(cfg.classify.classifier);
            vec![Stage::Train]
        }
        Command::Classify { chains, mycin_model, bayes_model, classifier } => {
            apply_chain_args(&mut cfg, &mut sources, chains);
            cfg.input.mycin_model = mycin_model.or(cfg.input.mycin_model);
            cfg.input.bayes_model = bayes_model.or(cfg.input.bayes_model);
            cfg.classify.classifier = classifier.unwrap_or(cfg.classify.classifier);
            vec![Stage::Classify]
        }
        Command::Eval { segments, reference, chains } => {
            sources.segments = segments;
            cfg.input.reference = reference.or(cfg.input.reference);
            apply_chain_args(&mut cfg, &mut sources, chains);
            vec![Stage::Eval]
        }
        Command::Hierarchy { low, medium } => return pipeline::hierarchy(&low, &medium, &cfg),
        Command::Pipeline { stages } => stages.unwrap_or_else(|| cfg.stages.clone()),
    };
    pipeline::run(&cfg, &stages, &sources)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("densitrace: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
