use std::path::{Path, PathBuf};

use densitrace::cpgraph::WeightRule;
use densitrace::geom::Attribution;
use densitrace::ssclass::{BeliefReading, Evidence};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Synth,
    Extract,
    Graph,
    Trace,
    Features,
    Train,
    Classify,
    Eval,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::Synth,
        Stage::Extract,
        Stage::Graph,
        Stage::Trace,
        Stage::Features,
        Stage::Train,
        Stage::Classify,
        Stage::Eval,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Synth => "synth",
            Stage::Extract => "extract",
            Stage::Graph => "graph",
            Stage::Trace => "trace",
            Stage::Features => "features",
            Stage::Train => "train",
            Stage::Classify => "classify",
            Stage::Eval => "eval",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierChoice {
    Mycin,
    Bayes,
    #[default]
    Both,
}

impl ClassifierChoice {
    pub fn mycin(self) -> bool {
        matches!(self, ClassifierChoice::Mycin | ClassifierChoice::Both)
    }

    pub fn bayes(self) -> bool {
        matches!(self, ClassifierChoice::Bayes | ClassifierChoice::Both)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Inputs {
    /// PDB file the map is synthesized from.
    pub structure: Option<PathBuf>,
    /// Existing density map; used when the synth stage is skipped.
    pub map: Option<PathBuf>,
    /// Annotated PDB files for training.
    pub train: Vec<PathBuf>,
    /// Annotated PDB file scored by the eval stage; defaults to `structure`.
    pub reference: Option<PathBuf>,
    pub mycin_model: Option<PathBuf>,
    pub bayes_model: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSettings {
    pub resolution: f64,
    /// Defaults to resolution / 3.
    pub spacing: Option<f64>,
    /// Defaults to twice the resolution.
    pub padding: Option<f64>,
    pub periodic: bool,
}

impl Default for SynthSettings {
    fn default() -> Self {
        SynthSettings { resolution: 3.0, spacing: None, padding: None, periodic: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub merge_distance: f64,
    pub link_distance: f64,
    pub side_chain_distance: f64,
    /// Critical points need density ≥ mean + k·stddev.
    pub density_k: f64,
    pub hierarchy_distance: f64,
    /// Radius for carrying reference labels onto traced peaks.
    pub label_distance: f64,
    pub strand_angle: f64,
    pub strand_distance: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            merge_distance: 1.95,
            link_distance: 5.0,
            side_chain_distance: 4.0,
            density_k: 1.0,
            hierarchy_distance: 2.0,
            label_distance: 2.0,
            strand_angle: 30.0,
            strand_distance: 6.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierSettings {
    pub classifier: ClassifierChoice,
    pub attribution: Attribution,
    pub alpha: f64,
    pub reading: BeliefReading,
    pub evidence: Evidence,
    pub max_components: usize,
    pub em_restarts: usize,
    pub max_iterations: usize,
}

impl Default for ClassifierSettings {
    fn default() -> Self {
        ClassifierSettings {
            classifier: ClassifierChoice::Both,
            attribution: Attribution::Start,
            alpha: 1.0,
            reading: BeliefReading::Posterior,
            evidence: Evidence::Window,
            max_components: 2,
            em_restarts: 5,
            max_iterations: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub stages: Vec<Stage>,
    pub seed: u64,
    pub out: PathBuf,
    pub weight_rule: WeightRule,
    /// Keep pales and pits and drop the density floor during extraction.
    pub all_types: bool,
    pub input: Inputs,
    pub synth: SynthSettings,
    pub thresholds: Thresholds,
    pub classify: ClassifierSettings,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            stages: Stage::ALL.to_vec(),
            seed: 0,
            out: PathBuf::from("out"),
            weight_rule: WeightRule::PassDensity,
            all_types: false,
            input: Inputs::default(),
            synth: SynthSettings::default(),
            thresholds: Thresholds::default(),
            classify: ClassifierSettings::default(),
        }
    }
}

impl PipelineConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: PipelineConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    /// Relative paths in a config file are taken from the file's directory.
    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.out);
        let i = &mut self.input;
        for p in [&mut i.structure, &mut i.map, &mut i.reference, &mut i.mycin_model, &mut i.bayes_model]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
        i.train.iter_mut().for_each(fix);
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let t = &self.thresholds;
        let positive = [
            ("merge_distance", t.merge_distance),
            ("link_distance", t.link_distance),
            ("side_chain_distance", t.side_chain_distance),
            ("hierarchy_distance", t.hierarchy_distance),
            ("label_distance", t.label_distance),
            ("strand_angle", t.strand_angle),
            ("strand_distance", t.strand_distance),
            ("resolution", self.synth.resolution),
            ("alpha", self.classify.alpha),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(t.density_k >= 0.0 && t.density_k.is_finite()) {
            return Err(CliError::Config(format!("density_k must be non-negative, got {}", t.density_k)));
        }
        for (name, v) in [("spacing", self.synth.spacing), ("padding", self.synth.padding)] {
            if let Some(v) = v {
                if !(v >= 0.0 && v.is_finite()) || (name == "spacing" && v == 0.0) {
                    return Err(CliError::Config(format!("{name} must be positive, got {v}")));
                }
            }
        }
        let c = &self.classify;
        if c.max_components == 0 || c.em_restarts == 0 || c.max_iterations == 0 {
            return Err(CliError::Config("max_components, em_restarts and max_iterations must be positive".into()));
        }
        Ok(())
    }
}

pub fn require_file(path: &Path) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Config(format!("input file {} does not exist", path.display())))
    }
}
