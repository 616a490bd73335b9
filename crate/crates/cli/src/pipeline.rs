use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use densitrace::cpgraph::CpGraph;
use densitrace::mapio::{residue_centroids, write_density_map};
use densitrace::ssclass::{evaluate, Segment};
use densitrace::topo::{points_to_json, CriticalPoint};
use densitrace::trace::{chains_to_json, PeakChain};
use densitrace::DensityMap;
use serde::Serialize;

use crate::config::{require_file, PipelineConfig, Stage};
use crate::stages::{self, Artifacts, ClassifierRun, Models, NamedChain};
use crate::CliError;

/// Explicit upstream inputs; anything left `None` is looked up in the
/// output directory.
#[derive(Debug, Clone, Default)]
pub struct Sources {
    pub points: Option<PathBuf>,
    pub graph: Option<PathBuf>,
    pub chains: Option<PathBuf>,
    pub segments: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct StageRecord {
    stage: &'static str,
    status: &'static str,
    seconds: f64,
    outputs: Vec<String>,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    seed: u64,
    started_unix: u64,
    config: &'a PipelineConfig,
    stages: Vec<StageRecord>,
    failed_stage: Option<&'static str>,
    error: Option<String>,
}

#[derive(Default)]
struct State {
    map: Option<DensityMap>,
    points: Option<Vec<CriticalPoint>>,
    graph: Option<CpGraph>,
    /// Chains plus whether they were traced from a map.
    chains: Option<(Vec<NamedChain>, bool)>,
    models: Option<Models>,
    runs: Option<Vec<ClassifierRun>>,
}

struct Runner<'a> {
    cfg: &'a PipelineConfig,
    sources: &'a Sources,
    out: Artifacts,
    state: State,
}

impl Runner<'_> {
    fn upstream(&self, explicit: &Option<PathBuf>, name: &str) -> PathBuf {
        explicit.clone().unwrap_or_else(|| self.out.path(name))
    }

    fn source_name(&self) -> String {
        let p = self.cfg.input.structure.as_ref().or(self.cfg.input.map.as_ref());
        p.and_then(|p| p.file_stem()).map_or_else(|| "map".to_string(), |s| s.to_string_lossy().into_owned())
    }

    fn map(&mut self, stage: &str) -> Result<&DensityMap, CliError> {
        if self.state.map.is_none() {
            let path = self.upstream(&self.cfg.input.map, "map.txt");
            self.state.map = Some(stages::read_map(stage, &path)?);
        }
        Ok(self.state.map.as_ref().expect("map loaded"))
    }

    fn points(&mut self, stage: &str) -> Result<Vec<CriticalPoint>, CliError> {
        if self.state.points.is_none() {
            let path = self.upstream(&self.sources.points, "critical_points.json");
            self.state.points = Some(stages::read_json(stage, &path)?);
        }
        Ok(self.state.points.clone().expect("points loaded"))
    }

    fn graph(&mut self, stage: &str) -> Result<&CpGraph, CliError> {
        if self.state.graph.is_none() {
            let path = self.upstream(&self.sources.graph, "graph.json");
            self.state.graph = Some(stages::read_json(stage, &path)?);
        }
        Ok(self.state.graph.as_ref().expect("graph loaded"))
    }

    fn chains(&mut self, stage: &str) -> Result<(Vec<NamedChain>, bool), CliError> {
        if self.state.chains.is_none() {
            let path = self.upstream(&self.sources.chains, "chains.json");
            let loaded = if self.sources.chains.is_some() || path.is_file() {
                let traced: Vec<PeakChain> = stages::read_json(stage, &path)?;
                (stages::traced_chains(&traced), true)
            } else {
                let s = self.cfg.input.structure.as_ref().ok_or_else(|| stages::fail(stage, "no chains or structure"))?;
                (stages::centroid_chains(&residue_centroids(&stages::read_structure(stage, s)?)), false)
            };
            self.state.chains = Some(loaded);
        }
        Ok(self.state.chains.clone().expect("chains loaded"))
    }

    fn run_stage(&mut self, stage: Stage) -> Result<(), CliError> {
        let cfg = self.cfg;
        match stage {
            Stage::Synth => {
                let path = cfg.input.structure.as_ref().expect("checked at startup");
                let map = stages::synth(cfg, &stages::read_structure("synth", path)?)?;
                self.out.write("synth", "map.txt", write_density_map(&map))?;
                self.state.map = Some(map);
            }
            Stage::Extract => {
                let ex = stages::extract(cfg, self.map("extract")?);
                self.out.write("extract", "critical_points.json", points_to_json(&ex.points) + "\n")?;
                self.state.points = Some(ex.points);
            }
            Stage::Graph => {
                let points = self.points("graph")?;
                let g = stages::graph(cfg, self.map("graph")?, &points);
                self.out.write("graph", "graph.json", g.to_json() + "\n")?;
                self.state.graph = Some(g);
            }
            Stage::Trace => {
                let source = self.source_name();
                let chains = stages::trace(cfg, self.graph("trace")?, &source);
                self.out.write("trace", "chains.json", chains_to_json(&chains) + "\n")?;
                self.state.chains = Some((stages::traced_chains(&chains), true));
            }
            Stage::Features => {
                let (chains, _) = self.chains("features")?;
                self.out.write("features", "features.csv", stages::features(cfg, &chains))?;
            }
            Stage::Train => {
                let models = stages::train(cfg, &cfg.input.train)?;
                stages::write_models(&models, &mut self.out)?;
                self.state.models = Some(models);
            }
            Stage::Classify => {
                let (chains, _) = self.chains("classify")?;
                if self.state.models.is_none() {
                    let mut with_defaults = cfg.clone();
                    for (slot, name) in [
                        (&mut with_defaults.input.mycin_model, "mycin_model.json"),
                        (&mut with_defaults.input.bayes_model, "bayes_model.json"),
                    ] {
                        if slot.is_none() {
                            *slot = Some(self.out.path(name));
                        }
                    }
                    self.state.models = Some(stages::load_models(&with_defaults)?);
                }
                let runs = stages::classify(cfg, &chains, self.state.models.as_ref().expect("models loaded"));
                stages::write_runs(&runs, &mut self.out)?;
                self.state.runs = Some(runs);
            }
            Stage::Eval => {
                let reference = cfg.input.reference.as_ref().or(cfg.input.structure.as_ref()).expect("checked at startup");
                let reference = residue_centroids(&stages::read_structure("eval", reference)?);
                let (chains, traced) = self.chains("eval")?;
                let truth = stages::truth_labels(cfg, traced.then_some(chains.as_slice()), &reference);
                for (name, segments) in self.segment_sets()? {
                    let metrics = evaluate(&segments, &truth).map_err(|e| stages::fail("eval", e))?;
                    println!("{name}\n{}", metrics.table());
                    self.out.write("eval", &format!("metrics_{name}.json"), metrics.to_json() + "\n")?;
                }
            }
        }
        Ok(())
    }

    fn segment_sets(&self) -> Result<Vec<(String, Vec<Segment>)>, CliError> {
        if let Some(runs) = &self.state.runs {
            return Ok(runs.iter().map(|r| (r.name.to_string(), r.segments.clone())).collect());
        }
        if let Some(p) = &self.sources.segments {
            let name = p.file_stem().map_or("eval".into(), |s| s.to_string_lossy().trim_start_matches("segments_").to_string());
            return Ok(vec![(name, stages::read_json("eval", p)?)]);
        }
        let mut sets = Vec::new();
        for name in ["mycin", "bayes"] {
            let p = self.out.path(&format!("segments_{name}.json"));
            if p.is_file() {
                sets.push((name.to_string(), stages::read_json("eval", &p)?));
            }
        }
        if sets.is_empty() {
            return Err(stages::fail("eval", "no segments to evaluate"));
        }
        Ok(sets)
    }
}

/// Startup checks: every declared input exists and every selected stage has
/// what it needs.
fn preflight(cfg: &PipelineConfig, stages: &[Stage], sources: &Sources) -> Result<(), CliError> {
    cfg.validate()?;
    let i = &cfg.input;
    let declared = [&i.structure, &i.map, &i.reference, &i.mycin_model, &i.bayes_model]
        .into_iter()
        .flatten()
        .chain(&i.train)
        .chain([&sources.points, &sources.graph, &sources.chains, &sources.segments].into_iter().flatten());
    for p in declared {
        require_file(p)?;
    }
    let has = |s: Stage| stages.contains(&s);
    let out = |name: &str| cfg.out.join(name).is_file();
    let need = |ok: bool, what: &str| if ok { Ok(()) } else { Err(CliError::Config(what.to_string())) };
    if has(Stage::Synth) {
        need(i.structure.is_some(), "synth needs an input structure")?;
    }
    let map_ok = has(Stage::Synth) || i.map.is_some() || out("map.txt");
    if has(Stage::Extract) || has(Stage::Graph) {
        need(map_ok, "no density map: give one or run synth")?;
    }
    if has(Stage::Graph) {
        need(has(Stage::Extract) || sources.points.is_some() || out("critical_points.json"), "graph needs critical points")?;
    }
    if has(Stage::Trace) {
        need(has(Stage::Graph) || sources.graph.is_some() || out("graph.json"), "trace needs a graph")?;
    }
    let chains_ok = has(Stage::Trace) || sources.chains.is_some() || out("chains.json") || i.structure.is_some();
    if has(Stage::Features) || has(Stage::Classify) || has(Stage::Eval) {
        need(chains_ok, "no chains: run trace or give chains or a structure")?;
    }
    if has(Stage::Train) {
        need(!i.train.is_empty(), "train needs training structures")?;
    }
    if has(Stage::Classify) && !has(Stage::Train) {
        let c = cfg.classify.classifier;
        need(!c.mycin() || i.mycin_model.is_some() || out("mycin_model.json"), "no MYCIN model: train or give one")?;
        need(!c.bayes() || i.bayes_model.is_some() || out("bayes_model.json"), "no Bayes model: train or give one")?;
    }
    if has(Stage::Eval) {
        need(i.reference.is_some() || i.structure.is_some(), "eval needs a reference structure")?;
    }
    Ok(())
}

/// Runs the selected stages in pipeline order and writes `manifest.json`.
pub fn run(cfg: &PipelineConfig, stages: &[Stage], sources: &Sources) -> Result<(), CliError> {
    let mut order = stages.to_vec();
    order.sort();
    order.dedup();
    preflight(cfg, &order, sources)?;
    let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let mut runner = Runner { cfg, sources, out: Artifacts::new(&cfg.out)?, state: State::default() };
    let mut records = Vec::new();
    let mut failure = None;
    for stage in order {
        let t = Instant::now();
        let before = runner.out.written.len();
        let result = runner.run_stage(stage);
        records.push(StageRecord {
            stage: stage.name(),
            status: if result.is_ok() { "ok" } else { "failed" },
            seconds: t.elapsed().as_secs_f64(),
            outputs: runner.out.written[before..].to_vec(),
        });
        if let Err(e) = result {
            failure = Some((stage.name(), e));
            break;
        }
    }
    let manifest = Manifest {
        tool: "densitrace",
        version: env!("CARGO_PKG_VERSION"),
        seed: cfg.seed,
        started_unix,
        config: cfg,
        stages: records,
        failed_stage: failure.as_ref().map(|f| f.0),
        error: failure.as_ref().map(|f| f.1.to_string()),
    };
    let path = runner.out.path("manifest.json");
    std::fs::write(&path, stages::to_json(&manifest)).map_err(|e| stages::fail("manifest", format!("{}: {e}", path.display())))?;
    match failure {
        Some((_, e)) => Err(e),
        None => Ok(()),
    }
}

pub fn hierarchy(low: &Path, medium: &Path, cfg: &PipelineConfig) -> Result<(), CliError> {
    cfg.validate()?;
    require_file(low)?;
    require_file(medium)?;
    let peaks = |p: &Path| -> Result<Vec<_>, CliError> {
        let pts: Vec<CriticalPoint> = stages::read_json("hierarchy", p)?;
        Ok(pts.into_iter().filter(|c| c.cp_type == densitrace::CpType::Peak).map(|c| c.position).collect())
    };
    let (lo, med) = (peaks(low)?, peaks(medium)?);
    let groups = densitrace::trace::match_hierarchy(&lo, &med, cfg.thresholds.hierarchy_distance, None);
    let mut out = Artifacts::new(&cfg.out)?;
    #[derive(Serialize)]
    struct Group {
        low: usize,
        position: [f64; 3],
        medium: Vec<usize>,
    }
    let rows: Vec<Group> =
        groups.into_iter().enumerate().map(|(k, medium)| Group { low: k, position: lo[k], medium }).collect();
    out.write("hierarchy", "hierarchy.json", stages::to_json(&rows))
}
