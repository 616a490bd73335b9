use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use densitrace::cpgraph::{build_graph, CpGraph};
use densitrace::geom::{chain_feature_table, feature_table_csv};
use densitrace::mapio::{
    parse_density_map, parse_pdb_subset, residue_centroids, synthesize_map, atom_points, CentroidSet, SynthParams,
};
use densitrace::ssclass::{
    classify_bayes, classify_mycin, cf_trace_csv, label_training_chains, postprocess_segments, posterior_trace_csv,
    train_bayes, train_mycin, transfer_labels, BayesConfig, BayesModel, ChainClassification, HistogramModel,
    MotifClass, MycinConfig, PostprocessConfig, Segment,
};
use densitrace::topo::{extract_critical_points, CriticalPoint, ExtractConfig, Extraction};
use densitrace::trace::{trace_backbone, PeakChain, TraceConfig};
use densitrace::vec3::Vec3;
use densitrace::{DensityMap, Structure};
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::CliError;

pub fn fail(stage: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Stage { stage: stage.to_string(), message: msg.to_string() }
}

fn read_text(stage: &str, path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| fail(stage, format!("{}: {e}", path.display())))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(stage: &str, path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read_text(stage, path)?).map_err(|e| fail(stage, format!("{}: {e}", path.display())))
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("artifact serializes") + "\n"
}

pub fn read_structure(stage: &str, path: &Path) -> Result<Structure, CliError> {
    parse_pdb_subset(&read_text(stage, path)?).map_err(|e| fail(stage, format!("{}: {e}", path.display())))
}

pub fn read_map(stage: &str, path: &Path) -> Result<DensityMap, CliError> {
    let bytes = std::fs::read(path).map_err(|e| fail(stage, format!("{}: {e}", path.display())))?;
    parse_density_map(&bytes).map_err(|e| fail(stage, format!("{}: {e}", path.display())))
}

/// Writes artifacts into one directory and remembers their names.
pub struct Artifacts {
    dir: PathBuf,
    pub written: Vec<String>,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Artifacts { dir: dir.to_path_buf(), written: Vec::new() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&mut self, stage: &str, name: &str, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
        let path = self.path(name);
        std::fs::write(&path, contents).map_err(|e| fail(stage, format!("{}: {e}", path.display())))?;
        self.written.push(name.to_string());
        Ok(())
    }
}

/// A chain of points handed to the feature and classification stages.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedChain {
    pub id: String,
    pub points: Vec<Vec3>,
}

pub fn traced_chains(chains: &[PeakChain]) -> Vec<NamedChain> {
    chains.iter().enumerate().map(|(k, c)| NamedChain { id: format!("T{k}"), points: c.positions() }).collect()
}

pub fn centroid_chains(set: &CentroidSet) -> Vec<NamedChain> {
    set.chains.iter().map(|c| NamedChain { id: c.chain_id.clone(), points: c.positions() }).collect()
}

pub fn synth(cfg: &PipelineConfig, structure: &Structure) -> Result<DensityMap, CliError> {
    let mut params = SynthParams::new(cfg.synth.resolution);
    if let Some(s) = cfg.synth.spacing {
        params.spacing = s;
    }
    if let Some(p) = cfg.synth.padding {
        params.padding = p;
    }
    params.periodic = cfg.synth.periodic;
    let points = atom_points(structure);
    if points.is_empty() {
        return Err(fail("synth", "structure has no atoms"));
    }
    synthesize_map(&points, &params).map_err(|e| fail("synth", e))
}

pub fn extract(cfg: &PipelineConfig, map: &DensityMap) -> Extraction {
    let config = ExtractConfig {
        density_floor_k: cfg.thresholds.density_k,
        include_all_types: cfg.all_types,
        ..Default::default()
    };
    let ex = extract_critical_points(map, &config);
    log::info!("{} critical points from {} seeds", ex.points.len(), ex.seeds);
    ex
}

pub fn graph(cfg: &PipelineConfig, map: &DensityMap, points: &[CriticalPoint]) -> CpGraph {
    let built = build_graph(map, points, cfg.weight_rule);
    log::info!("{} graph edges from {} candidates", built.graph.edges.len(), built.candidate_edges);
    built.graph
}

pub fn trace(cfg: &PipelineConfig, graph: &CpGraph, source: &str) -> Vec<PeakChain> {
    let t = &cfg.thresholds;
    let config = TraceConfig {
        merge_distance: t.merge_distance,
        link_distance: t.link_distance,
        side_chain_distance: t.side_chain_distance,
    };
    trace_backbone(graph, source, &config)
}

pub fn features(cfg: &PipelineConfig, chains: &[NamedChain]) -> String {
    let rows: Vec<_> =
        chains.iter().flat_map(|c| chain_feature_table(&c.id, &c.points, cfg.classify.attribution)).collect();
    feature_table_csv(&rows)
}

#[derive(Debug, Default)]
pub struct Models {
    pub mycin: Option<HistogramModel>,
    pub bayes: Option<BayesModel>,
}

pub fn mycin_config(cfg: &PipelineConfig) -> MycinConfig {
    let c = &cfg.classify;
    MycinConfig { alpha: c.alpha, reading: c.reading, evidence: c.evidence, attribution: c.attribution }
}

pub fn bayes_config(cfg: &PipelineConfig) -> BayesConfig {
    let c = &cfg.classify;
    BayesConfig {
        max_components: c.max_components,
        em_restarts: c.em_restarts,
        seed: cfg.seed,
        max_iterations: c.max_iterations,
    }
}

pub fn train(cfg: &PipelineConfig, files: &[PathBuf]) -> Result<Models, CliError> {
    let mut chains = Vec::new();
    for f in files {
        chains.extend(residue_centroids(&read_structure("train", f)?).chains);
    }
    let rows = label_training_chains(&chains, cfg.classify.attribution);
    log::info!("{} training rows from {} chains", rows.len(), chains.len());
    let choice = cfg.classify.classifier;
    let mycin = choice.mycin().then(|| train_mycin(&rows, mycin_config(cfg))).transpose().map_err(|e| fail("train", e))?;
    let bayes = choice.bayes().then(|| train_bayes(&rows, bayes_config(cfg))).transpose().map_err(|e| fail("train", e))?;
    Ok(Models { mycin, bayes })
}

pub fn load_models(cfg: &PipelineConfig) -> Result<Models, CliError> {
    let choice = cfg.classify.classifier;
    let mut models = Models::default();
    if choice.mycin() {
        let p = cfg.input.mycin_model.as_ref().ok_or_else(|| CliError::Config("no MYCIN model given".into()))?;
        models.mycin = Some(HistogramModel::from_json(&read_text("classify", p)?).map_err(|e| fail("classify", e))?);
    }
    if choice.bayes() {
        let p = cfg.input.bayes_model.as_ref().ok_or_else(|| CliError::Config("no Bayes model given".into()))?;
        models.bayes = Some(BayesModel::from_json(&read_text("classify", p)?).map_err(|e| fail("classify", e))?);
    }
    Ok(models)
}

pub fn write_models(models: &Models, out: &mut Artifacts) -> Result<(), CliError> {
    if let Some(m) = &models.mycin {
        out.write("train", "mycin_model.json", m.to_json() + "\n")?;
    }
    if let Some(m) = &models.bayes {
        out.write("train", "bayes_model.json", m.to_json() + "\n")?;
    }
    Ok(())
}

/// Output of one classifier over every chain.
pub struct ClassifierRun {
    pub name: &'static str,
    pub calls: Vec<ChainClassification>,
    /// After postprocessing.
    pub segments: Vec<Segment>,
}

pub fn classify(cfg: &PipelineConfig, chains: &[NamedChain], models: &Models) -> Vec<ClassifierRun> {
    let geometry: BTreeMap<String, Vec<Vec3>> = chains.iter().map(|c| (c.id.clone(), c.points.clone())).collect();
    let post = PostprocessConfig { strand_angle: cfg.thresholds.strand_angle, strand_distance: cfg.thresholds.strand_distance };
    let finish = |name, calls: Vec<ChainClassification>| {
        let raw: Vec<Segment> = calls.iter().flat_map(|c| c.segments()).collect();
        let segments = postprocess_segments(&raw, &geometry, &post);
        log::info!("{name}: {} segments, {} after postprocessing", raw.len(), segments.len());
        ClassifierRun { name, calls, segments }
    };
    let mut runs = Vec::new();
    if let Some(m) = &models.mycin {
        runs.push(finish("mycin", chains.iter().map(|c| classify_mycin(&c.id, &c.points, m)).collect()));
    }
    if let Some(m) = &models.bayes {
        runs.push(finish("bayes", chains.iter().map(|c| classify_bayes(&c.id, &c.points, m)).collect()));
    }
    runs
}

pub fn write_runs(runs: &[ClassifierRun], out: &mut Artifacts) -> Result<(), CliError> {
    for r in runs {
        out.write("classify", &format!("classification_{}.json", r.name), to_json(&r.calls))?;
        let csv = if r.name == "mycin" { cf_trace_csv(&r.calls) } else { posterior_trace_csv(&r.calls) };
        out.write("classify", &format!("trace_{}.csv", r.name), csv)?;
        out.write("classify", &format!("segments_{}.json", r.name), to_json(&r.segments))?;
    }
    Ok(())
}

/// Reference labels per chain: copied from the reference residues when the
/// chains are the reference's own centroid chains, otherwise carried over
/// from the nearest residue centroid.
pub fn truth_labels(
    cfg: &PipelineConfig,
    chains: Option<&[NamedChain]>,
    reference: &CentroidSet,
) -> BTreeMap<String, Vec<MotifClass>> {
    match chains {
        Some(chains) => chains
            .iter()
            .map(|c| (c.id.clone(), transfer_labels(&c.points, reference, cfg.thresholds.label_distance)))
            .collect(),
        None => reference.chains.iter().map(|c| (c.chain_id.clone(), c.labels())).collect(),
    }
}
