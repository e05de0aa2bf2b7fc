//! The `transform`, `augment`, `classify`, `bnlearn` and `pipeline`
//! commands. Each writes its files plus `manifest.json` into the configured
//! output directory and returns the manifest.

use std::collections::BTreeMap;
use std::time::Instant;

use riga_classify::{augment, cross_validate, to_images, AugmenterSpec, ClassifyError, EvalResult};
use riga_core::data::write_csv;
use riga_core::imgmap::write_pgm;
use riga_core::{
    build_mapping, derive_seed, embed_features, kfold_split, normalize, CoreError, Dataset, DatasetManifest, EmbeddingConfig, Image,
    Mapping,
};

use crate::config::{parse_source, PipelineConfig, Source};
use crate::dataset::{load_dataset, LoadedDataset};
use crate::error::{CliError, Result};
use crate::figures::{paired_sheet, SampleImages};
use crate::manifest::{BnSummary, ExperimentManifest, MANIFEST_VERSION};
use crate::outdir::OutDir;
use crate::structure::learn_structures;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Transform,
    Augment,
    Classify,
    Bnlearn,
    Pipeline,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Transform => "transform",
            Command::Augment => "augment",
            Command::Classify => "classify",
            Command::Bnlearn => "bnlearn",
            Command::Pipeline => "pipeline",
        }
    }
}

struct Run {
    cfg: PipelineConfig,
    out: OutDir,
    ds: LoadedDataset,
    seeds: BTreeMap<String, u64>,
    timings: BTreeMap<String, f64>,
    warnings: Vec<String>,
    results: Vec<EvalResult>,
    bn: Option<BnSummary>,
    normalization: Option<riga_core::Normalization>,
}

impl Run {
    fn seed(&mut self, tag: &str) -> u64 {
        let s = derive_seed(self.cfg.seed, tag);
        self.seeds.insert(tag.to_string(), s);
        s
    }

    fn timed<T>(&mut self, phase: &str, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        let t = Instant::now();
        let v = f(self)?;
        self.timings.insert(phase.to_string(), t.elapsed().as_secs_f64());
        Ok(v)
    }
}

/// Whole-dataset augmentation used for exported data, figures and the
/// augmented structure-learning run.
struct FullAugmentation {
    /// Original rows followed by synthetic ones, in original units.
    dataset: Dataset,
    mapping: Mapping,
    samples: SampleImages,
}

fn mapping_for(run: &mut Run, normalized: &Dataset, norm: &riga_core::Normalization) -> Result<Mapping> {
    let grid = run.cfg.transform.grid_size;
    let d = normalized.n_features();
    if d > grid * grid {
        return Err(CliError::phase::<CoreError>("transform")(CoreError::GridTooSmall { features: d, grid }));
    }
    let seed = run.seed("embed");
    let cfg = EmbeddingConfig { seed, ..run.cfg.transform.embedding.clone() };
    let phase = CliError::phase::<CoreError>;
    let emb = embed_features(normalized, &cfg).map_err(phase("embed"))?;
    let mapping = build_mapping(&emb, grid, norm).map_err(phase("transform"))?;
    Ok(mapping.with_feature_names(normalized.feature_names()))
}

fn augment_full(run: &mut Run, spec: &AugmenterSpec) -> Result<FullAugmentation> {
    let (normalized, norm) = normalize(&run.ds.data);
    let mapping = mapping_for(run, &normalized, &norm)?;
    let seed = run.seed("augment");
    let phase = CliError::phase::<ClassifyError>;
    let out = augment(spec, &normalized, Some(&mapping), seed).map_err(phase("augment"))?;
    for w in &out.warnings {
        log::warn!("{w}");
    }
    run.warnings.extend(out.warnings);
    let mut augmented = normalized.clone();
    if !out.rows.is_empty() {
        augmented.append_synthetic(&out.rows, 1).map_err(CliError::phase::<CoreError>("augment"))?;
    }
    let panels = run.cfg.output.grid_panels;
    let images = to_images(&augmented, &mapping, true).map_err(phase("augment"))?;
    let real: Vec<Image> = images.iter().filter(|im| im.label == 1 && !im.synthetic).take(panels).cloned().collect();
    let synthetic: Vec<Image> = images.iter().filter(|im| im.synthetic).take(panels).cloned().collect();
    Ok(FullAugmentation { dataset: augmented.apply_denormalization(&norm), mapping, samples: SampleImages { real, synthetic } })
}

fn write_samples(run: &mut Run, samples: &SampleImages) -> Result<()> {
    run.out.write_json("samples.json", samples)?;
    if let Some(sheet) = paired_sheet(&samples.real, &samples.synthetic, run.cfg.output.grid_panels) {
        let path = run.out.file("real_vs_synthetic.pgm")?;
        write_pgm(path, &sheet.pixels, sheet.width, sheet.height).map_err(CliError::phase::<CoreError>("figures"))?;
    }
    Ok(())
}

fn transform(run: &mut Run) -> Result<()> {
    let (normalized, norm) = normalize(&run.ds.data);
    let mapping = run.timed("transform", |run| mapping_for(run, &normalized, &norm))?;
    let phase = CliError::phase::<CoreError>;
    mapping.write_json(run.out.file("mapping.json")?).map_err(phase("transform"))?;
    let images = to_images(&normalized, &mapping, false).map_err(CliError::phase::<ClassifyError>("transform"))?;
    let g = mapping.grid_size();
    for (i, im) in images.iter().take(run.cfg.output.row_images).enumerate() {
        write_pgm(run.out.file(&format!("images/row_{i:05}.pgm"))?, &im.pixels, g, g).map_err(phase("transform"))?;
    }
    let panels = run.cfg.output.grid_panels;
    let class0: Vec<Image> = images.iter().filter(|im| im.label == 0).take(panels).cloned().collect();
    let class1: Vec<Image> = images.iter().filter(|im| im.label == 1).take(panels).cloned().collect();
    if let Some(sheet) = paired_sheet(&class0, &class1, panels) {
        write_pgm(run.out.file("sample_grid.pgm")?, &sheet.pixels, sheet.width, sheet.height).map_err(phase("figures"))?;
    }
    run.normalization = Some(norm);
    Ok(())
}

fn require_augmenter(run: &Run, command: Command) -> Result<AugmenterSpec> {
    run.cfg
        .augmenter_spec()
        .ok_or_else(|| CliError::Config(format!("`{}` needs an augmenter other than none", command.name())))
}

fn augment_cmd(run: &mut Run) -> Result<()> {
    let spec = require_augmenter(run, Command::Augment)?;
    let full = run.timed("augment", |run| augment_full(run, &spec))?;
    let phase = CliError::phase::<CoreError>;
    let label_column = run.cfg.dataset.label_column.clone();
    write_csv(&full.dataset, run.out.file("augmented.csv")?, &label_column).map_err(phase("augment"))?;
    full.mapping.write_json(run.out.file("mapping.json")?).map_err(phase("augment"))?;
    write_samples(run, &full.samples)
}

fn classify(run: &mut Run) -> Result<()> {
    let pipeline = run.cfg.pipeline();
    let folds_seed = run.seed("folds");
    let cv_seed = run.seed("cv");
    let folds = kfold_split(&run.ds.data, run.cfg.classify.folds, folds_seed).map_err(CliError::phase::<CoreError>("folds"))?;
    let result = run.timed("classify", |run| {
        cross_validate(&run.ds.data, &folds, &pipeline, cv_seed).map_err(CliError::phase::<ClassifyError>("cross-validation"))
    })?;
    for f in &result.folds {
        run.warnings.extend(f.warnings.iter().map(|w| format!("fold {}: {w}", f.fold)));
    }
    log::info!("{}", result.report_row(&run.ds.name));
    let csv_path = run.out.file("results.csv")?;
    if csv_path.exists() {
        std::fs::remove_file(&csv_path)?;
    }
    riga_classify::append_results_csv(&csv_path, &run.ds.name, std::slice::from_ref(&result))?;
    run.out.write_json("results.json", &result)?;
    let roc = result.pooled_roc().map_err(CliError::phase::<ClassifyError>("roc"))?;
    run.out.write("roc.svg", riga_classify::roc_svg(&[(result.label.clone(), roc)], 400))?;
    run.results.push(result);
    Ok(())
}

fn bnlearn(run: &mut Run, augmented: Option<&Dataset>) -> Result<()> {
    let seed = run.cfg.seed;
    for tag in ["bn", "bn_augmented"].iter().take(1 + usize::from(augmented.is_some())) {
        run.seed(tag);
    }
    let cfg = run.cfg.bn.clone();
    let original = run.ds.data.clone();
    let summary = run.timed("bn", |run| learn_structures(&cfg, &original, augmented, seed, &mut run.out))?;
    run.bn = Some(summary);
    Ok(())
}

/// Runs `command` and writes `manifest.json`. The configuration is
/// validated first; nothing is written if it is invalid.
pub fn run_command(command: Command, cfg: &PipelineConfig) -> Result<ExperimentManifest> {
    cfg.validate()?;
    let mut seeds = BTreeMap::from([("master".to_string(), cfg.seed)]);
    if matches!(parse_source(&cfg.dataset.source)?, Source::Synth { seed: None, .. }) {
        seeds.insert("synth".into(), derive_seed(cfg.seed, "synth"));
    }
    if cfg.dataset.minority_fraction.is_some() || cfg.dataset.remove_minority.is_some() {
        seeds.insert("imbalance".into(), derive_seed(cfg.seed, "imbalance"));
    }
    let t = Instant::now();
    let ds = load_dataset(cfg)?;
    for w in &ds.warnings {
        log::warn!("{w}");
    }
    let load_time = t.elapsed().as_secs_f64();
    let mut run = Run {
        cfg: cfg.clone(),
        out: OutDir::create(&cfg.output.dir)?,
        warnings: ds.warnings.clone(),
        ds,
        seeds,
        timings: BTreeMap::from([("load".to_string(), load_time)]),
        results: Vec::new(),
        bn: None,
        normalization: None,
    };
    match command {
        Command::Transform => transform(&mut run)?,
        Command::Augment => augment_cmd(&mut run)?,
        Command::Classify => classify(&mut run)?,
        Command::Bnlearn => {
            let augmented = match run.cfg.augmenter_spec() {
                Some(spec) => Some(run.timed("augment", |run| augment_full(run, &spec))?.dataset),
                None => None,
            };
            bnlearn(&mut run, augmented.as_ref())?;
        }
        Command::Pipeline => {
            classify(&mut run)?;
            let full = match run.cfg.augmenter_spec() {
                Some(spec) => Some(run.timed("augment", |run| augment_full(run, &spec))?),
                None => None,
            };
            if let Some(full) = &full {
                write_samples(&mut run, &full.samples)?;
            }
            if run.cfg.bn.enabled {
                bnlearn(&mut run, full.as_ref().map(|f| &f.dataset))?;
            }
        }
    }
    let manifest = ExperimentManifest {
        version: MANIFEST_VERSION,
        command: command.name().to_string(),
        config: run.cfg.clone(),
        dataset_name: run.ds.name.clone(),
        dataset: DatasetManifest::describe(&run.ds.data, run.normalization.as_ref()),
        seeds: run.seeds,
        timings: run.timings,
        results: run.results,
        bn: run.bn,
        artifacts: run.out.artifacts().to_vec(),
        warnings: run.warnings,
        content_hash: String::new(),
    }
    .seal();
    run.out.write_json("manifest.json", &manifest)?;
    Ok(manifest)
}
