use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use riga_cli::{build_report, run_command, AugmenterKind, ClassifierKind, Command, PipelineConfig};

#[derive(Parser)]
#[command(name = "riga", version, about = "Tabular-to-image augmentation, classification and structure learning")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    opts: Overrides,
}

#[derive(Args)]
struct Overrides {
    /// TOML configuration file; every key is optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// CSV path or synth:<n_major>,<n_minor>,<d>,<separation>[,<seed>].
    #[arg(long, global = true)]
    dataset: Option<String>,
    #[arg(long, global = true, value_enum)]
    augmenter: Option<AugmenterKind>,
    #[arg(long, global = true, value_enum)]
    classifier: Option<ClassifierKind>,
    /// Cross-validation folds [default: 5].
    #[arg(long, global = true)]
    folds: Option<usize>,
    /// Image side length [default: 28].
    #[arg(long, global = true)]
    grid_size: Option<usize>,
    /// Enable structure learning in `pipeline`.
    #[arg(long, global = true)]
    bn: bool,
    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    explain: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the feature-to-pixel mapping and dump images.
    Transform,
    /// Augment the whole dataset and write it out.
    Augment,
    /// Cross-validate the configured classifier.
    Classify,
    /// Learn network structure on original (and augmented) data.
    Bnlearn,
    /// Cross-validation, figures and optional structure learning.
    Pipeline,
    /// Combine manifests into a results table and plots.
    Report {
        #[arg(required = true)]
        manifests: Vec<PathBuf>,
    },
}

fn effective_config(o: &Overrides) -> anyhow::Result<PipelineConfig> {
    let mut cfg = match &o.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = o.seed {
        cfg.seed = s;
    }
    if let Some(d) = &o.out {
        cfg.output.dir = d.clone();
    }
    if let Some(d) = &o.dataset {
        cfg.dataset.source = d.clone();
    }
    if let Some(a) = o.augmenter {
        cfg.augment.method = a;
    }
    if let Some(c) = o.classifier {
        cfg.classify.method = c;
    }
    if let Some(k) = o.folds {
        cfg.classify.folds = k;
    }
    if let Some(g) = o.grid_size {
        cfg.transform.grid_size = g;
    }
    if o.bn {
        cfg.bn.enabled = true;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let cfg = effective_config(&cli.opts)?;
    if cli.opts.explain {
        print!("{}", cfg.to_toml()?);
        return Ok(());
    }
    let command = match cli.command {
        Cmd::Report { manifests } => {
            let out = cli.opts.out.clone().unwrap_or_else(|| PathBuf::from("riga-report"));
            let report = build_report(&manifests, &out).context("building report")?;
            print!("{}", report.table);
            return Ok(());
        }
        Cmd::Transform => Command::Transform,
        Cmd::Augment => Command::Augment,
        Cmd::Classify => Command::Classify,
        Cmd::Bnlearn => Command::Bnlearn,
        Cmd::Pipeline => Command::Pipeline,
    };
    let manifest = run_command(command, &cfg).with_context(|| format!("running {}", command.name()))?;
    for r in &manifest.results {
        println!("{}", r.report_row(&manifest.dataset_name));
    }
    if let Some(bn) = &manifest.bn {
        println!("BIC (original): {:.4}; Markov blanket of {}: {} nodes", bn.original.bic, bn.target, bn.original.blanket.len());
        if let Some(a) = &bn.augmented {
            println!("BIC (augmented): {:.4}; Markov blanket of {}: {} nodes", a.bic, bn.target, a.blanket.len());
        }
    }
    println!("manifest {} written to {}", manifest.content_hash, cfg.output.dir.join("manifest.json").display());
    Ok(())
}
