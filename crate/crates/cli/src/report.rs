//! Combines manifests into a method × dataset table, ROC plots and
//! real-vs-synthetic image sheets.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use riga_classify::{roc_svg, ClassifyError, EvalResult};
use riga_core::imgmap::write_pgm;
use riga_core::CoreError;

use crate::error::{CliError, Result};
use crate::figures::{paired_sheet, SampleImages};
use crate::manifest::{ExperimentManifest, MANIFEST_VERSION};
use crate::outdir::OutDir;

pub struct Report {
    pub table: String,
    pub artifacts: Vec<String>,
}

fn slug(s: &str) -> String {
    let mut out: String = s.chars().map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_lowercase() } else { '_' }).collect();
    while out.contains("__") {
        out = out.replace("__", "_");
    }
    out.trim_matches('_').to_string()
}

/// Checks that the manifests can share one table: same format version,
/// untouched contents, a single dataset hash per dataset name, and no
/// method reported twice for the same dataset.
pub fn check_compatible(manifests: &[(PathBuf, ExperimentManifest)]) -> Result<()> {
    if manifests.is_empty() {
        return Err(CliError::Incompatible("no manifests given".into()));
    }
    let mut hashes: BTreeMap<&str, &str> = BTreeMap::new();
    let mut seen: BTreeMap<(&str, &str), &Path> = BTreeMap::new();
    for (path, m) in manifests {
        let p = path.display();
        if m.version != MANIFEST_VERSION {
            return Err(CliError::Incompatible(format!("{p}: manifest version {} (expected {MANIFEST_VERSION})", m.version)));
        }
        if !m.is_intact() {
            return Err(CliError::Incompatible(format!("{p}: content hash does not match its contents")));
        }
        if m.results.is_empty() {
            return Err(CliError::Incompatible(format!("{p}: `{}` run has no classification results", m.command)));
        }
        match hashes.insert(&m.dataset_name, &m.dataset.content_hash) {
            Some(h) if h != m.dataset.content_hash => {
                return Err(CliError::Incompatible(format!("{p}: dataset `{}` differs from an earlier manifest's", m.dataset_name)));
            }
            _ => {}
        }
        for r in &m.results {
            if let Some(prev) = seen.insert((&r.label, &m.dataset_name), path) {
                return Err(CliError::Incompatible(format!(
                    "{p}: `{}` on `{}` already reported by {}",
                    r.label,
                    m.dataset_name,
                    prev.display()
                )));
            }
        }
    }
    Ok(())
}

/// Markdown table with one row per method and one column per dataset, in
/// first-seen order.
pub fn results_table(manifests: &[ExperimentManifest]) -> String {
    let mut methods: Vec<&str> = Vec::new();
    let mut datasets: Vec<&str> = Vec::new();
    let mut cells: BTreeMap<(&str, &str), &EvalResult> = BTreeMap::new();
    for m in manifests {
        if !datasets.contains(&m.dataset_name.as_str()) {
            datasets.push(&m.dataset_name);
        }
        for r in &m.results {
            if !methods.contains(&r.label.as_str()) {
                methods.push(&r.label);
            }
            cells.insert((&r.label, &m.dataset_name), r);
        }
    }
    let mut out = format!("| Method | {} |\n|---|{}\n", datasets.join(" | "), "---|".repeat(datasets.len()));
    for method in &methods {
        let row: Vec<String> = datasets.iter().map(|d| cells.get(&(*method, *d)).map_or("-".to_string(), |r| r.to_string())).collect();
        out.push_str(&format!("| {method} | {} |\n", row.join(" | ")));
    }
    out
}

fn bn_lines(manifests: &[ExperimentManifest]) -> String {
    let mut out = String::new();
    for m in manifests {
        let Some(bn) = &m.bn else { continue };
        let label = m.results.first().map_or(m.command.as_str(), |r| r.label.as_str());
        out.push_str(&format!(
            "- {label}, {}: BIC {:.4}, blanket of {} has {} nodes",
            m.dataset_name,
            bn.original.bic,
            bn.target,
            bn.original.blanket.len()
        ));
        if let Some(a) = &bn.augmented {
            out.push_str(&format!("; augmented BIC {:.4}, {} nodes", a.bic, a.blanket.len()));
        }
        out.push('\n');
    }
    out
}

pub fn build_report(paths: &[PathBuf], out_dir: impl AsRef<Path>) -> Result<Report> {
    let manifests = paths.iter().map(|p| Ok((p.clone(), ExperimentManifest::load(p)?))).collect::<Result<Vec<_>>>()?;
    check_compatible(&manifests)?;
    let mut out = OutDir::create(out_dir)?;
    let only: Vec<ExperimentManifest> = manifests.iter().map(|(_, m)| m.clone()).collect();
    let mut table = results_table(&only);
    let bn = bn_lines(&only);
    if !bn.is_empty() {
        table.push_str("\nStructure learning (BIC: log-likelihood minus penalty, higher is better):\n");
        table.push_str(&bn);
    }
    out.write("results.md", &table)?;

    let csv_path = out.file("results.csv")?;
    if csv_path.exists() {
        std::fs::remove_file(&csv_path)?;
    }
    for m in &only {
        riga_classify::append_results_csv(&csv_path, &m.dataset_name, &m.results)?;
    }

    let mut curves: BTreeMap<&str, Vec<(String, Vec<(f64, f64)>)>> = BTreeMap::new();
    for m in &only {
        for r in &m.results {
            let roc = r.pooled_roc().map_err(CliError::phase::<ClassifyError>("roc"))?;
            curves.entry(&m.dataset_name).or_default().push((r.label.clone(), roc));
        }
    }
    for (dataset, c) in &curves {
        out.write(&format!("roc_{}.svg", slug(dataset)), roc_svg(c, 400))?;
    }

    for (path, m) in &manifests {
        if !m.artifacts.iter().any(|a| a == "samples.json") {
            continue;
        }
        let src = path.parent().unwrap_or(Path::new(".")).join("samples.json");
        let samples: SampleImages = serde_json::from_str(&std::fs::read_to_string(&src)?)?;
        if let Some(sheet) = paired_sheet(&samples.real, &samples.synthetic, m.config.output.grid_panels) {
            let label = m.results.first().map_or("run", |r| r.label.as_str());
            let rel = format!("grids/{}_{}.pgm", slug(&m.dataset_name), slug(label));
            write_pgm(out.file(&rel)?, &sheet.pixels, sheet.width, sheet.height).map_err(CliError::phase::<CoreError>("figures"))?;
        }
    }
    Ok(Report { table, artifacts: out.artifacts().to_vec() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slugs() {
        assert_eq!(slug("CNN + VQVAE"), "cnn_vqvae");
        assert_eq!(slug("GBDT w/o Augmentation"), "gbdt_w_o_augmentation");
    }
}
