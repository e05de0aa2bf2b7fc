use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::auc::roc_curve;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub fold: usize,
    pub auc: f64,
    pub scores: Vec<f64>,
    pub labels: Vec<u8>,
    pub test_indices: Vec<usize>,
    pub n_synthetic: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub label: String,
    pub per_fold: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation of `per_fold`.
    pub std: f64,
    pub folds: Vec<FoldReport>,
}

pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

impl EvalResult {
    pub fn from_folds(label: String, folds: Vec<FoldReport>) -> Self {
        let per_fold: Vec<f64> = folds.iter().map(|f| f.auc).collect();
        let (mean, std) = mean_std(&per_fold);
        Self { label, per_fold, mean, std, folds }
    }

    /// `"GBDT w/o Augmentation, nuMoM2b: 0.7384 ± 0.0114"`.
    pub fn report_row(&self, dataset: &str) -> String {
        format!("{}, {dataset}: {self}", self.label)
    }

    /// ROC curve over the pooled held-out scores of every fold.
    pub fn pooled_roc(&self) -> Result<Vec<(f64, f64)>> {
        let scores: Vec<f64> = self.folds.iter().flat_map(|f| f.scores.iter().copied()).collect();
        let labels: Vec<u8> = self.folds.iter().flat_map(|f| f.labels.iter().copied()).collect();
        roc_curve(&scores, &labels)
    }
}

impl fmt::Display for EvalResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.4} ± {:.4}", self.mean, self.std)
    }
}

/// Appends one row per result to a CSV, writing the header when the file is new.
pub fn append_results_csv(path: impl AsRef<Path>, dataset: &str, results: &[EvalResult]) -> std::io::Result<()> {
    let path = path.as_ref();
    let fresh = !path.exists() || std::fs::metadata(path)?.len() == 0;
    let mut f = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
    if fresh {
        writeln!(f, "dataset,method,mean_auc,std_auc,fold_aucs")?;
    }
    for r in results {
        let folds: Vec<String> = r.per_fold.iter().map(|a| format!("{a:.6}")).collect();
        writeln!(f, "{},{},{:.6},{:.6},{}", csv_field(dataset), csv_field(&r.label), r.mean, r.std, folds.join(";"))?;
    }
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// ROC curves as SVG polylines on a unit square with the chance diagonal.
pub fn roc_svg(curves: &[(String, Vec<(f64, f64)>)], size: usize) -> String {
    let s = size as f64;
    let m = 40.0;
    let total = s + 2.0 * m;
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{total}\" height=\"{total}\" viewBox=\"0 0 {total} {total}\">\n\
         <rect x=\"{m}\" y=\"{m}\" width=\"{s}\" height=\"{s}\" fill=\"none\" stroke=\"black\"/>\n\
         <line x1=\"{m}\" y1=\"{}\" x2=\"{}\" y2=\"{m}\" stroke=\"#999\" stroke-dasharray=\"4 4\"/>\n",
        m + s,
        m + s
    );
    for (i, (name, pts)) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", m + x * s, m + (1.0 - y) * s)).collect();
        out.push_str(&format!("<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n", coords.join(" ")));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"{color}\">{}</text>\n",
            m + s * 0.45,
            m + s - 10.0 - 16.0 * i as f64,
            xml_escape(name)
        ));
    }
    out.push_str(&format!("<text x=\"{}\" y=\"{}\" font-size=\"12\">FPR</text>\n", m + s / 2.0, total - 10.0));
    out.push_str(&format!("<text x=\"5\" y=\"{}\" font-size=\"12\">TPR</text>\n</svg>\n", m + s / 2.0));
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn result(aucs: &[f64]) -> EvalResult {
        let folds = aucs
            .iter()
            .enumerate()
            .map(|(fold, &auc)| FoldReport { fold, auc, scores: vec![], labels: vec![], test_indices: vec![], n_synthetic: 0, warnings: vec![] })
            .collect();
        EvalResult::from_folds("GBDT w/o Augmentation".into(), folds)
    }

    #[test]
    fn table_row_format() {
        let r = EvalResult { mean: 0.7384, std: 0.0114, ..result(&[0.7]) };
        assert_eq!(r.report_row("nuMoM2b"), "GBDT w/o Augmentation, nuMoM2b: 0.7384 ± 0.0114");
    }

    #[test]
    fn mean_and_population_std() {
        let r = result(&[0.7, 0.8, 0.9, 0.6]);
        assert!((r.mean - 0.75).abs() < 1e-15);
        assert!((r.std - 0.0125f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn svg_has_one_polyline_per_curve() {
        let svg = roc_svg(&[("a".into(), vec![(0.0, 0.0), (1.0, 1.0)]), ("b<".into(), vec![(0.0, 0.0), (0.0, 1.0), (1.0, 1.0)])], 200);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("b&lt;"));
    }

    #[test]
    fn csv_appends_header_once() {
        let dir = std::env::temp_dir().join(format!("riga-eval-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("results.csv");
        let _ = std::fs::remove_file(&p);
        append_results_csv(&p, "synth", &[result(&[0.5, 0.7])]).unwrap();
        append_results_csv(&p, "synth, v2", &[result(&[0.5, 0.7])]).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().nth(2).unwrap().starts_with("\"synth, v2\",GBDT"));
        std::fs::remove_dir_all(dir).unwrap();
    }
}
