use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

/// Per-epoch loss table plus warnings raised during training.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub columns: Vec<String>,
    pub epochs: Vec<Vec<f64>>,
    pub warnings: Vec<String>,
}

impl TrainingLog {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), epochs: Vec::new(), warnings: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.epochs.push(row);
    }

    pub fn len(&self) -> usize {
        self.epochs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epochs.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.epochs.iter().map(|r| r[j]).collect())
    }

    pub fn warn(&mut self, message: String) {
        log::warn!("{message}");
        self.warnings.push(message);
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "epoch,{}", self.columns.join(","))?;
        for (i, row) in self.epochs.iter().enumerate() {
            let vals: Vec<String> = row.iter().map(|v| format!("{v:.10e}")).collect();
            writeln!(f, "{},{}", i + 1, vals.join(","))?;
        }
        Ok(())
    }
}
