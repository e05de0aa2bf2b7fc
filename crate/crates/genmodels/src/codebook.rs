use rand::Rng;
use serde::{Deserialize, Serialize};

/// `k` code vectors of width `dim`, stored row-major, with a usage count per entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeBook {
    k: usize,
    dim: usize,
    entries: Vec<f64>,
    usage: Vec<u64>,
}

impl CodeBook {
    pub fn new(k: usize, dim: usize, entries: Vec<f64>) -> Self {
        assert!(k >= 2, "a codebook needs at least two entries");
        assert_eq!(entries.len(), k * dim, "codebook entries must be k * dim values");
        assert!(entries.iter().all(|v| v.is_finite()), "codebook entries must be finite");
        Self { k, dim, entries, usage: vec![0; k] }
    }

    pub fn random(k: usize, dim: usize, scale: f64, rng: &mut impl Rng) -> Self {
        let entries = (0..k * dim).map(|_| rng.random_range(-scale..scale)).collect();
        Self::new(k, dim, entries)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize) -> &[f64] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    pub fn entry_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.entries[i * self.dim..(i + 1) * self.dim]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [f64] {
        &mut self.entries
    }

    pub fn usage(&self) -> &[u64] {
        &self.usage
    }

    pub fn reset_usage(&mut self) {
        self.usage.fill(0);
    }

    /// Share of entries never selected since the last reset.
    pub fn dead_fraction(&self) -> f64 {
        self.usage.iter().filter(|&&u| u == 0).count() as f64 / self.k as f64
    }

    /// Nearest entry by squared distance; ties go to the lowest index.
    pub fn nearest(&self, z: &[f64]) -> (usize, f64) {
        assert_eq!(z.len(), self.dim, "vector width must match the codebook");
        let mut best = (0, f64::INFINITY);
        for i in 0..self.k {
            let d: f64 = self.entry(i).iter().zip(z).map(|(c, x)| (x - c) * (x - c)).sum();
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    }
}

/// `argmin_i ||z - c_i||^2`, recording the selection in the usage histogram.
pub fn vq_quantize(z: &[f64], codebook: &mut CodeBook) -> (usize, f64) {
    let (i, d) = codebook.nearest(z);
    codebook.usage[i] += 1;
    (i, d)
}
