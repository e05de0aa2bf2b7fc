//! Feature-to-pixel assignment and the row/image transforms built on it.
//!
//! Every feature owns exactly one pixel, so the image of a row stores each
//! value verbatim and the inverse transform is a plain gather.

use std::collections::HashSet;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::NormalizationParams;
use crate::embed::FeatureEmbedding;
use crate::error::{CoreError, Result};
use crate::scalar::Scalar;

pub const DEFAULT_GRID_SIZE: usize = 28;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PixelMapping<T> {
    grid_size: usize,
    /// `(row, col)` of every feature.
    cells: Vec<(usize, usize)>,
    feature_names: Vec<String>,
    collision_count: usize,
    norm: NormalizationParams<T>,
}

/// On-disk mapping layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappingFile {
    pub grid_size: usize,
    pub features: Vec<MappedFeature>,
    pub collision_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MappedFeature {
    pub name: String,
    pub cell: [usize; 2],
}

fn axis_cells<T: Scalar>(coords: impl Iterator<Item = T> + Clone, grid: usize) -> Vec<usize> {
    let (lo, hi) = coords.clone().fold((T::infinity(), T::neg_infinity()), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let g = T::from_usize_lossy(grid);
    coords
        .map(|v| {
            if hi > lo {
                let u = (v - lo) / (hi - lo);
                (u * g).floor().to_usize().unwrap_or(0).min(grid - 1)
            } else {
                0
            }
        })
        .collect()
}

/// Closest free cell to `(row, col)` by squared center distance; ties go to
/// the lexicographically smallest `(row, col)`. Searches square rings of
/// growing radius and stops once no farther ring can beat the best hit.
fn nearest_free_cell(occupied: &[bool], grid: usize, row: usize, col: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize, usize)> = None;
    let (r0, c0) = (row as isize, col as isize);
    for radius in 1..grid as isize {
        for r in (r0 - radius).max(0)..=(r0 + radius).min(grid as isize - 1) {
            for c in (c0 - radius).max(0)..=(c0 + radius).min(grid as isize - 1) {
                if (r - r0).abs().max((c - c0).abs()) != radius {
                    continue;
                }
                let (ru, cu) = (r as usize, c as usize);
                if occupied[ru * grid + cu] {
                    continue;
                }
                let d2 = ((r - r0) * (r - r0) + (c - c0) * (c - c0)) as usize;
                if best.map_or(true, |(bd, br, bc)| (d2, ru, cu) < (bd, br, bc)) {
                    best = Some((d2, ru, cu));
                }
            }
        }
        if let Some((bd, _, _)) = best {
            let next = (radius + 1) as usize;
            if bd < next * next {
                break;
            }
        }
    }
    best.map(|(_, r, c)| (r, c))
}

/// Quantizes embedded positions onto a `grid_size × grid_size` grid. The x
/// coordinate selects the column and y the row, each min-max scaled first so
/// the result ignores global translation and scale. A feature landing on an
/// occupied cell (in feature-index order) moves to the nearest free one.
pub fn build_mapping<T: Scalar>(
    embedding: &FeatureEmbedding<T>,
    grid_size: usize,
    norm: &NormalizationParams<T>,
) -> Result<PixelMapping<T>> {
    let d = embedding.positions.len();
    if grid_size == 0 || d > grid_size * grid_size {
        return Err(CoreError::GridTooSmall { features: d, grid: grid_size });
    }
    if norm.n_features() != d {
        return Err(CoreError::DimensionMismatch { expected: d, actual: norm.n_features() });
    }
    let cols = axis_cells(embedding.positions.iter().map(|p| p[0]), grid_size);
    let rows = axis_cells(embedding.positions.iter().map(|p| p[1]), grid_size);
    let mut occupied = vec![false; grid_size * grid_size];
    let mut cells = Vec::with_capacity(d);
    let mut collision_count = 0;
    for j in 0..d {
        let (r, c) = (rows[j], cols[j]);
        let cell = if occupied[r * grid_size + c] {
            collision_count += 1;
            nearest_free_cell(&occupied, grid_size, r, c).expect("free cell exists while d <= grid^2")
        } else {
            (r, c)
        };
        occupied[cell.0 * grid_size + cell.1] = true;
        cells.push(cell);
    }
    Ok(PixelMapping {
        grid_size,
        cells,
        feature_names: (0..d).map(|j| format!("f{j}")).collect(),
        collision_count,
        norm: norm.clone(),
    })
}

impl<T: Scalar> PixelMapping<T> {
    pub fn with_feature_names(mut self, names: &[String]) -> Self {
        if names.len() == self.cells.len() {
            self.feature_names = names.to_vec();
        }
        self
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn n_pixels(&self) -> usize {
        self.grid_size * self.grid_size
    }

    pub fn n_features(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_of_feature(&self, j: usize) -> (usize, usize) {
        self.cells[j]
    }

    pub fn cells(&self) -> &[(usize, usize)] {
        &self.cells
    }

    /// Flat pixel index of feature `j`.
    #[inline]
    pub fn pixel_of_feature(&self, j: usize) -> usize {
        let (r, c) = self.cells[j];
        r * self.grid_size + c
    }

    pub fn collision_count(&self) -> usize {
        self.collision_count
    }

    pub fn normalization(&self) -> &NormalizationParams<T> {
        &self.norm
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Pixels that carry a feature.
    pub fn active_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.n_pixels()];
        for j in 0..self.n_features() {
            mask[self.pixel_of_feature(j)] = true;
        }
        mask
    }

    pub fn is_injective(&self) -> bool {
        self.cells.iter().collect::<HashSet<_>>().len() == self.cells.len()
    }

    pub fn to_file(&self) -> MappingFile {
        MappingFile {
            grid_size: self.grid_size,
            features: self
                .feature_names
                .iter()
                .zip(&self.cells)
                .map(|(n, &(r, c))| MappedFeature { name: n.clone(), cell: [r, c] })
                .collect(),
            collision_count: self.collision_count,
        }
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(&self.to_file())?)?;
        Ok(())
    }

    /// Rebuilds a mapping from its file form plus normalization parameters.
    pub fn from_file(file: &MappingFile, norm: NormalizationParams<T>) -> Result<Self> {
        let m = Self {
            grid_size: file.grid_size,
            cells: file.features.iter().map(|f| (f.cell[0], f.cell[1])).collect(),
            feature_names: file.features.iter().map(|f| f.name.clone()).collect(),
            collision_count: file.collision_count,
            norm,
        };
        if m.cells.iter().any(|&(r, c)| r >= m.grid_size || c >= m.grid_size) || !m.is_injective() {
            return Err(CoreError::InvalidArgument("mapping file is not an injective in-grid assignment".into()));
        }
        Ok(m)
    }
}

/// Single-channel square image with a class label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ImageSample<T> {
    pub grid_size: usize,
    pub pixels: Vec<T>,
    pub label: u8,
    pub synthetic: bool,
}

impl<T: Scalar> ImageSample<T> {
    pub fn zeros(grid_size: usize, label: u8) -> Self {
        Self { grid_size, pixels: vec![T::zero(); grid_size * grid_size], label, synthetic: false }
    }

    /// Clamps intensities into [0, 1] (NaN becomes 0) and reports how many
    /// pixels were outside that range.
    pub fn clamp_unit(&mut self) -> usize {
        let mut outside = 0;
        for v in &mut self.pixels {
            if v.is_nan() {
                *v = T::zero();
                outside += 1;
            } else if *v < T::zero() || *v > T::one() {
                *v = v.max(T::zero()).min(T::one());
                outside += 1;
            }
        }
        outside
    }

    pub fn mean(&self) -> T {
        self.pixels.iter().copied().sum::<T>() / T::from_usize_lossy(self.pixels.len())
    }
}

/// Places each normalized feature value at its pixel; every other pixel is 0.
pub fn forward_transform<T: Scalar>(row: &[T], mapping: &PixelMapping<T>) -> Result<ImageSample<T>> {
    forward_transform_labelled(row, 0, mapping)
}

pub fn forward_transform_labelled<T: Scalar>(row: &[T], label: u8, mapping: &PixelMapping<T>) -> Result<ImageSample<T>> {
    if row.len() != mapping.n_features() {
        return Err(CoreError::DimensionMismatch { expected: mapping.n_features(), actual: row.len() });
    }
    let mut img = ImageSample::zeros(mapping.grid_size, label);
    for (j, &v) in row.iter().enumerate() {
        if !(v >= T::zero() && v <= T::one()) {
            return Err(CoreError::OutOfRange { feature: j, value: v.to_f64_lossy() });
        }
        img.pixels[mapping.pixel_of_feature(j)] = v;
    }
    Ok(img)
}

/// Reads each feature back from its pixel. Pixels without a feature are ignored.
pub fn inverse_transform<T: Scalar>(image: &ImageSample<T>, mapping: &PixelMapping<T>) -> Result<Vec<T>> {
    if image.grid_size != mapping.grid_size || image.pixels.len() != mapping.n_pixels() {
        return Err(CoreError::DimensionMismatch { expected: mapping.n_pixels(), actual: image.pixels.len() });
    }
    Ok((0..mapping.n_features()).map(|j| image.pixels[mapping.pixel_of_feature(j)]).collect())
}

/// [`inverse_transform`] followed by denormalization to the original units.
pub fn inverse_transform_denormalized<T: Scalar>(image: &ImageSample<T>, mapping: &PixelMapping<T>) -> Result<Vec<T>> {
    let row = inverse_transform(image, mapping)?;
    Ok(mapping.norm.denormalize_row(&row))
}

/// Writes a binary PGM (P5, maxval 255); intensities are clamped to [0, 1].
pub fn write_pgm<T: Scalar>(path: impl AsRef<Path>, pixels: &[T], width: usize, height: usize) -> Result<()> {
    if pixels.len() != width * height {
        return Err(CoreError::DimensionMismatch { expected: width * height, actual: pixels.len() });
    }
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write!(f, "P5\n{width} {height}\n255\n")?;
    let bytes: Vec<u8> = pixels
        .iter()
        .map(|v| {
            let x = v.to_f64_lossy();
            let x = if x.is_nan() { 0.0 } else { x.clamp(0.0, 1.0) };
            (x * 255.0).round() as u8
        })
        .collect();
    f.write_all(&bytes)?;
    f.flush()?;
    Ok(())
}

/// Tiles square images into a `cols`-wide sheet with a one-pixel gutter.
/// Returns `(pixels, width, height)`.
pub fn tile_images<T: Scalar>(images: &[&ImageSample<T>], cols: usize) -> (Vec<T>, usize, usize) {
    if images.is_empty() || cols == 0 {
        return (Vec::new(), 0, 0);
    }
    let g = images[0].grid_size;
    let rows = images.len().div_ceil(cols);
    let width = cols * (g + 1) - 1;
    let height = rows * (g + 1) - 1;
    let mut out = vec![T::zero(); width * height];
    for (k, img) in images.iter().enumerate() {
        let (tr, tc) = (k / cols, k % cols);
        for r in 0..g {
            for c in 0..g {
                out[(tr * (g + 1) + r) * width + tc * (g + 1) + c] = img.pixels[r * g + c];
            }
        }
    }
    (out, width, height)
}
