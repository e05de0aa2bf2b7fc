use riga_core::imgmap::tile_images;
use riga_core::Image;
use serde::{Deserialize, Serialize};

/// Images kept for side-by-side figures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct SampleImages {
    pub real: Vec<Image>,
    pub synthetic: Vec<Image>,
}

pub struct Sheet {
    pub pixels: Vec<f64>,
    pub width: usize,
    pub height: usize,
    /// Panels taken from each of the two sets.
    pub per_side: usize,
}

/// Two equally sized blocks of panels, `top` above `bottom`, at most
/// `panels` from each. Rows hold up to eight panels and the count is
/// trimmed so neither block leaves a partial row.
pub fn paired_sheet(top: &[Image], bottom: &[Image], panels: usize) -> Option<Sheet> {
    let n = panels.min(top.len()).min(bottom.len());
    if n == 0 {
        return None;
    }
    let cols = n.min(8);
    let n = n - n % cols;
    let images: Vec<&Image> = top[..n].iter().chain(&bottom[..n]).collect();
    let (pixels, width, height) = tile_images(&images, cols);
    Some(Sheet { pixels, width, height, per_side: n })
}
