use rand::seq::SliceRandom;
use rand::Rng;
use riga_core::Image;
use riga_nn::Tensor;

use crate::error::{GenError, Result};

/// Side length shared by every image, rejecting empty or mixed sets.
pub fn common_side(images: &[Image]) -> Result<usize> {
    let side = images.first().ok_or_else(|| GenError::InvalidArgument("no training images".into()))?.grid_size;
    if images.iter().any(|im| im.grid_size != side || im.pixels.len() != side * side) {
        return Err(GenError::InvalidArgument("images differ in size".into()));
    }
    Ok(side)
}

/// Stacks images as a `[n, 1, side, side]` tensor.
pub fn to_tensor(images: &[&Image], side: usize) -> Tensor {
    let mut data = Vec::with_capacity(images.len() * side * side);
    for im in images {
        data.extend_from_slice(&im.pixels);
    }
    Tensor::new(vec![images.len(), 1, side, side], data).expect("image sizes checked")
}

pub fn one_hot(labels: &[u8], classes: usize) -> Vec<f64> {
    let mut out = vec![0.0; labels.len() * classes];
    for (i, &y) in labels.iter().enumerate() {
        out[i * classes + y as usize] = 1.0;
    }
    out
}

/// Shuffled index batches for one epoch.
pub fn epoch_batches(n: usize, batch: usize, rng: &mut impl Rng) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    idx.chunks(batch.max(1)).map(|c| c.to_vec()).collect()
}

/// Wraps generator output as synthetic images, clamping to `[0, 1]`.
/// Returns the images and how many pixel values were clamped.
pub fn into_images(out: &Tensor, side: usize, label: u8) -> (Vec<Image>, usize) {
    let mut clamped = 0;
    let images = (0..out.batch())
        .map(|b| {
            let mut im = Image { grid_size: side, pixels: out.sample(b).to_vec(), label, synthetic: true };
            clamped += im.clamp_unit();
            im
        })
        .collect();
    (images, clamped)
}
