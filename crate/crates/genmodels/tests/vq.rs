use rand::Rng;
use riga_core::rng_from_seed;
use riga_core::Image;
use riga_genmodels::vqvae::VqVae;
use riga_genmodels::{vq_quantize, vqgan_train, vqvae_train, CodeBook, VqganConfig, VqvaeConfig, DEFAULT_CODEBOOK_SIZE};
use riga_nn::gradcheck::relative_error;
use riga_nn::Tensor;

fn toy_images(n: usize, side: usize, seed: u64) -> Vec<Image> {
    let mut rng = rng_from_seed(seed);
    (0..n)
        .map(|i| {
            let label = (i % 4 == 0) as u8;
            let pixels = (0..side * side)
                .map(|p| {
                    let base: f64 = if (p + label as usize) % 3 == 0 { 0.8 } else { 0.2 };
                    (base + rng.random_range(-0.1..0.1f64)).clamp(0.0, 1.0)
                })
                .collect();
            Image { grid_size: side, pixels, label, synthetic: false }
        })
        .collect()
}

fn batch(images: &[Image]) -> Tensor {
    let refs: Vec<&Image> = images.iter().collect();
    riga_genmodels::images::to_tensor(&refs, images[0].grid_size)
}

#[test]
fn default_codebook_size() {
    assert_eq!(DEFAULT_CODEBOOK_SIZE, 128);
    assert_eq!(VqvaeConfig::default().codebook_size, 128);
    assert_eq!(VqvaeConfig::default().epochs, 50);
    assert_eq!(VqganConfig::default().vq.epochs, 50);
    assert_eq!(VqganConfig::default().adversarial_weight, 0.1);
}

#[test]
fn every_entry_quantizes_to_itself() {
    let mut rng = rng_from_seed(3);
    let mut cb = CodeBook::random(64, 5, 1.0, &mut rng);
    for i in 0..64 {
        let e = cb.entry(i).to_vec();
        assert_eq!(vq_quantize(&e, &mut cb), (i, 0.0));
    }
}

fn toy_config(beta: f64) -> VqvaeConfig {
    VqvaeConfig { hidden_channels: 3, code_dim: 2, codebook_size: 4, beta, epochs: 1, batch_size: 2, learning_rate: 1e-3, restart_dead_codes: true, seed: 5 }
}

#[test]
fn composite_loss_gradient_matches_finite_differences() {
    let images = toy_images(2, 4, 1);
    let x = batch(&images);
    let mut model = VqVae::new(toy_config(0.25), 4).unwrap();
    let frozen = model.freeze(&x).unwrap();
    let (losses, grads) = model.loss_and_grads(&x).unwrap();
    let base = model.surrogate_loss(&x, &frozen).unwrap();
    assert!((base - losses.total).abs() <= 1e-12 * losses.total.abs().max(1.0));
    let eps = 1e-5;
    let mut worst: f64 = 0.0;
    let mut compared = 0;
    for block in 0..3 {
        let n = match block {
            0 => model.encoder.param_count(),
            1 => model.decoder.param_count(),
            _ => model.codebook.entries().len(),
        };
        for i in 0..n {
            let eval = |delta: f64| {
                let mut m = model.clone();
                match block {
                    0 => m.encoder.params_mut()[i] += delta,
                    1 => m.decoder.params_mut()[i] += delta,
                    _ => m.codebook.entries_mut()[i] += delta,
                }
                m.surrogate_loss(&x, &frozen).unwrap()
            };
            let numeric = (eval(eps) - eval(-eps)) / (2.0 * eps);
            let analytic = match block {
                0 => grads.encoder[i],
                1 => grads.decoder[i],
                _ => grads.codebook[i],
            };
            worst = worst.max(relative_error(analytic, numeric));
            compared += 1;
        }
    }
    assert!(compared > 100);
    assert!(worst <= 1e-4, "max relative error {worst}");
}

#[test]
fn straight_through_copies_decoder_gradient() {
    let images = toy_images(1, 4, 2);
    let x = batch(&images);
    let mut model = VqVae::new(toy_config(0.0), 4).unwrap();
    let (_, g) = model.loss_and_grads(&x).unwrap();
    assert!(g.d_quantized.data().iter().any(|&v| v != 0.0));
    let a: Vec<u64> = g.d_latent.data().iter().map(|v| v.to_bits()).collect();
    let b: Vec<u64> = g.d_quantized.data().iter().map(|v| v.to_bits()).collect();
    assert_eq!(a, b);
}

#[test]
fn reconstruction_beats_mean_image() {
    let images = toy_images(64, 8, 4);
    let cfg = VqvaeConfig { hidden_channels: 8, code_dim: 4, codebook_size: 16, epochs: 30, batch_size: 16, learning_rate: 3e-3, ..Default::default() };
    let (mut model, log) = vqvae_train(&images, &cfg).unwrap();
    assert_eq!(log.len(), 30);
    let recon = model.reconstruct(&images).unwrap();
    let p = 64;
    let mean: Vec<f64> = (0..p).map(|j| images.iter().map(|im| im.pixels[j]).sum::<f64>() / images.len() as f64).collect();
    let mse = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / p as f64;
    let model_mse: f64 = images.iter().zip(&recon).map(|(a, b)| mse(&a.pixels, &b.pixels)).sum::<f64>() / images.len() as f64;
    let mean_mse: f64 = images.iter().map(|a| mse(&a.pixels, &mean)).sum::<f64>() / images.len() as f64;
    assert!(model_mse < mean_mse, "model {model_mse} vs mean {mean_mse}");
    let r = log.column("recon").unwrap();
    for w in r.windows(10) {
        assert!(w[9] <= w[0] * 1.1, "reconstruction loss rose over a window: {w:?}");
    }
}

#[test]
fn zero_adversarial_weight_reproduces_vqvae() {
    let images = toy_images(24, 8, 6);
    let vq = VqvaeConfig { hidden_channels: 4, code_dim: 3, codebook_size: 8, epochs: 3, batch_size: 8, ..Default::default() };
    let (a, log_a) = vqvae_train(&images, &vq).unwrap();
    let (b, _, log_b) = vqgan_train(&images, &VqganConfig { vq: vq.clone(), adversarial_weight: 0.0, disc_channels: 4, ..Default::default() }).unwrap();
    assert_eq!(a, b);
    for (ra, rb) in log_a.epochs.iter().zip(&log_b.epochs) {
        let bits = |r: &[f64]| r.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(ra), bits(&rb[..4]));
    }
    assert_eq!(log_b.columns.len(), 7);
    let (c, _, _) = vqgan_train(&images, &VqganConfig { vq, adversarial_weight: 0.1, disc_channels: 4, ..Default::default() }).unwrap();
    assert_ne!(a, c);
}

#[test]
fn dead_codebook_warning() {
    // Constant images drive every position to a handful of codes.
    let images: Vec<Image> = (0..8).map(|i| Image { grid_size: 4, pixels: vec![0.5; 16], label: (i % 2) as u8, synthetic: false }).collect();
    let cfg = VqvaeConfig { hidden_channels: 2, code_dim: 2, codebook_size: 32, epochs: 2, batch_size: 4, ..Default::default() };
    let (_, log) = vqvae_train(&images, &cfg).unwrap();
    assert!(log.warnings.iter().any(|w| w.contains("dead codebook")), "{:?}", log.warnings);
}
