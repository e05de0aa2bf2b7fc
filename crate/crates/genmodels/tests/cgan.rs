use riga_core::{rng_from_seed, Image};
use riga_genmodels::{cgan_train, Cgan, CganConfig, NOISE_DIM};

fn constant_images(n: usize, side: usize, value: f64) -> Vec<Image> {
    (0..n).map(|i| Image { grid_size: side, pixels: vec![value; side * side], label: (i % 2) as u8, synthetic: false }).collect()
}

fn small() -> CganConfig {
    CganConfig { generator_hidden: vec![32], discriminator_hidden: vec![32], epochs: 40, batch_size: 16, learning_rate: 2e-3, ..Default::default() }
}

#[test]
fn defaults() {
    let c = CganConfig::default();
    assert_eq!(c.epochs, 50);
    assert_eq!(c.noise_dim, 100);
    assert_eq!(NOISE_DIM, 100);
    assert_eq!(c.generator_hidden, vec![512, 1024]);
}

#[test]
fn fits_constant_images() {
    let images = constant_images(64, 6, 0.7);
    let (model, log) = cgan_train(&images, &small()).unwrap();
    assert_eq!(log.len(), 40);
    let out = model.generate(1, 50, 3).unwrap();
    let mean = out.iter().map(|im| im.mean()).sum::<f64>() / out.len() as f64;
    assert!((mean - 0.7).abs() < 0.1, "mean pixel {mean}");
}

#[test]
fn seeded_training_is_reproducible() {
    let images = constant_images(32, 4, 0.3);
    let cfg = CganConfig { epochs: 2, ..small() };
    let (a, la) = cgan_train(&images, &cfg).unwrap();
    let (b, lb) = cgan_train(&images, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(la, lb);
}

#[test]
fn generation_contract() {
    let images = constant_images(16, 28, 0.5);
    let cfg = CganConfig { generator_hidden: vec![16], discriminator_hidden: vec![16], epochs: 1, ..Default::default() };
    let (model, _) = cgan_train(&images, &cfg).unwrap();
    assert!(model.generate(1, 0, 1).unwrap().is_empty());
    let out = model.generate(1, 20, 1).unwrap();
    assert!(out.iter().all(|im| im.pixels.len() == 784 && im.synthetic && im.label == 1));
    assert!(out.iter().all(|im| im.pixels.iter().all(|&v| (0.0..=1.0).contains(&v))));
    let other = model.generate(1, 20, 2).unwrap();
    let mut distinct = 0;
    for a in &out {
        for b in &other {
            if a.pixels.iter().zip(&b.pixels).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() > 0.0 {
                distinct += 1;
            }
        }
    }
    assert!(distinct as f64 >= 0.99 * 400.0);
    assert_eq!(model.generate(1, 20, 1).unwrap(), out);
}

#[test]
fn needs_both_classes() {
    let images: Vec<Image> = (0..4).map(|_| Image { grid_size: 4, pixels: vec![0.0; 16], label: 1, synthetic: false }).collect();
    assert!(cgan_train(&images, &small()).is_err());
}

#[test]
fn discriminator_improves_with_frozen_generator() {
    let images = constant_images(320, 5, 0.8);
    let mut model = Cgan::new(CganConfig { discriminator_hidden: vec![16], generator_hidden: vec![16], batch_size: 8, learning_rate: 1e-3, ..Default::default() }, 5).unwrap();
    let mut rng = rng_from_seed(1);
    let mut losses = Vec::new();
    for chunk in images.chunks(8) {
        let labels: Vec<u8> = chunk.iter().map(|im| im.label).collect();
        let real: Vec<f64> = chunk.iter().flat_map(|im| im.pixels.iter().copied()).collect();
        losses.push(model.discriminator_step(&real, &labels, &mut rng).unwrap());
    }
    let windows: Vec<f64> = losses.chunks(20).map(|w| w.iter().sum::<f64>() / w.len() as f64).collect();
    for w in windows.windows(2) {
        assert!(w[1] <= w[0], "discriminator loss rose between windows: {windows:?}");
    }
}
