use rand::Rng;
use rand_distr::{Distribution, Normal};
use riga_core::imgmap::{MappedFeature, MappingFile};
use riga_core::{forward_transform_labelled, rng_from_seed, Dataset, Image, Mapping, Normalization};
use riga_genmodels::{generate_minority, train_generative, GenerativeConfig, ModelKind};

fn dataset(n0: usize, n1: usize, d: usize) -> Dataset {
    let mut rng = rng_from_seed(1);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (label, n) in [(0u8, n0), (1u8, n1)] {
        for _ in 0..n {
            rows.push((0..d).map(|j| rng.random_range(0.0..10.0) + j as f64 + label as f64).collect());
            labels.push(label);
        }
    }
    Dataset::new(rows, labels, (0..d).map(|j| format!("f{j}")).collect()).unwrap()
}

fn mapping(ds: &Dataset, side: usize) -> Mapping {
    let features = (0..ds.n_features())
        .map(|j| MappedFeature { name: format!("f{j}"), cell: [j / side, (j * 3) % side] })
        .collect();
    Mapping::from_file(&MappingFile { grid_size: side, features, collision_count: 0 }, Normalization::fit(ds)).unwrap()
}

fn images(ds: &Dataset, m: &Mapping) -> Vec<Image> {
    let norm = m.normalization();
    (0..ds.n_rows()).map(|i| forward_transform_labelled(&norm.normalize_row(ds.row(i)), ds.labels()[i], m).unwrap()).collect()
}

fn tiny_cgan() -> GenerativeConfig {
    let mut cfg = GenerativeConfig::new(ModelKind::Cgan).with_epochs(1);
    cfg.cgan.generator_hidden = vec![8];
    cfg.cgan.discriminator_hidden = vec![8];
    cfg
}

#[test]
fn balances_the_paper_cohort_counts() {
    let ds = dataset(7923, 780, 3);
    let m = mapping(&ds, 4);
    let sample: Vec<Image> = images(&ds, &m).into_iter().step_by(40).collect();
    let model = train_generative(&sample, &tiny_cgan(), 3).unwrap();
    let out = generate_minority(&model, &ds, &m, 11).unwrap();
    assert_eq!(out.denormalized.len(), 7143);
    let norm = m.normalization();
    for row in &out.denormalized {
        for (j, &v) in row.iter().enumerate() {
            assert!(v >= norm.min[j] && v <= norm.max[j], "feature {j} value {v} outside [{}, {}]", norm.min[j], norm.max[j]);
        }
    }
    assert!(out.images.iter().all(|im| im.synthetic && im.label == 1));
}

#[test]
fn balanced_training_set_needs_nothing() {
    let ds = dataset(20, 20, 3);
    let m = mapping(&ds, 4);
    let model = train_generative(&images(&ds, &m), &tiny_cgan(), 0).unwrap();
    assert!(generate_minority(&model, &ds, &m, 0).unwrap().denormalized.is_empty());
}

/// Toy images: ten active pixels drawn around 0.3 (class 0) or 0.7 (class 1).
fn toy(n: usize, seed: u64) -> (Vec<Image>, Vec<usize>) {
    let active: Vec<usize> = (0..10).map(|i| i * 6 + 1).collect();
    let mut rng = rng_from_seed(seed);
    let noise = Normal::new(0.0, 0.08).unwrap();
    let ims = (0..n)
        .map(|i| {
            let label = (i % 3 == 0) as u8;
            let mut pixels = vec![0.0; 64];
            for &p in &active {
                pixels[p] = (if label == 1 { 0.7 } else { 0.3 } + noise.sample(&mut rng) as f64).clamp(0.0, 1.0);
            }
            Image { grid_size: 8, pixels, label, synthetic: false }
        })
        .collect();
    (ims, active)
}

fn small_vq(kind: ModelKind, epochs: usize) -> GenerativeConfig {
    let mut cfg = GenerativeConfig::new(kind).with_epochs(epochs);
    cfg.vqvae.hidden_channels = 8;
    cfg.vqvae.code_dim = 4;
    cfg.vqvae.codebook_size = 16;
    cfg.vqvae.learning_rate = 3e-3;
    cfg.vqvae.batch_size = 16;
    cfg.prior.channels = 16;
    cfg.prior.learning_rate = 3e-3;
    cfg.vqgan.vq = cfg.vqvae.clone();
    cfg.vqgan.disc_channels = 4;
    cfg.transformer.width = 16;
    cfg.transformer.mlp_width = 32;
    cfg.transformer.learning_rate = 3e-3;
    cfg
}

#[test]
fn vqvae_generation_matches_minority_moments() {
    let (ims, active) = toy(240, 2);
    let model = train_generative(&ims, &small_vq(ModelKind::Vqvae, 40), 5).unwrap();
    let a = model.generate(1, 1, 77).unwrap();
    assert_eq!(a, model.generate(1, 1, 77).unwrap());
    let gen = model.generate(1, 200, 4).unwrap();
    assert!(gen.iter().all(|im| im.pixels.iter().all(|&v| (0.0..=1.0).contains(&v))));
    let real: Vec<&Image> = ims.iter().filter(|im| im.label == 1).collect();
    for &p in &active {
        let rm = real.iter().map(|im| im.pixels[p]).sum::<f64>() / real.len() as f64;
        let rs = (real.iter().map(|im| (im.pixels[p] - rm).powi(2)).sum::<f64>() / real.len() as f64).sqrt();
        let gm = gen.iter().map(|im| im.pixels[p]).sum::<f64>() / gen.len() as f64;
        assert!((gm - rm).abs() <= 3.0 * rs, "pixel {p}: generated {gm} vs real {rm} ± {rs}");
    }
}

#[test]
fn vqgan_pipeline_generates() {
    let (ims, _) = toy(60, 3);
    let model = train_generative(&ims, &small_vq(ModelKind::Vqgan, 3), 1).unwrap();
    assert_eq!(model.logs.len(), 2);
    let out = model.generate(1, 3, 5).unwrap();
    assert_eq!(out, model.generate(1, 3, 5).unwrap());
    assert_eq!(out.len(), 3);
    let mut raw = small_vq(ModelKind::Vqgan, 1);
    raw.random_codes = true;
    let model = train_generative(&ims, &raw, 1).unwrap();
    assert_eq!(model.generate(0, 2, 1).unwrap().len(), 2);
}

