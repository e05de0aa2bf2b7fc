use rand::Rng;
use riga_core::rng_from_seed;
use riga_genmodels::transformer::TransformerPrior;
use riga_genmodels::{prior_train, transformer_train, CodeBook, PriorConfig, TransformerConfig};
use riga_nn::gradcheck::relative_error;
use riga_nn::softmax_channels;

fn codebook(k: usize, dim: usize) -> CodeBook {
    CodeBook::random(k, dim, 1.0, &mut rng_from_seed(17))
}

#[test]
fn pixelcnn_is_causal() {
    let cb = codebook(6, 3);
    let (prior, _) = prior_train(&cb, &[vec![0; 16], vec![1; 16]], &[0, 1], &PriorConfig { channels: 8, epochs: 1, ..Default::default() }).unwrap();
    let mut rng = rng_from_seed(2);
    let base: Vec<usize> = (0..16).map(|_| rng.random_range(0..6)).collect();
    let l0 = prior.logits(&cb, &[&base], &[1]).unwrap();
    for changed in 0..16 {
        let mut g = base.clone();
        g[changed] = (g[changed] + 1) % 6;
        let l = prior.logits(&cb, &[&g], &[1]).unwrap();
        for pos in 0..=changed {
            for c in 0..6 {
                assert_eq!(l.data()[c * 16 + pos], l0.data()[c * 16 + pos], "code {changed} leaked into position {pos}");
            }
        }
    }
}

#[test]
fn pixelcnn_class_reaches_first_position() {
    let cb = codebook(4, 2);
    let (prior, _) = prior_train(&cb, &[vec![0; 9], vec![3; 9]], &[0, 1], &PriorConfig { channels: 8, epochs: 1, ..Default::default() }).unwrap();
    let g = vec![0usize; 9];
    let a = prior.logits(&cb, &[&g], &[0]).unwrap();
    let b = prior.logits(&cb, &[&g], &[1]).unwrap();
    assert_ne!(a.data()[0], b.data()[0]);
}

#[test]
fn pixelcnn_uniform_codes_stay_near_max_entropy() {
    let k = 8;
    let cb = codebook(k, 4);
    let mut rng = rng_from_seed(5);
    let codes: Vec<Vec<usize>> = (0..400).map(|_| (0..16).map(|_| rng.random_range(0..k)).collect()).collect();
    let labels: Vec<u8> = (0..400).map(|i| (i % 2) as u8).collect();
    let cfg = PriorConfig { channels: 16, epochs: 5, batch_size: 32, learning_rate: 1e-3, seed: 1 };
    let (prior, _) = prior_train(&cb, &codes, &labels, &cfg).unwrap();
    let refs: Vec<&[usize]> = codes.iter().map(|c| c.as_slice()).collect();
    let p = softmax_channels(&prior.logits(&cb, &refs, &labels).unwrap());
    let mut h = 0.0;
    for b in 0..codes.len() {
        for pos in 0..16 {
            h -= (0..k).map(|c| p.sample(b)[c * 16 + pos]).map(|q| q * q.ln()).sum::<f64>();
        }
    }
    h /= (codes.len() * 16) as f64;
    let max = (k as f64).ln();
    assert!((h - max).abs() <= 0.05 * max, "entropy {h} vs log k {max}");
}

#[test]
fn pixelcnn_fits_a_constant_grid() {
    let cb = codebook(8, 4);
    let grid: Vec<usize> = (0..16).map(|i| i % 8).collect();
    let codes = vec![grid.clone(); 32];
    let labels = vec![1u8; 32];
    let cfg = PriorConfig { channels: 16, epochs: 200, batch_size: 16, learning_rate: 1e-2, seed: 3 };
    let (prior, log) = prior_train(&cb, &codes, &labels, &cfg).unwrap();
    let lp = prior.log_prob(&cb, &[&grid], &[1]).unwrap()[0];
    assert!(lp.exp() > 0.99, "p = {} after losses {:?}", lp.exp(), log.column("nll_per_code").unwrap().last());
    let sampled = prior.sample(&cb, 1, 3, &mut rng_from_seed(9)).unwrap();
    assert!(sampled.iter().all(|s| *s == grid));
}

#[test]
fn pixelcnn_learns_over_uniform() {
    let k = 16;
    let cb = codebook(k, 4);
    let mut rng = rng_from_seed(8);
    // Each grid repeats one random code; class 1 uses the upper half.
    let labels: Vec<u8> = (0..200).map(|i| (i % 2) as u8).collect();
    let codes: Vec<Vec<usize>> = labels.iter().map(|&y| vec![rng.random_range(0..k / 2) + y as usize * k / 2; 9]).collect();
    let cfg = PriorConfig { channels: 16, epochs: 30, batch_size: 20, learning_rate: 3e-3, seed: 1 };
    let (prior, _) = prior_train(&cb, &codes, &labels, &cfg).unwrap();
    let refs: Vec<&[usize]> = codes.iter().map(|c| c.as_slice()).collect();
    let mean_lp = prior.log_prob(&cb, &refs, &labels).unwrap().iter().sum::<f64>() / codes.len() as f64;
    assert!(mean_lp > -9.0 * (k as f64).ln(), "{mean_lp}");
    let draws = prior.sample(&cb, 1, 50, &mut rng_from_seed(1)).unwrap();
    let upper = draws.iter().filter(|g| g[0] >= k / 2).count();
    assert!(upper >= 45, "class-1 draws in the upper half: {upper}/50");
}

fn tiny_transformer() -> TransformerConfig {
    TransformerConfig { width: 8, heads: 2, layers: 2, mlp_width: 12, epochs: 1, batch_size: 4, learning_rate: 1e-2, seed: 4 }
}

#[test]
fn transformer_gradient_matches_finite_differences() {
    let prior = TransformerPrior::new(5, 4, tiny_transformer()).unwrap();
    let codes: Vec<Vec<usize>> = vec![vec![0, 3, 1, 4], vec![2, 2, 0, 1]];
    let refs: Vec<&[usize]> = codes.iter().map(|c| c.as_slice()).collect();
    let labels = [0u8, 1];
    let (_, grad) = prior.loss_and_grad(&refs, &labels);
    let eps = 1e-5;
    let mut worst: f64 = 0.0;
    for i in 0..prior.params().len() {
        let mut p = prior.clone();
        p.params_mut()[i] += eps;
        let plus = p.loss_and_grad(&refs, &labels).0;
        p.params_mut()[i] -= 2.0 * eps;
        let minus = p.loss_and_grad(&refs, &labels).0;
        worst = worst.max(relative_error(grad[i], (plus - minus) / (2.0 * eps)));
    }
    assert!(worst <= 1e-4, "max relative error {worst}");
}

#[test]
fn transformer_is_causal() {
    let prior = TransformerPrior::new(6, 8, tiny_transformer()).unwrap();
    let seq = vec![1, 5, 2, 0, 3, 3, 4, 1];
    let base = prior.logits(&seq, 1);
    for t in 0..8 {
        // Input position t + 1 holds code t; permute every later code.
        let mut s = seq.clone();
        s[t..].rotate_left(1);
        s[t..].reverse();
        let l = prior.logits(&s, 1);
        assert_eq!(&l[..(t + 1) * 6], &base[..(t + 1) * 6], "future codes changed logits at step {t}");
    }
}

#[test]
fn transformer_fits_class_dependent_constant() {
    let codes: Vec<Vec<usize>> = (0..20).map(|i| vec![if i % 2 == 0 { 1 } else { 4 }; 6]).collect();
    let labels: Vec<u8> = (0..20).map(|i| (i % 2) as u8).collect();
    let cfg = TransformerConfig { epochs: 40, ..tiny_transformer() };
    let (prior, log) = transformer_train(6, &codes, &labels, &cfg).unwrap();
    let nll = log.column("nll_per_code").unwrap();
    assert!(nll.last().unwrap() < &0.05, "{nll:?}");
    let s = prior.sample(1, 3, &mut rng_from_seed(0));
    assert!(s.iter().all(|q| q.iter().all(|&c| c == 4)));
}
