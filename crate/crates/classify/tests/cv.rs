use riga_classify::{
    cross_validate, grid_search_cnn, mean_std, AugmenterSpec, ClassifierSpec, ClassifyError, CnnConfig, ConvBlock, GbdtConfig,
    Pipeline, TransformConfig,
};
use riga_core::baselines::OversampleConfig;
use riga_core::{kfold_split, synth_imbalanced, Dataset, EmbeddingConfig};

fn quick_transform(grid: usize) -> TransformConfig {
    TransformConfig { embedding: EmbeddingConfig { perplexity: 3.0, iterations: 250, exaggeration_iters: 100, momentum_switch_iter: 100, ..Default::default() }, grid_size: grid }
}

#[test]
fn separable_gbdt_baseline() {
    let ds: Dataset = synth_imbalanced(300, 60, 8, 10.0, 1).unwrap();
    let folds = kfold_split(&ds, 5, 2).unwrap();
    let r = cross_validate(&ds, &folds, &Pipeline::new(ClassifierSpec::Gbdt(GbdtConfig::default())), 3).unwrap();
    assert!(r.mean > 0.95, "{r}");
    let (m, s) = mean_std(&r.per_fold);
    assert_eq!((m, s), (r.mean, r.std));
    assert_eq!(r.per_fold.len(), 5);
    assert!(r.per_fold.iter().all(|a| (0.0..=1.0).contains(a)));
}

#[test]
fn augmented_rows_stay_out_of_held_out_folds() {
    let ds: Dataset = synth_imbalanced(200, 40, 6, 2.0, 4).unwrap();
    let folds = kfold_split(&ds, 5, 5).unwrap();
    let p = Pipeline::new(ClassifierSpec::Gbdt(GbdtConfig { n_trees: 20, ..Default::default() }))
        .with_augmenter(AugmenterSpec::Smote(OversampleConfig::default()));
    let r = cross_validate(&ds, &folds, &p, 6).unwrap();
    let mut seen = vec![0; ds.n_rows()];
    for f in &r.folds {
        assert_eq!(f.scores.len(), f.test_indices.len());
        assert!(f.n_synthetic > 0);
        for (&i, &y) in f.test_indices.iter().zip(&f.labels) {
            seen[i] += 1;
            assert_eq!(ds.labels()[i], y);
        }
    }
    assert!(seen.iter().all(|&c| c == 1));
    let again = cross_validate(&ds, &folds, &p, 6).unwrap();
    assert_eq!(r, again);
}

#[test]
fn stage_errors_name_the_fold() {
    let ds: Dataset = synth_imbalanced(50, 20, 30, 3.0, 7).unwrap();
    let folds = kfold_split(&ds, 3, 1).unwrap();
    // 30 features cannot fit a 5 × 5 grid.
    let p = Pipeline { transform: quick_transform(5), ..Pipeline::new(ClassifierSpec::Cnn(CnnConfig::default())) };
    match cross_validate(&ds, &folds, &p, 0) {
        Err(ClassifyError::Fold { fold: 0, .. }) => {}
        other => panic!("unexpected {other:?}"),
    }
}

fn tiny_cnn(epochs: usize, learning_rate: f64) -> CnnConfig {
    CnnConfig { blocks: vec![ConvBlock { channels: 4, kernel: 3 }], dense: vec![16], batch_size: 16, epochs, learning_rate, seed: 0 }
}

#[test]
fn cnn_pipeline_and_grid_search() {
    let ds: Dataset = synth_imbalanced(60, 30, 9, 6.0, 8).unwrap();
    let folds = kfold_split(&ds, 3, 9).unwrap();
    let t = quick_transform(4);
    let good = tiny_cnn(30, 1e-2);
    let frozen = tiny_cnn(30, 0.0);

    let single = grid_search_cnn(&ds, &folds, std::slice::from_ref(&good), &t, 1).unwrap();
    assert_eq!((single.best_index, &single.best), (0, &good));
    assert!(single.scores[0] > 0.9, "{:?}", single.scores);

    // An untrained network scores every row alike, so its AUC is 0.5.
    let r = grid_search_cnn(&ds, &folds, &[frozen.clone(), good.clone()], &t, 1).unwrap();
    assert_eq!(r.best_index, 1);
    assert!(r.scores[1] > r.scores[0]);

    let tie = grid_search_cnn(&ds, &folds, &[good.clone(), good.clone()], &t, 1).unwrap();
    assert_eq!(tie.scores[0], tie.scores[1]);
    assert_eq!(tie.best_index, 0);

    assert!(grid_search_cnn(&ds, &folds, &[], &t, 1).is_err());
}
