mod common;

use common::*;
use rand::SeedableRng;
use riga_bayesnet::{bic_score, family_score, Dag, DiscreteData, ScoreCache};

/// Log-likelihood and parameter count recomputed from raw joint counts.
fn oracle_bic(data: &DiscreteData, dag: &Dag) -> f64 {
    let n = data.n_rows() as f64;
    let mut total = 0.0;
    for v in 0..dag.n_nodes() {
        let ps = dag.parents(v);
        let mut q = 1usize;
        for &p in ps {
            q *= data.card(p);
        }
        let mut counts = vec![vec![0.0f64; data.card(v)]; q];
        for row in 0..data.n_rows() {
            let mut c = 0;
            for &p in ps {
                c = c * data.card(p) + data.value(row, p);
            }
            counts[c][data.value(row, v)] += 1.0;
        }
        for cfg in &counts {
            let nj: f64 = cfg.iter().sum();
            for &nk in cfg {
                if nk > 0.0 {
                    total += nk * (nk / nj).ln();
                }
            }
        }
        total -= 0.5 * ((data.card(v) - 1) * q) as f64 * n.ln();
    }
    total
}

#[test]
fn hand_fixture() {
    let d = DiscreteData::new(vec!["a".into()], vec![2], vec![vec![0, 0, 1, 1]]).unwrap();
    let s = bic_score(&d, &Dag::empty(vec!["a".into()])).unwrap();
    assert!((s - -3.46574).abs() < 1e-5);
    assert!((s - (4.0 * 0.5f64.ln() - 0.5 * 4f64.ln())).abs() < 1e-12);
}

#[test]
fn matches_oracle_and_move_deltas_match_rescoring() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(3);
    for case in 0..30 {
        let data = random_data(300, &[2, 3, 2, 4, 3], case);
        let dag = random_dag(5, 0.4, &mut rng);
        let full = bic_score(&data, &dag).unwrap();
        assert!((full - oracle_bic(&data, &dag)).abs() < 1e-9);
        let mut cache = ScoreCache::new(&data);
        for mv in dag.neighbor_moves() {
            let mut next = dag.clone();
            next.apply(mv).unwrap();
            let delta = cache.delta(&dag, mv);
            let rescored = bic_score(&data, &next).unwrap() - full;
            assert!((delta - rescored).abs() < 1e-9, "case {case} {mv:?}");
        }
    }
}

#[test]
fn independent_parent_lowers_score() {
    for seed in 0..10 {
        let data = random_data(2000, &[2, 2], 100 + seed);
        assert!(family_score(&data, 1, &[0]) < family_score(&data, 1, &[]), "seed {seed}");
    }
}
