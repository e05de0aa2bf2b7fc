mod common;

use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use riga_bayesnet::{fit_cpts, markov_blanket, sample_from_bn, Dag, DiscreteData};

fn mutual_information(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len() as f64;
    let mut joint = [[0.0; 2]; 2];
    for (&x, &y) in a.iter().zip(b) {
        joint[x][y] += 1.0;
    }
    let pa = [joint[0][0] + joint[0][1], joint[1][0] + joint[1][1]];
    let pb = [joint[0][0] + joint[1][0], joint[0][1] + joint[1][1]];
    let mut mi = 0.0;
    for x in 0..2 {
        for y in 0..2 {
            if joint[x][y] > 0.0 {
                mi += joint[x][y] / n * (joint[x][y] * n / (pa[x] * pb[y])).ln();
            }
        }
    }
    mi
}

#[test]
fn deterministic_tables_repeat_one_row() {
    let dag = Dag::from_edges(names(3), &[(0, 1), (1, 2)]).unwrap();
    let mut cpt = strong_cpt(&dag, 1.0);
    cpt.nodes[0].probs = vec![0.0, 1.0];
    let d = sample_from_bn(&dag, &cpt, 50, 3).unwrap();
    for row in 0..50 {
        assert_eq!((d.value(row, 0), d.value(row, 1), d.value(row, 2)), (1, 1, 1));
    }
}

#[test]
fn fair_coin_frequency() {
    let dag = Dag::empty(names(1));
    let cpt = strong_cpt(&dag, 0.9);
    let d = sample_from_bn(&dag, &cpt, 10_000, 5).unwrap();
    let ones = d.column(0).iter().sum::<usize>() as f64 / 10_000.0;
    assert!((ones - 0.5).abs() < 0.02, "{ones}");
    assert_eq!(d, sample_from_bn(&dag, &cpt, 10_000, 5).unwrap());
}

#[test]
fn chain_information_decays() {
    let dag = Dag::from_edges(names(4), &[(0, 1), (1, 2), (2, 3)]).unwrap();
    let d = sample_from_bn(&dag, &strong_cpt(&dag, 0.85), 5000, 2).unwrap();
    assert!(mutual_information(d.column(0), d.column(1)) > mutual_information(d.column(0), d.column(3)));
}

#[test]
fn hand_two_node_table() {
    // a: 0 0 0 1 1 ; b: 0 1 1 1 1
    let d = DiscreteData::new(names(2), vec![2, 2], vec![vec![0, 0, 0, 1, 1], vec![0, 1, 1, 1, 1]]).unwrap();
    let dag = Dag::from_edges(names(2), &[(0, 1)]).unwrap();
    let c = fit_cpts(&d, &dag, 0.0).unwrap();
    assert_eq!(c.nodes[1].distribution(0), [1.0 / 3.0, 2.0 / 3.0]);
    assert_eq!(c.nodes[1].distribution(1), [0.0, 1.0]);
    assert_eq!(c.nodes[0].probs, [0.6, 0.4]);
}

proptest! {
    #[test]
    fn blanket_membership_is_symmetric(seed in 0u64..500) {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let dag = random_dag(7, 0.35, &mut rng);
        for x in 0..7 {
            for y in markov_blanket(&dag, x) {
                prop_assert!(markov_blanket(&dag, y).contains(&x));
            }
        }
    }
}
