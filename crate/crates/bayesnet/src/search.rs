//! Tabu search over DAGs from the empty graph.

use std::collections::VecDeque;

use rand::Rng as _;
use riga_core::{derive_seed, rng_from_seed};
use serde::{Deserialize, Serialize};

use crate::dag::{Dag, Move};
use crate::data::DiscreteData;
use crate::error::{BnError, Result};
use crate::score::ScoreCache;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub max_iterations: usize,
    /// Iterations an undo move stays forbidden.
    pub tenure: usize,
    /// Extra runs started from random perturbations of the best graph.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { max_iterations: 1000, tenure: 10, restarts: 3, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub dag: Dag,
    pub score: f64,
    pub empty_score: f64,
    pub iterations: usize,
}

const EPS: f64 = 1e-9;

struct Best {
    dag: Dag,
    score: f64,
}

fn run(start: Dag, cache: &mut ScoreCache, cfg: &SearchConfig, best: &mut Best) -> Result<usize> {
    let mut current = start;
    let mut score = cache.score(&current)?;
    if score > best.score + EPS {
        *best = Best { dag: current.clone(), score };
    }
    let mut tabu: VecDeque<(Move, usize)> = VecDeque::new();
    let mut it = 0;
    while it < cfg.max_iterations {
        while tabu.front().is_some_and(|&(_, until)| until <= it) {
            tabu.pop_front();
        }
        let mut chosen: Option<(Move, f64)> = None;
        for mv in current.neighbor_moves() {
            let delta = cache.delta(&current, mv);
            let is_tabu = tabu.iter().any(|&(t, _)| t == mv);
            if is_tabu && score + delta <= best.score + EPS {
                continue;
            }
            if chosen.is_none_or(|(_, d)| delta > d) {
                chosen = Some((mv, delta));
            }
        }
        let Some((mv, _)) = chosen else { break };
        current.apply(mv)?;
        score = cache.score(&current)?;
        if cfg.tenure > 0 {
            tabu.push_back((mv.inverse(), it + 1 + cfg.tenure));
        }
        it += 1;
        if score > best.score + EPS {
            *best = Best { dag: current.clone(), score };
        }
    }
    Ok(it)
}

/// Searches from the empty graph, then from `restarts` perturbations of the
/// best graph so far; returns the best graph seen.
pub fn tabu_search(data: &DiscreteData, cfg: &SearchConfig) -> Result<SearchResult> {
    if data.n_vars() < 2 {
        return Err(BnError::InvalidArgument("structure search needs at least two variables".into()));
    }
    let mut cache = ScoreCache::new(data);
    let empty = Dag::empty(data.names().to_vec());
    let empty_score = cache.score(&empty)?;
    let mut best = Best { dag: empty.clone(), score: empty_score };
    if cfg.max_iterations == 0 {
        return Ok(SearchResult { dag: empty, score: empty_score, empty_score, iterations: 0 });
    }
    let mut iterations = run(empty, &mut cache, cfg, &mut best)?;
    let kicks = (data.n_vars() / 2).max(2);
    for r in 0..cfg.restarts {
        let mut rng = rng_from_seed(derive_seed(cfg.seed, &format!("restart{r}")));
        let mut start = best.dag.clone();
        for _ in 0..kicks {
            let moves = start.neighbor_moves();
            if moves.is_empty() {
                break;
            }
            start.apply(moves[rng.random_range(0..moves.len())])?;
        }
        iterations += run(start, &mut cache, cfg, &mut best)?;
    }
    Ok(SearchResult { dag: best.dag, score: best.score, empty_score, iterations })
}
