//! Structure learning on the original data and, optionally, on its
//! augmented counterpart, with both discretized by the same bins.

use riga_bayesnet::{
    blanket_dot, blanket_report, discretize, markov_blanket, tabu_search, to_dot, AdjacencyList, BnError, DiscreteData, Discretization,
    SearchConfig, SearchResult,
};
use riga_core::{derive_seed, Dataset};

use crate::config::BnConfig;
use crate::error::{CliError, Result};
use crate::manifest::{BnRun, BnSummary};
use crate::outdir::OutDir;

fn select(ds: &Dataset, features: Option<&[String]>) -> Result<Dataset> {
    let Some(names) = features else { return Ok(ds.clone()) };
    let idx = names
        .iter()
        .map(|n| {
            ds.feature_names().iter().position(|f| f == n).ok_or_else(|| CliError::Config(format!("bn.features: unknown feature `{n}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ds.select_features(&idx))
}

/// Applies the bins fitted on the original data to another dataset with the
/// same columns.
fn rebin(disc: &Discretization, ds: &Dataset) -> std::result::Result<DiscreteData, BnError> {
    let names = disc.data.names();
    let columns = names
        .iter()
        .zip(&disc.binnings)
        .map(|(name, b)| {
            let values: Vec<f64> = match ds.feature_names().iter().position(|f| f == name) {
                Some(j) => ds.column(j),
                None => ds.labels().iter().map(|&y| f64::from(y)).collect(),
            };
            values.iter().map(|&x| b.category(x)).collect()
        })
        .collect();
    DiscreteData::new(names.to_vec(), disc.data.cards().to_vec(), columns)
}

fn summarize(data: &DiscreteData, res: &SearchResult, target: usize) -> BnRun {
    let names = res.dag.names();
    BnRun {
        n_rows: data.n_rows(),
        bic: res.score,
        empty_bic: res.empty_score,
        iterations: res.iterations,
        edges: res.dag.edges().into_iter().map(|(u, v)| (names[u].clone(), names[v].clone())).collect(),
        blanket: markov_blanket(&res.dag, target).into_iter().map(|x| names[x].clone()).collect(),
        parents: res.dag.parents(target).iter().map(|&p| names[p].clone()).collect(),
    }
}

fn write_run(out: &mut OutDir, tag: &str, res: &SearchResult, target: usize) -> Result<()> {
    out.write(&format!("bn/{tag}.dot"), to_dot(&res.dag))?;
    out.write_json(&format!("bn/{tag}.json"), &AdjacencyList::from_dag(&res.dag))?;
    out.write(&format!("bn/blanket_{tag}.dot"), blanket_dot(&res.dag, target))?;
    let report = format!("BIC {:.4} (empty graph {:.4})\n{}", res.score, res.empty_score, blanket_report(&res.dag, target));
    out.write(&format!("bn/blanket_{tag}.txt"), report)
}

/// Learns a structure on `original` and, when given, on `augmented`.
/// Search seeds are derived from `seed` under "bn" and "bn_augmented".
pub fn learn_structures(cfg: &BnConfig, original: &Dataset, augmented: Option<&Dataset>, seed: u64, out: &mut OutDir) -> Result<BnSummary> {
    let phase = CliError::phase::<BnError>;
    let orig = select(original, cfg.features.as_deref())?;
    let disc = discretize(&orig, cfg.bins).map_err(phase("discretize"))?;
    let target = disc
        .data
        .index_of(&cfg.target)
        .ok_or_else(|| CliError::Config(format!("bn.target `{}` is not a node (unknown or constant)", cfg.target)))?;
    let search = |data: &DiscreteData, tag: &str| {
        let sc = SearchConfig { seed: derive_seed(seed, tag), ..cfg.search.clone() };
        tabu_search(data, &sc).map_err(phase("structure search"))
    };
    let res = search(&disc.data, "bn")?;
    write_run(out, "original", &res, target)?;
    let original_run = summarize(&disc.data, &res, target);
    let augmented_run = match augmented {
        Some(aug) => {
            let data = rebin(&disc, &select(aug, cfg.features.as_deref())?).map_err(phase("discretize"))?;
            let res = search(&data, "bn_augmented")?;
            write_run(out, "augmented", &res, target)?;
            Some(summarize(&data, &res, target))
        }
        None => None,
    };
    Ok(BnSummary {
        target: cfg.target.clone(),
        nodes: disc.data.names().to_vec(),
        excluded: disc.excluded.clone(),
        original: original_run,
        augmented: augmented_run,
    })
}
