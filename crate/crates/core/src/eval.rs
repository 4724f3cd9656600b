//! Metrics against known truth, ROC analysis, cross-validation and
//! simulation experiment grids.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{run_chain, run_single_chain, McmcConfig, PriorKind, PriorSpec};
use crate::network::NetworkDataset;
use crate::posterior::{
    class_probabilities, effective_dimensionality, select_edges_fdr, select_nodes, summarize_coefficients,
    InferenceOptions, PosteriorSamples,
};
use crate::rng::RngStream;
use crate::simulate::{simulate, simulate_test_set, GroundTruth, SimConfig};

/// Mean squared difference over all edges.
pub fn coefficient_mse(estimate: &[f64], truth: &[f64]) -> Result<f64> {
    if estimate.len() != truth.len() || truth.is_empty() {
        return Err(Error::Dimension(format!("MSE of lengths {} and {}", estimate.len(), truth.len())));
    }
    Ok(estimate.iter().zip(truth).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / truth.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionRates {
    pub tpr: f64,
    pub fpr: f64,
    /// Share of selected items outside the truth (0 for an empty selection).
    pub fdr: f64,
}

/// True/false positive rates of `selected` against `truth` within
/// `0..universe`.
pub fn selection_rates(selected: &[usize], truth: &[usize], universe: usize) -> Result<SelectionRates> {
    if let Some(&bad) = selected.iter().chain(truth).find(|&&i| i >= universe) {
        return Err(Error::InvalidParameter(format!("index {bad} outside a universe of {universe}")));
    }
    let mut in_truth = vec![false; universe];
    for &t in truth {
        in_truth[t] = true;
    }
    let mut chosen = vec![false; universe];
    for &s in selected {
        chosen[s] = true;
    }
    let positives = in_truth.iter().filter(|&&b| b).count();
    let picked = chosen.iter().filter(|&&b| b).count();
    let hits = (0..universe).filter(|&i| in_truth[i] && chosen[i]).count();
    let false_hits = picked - hits;
    let negatives = universe - positives;
    Ok(SelectionRates {
        tpr: if positives == 0 { 1.0 } else { hits as f64 / positives as f64 },
        fpr: if negatives == 0 { 0.0 } else { false_hits as f64 / negatives as f64 },
        fdr: if picked == 0 { 0.0 } else { false_hits as f64 / picked as f64 },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub auc: f64,
    /// `(fpr, tpr)` from `(0, 0)` to `(1, 1)`, one point per distinct score.
    pub points: Vec<(f64, f64)>,
}

/// ROC curve swept over every score threshold; the AUC is the Mann-Whitney
/// statistic with ties counted as one half.
pub fn roc_auc(scores: &[f64], labels: &[u8]) -> Result<RocCurve> {
    if scores.len() != labels.len() {
        return Err(Error::Dimension(format!("{} scores for {} labels", scores.len(), labels.len())));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidParameter("scores contain NaN".into()));
    }
    let pos = labels.iter().filter(|&&y| y == 1).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::InvalidParameter("ROC analysis needs both classes".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut area = 0.0;
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        let (tp0, fp0) = (tp, fp);
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        // trapezoid over a block of tied scores counts the ties as one half
        area += (fp - fp0) as f64 * (tp + tp0) as f64 / 2.0;
        points.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
    }
    Ok(RocCurve { auc: area / (pos * neg) as f64, points })
}

/// Stratified fold labels: each class is shuffled and dealt round-robin.
pub fn kfold_assignment(labels: &[u8], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 || k > labels.len() {
        return Err(Error::InvalidParameter(format!("{k} folds for {} subjects", labels.len())));
    }
    let mut rng = RngStream::new(seed, 0xf01d);
    let mut folds = vec![0; labels.len()];
    let mut next = 0;
    for class in [0u8, 1] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        rand::seq::SliceRandom::shuffle(idx.as_mut_slice(), &mut rng);
        for i in idx {
            folds[i] = next % k;
            next += 1;
        }
    }
    Ok(folds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    /// Out-of-fold class probability of every subject.
    pub scores: Vec<f64>,
    pub folds: Vec<usize>,
    pub roc: RocCurve,
}

/// `k`-fold cross-validation: one chain per fold, pooled held-out
/// probabilities. Fold `f` runs with seed `config.seed + f`.
pub fn kfold_cv(data: &NetworkDataset, prior: &PriorSpec, config: &McmcConfig, k: usize) -> Result<CrossValidation> {
    config.validate()?;
    let folds = kfold_assignment(data.labels(), k, config.seed)?;
    let per_fold: Vec<Result<(Vec<usize>, Vec<f64>)>> = (0..k)
        .into_par_iter()
        .map(|f| {
            let train: Vec<usize> = (0..data.len()).filter(|&i| folds[i] != f).collect();
            let test: Vec<usize> = (0..data.len()).filter(|&i| folds[i] == f).collect();
            let train_data = data.subset(&train);
            let ones = train_data.labels().iter().filter(|&&y| y == 1).count();
            if ones == 0 || ones == train_data.len() {
                return Err(Error::InvalidParameter(format!("training set of fold {} has a single class", f + 1)));
            }
            let cfg = McmcConfig { seed: config.seed.wrapping_add(f as u64), chains: 1, ..config.clone() };
            let samples = run_single_chain(&train_data, prior, &cfg, 0)?;
            let scores = class_probabilities(&samples, data.subset(&test).design())?;
            Ok((test, scores))
        })
        .collect();
    let mut scores = vec![f64::NAN; data.len()];
    for r in per_fold {
        let (idx, s) = r?;
        for (i, p) in idx.into_iter().zip(s) {
            scores[i] = p;
        }
    }
    let roc = roc_auc(&scores, data.labels())?;
    Ok(CrossValidation { scores, folds, roc })
}

/// Everything measured for one fit against a known truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mse: f64,
    pub node_tpr: f64,
    pub node_fpr: f64,
    /// AUC separating truly active from inactive nodes by inclusion probability.
    pub node_auc: Option<f64>,
    pub edge_tpr: f64,
    pub edge_fpr: f64,
    pub edge_fdr: f64,
    /// Held-out classification AUC, when a test set was given.
    pub auc: Option<f64>,
    pub roc: Vec<(f64, f64)>,
    pub rank_mode: usize,
    pub rank_mean: f64,
    pub runtime_secs: f64,
}

pub fn evaluate_fit(
    samples: &PosteriorSamples,
    truth: &GroundTruth,
    test: Option<&NetworkDataset>,
    options: &InferenceOptions,
    runtime_secs: f64,
) -> Result<MetricsReport> {
    let gamma_true = truth.gamma_true();
    let coef = summarize_coefficients(samples, options.level)?;
    let mse = coefficient_mse(&coef.mean, gamma_true.values())?;
    let nodes = select_nodes(samples);
    let node_rates = selection_rates(&nodes.selected, &truth.active_nodes, samples.nodes)?;
    let active: Vec<u8> = (0..samples.nodes).map(|k| u8::from(truth.active_nodes.contains(&k))).collect();
    let node_auc = roc_auc(&nodes.probabilities, &active).ok().map(|r| r.auc);
    let edges = select_edges_fdr(samples, options.edge_threshold, options.fdr)?;
    let edge_rates = selection_rates(&edges.selected, &truth.nonzero_edges(), samples.edge_count())?;
    let rank = effective_dimensionality(samples);
    let (auc, roc) = match test {
        Some(t) => {
            let r = roc_auc(&class_probabilities(samples, t.design())?, t.labels())?;
            (Some(r.auc), r.points)
        }
        None => (None, Vec::new()),
    };
    Ok(MetricsReport {
        mse,
        node_tpr: node_rates.tpr,
        node_fpr: node_rates.fpr,
        node_auc,
        edge_tpr: edge_rates.tpr,
        edge_fpr: edge_rates.fpr,
        edge_fdr: edge_rates.fdr,
        auc,
        roc,
        rank_mode: rank.mode,
        rank_mean: rank.mean,
        runtime_secs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentCell {
    pub case: String,
    pub method: PriorKind,
    pub seed: u64,
    pub result: std::result::Result<MetricsReport, String>,
}

/// Settings shared by every cell of an experiment grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub cases: Vec<String>,
    pub methods: Vec<PriorKind>,
    pub replicates: usize,
    pub mcmc: McmcConfig,
    pub inference: InferenceOptions,
    /// Size of the independent test set used for the classification AUC.
    pub test_subjects: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            cases: vec!["sim1-case1".into()],
            methods: vec![PriorKind::Lasso, PriorKind::Horseshoe],
            replicates: 1,
            mcmc: McmcConfig::default(),
            inference: InferenceOptions::default(),
            test_subjects: 250,
        }
    }
}

fn run_cell(case: &str, method: PriorKind, seed: u64, cfg: &ExperimentConfig) -> Result<MetricsReport> {
    let sim_cfg = SimConfig::preset(case)?.with_seed(seed);
    let sim = simulate(&sim_cfg)?;
    let test = simulate_test_set(&sim_cfg, &sim.truth, cfg.test_subjects)?;
    let prior = PriorSpec::for_kind(method, sim_cfg.fit_rank);
    let mcmc = McmcConfig { seed, ..cfg.mcmc.clone() };
    let start = Instant::now();
    let samples = run_chain(&sim.data, &prior, &mcmc)?;
    let secs = start.elapsed().as_secs_f64();
    evaluate_fit(&samples, &sim.truth, (!test.is_empty()).then_some(&test), &cfg.inference, secs)
}

/// Runs simulate, fit and evaluate for every (case, method, replicate).
/// Replicate `r` uses seed `mcmc.seed + r` for both the data and the chain;
/// a failing cell is recorded and the grid continues.
pub fn experiment_table(cfg: &ExperimentConfig) -> Vec<ExperimentCell> {
    let mut jobs = Vec::new();
    for case in &cfg.cases {
        for &method in &cfg.methods {
            for r in 0..cfg.replicates {
                jobs.push((case.clone(), method, cfg.mcmc.seed.wrapping_add(r as u64)));
            }
        }
    }
    jobs.into_par_iter()
        .map(|(case, method, seed)| {
            let result = run_cell(&case, method, seed, cfg).map_err(|e| e.to_string());
            ExperimentCell { case, method, seed, result }
        })
        .collect()
}

/// One CSV row per cell; failed cells carry the error text.
pub fn write_table_csv<W: std::io::Write>(cells: &[ExperimentCell], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "case", "method", "seed", "mse", "node_tpr", "node_fpr", "node_auc", "edge_tpr", "edge_fpr", "edge_fdr", "auc",
        "rank_mode", "rank_mean", "runtime_secs", "error",
    ])?;
    let opt = |x: Option<f64>| x.map_or(String::new(), |v| format!("{v}"));
    for c in cells {
        let head = [c.case.clone(), c.method.to_string(), c.seed.to_string()];
        let row: Vec<String> = match &c.result {
            Ok(m) => head
                .into_iter()
                .chain([
                    m.mse.to_string(),
                    m.node_tpr.to_string(),
                    m.node_fpr.to_string(),
                    opt(m.node_auc),
                    m.edge_tpr.to_string(),
                    m.edge_fpr.to_string(),
                    m.edge_fdr.to_string(),
                    opt(m.auc),
                    m.rank_mode.to_string(),
                    m.rank_mean.to_string(),
                    m.runtime_secs.to_string(),
                    String::new(),
                ])
                .collect(),
            Err(e) => head.into_iter().chain(std::iter::repeat_n(String::new(), 11)).chain([e.clone()]).collect(),
        };
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))?;
    Ok(())
}

/// ROC points of every successful cell: `case,method,seed,fpr,tpr`.
pub fn write_roc_csv<W: std::io::Write>(cells: &[ExperimentCell], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["case", "method", "seed", "fpr", "tpr"])?;
    for c in cells {
        if let Ok(m) = &c.result {
            for (fpr, tpr) in &m.roc {
                w.write_record([c.case.clone(), c.method.to_string(), c.seed.to_string(), fpr.to_string(), tpr.to_string()])?;
            }
        }
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_auc(scores: &[f64], labels: &[u8]) -> f64 {
        let mut wins = 0.0;
        let mut pairs = 0.0;
        for i in 0..scores.len() {
            for j in 0..scores.len() {
                if labels[i] == 1 && labels[j] == 0 {
                    pairs += 1.0;
                    if scores[i] > scores[j] {
                        wins += 1.0;
                    } else if scores[i] == scores[j] {
                        wins += 0.5;
                    }
                }
            }
        }
        wins / pairs
    }

    #[test]
    fn mse_examples() {
        assert_eq!(coefficient_mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(coefficient_mse(&[1.0, 1.0], &[0.0, 0.0]).unwrap(), 1.0);
        assert!(coefficient_mse(&[1.0], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn selection_rate_examples() {
        let r = selection_rates(&[1, 2, 5], &[1, 2, 3, 4], 10).unwrap();
        assert_eq!((r.tpr, r.fpr), (0.5, 1.0 / 6.0));
        let r = selection_rates(&[1, 2], &[1, 2], 10).unwrap();
        assert_eq!((r.tpr, r.fpr), (1.0, 0.0));
        let all: Vec<usize> = (0..10).collect();
        let r = selection_rates(&all, &[3], 10).unwrap();
        assert_eq!((r.tpr, r.fpr), (1.0, 1.0));
        let r = selection_rates(&[], &[], 10).unwrap();
        assert_eq!((r.tpr, r.fdr), (1.0, 0.0));
        assert!(selection_rates(&[10], &[], 10).is_err());
    }

    #[test]
    fn roc_examples() {
        let r = roc_auc(&[0.9, 0.8, 0.4, 0.3], &[1, 0, 1, 0]).unwrap();
        assert_eq!(r.auc, 0.75);
        assert_eq!(roc_auc(&[0.9, 0.8, 0.2, 0.1], &[1, 1, 0, 0]).unwrap().auc, 1.0);
        let r = roc_auc(&[0.5; 6], &[1, 0, 1, 0, 0, 1]).unwrap();
        assert_eq!(r.auc, 0.5);
        assert_eq!(r.points, vec![(0.0, 0.0), (1.0, 1.0)]);
        assert!(roc_auc(&[0.1, 0.2], &[1, 1]).is_err());
    }

    #[test]
    fn stratified_folds_partition() {
        let labels: Vec<u8> = (0..23).map(|i| u8::from(i % 3 == 0)).collect();
        let f = kfold_assignment(&labels, 5, 1).unwrap();
        for fold in 0..5 {
            let members: Vec<usize> = (0..23).filter(|&i| f[i] == fold).collect();
            assert!(members.len() == 4 || members.len() == 5);
            assert!(members.iter().any(|&i| labels[i] == 1));
        }
        assert_eq!(f, kfold_assignment(&labels, 5, 1).unwrap());
        let loo = kfold_assignment(&labels, 23, 2).unwrap();
        let mut sorted = loo.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..23).collect::<Vec<_>>());
        assert!(kfold_assignment(&labels, 1, 0).is_err());
    }

    #[test]
    fn leave_one_out_pools_every_subject() {
        let sim = simulate(&SimConfig { nodes: 4, subjects: 12, ..SimConfig::preset("sim1-case1").unwrap() }.with_seed(3))
            .unwrap();
        let cv = kfold_cv(&sim.data, &PriorSpec::lasso(2), &McmcConfig::new(60, 30, 1), 12);
        match cv {
            Ok(cv) => {
                assert_eq!(cv.scores.len(), 12);
                assert!(cv.scores.iter().all(|s| (0.0..=1.0).contains(s)));
            }
            // every held-out subject of one class leaves a single-class fold
            Err(e) => assert!(e.to_string().contains("single class"), "{e}"),
        }
    }

    #[test]
    fn smoke_grid_and_csv() {
        let cfg = ExperimentConfig {
            cases: vec!["sim1-case1".into(), "nope".into()],
            methods: vec![PriorKind::Lasso],
            replicates: 1,
            mcmc: McmcConfig::new(40, 20, 2),
            test_subjects: 50,
            ..ExperimentConfig::default()
        };
        let cells = experiment_table(&cfg);
        assert_eq!(cells.len(), 2);
        assert!(cells[0].result.is_ok());
        assert!(cells[1].result.is_err());
        let mut buf = Vec::new();
        write_table_csv(&cells, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().nth(2).unwrap().contains("unknown preset"));
        let strip = |cells: Vec<ExperimentCell>| -> Vec<ExperimentCell> {
            cells
                .into_iter()
                .map(|mut c| {
                    if let Ok(m) = &mut c.result {
                        m.runtime_secs = 0.0;
                    }
                    c
                })
                .collect()
        };
        assert_eq!(strip(cells), strip(experiment_table(&cfg)));
    }

    proptest! {
        #[test]
        fn auc_matches_pairwise_oracle(
            pts in prop::collection::vec((0u8..12, any::<bool>()), 2..200)
        ) {
            let scores: Vec<f64> = pts.iter().map(|(s, _)| *s as f64 / 11.0).collect();
            let mut labels: Vec<u8> = pts.iter().map(|(_, y)| u8::from(*y)).collect();
            labels[0] = 1;
            labels[1] = 0;
            let r = roc_auc(&scores, &labels).unwrap();
            prop_assert!((r.auc - brute_auc(&scores, &labels)).abs() < 1e-12);
            prop_assert_eq!(r.points[0], (0.0, 0.0));
            prop_assert_eq!(*r.points.last().unwrap(), (1.0, 1.0));
            for w in r.points.windows(2) {
                prop_assert!(w[1].0 >= w[0].0 && w[1].1 >= w[0].1);
            }
        }

        #[test]
        fn mse_invariant_to_node_relabeling(
            vals in prop::collection::vec(-2.0f64..2.0, 20),
            perm_seed in 0u64..100,
        ) {
            use crate::network::{devectorize, vectorize_upper, EdgeVector, AdjacencyMatrix};
            let a = EdgeVector::new(5, vals[..10].to_vec()).unwrap();
            let b = EdgeVector::new(5, vals[10..].to_vec()).unwrap();
            let mut perm: Vec<usize> = (0..5).collect();
            rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut RngStream::new(perm_seed, 0));
            let relabel = |e: &EdgeVector| {
                let m = devectorize(e);
                let p = nalgebra::DMatrix::from_fn(5, 5, |i, j| m.get(perm[i], perm[j]));
                vectorize_upper(&AdjacencyMatrix::new(p).unwrap())
            };
            let before = coefficient_mse(a.values(), b.values()).unwrap();
            let after = coefficient_mse(relabel(&a).values(), relabel(&b).values()).unwrap();
            prop_assert!((before - after).abs() < 1e-12);
        }
    }
}
