use serde::{Deserialize, Serialize};

use super::PosteriorSamples;
use crate::dist::logistic;
use crate::error::{Error, Result};
use crate::network::{vectorize_upper, AdjacencyMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    /// Posterior-averaged probability of label 1.
    pub probability: f64,
    /// 1 when `probability > 0.5`; an exact tie goes to 0.
    pub label: u8,
}

/// Averages `logistic(mu^(l) + x' gamma^(l))` over the draws for one edge
/// vector `x` (the upper triangle of a network in canonical order).
pub fn class_probability(samples: &PosteriorSamples, x: &[f64]) -> Result<f64> {
    if x.len() != samples.edge_count() {
        return Err(Error::Dimension(format!(
            "network has {} edges, the model has {}",
            x.len(),
            samples.edge_count()
        )));
    }
    if samples.is_empty() {
        return Err(Error::InvalidParameter("no posterior draws".into()));
    }
    let total: f64 = (0..samples.len())
        .map(|l| {
            let g = samples.gamma_draw(l);
            logistic(samples.mu[l] + g.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
        })
        .sum();
    Ok(total / samples.len() as f64)
}

pub fn classify(samples: &PosteriorSamples, network: &AdjacencyMatrix) -> Result<Classification> {
    if network.node_count() != samples.nodes {
        return Err(Error::Dimension(format!(
            "network has {} nodes, the model has {}",
            network.node_count(),
            samples.nodes
        )));
    }
    let probability = class_probability(samples, vectorize_upper(network).values())?;
    Ok(Classification { probability, label: u8::from(probability > 0.5) })
}

/// Class probabilities for each row of an `n x q` design.
pub fn class_probabilities(samples: &PosteriorSamples, design: &nalgebra::DMatrix<f64>) -> Result<Vec<f64>> {
    (0..design.nrows())
        .map(|i| {
            let row: Vec<f64> = design.row(i).iter().copied().collect();
            class_probability(samples, &row)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSelection {
    /// Posterior inclusion frequency of each node.
    pub probabilities: Vec<f64>,
    /// 0-based indices with probability strictly above 0.5.
    pub selected: Vec<usize>,
}

pub fn select_nodes(samples: &PosteriorSamples) -> NodeSelection {
    let v = samples.nodes;
    let mut counts = vec![0usize; v];
    for l in 0..samples.len() {
        for (c, &on) in counts.iter_mut().zip(samples.xi_draw(l)) {
            *c += usize::from(on);
        }
    }
    let l = samples.len().max(1) as f64;
    let probabilities: Vec<f64> = counts.iter().map(|&c| c as f64 / l).collect();
    let selected = nodes_above_half(&probabilities);
    NodeSelection { probabilities, selected }
}

pub fn nodes_above_half(probabilities: &[f64]) -> Vec<usize> {
    probabilities.iter().enumerate().filter(|(_, &p)| p > 0.5).map(|(k, _)| k).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeSelection {
    /// `P(|gamma_j| > t | data)` per edge.
    pub probabilities: Vec<f64>,
    /// Selected 0-based edge indices, most probable first.
    pub selected: Vec<usize>,
    /// Mean of `1 - d_j` over the selected edges (0 when none are selected).
    pub achieved_bound: f64,
    pub threshold: f64,
    pub alpha: f64,
}

/// Bayesian false-discovery selection: sort edges by exceedance probability
/// and keep the largest prefix whose average null probability is at most
/// `alpha`.
pub fn fdr_select(probabilities: &[f64], alpha: f64) -> (Vec<usize>, f64) {
    let mut order: Vec<usize> = (0..probabilities.len()).collect();
    // stable sort keeps ties in index order
    order.sort_by(|&a, &b| probabilities[b].total_cmp(&probabilities[a]));
    let mut best = 0;
    let mut best_bound = 0.0;
    let mut null_sum = 0.0;
    for (i, &j) in order.iter().enumerate() {
        null_sum += 1.0 - probabilities[j];
        let bound = null_sum / (i + 1) as f64;
        if bound <= alpha + 1e-12 {
            best = i + 1;
            best_bound = bound;
        }
    }
    order.truncate(best);
    (order, best_bound)
}

pub fn select_edges_fdr(samples: &PosteriorSamples, threshold: f64, alpha: f64) -> Result<EdgeSelection> {
    if !(threshold > 0.0) {
        return Err(Error::InvalidParameter(format!("edge threshold {threshold} must be positive")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("FDR level {alpha} must lie in (0, 1)")));
    }
    let q = samples.edge_count();
    let mut counts = vec![0usize; q];
    for l in 0..samples.len() {
        for (c, g) in counts.iter_mut().zip(samples.gamma_draw(l)) {
            *c += usize::from(g.abs() > threshold);
        }
    }
    let l = samples.len().max(1) as f64;
    let probabilities: Vec<f64> = counts.iter().map(|&c| c as f64 / l).collect();
    let (selected, achieved_bound) = fdr_select(&probabilities, alpha);
    Ok(EdgeSelection { probabilities, selected, achieved_bound, threshold, alpha })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankDistribution {
    /// `P(R_eff = r | data)` for `r = 0..=R`.
    pub probabilities: Vec<f64>,
    pub mean: f64,
    /// Most probable rank; the smallest one on ties.
    pub mode: usize,
}

pub fn effective_dimensionality(samples: &PosteriorSamples) -> RankDistribution {
    let mut counts = vec![0usize; samples.rank + 1];
    for l in 0..samples.len() {
        counts[samples.lambda_draw(l).iter().filter(|&&b| b).count()] += 1;
    }
    let total = samples.len().max(1) as f64;
    let probabilities: Vec<f64> = counts.iter().map(|&c| c as f64 / total).collect();
    let mean = counts.iter().enumerate().map(|(r, &c)| (r * c) as f64).sum::<f64>() / total;
    let mode = counts.iter().enumerate().fold(0, |best, (r, &c)| if c > counts[best] { r } else { best });
    RankDistribution { probabilities, mean, mode }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSummary {
    pub mean: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub level: f64,
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = p.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Posterior means and equal-tailed credible intervals of the edge
/// coefficients.
pub fn summarize_coefficients(samples: &PosteriorSamples, level: f64) -> Result<CoefficientSummary> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter(format!("credible level {level} must lie in (0, 1)")));
    }
    if samples.is_empty() {
        return Err(Error::InvalidParameter("no posterior draws".into()));
    }
    let q = samples.edge_count();
    let tail = 0.5 * (1.0 - level);
    let mut out = CoefficientSummary { mean: Vec::with_capacity(q), lower: vec![], upper: vec![], level };
    for j in 0..q {
        let mut t = samples.gamma_trace(j);
        out.mean.push(t.iter().sum::<f64>() / t.len() as f64);
        t.sort_by(f64::total_cmp);
        out.lower.push(quantile_sorted(&t, tail));
        out.upper.push(quantile_sorted(&t, 1.0 - tail));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InferenceOptions {
    /// Effect-size threshold `t` for edge exceedance probabilities.
    pub edge_threshold: f64,
    /// Target Bayesian FDR for edge selection.
    pub fdr: f64,
    /// Credible level of the coefficient intervals.
    pub level: f64,
}

impl Default for InferenceOptions {
    fn default() -> Self {
        Self { edge_threshold: 0.05, fdr: 0.05, level: 0.95 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceReport {
    pub nodes: NodeSelection,
    pub edges: EdgeSelection,
    pub rank: RankDistribution,
    pub coefficients: CoefficientSummary,
    pub class_threshold: f64,
}

pub fn infer(samples: &PosteriorSamples, options: &InferenceOptions) -> Result<InferenceReport> {
    Ok(InferenceReport {
        nodes: select_nodes(samples),
        edges: select_edges_fdr(samples, options.edge_threshold, options.fdr)?,
        rank: effective_dimensionality(samples),
        coefficients: summarize_coefficients(samples, options.level)?,
        class_threshold: 0.5,
    })
}
