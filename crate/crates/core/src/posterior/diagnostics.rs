use serde::{Deserialize, Serialize};

use super::PosteriorSamples;
use crate::error::{Error, Result};
use crate::rng::RngStream;
use rand::seq::index::sample;

const MIN_DRAWS: usize = 4;

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn autocovariance(x: &[f64], lag: usize) -> f64 {
    let m = mean(x);
    let n = x.len();
    (0..n - lag).map(|i| (x[i] - m) * (x[i + lag] - m)).sum::<f64>() / n as f64
}

/// Lag `1..=max_lag` sample autocorrelations. A constant chain has
/// autocorrelation 1 at every lag.
pub fn autocorrelation(x: &[f64], max_lag: usize) -> Vec<f64> {
    let g0 = autocovariance(x, 0);
    (1..=max_lag.min(x.len().saturating_sub(1)))
        .map(|k| if g0 > 0.0 { autocovariance(x, k) / g0 } else { 1.0 })
        .collect()
}

/// Effective sample size pooled over chains, using the initial monotone
/// positive sequence estimator on the chain-averaged autocorrelations.
pub fn effective_sample_size(chains: &[Vec<f64>]) -> Result<f64> {
    let n = check_chains(chains)?;
    let m = chains.len() as f64;
    let means: Vec<f64> = chains.iter().map(|c| mean(c)).collect();
    let vars: Vec<f64> = chains.iter().map(|c| autocovariance(c, 0) * n as f64 / (n as f64 - 1.0)).collect();
    let w = mean(&vars);
    let between = if chains.len() > 1 {
        let gm = mean(&means);
        means.iter().map(|x| (x - gm) * (x - gm)).sum::<f64>() / (m - 1.0)
    } else {
        0.0
    };
    let var_plus = w * (n as f64 - 1.0) / n as f64 + between;
    if !(var_plus > 0.0) {
        return Ok(m * n as f64);
    }
    let rho = |k: usize| -> f64 {
        let acov = chains.iter().map(|c| autocovariance(c, k)).sum::<f64>() / m;
        1.0 - (w - acov) / var_plus
    };
    // Geyer: sums of adjacent pairs, truncated at the first non-positive
    // pair and forced to be non-increasing
    let mut tau = -1.0;
    let mut prev_pair = f64::INFINITY;
    let mut k = 0;
    while k + 1 < n {
        let pair = rho(k) + rho(k + 1);
        if pair <= 0.0 {
            break;
        }
        let pair = pair.min(prev_pair);
        tau += 2.0 * pair;
        prev_pair = pair;
        k += 2;
    }
    let total = m * n as f64;
    Ok(total / tau.max(1.0 / total.log10().max(1.0)))
}

/// Potential scale reduction across chains, without splitting.
pub fn rhat(chains: &[Vec<f64>]) -> Result<f64> {
    let n = check_chains(chains)? as f64;
    if chains.len() < 2 {
        return Err(Error::InvalidParameter("R-hat needs at least two sequences".into()));
    }
    let m = chains.len() as f64;
    let means: Vec<f64> = chains.iter().map(|c| mean(c)).collect();
    let w = chains.iter().map(|c| autocovariance(c, 0) * n / (n - 1.0)).sum::<f64>() / m;
    let gm = mean(&means);
    let b = n * means.iter().map(|x| (x - gm) * (x - gm)).sum::<f64>() / (m - 1.0);
    if w == 0.0 {
        return Ok(if b == 0.0 { 1.0 } else { f64::INFINITY });
    }
    let var_plus = (n - 1.0) / n * w + b / n;
    Ok((var_plus / w).sqrt())
}

/// R-hat after splitting every chain into two halves, which also detects
/// drift within a single chain.
pub fn split_rhat(chains: &[Vec<f64>]) -> Result<f64> {
    let n = check_chains(chains)?;
    let half = n / 2;
    let mut halves = Vec::with_capacity(2 * chains.len());
    for c in chains {
        halves.push(c[..half].to_vec());
        halves.push(c[n - half..].to_vec());
    }
    rhat(&halves)
}

fn check_chains(chains: &[Vec<f64>]) -> Result<usize> {
    let n = chains.first().map_or(0, Vec::len);
    if chains.is_empty() || chains.iter().any(|c| c.len() != n) {
        return Err(Error::InvalidParameter("chains must be non-empty and of equal length".into()));
    }
    if n < MIN_DRAWS {
        return Err(Error::InvalidParameter(format!("chains have {n} draws; at least {MIN_DRAWS} are needed")));
    }
    if chains.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("chain contains non-finite values".into()));
    }
    Ok(n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarDiagnostic {
    pub name: String,
    pub mean: f64,
    pub ess: f64,
    /// Split R-hat; `None` when a chain is too short to split.
    pub rhat: Option<f64>,
    /// Autocorrelations at lags 1, 2, ... pooled over chains.
    pub autocorrelation: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub chains: usize,
    pub draws_per_chain: usize,
    pub scalars: Vec<ScalarDiagnostic>,
}

impl DiagnosticsReport {
    pub fn min_ess(&self) -> f64 {
        self.scalars.iter().map(|s| s.ess).fold(f64::INFINITY, f64::min)
    }

    pub fn max_rhat(&self) -> Option<f64> {
        self.scalars.iter().filter_map(|s| s.rhat).reduce(f64::max)
    }
}

/// ESS, autocorrelation and split R-hat for the intercept, the active node
/// fraction, the effective rank, and up to `edges` edge coefficients chosen
/// by a fixed seed.
pub fn diagnostics(samples: &PosteriorSamples, edges: usize) -> Result<DiagnosticsReport> {
    let ids = samples.chain_ids();
    let per_chain = samples.split_by_chain(&samples.mu);
    let n = per_chain.first().map_or(0, Vec::len);
    check_chains(&per_chain)?;

    let q = samples.edge_count();
    let mut rng = RngStream::new(0x5eed, 0);
    let mut picked: Vec<usize> = sample(&mut rng, q, edges.min(q)).into_vec();
    picked.sort_unstable();

    let mut traces: Vec<(String, Vec<f64>)> = vec![
        ("mu".into(), samples.mu.clone()),
        ("active_fraction".into(), samples.active_fraction_trace()),
        ("effective_rank".into(), samples.effective_rank_trace()),
    ];
    for j in picked {
        let (k, l) = crate::network::edge_nodes(samples.nodes, j);
        traces.push((format!("gamma_{}", crate::network::edge_label(k, l)), samples.gamma_trace(j)));
    }

    let scalars = traces
        .into_iter()
        .map(|(name, trace)| {
            let chains = samples.split_by_chain(&trace);
            let lags = 20.min(n - 1);
            let mut acf = vec![0.0; lags];
            for c in &chains {
                for (a, r) in acf.iter_mut().zip(autocorrelation(c, lags)) {
                    *a += r / chains.len() as f64;
                }
            }
            Ok(ScalarDiagnostic {
                name,
                mean: mean(&trace),
                ess: effective_sample_size(&chains)?,
                rhat: if n >= 2 * MIN_DRAWS { Some(split_rhat(&chains)?) } else { None },
                autocorrelation: acf,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DiagnosticsReport { chains: ids.len(), draws_per_chain: n, scalars })
}
