use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ChainState, McmcConfig, PriorKind, PriorSpec, ScaleState};
use crate::network::edge_count;

/// Retained draws, stored column-wise: draw `l` of `gamma` is
/// `gamma[l * q..(l + 1) * q]`, and likewise for `xi` and `lambda`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSamples {
    pub nodes: usize,
    pub rank: usize,
    pub prior: PriorSpec,
    pub config: McmcConfig,
    /// Chain index of each draw.
    pub chain: Vec<u32>,
    /// 1-based sweep number of each draw.
    pub iteration: Vec<u64>,
    pub mu: Vec<f64>,
    pub gamma: Vec<f64>,
    pub xi: Vec<bool>,
    pub lambda: Vec<bool>,
    pub delta: Vec<f64>,
    /// `theta^2` under the Lasso prior, `sigma^2` under the Horseshoe prior.
    pub global_scale: Vec<f64>,
    pub log_posterior: Vec<f64>,
}

impl PosteriorSamples {
    pub fn new(nodes: usize, prior: PriorSpec, config: McmcConfig) -> Self {
        Self {
            nodes,
            rank: prior.r,
            prior,
            config,
            chain: Vec::new(),
            iteration: Vec::new(),
            mu: Vec::new(),
            gamma: Vec::new(),
            xi: Vec::new(),
            lambda: Vec::new(),
            delta: Vec::new(),
            global_scale: Vec::new(),
            log_posterior: Vec::new(),
        }
    }

    pub fn kind(&self) -> PriorKind {
        self.prior.kind()
    }

    pub fn seed(&self) -> u64 {
        self.config.seed
    }

    pub fn edge_count(&self) -> usize {
        edge_count(self.nodes)
    }

    /// Number of retained draws `L`.
    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    pub fn gamma_draw(&self, l: usize) -> &[f64] {
        let q = self.edge_count();
        &self.gamma[l * q..(l + 1) * q]
    }

    pub fn xi_draw(&self, l: usize) -> &[bool] {
        &self.xi[l * self.nodes..(l + 1) * self.nodes]
    }

    pub fn lambda_draw(&self, l: usize) -> &[bool] {
        &self.lambda[l * self.rank..(l + 1) * self.rank]
    }

    /// Draws of `gamma_j` for one edge.
    pub fn gamma_trace(&self, j: usize) -> Vec<f64> {
        let q = self.edge_count();
        (0..self.len()).map(|l| self.gamma[l * q + j]).collect()
    }

    /// `sum_r lambda_r` per draw.
    pub fn effective_rank_trace(&self) -> Vec<f64> {
        (0..self.len()).map(|l| self.lambda_draw(l).iter().filter(|&&b| b).count() as f64).collect()
    }

    /// Fraction of active nodes per draw.
    pub fn active_fraction_trace(&self) -> Vec<f64> {
        (0..self.len())
            .map(|l| self.xi_draw(l).iter().filter(|&&b| b).count() as f64 / self.nodes.max(1) as f64)
            .collect()
    }

    /// Distinct chain ids in order of first appearance.
    pub fn chain_ids(&self) -> Vec<u32> {
        let mut ids: Vec<u32> = Vec::new();
        for &c in &self.chain {
            if !ids.contains(&c) {
                ids.push(c);
            }
        }
        ids
    }

    /// Splits a per-draw trace by chain.
    pub fn split_by_chain(&self, trace: &[f64]) -> Vec<Vec<f64>> {
        self.chain_ids()
            .into_iter()
            .map(|c| trace.iter().zip(&self.chain).filter(|(_, &id)| id == c).map(|(&x, _)| x).collect())
            .collect()
    }

    pub fn push(&mut self, chain: u32, iteration: u64, state: &ChainState, log_posterior: f64) {
        self.chain.push(chain);
        self.iteration.push(iteration);
        self.mu.push(state.mu);
        self.gamma.extend_from_slice(&state.gamma);
        self.xi.extend_from_slice(&state.xi);
        self.lambda.extend_from_slice(&state.lambda);
        self.delta.push(state.delta);
        self.global_scale.push(match &state.scales {
            ScaleState::Lasso { theta2 } => *theta2,
            ScaleState::Horseshoe { sigma2, .. } => *sigma2,
        });
        self.log_posterior.push(log_posterior);
    }

    /// Appends the draws of `other`, which must describe the same model.
    pub fn append(&mut self, other: PosteriorSamples) -> Result<()> {
        if other.nodes != self.nodes || other.rank != self.rank || other.prior != self.prior {
            return Err(Error::Dimension(format!(
                "cannot merge samples for V={} R={} {} into V={} R={} {}",
                other.nodes,
                other.rank,
                other.kind(),
                self.nodes,
                self.rank,
                self.kind()
            )));
        }
        self.chain.extend(other.chain);
        self.iteration.extend(other.iteration);
        self.mu.extend(other.mu);
        self.gamma.extend(other.gamma);
        self.xi.extend(other.xi);
        self.lambda.extend(other.lambda);
        self.delta.extend(other.delta);
        self.global_scale.extend(other.global_scale);
        self.log_posterior.extend(other.log_posterior);
        Ok(())
    }

    /// Checks that every column has `L` entries of the right width.
    pub fn validate(&self) -> Result<()> {
        let l = self.len();
        let q = self.edge_count();
        let ok = self.chain.len() == l
            && self.iteration.len() == l
            && self.gamma.len() == l * q
            && self.xi.len() == l * self.nodes
            && self.lambda.len() == l * self.rank
            && self.delta.len() == l
            && self.global_scale.len() == l
            && self.log_posterior.len() == l
            && self.rank == self.prior.r;
        if !ok {
            return Err(Error::Format(format!("posterior samples columns disagree with L = {l}, V = {}", self.nodes)));
        }
        if l == 0 {
            return Err(Error::Format("posterior samples hold no draws".into()));
        }
        Ok(())
    }

    /// Builds samples directly from per-draw values; intended for tests and
    /// for post-processing draws produced elsewhere.
    pub fn from_draws(
        nodes: usize,
        mu: Vec<f64>,
        gamma: Vec<Vec<f64>>,
        xi: Vec<Vec<bool>>,
        lambda: Vec<Vec<bool>>,
    ) -> Result<Self> {
        let l = mu.len();
        let rank = lambda.first().map_or(0, Vec::len).max(1);
        let q = edge_count(nodes);
        if gamma.len() != l || xi.len() != l || lambda.len() != l {
            return Err(Error::Dimension("draw counts differ between columns".into()));
        }
        if gamma.iter().any(|g| g.len() != q)
            || xi.iter().any(|x| x.len() != nodes)
            || lambda.iter().any(|x| x.len() != rank)
        {
            return Err(Error::Dimension(format!("draw widths must be q = {q}, V = {nodes}, R = {rank}")));
        }
        let config = McmcConfig { iterations: l, burn_in: 0, thin: 1, ..McmcConfig::default() };
        let mut s = Self::new(nodes, PriorSpec::lasso(rank), config);
        s.chain = vec![0; l];
        s.iteration = (1..=l as u64).collect();
        s.mu = mu;
        s.gamma = gamma.concat();
        s.xi = xi.concat();
        s.lambda = lambda.concat();
        s.delta = vec![0.5; l];
        s.global_scale = vec![1.0; l];
        s.log_posterior = vec![0.0; l];
        Ok(s)
    }
}
