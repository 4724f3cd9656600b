use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::conditionals::{
    update_gamma, update_latent_positions, update_mu, update_node_sparsity, update_omega, update_q,
    update_rank_indicators,
};
use super::horseshoe::{update_global_scale_hs, update_local_scales_hs};
use super::lasso::update_local_scales;
use super::{ChainState, PriorKind, PriorSpec, ScalePrior};
use crate::error::{Error, Result};
use crate::network::NetworkDataset;
use crate::posterior::PosteriorSamples;
use crate::rng::RngStream;

/// Which algorithm draws the edge coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaRoute {
    /// Dense when `q <= n` or `q <= 1024`, low-rank otherwise.
    #[default]
    Auto,
    Dense,
    LowRank,
}

impl GammaRoute {
    pub fn use_dense(self, n: usize, q: usize) -> bool {
        match self {
            GammaRoute::Auto => q <= n || q <= 1024,
            GammaRoute::Dense => true,
            GammaRoute::LowRank => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McmcConfig {
    /// Total number of sweeps, burn-in included.
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub chains: usize,
    pub seed: u64,
    #[serde(default)]
    pub gamma_route: GammaRoute,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self { iterations: 50_000, burn_in: 30_000, thin: 10, chains: 1, seed: 0, gamma_route: GammaRoute::Auto }
    }
}

impl McmcConfig {
    pub fn new(iterations: usize, burn_in: usize, thin: usize) -> Self {
        Self { iterations, burn_in, thin, ..Self::default() }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_chains(mut self, chains: usize) -> Self {
        self.chains = chains;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.iterations {
            return Err(Error::InvalidParameter(format!(
                "burn-in {} must be smaller than the total {} iterations",
                self.burn_in, self.iterations
            )));
        }
        if self.thin == 0 {
            return Err(Error::InvalidParameter("thinning stride must be at least 1".into()));
        }
        if self.chains == 0 {
            return Err(Error::InvalidParameter("at least one chain is required".into()));
        }
        Ok(())
    }

    /// Whether sweep `t` (1-based) is retained.
    pub fn keeps(&self, t: usize) -> bool {
        t > self.burn_in && (t - self.burn_in).is_multiple_of(self.thin)
    }

    /// Retained draws per chain.
    pub fn retained(&self) -> usize {
        self.iterations.saturating_sub(self.burn_in) / self.thin.max(1)
    }
}

/// A single Gibbs chain over a private copy of the data.
#[derive(Debug, Clone)]
pub struct Sampler {
    data: NetworkDataset,
    prior: PriorSpec,
    route: GammaRoute,
    state: ChainState,
    sweeps: usize,
}

impl Sampler {
    pub fn new(data: NetworkDataset, prior: PriorSpec, route: GammaRoute, rng: &mut RngStream) -> Result<Self> {
        prior.validate()?;
        let state = ChainState::initial(&data, &prior, rng);
        Ok(Self { data, prior, route, state, sweeps: 0 })
    }

    /// Starts from a given state instead of the default initialization.
    pub fn from_state(data: NetworkDataset, prior: PriorSpec, route: GammaRoute, state: ChainState) -> Result<Self> {
        prior.validate()?;
        if state.node_count() != data.node_count() || state.rank() != prior.r {
            return Err(Error::Dimension(format!(
                "state has V={} R={}, data V={} and prior R={}",
                state.node_count(),
                state.rank(),
                data.node_count(),
                prior.r
            )));
        }
        Ok(Self { data, prior, route, state, sweeps: 0 })
    }

    pub fn state(&self) -> &ChainState {
        &self.state
    }

    pub fn data(&self) -> &NetworkDataset {
        &self.data
    }

    pub fn prior(&self) -> &PriorSpec {
        &self.prior
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    /// Replaces the labels, keeping the networks.
    pub fn set_labels(&mut self, labels: Vec<u8>) -> Result<()> {
        self.data = self.data.with_labels(labels)?;
        Ok(())
    }

    /// One full scan:
    /// omega, mu, gamma, scales, (u, xi), Delta, Q, (lambda, pi).
    pub fn sweep(&mut self, rng: &mut RngStream) -> Result<()> {
        self.sweeps += 1;
        self.sweep_inner(rng).map_err(|e| Error::Iteration { iteration: self.sweeps, source: Box::new(e) })
    }

    fn sweep_inner(&mut self, rng: &mut RngStream) -> Result<()> {
        let st = &mut self.state;
        let data = &self.data;
        let prior = &self.prior;
        update_omega(st, data, rng)?;
        update_mu(st, data, prior, rng)?;
        update_gamma(st, data, self.route, rng)?;
        match prior.scales {
            ScalePrior::Lasso { .. } => update_local_scales(st, prior, rng)?,
            ScalePrior::Horseshoe => {
                update_local_scales_hs(st, rng)?;
                update_global_scale_hs(st, rng)?;
            }
        }
        update_latent_positions(st, rng)?;
        update_node_sparsity(st, prior, rng)?;
        update_q(st, prior, rng)?;
        update_rank_indicators(st, prior, rng)?;
        Ok(())
    }

    pub fn log_posterior(&self) -> f64 {
        self.state.log_posterior(&self.data, &self.prior)
    }
}

/// Runs chain number `chain` of `config` and returns its retained draws.
pub fn run_single_chain(
    data: &NetworkDataset,
    prior: &PriorSpec,
    config: &McmcConfig,
    chain: u32,
) -> Result<PosteriorSamples> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::InvalidParameter("dataset has no observations".into()));
    }
    let mut rng = RngStream::new(config.seed, u64::from(chain));
    let mut sampler = Sampler::new(data.clone(), prior.clone(), config.gamma_route, &mut rng)?;
    let mut out = PosteriorSamples::new(data.node_count(), prior.clone(), config.clone());
    for t in 1..=config.iterations {
        sampler.sweep(&mut rng)?;
        if config.keeps(t) {
            let lp = sampler.log_posterior();
            if !lp.is_finite() {
                return Err(Error::Iteration {
                    iteration: t,
                    source: Box::new(Error::InvalidParameter(format!("log posterior is {lp}"))),
                });
            }
            out.push(chain, t as u64, sampler.state(), lp);
        }
    }
    Ok(out)
}

/// Runs `config.chains` independent chains in parallel. Chain `c` uses
/// stream `c` of the seed, so the output does not depend on the number of
/// worker threads. Draws are ordered by chain.
pub fn run_chain(data: &NetworkDataset, prior: &PriorSpec, config: &McmcConfig) -> Result<PosteriorSamples> {
    config.validate()?;
    prior.validate()?;
    let chains: Vec<Result<PosteriorSamples>> =
        (0..config.chains as u32).into_par_iter().map(|c| run_single_chain(data, prior, config, c)).collect();
    let mut it = chains.into_iter();
    let mut merged = it.next().expect("at least one chain")?;
    for c in it {
        merged.append(c?)?;
    }
    Ok(merged)
}

fn require_kind(prior: &PriorSpec, kind: PriorKind) -> Result<()> {
    if prior.kind() != kind {
        return Err(Error::InvalidParameter(format!("expected a {kind} prior, got {}", prior.kind())));
    }
    Ok(())
}

/// [`run_chain`] with a Lasso prior.
pub fn run_chain_bnlc(data: &NetworkDataset, prior: &PriorSpec, config: &McmcConfig) -> Result<PosteriorSamples> {
    require_kind(prior, PriorKind::Lasso)?;
    run_chain(data, prior, config)
}

/// [`run_chain`] with a Horseshoe prior.
pub fn run_chain_bnhc(data: &NetworkDataset, prior: &PriorSpec, config: &McmcConfig) -> Result<PosteriorSamples> {
    require_kind(prior, PriorKind::Horseshoe)?;
    run_chain(data, prior, config)
}
