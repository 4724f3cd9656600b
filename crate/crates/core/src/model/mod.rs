//! Network-shrinkage logistic model and its Gibbs sampler.
//!
//! ```text
//! y_i ~ Ber(logistic(mu + x_i' gamma))
//! gamma_{kl} ~ N(u_k' Lambda u_l, sigma^2 s_{kl}^2)
//! u_k | xi_k = 1 ~ N(0, Q),  u_k | xi_k = 0 = 0,  xi_k ~ Ber(Delta)
//! Q ~ IW(nu, I),  Delta ~ Beta(a_Delta, b_Delta)
//! lambda_r ~ Ber(pi_r),  pi_r ~ Beta(1, r^eta)
//! ```
//!
//! The network Lasso prior fixes `sigma = 1` and puts `s^2 ~ Exp(theta^2/2)`,
//! `theta^2 ~ Gamma(zeta, iota)`. The network Horseshoe prior puts half-Cauchy
//! priors on `s` and `sigma`, sampled through inverse-gamma augmentation.
//! The logistic likelihood is handled by Polya-Gamma augmentation.

mod chain;
mod conditionals;
mod gaussian;
mod horseshoe;
mod lasso;
mod prior_draw;
mod state;

pub use chain::{run_chain, run_chain_bnhc, run_chain_bnlc, run_single_chain, GammaRoute, McmcConfig, Sampler};
pub use conditionals::{
    node_conditional, rank_log_odds, update_gamma, update_latent_positions, update_mu, update_node_sparsity,
    update_omega, update_q, update_rank_indicators, NodeConditional,
};
pub use gaussian::{gamma_posterior_moments, sample_gamma_dense, sample_gamma_low_rank};
pub use horseshoe::{update_global_scale_hs, update_local_scales_hs};
pub use lasso::update_local_scales;
pub use prior_draw::{sample_labels, sample_prior_state};
pub use state::{low_rank_mean, ChainState, ScaleState};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PriorKind {
    /// Network Lasso classifier.
    #[serde(rename = "bnlc")]
    Lasso,
    /// Network Horseshoe classifier.
    #[serde(rename = "bnhc")]
    Horseshoe,
}

impl PriorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PriorKind::Lasso => "bnlc",
            PriorKind::Horseshoe => "bnhc",
        }
    }
}

impl std::str::FromStr for PriorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bnlc" | "lasso" => Ok(PriorKind::Lasso),
            "bnhc" | "horseshoe" => Ok(PriorKind::Horseshoe),
            other => Err(Error::InvalidParameter(format!("unknown prior '{other}' (expected bnlc or bnhc)"))),
        }
    }
}

impl std::fmt::Display for PriorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Local/global scale hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalePrior {
    /// `s^2 ~ Exp(theta^2 / 2)`, `theta^2 ~ Gamma(zeta, iota)` (shape, rate).
    Lasso { zeta: f64, iota: f64 },
    /// `s ~ C+(0, 1)`, `sigma ~ C+(0, 1)`.
    Horseshoe,
}

/// Hyperparameters shared by both priors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    /// Maximum latent dimension.
    pub r: usize,
    /// Inverse-Wishart degrees of freedom for `Q`.
    pub nu: f64,
    pub a_delta: f64,
    pub b_delta: f64,
    /// Rank-penalty exponent in `pi_r ~ Beta(1, r^eta)`.
    pub eta: f64,
    pub scales: ScalePrior,
    /// Variance of a `N(0, v)` prior on the intercept. `None` is the flat
    /// prior used for fitting; a proper prior is needed for forward
    /// simulation from the joint distribution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_prior_variance: Option<f64>,
}

impl PriorSpec {
    /// Lasso prior with `nu = 20`, `a_Delta = b_Delta = 1`, `zeta = iota = 1`, `eta = 2`.
    pub fn lasso(r: usize) -> Self {
        Self {
            r,
            nu: 20.0,
            a_delta: 1.0,
            b_delta: 1.0,
            eta: 2.0,
            scales: ScalePrior::Lasso { zeta: 1.0, iota: 1.0 },
            mu_prior_variance: None,
        }
    }

    /// Horseshoe prior with `nu = 20`, `a_Delta = b_Delta = 1`, `eta = 2`.
    pub fn horseshoe(r: usize) -> Self {
        Self { scales: ScalePrior::Horseshoe, ..Self::lasso(r) }
    }

    pub fn for_kind(kind: PriorKind, r: usize) -> Self {
        match kind {
            PriorKind::Lasso => Self::lasso(r),
            PriorKind::Horseshoe => Self::horseshoe(r),
        }
    }

    pub fn kind(&self) -> PriorKind {
        match self.scales {
            ScalePrior::Lasso { .. } => PriorKind::Lasso,
            ScalePrior::Horseshoe => PriorKind::Horseshoe,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.r == 0 {
            return bad("latent dimension R must be positive".into());
        }
        if !(self.nu > self.r as f64 - 1.0) {
            return bad(format!("nu = {} must exceed R - 1 = {}", self.nu, self.r - 1));
        }
        if !(self.a_delta > 0.0 && self.b_delta > 0.0) {
            return bad(format!("a_delta = {}, b_delta = {} must be positive", self.a_delta, self.b_delta));
        }
        if !(self.eta > 1.0) {
            return bad(format!("eta = {} must exceed 1", self.eta));
        }
        if let ScalePrior::Lasso { zeta, iota } = self.scales {
            if !(zeta > 0.0 && iota > 0.0) {
                return bad(format!("zeta = {zeta}, iota = {iota} must be positive"));
            }
        }
        if let Some(v) = self.mu_prior_variance {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("intercept prior variance {v} must be positive"));
            }
        }
        Ok(())
    }
}
