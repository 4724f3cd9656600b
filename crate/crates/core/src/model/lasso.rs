//! Scale updates for the network Lasso prior (`sigma = 1`).

use rand::Rng;

use super::{ChainState, PriorSpec, ScalePrior, ScaleState};
use crate::dist::{sample_gamma, sample_gig, GigParams};
use crate::error::{Error, Result};

/// `s_{kl}^2 ~ GIG(1/2, (gamma_{kl} - W_{kl})^2, theta^2)` for every edge,
/// then `theta^2 ~ Gamma(zeta + q, iota + sum s^2 / 2)`.
pub fn update_local_scales<R: Rng + ?Sized>(state: &mut ChainState, prior: &PriorSpec, rng: &mut R) -> Result<()> {
    let ScalePrior::Lasso { zeta, iota } = prior.scales else {
        return Err(Error::InvalidParameter("Lasso scale update called with a Horseshoe prior".into()));
    };
    let ScaleState::Lasso { theta2 } = state.scales else {
        return Err(Error::InvalidParameter("Lasso scale update called on a Horseshoe state".into()));
    };
    let w = state.low_rank_mean();
    for (j, s) in state.s2.iter_mut().enumerate() {
        let r = state.gamma[j] - w[j];
        *s = sample_gig(GigParams::new(0.5, r * r, theta2)?, rng)?;
    }
    let q = state.s2.len() as f64;
    let total: f64 = state.s2.iter().sum();
    state.scales = ScaleState::Lasso { theta2: sample_gamma(zeta + q, iota + 0.5 * total, rng)? };
    Ok(())
}
