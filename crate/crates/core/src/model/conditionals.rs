//! Full conditional updates shared by both priors.
//!
//! Prior-specific behaviour enters only through `D = diag(sigma^2 s^2)`
//! (see [`ChainState::prior_variances`]) and the scale updates in the
//! `lasso` and `horseshoe` modules.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::chain::GammaRoute;
use super::gaussian::{sample_gamma_dense, sample_gamma_low_rank};
use super::{ChainState, PriorSpec};
use crate::dist::{
    cholesky_jittered, log_det_from_cholesky, logistic, sample_bernoulli_clamped, sample_beta, sample_canonical,
    sample_inverse_wishart, sample_pg1, std_normal,
};
use crate::error::{Error, Result};
use crate::network::{edge_index, edge_pairs, NetworkDataset};

fn linear_predictors(state: &ChainState, data: &NetworkDataset) -> DVector<f64> {
    let g = DVector::from_column_slice(&state.gamma);
    let mut psi = data.design() * g;
    psi.add_scalar_mut(state.mu);
    psi
}

fn kappa(data: &NetworkDataset) -> Vec<f64> {
    data.labels().iter().map(|&y| y as f64 - 0.5).collect()
}

/// `omega_i ~ PG(1, mu + x_i' gamma)`.
pub fn update_omega<R: Rng + ?Sized>(state: &mut ChainState, data: &NetworkDataset, rng: &mut R) -> Result<()> {
    let psi = linear_predictors(state, data);
    if let Some(bad) = psi.iter().find(|p| !p.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite linear predictor {bad}")));
    }
    state.omega.clear();
    state.omega.extend(psi.iter().map(|&c| sample_pg1(c, rng)));
    Ok(())
}

/// `mu ~ N(1' Omega (t - X gamma) / 1' Omega 1, 1 / 1' Omega 1)` with
/// `t_i = (y_i - 1/2) / omega_i`, plus the optional proper-prior term.
///
/// Under the flat prior with no observations the conditional is improper and
/// `mu` is left unchanged.
pub fn update_mu<R: Rng + ?Sized>(
    state: &mut ChainState,
    data: &NetworkDataset,
    prior: &PriorSpec,
    rng: &mut R,
) -> Result<()> {
    let xg = data.design() * DVector::from_column_slice(&state.gamma);
    let mut precision: f64 = state.omega.iter().sum();
    let linear: f64 = data
        .labels()
        .iter()
        .zip(&state.omega)
        .zip(xg.iter())
        .map(|((&y, &om), &xb)| (y as f64 - 0.5) - om * xb)
        .sum();
    if let Some(v) = prior.mu_prior_variance {
        precision += 1.0 / v;
    } else if data.is_empty() {
        return Ok(());
    }
    state.mu = linear / precision + std_normal(rng) / precision.sqrt();
    Ok(())
}

/// `gamma ~ N(mu_gamma, Sigma_gamma)`; see the `gaussian` module for the two
/// routes.
pub fn update_gamma<R: Rng + ?Sized>(
    state: &mut ChainState,
    data: &NetworkDataset,
    route: GammaRoute,
    rng: &mut R,
) -> Result<()> {
    let d = state.prior_variances();
    let w = state.low_rank_mean();
    let k = kappa(data);
    let x = data.design();
    state.gamma = if route.use_dense(data.len(), data.edge_count()) {
        sample_gamma_dense(x, &state.omega, &k, state.mu, &d, &w, rng)?
    } else {
        sample_gamma_low_rank(x, &state.omega, &k, state.mu, &d, &w, rng)?
    };
    Ok(())
}

/// Spike-and-slab conditional of one node's latent position.
#[derive(Debug, Clone)]
pub struct NodeConditional {
    /// Probability of the spike, `w_{u_k}`.
    pub spike_weight: f64,
    /// Log odds of the slab against the spike.
    pub slab_log_odds: f64,
    /// Slab mean `m_{u_k}`.
    pub mean: DVector<f64>,
    /// Slab covariance `Sigma_{u_k}`.
    pub cov: DMatrix<f64>,
    precision: DMatrix<f64>,
    linear: DVector<f64>,
}

struct QFactor {
    inverse: DMatrix<f64>,
    log_det: f64,
}

fn factor_q(q: &DMatrix<f64>) -> Result<QFactor> {
    let c = cholesky_jittered(q.clone())?;
    Ok(QFactor { log_det: log_det_from_cholesky(&c.factor), inverse: c.factor.inverse() })
}

fn node_conditional_with(state: &ChainState, k: usize, d: &[f64], qf: &QFactor) -> Result<NodeConditional> {
    let v = state.node_count();
    let r = state.rank();
    // Sigma^{-1} = Q^{-1} + U*' H^{-1} U*,  linear = U*' H^{-1} gamma_k
    let mut precision = qf.inverse.clone();
    let mut linear = DVector::zeros(r);
    let lam: Vec<f64> = state.lambda.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let mut urow = vec![0.0; r];
    for j in (0..v).filter(|&j| j != k) {
        let e = if j < k { edge_index(v, j, k) } else { edge_index(v, k, j) };
        let h = d[e];
        let g = state.gamma[e];
        for a in 0..r {
            urow[a] = lam[a] * state.u[(j, a)];
        }
        for a in 0..r {
            if urow[a] == 0.0 {
                continue;
            }
            linear[a] += urow[a] * g / h;
            for b in 0..r {
                precision[(a, b)] += urow[a] * urow[b] / h;
            }
        }
    }
    let chol = cholesky_jittered(precision.clone())
        .map_err(|e| Error::Factorization(format!("latent position of node {}: {e}", k + 1)))?;
    let log_det_prec = log_det_from_cholesky(&chol.factor);
    let cov = chol.factor.inverse();
    let mean = &cov * &linear;
    // log N(g | 0, H + U* Q U*') - log N(g | 0, H)
    //   = 1/2 (m' Sigma^{-1} m - log det Q - log det Sigma^{-1})
    let quad = linear.dot(&mean);
    let log_bf = 0.5 * (quad - qf.log_det - log_det_prec);
    let slab_log_odds = state.delta.ln() - (1.0 - state.delta).ln() + log_bf;
    Ok(NodeConditional { spike_weight: logistic(-slab_log_odds), slab_log_odds, mean, cov, precision, linear })
}

/// The conditional of `(xi_k, u_k)` given everything else.
pub fn node_conditional(state: &ChainState, k: usize) -> Result<NodeConditional> {
    let qf = factor_q(&state.q)?;
    node_conditional_with(state, k, &state.prior_variances(), &qf)
}

/// Joint spike-and-slab draws of `(xi_k, u_k)` for `k = 1..V` in order.
pub fn update_latent_positions<R: Rng + ?Sized>(state: &mut ChainState, rng: &mut R) -> Result<()> {
    let qf = factor_q(&state.q)?;
    let d = state.prior_variances();
    for k in 0..state.node_count() {
        let cond = node_conditional_with(state, k, &d, &qf)?;
        let on = sample_bernoulli_clamped(1.0 - cond.spike_weight, rng);
        state.xi[k] = on;
        if on {
            let draw = sample_canonical(cond.precision, &cond.linear, rng)
                .map_err(|e| Error::Factorization(format!("latent position of node {}: {e}", k + 1)))?;
            // a draw that is exactly zero would break the xi <=> u invariant
            let draw = if draw.iter().all(|&x| x == 0.0) { DVector::from_element(draw.len(), f64::MIN_POSITIVE) } else { draw };
            state.u.row_mut(k).copy_from(&draw.transpose());
        } else {
            state.u.row_mut(k).fill(0.0);
        }
    }
    Ok(())
}

/// `Delta ~ Beta(a_Delta + sum xi, b_Delta + sum (1 - xi))`.
pub fn update_node_sparsity<R: Rng + ?Sized>(state: &mut ChainState, prior: &PriorSpec, rng: &mut R) -> Result<()> {
    let m = state.active_nodes() as f64;
    let v = state.node_count() as f64;
    state.delta = sample_beta(prior.a_delta + m, prior.b_delta + v - m, rng)?;
    Ok(())
}

/// `Q ~ IW(nu + #active, I + sum_active u_k u_k')`.
pub fn update_q<R: Rng + ?Sized>(state: &mut ChainState, prior: &PriorSpec, rng: &mut R) -> Result<()> {
    let r = state.rank();
    let mut scale = DMatrix::identity(r, r);
    let mut active = 0usize;
    for k in 0..state.node_count() {
        if state.xi[k] {
            let uk = state.u.row(k);
            scale += uk.transpose() * uk;
            active += 1;
        }
    }
    state.q = sample_inverse_wishart(prior.nu + active as f64, &scale, rng)?;
    Ok(())
}

/// Log posterior odds of `lambda_r = 1` against `lambda_r = 0`, given the
/// other indicators. `w_without` is the low-rank mean with rank `r` switched
/// off.
fn rank_log_odds_with(state: &ChainState, r: usize, d: &[f64], w_without: &[f64]) -> f64 {
    let v = state.node_count();
    let mut ll = 0.0;
    for (e, (k, l)) in edge_pairs(v).enumerate() {
        let c = state.u[(k, r)] * state.u[(l, r)];
        if c != 0.0 {
            let resid = state.gamma[e] - w_without[e];
            // log N(g | W0 + c, d) - log N(g | W0, d)
            ll += (c * resid - 0.5 * c * c) / d[e];
        }
    }
    let pi = state.pi[r];
    pi.ln() - (1.0 - pi).ln() + ll
}

/// Log odds of `lambda_r = 1` given everything else (0-based `r`).
pub fn rank_log_odds(state: &ChainState, r: usize) -> f64 {
    let mut lam = state.lambda.clone();
    lam[r] = false;
    let w0 = super::state::low_rank_mean(&state.u, &lam);
    rank_log_odds_with(state, r, &state.prior_variances(), &w0)
}

/// For `r = 1..R` in order: `lambda_r ~ Ber(p_r)`, then
/// `pi_r ~ Beta(lambda_r + 1, 1 - lambda_r + r^eta)`.
pub fn update_rank_indicators<R: Rng + ?Sized>(state: &mut ChainState, prior: &PriorSpec, rng: &mut R) -> Result<()> {
    let d = state.prior_variances();
    let v = state.node_count();
    let mut w = state.low_rank_mean();
    for r in 0..state.rank() {
        if state.lambda[r] {
            for (e, (k, l)) in edge_pairs(v).enumerate() {
                w[e] -= state.u[(k, r)] * state.u[(l, r)];
            }
        }
        let odds = rank_log_odds_with(state, r, &d, &w);
        let on = sample_bernoulli_clamped(logistic(odds), rng);
        state.lambda[r] = on;
        if on {
            for (e, (k, l)) in edge_pairs(v).enumerate() {
                w[e] += state.u[(k, r)] * state.u[(l, r)];
            }
        }
        let lam = if on { 1.0 } else { 0.0 };
        let penalty = ((r + 1) as f64).powf(prior.eta);
        state.pi[r] = sample_beta(lam + 1.0, 1.0 - lam + penalty, rng)?;
    }
    Ok(())
}
