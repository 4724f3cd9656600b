//! Forward simulation from the prior and the likelihood, used to check the
//! sampler against the joint distribution.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::{ChainState, PriorSpec, ScalePrior, ScaleState};
use crate::dist::{
    logistic, sample_bernoulli_clamped, sample_beta, sample_gamma, sample_inverse_gamma, sample_inverse_wishart,
    sample_mvn, std_normal,
};
use crate::error::{Error, Result};
use crate::network::{edge_count, NetworkDataset};

/// Draws every parameter from its prior. Requires a proper intercept prior.
/// The Polya-Gamma auxiliaries are left empty; they are data-dependent and
/// the first sweep draws them.
pub fn sample_prior_state<R: Rng + ?Sized>(nodes: usize, prior: &PriorSpec, rng: &mut R) -> Result<ChainState> {
    prior.validate()?;
    let mu_var = prior
        .mu_prior_variance
        .ok_or_else(|| Error::InvalidParameter("drawing from the prior needs a proper intercept prior".into()))?;
    let r = prior.r;
    let q_edges = edge_count(nodes);

    let q = sample_inverse_wishart(prior.nu, &DMatrix::identity(r, r), rng)?;
    let delta = sample_beta(prior.a_delta, prior.b_delta, rng)?;
    let mut u = DMatrix::zeros(nodes, r);
    let mut xi = vec![false; nodes];
    let zero = DVector::zeros(r);
    for k in 0..nodes {
        if sample_bernoulli_clamped(delta, rng) {
            xi[k] = true;
            u.row_mut(k).copy_from(&sample_mvn(&zero, &q, rng)?.transpose());
        }
    }
    let mut pi = Vec::with_capacity(r);
    let mut lambda = Vec::with_capacity(r);
    for i in 0..r {
        let p = sample_beta(1.0, ((i + 1) as f64).powf(prior.eta), rng)?;
        pi.push(p);
        lambda.push(sample_bernoulli_clamped(p, rng));
    }

    let (s2, scales) = match prior.scales {
        ScalePrior::Lasso { zeta, iota } => {
            let theta2 = sample_gamma(zeta, iota, rng)?;
            let s2 = (0..q_edges).map(|_| sample_gamma(1.0, 0.5 * theta2, rng)).collect::<Result<Vec<_>>>()?;
            (s2, ScaleState::Lasso { theta2 })
        }
        ScalePrior::Horseshoe => {
            let sigma_aux = sample_inverse_gamma(0.5, 1.0, rng)?;
            let sigma2 = sample_inverse_gamma(0.5, 1.0 / sigma_aux, rng)?;
            let mut nu_aux = Vec::with_capacity(q_edges);
            let mut s2 = Vec::with_capacity(q_edges);
            for _ in 0..q_edges {
                let a = sample_inverse_gamma(0.5, 1.0, rng)?;
                nu_aux.push(a);
                s2.push(sample_inverse_gamma(0.5, 1.0 / a, rng)?);
            }
            (s2, ScaleState::Horseshoe { sigma2, nu_aux, sigma_aux })
        }
    };

    let mut state = ChainState {
        mu: mu_var.sqrt() * std_normal(rng),
        gamma: vec![0.0; q_edges],
        u,
        xi,
        lambda,
        pi,
        s2,
        delta,
        q,
        omega: Vec::new(),
        scales,
    };
    let w = state.low_rank_mean();
    let d = state.prior_variances();
    state.gamma = w.iter().zip(&d).map(|(m, v)| m + v.sqrt() * std_normal(rng)).collect();
    Ok(state)
}

/// Draws labels `y_i ~ Ber(logistic(mu + x_i' gamma))` for the networks in
/// `data`.
pub fn sample_labels<R: Rng + ?Sized>(state: &ChainState, data: &NetworkDataset, rng: &mut R) -> Vec<u8> {
    let psi = data.design() * DVector::from_column_slice(&state.gamma);
    psi.iter().map(|&p| u8::from(rng.random::<f64>() < logistic(state.mu + p))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::testutil::mean_se;
    use crate::rng::RngStream;

    #[test]
    fn needs_proper_intercept_prior() {
        let mut rng = RngStream::new(0, 0);
        assert!(sample_prior_state(4, &PriorSpec::lasso(2), &mut rng).is_err());
        let prior = PriorSpec { mu_prior_variance: Some(1.0), ..PriorSpec::horseshoe(2) };
        let s = sample_prior_state(4, &prior, &mut rng).unwrap();
        s.check_invariants().unwrap();
    }

    #[test]
    fn prior_moments() {
        let prior = PriorSpec { mu_prior_variance: Some(4.0), ..PriorSpec::lasso(2) };
        let mut rng = RngStream::new(1, 0);
        let draws: Vec<ChainState> = (0..20_000).map(|_| sample_prior_state(4, &prior, &mut rng).unwrap()).collect();
        let (m, se) = mean_se(&draws.iter().map(|s| s.delta).collect::<Vec<_>>());
        assert!((m - 0.5).abs() < 3.0 * se);
        let mus: Vec<f64> = draws.iter().map(|s| s.mu).collect();
        assert!((crate::dist::testutil::variance(&mus) - 4.0).abs() < 0.15);
        // pi_1 ~ Beta(1, 1), pi_2 ~ Beta(1, 4)
        let (m, se) = mean_se(&draws.iter().map(|s| f64::from(u8::from(s.lambda[1]))).collect::<Vec<_>>());
        assert!((m - 0.2).abs() < 3.0 * se);
        // theta^2 ~ Gamma(1, 1)
        let (m, se) = mean_se(
            &draws
                .iter()
                .map(|s| match s.scales {
                    ScaleState::Lasso { theta2 } => theta2,
                    _ => unreachable!(),
                })
                .collect::<Vec<_>>(),
        );
        assert!((m - 1.0).abs() < 3.0 * se);
    }

    #[test]
    fn labels_follow_logistic() {
        let prior = PriorSpec { mu_prior_variance: Some(1.0), ..PriorSpec::lasso(1) };
        let mut rng = RngStream::new(2, 0);
        let mut st = sample_prior_state(3, &prior, &mut rng).unwrap();
        st.mu = 2.0;
        st.gamma = vec![0.0; 3];
        let data = NetworkDataset::from_design(3, DMatrix::zeros(20_000, 3), vec![0; 20_000]).unwrap();
        let y = sample_labels(&st, &data, &mut rng);
        let frac = y.iter().map(|&v| v as f64).sum::<f64>() / y.len() as f64;
        assert!((frac - logistic(2.0)).abs() < 0.01);
    }
}
