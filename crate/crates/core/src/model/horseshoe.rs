//! Scale updates for the network Horseshoe prior.
//!
//! Half-Cauchy scales are written as inverse-gamma mixtures,
//! `s^2 | a ~ IG(1/2, 1/a)`, `a ~ IG(1/2, 1)`, which makes every
//! conditional inverse-gamma.

use rand::Rng;

use super::{ChainState, ScaleState};
use crate::dist::sample_inverse_gamma;
use crate::error::{Error, Result};

fn not_horseshoe() -> Error {
    Error::InvalidParameter("Horseshoe scale update called on a Lasso state".into())
}

/// For every edge: `s^2 ~ IG(1, 1/nu + (gamma - W)^2 / (2 sigma^2))`, then
/// `nu ~ IG(1, 1 + 1/s^2)`.
pub fn update_local_scales_hs<R: Rng + ?Sized>(state: &mut ChainState, rng: &mut R) -> Result<()> {
    let w = state.low_rank_mean();
    let ScaleState::Horseshoe { sigma2, nu_aux, .. } = &mut state.scales else {
        return Err(not_horseshoe());
    };
    for (j, s) in state.s2.iter_mut().enumerate() {
        let r = state.gamma[j] - w[j];
        *s = sample_inverse_gamma(1.0, 1.0 / nu_aux[j] + r * r / (2.0 * *sigma2), rng)?;
        nu_aux[j] = sample_inverse_gamma(1.0, 1.0 + 1.0 / *s, rng)?;
    }
    Ok(())
}

/// `sigma^2 ~ IG((q + 1) / 2, 1/sigma_aux + sum (gamma - W)^2 / (2 s^2))`, then
/// `sigma_aux ~ IG(1, 1 + 1/sigma^2)`.
pub fn update_global_scale_hs<R: Rng + ?Sized>(state: &mut ChainState, rng: &mut R) -> Result<()> {
    let w = state.low_rank_mean();
    let q = state.s2.len() as f64;
    let quad: f64 = state
        .gamma
        .iter()
        .zip(&w)
        .zip(&state.s2)
        .map(|((g, m), s)| (g - m) * (g - m) / (2.0 * s))
        .sum();
    let ScaleState::Horseshoe { sigma2, sigma_aux, .. } = &mut state.scales else {
        return Err(not_horseshoe());
    };
    *sigma2 = sample_inverse_gamma(0.5 * (q + 1.0), 1.0 / *sigma_aux + quad, rng)?;
    *sigma_aux = sample_inverse_gamma(1.0, 1.0 + 1.0 / *sigma2, rng)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::std_normal;
    use crate::dist::testutil::mean_se;
    use crate::model::PriorSpec;
    use crate::network::NetworkDataset;
    use crate::rng::RngStream;
    use std::f64::consts::PI;

    fn state(v: usize) -> ChainState {
        let data = NetworkDataset::empty(v);
        let mut s = ChainState::initial(&data, &PriorSpec::horseshoe(1), &mut RngStream::new(0, 0));
        s.u.fill(0.0);
        s.xi = vec![false; v];
        s
    }

    fn half_cauchy_cdf(x: f64) -> f64 {
        2.0 / PI * x.atan()
    }

    fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn inverse_gamma_mixture_is_half_cauchy() {
        let mut rng = RngStream::new(1, 0);
        let n = 20_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| {
                let a = sample_inverse_gamma(0.5, 1.0, &mut rng).unwrap();
                sample_inverse_gamma(0.5, 1.0 / a, &mut rng).unwrap().sqrt()
            })
            .collect();
        let d = ks_statistic(xs, half_cauchy_cdf);
        // 1% critical value
        assert!(d < 1.63 / (n as f64).sqrt(), "KS {d}");
    }

    #[test]
    fn local_conditionals_leave_half_cauchy_invariant() {
        // Gibbs on (gamma, s^2, nu) with sigma^2 = 1 and W = 0 targets the
        // prior, so the retained s draws are half-Cauchy
        let mut st = state(2);
        let mut rng = RngStream::new(2, 0);
        let mut xs = Vec::new();
        for it in 0..200_000 {
            st.gamma[0] = st.s2[0].sqrt() * std_normal(&mut rng);
            update_local_scales_hs(&mut st, &mut rng).unwrap();
            if it % 20 == 0 {
                xs.push(st.s2[0].sqrt());
            }
        }
        let below = |t: f64| xs.iter().filter(|&&x| x < t).count() as f64 / xs.len() as f64;
        for t in [0.3, 1.0, 3.0] {
            assert!((below(t) - half_cauchy_cdf(t)).abs() < 0.025, "P(s < {t}) = {}", below(t));
        }
    }

    #[test]
    fn global_conditionals_leave_half_cauchy_invariant() {
        let mut st = state(3);
        let mut rng = RngStream::new(3, 0);
        let mut xs = Vec::new();
        for it in 0..200_000 {
            let sigma2 = st.global_variance();
            for j in 0..3 {
                st.gamma[j] = (sigma2 * st.s2[j]).sqrt() * std_normal(&mut rng);
            }
            update_global_scale_hs(&mut st, &mut rng).unwrap();
            if it % 20 == 0 {
                xs.push(st.global_variance().sqrt());
            }
        }
        let below = |t: f64| xs.iter().filter(|&&x| x < t).count() as f64 / xs.len() as f64;
        for t in [0.3, 1.0, 3.0] {
            assert!((below(t) - half_cauchy_cdf(t)).abs() < 0.025, "P(sigma < {t}) = {}", below(t));
        }
    }

    #[test]
    fn local_scale_conditional_mean() {
        // nu = 1, residual^2 = 2, sigma^2 = 1: s^2 ~ IG(1, 2) has no mean, but
        // 1 / s^2 ~ Gamma(1, 2) does
        let mut st = state(2);
        st.gamma = vec![2f64.sqrt()];
        let mut rng = RngStream::new(4, 0);
        let xs: Vec<f64> = (0..60_000)
            .map(|_| {
                if let ScaleState::Horseshoe { nu_aux, .. } = &mut st.scales {
                    nu_aux[0] = 1.0;
                }
                update_local_scales_hs(&mut st, &mut rng).unwrap();
                1.0 / st.s2[0]
            })
            .collect();
        let (m, se) = mean_se(&xs);
        assert!((m - 0.5).abs() < 3.0 * se);
    }

    #[test]
    fn global_conditional_with_zero_residuals() {
        // q = 3, residuals zero, sigma_aux = 1: IG(2, 1) with mean 1
        let mut st = state(3);
        st.gamma = vec![0.0; 3];
        let mut rng = RngStream::new(5, 0);
        let xs: Vec<f64> = (0..60_000)
            .map(|_| {
                if let ScaleState::Horseshoe { sigma_aux, .. } = &mut st.scales {
                    *sigma_aux = 1.0;
                }
                update_global_scale_hs(&mut st, &mut rng).unwrap();
                st.global_variance()
            })
            .collect();
        let (m, se) = mean_se(&xs);
        assert!((m - 1.0).abs() < 3.0 * se, "{m}");
    }

    #[test]
    fn lasso_state_is_rejected() {
        let data = NetworkDataset::empty(2);
        let mut st = ChainState::initial(&data, &PriorSpec::lasso(1), &mut RngStream::new(0, 0));
        let mut rng = RngStream::new(0, 0);
        assert!(update_local_scales_hs(&mut st, &mut rng).is_err());
        assert!(update_global_scale_hs(&mut st, &mut rng).is_err());
    }
}
