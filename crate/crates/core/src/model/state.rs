use nalgebra::{Cholesky, DMatrix};
use rand::Rng;

use super::{PriorSpec, ScalePrior};
use crate::dist::{logistic, sample_pg1, std_normal};
use crate::error::{Error, Result};
use crate::network::{edge_count, edge_pairs, NetworkDataset};

/// Scale parameters specific to each prior.
#[derive(Debug, Clone, PartialEq)]
pub enum ScaleState {
    Lasso {
        theta2: f64,
    },
    Horseshoe {
        /// Global variance `sigma^2`.
        sigma2: f64,
        /// Per-edge auxiliaries for the local half-Cauchy scales.
        nu_aux: Vec<f64>,
        /// Auxiliary for the global half-Cauchy scale.
        sigma_aux: f64,
    },
}

/// One state of the Gibbs chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub mu: f64,
    pub gamma: Vec<f64>,
    /// `V x R` latent positions; row `k` is zero exactly when `xi[k]` is false.
    pub u: DMatrix<f64>,
    pub xi: Vec<bool>,
    pub lambda: Vec<bool>,
    pub pi: Vec<f64>,
    /// Local variances `s_{kl}^2`, canonical edge order.
    pub s2: Vec<f64>,
    pub delta: f64,
    pub q: DMatrix<f64>,
    pub omega: Vec<f64>,
    pub scales: ScaleState,
}

/// `W_{kl} = u_k' diag(lambda) u_l` in canonical edge order.
pub fn low_rank_mean(u: &DMatrix<f64>, lambda: &[bool]) -> Vec<f64> {
    let v = u.nrows();
    let active: Vec<usize> = lambda.iter().enumerate().filter(|(_, &on)| on).map(|(r, _)| r).collect();
    edge_pairs(v)
        .map(|(k, l)| active.iter().map(|&r| u[(k, r)] * u[(l, r)]).sum())
        .collect()
}

impl ChainState {
    /// Starting point: `mu` = logit of the label mean, `gamma = 0`, every node
    /// active with `u_k ~ N(0, 0.1 I)`, every rank on with `pi_r = 0.5`,
    /// unit scales, `Delta = 0.5`, `Q = I`, and `omega_i ~ PG(1, mu)`.
    pub fn initial<R: Rng + ?Sized>(data: &NetworkDataset, prior: &PriorSpec, rng: &mut R) -> Self {
        let v = data.node_count();
        let q = edge_count(v);
        let r = prior.r;
        let n = data.len();
        let mu = if n == 0 {
            0.0
        } else {
            let ybar = data.labels().iter().map(|&y| y as f64).sum::<f64>() / n as f64;
            let p = ybar.clamp(0.5 / n as f64, 1.0 - 0.5 / n as f64);
            (p / (1.0 - p)).ln()
        };
        let sd = 0.1f64.sqrt();
        let u = DMatrix::from_fn(v, r, |_, _| sd * std_normal(rng));
        let omega = (0..n).map(|_| sample_pg1(mu, rng)).collect();
        let scales = match prior.scales {
            ScalePrior::Lasso { .. } => ScaleState::Lasso { theta2: 1.0 },
            ScalePrior::Horseshoe => ScaleState::Horseshoe { sigma2: 1.0, nu_aux: vec![1.0; q], sigma_aux: 1.0 },
        };
        Self {
            mu,
            gamma: vec![0.0; q],
            u,
            xi: vec![true; v],
            lambda: vec![true; r],
            pi: vec![0.5; r],
            s2: vec![1.0; q],
            delta: 0.5,
            q: DMatrix::identity(r, r),
            omega,
            scales,
        }
    }

    pub fn node_count(&self) -> usize {
        self.u.nrows()
    }

    pub fn rank(&self) -> usize {
        self.u.ncols()
    }

    /// `sigma^2` for the Horseshoe prior, 1 for the Lasso prior.
    pub fn global_variance(&self) -> f64 {
        match &self.scales {
            ScaleState::Lasso { .. } => 1.0,
            ScaleState::Horseshoe { sigma2, .. } => *sigma2,
        }
    }

    /// Diagonal of the conditional prior covariance `D` of `gamma`.
    pub fn prior_variances(&self) -> Vec<f64> {
        let g = self.global_variance();
        self.s2.iter().map(|s| g * s).collect()
    }

    pub fn low_rank_mean(&self) -> Vec<f64> {
        low_rank_mean(&self.u, &self.lambda)
    }

    pub fn active_nodes(&self) -> usize {
        self.xi.iter().filter(|&&x| x).count()
    }

    pub fn effective_rank(&self) -> usize {
        self.lambda.iter().filter(|&&x| x).count()
    }

    /// Checks the structural invariants that every sweep must preserve.
    pub fn check_invariants(&self) -> Result<()> {
        for (k, &on) in self.xi.iter().enumerate() {
            let zero_row = self.u.row(k).iter().all(|&x| x == 0.0);
            if on == zero_row {
                return Err(Error::InvalidParameter(format!(
                    "node {}: indicator {} but latent row {}",
                    k + 1,
                    on,
                    if zero_row { "zero" } else { "nonzero" }
                )));
            }
        }
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} = {x} is not a positive finite value")))
            }
        };
        for &s in &self.s2 {
            positive("s2", s)?;
        }
        for &w in &self.omega {
            positive("omega", w)?;
        }
        match &self.scales {
            ScaleState::Lasso { theta2 } => positive("theta2", *theta2)?,
            ScaleState::Horseshoe { sigma2, nu_aux, sigma_aux } => {
                positive("sigma2", *sigma2)?;
                positive("sigma_aux", *sigma_aux)?;
                for &x in nu_aux {
                    positive("nu_aux", x)?;
                }
            }
        }
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(Error::InvalidParameter(format!("Delta = {} outside [0, 1]", self.delta)));
        }
        if (&self.q - self.q.transpose()).amax() > 1e-10 * (1.0 + self.q.amax()) || Cholesky::new(self.q.clone()).is_none() {
            return Err(Error::InvalidParameter("Q is not symmetric positive-definite".into()));
        }
        if !self.mu.is_finite() || self.gamma.iter().any(|g| !g.is_finite()) {
            return Err(Error::InvalidParameter("non-finite intercept or edge coefficient".into()));
        }
        Ok(())
    }

    /// Log joint density of parameters and labels, up to an additive
    /// constant, with the Polya-Gamma auxiliaries integrated out.
    pub fn log_posterior(&self, data: &NetworkDataset, prior: &PriorSpec) -> f64 {
        let x = data.design();
        let mut lp = 0.0;
        for (i, &y) in data.labels().iter().enumerate() {
            let psi = self.mu + x.row(i).iter().zip(&self.gamma).map(|(a, g)| a * g).sum::<f64>();
            let p = logistic(psi).clamp(f64::MIN_POSITIVE, 1.0);
            let q = logistic(-psi).clamp(f64::MIN_POSITIVE, 1.0);
            lp += if y == 1 { p.ln() } else { q.ln() };
        }
        if let Some(v) = prior.mu_prior_variance {
            lp -= 0.5 * self.mu * self.mu / v;
        }
        let w = self.low_rank_mean();
        for ((g, m), d) in self.gamma.iter().zip(&w).zip(self.prior_variances()) {
            lp += -0.5 * d.ln() - 0.5 * (g - m) * (g - m) / d;
        }
        let r = self.rank() as f64;
        if let Some(chol) = Cholesky::new(self.q.clone()) {
            let log_det_q = 2.0 * chol.l().diagonal().iter().map(|x| x.ln()).sum::<f64>();
            let qinv = chol.inverse();
            for k in 0..self.node_count() {
                if self.xi[k] {
                    let uk = self.u.row(k).transpose();
                    lp += -0.5 * log_det_q - 0.5 * (uk.transpose() * &qinv * &uk)[(0, 0)];
                }
            }
            lp += -0.5 * (prior.nu + r + 1.0) * log_det_q - 0.5 * qinv.trace();
        } else {
            return f64::NEG_INFINITY;
        }
        let m = self.active_nodes() as f64;
        let v = self.node_count() as f64;
        lp += (prior.a_delta - 1.0 + m) * self.delta.ln() + (prior.b_delta - 1.0 + v - m) * (1.0 - self.delta).ln();
        for (i, (&on, &p)) in self.lambda.iter().zip(&self.pi).enumerate() {
            lp += if on { p.ln() } else { (1.0 - p).ln() };
            lp += (((i + 1) as f64).powf(prior.eta) - 1.0) * (1.0 - p).ln();
        }
        match (&self.scales, prior.scales) {
            (ScaleState::Lasso { theta2 }, ScalePrior::Lasso { zeta, iota }) => {
                let q = self.s2.len() as f64;
                lp += q * (0.5 * theta2).ln() - 0.5 * theta2 * self.s2.iter().sum::<f64>();
                lp += (zeta - 1.0) * theta2.ln() - iota * theta2;
            }
            (ScaleState::Horseshoe { sigma2, nu_aux, sigma_aux }, ScalePrior::Horseshoe) => {
                for (s, nu) in self.s2.iter().zip(nu_aux) {
                    lp += -0.5 * nu.ln() - 1.5 * s.ln() - 1.0 / (nu * s);
                    lp += -1.5 * nu.ln() - 1.0 / nu;
                }
                lp += -0.5 * sigma_aux.ln() - 1.5 * sigma2.ln() - 1.0 / (sigma_aux * sigma2);
                lp += -1.5 * sigma_aux.ln() - 1.0 / sigma_aux;
            }
            _ => return f64::NAN,
        }
        lp
    }
}
