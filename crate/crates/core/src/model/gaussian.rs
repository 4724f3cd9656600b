//! Draws of the edge coefficients from their Gaussian full conditional
//!
//! ```text
//! gamma | - ~ N(P^{-1} h, P^{-1}),  P = X' Omega X + D^{-1},
//!                                   h = X' (kappa - omega mu) + D^{-1} W
//! ```
//!
//! with `kappa_i = y_i - 1/2`. Two routes produce the same law: a dense
//! `q x q` Cholesky of `P`, and the auxiliary-variable algorithm that only
//! factors an `n x n` system, which wins when `q >> n`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::dist::{cholesky_jittered, sample_canonical, std_normal};
use crate::error::{Error, Result};

fn check_dims(x: &DMatrix<f64>, omega: &[f64], kappa: &[f64], d: &[f64], w: &[f64]) -> Result<()> {
    let (n, q) = x.shape();
    if omega.len() != n || kappa.len() != n || d.len() != q || w.len() != q {
        return Err(Error::Dimension(format!(
            "edge-coefficient update: design {n}x{q}, omega {}, kappa {}, D {}, W {}",
            omega.len(),
            kappa.len(),
            d.len(),
            w.len()
        )));
    }
    Ok(())
}

fn scaled_rows(x: &DMatrix<f64>, omega: &[f64]) -> DMatrix<f64> {
    let mut xs = x.clone();
    for (i, &om) in omega.iter().enumerate() {
        xs.row_mut(i).scale_mut(om.sqrt());
    }
    xs
}

fn precision_and_linear(
    x: &DMatrix<f64>,
    omega: &[f64],
    kappa: &[f64],
    mu: f64,
    d: &[f64],
    w: &[f64],
) -> (DMatrix<f64>, DVector<f64>) {
    let xs = scaled_rows(x, omega);
    let mut p = xs.transpose() * &xs;
    for (j, &dj) in d.iter().enumerate() {
        p[(j, j)] += 1.0 / dj;
    }
    let resid = DVector::from_iterator(kappa.len(), kappa.iter().zip(omega).map(|(k, om)| k - om * mu));
    let mut h = x.tr_mul(&resid);
    for j in 0..d.len() {
        h[j] += w[j] / d[j];
    }
    (p, h)
}

/// Exact conditional mean and covariance by dense inversion. Intended for
/// checks on small problems.
pub fn gamma_posterior_moments(
    x: &DMatrix<f64>,
    omega: &[f64],
    kappa: &[f64],
    mu: f64,
    d: &[f64],
    w: &[f64],
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    check_dims(x, omega, kappa, d, w)?;
    let (p, h) = precision_and_linear(x, omega, kappa, mu, d, w);
    let cov = cholesky_jittered(p)?.factor.inverse();
    let mean = &cov * h;
    Ok((mean, cov))
}

/// Dense route: Cholesky of the `q x q` precision.
pub fn sample_gamma_dense<R: Rng + ?Sized>(
    x: &DMatrix<f64>,
    omega: &[f64],
    kappa: &[f64],
    mu: f64,
    d: &[f64],
    w: &[f64],
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_dims(x, omega, kappa, d, w)?;
    let (p, h) = precision_and_linear(x, omega, kappa, mu, d, w);
    Ok(sample_canonical(p, &h, rng)?.as_slice().to_vec())
}

/// Auxiliary-variable route, `O(n^2 q)` per draw:
///
/// 1. `a ~ N(0, D)`, `e ~ N(0, I_n)`
/// 2. `v = Phi a + e` with `Phi = Omega^{1/2} X`
/// 3. solve `(Phi D Phi' + I) z = alpha - v`
/// 4. `gamma = W + a + D Phi' z`
///
/// where `alpha = Omega^{-1/2} (kappa - omega mu) - Phi W` is the centered
/// working response.
pub fn sample_gamma_low_rank<R: Rng + ?Sized>(
    x: &DMatrix<f64>,
    omega: &[f64],
    kappa: &[f64],
    mu: f64,
    d: &[f64],
    w: &[f64],
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_dims(x, omega, kappa, d, w)?;
    let (n, q) = x.shape();
    let phi = scaled_rows(x, omega);
    let mut phi_sd = phi.clone();
    for (j, &dj) in d.iter().enumerate() {
        phi_sd.column_mut(j).scale_mut(dj.sqrt());
    }
    let mut m = &phi_sd * phi_sd.transpose();
    for i in 0..n {
        m[(i, i)] += 1.0;
    }

    let a = DVector::from_iterator(q, d.iter().map(|dj| dj.sqrt() * std_normal(rng)));
    let wv = DVector::from_column_slice(w);
    let phi_w = &phi * &wv;
    let phi_a = &phi * &a;
    let mut rhs = DVector::zeros(n);
    for i in 0..n {
        let alpha = (kappa[i] - omega[i] * mu) / omega[i].sqrt() - phi_w[i];
        rhs[i] = alpha - (phi_a[i] + std_normal(rng));
    }
    let chol = cholesky_jittered(m)?;
    chol.factor.solve_mut(&mut rhs);
    let back = phi.tr_mul(&rhs);
    Ok((0..q).map(|j| w[j] + a[j] + d[j] * back[j]).collect())
}
