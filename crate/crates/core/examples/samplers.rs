//! The random-variate generators behind the Gibbs sweeps, checked against
//! their closed-form means.
//!
//! cargo run --release --example samplers

use nalgebra::DMatrix;
use netclass::dist::{
    gig_half_mean, polya_gamma_mean, sample_gig, sample_inverse_wishart, sample_pg1, GigParams,
};
use netclass::rng::RngStream;

fn main() -> netclass::Result<()> {
    let mut rng = RngStream::new(2024, 0);
    let n = 100_000;

    for c in [0.0, 0.5, 1.0, 2.5, 10.0] {
        let mean = (0..n).map(|_| sample_pg1(c, &mut rng)).sum::<f64>() / n as f64;
        println!("PG(1, {c:>4}): sample mean {mean:.5}, exact {:.5}", polya_gamma_mean(c));
    }

    for (a, b) in [(0.1, 1.0), (1.0, 1.0), (10.0, 4.0)] {
        let params = GigParams::new(0.5, a, b)?;
        let mut sum = 0.0;
        for _ in 0..n {
            sum += sample_gig(params, &mut rng)?;
        }
        println!("GIG(1/2, {a}, {b}): sample mean {:.4}, exact {:.4}", sum / n as f64, gig_half_mean(a, b));
    }

    let scale = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
    let df = 8.0;
    let mut acc = DMatrix::zeros(2, 2);
    for _ in 0..n {
        acc += sample_inverse_wishart(df, &scale, &mut rng)?;
    }
    println!("IW(8, S) sample mean {:.4}", acc / n as f64);
    println!("exact S / (df - 3)    {:.4}", &scale / (df - 3.0));
    Ok(())
}
