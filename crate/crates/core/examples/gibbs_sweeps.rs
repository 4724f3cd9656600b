//! Drive the sampler one sweep at a time and watch the state evolve.
//!
//! cargo run --release --example gibbs_sweeps -- [sweeps]

use netclass::model::{GammaRoute, PriorSpec, Sampler};
use netclass::rng::RngStream;
use netclass::simulate::{simulate, SimConfig};

fn main() -> netclass::Result<()> {
    let sweeps: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let cfg = SimConfig { nodes: 10, subjects: 150, latent_mean: 0.25, latent_sd: 0.5, ..SimConfig::preset("sim1-case1")? }.with_seed(5);
    let sim = simulate(&cfg)?;
    println!("true active nodes {:?}", sim.truth.active_nodes.iter().map(|k| k + 1).collect::<Vec<_>>());

    let mut rng = RngStream::new(5, 0);
    for prior in [PriorSpec::lasso(2), PriorSpec::horseshoe(2)] {
        let mut sampler = Sampler::new(sim.data.clone(), prior.clone(), GammaRoute::Auto, &mut rng)?;
        println!("{}:", prior.kind());
        for t in 1..=sweeps {
            sampler.sweep(&mut rng)?;
            if t % (sweeps / 5).max(1) == 0 {
                let s = sampler.state();
                println!(
                    "  sweep {t:>5}: log posterior {:>9.2}, mu {:>6.3}, active nodes {:>2}, rank {}, Delta {:.2}",
                    sampler.log_posterior(),
                    s.mu,
                    s.active_nodes(),
                    s.effective_rank(),
                    s.delta
                );
            }
        }
    }
    Ok(())
}
