//! Multi-chain convergence diagnostics: effective sample size, split R-hat
//! and autocorrelation.
//!
//! cargo run --release --example convergence -- [iterations] [chains]

use netclass::model::{run_chain, McmcConfig, PriorSpec};
use netclass::posterior::diagnostics;
use netclass::simulate::{simulate, SimConfig};

fn main() -> netclass::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let iterations: usize = args.first().and_then(|s| s.parse().ok()).unwrap_or(4000);
    let chains: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    let cfg = SimConfig { nodes: 8, subjects: 120, latent_mean: 0.25, latent_sd: 0.5, ..SimConfig::preset("sim1-case4")? }.with_seed(9);
    let sim = simulate(&cfg)?;
    let mcmc = McmcConfig::new(iterations, iterations / 2, 2).with_seed(9).with_chains(chains);
    let samples = run_chain(&sim.data, &PriorSpec::lasso(cfg.fit_rank), &mcmc)?;

    let report = diagnostics(&samples, 6)?;
    println!("{} chains x {} draws", report.chains, report.draws_per_chain);
    println!("{:<16} {:>9} {:>9} {:>7} {:>8}", "quantity", "mean", "ESS", "R-hat", "acf(1)");
    for s in &report.scalars {
        println!(
            "{:<16} {:>9.4} {:>9.1} {:>7} {:>8.3}",
            s.name,
            s.mean,
            s.ess,
            s.rhat.map_or("-".into(), |r| format!("{r:.3}")),
            s.autocorrelation.get(1).copied().unwrap_or(f64::NAN)
        );
    }
    if report.max_rhat().is_some_and(|r| r > 1.1) {
        println!("some split R-hat values exceed 1.1; run longer");
    }
    Ok(())
}
