//! Simulate a standard case, fit both priors, and compare against the truth.
//!
//! cargo run --release --example fit_simulated -- [preset] [iterations] [seed]

use std::time::Instant;

use netclass::eval::coefficient_mse;
use netclass::model::{run_chain, McmcConfig, PriorKind, PriorSpec};
use netclass::posterior::{effective_dimensionality, select_nodes, summarize_coefficients};
use netclass::simulate::{simulate, SimConfig};

fn main() -> netclass::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let preset = args.first().map_or("sim1-case1", String::as_str);
    let iterations: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(5000);
    let seed: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1);

    let sim = simulate(&SimConfig::preset(preset)?.with_seed(seed))?;
    let truth = sim.truth.gamma_true();
    println!(
        "{preset}: V={} n={} active nodes {:?}",
        sim.data.node_count(),
        sim.data.len(),
        sim.truth.active_nodes.iter().map(|k| k + 1).collect::<Vec<_>>()
    );

    let config = McmcConfig::new(iterations, iterations * 3 / 5, (iterations / 5000).max(1)).with_seed(seed);
    for kind in [PriorKind::Lasso, PriorKind::Horseshoe] {
        let prior = PriorSpec::for_kind(kind, sim.config.fit_rank);
        let start = Instant::now();
        let samples = run_chain(&sim.data, &prior, &config)?;
        let secs = start.elapsed().as_secs_f64();
        let summary = summarize_coefficients(&samples, 0.95)?;
        let mse = coefficient_mse(&summary.mean, truth.values())?;
        let rank = effective_dimensionality(&samples);
        let nodes = select_nodes(&samples);
        println!(
            "{kind}: {iterations} sweeps in {secs:.1}s, MSE {mse:.3}, rank mode {} {:?}, selected nodes {:?}",
            rank.mode,
            rank.probabilities,
            nodes.selected.iter().map(|k| k + 1).collect::<Vec<_>>()
        );
    }
    Ok(())
}
