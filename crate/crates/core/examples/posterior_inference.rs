//! Influential nodes, FDR-controlled edges, effective dimensionality and
//! credible intervals from one fit.
//!
//! cargo run --release --example posterior_inference -- [iterations]

use netclass::model::{run_chain, McmcConfig, PriorSpec};
use netclass::network::{edge_label, edge_nodes};
use netclass::posterior::{infer, InferenceOptions};
use netclass::simulate::{simulate, SimConfig};

fn main() -> netclass::Result<()> {
    let iterations: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(6000);
    let cfg = SimConfig { nodes: 12, subjects: 800, latent_mean: 0.25, latent_sd: 0.5, ..SimConfig::preset("sim1-case1")? }.with_seed(11);
    let sim = simulate(&cfg)?;
    let v = cfg.nodes;

    let samples = run_chain(&sim.data, &PriorSpec::lasso(2), &McmcConfig::new(iterations, iterations / 2, 5).with_seed(11))?;
    let report = infer(&samples, &InferenceOptions::default())?;

    println!("node  P(influential)  truly active");
    for (k, p) in report.nodes.probabilities.iter().enumerate() {
        println!("{:>4}  {p:>14.3}  {}", k + 1, sim.truth.active_nodes.contains(&k));
    }
    println!("effective rank distribution {:?} (mode {})", report.rank.probabilities, report.rank.mode);

    let truth = sim.truth.gamma_true();
    println!(
        "{} edges selected at Bayesian FDR {} (achieved {:.4}); top ten:",
        report.edges.selected.len(),
        report.edges.alpha,
        report.edges.achieved_bound
    );
    let c = &report.coefficients;
    for &j in report.edges.selected.iter().take(10) {
        let (k, l) = edge_nodes(v, j);
        println!(
            "  {:>5}: P(|gamma| > t) {:.3}, mean {:>6.3} [{:>6.3}, {:>6.3}], true {:>6.3}",
            edge_label(k, l),
            report.edges.probabilities[j],
            c.mean[j],
            c.lower[j],
            c.upper[j],
            truth.values()[j]
        );
    }
    Ok(())
}
