//! Fit on training subjects, then score networks of new subjects.
//!
//! cargo run --release --example classify_networks

use netclass::eval::roc_auc;
use netclass::model::{run_chain, McmcConfig, PriorSpec};
use netclass::posterior::classify;
use netclass::simulate::{simulate, simulate_test_set, SimConfig};

fn main() -> netclass::Result<()> {
    let cfg = SimConfig { nodes: 10, subjects: 200, ..SimConfig::preset("sim1-case1")? }.with_seed(3);
    let sim = simulate(&cfg)?;
    let test = simulate_test_set(&cfg, &sim.truth, 100)?;
    let samples = run_chain(&sim.data, &PriorSpec::lasso(2), &McmcConfig::new(4000, 2000, 4).with_seed(3))?;

    let mut scores = Vec::with_capacity(test.len());
    for i in 0..test.len() {
        let c = classify(&samples, &test.network(i))?;
        if i < 5 {
            println!("subject {}: P(y = 1) = {:.3}, predicted {}, observed {}", i + 1, c.probability, c.label, test.labels()[i]);
        }
        scores.push(c.probability);
    }
    let correct = scores.iter().zip(test.labels()).filter(|(p, &y)| u8::from(**p > 0.5) == y).count();
    println!("held-out accuracy {:.3}", correct as f64 / test.len() as f64);
    println!("held-out AUC {:.3}", roc_auc(&scores, test.labels())?.auc);
    Ok(())
}
