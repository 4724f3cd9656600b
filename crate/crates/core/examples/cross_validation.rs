//! Stratified k-fold cross-validated AUC, with a shuffled-label null for
//! comparison.
//!
//! cargo run --release --example cross_validation -- [folds] [iterations]

use rand::seq::SliceRandom;

use netclass::eval::kfold_cv;
use netclass::model::{McmcConfig, PriorSpec};
use netclass::rng::RngStream;
use netclass::simulate::{simulate, SimConfig};

fn main() -> netclass::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let folds: usize = args.first().and_then(|s| s.parse().ok()).unwrap_or(5);
    let iterations: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let cfg = SimConfig { nodes: 10, subjects: 150, ..SimConfig::preset("sim1-case1")? }.with_seed(21);
    let sim = simulate(&cfg)?;
    let prior = PriorSpec::lasso(2);
    let mcmc = McmcConfig::new(iterations, iterations / 2, 2).with_seed(21);

    let cv = kfold_cv(&sim.data, &prior, &mcmc, folds)?;
    println!("{folds}-fold CV AUC {:.3} ({} ROC points)", cv.roc.auc, cv.roc.points.len());

    let mut labels = sim.data.labels().to_vec();
    labels.shuffle(&mut RngStream::new(21, 99));
    let null = kfold_cv(&sim.data.with_labels(labels)?, &prior, &mcmc, folds)?;
    println!("shuffled labels: AUC {:.3}", null.roc.auc);
    Ok(())
}
