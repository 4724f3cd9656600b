//! A small simulation study: several cases and both priors, with per-cell
//! metrics written as CSV tables.
//!
//! cargo run --release --example experiment_grid -- [iterations] [replicates]

use netclass::eval::{experiment_table, write_roc_csv, write_table_csv, ExperimentConfig};
use netclass::model::{McmcConfig, PriorKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let iterations: usize = args.first().and_then(|s| s.parse().ok()).unwrap_or(3000);
    let replicates: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let cfg = ExperimentConfig {
        cases: vec!["sim1-case1".into(), "sim2-case1".into()],
        methods: vec![PriorKind::Lasso, PriorKind::Horseshoe],
        replicates,
        mcmc: McmcConfig::new(iterations, iterations * 3 / 5, 10).with_seed(1),
        test_subjects: 250,
        ..ExperimentConfig::default()
    };
    let cells = experiment_table(&cfg);
    println!("{:<11} {:<5} {:>4} {:>8} {:>9} {:>9} {:>6} {:>5}", "case", "prior", "seed", "MSE", "node TPR", "edge TPR", "AUC", "rank");
    for c in &cells {
        match &c.result {
            Ok(m) => println!(
                "{:<11} {:<5} {:>4} {:>8.3} {:>9.2} {:>9.2} {:>6.3} {:>5}",
                c.case,
                c.method.to_string(),
                c.seed,
                m.mse,
                m.node_tpr,
                m.edge_tpr,
                m.auc.unwrap_or(f64::NAN),
                m.rank_mode
            ),
            Err(e) => println!("{:<11} {:<5} {:>4} failed: {e}", c.case, c.method.to_string(), c.seed),
        }
    }
    let dir = std::env::temp_dir().join("netclass-grid");
    std::fs::create_dir_all(&dir)?;
    write_table_csv(&cells, std::fs::File::create(dir.join("table.csv"))?)?;
    write_roc_csv(&cells, std::fs::File::create(dir.join("roc.csv"))?)?;
    println!("tables in {}", dir.display());
    Ok(())
}
