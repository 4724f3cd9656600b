//! Generate a simulation preset and write it in the on-disk dataset format.
//!
//! cargo run --release --example simulate_dataset -- [preset] [seed] [out-dir]

use std::path::PathBuf;

use netclass::io::{read_dataset, write_dataset};
use netclass::simulate::{simulate, SimConfig, PRESETS};

fn main() -> netclass::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let preset = args.first().map_or("sim2-case1", String::as_str);
    let seed: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let out = args.get(2).map_or_else(|| std::env::temp_dir().join("netclass-sim"), PathBuf::from);

    println!("presets: {}", PRESETS.join(", "));
    let cfg = SimConfig::preset(preset)?.with_seed(seed);
    let sim = simulate(&cfg)?;
    let truth = &sim.truth;
    println!(
        "{preset}: true rank {}, fitted rank {}, strategy {:?}",
        cfg.true_rank, cfg.fit_rank, cfg.strategy
    );
    println!(
        "active nodes {:?}, {} residual edges, {} nonzero coefficients of {}",
        truth.active_nodes.iter().map(|k| k + 1).collect::<Vec<_>>(),
        truth.active_residual_edges.len(),
        truth.nonzero_edges().len(),
        sim.data.edge_count()
    );
    let positives = sim.data.labels().iter().filter(|&&y| y == 1).count();
    println!("{} subjects, {positives} in class 1", sim.data.len());

    let manifest = write_dataset(&out, &sim.data, Some(seed), Some(&cfg), Some(truth))?;
    let back = read_dataset(&manifest)?;
    assert_eq!(back.data, sim.data);
    println!("wrote {}", manifest.display());
    Ok(())
}
