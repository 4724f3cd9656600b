//! Write and read the dataset and posterior-samples formats.
//!
//! cargo run --release --example file_formats

use netclass::io::{export_samples_csv, load_samples, read_dataset, save_samples, write_dataset};
use netclass::model::{run_chain, McmcConfig, PriorSpec};
use netclass::simulate::{simulate, SimConfig};

fn main() -> netclass::Result<()> {
    let dir = std::env::temp_dir().join("netclass-formats");
    let cfg = SimConfig { nodes: 5, subjects: 30, ..SimConfig::preset("sim1-case1")? }.with_seed(2);
    let sim = simulate(&cfg)?;
    let manifest = write_dataset(&dir.join("data"), &sim.data, Some(2), Some(&cfg), Some(&sim.truth))?;
    let loaded = read_dataset(&manifest)?;
    println!("dataset: V={} n={}, truth sidecar {}", loaded.data.node_count(), loaded.data.len(), loaded.truth.is_some());

    let samples = run_chain(&loaded.data, &PriorSpec::horseshoe(2), &McmcConfig::new(500, 250, 5).with_seed(2))?;
    let path = dir.join("samples.bin");
    save_samples(&path, &samples)?;
    let back = load_samples(&path)?;
    assert_eq!(back, samples);
    println!("samples: {} draws, {} bytes on disk", back.len(), std::fs::metadata(&path).map_or(0, |m| m.len()));

    let mut csv = Vec::new();
    export_samples_csv(&back, &mut csv)?;
    let text = String::from_utf8_lossy(&csv);
    println!("CSV header: {}", text.lines().next().unwrap_or_default());
    Ok(())
}
