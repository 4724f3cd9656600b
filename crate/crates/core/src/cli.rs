//! Subcommands behind the `netclass` binary. Each one is a pure function of
//! a [`RunConfig`] and its input files, and writes the effective config next
//! to its outputs so the run can be repeated with `--config`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{
    evaluate_fit, experiment_table, kfold_cv, roc_auc, write_roc_csv, write_table_csv, ExperimentConfig,
    MetricsReport,
};
use crate::io::{export_samples_csv, load_samples, read_dataset, read_scores, save_samples, write_dataset, write_json};
use crate::model::{run_chain, GammaRoute, McmcConfig, PriorKind, PriorSpec, ScalePrior};
use crate::network::{edge_label, edge_nodes};
use crate::posterior::{class_probabilities, diagnostics, infer, InferenceOptions, PosteriorSamples};
use crate::simulate::{simulate, SimConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Simulate,
    Fit,
    Infer,
    Classify,
    Evaluate,
    Experiment,
}

/// Every setting of a run. Absent options take the documented defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub seed: u64,
    pub prior: PriorKind,
    pub r: Option<usize>,
    pub nu: f64,
    pub a_delta: f64,
    pub b_delta: f64,
    pub eta: f64,
    pub zeta: f64,
    pub iota: f64,
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub chains: usize,
    pub gamma_route: GammaRoute,
    pub edge_threshold: f64,
    pub fdr: f64,
    pub level: f64,
    /// Named simulation preset.
    pub preset: Option<String>,
    /// Full simulation settings; overrides `preset`.
    pub simulation: Option<SimConfig>,
    pub data: Option<PathBuf>,
    pub samples: Option<PathBuf>,
    /// Externally produced `score,label` file for `evaluate`.
    pub scores: Option<PathBuf>,
    /// Cross-validation folds for `evaluate` on a dataset without samples.
    pub folds: Option<usize>,
    pub cases: Vec<String>,
    pub methods: Vec<PriorKind>,
    pub replicates: usize,
    pub test_subjects: usize,
    pub out: PathBuf,
    /// Also write the posterior samples as CSV.
    pub csv: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let mcmc = McmcConfig::default();
        let inference = InferenceOptions::default();
        Self {
            seed: 0,
            prior: PriorKind::Lasso,
            r: None,
            nu: 20.0,
            a_delta: 1.0,
            b_delta: 1.0,
            eta: 2.0,
            zeta: 1.0,
            iota: 1.0,
            iterations: mcmc.iterations,
            burn_in: mcmc.burn_in,
            thin: mcmc.thin,
            chains: mcmc.chains,
            gamma_route: mcmc.gamma_route,
            edge_threshold: inference.edge_threshold,
            fdr: inference.fdr,
            level: inference.level,
            preset: None,
            simulation: None,
            data: None,
            samples: None,
            scores: None,
            folds: None,
            cases: vec!["sim1-case1".into()],
            methods: vec![PriorKind::Lasso, PriorKind::Horseshoe],
            replicates: 1,
            test_subjects: 250,
            out: PathBuf::from("out"),
            csv: false,
        }
    }
}

impl RunConfig {
    /// Latent dimension `R`: explicit, else the preset's fit rank, else 2.
    pub fn rank(&self) -> usize {
        self.r
            .or_else(|| self.simulation.as_ref().map(|s| s.fit_rank))
            .or_else(|| self.preset.as_deref().and_then(|p| SimConfig::preset(p).ok()).map(|s| s.fit_rank))
            .unwrap_or(2)
    }

    pub fn prior_spec(&self) -> PriorSpec {
        let scales = match self.prior {
            PriorKind::Lasso => ScalePrior::Lasso { zeta: self.zeta, iota: self.iota },
            PriorKind::Horseshoe => ScalePrior::Horseshoe,
        };
        PriorSpec {
            r: self.rank(),
            nu: self.nu,
            a_delta: self.a_delta,
            b_delta: self.b_delta,
            eta: self.eta,
            scales,
            mu_prior_variance: None,
        }
    }

    pub fn mcmc(&self) -> McmcConfig {
        McmcConfig {
            iterations: self.iterations,
            burn_in: self.burn_in,
            thin: self.thin,
            chains: self.chains,
            seed: self.seed,
            gamma_route: self.gamma_route,
        }
    }

    pub fn inference(&self) -> InferenceOptions {
        InferenceOptions { edge_threshold: self.edge_threshold, fdr: self.fdr, level: self.level }
    }

    pub fn sim_config(&self) -> Result<SimConfig> {
        let cfg = match (&self.simulation, &self.preset) {
            (Some(s), _) => s.clone(),
            (None, Some(p)) => SimConfig::preset(p)?,
            (None, None) => SimConfig::preset("sim1-case1")?,
        };
        Ok(cfg.with_seed(self.seed))
    }

    pub fn load(path: &Path) -> Result<Self> {
        crate::io::read_json(path)
    }

    fn require<'a>(&self, path: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
        path.as_deref().ok_or_else(|| Error::InvalidParameter(format!("missing --{flag}")))
    }
}

/// What a subcommand produced, for the caller to report.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    /// Non-fatal problems such as poor convergence.
    pub warnings: Vec<String>,
    pub summary: String,
}

pub fn run(command: Command, cfg: &RunConfig) -> Result<Outcome> {
    fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))?;
    let mut outcome = match command {
        Command::Simulate => cmd_simulate(cfg),
        Command::Fit => cmd_fit(cfg),
        Command::Infer => cmd_infer(cfg),
        Command::Classify => cmd_classify(cfg),
        Command::Evaluate => cmd_evaluate(cfg),
        Command::Experiment => cmd_experiment(cfg),
    }?;
    let echo = cfg.out.join("run_config.json");
    write_json(&echo, cfg)?;
    outcome.files.push(echo);
    Ok(outcome)
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<Outcome> {
    let sim_cfg = cfg.sim_config()?;
    let sim = simulate(&sim_cfg)?;
    let manifest = write_dataset(&cfg.out, &sim.data, Some(cfg.seed), Some(&sim_cfg), Some(&sim.truth))?;
    let ones = sim.data.labels().iter().filter(|&&y| y == 1).count();
    Ok(Outcome {
        files: vec![manifest],
        warnings: Vec::new(),
        summary: format!(
            "simulated V={} n={} ({ones} positive), {} active nodes",
            sim.data.node_count(),
            sim.data.len(),
            sim.truth.active_nodes.len()
        ),
    })
}

pub fn cmd_fit(cfg: &RunConfig) -> Result<Outcome> {
    let data = read_dataset(cfg.require(&cfg.data, "data")?)?.data;
    let samples = run_chain(&data, &cfg.prior_spec(), &cfg.mcmc())?;
    let path = cfg.out.join("samples.bin");
    save_samples(&path, &samples)?;
    let mut files = vec![path];
    if cfg.csv {
        let csv_path = cfg.out.join("samples.csv");
        let f = fs::File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
        export_samples_csv(&samples, std::io::BufWriter::new(f))?;
        files.push(csv_path);
    }
    let mut warnings = Vec::new();
    match diagnostics(&samples, 10) {
        Ok(report) => {
            for s in &report.scalars {
                if let Some(r) = s.rhat.filter(|&r| r > 1.1) {
                    warnings.push(format!("{}: split R-hat {r:.3} exceeds 1.1", s.name));
                }
            }
            let path = cfg.out.join("diagnostics.json");
            write_json(&path, &report)?;
            files.push(path);
        }
        Err(e) => warnings.push(format!("diagnostics skipped: {e}")),
    }
    Ok(Outcome {
        files,
        warnings,
        summary: format!("{} draws of a {} fit with R={}", samples.len(), samples.kind(), samples.rank),
    })
}

fn write_rows<W: std::io::Write>(out: W, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))
}

fn csv_file(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<PathBuf> {
    let f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_rows(std::io::BufWriter::new(f), header, rows)?;
    Ok(path.to_path_buf())
}

fn load(cfg: &RunConfig) -> Result<PosteriorSamples> {
    load_samples(cfg.require(&cfg.samples, "samples")?)
}

pub fn cmd_infer(cfg: &RunConfig) -> Result<Outcome> {
    let samples = load(cfg)?;
    let report = infer(&samples, &cfg.inference())?;
    let v = samples.nodes;
    let mut files = vec![cfg.out.join("inference.json")];
    write_json(&files[0], &report)?;
    files.push(csv_file(
        &cfg.out.join("nodes.csv"),
        &["node", "probability", "selected"],
        report.nodes.probabilities.iter().enumerate().map(|(k, p)| {
            vec![(k + 1).to_string(), p.to_string(), u8::from(report.nodes.selected.contains(&k)).to_string()]
        }),
    )?);
    let c = &report.coefficients;
    files.push(csv_file(
        &cfg.out.join("edges.csv"),
        &["edge", "exceedance", "selected", "mean", "lower", "upper"],
        (0..samples.edge_count()).map(|j| {
            let (k, l) = edge_nodes(v, j);
            vec![
                edge_label(k, l),
                report.edges.probabilities[j].to_string(),
                u8::from(report.edges.selected.contains(&j)).to_string(),
                c.mean[j].to_string(),
                c.lower[j].to_string(),
                c.upper[j].to_string(),
            ]
        }),
    )?);
    files.push(csv_file(
        &cfg.out.join("rank.csv"),
        &["rank", "probability"],
        report.rank.probabilities.iter().enumerate().map(|(r, p)| vec![r.to_string(), p.to_string()]),
    )?);
    Ok(Outcome {
        files,
        warnings: Vec::new(),
        summary: format!(
            "{} influential nodes, {} edges at FDR {}, effective rank mode {}",
            report.nodes.selected.len(),
            report.edges.selected.len(),
            cfg.fdr,
            report.rank.mode
        ),
    })
}

pub fn cmd_classify(cfg: &RunConfig) -> Result<Outcome> {
    let samples = load(cfg)?;
    let data = read_dataset(cfg.require(&cfg.data, "data")?)?.data;
    let probs = class_probabilities(&samples, data.design())?;
    let path = csv_file(
        &cfg.out.join("classification.csv"),
        &["subject", "probability", "label"],
        probs.iter().enumerate().map(|(i, p)| vec![(i + 1).to_string(), p.to_string(), u8::from(*p > 0.5).to_string()]),
    )?;
    let positive = probs.iter().filter(|&&p| p > 0.5).count();
    Ok(Outcome {
        files: vec![path],
        warnings: Vec::new(),
        summary: format!("classified {} subjects, {positive} as class 1", probs.len()),
    })
}

fn roc_file(path: &Path, points: &[(f64, f64)]) -> Result<PathBuf> {
    csv_file(path, &["fpr", "tpr"], points.iter().map(|(f, t)| vec![f.to_string(), t.to_string()]))
}

/// With `--samples`: metrics against the dataset's truth sidecar and, if the
/// dataset has labels, its held-out AUC. With `--scores`: AUC of an external
/// score file. With `--folds`: cross-validated AUC on `--data`.
pub fn cmd_evaluate(cfg: &RunConfig) -> Result<Outcome> {
    if let Some(scores) = &cfg.scores {
        let (s, y) = read_scores(scores)?;
        let roc = roc_auc(&s, &y)?;
        let mut files = vec![cfg.out.join("metrics.json")];
        write_json(&files[0], &roc)?;
        files.push(roc_file(&cfg.out.join("roc.csv"), &roc.points)?);
        return Ok(Outcome { files, warnings: Vec::new(), summary: format!("AUC {:.4}", roc.auc) });
    }
    let loaded = read_dataset(cfg.require(&cfg.data, "data")?)?;
    if cfg.samples.is_none() {
        let k = cfg.folds.unwrap_or(10);
        let cv = kfold_cv(&loaded.data, &cfg.prior_spec(), &cfg.mcmc(), k)?;
        let mut files = vec![cfg.out.join("cv.json")];
        write_json(&files[0], &cv)?;
        files.push(roc_file(&cfg.out.join("roc.csv"), &cv.roc.points)?);
        return Ok(Outcome { files, warnings: Vec::new(), summary: format!("{k}-fold CV AUC {:.4}", cv.roc.auc) });
    }
    let samples = load(cfg)?;
    let truth = loaded
        .truth
        .ok_or_else(|| Error::InvalidParameter("dataset has no truth sidecar; use --scores or --folds".into()))?;
    if truth.nodes != samples.nodes {
        return Err(Error::Dimension(format!("truth has V={}, samples V={}", truth.nodes, samples.nodes)));
    }
    let metrics: MetricsReport = evaluate_fit(&samples, &truth, Some(&loaded.data), &cfg.inference(), 0.0)?;
    let mut files = vec![cfg.out.join("metrics.json")];
    write_json(&files[0], &metrics)?;
    let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
    files.push(csv_file(
        &cfg.out.join("metrics.csv"),
        &["method", "mse", "node_tpr", "node_fpr", "edge_tpr", "edge_fpr", "auc"],
        [vec![
            samples.kind().to_string(),
            metrics.mse.to_string(),
            metrics.node_tpr.to_string(),
            metrics.node_fpr.to_string(),
            metrics.edge_tpr.to_string(),
            metrics.edge_fpr.to_string(),
            opt(metrics.auc),
        ]],
    )?);
    files.push(roc_file(&cfg.out.join("roc.csv"), &metrics.roc)?);
    Ok(Outcome {
        files,
        warnings: Vec::new(),
        summary: format!(
            "MSE {:.4}, node TPR {:.2} FPR {:.2}, edge TPR {:.2} FPR {:.2}",
            metrics.mse, metrics.node_tpr, metrics.node_fpr, metrics.edge_tpr, metrics.edge_fpr
        ),
    })
}

pub fn cmd_experiment(cfg: &RunConfig) -> Result<Outcome> {
    if cfg.cases.is_empty() || cfg.methods.is_empty() || cfg.replicates == 0 {
        return Err(Error::InvalidParameter("experiment needs at least one case, method and replicate".into()));
    }
    let grid = ExperimentConfig {
        cases: cfg.cases.clone(),
        methods: cfg.methods.clone(),
        replicates: cfg.replicates,
        mcmc: cfg.mcmc(),
        inference: cfg.inference(),
        test_subjects: cfg.test_subjects,
    };
    grid.mcmc.validate()?;
    let cells = experiment_table(&grid);
    let table = cfg.out.join("table.csv");
    let roc = cfg.out.join("roc.csv");
    write_table_csv(&cells, fs::File::create(&table).map_err(|e| Error::io(&table, e))?)?;
    write_roc_csv(&cells, fs::File::create(&roc).map_err(|e| Error::io(&roc, e))?)?;
    let warnings: Vec<String> = cells
        .iter()
        .filter_map(|c| c.result.as_ref().err().map(|e| format!("{} {} seed {}: {e}", c.case, c.method, c.seed)))
        .collect();
    Ok(Outcome {
        files: vec![table, roc],
        summary: format!("{} cells, {} failed", cells.len(), warnings.len()),
        warnings,
    })
}
