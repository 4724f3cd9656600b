use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use netclass::cli::{run, Command, RunConfig};
use netclass::model::PriorKind;
use netclass::Error;

#[derive(Parser)]
#[command(name = "netclass", version, about = "Bayesian classification with network predictors")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic dataset with a truth sidecar
    Simulate(Opts),
    /// Run the Gibbs sampler on a dataset
    Fit(Opts),
    /// Node, edge and rank inference from a samples file
    Infer(Opts),
    /// Class probabilities for the networks of a dataset
    Classify(Opts),
    /// Metrics against truth, held-out labels, a score file or by cross-validation
    Evaluate(Opts),
    /// Simulate, fit and evaluate a grid of cases and methods
    Experiment(Opts),
}

#[derive(Args)]
struct Opts {
    /// JSON run config; flags given on the command line override it
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// bnlc or bnhc
    #[arg(long)]
    prior: Option<PriorKind>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    burnin: Option<usize>,
    #[arg(long)]
    thin: Option<usize>,
    #[arg(long)]
    chains: Option<usize>,
    /// Maximum latent dimension
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    edge_threshold: Option<f64>,
    #[arg(long)]
    fdr: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Simulation preset, e.g. sim1-case1
    #[arg(long)]
    preset: Option<String>,
    /// Dataset directory or manifest
    #[arg(long)]
    data: Option<PathBuf>,
    /// Posterior samples file
    #[arg(long)]
    samples: Option<PathBuf>,
    /// CSV with score and label columns
    #[arg(long)]
    scores: Option<PathBuf>,
    #[arg(long)]
    folds: Option<usize>,
    /// Comma-separated presets for experiment
    #[arg(long, value_delimiter = ',')]
    cases: Option<Vec<String>>,
    /// Comma-separated priors for experiment
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<PriorKind>>,
    #[arg(long)]
    replicates: Option<usize>,
    /// Also export samples as CSV
    #[arg(long)]
    csv: bool,
}

impl Opts {
    fn into_config(self) -> netclass::Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($flag:ident => $field:ident),*) => {
                $(if let Some(v) = self.$flag { c.$field = v; })*
            };
        }
        set!(seed => seed, prior => prior, iters => iterations, burnin => burn_in, thin => thin, chains => chains,
             edge_threshold => edge_threshold, fdr => fdr, out => out, cases => cases, methods => methods,
             replicates => replicates);
        if self.r.is_some() {
            c.r = self.r;
        }
        if self.preset.is_some() {
            c.preset = self.preset;
            c.simulation = None;
        }
        for (slot, v) in [(&mut c.data, self.data), (&mut c.samples, self.samples), (&mut c.scores, self.scores)] {
            if v.is_some() {
                *slot = v;
            }
        }
        if self.folds.is_some() {
            c.folds = self.folds;
        }
        c.csv |= self.csv;
        Ok(c)
    }
}

fn configure_threads() -> Result<(), String> {
    if let Ok(v) = std::env::var("NETCLASS_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| format!("NETCLASS_THREADS='{v}' is not a positive integer"))?;
        if n == 0 {
            return Err("NETCLASS_THREADS must be positive".into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let (command, opts) = match cli.command {
        Cmd::Simulate(o) => (Command::Simulate, o),
        Cmd::Fit(o) => (Command::Fit, o),
        Cmd::Infer(o) => (Command::Infer, o),
        Cmd::Classify(o) => (Command::Classify, o),
        Cmd::Evaluate(o) => (Command::Evaluate, o),
        Cmd::Experiment(o) => (Command::Experiment, o),
    };
    let result = opts.into_config().and_then(|cfg| run(command, &cfg));
    match result {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            println!("{}", outcome.summary);
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if is_validation(&e) { 2 } else { 3 })
        }
    }
}

fn is_validation(e: &Error) -> bool {
    match e {
        // a missing or unreadable input file is a usage problem
        Error::Io { source, .. } => source.kind() == std::io::ErrorKind::NotFound,
        other => other.is_validation(),
    }
}
