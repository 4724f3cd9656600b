//! Joint-distribution check of the Gibbs sampler: moments of prior draws
//! (marginal-conditional simulator) must match the moments of a chain that
//! alternates one sweep with a fresh draw of the labels
//! (successive-conditional simulator).

#![allow(dead_code)]

use nalgebra::DMatrix;
use netclass::dist::std_normal;
use netclass::model::{sample_labels, sample_prior_state, ChainState, GammaRoute, PriorSpec, Sampler, ScaleState};
use netclass::network::{edge_count, NetworkDataset};
use netclass::posterior::effective_sample_size;
use netclass::rng::RngStream;

pub const NODES: usize = 4;
pub const SUBJECTS: usize = 10;

type Stat = (&'static str, fn(&ChainState) -> f64);

fn statistics() -> Vec<Stat> {
    vec![
        ("mu", |s| s.mu),
        ("delta", |s| s.delta),
        ("sum lambda", |s| s.effective_rank() as f64),
        ("sum xi", |s| s.active_nodes() as f64),
        ("mean gamma", |s| s.gamma.iter().sum::<f64>() / s.gamma.len() as f64),
        ("global scale", |s| match &s.scales {
            ScaleState::Lasso { theta2 } => *theta2,
            // sigma^2 is half-Cauchy squared and has no mean
            ScaleState::Horseshoe { sigma2, .. } => sigma2.ln(),
        }),
    ]
}

pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

/// Standard error of a correlated trace from its effective sample size.
pub fn chain_mean_and_se(xs: &[f64]) -> (f64, f64) {
    let (m, se) = mean_and_se(xs);
    let ess = effective_sample_size(&[xs.to_vec()]).unwrap();
    (m, se * (xs.len() as f64 / ess).sqrt())
}

pub struct Comparison {
    pub name: &'static str,
    pub prior_mean: f64,
    pub chain_mean: f64,
    pub z: f64,
}

/// `V = NODES`, `n = SUBJECTS`; the design is `design_scale` times standard
/// normal noise.
pub fn geweke(prior: &PriorSpec, seed: u64, sweeps: usize, design_scale: f64) -> Vec<Comparison> {
    let mut rng = RngStream::new(seed, 0);
    let q = edge_count(NODES);
    let x = DMatrix::from_fn(SUBJECTS, q, |_, _| design_scale * std_normal(&mut rng));
    let template = NetworkDataset::from_design(NODES, x, vec![0; SUBJECTS]).unwrap();
    let stats = statistics();

    let mut forward: Vec<Vec<f64>> = vec![Vec::new(); stats.len()];
    let mut prng = RngStream::new(seed, 1);
    for _ in 0..sweeps {
        let s = sample_prior_state(NODES, prior, &mut prng).unwrap();
        for (i, (_, f)) in stats.iter().enumerate() {
            forward[i].push(f(&s));
        }
    }

    let mut crng = RngStream::new(seed, 2);
    let start = sample_prior_state(NODES, prior, &mut crng).unwrap();
    let labels = sample_labels(&start, &template, &mut crng);
    let data = template.with_labels(labels).unwrap();
    let mut sampler = Sampler::from_state(data, prior.clone(), GammaRoute::Auto, start).unwrap();
    let mut chain: Vec<Vec<f64>> = vec![Vec::new(); stats.len()];
    for _ in 0..sweeps {
        sampler.sweep(&mut crng).unwrap();
        let y = sample_labels(sampler.state(), &template, &mut crng);
        sampler.set_labels(y).unwrap();
        for (i, (_, f)) in stats.iter().enumerate() {
            chain[i].push(f(sampler.state()));
        }
    }

    stats
        .iter()
        .enumerate()
        .map(|(i, (name, _))| {
            let (m1, s1) = mean_and_se(&forward[i]);
            let (m2, s2) = chain_mean_and_se(&chain[i]);
            Comparison { name, prior_mean: m1, chain_mean: m2, z: (m1 - m2) / (s1 * s1 + s2 * s2).sqrt() }
        })
        .collect()
}

pub fn proper(prior: PriorSpec) -> PriorSpec {
    PriorSpec { mu_prior_variance: Some(1.0), ..prior }
}

