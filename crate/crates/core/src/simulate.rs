//! Synthetic network-classification data with a known low-rank-plus-sparse
//! coefficient matrix.
//!
//! The truth is `Gamma0 = Gamma01 + Gamma02` with `Gamma01(k, l) = u_k' u_l / 2`
//! for latent positions drawn from a spike-and-slab mixture, and `Gamma02` a
//! sparse residual. Labels follow
//! `y ~ Ber(logistic(mu0 + <A, Gamma0>_F))`; since both matrices are
//! symmetric the model-scale coefficient vector is `2 * upper(Gamma0)`.

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{logistic, std_normal};
use crate::error::{Error, Result};
use crate::network::{edge_count, edge_pairs, vectorize_upper, AdjacencyMatrix, EdgeVector, NetworkDataset};
use crate::rng::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Independent `N(0, 1)` edge weights.
    Sim1,
    /// Community-structured edge weights.
    Sim2,
}

/// Values of the nonzero residual entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualStrategy {
    /// `N(1, 0.1)` (variance 0.1).
    NormalOne,
    /// `N(0.5, 0.1)`.
    NormalHalf,
    /// Constant 0.5.
    ConstantHalf,
}

impl ResidualStrategy {
    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            1 => Ok(Self::NormalOne),
            2 => Ok(Self::NormalHalf),
            3 => Ok(Self::ConstantHalf),
            _ => Err(Error::InvalidParameter(format!("residual strategy {i} (expected 1, 2 or 3)"))),
        }
    }

    fn draw<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        let sd = 0.1f64.sqrt();
        match self {
            Self::NormalOne => 1.0 + sd * std_normal(rng),
            Self::NormalHalf => 0.5 + sd * std_normal(rng),
            Self::ConstantHalf => 0.5,
        }
    }
}

/// Stochastic blockmodel for the community scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockModel {
    pub sizes: Vec<usize>,
    pub within_mean: f64,
    pub within_variance: f64,
    /// Fraction of between-community pairs that carry an `N(0, 1)` edge in
    /// each network; the rest are zero.
    pub between_fraction: f64,
}

impl Default for BlockModel {
    fn default() -> Self {
        Self { sizes: vec![8, 9, 8], within_mean: 0.5, within_variance: 1.0, between_fraction: 0.1 }
    }
}

impl BlockModel {
    /// Community of every node, in node order.
    pub fn assignment(&self) -> Vec<usize> {
        self.sizes.iter().enumerate().flat_map(|(c, &s)| std::iter::repeat_n(c, s)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub scenario: Scenario,
    pub nodes: usize,
    pub subjects: usize,
    /// Rank of the true latent positions.
    pub true_rank: usize,
    /// Latent dimension `R` to fit with.
    pub fit_rank: usize,
    /// Probability that a node is inactive, `1 - pi`.
    pub node_sparsity: f64,
    /// Fraction of edges without a residual term, `1 - pi2`.
    pub residual_sparsity: f64,
    pub strategy: ResidualStrategy,
    pub mu0: f64,
    /// Mean of every coordinate of an active latent position.
    pub latent_mean: f64,
    pub latent_sd: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<BlockModel>,
    pub seed: u64,
}

/// Names accepted by [`SimConfig::preset`].
pub const PRESETS: [&str; 8] = [
    "sim1-case1",
    "sim1-case2",
    "sim1-case3",
    "sim1-case4",
    "sim2-case1",
    "sim2-case2",
    "sim2-case3",
    "sim2-case4",
];

impl SimConfig {
    /// One of the eight standard cases, `sim{1,2}-case{1..4}`, with
    /// `V = 25`, `n = 250`, `mu0 = 2`.
    pub fn preset(name: &str) -> Result<Self> {
        // (true rank, fit rank, node sparsity, residual sparsity, strategy)
        let (scenario, row) = match name {
            "sim1-case1" => (Scenario::Sim1, (2, 2, 0.5, 0.95, 1)),
            "sim1-case2" => (Scenario::Sim1, (3, 5, 0.6, 0.95, 1)),
            "sim1-case3" => (Scenario::Sim1, (2, 5, 0.5, 0.90, 2)),
            "sim1-case4" => (Scenario::Sim1, (2, 5, 0.4, 0.90, 3)),
            "sim2-case1" => (Scenario::Sim2, (2, 2, 0.5, 0.95, 1)),
            "sim2-case2" => (Scenario::Sim2, (2, 4, 0.5, 0.95, 1)),
            "sim2-case3" => (Scenario::Sim2, (2, 3, 0.7, 0.95, 1)),
            "sim2-case4" => (Scenario::Sim2, (2, 5, 0.4, 0.90, 3)),
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown preset '{other}' (expected one of {})",
                    PRESETS.join(", ")
                )))
            }
        };
        let (true_rank, fit_rank, node_sparsity, residual_sparsity, strategy) = row;
        Ok(Self {
            scenario,
            nodes: 25,
            subjects: 250,
            true_rank,
            fit_rank,
            node_sparsity,
            residual_sparsity,
            strategy: ResidualStrategy::from_index(strategy)?,
            mu0: 2.0,
            latent_mean: 0.5,
            latent_sd: 1.0,
            blocks: (scenario == Scenario::Sim2).then(BlockModel::default),
            seed: 0,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.nodes < 2 {
            return bad(format!("need at least 2 nodes, got {}", self.nodes));
        }
        if self.true_rank == 0 || self.fit_rank == 0 {
            return bad("ranks must be positive".into());
        }
        for (name, p) in [("node sparsity", self.node_sparsity), ("residual sparsity", self.residual_sparsity)] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} {p} outside [0, 1]"));
            }
        }
        if !(self.latent_sd >= 0.0) || !self.latent_mean.is_finite() || !self.mu0.is_finite() {
            return bad("latent mean/sd and mu0 must be finite, sd non-negative".into());
        }
        match (&self.scenario, &self.blocks) {
            (Scenario::Sim2, None) => return bad("community scenario needs a block model".into()),
            (Scenario::Sim2, Some(b)) => {
                if b.sizes.iter().sum::<usize>() != self.nodes {
                    return bad(format!("community sizes {:?} do not sum to V = {}", b.sizes, self.nodes));
                }
                if !(0.0..=1.0).contains(&b.between_fraction) || !(b.within_variance >= 0.0) {
                    return bad("between fraction must lie in [0, 1], within variance non-negative".into());
                }
            }
            _ => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub nodes: usize,
    pub mu0: f64,
    /// `V x R_g` latent positions; row `k` is zero iff node `k` is inactive.
    pub u0: DMatrix<f64>,
    /// `Gamma0 = Gamma01 + Gamma02`.
    pub gamma0: DMatrix<f64>,
    /// 0-based indices of active nodes.
    pub active_nodes: Vec<usize>,
    /// Canonical indices of edges carrying a residual term.
    pub active_residual_edges: Vec<usize>,
}

impl GroundTruth {
    /// Coefficient vector on the model scale, `2 * upper(Gamma0)`.
    pub fn gamma_true(&self) -> EdgeVector {
        let v = vectorize_upper(&AdjacencyMatrix::new(self.gamma0.clone()).expect("symmetric by construction"));
        EdgeVector::new(self.nodes, v.values().iter().map(|x| 2.0 * x).collect()).expect("length q")
    }

    /// Canonical indices of edges with a nonzero true coefficient.
    pub fn nonzero_edges(&self) -> Vec<usize> {
        self.gamma_true().values().iter().enumerate().filter(|(_, &g)| g != 0.0).map(|(j, _)| j).collect()
    }

    /// `Gamma01(k, l) = u_k' u_l / 2`.
    pub fn low_rank_part(&self) -> DMatrix<f64> {
        let mut g = &self.u0 * self.u0.transpose() / 2.0;
        g.fill_diagonal(0.0);
        g
    }
}

/// Draws the latent positions and the residual matrix.
pub fn generate_coefficients<R: Rng + ?Sized>(cfg: &SimConfig, rng: &mut R) -> Result<GroundTruth> {
    cfg.validate()?;
    let v = cfg.nodes;
    let pi = 1.0 - cfg.node_sparsity;
    let mut u0 = DMatrix::zeros(v, cfg.true_rank);
    let mut active_nodes = Vec::new();
    for k in 0..v {
        if rng.random::<f64>() < pi {
            active_nodes.push(k);
            for r in 0..cfg.true_rank {
                u0[(k, r)] = cfg.latent_mean + cfg.latent_sd * std_normal(rng);
            }
        }
    }
    let mut gamma0 = &u0 * u0.transpose() / 2.0;
    gamma0.fill_diagonal(0.0);

    let q = edge_count(v);
    let count = ((1.0 - cfg.residual_sparsity) * q as f64).round() as usize;
    let mut active_residual_edges = sample(rng, q, count.min(q)).into_vec();
    active_residual_edges.sort_unstable();
    let pairs: Vec<(usize, usize)> = edge_pairs(v).collect();
    for &j in &active_residual_edges {
        let (k, l) = pairs[j];
        let x = cfg.strategy.draw(rng);
        gamma0[(k, l)] += x;
        gamma0[(l, k)] += x;
    }
    Ok(GroundTruth { nodes: v, mu0: cfg.mu0, u0, gamma0, active_nodes, active_residual_edges })
}

fn one_network(cfg: &SimConfig, community: &[usize], rng: &mut RngStream) -> AdjacencyMatrix {
    let v = cfg.nodes;
    let mut a = DMatrix::zeros(v, v);
    match (&cfg.scenario, &cfg.blocks) {
        (Scenario::Sim2, Some(b)) => {
            let between: Vec<(usize, usize)> = edge_pairs(v).filter(|&(k, l)| community[k] != community[l]).collect();
            let count = (b.between_fraction * between.len() as f64).round() as usize;
            let sd = b.within_variance.sqrt();
            for (k, l) in edge_pairs(v).filter(|&(k, l)| community[k] == community[l]) {
                a[(k, l)] = b.within_mean + sd * std_normal(rng);
            }
            for i in sample(rng, between.len(), count.min(between.len())) {
                let (k, l) = between[i];
                a[(k, l)] = std_normal(rng);
            }
        }
        _ => {
            for (k, l) in edge_pairs(v) {
                a[(k, l)] = std_normal(rng);
            }
        }
    }
    let upper = a.clone();
    a += upper.transpose();
    AdjacencyMatrix::new(a).expect("symmetric with zero diagonal by construction")
}

/// `n` networks; subject `i` draws from substream `i` of `rng`, so the
/// output is independent of thread count.
pub fn generate_networks(cfg: &SimConfig, rng: &RngStream) -> Result<Vec<AdjacencyMatrix>> {
    cfg.validate()?;
    let community = cfg.blocks.as_ref().map(BlockModel::assignment).unwrap_or_default();
    Ok((0..cfg.subjects)
        .into_par_iter()
        .map(|i| one_network(cfg, &community, &mut rng.substream(i as u64)))
        .collect())
}

/// `y_i ~ Ber(logistic(mu0 + <A_i, Gamma0>_F))`.
pub fn generate_responses<R: Rng + ?Sized>(
    networks: &[AdjacencyMatrix],
    truth: &GroundTruth,
    mu0: f64,
    rng: &mut R,
) -> Result<Vec<u8>> {
    let gamma = truth.gamma_true();
    networks
        .iter()
        .map(|a| {
            let psi = crate::network::linear_predictor(a, mu0, &gamma)?;
            Ok(u8::from(rng.random::<f64>() < logistic(psi)))
        })
        .collect()
}

/// A generated dataset and the truth behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulated {
    pub config: SimConfig,
    pub data: NetworkDataset,
    pub truth: GroundTruth,
}

/// Coefficients, networks and labels from independent substreams of
/// `cfg.seed`.
pub fn simulate(cfg: &SimConfig) -> Result<Simulated> {
    let root = RngStream::new(cfg.seed, 0);
    let truth = generate_coefficients(cfg, &mut root.substream(1))?;
    let networks = generate_networks(cfg, &root.substream(2))?;
    let labels = generate_responses(&networks, &truth, cfg.mu0, &mut root.substream(3))?;
    let data = NetworkDataset::new(&networks, labels)?;
    Ok(Simulated { config: cfg.clone(), data, truth })
}

/// An independent set of `subjects` networks and labels under the same
/// truth, drawn from substreams 4 and 5 of `cfg.seed`.
pub fn simulate_test_set(cfg: &SimConfig, truth: &GroundTruth, subjects: usize) -> Result<NetworkDataset> {
    let root = RngStream::new(cfg.seed, 0);
    let test_cfg = SimConfig { subjects, ..cfg.clone() };
    let networks = generate_networks(&test_cfg, &root.substream(4))?;
    let labels = generate_responses(&networks, truth, cfg.mu0, &mut root.substream(5))?;
    if networks.is_empty() {
        return Ok(NetworkDataset::empty(cfg.nodes));
    }
    NetworkDataset::new(&networks, labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::testutil::mean_se;

    #[test]
    fn presets_match_the_case_table() {
        let c = SimConfig::preset("sim1-case1").unwrap();
        assert_eq!((c.nodes, c.subjects, c.true_rank, c.fit_rank, c.mu0), (25, 250, 2, 2, 2.0));
        let c = SimConfig::preset("sim2-case4").unwrap();
        assert_eq!((c.strategy, c.node_sparsity, c.fit_rank), (ResidualStrategy::ConstantHalf, 0.4, 5));
        assert_eq!(c.blocks.as_ref().unwrap().sizes, vec![8, 9, 8]);
        for name in PRESETS {
            SimConfig::preset(name).unwrap().validate().unwrap();
        }
        assert!(SimConfig::preset("sim3-case1").is_err());
    }

    #[test]
    fn all_inactive_when_pi_zero() {
        let cfg = SimConfig { node_sparsity: 1.0, residual_sparsity: 1.0, ..SimConfig::preset("sim1-case1").unwrap() };
        let t = generate_coefficients(&cfg, &mut RngStream::new(1, 0)).unwrap();
        assert!(t.active_nodes.is_empty());
        assert_eq!(t.gamma0.amax(), 0.0);
        assert!(t.nonzero_edges().is_empty());
    }

    #[test]
    fn strategy_three_residual_count() {
        let cfg = SimConfig {
            node_sparsity: 1.0,
            residual_sparsity: 0.9,
            strategy: ResidualStrategy::ConstantHalf,
            ..SimConfig::preset("sim1-case1").unwrap()
        };
        let t = generate_coefficients(&cfg, &mut RngStream::new(2, 0)).unwrap();
        assert_eq!(t.active_residual_edges.len(), 30);
        let g = t.gamma_true();
        let nz: Vec<f64> = g.values().iter().copied().filter(|&x| x != 0.0).collect();
        assert_eq!(nz.len(), 30);
        // 2 * 0.5 on the model scale
        assert!(nz.iter().all(|&x| x == 1.0));
    }

    #[test]
    fn bookkeeping_and_transitivity() {
        let cfg = SimConfig::preset("sim1-case1").unwrap();
        for seed in 0..5 {
            let t = generate_coefficients(&cfg, &mut RngStream::new(seed, 0)).unwrap();
            let nonzero_rows: Vec<usize> =
                (0..25).filter(|&k| t.u0.row(k).iter().any(|&x| x != 0.0)).collect();
            assert_eq!(nonzero_rows, t.active_nodes);
            assert_eq!(t.active_residual_edges.len(), 15);
            assert_eq!(t.gamma0, t.gamma0.transpose());
            assert!(t.gamma0.diagonal().iter().all(|&x| x == 0.0));
            let low = t.low_rank_part();
            for &k in &t.active_nodes {
                for &l in &t.active_nodes {
                    if k != l {
                        let expect = t.u0.row(k).dot(&t.u0.row(l)) / 2.0;
                        assert!((low[(k, l)] - expect).abs() < 1e-14);
                        assert!(low[(k, l)] != 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn sim1_edge_weights_standard_normal() {
        let cfg = SimConfig { subjects: 200, ..SimConfig::preset("sim1-case1").unwrap() };
        let nets = generate_networks(&cfg, &RngStream::new(3, 0)).unwrap();
        let w: Vec<f64> = nets.iter().flat_map(|a| vectorize_upper(a).into_values()).collect();
        let (m, se) = mean_se(&w);
        assert!(m.abs() < 3.0 * se);
        let var = crate::dist::testutil::variance(&w);
        // SE of the sample variance of N(0, 1) is sqrt(2 / n)
        assert!((var - 1.0).abs() < 3.0 * (2.0 / w.len() as f64).sqrt());
    }

    #[test]
    fn sim2_communities() {
        let cfg = SimConfig { subjects: 300, ..SimConfig::preset("sim2-case1").unwrap() };
        let nets = generate_networks(&cfg, &RngStream::new(4, 0)).unwrap();
        let comm = cfg.blocks.as_ref().unwrap().assignment();
        let mut within = Vec::new();
        let mut between_nonzero = Vec::new();
        for a in &nets {
            let mut count = 0;
            for (k, l) in edge_pairs(25) {
                if comm[k] == comm[l] {
                    within.push(a.get(k, l));
                } else if a.get(k, l) != 0.0 {
                    count += 1;
                }
            }
            between_nonzero.push(count);
        }
        let (m, se) = mean_se(&within);
        assert!((m - 0.5).abs() < 3.0 * se);
        // 8*9 + 8*8 + 9*8 = 208 between pairs, 10% rounds to 21
        assert!(between_nonzero.iter().all(|&c| c == 21));
    }

    #[test]
    fn responses_follow_logistic() {
        let cfg = SimConfig { node_sparsity: 1.0, residual_sparsity: 1.0, subjects: 20_000, nodes: 3, ..SimConfig::preset("sim1-case1").unwrap() };
        let t = generate_coefficients(&cfg, &mut RngStream::new(5, 0)).unwrap();
        let nets = generate_networks(&cfg, &RngStream::new(6, 0)).unwrap();
        for (mu0, p) in [(0.0, 0.5), (2.0, logistic(2.0))] {
            let y = generate_responses(&nets, &t, mu0, &mut RngStream::new(7, 0)).unwrap();
            let ys: Vec<f64> = y.iter().map(|&v| v as f64).collect();
            let (m, _) = mean_se(&ys);
            let se = (p * (1.0 - p) / ys.len() as f64).sqrt();
            assert!((m - p).abs() < 3.0 * se, "{m} vs {p}");
        }
    }

    #[test]
    fn calibration_by_predictor_bin() {
        let sim = simulate(&SimConfig { subjects: 20_000, nodes: 6, ..SimConfig::preset("sim1-case1").unwrap() }.with_seed(8)).unwrap();
        let g = sim.truth.gamma_true();
        let psi: Vec<f64> = (0..sim.data.len()).map(|i| sim.truth.mu0 + g.dot(sim.data.edges(i).values())).collect();
        let edges = [-2.0, 0.0, 1.0, 2.0, 3.0, 5.0];
        for w in edges.windows(2) {
            let idx: Vec<usize> = (0..psi.len()).filter(|&i| psi[i] >= w[0] && psi[i] < w[1]).collect();
            if idx.len() < 200 {
                continue;
            }
            let obs = idx.iter().map(|&i| sim.data.labels()[i] as f64).sum::<f64>() / idx.len() as f64;
            let p = idx.iter().map(|&i| logistic(psi[i])).sum::<f64>() / idx.len() as f64;
            let se = (p * (1.0 - p) / idx.len() as f64).sqrt();
            assert!((obs - p).abs() < 3.5 * se, "bin {w:?}: {obs} vs {p}");
        }
    }

    #[test]
    fn reproducible() {
        let cfg = SimConfig::preset("sim2-case2").unwrap().with_seed(11);
        assert_eq!(simulate(&cfg).unwrap(), simulate(&cfg).unwrap());
        assert_ne!(simulate(&cfg).unwrap().data, simulate(&cfg.clone().with_seed(12)).unwrap().data);
    }
}
