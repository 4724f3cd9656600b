//! File formats. Every file carries `format_version` and the seed; loaders
//! reject other versions. Node indices are 1-based on disk.
//!
//! A dataset is a directory holding `manifest.json`, `design.csv` (one row
//! per subject, one column per edge in canonical order, header `k_l`) and
//! `labels.csv`, plus `truth.json` for simulated data. Posterior samples are
//! a single binary columnar file with an embedded JSON manifest.

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{McmcConfig, PriorSpec};
use crate::network::{edge_count, edge_label, edge_nodes, node_count, NetworkDataset};
use crate::posterior::PosteriorSamples;
use crate::simulate::{GroundTruth, SimConfig};

pub const FORMAT_VERSION: u32 = 1;

const SAMPLES_MAGIC: &[u8; 8] = b"NCSAMPLE";

fn check_version(found: u32, what: &str) -> Result<()> {
    if found != FORMAT_VERSION {
        return Err(Error::Format(format!("{what} has format version {found}, expected {FORMAT_VERSION}")));
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(BufWriter::new(fs::File::create(path).map_err(|e| Error::io(path, e))?))
}

fn open(path: &Path) -> Result<BufReader<fs::File>> {
    Ok(BufReader::new(fs::File::open(path).map_err(|e| Error::io(path, e))?))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(open(path)?)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub seed: Option<u64>,
    pub nodes: usize,
    pub subjects: usize,
    pub design: String,
    pub labels: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<String>,
    /// Generating configuration of simulated data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimConfig>,
}

/// Known coefficients of a simulated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthFile {
    pub format_version: u32,
    pub seed: u64,
    pub nodes: usize,
    pub mu0: f64,
    /// Rows of the true latent positions.
    pub u0: Vec<Vec<f64>>,
    /// Model-scale coefficients `2 * upper(Gamma0)` in canonical edge order.
    pub gamma: Vec<f64>,
    /// Rows of `Gamma0`.
    pub gamma_matrix: Vec<Vec<f64>>,
    /// 1-based active node indices.
    pub active_nodes: Vec<usize>,
    /// 1-based node pairs carrying a residual term.
    pub residual_edges: Vec<(usize, usize)>,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn from_rows(rows: &[Vec<f64>], ncols: usize) -> Result<DMatrix<f64>> {
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Format(format!("matrix rows must have {ncols} entries")));
    }
    Ok(DMatrix::from_row_iterator(rows.len(), ncols, rows.iter().flatten().copied()))
}

impl TruthFile {
    pub fn new(truth: &GroundTruth, seed: u64) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            seed,
            nodes: truth.nodes,
            mu0: truth.mu0,
            u0: rows(&truth.u0),
            gamma: truth.gamma_true().into_values(),
            gamma_matrix: rows(&truth.gamma0),
            active_nodes: truth.active_nodes.iter().map(|k| k + 1).collect(),
            residual_edges: truth
                .active_residual_edges
                .iter()
                .map(|&j| {
                    let (k, l) = edge_nodes(truth.nodes, j);
                    (k + 1, l + 1)
                })
                .collect(),
        }
    }

    pub fn to_truth(&self) -> Result<GroundTruth> {
        check_version(self.format_version, "truth file")?;
        let v = self.nodes;
        let bad_node = |k: usize| k == 0 || k > v;
        if self.active_nodes.iter().any(|&k| bad_node(k))
            || self.residual_edges.iter().any(|&(k, l)| bad_node(k) || bad_node(l) || k >= l)
        {
            return Err(Error::Format(format!("truth file node index outside 1..={v}")));
        }
        let rank = self.u0.first().map_or(0, Vec::len);
        Ok(GroundTruth {
            nodes: v,
            mu0: self.mu0,
            u0: from_rows(&self.u0, rank)?,
            gamma0: from_rows(&self.gamma_matrix, v)?,
            active_nodes: self.active_nodes.iter().map(|k| k - 1).collect(),
            active_residual_edges: self
                .residual_edges
                .iter()
                .map(|&(k, l)| crate::network::edge_index(v, k - 1, l - 1))
                .collect(),
        })
    }
}

pub fn write_truth(path: &Path, truth: &GroundTruth, seed: u64) -> Result<()> {
    write_json(path, &TruthFile::new(truth, seed))
}

pub fn read_truth(path: &Path) -> Result<GroundTruth> {
    read_json::<TruthFile>(path)?.to_truth()
}

fn write_design(path: &Path, data: &NetworkDataset) -> Result<()> {
    let v = data.node_count();
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record((0..data.edge_count()).map(|j| {
        let (k, l) = edge_nodes(v, j);
        edge_label(k, l)
    }))?;
    for row in data.design().row_iter() {
        w.write_record(row.iter().map(|x| x.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_design(path: &Path) -> Result<(usize, DMatrix<f64>)> {
    let mut r = csv::Reader::from_reader(open(path)?);
    let header = r.headers()?.clone();
    let q = header.len();
    let v = node_count(q).ok_or(Error::NotTriangular(q))?;
    for (j, name) in header.iter().enumerate() {
        let (k, l) = edge_nodes(v, j);
        if name.trim() != edge_label(k, l) {
            return Err(Error::Format(format!(
                "{}: column {} is '{name}', expected '{}'",
                path.display(),
                j + 1,
                edge_label(k, l)
            )));
        }
    }
    let mut values = Vec::new();
    let mut n = 0;
    for rec in r.records() {
        let rec = rec?;
        for field in rec.iter() {
            values.push(field.trim().parse::<f64>().map_err(|e| {
                Error::Format(format!("{}: row {}: '{field}': {e}", path.display(), n + 1))
            })?);
        }
        n += 1;
    }
    Ok((v, DMatrix::from_row_slice(n, q, &values)))
}

/// Reads a one-column CSV with a header, e.g. `label` or `score`.
fn read_column<T: std::str::FromStr>(path: &Path, name: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    let mut r = csv::Reader::from_reader(open(path)?);
    let col = r
        .headers()?
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::Format(format!("{}: no '{name}' column", path.display())))?;
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let field = rec.get(col).unwrap_or("").trim();
        out.push(
            field
                .parse()
                .map_err(|e| Error::Format(format!("{}: row {}: '{field}': {e}", path.display(), i + 1)))?,
        );
    }
    Ok(out)
}

fn write_labels(path: &Path, labels: &[u8]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["subject", "label"])?;
    for (i, y) in labels.iter().enumerate() {
        w.write_record([(i + 1).to_string(), y.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// A dataset as read from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedDataset {
    pub manifest: DatasetManifest,
    pub data: NetworkDataset,
    pub truth: Option<GroundTruth>,
}

/// Writes a dataset directory; returns the manifest path.
pub fn write_dataset(
    dir: &Path,
    data: &NetworkDataset,
    seed: Option<u64>,
    simulation: Option<&SimConfig>,
    truth: Option<&GroundTruth>,
) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_design(&dir.join("design.csv"), data)?;
    write_labels(&dir.join("labels.csv"), data.labels())?;
    if let Some(t) = truth {
        write_truth(&dir.join("truth.json"), t, seed.unwrap_or(0))?;
    }
    let manifest = DatasetManifest {
        format_version: FORMAT_VERSION,
        seed,
        nodes: data.node_count(),
        subjects: data.len(),
        design: "design.csv".into(),
        labels: "labels.csv".into(),
        truth: truth.map(|_| "truth.json".into()),
        simulation: simulation.cloned(),
    };
    let path = dir.join("manifest.json");
    write_json(&path, &manifest)?;
    Ok(path)
}

/// Reads a dataset from its directory or its manifest path.
pub fn read_dataset(path: &Path) -> Result<LoadedDataset> {
    let manifest_path = if path.is_dir() { path.join("manifest.json") } else { path.to_path_buf() };
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    let manifest: DatasetManifest = read_json(&manifest_path)?;
    check_version(manifest.format_version, "dataset manifest")?;
    let (v, design) = read_design(&dir.join(&manifest.design))?;
    let labels: Vec<u8> = read_column(&dir.join(&manifest.labels), "label")?;
    if v != manifest.nodes || labels.len() != manifest.subjects || design.nrows() != manifest.subjects {
        return Err(Error::Dimension(format!(
            "manifest declares V={} n={}, files hold V={v}, {} design rows, {} labels",
            manifest.nodes,
            manifest.subjects,
            design.nrows(),
            labels.len()
        )));
    }
    let data = if design.nrows() == 0 {
        NetworkDataset::empty(v)
    } else {
        NetworkDataset::from_design(v, design, labels)?
    };
    let truth = manifest.truth.as_ref().map(|t| read_truth(&dir.join(t))).transpose()?;
    Ok(LoadedDataset { manifest, data, truth })
}

/// Reads externally produced scores: a CSV with `score` and `label` columns.
pub fn read_scores(path: &Path) -> Result<(Vec<f64>, Vec<u8>)> {
    Ok((read_column(path, "score")?, read_column(path, "label")?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplesManifest {
    pub format_version: u32,
    pub seed: u64,
    pub nodes: usize,
    pub rank: usize,
    pub draws: usize,
    pub prior: PriorSpec,
    pub config: McmcConfig,
    /// Column order of the body; `u8` columns hold booleans.
    pub columns: Vec<String>,
}

const COLUMNS: [&str; 9] =
    ["chain:u32", "iteration:u64", "mu:f64", "delta:f64", "global_scale:f64", "log_posterior:f64", "gamma:f64[q]", "xi:u8[V]", "lambda:u8[R]"];

/// Binary layout: magic, `u32` manifest length, JSON manifest, then each
/// column contiguous and little-endian.
pub fn write_samples<W: Write>(samples: &PosteriorSamples, mut out: W) -> Result<()> {
    samples.validate()?;
    let manifest = SamplesManifest {
        format_version: FORMAT_VERSION,
        seed: samples.seed(),
        nodes: samples.nodes,
        rank: samples.rank,
        draws: samples.len(),
        prior: samples.prior.clone(),
        config: samples.config.clone(),
        columns: COLUMNS.iter().map(|s| s.to_string()).collect(),
    };
    let json = serde_json::to_vec(&manifest)?;
    let mut buf = Vec::with_capacity(16 + json.len() + samples.gamma.len() * 8 + samples.len() * 48);
    buf.extend_from_slice(SAMPLES_MAGIC);
    buf.extend_from_slice(&(json.len() as u32).to_le_bytes());
    buf.extend_from_slice(&json);
    samples.chain.iter().for_each(|x| buf.extend_from_slice(&x.to_le_bytes()));
    samples.iteration.iter().for_each(|x| buf.extend_from_slice(&x.to_le_bytes()));
    for col in [&samples.mu, &samples.delta, &samples.global_scale, &samples.log_posterior, &samples.gamma] {
        col.iter().for_each(|x| buf.extend_from_slice(&x.to_le_bytes()));
    }
    buf.extend(samples.xi.iter().map(|&b| u8::from(b)));
    buf.extend(samples.lambda.iter().map(|&b| u8::from(b)));
    out.write_all(&buf).map_err(|e| Error::io("<samples>", e))
}

struct Cursor<'a> {
    bytes: &'a [u8],
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() < n {
            return Err(Error::Format("posterior samples file is truncated".into()));
        }
        let (head, rest) = self.bytes.split_at(n);
        self.bytes = rest;
        Ok(head)
    }

    fn column<const N: usize, T>(&mut self, len: usize, conv: fn([u8; N]) -> T) -> Result<Vec<T>> {
        let raw = self.take(len.checked_mul(N).ok_or_else(|| Error::Format("column too large".into()))?)?;
        Ok(raw.chunks_exact(N).map(|c| conv(c.try_into().expect("exact chunk"))).collect())
    }

    fn flags(&mut self, len: usize) -> Result<Vec<bool>> {
        self.take(len)?
            .iter()
            .map(|&b| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(Error::Format(format!("indicator byte {other}"))),
            })
            .collect()
    }
}

pub fn read_samples<R: Read>(mut input: R) -> Result<PosteriorSamples> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes).map_err(|e| Error::io("<samples>", e))?;
    let mut cur = Cursor { bytes: &bytes };
    if cur.take(8)? != SAMPLES_MAGIC {
        return Err(Error::Format("not a posterior samples file".into()));
    }
    let len = u32::from_le_bytes(cur.take(4)?.try_into().expect("4 bytes")) as usize;
    let manifest: SamplesManifest = serde_json::from_slice(cur.take(len)?)?;
    check_version(manifest.format_version, "posterior samples file")?;
    let l = manifest.draws;
    let q = edge_count(manifest.nodes);
    let f = |c: &mut Cursor, n: usize| c.column::<8, f64>(n, f64::from_le_bytes);
    let mut s = PosteriorSamples::new(manifest.nodes, manifest.prior, manifest.config);
    s.rank = manifest.rank;
    s.chain = cur.column::<4, u32>(l, u32::from_le_bytes)?;
    s.iteration = cur.column::<8, u64>(l, u64::from_le_bytes)?;
    s.mu = f(&mut cur, l)?;
    s.delta = f(&mut cur, l)?;
    s.global_scale = f(&mut cur, l)?;
    s.log_posterior = f(&mut cur, l)?;
    s.gamma = f(&mut cur, l * q)?;
    s.xi = cur.flags(l * manifest.nodes)?;
    s.lambda = cur.flags(l * manifest.rank)?;
    if !cur.bytes.is_empty() {
        return Err(Error::Format(format!("{} trailing bytes after posterior samples", cur.bytes.len())));
    }
    s.validate()?;
    Ok(s)
}

pub fn save_samples(path: &Path, samples: &PosteriorSamples) -> Result<()> {
    let mut w = create(path)?;
    write_samples(samples, &mut w)?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_samples(path: &Path) -> Result<PosteriorSamples> {
    read_samples(open(path)?).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

/// One row per draw: chain, iteration, scalars, then `gamma_k_l`, `xi_k`
/// and `lambda_r` columns with 1-based indices.
pub fn export_samples_csv<W: Write>(samples: &PosteriorSamples, out: W) -> Result<()> {
    samples.validate()?;
    let v = samples.nodes;
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["chain", "iteration", "mu", "delta", "global_scale", "log_posterior"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((0..samples.edge_count()).map(|j| {
        let (k, l) = edge_nodes(v, j);
        format!("gamma_{}", edge_label(k, l))
    }));
    header.extend((1..=v).map(|k| format!("xi_{k}")));
    header.extend((1..=samples.rank).map(|r| format!("lambda_{r}")));
    w.write_record(&header)?;
    for l in 0..samples.len() {
        let mut row = vec![
            samples.chain[l].to_string(),
            samples.iteration[l].to_string(),
            samples.mu[l].to_string(),
            samples.delta[l].to_string(),
            samples.global_scale[l].to_string(),
            samples.log_posterior[l].to_string(),
        ];
        row.extend(samples.gamma_draw(l).iter().map(|x| x.to_string()));
        row.extend(samples.xi_draw(l).iter().map(|&b| u8::from(b).to_string()));
        row.extend(samples.lambda_draw(l).iter().map(|&b| u8::from(b).to_string()));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))
}
