//! Summaries of posterior draws: classification, node and edge selection,
//! effective dimensionality, coefficient intervals and MCMC diagnostics.

mod diagnostics;
mod inference;
mod samples;

pub use diagnostics::{
    autocorrelation, diagnostics, effective_sample_size, rhat, split_rhat, DiagnosticsReport, ScalarDiagnostic,
};
pub use inference::{
    class_probabilities, class_probability, classify, effective_dimensionality, fdr_select, infer, nodes_above_half,
    quantile_sorted, select_edges_fdr, select_nodes, summarize_coefficients, Classification, CoefficientSummary,
    EdgeSelection, InferenceOptions, InferenceReport, NodeSelection, RankDistribution,
};
pub use samples::PosteriorSamples;
