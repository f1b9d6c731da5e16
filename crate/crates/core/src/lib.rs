//! Certified lower and upper bounds on the largest adjacency eigenvalue of a
//! weighted undirected network, computed from local egonets only.
//!
//! The pipeline is: parse a [`Graph`], collect spectral moments
//! `m_0..m_{2r+1}` from every radius-`r` egonet ([`spectral_moments_from_egonets`]),
//! then turn the moments into an interval `[beta, delta]` that provably
//! contains `lambda_1` ([`analyze_moments`]). Comparing the interval with an
//! epidemic threshold gives a [`Verdict`].
//!
//! ```
//! use egospectral::{analyze_moments, parse_edge_list, spectral_moments_from_egonets, BoundOptions, ParseOptions};
//!
//! let (g, _) = parse_edge_list("a b\nb c\nc a\n", &ParseOptions::default()).unwrap();
//! let m = spectral_moments_from_egonets(&g, 1).unwrap();
//! let report = analyze_moments(&m, None, None, &BoundOptions::default()).unwrap();
//! assert!((report.beta - 2.0).abs() < 1e-6);
//! assert!((report.delta.unwrap() - 2.0).abs() < 1e-6);
//! ```

pub mod bounds;
pub mod error;
pub mod format;
pub mod graph;
pub mod harness;
pub mod linalg;
pub mod moments;

pub use bounds::{
    analyze_moments, beta1_closed_form, build_bulk_hankel_pair, build_hankel_pair, check_feasibility,
    chung_lu_estimate, lower_bound_beta, threshold_verdict, upper_bound_delta, BoundOptions, BoundReport,
    BulkHankelPair, ChungLuEstimate, HankelPair, Region, Verdict,
};
pub use error::{Error, Result};
pub use graph::{
    bfs_neighborhood, bfs_subgraph_sample, extract_egonet, parse_edge_list, write_edge_list, Egonet, Graph,
    GraphSummary, ParseOptions,
};
pub use linalg::{lambda1_exact, psd_check, sym_eigenvalues, Lambda1Options, SymMatrix};
pub use moments::{
    closed_walk_oracle, edge_triangle_moments, egonet_walk_sum, moments_exact_trace,
    spectral_moments_from_egonets, MomentOptions, MomentSequence, MomentSource,
};
