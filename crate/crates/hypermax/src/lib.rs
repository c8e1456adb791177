//! Low-rank tensor completion from hypergraph-expander samples.
//!
//! The library samples the entries of a low-rank tensor along the
//! hyperedges of an expander hypergraph (walks of a regular graph, or
//! paths through a chain of bipartite biregular graphs) and completes the
//! tensor by minimizing a relaxed max-quasinorm objective with block
//! coordinate descent and accelerated proximal-gradient inner solves.
//! Spectral mixing bounds for the sampling hypergraphs and the resulting
//! completion error bounds can be evaluated and fuzz-checked empirically.
//!
//! The main pieces:
//!
//! * [`tensor`] — dense tensors, CP factor sets, matricization,
//!   Khatri-Rao/Kronecker/Hadamard products, and the sparse MTTKRP kernel.
//! * [`graph`] — random regular and bipartite biregular graphs with
//!   measured second eigenvalues / singular values.
//! * [`hypergraph`] — walk and chain hypergraphs, crossing counts, and the
//!   mixing bounds they satisfy.
//! * [`maxq`] — certified max-quasinorm upper bounds, sign-tensor
//!   decompositions, and completion error-bound calculators.
//! * [`solver`] — the relaxed completion engine.
//! * [`experiment`] — synthetic benchmark grids and bound audits.
//! * [`io`] — text formats for every artifact plus CSV reports.
//!
//! Runnable walkthroughs live in `examples/`; a thin `hypermax` binary
//! exposes the same functionality as subcommands.

pub mod error;
pub mod experiment;
pub mod graph;
pub mod hypergraph;
pub mod io;
pub mod maxq;
pub mod solver;
pub mod tensor;

pub use error::{Error, Result};
pub use experiment::{
    aggregate, estimated_gen_error, exact_gen_error, gen_synthetic, run_experiment,
    sample_complexity_factor, sample_observations, verify_error_bound, verify_error_bound_noisy,
    CellSummary, ExperimentSpec, ResultRow,
};
pub use graph::{
    ramanujan_threshold, random_biregular, random_regular, BipartiteGraph, RegularGraph,
};
pub use hypergraph::{
    adjacency_tensor_mixing, build_quasi_hypergraph, build_walk_hypergraph, mixing_bound_quasi,
    mixing_bound_regular, random_subsets, HyperedgeSet, QuasiRegularHypergraph, WalkHypergraph,
};
pub use maxq::{
    error_bound_constant, error_bound_rhs, error_bound_rhs_quasi, even_strings, incoherent_bound,
    maxqnorm_upper, rank_bound, sign_decompose, IndicatorDecomposition, SignVectorTuple,
    GROTHENDIECK_BOUND,
};
pub use solver::{
    apg_solve_factor, coordinate_descent, eval_on_mask, factor_gradient, mu, proj_dual_ball,
    projected_cost, projected_cost_parts, prox_two_inf, rescale_columns, CostParts, Observations,
    SolverConfig, SolverTrace, TraceRow,
};
pub use tensor::{
    for_each_index, hadamard, khatri_rao, khatri_rao_skip, kronecker, matricize, mttkrp,
    two_inf_norm, unmatricize, DenseTensor, FactorSet, MatricizedView,
};
