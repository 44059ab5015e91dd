//! Latent order logistic graph models.
//!
//! A graph is grown by visiting every dyad once in a latent random order s
//! and drawing each edge variable from a logistic regression on its change
//! statistics given the partially built graph:
//!
//! ```text
//! p(y_t = 1 | θ, past, s) = logistic(θ · c(t))
//! ```
//!
//! This crate provides exact forward sampling from that law, a pluggable set
//! of change statistics (including order-dependent ones such as preferential
//! attachment), three estimation procedures (variational, method of moments,
//! generalized method of moments), simulation-based goodness of fit, and a
//! brute-force oracle that enumerates the exact law on tiny graphs for
//! validation.
//!
//! Everything downstream of a (seed, stream, index) triple is
//! bit-reproducible regardless of thread count.

pub mod attrs;
pub mod error;
pub mod estimate;
pub mod gof;
pub mod graph;
pub mod io;
pub mod model;
pub mod numerics;
pub mod oracle;
pub mod order;
pub mod sampler;
pub mod terms;

pub use attrs::{AttrColumn, Attributes};
pub use error::{Error, Result};
pub use estimate::{gmm_fit, mom_fit, variational_fit, FitConfig, FitResult, Method};
pub use gof::{gof_run, GofReport, GofStat};
pub use graph::{Dyad, Graph};
pub use model::{Model, Moments};
pub use oracle::{exact_dyad_independent_law, exact_law, ExactLaw};
pub use order::{log_prob_order, sample_order, EdgeOrder, OrderSpec};
pub use sampler::{
    edge_prob, replicate_rng, sample_batch, sample_batch_map, sample_graph, sample_graph_stats,
    simulate_graphs, SampleDraw,
};
pub use terms::TermSpec;
