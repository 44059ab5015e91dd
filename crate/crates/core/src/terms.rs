//! Statistic terms: each term supplies the change statistic c(1 | y^{t-1},
//! s_{<=t}) its statistic would receive if the current edge variable were set
//! to 1. Declining an edge contributes zero change for every built-in term
//! (the c(0) = 0 convention), so a statistic's value is the sum of realized
//! changes along the order, telescoped from the empty graph.
//!
//! Consequences of telescoping worth knowing: `triangles` accumulates to the
//! final triangle count, and `degree(k)` accumulates to the final count of
//! degree-k vertices minus its empty-graph value (n when k = 0, else 0).
//! Constant offsets cancel in every moment condition the estimators use.

use std::sync::Arc;

use crate::attrs::Attributes;
use crate::error::{Error, Result};
use crate::graph::{Dyad, Graph};
use crate::order::OrderSpec;

/// User-facing term description; compiled against the attribute table into a
/// [`Term`] when a model is built. Listing order fixes the θ index order.
#[derive(Debug, Clone, PartialEq)]
pub enum TermSpec {
    /// c = 1.
    Edges,
    /// c = shared neighbors of the endpoints (pre-toggle).
    Triangles,
    /// c = degree(i) + degree(j), pre-toggle degrees.
    TwoStars,
    /// Change in the count of vertices with degree exactly k.
    Degree { k: u32 },
    /// c = x_i + x_j for a numeric attribute.
    NodecovMain { attr: String },
    /// c = x_i * x_j for a numeric attribute.
    NodecovProd { attr: String },
    /// c = 1 when the endpoints share the attribute level.
    Nodematch { attr: String },
    /// c = 1 when the unordered endpoint levels equal {level_a, level_b}.
    Nodemix { attr: String, level_a: String, level_b: String },
    /// c = ln(entry position of the acting vertex), 1-based.
    LogOrder,
    /// c = ln((k + d_alter) / Σ_j (k + d_j)), the log Barabási–Albert
    /// attachment probability; the sum runs over vertices entered before the
    /// acting vertex, with degrees taken at t-1. Requires k > 0.
    PrefAttach { k: f64 },
    /// c = ln(1 + SN(i,j) / min(d_i, d_j)) with 0/0 -> 0, pre-toggle.
    SharedNbrs,
}

impl TermSpec {
    /// Human-readable label used in fit tables and error messages.
    pub fn label(&self) -> String {
        match self {
            TermSpec::Edges => "edges".into(),
            TermSpec::Triangles => "triangles".into(),
            TermSpec::TwoStars => "two-stars".into(),
            TermSpec::Degree { k } => format!("degree({k})"),
            TermSpec::NodecovMain { attr } => format!("nodecov-main({attr})"),
            TermSpec::NodecovProd { attr } => format!("nodecov-prod({attr})"),
            TermSpec::Nodematch { attr } => format!("nodematch({attr})"),
            TermSpec::Nodemix { attr, level_a, level_b } => {
                format!("nodemix({attr}:{level_a}.{level_b})")
            }
            TermSpec::LogOrder => "log-order".into(),
            TermSpec::PrefAttach { k } => format!("pref-attach({k})"),
            TermSpec::SharedNbrs => "shared-nbrs".into(),
        }
    }

    /// Whether evaluation needs vertex entry times.
    pub fn needs_entry_times(&self) -> bool {
        matches!(self, TermSpec::LogOrder | TermSpec::PrefAttach { .. })
    }

    /// Whether the accumulated statistic depends only on the final graph
    /// under the given ordering. `log-order` becomes order-independent when
    /// every entry group is a singleton (entry times are then deterministic).
    pub fn order_independent(&self, order: &OrderSpec) -> bool {
        match self {
            TermSpec::PrefAttach { .. } | TermSpec::SharedNbrs => false,
            TermSpec::LogOrder => match order {
                OrderSpec::VertexEntry { groups } => groups.iter().all(|g| g.len() == 1),
                OrderSpec::Uniform => false,
            },
            _ => true,
        }
    }

    /// Dyad-independent terms have change statistics that never look at the
    /// rest of the graph or the order.
    pub fn dyad_independent(&self) -> bool {
        matches!(
            self,
            TermSpec::Edges
                | TermSpec::NodecovMain { .. }
                | TermSpec::NodecovProd { .. }
                | TermSpec::Nodematch { .. }
                | TermSpec::Nodemix { .. }
        )
    }

    /// Validates parameters and resolves attribute references.
    pub(crate) fn compile(&self, n: u32, attrs: Option<&Attributes>) -> Result<Term> {
        let need_attrs = |name: &str| -> Result<&Attributes> {
            attrs.ok_or_else(|| Error::MissingAttribute(name.into()))
        };
        let check_len = |len: usize| -> Result<()> {
            if len != n as usize {
                return Err(Error::InvalidArgument(format!(
                    "attribute table has {len} rows, model has {n} vertices"
                )));
            }
            Ok(())
        };
        match self {
            TermSpec::Edges => Ok(Term::Edges),
            TermSpec::Triangles => Ok(Term::Triangles),
            TermSpec::TwoStars => Ok(Term::TwoStars),
            TermSpec::Degree { k } => Ok(Term::Degree(*k)),
            TermSpec::NodecovMain { attr } => {
                let x = need_attrs(attr)?.numeric(attr)?;
                check_len(x.len())?;
                Ok(Term::NodecovMain(Arc::from(x)))
            }
            TermSpec::NodecovProd { attr } => {
                let x = need_attrs(attr)?.numeric(attr)?;
                check_len(x.len())?;
                Ok(Term::NodecovProd(Arc::from(x)))
            }
            TermSpec::Nodematch { attr } => {
                let (_, codes) = need_attrs(attr)?.categorical(attr)?;
                check_len(codes.len())?;
                Ok(Term::Nodematch(Arc::from(codes)))
            }
            TermSpec::Nodemix { attr, level_a, level_b } => {
                let (levels, codes) = need_attrs(attr)?.categorical(attr)?;
                check_len(codes.len())?;
                let find = |lv: &str| -> Result<u32> {
                    levels
                        .iter()
                        .position(|l| l == lv)
                        .map(|i| i as u32)
                        .ok_or_else(|| Error::UnknownLevel {
                            attr: attr.clone(),
                            level: lv.into(),
                        })
                };
                Ok(Term::Nodemix(Arc::from(codes), find(level_a)?, find(level_b)?))
            }
            TermSpec::LogOrder => Ok(Term::LogOrder),
            TermSpec::PrefAttach { k } => {
                if !(k.is_finite() && *k > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "pref-attach offset k must be positive and finite, got {k}"
                    )));
                }
                Ok(Term::PrefAttach(*k))
            }
            TermSpec::SharedNbrs => Ok(Term::SharedNbrs),
        }
    }
}

/// Compiled term with attribute columns resolved. Terms are stateless: the
/// partial graph plus entry times carry all evaluation state, so a term can
/// be shared across threads.
#[derive(Debug, Clone)]
pub(crate) enum Term {
    Edges,
    Triangles,
    TwoStars,
    Degree(u32),
    NodecovMain(Arc<[f64]>),
    NodecovProd(Arc<[f64]>),
    Nodematch(Arc<[u32]>),
    Nodemix(Arc<[u32]>, u32, u32),
    LogOrder,
    PrefAttach(f64),
    SharedNbrs,
}

impl Term {
    /// c(1 | y^{t-1}, s_{<=t}) for the dyad about to be considered. `g` is the
    /// pre-toggle state; `entry_times` must be `Some` for entry-dependent
    /// terms (validated when the model is built, and by public wrappers).
    #[inline]
    pub(crate) fn change(&self, g: &Graph, entry_times: Option<&[u32]>, d: Dyad) -> f64 {
        let (i, j) = (d.tail, d.head);
        match self {
            Term::Edges => 1.0,
            Term::Triangles => {
                if g.directed() {
                    g.shared_neighbors(d).expect("valid dyad") as f64
                } else {
                    g.shared_neighbors_undirected(i, j) as f64
                }
            }
            Term::TwoStars => (g.degree(i) + g.degree(j)) as f64,
            Term::Degree(k) => {
                let k = *k;
                let (di, dj) = (g.degree(i), g.degree(j));
                let bucket = |d: u32| (d == k) as i32;
                (bucket(di + 1) - bucket(di) + bucket(dj + 1) - bucket(dj)) as f64
            }
            Term::NodecovMain(x) => x[i as usize] + x[j as usize],
            Term::NodecovProd(x) => x[i as usize] * x[j as usize],
            Term::Nodematch(c) => (c[i as usize] == c[j as usize]) as u32 as f64,
            Term::Nodemix(c, a, b) => {
                let (ci, cj) = (c[i as usize], c[j as usize]);
                ((ci == *a && cj == *b) || (ci == *b && cj == *a)) as u32 as f64
            }
            Term::LogOrder => {
                let et = entry_times.expect("log-order needs entry times");
                let u = et[i as usize].max(et[j as usize]);
                (u as f64).ln()
            }
            Term::PrefAttach(k) => {
                let et = entry_times.expect("pref-attach needs entry times");
                let (acting, alter) = if et[i as usize] >= et[j as usize] { (i, j) } else { (j, i) };
                let n_prior = (et[acting as usize] - 1) as f64;
                // Vertices entered after the acting one have degree 0 during
                // its block, so the prior-degree sum is 2E - d_acting.
                let sum_prior =
                    2.0 * g.edge_count() as f64 - g.degree(acting) as f64 + k * n_prior;
                ((k + g.degree(alter) as f64) / sum_prior).ln()
            }
            Term::SharedNbrs => {
                let m = g.degree(i).min(g.degree(j));
                if m == 0 {
                    0.0
                } else {
                    let sn = if g.directed() {
                        g.shared_neighbors(d).expect("valid dyad")
                    } else {
                        g.shared_neighbors_undirected(i, j)
                    };
                    (1.0 + sn as f64 / m as f64).ln()
                }
            }
        }
    }

    /// Evaluates the accumulated statistic directly on a final graph; `None`
    /// for terms whose value genuinely depends on the order. `entry_times`
    /// is consulted only by `log-order`.
    pub(crate) fn static_stat(&self, g: &Graph, entry_times: Option<&[u32]>) -> Option<f64> {
        let sum_edges = |f: &dyn Fn(u32, u32) -> f64| -> f64 {
            g.edges().map(|d| f(d.tail, d.head)).sum()
        };
        Some(match self {
            Term::Edges => g.edge_count() as f64,
            Term::Triangles => {
                // Each edge sees the triangle's other two edges' shared
                // vertex, so the per-edge sum triple-counts.
                let total: u64 = g
                    .edges()
                    .map(|d| g.shared_neighbors(d).expect("valid dyad") as u64)
                    .sum();
                (total / 3) as f64
            }
            Term::TwoStars => {
                (0..g.n()).map(|v| { let d = g.degree(v) as u64; d * d.saturating_sub(1) / 2 }).sum::<u64>() as f64
            }
            Term::Degree(k) => {
                let count = (0..g.n()).filter(|&v| g.degree(v) == *k).count() as f64;
                let empty = if *k == 0 { g.n() as f64 } else { 0.0 };
                count - empty
            }
            Term::NodecovMain(x) => sum_edges(&|i, j| x[i as usize] + x[j as usize]),
            Term::NodecovProd(x) => sum_edges(&|i, j| x[i as usize] * x[j as usize]),
            Term::Nodematch(c) => sum_edges(&|i, j| (c[i as usize] == c[j as usize]) as u32 as f64),
            Term::Nodemix(c, a, b) => sum_edges(&|i, j| {
                let (ci, cj) = (c[i as usize], c[j as usize]);
                ((ci == *a && cj == *b) || (ci == *b && cj == *a)) as u32 as f64
            }),
            Term::LogOrder => {
                let et = entry_times?;
                sum_edges(&|i, j| (et[i as usize].max(et[j as usize]) as f64).ln())
            }
            Term::PrefAttach(_) | Term::SharedNbrs => return None,
        })
    }
}
