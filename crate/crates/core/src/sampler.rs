//! Exact forward sampling from p(y | s, θ) p(s), and replay of fixed graphs
//! along given orders.
//!
//! One sweep visits every edge variable once in the sampled order, draws it
//! from the conditional logistic law, and accumulates both the realized
//! change statistics g and the conditional-expectation accumulator G (one
//! `p_t * c` contribution per step under the c(0) = 0 convention, for which
//! E(G) = E(g)). Vertex-entry orders are generated and consumed as a stream,
//! so sampling a large graph never materializes the O(n^2) permutation; the
//! order is recorded only on request, through the same code path and RNG
//! consumption.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::model::Model;
use crate::order::{uniform_permutation, EdgeOrder, OrderSpec, VertexEntryStream};

/// One simulated (graph, order) pair with its accumulated statistics.
/// `order` is `None` when recording was not requested (a 16k-vertex order is
/// ~1 GB; estimation only needs g and G).
#[derive(Debug, Clone)]
pub struct SampleDraw {
    pub graph: Graph,
    pub order: Option<EdgeOrder>,
    /// g(y, s): realized change-statistic sums.
    pub g: Vec<f64>,
    /// G(y, s): per-step conditional expected changes, summed.
    pub big_g: Vec<f64>,
    /// log r(y | s, θ).
    pub log_cond_lik: f64,
}

/// logistic(eta) computed without overflow for any finite eta.
#[inline]
pub(crate) fn logistic(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// ln logistic(eta) = -softplus(-eta), stable at both tails.
#[inline]
pub(crate) fn log_sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        -(-eta).exp().ln_1p()
    } else {
        eta - eta.exp().ln_1p()
    }
}

/// (logistic(eta), log_sigmoid(eta), log_sigmoid(-eta)) sharing one exp and
/// one ln_1p. The probability is computed with exactly the branches of
/// [`logistic`], so draws are bit-identical to the unfused path.
#[inline]
fn logistic_with_logs(eta: f64) -> (f64, f64, f64) {
    let a = -eta.abs();
    let e = a.exp();
    let l1p = e.ln_1p();
    if eta >= 0.0 {
        (1.0 / (1.0 + e), -l1p, a - l1p)
    } else {
        (e / (1.0 + e), a - l1p, -l1p)
    }
}

/// p(y_t = 1 | ·) = exp(θ·c1) / (1 + exp(θ·c1)) under the c(0) = 0
/// convention.
pub fn edge_prob(theta: &[f64], c1: &[f64]) -> Result<f64> {
    if theta.len() != c1.len() {
        return Err(Error::InvalidArgument(format!(
            "theta has {} entries, change vector has {}",
            theta.len(),
            c1.len()
        )));
    }
    if theta.iter().chain(c1).any(|v| v.is_nan()) {
        return Err(Error::NonFinite("edge_prob input"));
    }
    Ok(logistic(dot(theta, c1)))
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Derives the RNG for one replicate of one batch. Distinct (seed, stream,
/// index) triples give independent ChaCha streams, so batch results do not
/// depend on thread scheduling.
pub fn replicate_rng(master_seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[0..8].copy_from_slice(&master_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&stream.to_le_bytes());
    seed[16..24].copy_from_slice(&index.to_le_bytes());
    // Fixed tag so the zero triple still has a mixed seed.
    seed[24..32].copy_from_slice(&0x9E37_79B9_7F4A_7C15u64.to_le_bytes());
    ChaCha8Rng::from_seed(seed)
}

struct Accum<'a> {
    model: &'a Model,
    graph: Graph,
    g: Vec<f64>,
    big_g: Vec<f64>,
    c1: Vec<f64>,
    log_cond_lik: f64,
}

impl<'a> Accum<'a> {
    fn new(model: &'a Model) -> Self {
        let p = model.p();
        Accum {
            model,
            graph: model.empty_graph(),
            g: vec![0.0; p],
            big_g: vec![0.0; p],
            c1: vec![0.0; p],
            log_cond_lik: 0.0,
        }
    }

    /// Draws one edge variable; one uniform consumed per dyad, in order
    /// position sequence. With `STATS` off only the graph is accumulated;
    /// the probability branch matches [`logistic`] bit for bit, so the draw
    /// sequence is identical either way.
    #[inline]
    fn step<R: Rng, const STATS: bool>(
        &mut self,
        entry_times: Option<&[u32]>,
        d: crate::graph::Dyad,
        rng: &mut R,
    ) {
        self.model.change_into(&self.graph, entry_times, d, &mut self.c1);
        let eta = dot(self.model.theta(), &self.c1);
        if STATS {
            let (p1, ls_pos, ls_neg) = logistic_with_logs(eta);
            let u: f64 = rng.gen();
            if u < p1 {
                self.graph.set_edge(d, true).expect("stream yields valid dyads");
                for (acc, c) in self.g.iter_mut().zip(&self.c1) {
                    *acc += c;
                }
                self.log_cond_lik += ls_pos;
            } else {
                self.log_cond_lik += ls_neg;
            }
            for (acc, c) in self.big_g.iter_mut().zip(&self.c1) {
                *acc += p1 * c;
            }
        } else {
            let p1 = logistic(eta);
            let u: f64 = rng.gen();
            if u < p1 {
                self.graph.set_edge(d, true).expect("stream yields valid dyads");
            }
        }
    }
}

/// Forward-samples one graph, visiting checkpoints (vertex-entry counts, in
/// ascending order) as they complete. Core of every sampling entry point.
/// `STATS` off skips the g / G / log-likelihood accumulation (graph-only
/// callers such as plain simulation); the draws themselves are unchanged.
pub(crate) fn sample_graph_inner<R: Rng, const STATS: bool>(
    model: &Model,
    rng: &mut R,
    record_order: bool,
    checkpoints: &[u32],
    mut on_checkpoint: impl FnMut(u32, &Graph),
) -> Result<SampleDraw> {
    if !checkpoints.is_empty() && !model.order_spec().is_vertex_entry() {
        return Err(Error::InvalidArgument(
            "growth checkpoints need a vertex-entry ordering".into(),
        ));
    }
    let mut acc = Accum::new(model);
    let order = match model.order_spec() {
        OrderSpec::Uniform => {
            let seq = uniform_permutation(&acc.graph, rng);
            for &d in &seq {
                acc.step::<_, STATS>(None, d, rng);
            }
            record_order.then_some(EdgeOrder { sequence: seq, entry_times: None })
        }
        OrderSpec::VertexEntry { groups } => {
            let n = model.n() as usize;
            let mut stream = VertexEntryStream::new(groups, model.directed(), rng);
            let mut entry_times = vec![0u32; n];
            let mut sequence =
                record_order.then(|| Vec::with_capacity(acc.graph.dyad_count() as usize));
            let mut next_cp = 0usize;
            while let Some((v, time)) = stream.next_block(rng) {
                entry_times[v as usize] = time;
                for &d in stream.block() {
                    acc.step::<_, STATS>(Some(&entry_times), d, rng);
                }
                if let Some(seq) = &mut sequence {
                    seq.extend_from_slice(stream.block());
                }
                while next_cp < checkpoints.len() && checkpoints[next_cp] == time {
                    on_checkpoint(time, &acc.graph);
                    next_cp += 1;
                }
            }
            sequence.map(|sequence| EdgeOrder { sequence, entry_times: Some(entry_times) })
        }
    };
    Ok(SampleDraw {
        graph: acc.graph,
        order,
        g: acc.g,
        big_g: acc.big_g,
        log_cond_lik: acc.log_cond_lik,
    })
}

/// Draws one (graph, order) sample; the order is recorded.
pub fn sample_graph<R: Rng>(model: &Model, rng: &mut R) -> Result<SampleDraw> {
    sample_graph_inner::<_, true>(model, rng, true, &[], |_, _| {})
}

/// Draws one sample without materializing the order (constant memory beyond
/// the graph itself).
pub fn sample_graph_stats<R: Rng>(model: &Model, rng: &mut R) -> Result<SampleDraw> {
    sample_graph_inner::<_, true>(model, rng, false, &[], |_, _| {})
}

/// Draws `r` independent graphs and nothing else: no order, no accumulator
/// upkeep. Fastest path for pure simulation (growth curves, GOF references);
/// replicate i uses the RNG derived from (master_seed, stream, i), the same
/// as [`sample_batch_map`], so the graphs match the richer entry points draw
/// for draw.
pub fn simulate_graphs(model: &Model, r: usize, master_seed: u64, stream: u64) -> Result<Vec<Graph>> {
    if r == 0 {
        return Err(Error::InvalidArgument("batch size must be at least 1".into()));
    }
    (0..r)
        .into_par_iter()
        .map(|i| {
            let mut rng = replicate_rng(master_seed, stream, i as u64);
            let draw = sample_graph_inner::<_, false>(model, &mut rng, false, &[], |_, _| {})?;
            Ok(draw.graph)
        })
        .collect()
}

/// Draws `r` independent samples; replicate i uses the RNG derived from
/// (master_seed, i). Results are identical under any thread count. Orders
/// are not recorded; use [`sample_graph`] when the realization s is needed.
pub fn sample_batch(model: &Model, r: usize, master_seed: u64) -> Result<Vec<SampleDraw>> {
    sample_batch_map(model, r, master_seed, 0, Ok)
}

/// Parallel batch with a per-draw reduction, used to keep memory flat when
/// only summaries of each draw are needed. `stream` namespaces the RNGs so
/// successive batches of one estimation run stay independent.
pub fn sample_batch_map<T, F>(
    model: &Model,
    r: usize,
    master_seed: u64,
    stream: u64,
    f: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(SampleDraw) -> Result<T> + Sync,
{
    if r == 0 {
        return Err(Error::InvalidArgument("batch size must be at least 1".into()));
    }
    (0..r)
        .into_par_iter()
        .map(|i| {
            let mut rng = replicate_rng(master_seed, stream, i as u64);
            let draw = sample_graph_stats(model, &mut rng)?;
            f(draw)
        })
        .collect()
}

/// Replays a fixed graph along an order, visiting (change vector, outcome)
/// pairs in order. Shared by the conditional likelihood, g(y, s) evaluation,
/// and the variational fitter's row construction.
pub(crate) fn replay<F>(model: &Model, graph: &Graph, order: &EdgeOrder, mut visit: F) -> Result<()>
where
    F: FnMut(&[f64], bool),
{
    if graph.n() != model.n() || graph.directed() != model.directed() {
        return Err(Error::OrderMismatch(
            "graph does not match model vertex set".into(),
        ));
    }
    if order.sequence.len() as u64 != graph.dyad_count() {
        return Err(Error::OrderMismatch(format!(
            "order has {} dyads, graph has {}",
            order.sequence.len(),
            graph.dyad_count()
        )));
    }
    let entry_times = order.entry_times.as_deref();
    if model.has_entry_terms() {
        let et = entry_times.ok_or_else(|| Error::OrderRequired {
            term: model
                .term_specs()
                .iter()
                .find(|s| s.needs_entry_times())
                .map(|s| s.label())
                .unwrap_or_default(),
        })?;
        if et.len() != model.n() as usize || et.iter().any(|&t| t == 0) {
            return Err(Error::OrderMismatch("invalid entry times on order".into()));
        }
    }
    let mut scratch = model.empty_graph();
    let mut c1 = vec![0.0; model.p()];
    for &d in &order.sequence {
        if d.tail == d.head || d.tail >= model.n() || d.head >= model.n() {
            return Err(Error::OrderMismatch(format!(
                "order contains invalid dyad ({}, {})",
                d.tail, d.head
            )));
        }
        model.change_into(&scratch, entry_times, d, &mut c1);
        let present = graph.has_edge(d);
        visit(&c1, present);
        if present {
            scratch.set_edge(d, true)?;
        }
    }
    Ok(())
}

/// Exact conditional log-likelihood of a fixed graph along a given order,
/// with both accumulators: (log p(y | s, θ), g, G).
pub fn cond_log_lik(
    model: &Model,
    graph: &Graph,
    order: &EdgeOrder,
) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let p = model.p();
    let theta = model.theta();
    let (mut ll, mut g, mut big_g) = (0.0, vec![0.0; p], vec![0.0; p]);
    replay(model, graph, order, |c1, present| {
        let eta = dot(theta, c1);
        let p1 = logistic(eta);
        if present {
            ll += log_sigmoid(eta);
            for (acc, c) in g.iter_mut().zip(c1) {
                *acc += c;
            }
        } else {
            ll += log_sigmoid(-eta);
        }
        for (acc, c) in big_g.iter_mut().zip(c1) {
            *acc += p1 * c;
        }
    })?;
    Ok((ll, g, big_g))
}
