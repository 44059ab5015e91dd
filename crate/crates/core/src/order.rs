//! Edge-variable orderings: the latent permutation s, its distribution p(s),
//! sampling, exact log-probabilities, and exhaustive enumeration for tiny
//! graphs.
//!
//! Two ordering modes are supported. `Uniform` shuffles all n_d dyads.
//! `VertexEntry` grows the graph: vertices enter group by group (uniform
//! shuffle within each group), and when the t-th vertex enters, the dyads
//! joining it to the t-1 prior vertices are appended in uniform random order
//! (both orientations jointly for directed graphs).
//!
//! The vertex-entry mode is driven by an event stream so the sampler can
//! consume dyads one at a time without materializing the permutation; the
//! full order for a 16k-vertex graph would need ~1 GB.

use rand::seq::SliceRandom;
use rand::Rng;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::graph::{Dyad, Graph};

/// Distribution over edge-variable orderings.
#[derive(Debug, Clone, PartialEq)]
pub enum OrderSpec {
    /// Uniform random permutation of all dyads.
    Uniform,
    /// Vertices enter group by group; groups are ordered as listed and each
    /// is an unordered set of vertex ids shuffled uniformly at entry time.
    VertexEntry { groups: Vec<Vec<u32>> },
}

impl OrderSpec {
    /// Singleton groups covering `0..n` in id order (a fully observed entry
    /// order).
    pub fn singleton_entry(n: u32) -> Self {
        OrderSpec::VertexEntry { groups: (0..n).map(|v| vec![v]).collect() }
    }

    pub fn is_vertex_entry(&self) -> bool {
        matches!(self, OrderSpec::VertexEntry { .. })
    }

    /// Checks group structure against a vertex count.
    pub fn validate(&self, n: u32) -> Result<()> {
        match self {
            OrderSpec::Uniform => Ok(()),
            OrderSpec::VertexEntry { groups } => {
                let mut seen = vec![false; n as usize];
                let mut count = 0u32;
                for (gi, group) in groups.iter().enumerate() {
                    if group.is_empty() {
                        return Err(Error::InvalidGroups(format!("group {gi} is empty")));
                    }
                    for &v in group {
                        if v >= n {
                            return Err(Error::InvalidGroups(format!(
                                "vertex {v} out of range (n = {n})"
                            )));
                        }
                        if seen[v as usize] {
                            return Err(Error::InvalidGroups(format!(
                                "vertex {v} appears in more than one group"
                            )));
                        }
                        seen[v as usize] = true;
                        count += 1;
                    }
                }
                if count != n {
                    return Err(Error::InvalidGroups(format!(
                        "groups cover {count} of {n} vertices"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Entry times are deterministic exactly when every group is a singleton;
    /// returns the 1-based times in that case.
    pub fn deterministic_entry_times(&self, n: u32) -> Option<Vec<u32>> {
        match self {
            OrderSpec::VertexEntry { groups } if groups.iter().all(|g| g.len() == 1) => {
                let mut times = vec![0u32; n as usize];
                for (pos, group) in groups.iter().enumerate() {
                    times[group[0] as usize] = pos as u32 + 1;
                }
                Some(times)
            }
            _ => None,
        }
    }
}

/// A realized ordering: the dyad permutation, plus per-vertex 1-based entry
/// times when generated by vertex entry.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeOrder {
    pub sequence: Vec<Dyad>,
    pub entry_times: Option<Vec<u32>>,
}

/// Streaming generator of a vertex-entry order. RNG use: one shuffle per
/// group at construction, then one block shuffle per entering vertex.
pub(crate) struct VertexEntryStream {
    directed: bool,
    entry_seq: Vec<u32>,
    entered: Vec<u32>,
    next_entry: usize,
    block: Vec<Dyad>,
}

impl VertexEntryStream {
    pub(crate) fn new<R: Rng>(groups: &[Vec<u32>], directed: bool, rng: &mut R) -> Self {
        let n: usize = groups.iter().map(|g| g.len()).sum();
        let mut entry_seq = Vec::with_capacity(n);
        for group in groups {
            let start = entry_seq.len();
            entry_seq.extend_from_slice(group);
            entry_seq[start..].shuffle(rng);
        }
        VertexEntryStream {
            directed,
            entry_seq,
            entered: Vec::with_capacity(n),
            next_entry: 0,
            block: Vec::new(),
        }
    }

    /// Admits the next vertex: returns (v, entry time), 1-based, with its
    /// shuffled dyad block readable via [`Self::block`] until the next call.
    /// `None` once every vertex has entered.
    pub(crate) fn next_block<R: Rng>(&mut self, rng: &mut R) -> Option<(u32, u32)> {
        if self.next_entry >= self.entry_seq.len() {
            return None;
        }
        let v = self.entry_seq[self.next_entry];
        self.next_entry += 1;
        let time = self.next_entry as u32;
        self.block.clear();
        for &u in &self.entered {
            if self.directed {
                self.block.push(Dyad::new(v, u));
                self.block.push(Dyad::new(u, v));
            } else {
                self.block.push(Dyad::canonical(v, u));
            }
        }
        self.block.shuffle(rng);
        self.entered.push(v);
        Some((v, time))
    }

    /// Dyads joining the most recently admitted vertex to earlier entrants.
    pub(crate) fn block(&self) -> &[Dyad] {
        &self.block
    }
}

/// Materializes a uniform random permutation of all dyads.
pub(crate) fn uniform_permutation<R: Rng>(g: &Graph, rng: &mut R) -> Vec<Dyad> {
    let nd = g.dyad_count();
    let mut seq = Vec::with_capacity(nd as usize);
    for k in 0..nd {
        seq.push(g.dyad_at(k).expect("k < dyad_count"));
    }
    seq.shuffle(rng);
    seq
}

/// Draws one ordering from `spec`. Uniform mode materializes the full
/// permutation (O(n_d) memory); for sampling graphs at scale use the
/// streaming sampler, which never stores the order unless asked to.
pub fn sample_order<R: Rng>(spec: &OrderSpec, g_template: &Graph, rng: &mut R) -> Result<EdgeOrder> {
    spec.validate(g_template.n())?;
    match spec {
        OrderSpec::Uniform => Ok(EdgeOrder {
            sequence: uniform_permutation(g_template, rng),
            entry_times: None,
        }),
        OrderSpec::VertexEntry { groups } => {
            let n = g_template.n() as usize;
            let mut stream = VertexEntryStream::new(groups, g_template.directed(), rng);
            let mut sequence = Vec::with_capacity(g_template.dyad_count() as usize);
            let mut entry_times = vec![0u32; n];
            while let Some((v, time)) = stream.next_block(rng) {
                entry_times[v as usize] = time;
                sequence.extend_from_slice(stream.block());
            }
            Ok(EdgeOrder { sequence, entry_times: Some(entry_times) })
        }
    }
}

/// Parsed block structure of a vertex-entry-feasible dyad sequence.
struct ParsedEntry {
    /// Realized entry sequence; positions 0 and 1 are the ambiguous first
    /// pair as encountered (either resolution may be feasible).
    entry_seq: Vec<u32>,
}

/// Reconstructs the entry structure from a dyad sequence, or `None` if the
/// sequence cannot arise from vertex-entry growth.
fn parse_vertex_entry(g: &Graph, sequence: &[Dyad]) -> Option<ParsedEntry> {
    let n = g.n() as usize;
    let directed = g.directed();
    if n == 1 {
        return if sequence.is_empty() { Some(ParsedEntry { entry_seq: vec![0] }) } else { None };
    }
    let mut entered = vec![false; n];
    let mut entry_seq: Vec<u32> = Vec::with_capacity(n);
    let mut pos = 0usize;
    for t in 2..=n {
        let bs = if directed { 2 * (t - 1) } else { t - 1 };
        let block = sequence.get(pos..pos + bs)?;
        pos += bs;
        // Identify the entering vertex.
        let v = if t == 2 {
            let d = block[0];
            entered[d.tail as usize] = true;
            entered[d.head as usize] = true;
            entry_seq.push(d.tail);
            entry_seq.push(d.head);
            if directed {
                // The second dyad must be the reverse orientation.
                let r = block[1];
                if r.tail != d.head || r.head != d.tail {
                    return None;
                }
            }
            continue;
        } else {
            let d = block[0];
            match (entered[d.tail as usize], entered[d.head as usize]) {
                (false, true) => d.tail,
                (true, false) => d.head,
                _ => return None,
            }
        };
        // Every dyad in the block must join v to a distinct entered vertex;
        // directed blocks must cover each orientation exactly once.
        let mut seen_out = vec![false; n];
        let mut seen_in = vec![false; n];
        for d in block {
            let (other, seen) = if d.tail == v {
                (d.head, &mut seen_out)
            } else if d.head == v {
                (d.tail, &mut seen_in)
            } else {
                return None;
            };
            if !entered[other as usize] || seen[other as usize] {
                return None;
            }
            seen[other as usize] = true;
        }
        if directed {
            for u in 0..n {
                if entered[u] && (!seen_out[u] || !seen_in[u]) {
                    return None;
                }
            }
        } else {
            // Undirected dyads are canonical, so v may sit on either side;
            // the two seen-arrays jointly cover the entered set.
            for u in 0..n {
                if entered[u] && !(seen_out[u] ^ seen_in[u]) {
                    return None;
                }
            }
        }
        entered[v as usize] = true;
        entry_seq.push(v);
    }
    if pos != sequence.len() {
        return None;
    }
    Some(ParsedEntry { entry_seq })
}

/// Positions (1-based) each group occupies in any feasible entry sequence.
fn group_of_position(groups: &[Vec<u32>], n: usize) -> Vec<usize> {
    let mut out = vec![0usize; n];
    let mut pos = 0usize;
    for (gi, g) in groups.iter().enumerate() {
        for _ in 0..g.len() {
            out[pos] = gi;
            pos += 1;
        }
    }
    out
}

fn entry_seq_feasible(groups: &[Vec<u32>], seq: &[u32]) -> bool {
    let gpos = group_of_position(groups, seq.len());
    let mut member = vec![usize::MAX; seq.len()];
    for (gi, g) in groups.iter().enumerate() {
        for &v in g {
            member[v as usize] = gi;
        }
    }
    seq.iter().enumerate().all(|(i, &v)| member[v as usize] == gpos[i])
}

/// Exact log p(s) of an order under `spec`; `-inf` when the order cannot be
/// generated. The sequence must at least be a permutation of the dyads.
///
/// If the order carries entry times they are treated as part of the outcome
/// (the probability of that specific entry realization); without them the
/// first two entrants are indistinguishable from the dyad sequence alone and
/// both resolutions are summed.
pub fn log_prob_order(spec: &OrderSpec, g: &Graph, order: &EdgeOrder) -> Result<f64> {
    spec.validate(g.n())?;
    let nd = g.dyad_count();
    if order.sequence.len() as u64 != nd {
        return Err(Error::OrderMismatch(format!(
            "order has {} dyads, graph has {}",
            order.sequence.len(),
            nd
        )));
    }
    let mut seen = vec![false; nd as usize];
    for d in &order.sequence {
        let k = g.dyad_index(*d)? as usize;
        if seen[k] {
            return Err(Error::OrderMismatch(format!(
                "dyad ({}, {}) repeated in order",
                d.tail, d.head
            )));
        }
        seen[k] = true;
    }

    match spec {
        OrderSpec::Uniform => Ok(-ln_gamma(nd as f64 + 1.0)),
        OrderSpec::VertexEntry { groups } => {
            let parsed = match parse_vertex_entry(g, &order.sequence) {
                Some(p) => p,
                None => return Ok(f64::NEG_INFINITY),
            };
            let n = g.n() as usize;
            // log of the per-realization probability: group shuffles times
            // block shuffles.
            let mut lp = 0.0;
            for group in groups {
                lp -= ln_gamma(group.len() as f64 + 1.0);
            }
            for t in 2..=n {
                let bs = if g.directed() { 2 * (t - 1) } else { t - 1 };
                lp -= ln_gamma(bs as f64 + 1.0);
            }
            if let Some(times) = &order.entry_times {
                if times.len() != n {
                    return Err(Error::OrderMismatch("entry_times length mismatch".into()));
                }
                let mut seq = vec![u32::MAX; n];
                for (v, &t) in times.iter().enumerate() {
                    if t == 0 || t as usize > n || seq[t as usize - 1] != u32::MAX {
                        return Err(Error::OrderMismatch("entry_times not a 1..n ranking".into()));
                    }
                    seq[t as usize - 1] = v as u32;
                }
                // Entry times must agree with the parsed blocks (the first
                // two may appear in either role) and with the groups.
                let mut agreed = seq == parsed.entry_seq;
                if !agreed && n >= 2 {
                    let mut swapped = parsed.entry_seq.clone();
                    swapped.swap(0, 1);
                    agreed = seq == swapped;
                }
                if !agreed || !entry_seq_feasible(groups, &seq) {
                    return Ok(f64::NEG_INFINITY);
                }
                Ok(lp)
            } else {
                let mut feasible = 0u32;
                if entry_seq_feasible(groups, &parsed.entry_seq) {
                    feasible += 1;
                }
                if n >= 2 {
                    let mut swapped = parsed.entry_seq.clone();
                    swapped.swap(0, 1);
                    if swapped != parsed.entry_seq && entry_seq_feasible(groups, &swapped) {
                        feasible += 1;
                    }
                }
                if feasible == 0 {
                    return Ok(f64::NEG_INFINITY);
                }
                Ok(lp + (feasible as f64).ln())
            }
        }
    }
}

/// Exhaustively enumerates every realization of `spec` for a tiny graph.
/// All realizations are equiprobable by construction; the common log
/// probability is `-ln(len)`. Errors when the outcome count exceeds `cap`.
pub(crate) fn enumerate_orders(
    spec: &OrderSpec,
    g: &Graph,
    cap: u64,
) -> Result<(Vec<EdgeOrder>, f64)> {
    spec.validate(g.n())?;
    let nd = g.dyad_count();
    match spec {
        OrderSpec::Uniform => {
            let mut total = 1u64;
            for k in 1..=nd {
                total = total.saturating_mul(k);
                if total > cap {
                    return Err(Error::NonEnumerable(format!(
                        "{nd}! orderings exceed cap {cap}"
                    )));
                }
            }
            let dyads: Vec<Dyad> = (0..nd).map(|k| g.dyad_at(k).unwrap()).collect();
            let mut orders = Vec::with_capacity(total as usize);
            permute(&dyads, &mut Vec::new(), &mut vec![false; dyads.len()], &mut |perm| {
                orders.push(EdgeOrder { sequence: perm.to_vec(), entry_times: None });
            });
            let lp = -(total as f64).ln();
            Ok((orders, lp))
        }
        OrderSpec::VertexEntry { groups } => {
            let n = g.n() as usize;
            let mut total = 1u64;
            for group in groups {
                for k in 1..=group.len() as u64 {
                    total = total.saturating_mul(k);
                }
            }
            for t in 2..=n as u64 {
                let bs = if g.directed() { 2 * (t - 1) } else { t - 1 };
                for k in 1..=bs {
                    total = total.saturating_mul(k);
                }
            }
            if total > cap {
                return Err(Error::NonEnumerable(format!(
                    "{total} vertex-entry realizations exceed cap {cap}"
                )));
            }
            // Entry sequences: cartesian product of per-group permutations.
            let mut entry_seqs: Vec<Vec<u32>> = vec![Vec::new()];
            for group in groups {
                let mut perms = Vec::new();
                permute(group, &mut Vec::new(), &mut vec![false; group.len()], &mut |p| {
                    perms.push(p.to_vec());
                });
                let mut next = Vec::with_capacity(entry_seqs.len() * perms.len());
                for base in &entry_seqs {
                    for p in &perms {
                        let mut seq = base.clone();
                        seq.extend_from_slice(p);
                        next.push(seq);
                    }
                }
                entry_seqs = next;
            }
            let mut orders = Vec::with_capacity(total as usize);
            for seq in &entry_seqs {
                let mut entry_times = vec![0u32; n];
                for (i, &v) in seq.iter().enumerate() {
                    entry_times[v as usize] = i as u32 + 1;
                }
                // Per-entry blocks, then the product of their permutations.
                let mut blocks: Vec<Vec<Dyad>> = Vec::new();
                for t in 1..n {
                    let v = seq[t];
                    let mut block = Vec::new();
                    for &u in &seq[..t] {
                        if g.directed() {
                            block.push(Dyad::new(v, u));
                            block.push(Dyad::new(u, v));
                        } else {
                            block.push(Dyad::canonical(v, u));
                        }
                    }
                    blocks.push(block);
                }
                let mut prefix: Vec<Dyad> = Vec::new();
                expand_blocks(&blocks, 0, &mut prefix, &mut |full| {
                    orders.push(EdgeOrder {
                        sequence: full.to_vec(),
                        entry_times: Some(entry_times.clone()),
                    });
                });
            }
            debug_assert_eq!(orders.len() as u64, total);
            let lp = -(total as f64).ln();
            Ok((orders, lp))
        }
    }
}

fn permute<T: Clone>(items: &[T], current: &mut Vec<T>, used: &mut Vec<bool>, emit: &mut impl FnMut(&[T])) {
    if current.len() == items.len() {
        emit(current);
        return;
    }
    for i in 0..items.len() {
        if !used[i] {
            used[i] = true;
            current.push(items[i].clone());
            permute(items, current, used, emit);
            current.pop();
            used[i] = false;
        }
    }
}

fn expand_blocks(
    blocks: &[Vec<Dyad>],
    idx: usize,
    prefix: &mut Vec<Dyad>,
    emit: &mut impl FnMut(&[Dyad]),
) {
    if idx == blocks.len() {
        emit(prefix);
        return;
    }
    permute(&blocks[idx], &mut Vec::new(), &mut vec![false; blocks[idx].len()], &mut |perm| {
        let len = prefix.len();
        prefix.extend_from_slice(perm);
        expand_blocks(blocks, idx + 1, prefix, emit);
        prefix.truncate(len);
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    fn g(n: u32) -> Graph {
        Graph::new(n, false).unwrap()
    }

    #[test]
    fn uniform_n3_frequencies() {
        let graph = g(3);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut counts: HashMap<Vec<(u32, u32)>, u32> = HashMap::new();
        let draws = 60_000;
        for _ in 0..draws {
            let o = sample_order(&OrderSpec::Uniform, &graph, &mut rng).unwrap();
            let key: Vec<(u32, u32)> = o.sequence.iter().map(|d| (d.tail, d.head)).collect();
            *counts.entry(key).or_default() += 1;
        }
        assert_eq!(counts.len(), 6);
        // Multinomial cell sd: sqrt(N p (1-p)), p = 1/6.
        let expect = draws as f64 / 6.0;
        let sd = (draws as f64 * (1.0 / 6.0) * (5.0 / 6.0)).sqrt();
        for (_, c) in counts {
            assert!((c as f64 - expect).abs() < 3.0 * sd, "count {c} vs {expect}");
        }
    }

    #[test]
    fn vertex_entry_constraint() {
        let graph = g(3);
        let spec = OrderSpec::VertexEntry { groups: vec![vec![0], vec![1], vec![2]] };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let o = sample_order(&spec, &graph, &mut rng).unwrap();
            let pos = |a: u32, b: u32| {
                o.sequence
                    .iter()
                    .position(|d| *d == Dyad::canonical(a, b))
                    .unwrap()
            };
            assert!(pos(0, 1) < pos(0, 2));
            assert!(pos(0, 1) < pos(1, 2));
            assert_eq!(o.entry_times.as_deref(), Some(&[1, 2, 3][..]));
        }
    }

    #[test]
    fn n2_single_dyad() {
        let graph = g(2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for spec in [OrderSpec::Uniform, OrderSpec::VertexEntry { groups: vec![vec![0, 1]] }] {
            let o = sample_order(&spec, &graph, &mut rng).unwrap();
            assert_eq!(o.sequence.len(), 1);
            assert_eq!(o.sequence[0], Dyad::new(0, 1));
        }
    }

    #[test]
    fn log_prob_uniform() {
        let graph = g(3);
        let o = EdgeOrder {
            sequence: vec![Dyad::new(0, 1), Dyad::new(0, 2), Dyad::new(1, 2)],
            entry_times: None,
        };
        let lp = log_prob_order(&OrderSpec::Uniform, &graph, &o).unwrap();
        assert!((lp - (-(6.0f64).ln())).abs() < 1e-12);

        // n=2: single ordering, log-prob 0 in both modes.
        let g2 = g(2);
        let o2 = EdgeOrder { sequence: vec![Dyad::new(0, 1)], entry_times: None };
        assert_eq!(log_prob_order(&OrderSpec::Uniform, &g2, &o2).unwrap(), 0.0);
        // -ln 2! from the group shuffle cancels +ln 2 from the two feasible
        // first-pair resolutions, up to lgamma roundoff.
        let ve2 = OrderSpec::VertexEntry { groups: vec![vec![0, 1]] };
        assert!(log_prob_order(&ve2, &g2, &o2).unwrap().abs() < 1e-12);
    }

    #[test]
    fn log_prob_infeasible_vertex_entry() {
        let graph = g(3);
        let spec = OrderSpec::VertexEntry { groups: vec![vec![0], vec![1], vec![2]] };
        // (1,2) first means vertex 0 entered last-but-one; infeasible given
        // the group order (0 first), and also (0,2) before (0,1) breaks the
        // block structure.
        let o = EdgeOrder {
            sequence: vec![Dyad::new(1, 2), Dyad::new(0, 1), Dyad::new(0, 2)],
            entry_times: None,
        };
        let lp = log_prob_order(&spec, &graph, &o).unwrap();
        assert_eq!(lp, f64::NEG_INFINITY);
    }

    #[test]
    fn log_prob_sums_over_first_pair_ambiguity() {
        // One group of 3: sequence (01),(02),(12) arises from entry
        // sequences 0,1,2 / 1,0,2 each with p = (1/3!)·(1/1!)·(1/2!) = 1/12,
        // so the dyad sequence alone has probability 1/6.
        let graph = g(3);
        let spec = OrderSpec::VertexEntry { groups: vec![vec![0, 1, 2]] };
        let o = EdgeOrder {
            sequence: vec![Dyad::new(0, 1), Dyad::new(0, 2), Dyad::new(1, 2)],
            entry_times: None,
        };
        let lp = log_prob_order(&spec, &graph, &o).unwrap();
        assert!((lp - (-(6.0f64).ln())).abs() < 1e-12);
        // With entry times attached, the outcome is one of the two.
        let with_times = EdgeOrder { entry_times: Some(vec![1, 2, 3]), ..o };
        let lp2 = log_prob_order(&spec, &graph, &with_times).unwrap();
        assert!((lp2 - (-(12.0f64).ln())).abs() < 1e-12);
    }

    #[test]
    fn sampled_orders_have_positive_log_prob() {
        let graph = g(5);
        let specs = [
            OrderSpec::Uniform,
            OrderSpec::VertexEntry { groups: vec![vec![0, 1, 2], vec![3, 4]] },
            OrderSpec::singleton_entry(5),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for spec in &specs {
            for _ in 0..50 {
                let o = sample_order(spec, &graph, &mut rng).unwrap();
                assert_eq!(o.sequence.len() as u64, graph.dyad_count());
                let lp = log_prob_order(spec, &graph, &o).unwrap();
                assert!(lp.is_finite(), "sampled order must be feasible");
            }
        }
    }

    #[test]
    fn sample_order_reproducible() {
        let graph = g(6);
        let spec = OrderSpec::VertexEntry { groups: vec![vec![0, 1, 2, 3], vec![4, 5]] };
        let a = sample_order(&spec, &graph, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        let b = sample_order(&spec, &graph, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn enumerate_uniform_n3() {
        let graph = g(3);
        let (orders, lp) = enumerate_orders(&OrderSpec::Uniform, &graph, 100_000).unwrap();
        assert_eq!(orders.len(), 6);
        assert!((lp - (-(6.0f64).ln())).abs() < 1e-12);
    }

    #[test]
    fn enumerate_vertex_entry_counts() {
        let graph = g(4);
        // Singleton groups: 1 entry sequence, blocks 1!,2!,3! -> 12 orders.
        let spec = OrderSpec::singleton_entry(4);
        let (orders, lp) = enumerate_orders(&spec, &graph, 100_000).unwrap();
        assert_eq!(orders.len(), 12);
        assert!((lp - (-(12.0f64).ln())).abs() < 1e-12);
        for o in &orders {
            let got = log_prob_order(&spec, &graph, o).unwrap();
            assert!((got - lp).abs() < 1e-12);
        }
        // One group of 3: 3! entry sequences x 1!·2! block shuffles = 12.
        let g3 = g(3);
        let spec3 = OrderSpec::VertexEntry { groups: vec![vec![0, 1, 2]] };
        let (orders3, _) = enumerate_orders(&spec3, &g3, 100_000).unwrap();
        assert_eq!(orders3.len(), 12);
        // Directed n=4 uniform: 12! permutations, not enumerable.
        let gd = Graph::new(4, true).unwrap();
        assert!(enumerate_orders(&OrderSpec::Uniform, &gd, 1_000_000).is_err());
    }

    #[test]
    fn groups_must_partition() {
        let graph = g(3);
        for groups in [
            vec![vec![0], vec![1]],
            vec![vec![0, 1], vec![1, 2]],
            vec![vec![0, 1, 2, 3]],
            vec![vec![0], vec![], vec![1, 2]],
        ] {
            let spec = OrderSpec::VertexEntry { groups };
            assert!(spec.validate(graph.n()).is_err());
        }
    }
}
