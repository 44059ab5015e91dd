//! Simulation-based goodness of fit: simulate r graphs from a fitted model,
//! summarize each with distributional and scalar statistics, and report
//! per-bin envelopes next to the observed values. Vertex-entry models can
//! additionally be checked mid-growth, at the group boundaries where the set
//! of entered vertices is deterministic.

use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Dyad, Graph};
use crate::model::Model;
use crate::order::OrderSpec;
use crate::sampler::{replicate_rng, sample_graph_inner};

/// Degree histogram; index = total degree, length max degree + 1.
pub fn degree_counts(g: &Graph) -> Vec<u64> {
    let max = (0..g.n()).map(|v| g.degree(v)).max().unwrap_or(0);
    let mut counts = vec![0u64; max as usize + 1];
    for v in 0..g.n() {
        counts[g.degree(v) as usize] += 1;
    }
    counts
}

/// Edgewise shared-partner histogram; index = shared neighbors of an edge's
/// endpoints. Empty when the graph has no edges.
pub fn esp_counts(g: &Graph) -> Vec<u64> {
    let mut counts: Vec<u64> = Vec::new();
    for d in g.edges() {
        let sn = g.shared_neighbors(d).expect("edge endpoints are valid") as usize;
        if sn >= counts.len() {
            counts.resize(sn + 1, 0);
        }
        counts[sn] += 1;
    }
    counts
}

/// Σ_v C(d_v, 2) over total degrees.
pub fn two_star_count(g: &Graph) -> f64 {
    (0..g.n())
        .map(|v| {
            let d = g.degree(v) as f64;
            d * (d - 1.0) / 2.0
        })
        .sum()
}

/// Triangle count; directed graphs count triangles of the undirected
/// projection, consistent with [`Graph::shared_neighbors`].
pub fn triangle_count(g: &Graph) -> f64 {
    let total: u64 = g
        .edges()
        .map(|d| g.shared_neighbors(d).expect("edge endpoints are valid") as u64)
        .sum();
    total as f64 / 3.0
}

/// Soffer-Vázquez transitivity: 3 · triangles / Σ_edges (min(d_i, d_j) - 1),
/// which corrects the clustering coefficient for degree correlations. An
/// empty denominator (no edge has a possible shared partner) gives 0.
pub fn sv_transitivity(g: &Graph) -> f64 {
    let mut denom = 0.0;
    let mut tri3 = 0.0;
    for d in g.edges() {
        denom += (g.degree(d.tail).min(g.degree(d.head)) as f64 - 1.0).max(0.0);
        tri3 += g.shared_neighbors(d).expect("edge endpoints are valid") as f64;
    }
    if denom == 0.0 {
        0.0
    } else {
        tri3 / denom
    }
}

/// 2E / n: the mean total degree.
pub fn mean_degree(g: &Graph) -> f64 {
    2.0 * g.edge_count() as f64 / g.n() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GofStat {
    Degree,
    Esp,
    TwoStars,
    SvTransitivity,
    MeanDegree,
}

impl GofStat {
    pub fn label(&self) -> &'static str {
        match self {
            GofStat::Degree => "degree",
            GofStat::Esp => "esp",
            GofStat::TwoStars => "two-stars",
            GofStat::SvTransitivity => "sv-transitivity",
            GofStat::MeanDegree => "mean-degree",
        }
    }

    pub const ALL: [GofStat; 5] = [
        GofStat::Degree,
        GofStat::Esp,
        GofStat::TwoStars,
        GofStat::SvTransitivity,
        GofStat::MeanDegree,
    ];

    fn is_distribution(&self) -> bool {
        matches!(self, GofStat::Degree | GofStat::Esp)
    }
}

impl FromStr for GofStat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GofStat::ALL
            .iter()
            .copied()
            .find(|g| g.label() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown gof statistic '{s}'")))
    }
}

/// Envelope summary for one statistic at one growth stage. Distribution
/// statistics carry one entry per bin; scalars carry exactly one.
#[derive(Debug, Clone)]
pub struct GofReport {
    pub stat: GofStat,
    /// Entered-vertex count this report describes; `None` for the final
    /// graph.
    pub checkpoint: Option<u32>,
    /// Bin labels: "0", "1", "2-3", "4-7", ... for distributions, the
    /// statistic label for scalars.
    pub bins: Vec<String>,
    pub observed: Option<Vec<f64>>,
    pub sims: usize,
    pub mean: Vec<f64>,
    pub q05: Vec<f64>,
    pub q50: Vec<f64>,
    pub q95: Vec<f64>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl GofReport {
    /// Fraction of bins with simulated mean >= `min_expected` whose observed
    /// value lies inside [q05, q95]. `None` without observed values or when
    /// no bin clears the threshold.
    pub fn coverage(&self, min_expected: f64) -> Option<f64> {
        let obs = self.observed.as_ref()?;
        let mut total = 0usize;
        let mut inside = 0usize;
        for (b, o) in obs.iter().enumerate() {
            if self.mean[b] >= min_expected {
                total += 1;
                if *o >= self.q05[b] && *o <= self.q95[b] {
                    inside += 1;
                }
            }
        }
        if total == 0 {
            None
        } else {
            Some(inside as f64 / total as f64)
        }
    }
}

/// value -> log2 bin: 0 | 1 | 2-3 | 4-7 | ...
fn log2_bin_index(v: usize) -> usize {
    if v == 0 {
        0
    } else {
        usize::BITS as usize - v.leading_zeros() as usize
    }
}

fn log2_bin_label(b: usize) -> String {
    if b == 0 {
        return "0".into();
    }
    let lo = 1usize << (b - 1);
    let hi = (1usize << b) - 1;
    if lo == hi {
        format!("{lo}")
    } else {
        format!("{lo}-{hi}")
    }
}

/// Collapses a value histogram into log2 bins of total length `n_bins`.
fn bin_counts(raw: &[u64], n_bins: usize) -> Vec<f64> {
    let mut out = vec![0.0; n_bins];
    for (v, c) in raw.iter().enumerate() {
        out[log2_bin_index(v)] += *c as f64;
    }
    out
}

/// Linear-interpolation quantile of a sorted slice.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    debug_assert!(n > 0);
    if n == 1 {
        return sorted[0];
    }
    let h = q * (n - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let frac = h - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

/// Raw per-draw summaries for one growth stage.
#[derive(Clone, Default)]
struct SlotRaw {
    degree: Vec<u64>,
    esp: Vec<u64>,
    scalars: Vec<f64>,
}

fn summarize_slot(g: &Graph, stats: &[GofStat]) -> SlotRaw {
    let mut raw = SlotRaw::default();
    for s in stats {
        match s {
            GofStat::Degree => raw.degree = degree_counts(g),
            GofStat::Esp => raw.esp = esp_counts(g),
            GofStat::TwoStars => raw.scalars.push(two_star_count(g)),
            GofStat::SvTransitivity => raw.scalars.push(sv_transitivity(g)),
            GofStat::MeanDegree => raw.scalars.push(mean_degree(g)),
        }
    }
    raw
}

/// Induced subgraph on `verts`; `map` sends original ids to new ids
/// (u32::MAX = absent).
fn induced(g: &Graph, verts: &[u32], map: &[u32]) -> Graph {
    let mut h = Graph::new(verts.len() as u32, g.directed()).expect("nonempty vertex set");
    for &v in verts {
        for &w in g.neighbors(v) {
            let mw = map[w as usize];
            if mw != u32::MAX {
                h.set_edge(Dyad::new(map[v as usize], mw), true).expect("mapped dyad is valid");
            }
        }
    }
    h
}

struct Stage {
    checkpoint: Option<u32>,
    /// Entered vertices with relabeling map; `None` means the full graph.
    restrict: Option<(Vec<u32>, Vec<u32>)>,
}

fn build_stages(model: &Model, checkpoints: &[u32]) -> Result<Vec<Stage>> {
    let mut stages = Vec::new();
    if !checkpoints.is_empty() {
        let groups = match model.order_spec() {
            OrderSpec::VertexEntry { groups } => groups,
            OrderSpec::Uniform => {
                return Err(Error::InvalidArgument(
                    "growth checkpoints need a vertex-entry ordering".into(),
                ))
            }
        };
        // Cumulative group boundaries are the only times where the entered
        // vertex set does not depend on the sampled order.
        let mut boundary = std::collections::HashMap::new();
        let mut cum = 0u32;
        for (k, g) in groups.iter().enumerate() {
            cum += g.len() as u32;
            boundary.insert(cum, k);
        }
        let mut prev = 0u32;
        for &t in checkpoints {
            if t <= prev {
                return Err(Error::InvalidArgument(
                    "checkpoints must be strictly increasing".into(),
                ));
            }
            prev = t;
            if t < 2 || t as u64 >= model.n() as u64 {
                return Err(Error::InvalidArgument(format!(
                    "checkpoint {t} outside 2..{}",
                    model.n()
                )));
            }
            let k = *boundary.get(&t).ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "checkpoint {t} is not a cumulative group boundary"
                ))
            })?;
            let verts: Vec<u32> = groups[..=k].iter().flatten().copied().collect();
            let mut map = vec![u32::MAX; model.n() as usize];
            for (new, &v) in verts.iter().enumerate() {
                map[v as usize] = new as u32;
            }
            stages.push(Stage { checkpoint: Some(t), restrict: Some((verts, map)) });
        }
    }
    stages.push(Stage { checkpoint: None, restrict: None });
    Ok(stages)
}

/// Simulates `r` graphs and reports envelopes for each requested statistic,
/// at each growth checkpoint and at the final graph. Checkpoints are entered
/// vertex counts and must fall on cumulative group boundaries of the
/// vertex-entry ordering (with singleton groups, any count works); the
/// observed graph is compared via its induced subgraph on the entered
/// groups. Reports are ordered stage by stage, statistics in request order.
pub fn gof_run(
    model: &Model,
    observed: Option<&Graph>,
    r: usize,
    seed: u64,
    stats: &[GofStat],
    checkpoints: &[u32],
) -> Result<Vec<GofReport>> {
    if r < 2 {
        return Err(Error::InvalidArgument("at least 2 simulations are required".into()));
    }
    if stats.is_empty() {
        return Err(Error::InvalidArgument("no gof statistics requested".into()));
    }
    let stages = build_stages(model, checkpoints)?;
    let times: Vec<u32> = stages.iter().filter_map(|s| s.checkpoint).collect();

    let draws: Vec<Vec<SlotRaw>> = (0..r)
        .into_par_iter()
        .map(|i| {
            let mut rng = replicate_rng(seed, 0, i as u64);
            let mut slots: Vec<SlotRaw> = Vec::with_capacity(stages.len());
            let draw = sample_graph_inner::<_, false>(model, &mut rng, false, &times, |t, g| {
                let stage = &stages[slots.len()];
                debug_assert_eq!(stage.checkpoint, Some(t));
                let (verts, map) = stage.restrict.as_ref().expect("checkpoint stage");
                slots.push(summarize_slot(&induced(g, verts, map), stats));
            })?;
            slots.push(summarize_slot(&draw.graph, stats));
            Ok(slots)
        })
        .collect::<Result<_>>()?;

    let observed_slots: Option<Vec<SlotRaw>> = observed
        .map(|g| {
            if g.n() != model.n() || g.directed() != model.directed() {
                return Err(Error::InvalidArgument(
                    "observed graph does not match the model vertex set".into(),
                ));
            }
            Ok(stages
                .iter()
                .map(|stage| match &stage.restrict {
                    Some((verts, map)) => summarize_slot(&induced(g, verts, map), stats),
                    None => summarize_slot(g, stats),
                })
                .collect())
        })
        .transpose()?;

    let mut reports = Vec::new();
    for (si, stage) in stages.iter().enumerate() {
        let mut scalar_idx = 0usize;
        for stat in stats {
            let (bins, columns, obs): (Vec<String>, Vec<Vec<f64>>, Option<Vec<f64>>) =
                if stat.is_distribution() {
                    let pick = |raw: &SlotRaw| -> Vec<u64> {
                        match stat {
                            GofStat::Degree => raw.degree.clone(),
                            _ => raw.esp.clone(),
                        }
                    };
                    let max_len = draws
                        .iter()
                        .map(|d| pick(&d[si]).len())
                        .chain(observed_slots.iter().map(|o| pick(&o[si]).len()))
                        .max()
                        .unwrap_or(1)
                        .max(1);
                    let n_bins = log2_bin_index(max_len - 1) + 1;
                    let columns = draws
                        .iter()
                        .map(|d| bin_counts(&pick(&d[si]), n_bins))
                        .collect::<Vec<_>>();
                    let obs =
                        observed_slots.as_ref().map(|o| bin_counts(&pick(&o[si]), n_bins));
                    ((0..n_bins).map(log2_bin_label).collect(), columns, obs)
                } else {
                    let columns = draws
                        .iter()
                        .map(|d| vec![d[si].scalars[scalar_idx]])
                        .collect::<Vec<_>>();
                    let obs = observed_slots.as_ref().map(|o| vec![o[si].scalars[scalar_idx]]);
                    (vec![stat.label().to_string()], columns, obs)
                };
            if !stat.is_distribution() {
                scalar_idx += 1;
            }
            let n_bins = bins.len();
            let mut mean = vec![0.0; n_bins];
            let mut q05 = vec![0.0; n_bins];
            let mut q50 = vec![0.0; n_bins];
            let mut q95 = vec![0.0; n_bins];
            let mut min = vec![0.0; n_bins];
            let mut max = vec![0.0; n_bins];
            for b in 0..n_bins {
                let mut col: Vec<f64> = columns.iter().map(|c| c[b]).collect();
                col.sort_by(|a, b| a.partial_cmp(b).expect("finite gof statistics"));
                mean[b] = col.iter().sum::<f64>() / r as f64;
                q05[b] = quantile(&col, 0.05);
                q50[b] = quantile(&col, 0.50);
                q95[b] = quantile(&col, 0.95);
                min[b] = col[0];
                max[b] = col[r - 1];
            }
            reports.push(GofReport {
                stat: *stat,
                checkpoint: stage.checkpoint,
                bins,
                observed: obs,
                sims: r,
                mean,
                q05,
                q50,
                q95,
                min,
                max,
            });
        }
    }
    Ok(reports)
}
