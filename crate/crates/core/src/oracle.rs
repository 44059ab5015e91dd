//! Brute-force exact computation of the graph law on tiny vertex sets:
//! p(y | θ) = Σ_s p(y | s, θ) p(s) by full enumeration of orders and graph
//! configurations, with exact moments and the exact Jacobian D. This is the
//! ground truth the sampler and estimators are validated against.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::model::{Model, Moments};
use crate::numerics::{Mat, Vect};
use crate::order::enumerate_orders;
use crate::sampler::cond_log_lik;

/// Exact law over all 2^{n_d} graph configurations.
#[derive(Debug, Clone)]
pub struct ExactLaw {
    /// p(y) indexed by the graph's edge bitmask over canonical dyad indices.
    pub probs: Vec<f64>,
    /// Σ_y p(y); 1 up to enumeration roundoff.
    pub total: f64,
    pub e_g: Vect,
    pub e_big_g: Vect,
    pub cov_g: Mat,
    /// cov(g_k, G_j), k row, j column.
    pub cov_g_big_g: Mat,
    /// D_kj = -cov(g_k, g_j) + cov(g_k, G_j): the exact moment Jacobian.
    pub d_mat: Mat,
    /// Moment-statistic blocks, present when moments were supplied.
    pub e_h: Option<Vect>,
    pub cov_h: Option<Mat>,
    /// D_kj = -cov(h_k, g_j) + cov(h_k, G_j), q x p.
    pub d_h: Option<Mat>,
    /// h(y) per configuration (row index = bitmask), for observed-statistic
    /// lookups in tests.
    pub h_values: Option<DMatrix<f64>>,
}

impl ExactLaw {
    /// Probability of one concrete graph.
    pub fn prob_of(&self, g: &Graph) -> Result<f64> {
        let mut mask = 0usize;
        for d in g.edges() {
            mask |= 1 << g.dyad_index(d)?;
        }
        Ok(self.probs[mask])
    }

    /// Marginal probability that dyad `k` holds an edge.
    pub fn dyad_marginal(&self, k: u64) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .filter(|(mask, _)| mask >> k & 1 == 1)
            .map(|(_, p)| p)
            .sum()
    }
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Enumerates the exact law of `model` (n <= 4). With `moments`, also the
/// exact E(h), cov(h), and the GMM Jacobian.
pub fn exact_law(model: &Model, moments: Option<&Moments>) -> Result<ExactLaw> {
    let n = model.n();
    if n > 4 {
        return Err(Error::NonEnumerable(format!("exact law limited to n <= 4, got {n}")));
    }
    let template = model.empty_graph();
    let nd = template.dyad_count();
    let configs = 1u64 << nd;
    let (orders, _common_lp) = enumerate_orders(model.order_spec(), &template, 200_000)?;
    if orders.len() as u64 * configs > 4_000_000 {
        return Err(Error::NonEnumerable(format!(
            "{} orders x {configs} graphs is too much work",
            orders.len()
        )));
    }
    // Every enumerated realization is equiprobable.
    let lp_order = -(orders.len() as f64).ln();

    let p = model.p();
    let q = moments.map(|m| m.q()).unwrap_or(0);
    let mut probs = vec![0.0f64; configs as usize];
    let mut e_g = Vect::zeros(p);
    let mut e_big_g = Vect::zeros(p);
    let mut e_gg = Mat::zeros(p, p);
    let mut e_g_big_g = Mat::zeros(p, p);
    let mut e_h = Vect::zeros(q);
    let mut e_hh = Mat::zeros(q, q);
    let mut e_h_g = Mat::zeros(q, p);
    let mut e_h_big_g = Mat::zeros(q, p);
    let mut h_values = DMatrix::zeros(configs as usize, q);

    let mut joint_lls = Vec::with_capacity(orders.len());
    for mask in 0..configs {
        let mut graph = model.empty_graph();
        for k in 0..nd {
            if mask >> k & 1 == 1 {
                graph.set_edge(template.dyad_at(k)?, true)?;
            }
        }
        let h = moments.map(|m| m.stats(&graph));
        if let Some(h) = &h {
            for (j, v) in h.iter().enumerate() {
                h_values[(mask as usize, j)] = *v;
            }
        }
        joint_lls.clear();
        for order in &orders {
            let (ll, g, big_g) = cond_log_lik(model, &graph, order)?;
            let lj = lp_order + ll;
            joint_lls.push(lj);
            let w = lj.exp();
            if w > 0.0 {
                for j in 0..p {
                    e_g[j] += w * g[j];
                    e_big_g[j] += w * big_g[j];
                    for k in 0..p {
                        e_gg[(k, j)] += w * g[k] * g[j];
                        e_g_big_g[(k, j)] += w * g[k] * big_g[j];
                    }
                }
                if let Some(h) = &h {
                    for k in 0..q {
                        e_h[k] += w * h[k];
                        for l in 0..q {
                            e_hh[(k, l)] += w * h[k] * h[l];
                        }
                        for j in 0..p {
                            e_h_g[(k, j)] += w * h[k] * g[j];
                            e_h_big_g[(k, j)] += w * h[k] * big_g[j];
                        }
                    }
                }
            }
        }
        probs[mask as usize] = log_sum_exp(&joint_lls).exp();
    }
    let total: f64 = probs.iter().sum();

    let cov_g = &e_gg - &e_g * e_g.transpose();
    let cov_g_big_g = &e_g_big_g - &e_g * e_big_g.transpose();
    let d_mat = -&cov_g + &cov_g_big_g;
    let (e_h, cov_h, d_h, h_values) = if moments.is_some() {
        let cov_h_g = &e_h_g - &e_h * e_g.transpose();
        let cov_h_big_g = &e_h_big_g - &e_h * e_big_g.transpose();
        let d_h = -&cov_h_g + &cov_h_big_g;
        let cov_h = &e_hh - &e_h * e_h.transpose();
        (Some(e_h), Some(cov_h), Some(d_h), Some(h_values))
    } else {
        (None, None, None, None)
    };
    Ok(ExactLaw {
        probs,
        total,
        e_g,
        e_big_g,
        cov_g,
        cov_g_big_g,
        d_mat,
        e_h,
        cov_h,
        d_h,
        h_values,
    })
}

/// Closed-form per-dyad edge probabilities for fully dyad-independent
/// models: p_k = logistic(θ · c_k) with c_k evaluated on the empty graph.
/// Valid at any n; cross-validates [`exact_law`] marginals on tiny graphs.
pub fn exact_dyad_independent_law(model: &Model) -> Result<Vec<f64>> {
    if let Some(spec) = model.term_specs().iter().find(|s| !s.dyad_independent()) {
        return Err(Error::OrderDependentTerm { term: spec.label() });
    }
    let empty = model.empty_graph();
    let mut c1 = vec![0.0; model.p()];
    let mut out = Vec::with_capacity(empty.dyad_count() as usize);
    for k in 0..empty.dyad_count() {
        let d = empty.dyad_at(k)?;
        model.change_into(&empty, None, d, &mut c1);
        let eta: f64 = model.theta().iter().zip(&c1).map(|(t, c)| t * c).sum();
        out.push(crate::sampler::logistic(eta));
    }
    Ok(out)
}

/// Exact E(g) under a dyad-independent law; used for closed-form cross
/// checks. Only statistics of dyad-independent terms are defined here.
pub fn dyad_independent_e_g(model: &Model) -> Result<Vect> {
    let probs = exact_dyad_independent_law(model)?;
    let empty = model.empty_graph();
    let mut c1 = vec![0.0; model.p()];
    let mut e_g = DVector::zeros(model.p());
    for (k, pk) in probs.iter().enumerate() {
        let d = empty.dyad_at(k as u64)?;
        model.change_into(&empty, None, d, &mut c1);
        for (j, c) in c1.iter().enumerate() {
            e_g[j] += pk * c;
        }
    }
    Ok(e_g)
}
