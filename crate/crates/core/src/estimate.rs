//! The three estimation procedures.
//!
//! * [`variational_fit`]: maximizes a lower bound on the marginal likelihood
//!   by replaying the observed graph along r sampled orders and fitting one
//!   pooled logistic regression. Exact MLE when the model is dyad
//!   independent.
//! * [`mom_fit`]: Monte Carlo method of moments, solving g(y_obs) = E_θ(g)
//!   by a damped simulated Newton iteration. Requires every model statistic
//!   to be order independent.
//! * [`gmm_fit`]: Monte Carlo generalized method of moments over auxiliary
//!   order-independent statistics h, for models whose own statistics depend
//!   on the latent order.
//!
//! All Monte Carlo batches derive replicate RNGs from (master_seed, stream,
//! index), so fits are bit-reproducible under any thread count.

use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::model::{Model, Moments};
use crate::numerics::{
    cross_cov, hotelling_t2, invert, irls_logistic, ridge_inverse, sample_cov, solve, Mat, Vect,
};
use crate::order::sample_order;
use crate::sampler::{replay, replicate_rng, sample_batch_map};
use crate::terms::TermSpec;

/// RNG stream reserved for order draws in the variational fitter; Newton
/// batches use streams 1, 2, ... of the same master seed.
const ORDER_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Variational,
    Mom,
    Gmm,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::Variational => "variational",
            Method::Mom => "mom",
            Method::Gmm => "gmm",
        };
        f.write_str(s)
    }
}

/// Tuning knobs shared by the moment-based fitters.
#[derive(Debug, Clone)]
pub struct FitConfig {
    /// Simulated graphs per Newton batch.
    pub r: usize,
    /// Termination threshold: Hotelling T² for MOM, ||Dᵀ W m̂||₂ for GMM.
    pub epsilon: f64,
    /// Cap on Newton batches (each batch is one candidate evaluation).
    pub max_iters: usize,
    /// Step shrink factor on rejected candidates.
    pub beta1: f64,
    /// Step growth factor on accepted candidates (damping capped at 1).
    pub beta2: f64,
    pub master_seed: u64,
    /// Starting value; fitted variationally from `init_orders` orders when
    /// absent.
    pub theta0: Option<Vec<f64>>,
    pub init_orders: usize,
}

impl FitConfig {
    pub fn mom() -> Self {
        FitConfig {
            r: 1000,
            epsilon: 0.1,
            max_iters: 25,
            beta1: 0.5,
            beta2: 1.2,
            master_seed: 0,
            theta0: None,
            init_orders: 20,
        }
    }

    pub fn gmm() -> Self {
        FitConfig { epsilon: 1e-4, ..FitConfig::mom() }
    }

    fn validate(&self) -> Result<()> {
        if self.r < 4 {
            return Err(Error::InvalidArgument(
                "at least 4 simulations per batch are needed for covariances".into(),
            ));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::InvalidArgument("epsilon must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
        }
        if !(self.beta1 > 0.0 && self.beta1 < 1.0) {
            return Err(Error::InvalidArgument("beta1 must lie in (0, 1)".into()));
        }
        if self.beta2 < 1.0 {
            return Err(Error::InvalidArgument("beta2 must be at least 1".into()));
        }
        if self.init_orders == 0 && self.theta0.is_none() {
            return Err(Error::InvalidArgument(
                "either theta0 or a positive init_orders is required".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub method: Method,
    pub theta_hat: Vec<f64>,
    /// Estimated covariance of theta_hat.
    pub covariance: Mat,
    /// Final moment residuals: g(y) - mean g for MOM, h(y) - mean h for GMM.
    /// Empty for the variational fit, which has no moment residual.
    pub residuals: Vec<f64>,
    /// Objective per batch: T² for MOM, m̂ᵀ W m̂ for GMM, final
    /// log-likelihood bound for the variational fit.
    pub objective_trace: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub warnings: Vec<String>,
}

impl FitResult {
    pub fn standard_errors(&self) -> Vec<f64> {
        (0..self.theta_hat.len())
            .map(|j| {
                let v = self.covariance[(j, j)];
                if v >= 0.0 {
                    v.sqrt()
                } else {
                    f64::NAN
                }
            })
            .collect()
    }
}

/// Fits the variational (missing-information) approximation: replay the
/// observed graph along `r` independently sampled orders, pool the
/// (change-vector, edge-indicator) rows with weight 1/r, and maximize the
/// resulting weighted logistic likelihood.
pub fn variational_fit(observed: &Graph, model: &Model, r: usize, seed: u64) -> Result<FitResult> {
    if r == 0 {
        return Err(Error::InvalidArgument("at least one order is required".into()));
    }
    let p = model.p();
    let nd = observed.dyad_count() as usize;
    let mut x = Mat::zeros(r * nd, p);
    let mut y = Vec::with_capacity(r * nd);
    let mut row = 0usize;
    for i in 0..r {
        let mut rng = replicate_rng(seed, ORDER_STREAM, i as u64);
        let order = sample_order(model.order_spec(), observed, &mut rng)?;
        replay(model, observed, &order, |c1, present| {
            for (j, c) in c1.iter().enumerate() {
                x[(row, j)] = *c;
            }
            y.push(if present { 1.0 } else { 0.0 });
            row += 1;
        })?;
    }
    debug_assert_eq!(row, r * nd);
    for j in 0..p {
        if (0..row).all(|i| x[(i, j)] == 0.0) {
            return Err(Error::NonIdentifiable { term: model.term_labels()[j].clone() });
        }
    }
    let w = vec![1.0 / r as f64; row];
    let fit = irls_logistic(&x, &y, &w)?;
    let mut warnings = Vec::new();
    if fit.separation {
        warnings.push(
            "separation: a coefficient diverged; the observed graph is degenerate for this model"
                .into(),
        );
    } else if !fit.converged {
        warnings.push("IRLS did not converge".into());
    }
    Ok(FitResult {
        method: Method::Variational,
        theta_hat: fit.coef.iter().copied().collect(),
        covariance: fit.cov,
        residuals: Vec::new(),
        objective_trace: vec![fit.log_lik],
        converged: fit.converged,
        iterations: fit.iterations,
        warnings,
    })
}

fn initial_theta(
    observed: &Graph,
    model: &Model,
    config: &FitConfig,
    warnings: &mut Vec<String>,
) -> Result<Vec<f64>> {
    if let Some(t0) = &config.theta0 {
        if t0.len() != model.p() {
            return Err(Error::InvalidArgument(format!(
                "theta0 has {} entries, model has {} terms",
                t0.len(),
                model.p()
            )));
        }
        if t0.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("theta0"));
        }
        return Ok(t0.clone());
    }
    let init = variational_fit(observed, model, config.init_orders, config.master_seed)?;
    // A boundary or diverged start would put the sampler in a frozen
    // regime; pull extreme coordinates back to a workable magnitude.
    let theta: Vec<f64> = init.theta_hat.iter().map(|v| v.clamp(-5.0, 5.0)).collect();
    if theta != init.theta_hat {
        warnings.push("variational starting value clamped to [-5, 5]".into());
    }
    Ok(theta)
}

/// One simulated batch summarized as row matrices: model statistics g,
/// accumulators G, and optionally the auxiliary statistics h.
struct Batch {
    g: Mat,
    big_g: Mat,
    h: Option<Mat>,
}

fn simulate_batch(
    model: &Model,
    moments: Option<&Moments>,
    r: usize,
    master_seed: u64,
    stream: u64,
) -> Result<Batch> {
    let p = model.p();
    let rows = sample_batch_map(model, r, master_seed, stream, |draw| {
        let h = moments.map(|m| m.stats(&draw.graph));
        Ok((draw.g, draw.big_g, h))
    })?;
    let mut g = Mat::zeros(r, p);
    let mut big_g = Mat::zeros(r, p);
    let mut h = moments.map(|m| Mat::zeros(r, m.q()));
    for (i, (gi, bi, hi)) in rows.into_iter().enumerate() {
        for j in 0..p {
            g[(i, j)] = gi[j];
            big_g[(i, j)] = bi[j];
        }
        if let (Some(h), Some(hi)) = (&mut h, hi) {
            for (j, v) in hi.iter().enumerate() {
                h[(i, j)] = *v;
            }
        }
    }
    Ok(Batch { g, big_g, h })
}

fn col_means(x: &Mat) -> Vect {
    Vect::from_iterator(x.ncols(), x.column_iter().map(|c| c.mean()))
}

/// Monte Carlo method of moments: solve g(y_obs) = E_θ(g) by simulated
/// Newton steps θ ← θ - α D⁻¹ (g_obs - mean g), where
/// D_kj = -cov(g_k, g_j) + cov(g_k, G_j) estimates -∂E(g_k)/∂θ_j. The
/// damping α shrinks by beta1 when a candidate fails to reduce the
/// Hotelling T² of the residual and grows by beta2 (capped at 1) on
/// acceptance. Converged when T² < epsilon.
///
/// Every model statistic must be order independent; otherwise g(y_obs) is
/// undefined and the fit errors, pointing at [`gmm_fit`].
pub fn mom_fit(observed: &Graph, model: &Model, config: &FitConfig) -> Result<FitResult> {
    config.validate()?;
    let p = model.p();
    let g_obs = Vect::from_vec(model.observed_stats(observed)?);
    let mut warnings = Vec::new();
    let mut theta = initial_theta(observed, model, config, &mut warnings)?;

    const ALPHA_FLOOR: f64 = 1e-3;
    let mut alpha = 1.0f64;
    let mut trace = Vec::new();
    let mut converged = false;
    // Accepted state: residual, objective, Jacobian, statistic covariance.
    let mut accepted: Option<(Vect, f64, Mat, Mat)> = None;
    let mut candidate = theta.clone();
    let mut step = Vect::zeros(p);

    let mut batches = 0usize;
    while batches < config.max_iters {
        batches += 1;
        let m_cand = model.clone().with_theta(candidate.clone())?;
        let batch = simulate_batch(&m_cand, None, config.r, config.master_seed, batches as u64)?;
        let mean_g = col_means(&batch.g);
        let resid = &g_obs - &mean_g;
        let cov_g = sample_cov(&batch.g)?;
        let t2 = hotelling_t2(&resid, &cov_g)?;
        trace.push(t2);

        let accept = match &accepted {
            None => true,
            Some((_, t2_prev, _, _)) => t2 <= *t2_prev * (1.0 + 1e-9) || alpha <= ALPHA_FLOOR,
        };
        if accept {
            if accepted.is_some() {
                alpha = (config.beta2 * alpha).min(1.0);
            }
            let d = -cross_cov(&batch.g, &batch.g)? + cross_cov(&batch.g, &batch.big_g)?;
            theta = candidate.clone();
            accepted = Some((resid.clone(), t2, d, cov_g));
            if t2 < config.epsilon {
                converged = true;
                break;
            }
            let (resid, _, d, _) = accepted.as_ref().unwrap();
            step = solve(d, resid)?;
        } else {
            alpha *= config.beta1;
        }
        candidate = theta
            .iter()
            .zip(step.iter())
            .map(|(t, s)| t - alpha * s)
            .collect();
        if candidate.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("Newton candidate"));
        }
    }

    let (resid, t2, d, cov_g) = accepted.ok_or(Error::InvalidArgument(
        "no batch was evaluated; increase max_iters".into(),
    ))?;
    if !converged {
        warnings.push(format!(
            "stopped after {batches} batches with T² = {t2:.4} >= {}; increase r or max_iters",
            config.epsilon
        ));
    }
    let d_inv = invert(&d)?;
    let covariance = &d_inv * cov_g * d_inv.transpose();
    Ok(FitResult {
        method: Method::Mom,
        theta_hat: theta,
        covariance,
        residuals: resid.iter().copied().collect(),
        objective_trace: trace,
        converged,
        iterations: batches,
        warnings,
    })
}

/// Monte Carlo generalized method of moments over auxiliary statistics h,
/// which must be order independent (the model's own terms need not be).
/// Gauss-Newton steps θ ← θ - α (DᵀWD)⁻¹ DᵀW m̂ with
/// D = -cov(h, g) + cov(h, G), W the (ridge-regularized) inverse of cov(h)
/// from the current batch, and m̂ = h(y_obs) - mean h. A candidate is
/// rejected, shrinking α by beta1, when its residual grows under the
/// previous batch's W. Converged when ||DᵀWm̂||₂ < epsilon; stalling below
/// measurable progress stops early with a warning instead.
pub fn gmm_fit(
    observed: &Graph,
    model: &Model,
    h_specs: Vec<TermSpec>,
    config: &FitConfig,
) -> Result<FitResult> {
    config.validate()?;
    let p = model.p();
    let moments = Moments::new(model, h_specs)?;
    let q = moments.q();
    if q < p {
        return Err(Error::InvalidArgument(format!(
            "{q} moment statistics cannot identify {p} parameters"
        )));
    }
    let h_obs = Vect::from_vec(moments.observed_stats(observed)?);
    let mut warnings = Vec::new();
    let mut theta = initial_theta(observed, model, config, &mut warnings)?;

    const ALPHA_FLOOR: f64 = 1e-3;
    const STALL_TOL: f64 = 1e-3;
    let mut alpha = 1.0f64;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut stalled = 0usize;
    let mut ridge_warned = false;
    // Accepted state: residual, objective under own W, W, D, cov(h).
    let mut accepted: Option<(Vect, f64, Mat, Mat, Mat)> = None;
    let mut candidate = theta.clone();
    let mut step = Vect::zeros(p);

    let mut batches = 0usize;
    while batches < config.max_iters {
        batches += 1;
        let m_cand = model.clone().with_theta(candidate.clone())?;
        let batch =
            simulate_batch(&m_cand, Some(&moments), config.r, config.master_seed, batches as u64)?;
        let h = batch.h.as_ref().expect("moments requested");
        let resid = &h_obs - col_means(h);
        let cov_h = sample_cov(h)?;
        let (w, ridge) = ridge_inverse(&cov_h)?;
        if ridge > 0.0 && !ridge_warned {
            ridge_warned = true;
            warnings.push(format!(
                "cov(h) needed ridge {ridge:.2e}; the moment statistics may be collinear"
            ));
        }

        let obj = resid.dot(&(&w * &resid));
        trace.push(obj);
        // Candidates are compared under the W they were aimed at.
        let accept = match &accepted {
            None => true,
            Some((_, obj_prev, w_prev, _, _)) => {
                let obj_cmp = resid.dot(&(w_prev * &resid));
                obj_cmp <= *obj_prev * (1.0 + 1e-9) || alpha <= ALPHA_FLOOR
            }
        };
        if accept {
            if let Some((_, obj_prev, _, _, _)) = &accepted {
                alpha = (config.beta2 * alpha).min(1.0);
                let rel = (obj_prev - obj).abs() / obj_prev.abs().max(1e-12);
                if rel < STALL_TOL {
                    stalled += 1;
                } else {
                    stalled = 0;
                }
            }
            let d = -cross_cov(h, &batch.g)? + cross_cov(h, &batch.big_g)?;
            theta = candidate.clone();
            let score = d.transpose() * &w * &resid;
            let score_norm = score.norm();
            accepted = Some((resid, obj, w, d, cov_h));
            if score_norm < config.epsilon {
                converged = true;
                break;
            }
            if stalled >= 3 {
                warnings.push(format!(
                    "objective stalled with score norm {score_norm:.3e} >= {}; the Monte Carlo \
                     noise floor was reached, increase r or epsilon",
                    config.epsilon
                ));
                break;
            }
            let (_, _, w, d, _) = accepted.as_ref().unwrap();
            let dtwd = d.transpose() * w * d;
            step = solve(&dtwd, &score)?;
        } else {
            alpha *= config.beta1;
        }
        candidate = theta
            .iter()
            .zip(step.iter())
            .map(|(t, s)| t - alpha * s)
            .collect();
        if candidate.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("Gauss-Newton candidate"));
        }
    }

    let (resid, _, w, d, cov_h) = accepted.ok_or(Error::InvalidArgument(
        "no batch was evaluated; increase max_iters".into(),
    ))?;
    if !converged {
        let score_norm = (d.transpose() * &w * &resid).norm();
        warnings.push(format!(
            "stopped after {batches} batches with score norm {score_norm:.3e} >= {}",
            config.epsilon
        ));
    }
    // Sandwich covariance: bread (DᵀWD)⁻¹, meat DᵀW cov(h) WD.
    let dtw = d.transpose() * &w;
    let bread = invert(&(&dtw * &d))?;
    let covariance = &bread * &dtw * cov_h * dtw.transpose() * bread.transpose();
    Ok(FitResult {
        method: Method::Gmm,
        theta_hat: theta,
        covariance,
        residuals: resid.iter().copied().collect(),
        objective_trace: trace,
        converged,
        iterations: batches,
        warnings,
    })
}

/// Compares the exact moment Jacobian D (from covariances under the
/// enumerated law) against a central finite difference of E_θ(g); returns
/// (D, D_fd, max absolute error). Only feasible on oracle-sized models.
pub fn mom_gradient_check(model: &Model, delta: f64) -> Result<(Mat, Mat, f64)> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::InvalidArgument("delta must be positive".into()));
    }
    let p = model.p();
    let law = crate::oracle::exact_law(model, None)?;
    let mut d_fd = DMatrix::zeros(p, p);
    for j in 0..p {
        let mut up = model.theta().to_vec();
        let mut dn = up.clone();
        up[j] += delta;
        dn[j] -= delta;
        let e_up = crate::oracle::exact_law(&model.clone().with_theta(up)?, None)?.e_g;
        let e_dn = crate::oracle::exact_law(&model.clone().with_theta(dn)?, None)?.e_g;
        for k in 0..p {
            // D estimates -∂E(g_k)/∂θ_j.
            d_fd[(k, j)] = -(e_up[k] - e_dn[k]) / (2.0 * delta);
        }
    }
    let err = (&law.d_mat - &d_fd).abs().max();
    Ok((law.d_mat, d_fd, err))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::OrderSpec;
    use crate::sampler::sample_graph_stats;

    #[test]
    fn config_validation() {
        let mut c = FitConfig::mom();
        assert!(c.validate().is_ok());
        c.r = 1;
        assert!(c.validate().is_err());
        c = FitConfig::gmm();
        c.beta1 = 1.5;
        assert!(c.validate().is_err());
        c = FitConfig::mom();
        c.epsilon = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn variational_recovers_single_edge_parameter() {
        // Dyad-independent model: the variational fit is the exact logistic
        // MLE, so theta_hat = logit(density).
        let model = Model::plain(30, false, OrderSpec::Uniform, vec![TermSpec::Edges])
            .unwrap()
            .with_theta(vec![-1.0])
            .unwrap();
        let mut rng = replicate_rng(7, 0, 0);
        let draw = sample_graph_stats(&model, &mut rng).unwrap();
        let fit = variational_fit(&draw.graph, &model, 5, 11).unwrap();
        let nd = draw.graph.dyad_count() as f64;
        let dens = draw.graph.edge_count() as f64 / nd;
        let logit = (dens / (1.0 - dens)).ln();
        assert!(fit.converged);
        assert!(
            (fit.theta_hat[0] - logit).abs() < 1e-7,
            "{} vs {logit}",
            fit.theta_hat[0]
        );
        // Repeating with a different order seed changes nothing for a
        // dyad-independent model.
        let fit2 = variational_fit(&draw.graph, &model, 3, 99).unwrap();
        assert!((fit.theta_hat[0] - fit2.theta_hat[0]).abs() < 1e-7);
    }

    #[test]
    fn variational_rejects_unidentifiable_term() {
        // degree(5) never moves on a 4-vertex replay... it can: a vertex can
        // reach degree 3 at most, so the change stays 0 and the column is
        // all zeros.
        let model = Model::plain(
            4,
            false,
            OrderSpec::Uniform,
            vec![TermSpec::Edges, TermSpec::Degree { k: 5 }],
        )
        .unwrap();
        let mut rng = replicate_rng(3, 0, 0);
        let draw = sample_graph_stats(&model, &mut rng).unwrap();
        match variational_fit(&draw.graph, &model, 4, 5) {
            Err(Error::NonIdentifiable { term }) => assert_eq!(term, "degree(5)"),
            other => panic!("expected NonIdentifiable, got {other:?}"),
        }
    }

    #[test]
    fn mom_rejects_order_dependent_model() {
        let model = Model::plain(
            10,
            false,
            OrderSpec::singleton_entry(10),
            vec![TermSpec::Edges, TermSpec::SharedNbrs],
        )
        .unwrap();
        let g = model.empty_graph();
        match mom_fit(&g, &model, &FitConfig::mom()) {
            Err(Error::OrderDependentTerm { term }) => assert_eq!(term, "shared-nbrs"),
            other => panic!("expected OrderDependentTerm, got {other:?}"),
        }
    }

    #[test]
    fn mom_recovers_edge_density() {
        // Edges-only model: the moment equation has the closed-form solution
        // logit(density), reachable in a couple of batches.
        let model = Model::plain(25, false, OrderSpec::Uniform, vec![TermSpec::Edges])
            .unwrap()
            .with_theta(vec![0.4])
            .unwrap();
        let mut rng = replicate_rng(21, 0, 0);
        let observed = sample_graph_stats(&model, &mut rng).unwrap().graph;
        let mut config = FitConfig::mom();
        config.r = 400;
        config.master_seed = 5;
        let fit = mom_fit(&observed, &model.clone().with_theta(vec![0.0]).unwrap(), &config)
            .unwrap();
        assert!(fit.converged, "trace {:?}", fit.objective_trace);
        let nd = observed.dyad_count() as f64;
        let dens = observed.edge_count() as f64 / nd;
        let logit = (dens / (1.0 - dens)).ln();
        assert!(
            (fit.theta_hat[0] - logit).abs() < 0.1,
            "{} vs {logit}",
            fit.theta_hat[0]
        );
        assert!(fit.standard_errors()[0] > 0.0);
        // Bit reproducibility.
        let fit2 = mom_fit(&observed, &model.clone().with_theta(vec![0.0]).unwrap(), &config)
            .unwrap();
        assert_eq!(fit.theta_hat, fit2.theta_hat);
    }

    #[test]
    fn gmm_requires_enough_moments() {
        let model = Model::plain(
            8,
            false,
            OrderSpec::singleton_entry(8),
            vec![TermSpec::Edges, TermSpec::PrefAttach { k: 1.0 }],
        )
        .unwrap();
        let g = model.empty_graph();
        let err = gmm_fit(&g, &model, vec![TermSpec::Edges], &FitConfig::gmm());
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
        // Order-dependent h statistics are rejected outright.
        let err = gmm_fit(
            &g,
            &model,
            vec![TermSpec::Edges, TermSpec::SharedNbrs],
            &FitConfig::gmm(),
        );
        assert!(matches!(err, Err(Error::OrderDependentTerm { .. })));
    }

    #[test]
    fn gradient_check_on_edges_model() {
        let model = Model::plain(3, false, OrderSpec::Uniform, vec![TermSpec::Edges])
            .unwrap()
            .with_theta(vec![0.3])
            .unwrap();
        let (_, _, err) = mom_gradient_check(&model, 1e-4).unwrap();
        assert!(err < 1e-7, "max Jacobian error {err}");
    }
}
