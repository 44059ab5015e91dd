//! End-to-end estimator behavior on simulated data: exactness where closed
//! forms exist, parameter recovery where they do not, and strict
//! reproducibility everywhere.

use lolog::estimate::{gmm_fit, mom_fit, variational_fit, FitConfig};
use lolog::model::Model;
use lolog::numerics::{irls_logistic, Mat};
use lolog::order::OrderSpec;
use lolog::sampler::{replicate_rng, sample_graph_stats};
use lolog::terms::TermSpec;
use lolog::{AttrColumn, Attributes, Graph};

fn grouped_attrs(n: u32) -> Attributes {
    let labels = (0..n).map(|i| format!("v{i}")).collect();
    let mut attrs = Attributes::from_labels(labels).unwrap();
    let levels = vec!["a".to_string(), "b".to_string()];
    let codes = (0..n).map(|i| (i / (n / 2)).min(1)).collect();
    attrs.add_column("grp", AttrColumn::Categorical { levels, codes }).unwrap();
    attrs
}

fn dyad_independent_model(n: u32) -> Model {
    Model::new(
        n,
        false,
        OrderSpec::Uniform,
        vec![TermSpec::Edges, TermSpec::Nodematch { attr: "grp".into() }],
        Some(grouped_attrs(n)),
    )
    .unwrap()
    .with_theta(vec![-1.5, 1.0])
    .unwrap()
}

fn observed_from(model: &Model, seed: u64) -> Graph {
    let mut rng = replicate_rng(seed, 0, 0);
    sample_graph_stats(model, &mut rng).unwrap().graph
}

/// Logistic MLE on the per-dyad design, which is exact for dyad-independent
/// models.
fn direct_logistic_mle(model: &Model, observed: &Graph) -> Vec<f64> {
    let empty = model.empty_graph();
    let nd = empty.dyad_count();
    let mut x = Mat::zeros(nd as usize, model.p());
    let mut y = Vec::with_capacity(nd as usize);
    for k in 0..nd {
        let d = empty.dyad_at(k).unwrap();
        let c = model.change_stats(&empty, None, d).unwrap();
        for (j, cj) in c.iter().enumerate() {
            x[(k as usize, j)] = *cj;
        }
        y.push(if observed.has_edge(d) { 1.0 } else { 0.0 });
    }
    let w = vec![1.0; nd as usize];
    let fit = irls_logistic(&x, &y, &w).unwrap();
    assert!(fit.converged);
    fit.coef.iter().copied().collect()
}

#[test]
fn variational_equals_direct_mle_when_dyad_independent() {
    let model = dyad_independent_model(40);
    let observed = observed_from(&model, 31);
    let mle = direct_logistic_mle(&model, &observed);
    // Any number of orders and any order seed give the same answer: the
    // pooled rows are identical copies of the static design.
    for (r, seed) in [(1usize, 5u64), (7, 99)] {
        let fit = variational_fit(&observed, &model, r, seed).unwrap();
        assert!(fit.converged);
        for j in 0..model.p() {
            assert!(
                (fit.theta_hat[j] - mle[j]).abs() < 1e-8,
                "r={r}: component {j}: {} vs {}",
                fit.theta_hat[j],
                mle[j]
            );
        }
    }
}

#[test]
fn mom_agrees_with_direct_mle_when_dyad_independent() {
    // The moment equations of a dyad-independent model are solved by the
    // MLE; Monte Carlo noise is the only slack, so theta_hat must land
    // within a few reported standard errors.
    let model = dyad_independent_model(40);
    let observed = observed_from(&model, 31);
    let mle = direct_logistic_mle(&model, &observed);
    let mut config = FitConfig::mom();
    config.r = 600;
    config.master_seed = 12;
    let fit = mom_fit(&observed, &model, &config).unwrap();
    assert!(fit.converged, "trace {:?}", fit.objective_trace);
    let se = fit.standard_errors();
    for j in 0..model.p() {
        assert!(se[j].is_finite() && se[j] > 0.0);
        assert!(
            (fit.theta_hat[j] - mle[j]).abs() < 3.0 * se[j].max(0.05),
            "component {j}: {} vs mle {} (se {})",
            fit.theta_hat[j],
            mle[j],
            se[j]
        );
    }
}

#[test]
fn mom_recovers_triangle_model_parameters() {
    // Order-independent but dyad-dependent: edges + triangles at n = 16.
    let truth = vec![-1.2, 0.4];
    let model = Model::plain(
        16,
        false,
        OrderSpec::Uniform,
        vec![TermSpec::Edges, TermSpec::Triangles],
    )
    .unwrap()
    .with_theta(truth.clone())
    .unwrap();
    let observed = observed_from(&model, 8);
    let mut config = FitConfig::mom();
    config.r = 800;
    config.master_seed = 3;
    let fit = mom_fit(&observed, &model, &config).unwrap();
    assert!(fit.converged, "trace {:?}", fit.objective_trace);
    // One realization of a small graph: recovery is loose but the moment
    // residual at the solution must be small relative to its spread, which
    // is what convergence asserts; sanity-bound the estimate too.
    for j in 0..2 {
        assert!(
            (fit.theta_hat[j] - truth[j]).abs() < 1.5,
            "component {j}: {} vs {}",
            fit.theta_hat[j],
            truth[j]
        );
    }
    let fit2 = mom_fit(&observed, &model, &config).unwrap();
    assert_eq!(fit.theta_hat, fit2.theta_hat);
    assert_eq!(fit.objective_trace, fit2.objective_trace);
}

#[test]
fn mom_handles_entry_terms_with_deterministic_order() {
    // log-order under singleton entry is order-independent, so MOM applies
    // even though the term needs entry times.
    let model = Model::plain(
        14,
        false,
        OrderSpec::singleton_entry(14),
        vec![TermSpec::Edges, TermSpec::LogOrder],
    )
    .unwrap()
    .with_theta(vec![0.5, -0.6])
    .unwrap();
    let observed = observed_from(&model, 21);
    let mut config = FitConfig::mom();
    config.r = 500;
    config.master_seed = 9;
    let fit = mom_fit(&observed, &model, &config).unwrap();
    assert!(fit.converged, "trace {:?}", fit.objective_trace);
    assert!(fit.theta_hat.iter().all(|t| t.is_finite()));
}

#[test]
fn gmm_fits_pref_attach_and_reports_progress() {
    let truth = vec![0.0, 1.0];
    let model = Model::plain(
        60,
        false,
        OrderSpec::singleton_entry(60),
        vec![TermSpec::Edges, TermSpec::PrefAttach { k: 1.0 }],
    )
    .unwrap()
    .with_theta(truth.clone())
    .unwrap();
    let observed = observed_from(&model, 14);
    let mut config = FitConfig::gmm();
    config.r = 250;
    config.max_iters = 10;
    config.master_seed = 4;
    let h = vec![TermSpec::Edges, TermSpec::TwoStars, TermSpec::Degree { k: 1 }];
    let fit = gmm_fit(&observed, &model, h.clone(), &config).unwrap();
    assert_eq!(fit.residuals.len(), 3);
    assert!(fit.theta_hat.iter().all(|t| t.is_finite()));
    // The final objective must improve on the starting one.
    let first = fit.objective_trace.first().unwrap();
    let last = fit.objective_trace.last().unwrap();
    assert!(last <= first, "objective went {first} -> {last}");
    // Estimates should be in the neighborhood of the truth even at small r.
    assert!((fit.theta_hat[0] - truth[0]).abs() < 1.0, "{:?}", fit.theta_hat);
    assert!((fit.theta_hat[1] - truth[1]).abs() < 1.0, "{:?}", fit.theta_hat);
    let se = fit.standard_errors();
    assert!(se.iter().all(|s| s.is_finite() && *s > 0.0), "se {se:?}");
    let fit2 = gmm_fit(&observed, &model, h, &config).unwrap();
    assert_eq!(fit.theta_hat, fit2.theta_hat);
}

#[test]
fn fits_are_insensitive_to_thread_count() {
    // The replicate RNG scheme must make results identical under different
    // rayon pool sizes. Run the same MOM fit inside 1- and 2-thread pools.
    let model = dyad_independent_model(24);
    let observed = observed_from(&model, 5);
    let mut config = FitConfig::mom();
    config.r = 200;
    config.master_seed = 77;
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let model = model.clone();
        let observed = observed.clone();
        let config = config.clone();
        pool.install(move || mom_fit(&observed, &model, &config).unwrap().theta_hat)
    };
    assert_eq!(run(1), run(2));
}
