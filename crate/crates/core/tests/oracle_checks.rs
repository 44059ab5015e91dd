//! The enumerated exact law against its own internal identities and against
//! the forward sampler.

use lolog::estimate::mom_gradient_check;
use lolog::model::{Model, Moments};
use lolog::oracle::{dyad_independent_e_g, exact_law};
use lolog::order::{log_prob_order, OrderSpec};
use lolog::sampler::{replicate_rng, sample_batch, sample_graph};
use lolog::terms::TermSpec;
use lolog::{AttrColumn, Attributes};

fn rich_model(theta: Vec<f64>) -> Model {
    Model::plain(
        4,
        false,
        OrderSpec::VertexEntry { groups: vec![vec![0], vec![1, 2], vec![3]] },
        vec![
            TermSpec::Edges,
            TermSpec::Triangles,
            TermSpec::PrefAttach { k: 1.5 },
            TermSpec::SharedNbrs,
            TermSpec::LogOrder,
        ],
    )
    .unwrap()
    .with_theta(theta)
    .unwrap()
}

#[test]
fn law_normalizes_for_random_parameters() {
    let thetas = [
        vec![0.2, -0.4, 0.7, 0.3, -0.2],
        vec![-1.0, 0.8, -0.5, 0.6, 0.4],
        vec![1.2, 0.1, 0.2, -0.8, -0.6],
        vec![0.0, 1.5, -1.2, 0.2, 0.9],
        vec![-0.3, -0.9, 0.4, 1.0, -1.1],
    ];
    for theta in thetas {
        let law = exact_law(&rich_model(theta.clone()), None).unwrap();
        assert!(
            (law.total - 1.0).abs() < 1e-10,
            "theta {theta:?}: total {}",
            law.total
        );
    }
}

#[test]
fn expectation_identity_e_big_g_equals_e_g() {
    let law = exact_law(&rich_model(vec![0.5, -0.3, 0.6, 0.2, -0.4]), None).unwrap();
    for j in 0..5 {
        assert!(
            (law.e_g[j] - law.e_big_g[j]).abs() < 1e-10,
            "component {j}: {} vs {}",
            law.e_g[j],
            law.e_big_g[j]
        );
    }
}

#[test]
fn sampler_is_unbiased_against_the_exact_law() {
    // Monte Carlo means of g must sit within 4 standard errors of the
    // enumerated expectations, per component.
    let model = Model::plain(
        3,
        false,
        OrderSpec::Uniform,
        vec![TermSpec::Edges, TermSpec::Triangles],
    )
    .unwrap()
    .with_theta(vec![0.5, 1.0])
    .unwrap();
    let law = exact_law(&model, None).unwrap();
    let r = 20_000usize;
    let draws = sample_batch(&model, r, 2024).unwrap();
    for j in 0..2 {
        let mean: f64 = draws.iter().map(|d| d.g[j]).sum::<f64>() / r as f64;
        let se = (law.cov_g[(j, j)] / r as f64).sqrt();
        assert!(
            (mean - law.e_g[j]).abs() < 4.0 * se,
            "component {j}: mc {mean} vs exact {} (se {se})",
            law.e_g[j]
        );
    }
}

#[test]
fn sampled_graph_frequencies_match_the_law() {
    // Direct frequency comparison per configuration on an order-dependent
    // model, within 4 binomial standard errors.
    let model = Model::plain(
        3,
        false,
        OrderSpec::singleton_entry(3),
        vec![TermSpec::Edges, TermSpec::SharedNbrs],
    )
    .unwrap()
    .with_theta(vec![0.3, 0.8])
    .unwrap();
    let law = exact_law(&model, None).unwrap();
    let r = 40_000usize;
    let draws = sample_batch(&model, r, 77).unwrap();
    let mut freq = vec![0u32; 8];
    for d in &draws {
        let mut mask = 0usize;
        for e in d.graph.edges() {
            mask |= 1 << d.graph.dyad_index(e).unwrap();
        }
        freq[mask] += 1;
    }
    for (mask, p) in law.probs.iter().enumerate() {
        let obs = freq[mask] as f64 / r as f64;
        let se = (p * (1.0 - p) / r as f64).sqrt();
        assert!(
            (obs - p).abs() < 4.0 * se + 1e-12,
            "mask {mask}: obs {obs} vs exact {p}"
        );
    }
}

#[test]
fn dyad_independent_expectations_cross_check() {
    let mut attrs = Attributes::from_labels(vec!["a".into(), "b".into(), "c".into()]).unwrap();
    attrs
        .add_column("x", AttrColumn::Numeric(vec![1.0, 2.0, 3.0]))
        .unwrap();
    let model = Model::new(
        3,
        false,
        OrderSpec::Uniform,
        vec![TermSpec::Edges, TermSpec::NodecovMain { attr: "x".into() }],
        Some(attrs),
    )
    .unwrap()
    .with_theta(vec![-0.2, 0.15])
    .unwrap();
    let law = exact_law(&model, None).unwrap();
    let closed = dyad_independent_e_g(&model).unwrap();
    for j in 0..2 {
        assert!(
            (law.e_g[j] - closed[j]).abs() < 1e-12,
            "{} vs {}",
            law.e_g[j],
            closed[j]
        );
    }
}

#[test]
fn jacobian_matches_finite_differences() {
    let model = rich_model(vec![0.4, -0.2, 0.5, 0.3, -0.1]);
    let (_, _, err) = mom_gradient_check(&model, 1e-4).unwrap();
    assert!(err < 1e-5, "max Jacobian error {err}");
}

#[test]
fn gmm_jacobian_reduces_to_mom_jacobian_on_shared_statistics() {
    // With h = g's order-independent subset, the GMM Jacobian rows must
    // equal the corresponding MOM Jacobian rows.
    let model = Model::plain(
        3,
        false,
        OrderSpec::Uniform,
        vec![TermSpec::Edges, TermSpec::Triangles],
    )
    .unwrap()
    .with_theta(vec![0.4, 0.6])
    .unwrap();
    let moments =
        Moments::new(&model, vec![TermSpec::Edges, TermSpec::Triangles]).unwrap();
    let law = exact_law(&model, Some(&moments)).unwrap();
    let d_h = law.d_h.as_ref().unwrap();
    for k in 0..2 {
        for j in 0..2 {
            assert!(
                (law.d_mat[(k, j)] - d_h[(k, j)]).abs() < 1e-10,
                "({k},{j}): {} vs {}",
                law.d_mat[(k, j)],
                d_h[(k, j)]
            );
        }
    }
}

#[test]
fn sampled_orders_have_the_enumerated_probability() {
    // Any sampled order's log-probability equals the common enumeration
    // value (all realizations are equiprobable).
    for spec in [
        OrderSpec::Uniform,
        OrderSpec::singleton_entry(4),
        OrderSpec::VertexEntry { groups: vec![vec![0], vec![1, 2], vec![3]] },
    ] {
        let model = Model::plain(4, false, spec, vec![TermSpec::Edges]).unwrap();
        let mut rng = replicate_rng(5, 3, 1);
        let draw = sample_graph(&model, &mut rng).unwrap();
        let order = draw.order.as_ref().unwrap();
        let lp = log_prob_order(model.order_spec(), &draw.graph, order).unwrap();
        assert!(lp.is_finite());
        // Cross-check against enumeration via the exact law total instead
        // of exposing the enumerator: p(s) consistency is already implied
        // by law normalization, so here just pin the uniform value.
        if matches!(model.order_spec(), OrderSpec::Uniform) {
            assert!((lp - -(720.0f64).ln()).abs() < 1e-10);
        }
    }
}
