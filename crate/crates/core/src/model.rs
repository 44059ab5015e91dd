//! Model assembly: an ordered term list, a parameter vector θ, and an
//! ordering distribution, validated against the vertex set and attribute
//! table. Also the moment-statistic bundle used by GMM fitting.

use std::sync::Arc;

use crate::attrs::Attributes;
use crate::error::{Error, Result};
use crate::graph::{Dyad, Graph};
use crate::order::{EdgeOrder, OrderSpec};
use crate::terms::{Term, TermSpec};

/// A fully validated LOLOG model. Immutable except for θ; cheap to clone and
/// safe to share across sampler threads.
#[derive(Debug, Clone)]
pub struct Model {
    n: u32,
    directed: bool,
    order: OrderSpec,
    specs: Vec<TermSpec>,
    terms: Vec<Term>,
    theta: Vec<f64>,
    attrs: Option<Arc<Attributes>>,
}

impl Model {
    /// Builds and validates a model; θ starts at zero. Terms that need entry
    /// times (`log-order`, `pref-attach`) require a vertex-entry ordering.
    pub fn new(
        n: u32,
        directed: bool,
        order: OrderSpec,
        specs: Vec<TermSpec>,
        attrs: Option<Attributes>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("model needs at least 1 vertex".into()));
        }
        if specs.is_empty() {
            return Err(Error::InvalidArgument("model needs at least one term".into()));
        }
        order.validate(n)?;
        if let Some(a) = &attrs {
            if a.n() != n {
                return Err(Error::InvalidArgument(format!(
                    "attribute table has {} rows, model has {n} vertices",
                    a.n()
                )));
            }
        }
        let mut terms = Vec::with_capacity(specs.len());
        for spec in &specs {
            if spec.needs_entry_times() && !order.is_vertex_entry() {
                return Err(Error::OrderRequired { term: spec.label() });
            }
            terms.push(spec.compile(n, attrs.as_ref())?);
        }
        let theta = vec![0.0; specs.len()];
        Ok(Model { n, directed, order, specs, terms, theta, attrs: attrs.map(Arc::new) })
    }

    /// Convenience constructor for attribute-free models.
    pub fn plain(n: u32, directed: bool, order: OrderSpec, specs: Vec<TermSpec>) -> Result<Self> {
        Model::new(n, directed, order, specs, None)
    }

    pub fn with_theta(mut self, theta: Vec<f64>) -> Result<Self> {
        self.set_theta(&theta)?;
        Ok(self)
    }

    pub fn set_theta(&mut self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.terms.len() {
            return Err(Error::InvalidArgument(format!(
                "theta has {} entries, model has {} terms",
                theta.len(),
                self.terms.len()
            )));
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite("theta"));
        }
        self.theta.clear();
        self.theta.extend_from_slice(theta);
        Ok(())
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    pub fn order(&self) -> &OrderSpec {
        self.order_spec()
    }

    pub fn order_spec(&self) -> &OrderSpec {
        &self.order
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Number of terms (the dimension of θ, c, g, and G).
    pub fn p(&self) -> usize {
        self.terms.len()
    }

    pub fn term_specs(&self) -> &[TermSpec] {
        &self.specs
    }

    pub fn term_labels(&self) -> Vec<String> {
        self.specs.iter().map(|s| s.label()).collect()
    }

    pub fn attributes(&self) -> Option<&Attributes> {
        self.attrs.as_deref()
    }

    /// An empty graph shaped like this model's vertex set.
    pub fn empty_graph(&self) -> Graph {
        Graph::new(self.n, self.directed).expect("n >= 1")
    }

    pub fn has_entry_terms(&self) -> bool {
        self.specs.iter().any(|s| s.needs_entry_times())
    }

    /// All terms order-independent under this model's ordering?
    pub fn order_independent(&self) -> bool {
        self.specs.iter().all(|s| s.order_independent(&self.order))
    }

    pub fn dyad_independent(&self) -> bool {
        self.specs.iter().all(|s| s.dyad_independent())
    }

    /// Deterministic entry times implied by singleton entry groups, if any.
    pub fn static_entry_times(&self) -> Option<Vec<u32>> {
        self.order.deterministic_entry_times(self.n)
    }

    fn check_graph(&self, g: &Graph) -> Result<()> {
        if g.n() != self.n || g.directed() != self.directed {
            return Err(Error::OrderMismatch(format!(
                "graph (n={}, directed={}) does not match model (n={}, directed={})",
                g.n(),
                g.directed(),
                self.n,
                self.directed
            )));
        }
        Ok(())
    }

    fn check_entry_times(&self, entry_times: Option<&[u32]>, d: Dyad) -> Result<()> {
        if self.has_entry_terms() {
            let et = entry_times.ok_or_else(|| Error::OrderRequired {
                term: self
                    .specs
                    .iter()
                    .find(|s| s.needs_entry_times())
                    .map(|s| s.label())
                    .unwrap_or_default(),
            })?;
            if et.len() != self.n as usize {
                return Err(Error::OrderMismatch("entry_times length mismatch".into()));
            }
            for v in [d.tail, d.head] {
                if et[v as usize] == 0 {
                    return Err(Error::OrderMismatch(format!(
                        "vertex {v} has no entry time"
                    )));
                }
            }
        }
        Ok(())
    }

    /// The change-statistic vector c(1 | y^{t-1}, s_{<=t}) for dyad `d`.
    /// Pure: does not mutate `g`.
    pub fn change_stats(
        &self,
        g: &Graph,
        entry_times: Option<&[u32]>,
        d: Dyad,
    ) -> Result<Vec<f64>> {
        self.check_graph(g)?;
        if d.tail == d.head {
            return Err(Error::SelfLoop(d.tail));
        }
        for v in [d.tail, d.head] {
            if v >= self.n {
                return Err(Error::VertexOutOfRange { v, n: self.n });
            }
        }
        self.check_entry_times(entry_times, d)?;
        let mut out = vec![0.0; self.p()];
        self.change_into(g, entry_times, d, &mut out);
        Ok(out)
    }

    /// Hot-path variant: caller guarantees a valid dyad and entry times.
    #[inline]
    pub(crate) fn change_into(
        &self,
        g: &Graph,
        entry_times: Option<&[u32]>,
        d: Dyad,
        out: &mut [f64],
    ) {
        for (term, slot) in self.terms.iter().zip(out.iter_mut()) {
            *slot = term.change(g, entry_times, d);
        }
    }

    /// As [`change_stats`](Self::change_stats), then sets the edge. The
    /// returned vector equals `change_stats` computed immediately before.
    pub fn apply_edge(
        &self,
        g: &mut Graph,
        entry_times: Option<&[u32]>,
        d: Dyad,
    ) -> Result<Vec<f64>> {
        let c = self.change_stats(g, entry_times, d)?;
        g.set_edge(d, true)?;
        Ok(c)
    }

    /// g(y, s): replays `order` from the empty graph, summing the realized
    /// change statistics of the edges present in `g_final`.
    pub fn full_stats(&self, g_final: &Graph, order: &EdgeOrder) -> Result<Vec<f64>> {
        self.check_graph(g_final)?;
        let mut g = vec![0.0; self.p()];
        crate::sampler::replay(self, g_final, order, |c, present| {
            if present {
                for (acc, ci) in g.iter_mut().zip(c) {
                    *acc += ci;
                }
            }
        })?;
        Ok(g)
    }

    /// Evaluates g(y) directly on a final graph. Requires every term to be
    /// order-independent under this model's ordering.
    pub fn observed_stats(&self, g: &Graph) -> Result<Vec<f64>> {
        self.check_graph(g)?;
        let et = self.static_entry_times();
        let mut out = Vec::with_capacity(self.p());
        for (term, spec) in self.terms.iter().zip(&self.specs) {
            match term.static_stat(g, et.as_deref()) {
                Some(v) => out.push(v),
                None => return Err(Error::OrderDependentTerm { term: spec.label() }),
            }
        }
        Ok(out)
    }
}

/// Order-independent moment statistics h(y) for GMM estimation, compiled in
/// the context of a model (same vertex set, attributes, and ordering).
#[derive(Debug, Clone)]
pub struct Moments {
    specs: Vec<TermSpec>,
    terms: Vec<Term>,
    entry_times: Option<Vec<u32>>,
    n: u32,
    directed: bool,
}

impl Moments {
    pub fn new(model: &Model, specs: Vec<TermSpec>) -> Result<Self> {
        if specs.is_empty() {
            return Err(Error::InvalidArgument("moment list is empty".into()));
        }
        let mut terms = Vec::with_capacity(specs.len());
        for spec in &specs {
            if !spec.order_independent(model.order_spec()) {
                return Err(Error::OrderDependentTerm { term: spec.label() });
            }
            terms.push(spec.compile(model.n(), model.attributes())?);
        }
        Ok(Moments {
            specs,
            terms,
            entry_times: model.static_entry_times(),
            n: model.n(),
            directed: model.directed(),
        })
    }

    pub fn q(&self) -> usize {
        self.terms.len()
    }

    pub fn term_specs(&self) -> &[TermSpec] {
        &self.specs
    }

    pub fn term_labels(&self) -> Vec<String> {
        self.specs.iter().map(|s| s.label()).collect()
    }

    /// h(y) on a final graph.
    pub fn observed_stats(&self, g: &Graph) -> Result<Vec<f64>> {
        if g.n() != self.n || g.directed() != self.directed {
            return Err(Error::OrderMismatch("graph does not match moment spec".into()));
        }
        Ok(self.stats(g))
    }

    pub(crate) fn stats(&self, g: &Graph) -> Vec<f64> {
        self.terms
            .iter()
            .map(|t| {
                t.static_stat(g, self.entry_times.as_deref())
                    .expect("moment terms are order-independent")
            })
            .collect()
    }
}
