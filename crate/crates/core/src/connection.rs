//! Lattice connections (one group element per edge), gauge transforms (one
//! per vertex) and the holonomy data derived from them.
//!
//! Holonomy of a word is the ordered product of its edge elements read left
//! to right, with inverses for reversed letters, so `h(γ₁γ₂) = h(γ₁)·h(γ₂)`.
//! A gauge transform `g` acts on an edge `e: x → y` by `g_x⁻¹ · h(e) · g_y`.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupSpec, Subgroup};
use crate::howe::{HoweType, TypePoset};
use crate::path::{Graph, PathWord};

#[derive(Debug, Clone, PartialEq)]
pub struct Connection {
    spec: GroupSpec,
    graph: Arc<Graph>,
    values: Vec<GroupElement>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaugeTransform {
    graph: Arc<Graph>,
    values: Vec<GroupElement>,
}

impl GaugeTransform {
    pub fn new(spec: &GroupSpec, graph: Arc<Graph>, values: Vec<GroupElement>) -> Result<Self> {
        if values.len() != graph.vertices().len() {
            return Err(Error::InvalidArgument(format!(
                "gauge transform has {} values for {} vertices",
                values.len(),
                graph.vertices().len()
            )));
        }
        values.iter().try_for_each(|g| spec.check(g))?;
        Ok(GaugeTransform { graph, values })
    }

    pub fn identity(spec: &GroupSpec, graph: Arc<Graph>) -> Self {
        let values = vec![spec.identity(); graph.vertices().len()];
        GaugeTransform { graph, values }
    }

    pub fn random<R: Rng + ?Sized>(spec: &GroupSpec, graph: Arc<Graph>, rng: &mut R) -> Self {
        let values = (0..graph.vertices().len()).map(|_| spec.haar_sample(rng)).collect();
        GaugeTransform { graph, values }
    }

    pub fn values(&self) -> &[GroupElement] {
        &self.values
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }

    /// Pointwise product `(g·g')_x = g_x · g'_x`.
    pub fn compose(&self, spec: &GroupSpec, other: &GaugeTransform) -> Result<GaugeTransform> {
        if *self.graph != *other.graph {
            return Err(Error::GraphMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| spec.multiply(a, b))
            .collect::<Result<_>>()?;
        Ok(GaugeTransform {
            graph: self.graph.clone(),
            values,
        })
    }
}

impl Connection {
    pub fn new(spec: GroupSpec, graph: Arc<Graph>, values: Vec<GroupElement>) -> Result<Self> {
        if values.len() != graph.edges().len() {
            return Err(Error::InvalidArgument(format!(
                "connection has {} values for {} edges",
                values.len(),
                graph.edges().len()
            )));
        }
        values.iter().try_for_each(|g| spec.check(g))?;
        Ok(Connection { spec, graph, values })
    }

    /// Every edge carries the identity.
    pub fn trivial(spec: GroupSpec, graph: Arc<Graph>) -> Self {
        let values = vec![spec.identity(); graph.edges().len()];
        Connection { spec, graph, values }
    }

    /// Independent Haar element per edge.
    pub fn random<R: Rng + ?Sized>(spec: GroupSpec, graph: Arc<Graph>, rng: &mut R) -> Self {
        let values = (0..graph.edges().len()).map(|_| spec.haar_sample(rng)).collect();
        Connection { spec, graph, values }
    }

    /// The connection on a bouquet of `values.len()` loops at one vertex.
    pub fn bouquet(spec: GroupSpec, values: Vec<GroupElement>) -> Result<Self> {
        let graph = Arc::new(Graph::bouquet(values.len()));
        Connection::new(spec, graph, values)
    }

    pub fn spec(&self) -> &GroupSpec {
        &self.spec
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }

    pub fn values(&self) -> &[GroupElement] {
        &self.values
    }

    pub fn value(&self, edge: &str) -> Option<&GroupElement> {
        self.graph.edge_index(edge).map(|i| &self.values[i])
    }

    pub fn holonomy(&self, w: &PathWord) -> Result<GroupElement> {
        let mut acc = self.spec.identity();
        for l in w.letters() {
            let h = self
                .values
                .get(l.edge)
                .ok_or_else(|| Error::UnknownEdge(format!("#{}", l.edge)))?;
            let factor = if l.forward { h.clone() } else { self.spec.inverse(h)? };
            acc = self.spec.multiply(&acc, &factor)?;
        }
        Ok(acc)
    }

    /// `A ∘ g`: each edge `e: x → y` becomes `g_x⁻¹ · h(e) · g_y`.
    pub fn act(&self, gauge: &GaugeTransform) -> Result<Connection> {
        if *self.graph != *gauge.graph {
            return Err(Error::GraphMismatch);
        }
        let values = self
            .graph
            .edges()
            .iter()
            .zip(&self.values)
            .map(|(e, h)| {
                let gx_inv = self.spec.inverse(&gauge.values[e.source])?;
                let hy = self.spec.multiply(h, &gauge.values[e.target])?;
                self.spec.multiply(&gx_inv, &hy)
            })
            .collect::<Result<_>>()?;
        Ok(Connection {
            spec: self.spec.clone(),
            graph: self.graph.clone(),
            values,
        })
    }

    /// `φ_α(A) = (h(α_1), …, h(α_n))` for loops at the base.
    pub fn reduction_map(&self, loops: &[PathWord]) -> Result<Vec<GroupElement>> {
        let base = self.graph.base();
        loops
            .iter()
            .map(|w| {
                if !w.is_loop_at(base) {
                    return Err(Error::NotALoop);
                }
                self.holonomy(w)
            })
            .collect()
    }

    /// Holonomies of the fundamental loops: a finite generating set of the holonomy group.
    pub fn holonomy_generators(&self) -> Result<Vec<GroupElement>> {
        self.reduction_map(&self.graph.fundamental_loops()?)
    }

    /// `Z(H_A)`.
    pub fn centralizer(&self) -> Result<Subgroup> {
        self.spec.centralizer(&self.holonomy_generators()?)
    }

    /// Greedily reduced holonomy generators with the same centralizer.
    pub fn reduced_generators(&self) -> Result<Vec<GroupElement>> {
        self.spec.reduce_generators(&self.holonomy_generators()?)
    }

    /// Gauge orbit type: the class of `Z(H_A)` in the type poset.
    pub fn orbit_type<'p>(&self, poset: &'p TypePoset) -> Result<&'p HoweType> {
        if *poset.spec() != self.spec {
            return Err(Error::SpecMismatch(format!(
                "poset of {} used for connection over {}",
                poset.spec(),
                self.spec
            )));
        }
        poset.type_of(&self.reduced_generators()?)
    }

    /// The stabilizer element with `g_m = z`: `g_x = h(γ_x)⁻¹ · z · h(γ_x)` along tree paths.
    pub fn stabilizer_transport(&self, z: &GroupElement) -> Result<GaugeTransform> {
        self.spec.check(z)?;
        if !self.spec.subgroup_has(&self.centralizer()?, z)? {
            return Err(Error::NotInCentralizer);
        }
        let values = self
            .graph
            .tree_paths()?
            .iter()
            .map(|p| self.spec.conjugate(z, &self.holonomy(p)?))
            .collect::<Result<_>>()?;
        Ok(GaugeTransform {
            graph: self.graph.clone(),
            values,
        })
    }

    /// Projection onto a sub-graph, matching edges by name.
    pub fn restrict(&self, sub: &Graph) -> Result<Connection> {
        let idx = self.graph.contains_subgraph(sub)?;
        Ok(Connection {
            spec: self.spec.clone(),
            graph: Arc::new(sub.clone()),
            values: idx.into_iter().map(|i| self.values[i].clone()).collect(),
        })
    }

    /// Edge-wise equality: exact for finite groups, within `TAU_EQ` otherwise.
    pub fn approx_eq(&self, other: &Connection) -> bool {
        *self.graph == *other.graph
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| self.spec.approx_eq(a, b))
    }
}
