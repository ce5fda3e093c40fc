use rand::Rng;

use super::AttributedGraph;
use crate::error::{Error, Result};

/// A small attributed graph whose vertex and edge attributes are trainable
/// weights: vertex `a` carries `W_a`, edge `ab` carries `W_ab`.
///
/// Vertices are numbered `0..num_vertices`. With `edge_dim == 0` the filter
/// only has vertex weights (the no-edge model).
#[derive(Debug, Clone, PartialEq)]
pub struct FilterGraph {
    graph: AttributedGraph,
}

impl FilterGraph {
    pub fn new(
        num_vertices: usize,
        edges: &[(usize, usize)],
        vertex_dim: usize,
        vertex_weights: Vec<f64>,
        edge_dim: usize,
        edge_weights: Vec<f64>,
    ) -> Result<Self> {
        if num_vertices == 0 {
            return Err(Error::domain("a filter graph needs at least one vertex"));
        }
        if vertex_weights.len() != num_vertices * vertex_dim {
            return Err(Error::domain(format!(
                "filter has {num_vertices} vertices of dimension {vertex_dim} but {} weights",
                vertex_weights.len()
            )));
        }
        let graph = AttributedGraph::from_indexed(vertex_dim, vertex_weights, edges, edge_dim, edge_weights)?;
        Ok(Self { graph })
    }

    /// Uses an attributed graph's attributes as filter weights. Vertices are
    /// renumbered `0..n` in id order.
    pub fn from_graph(graph: &AttributedGraph) -> Result<Self> {
        Self::new(
            graph.num_vertices(),
            graph.edges(),
            graph.vertex_dim(),
            graph.vertex_attrs().to_vec(),
            graph.edge_dim(),
            graph.edge_attrs().to_vec(),
        )
    }

    /// Scalar vertex-only filter, e.g. `[-1, 1]` for the edge detector.
    pub fn from_scalars(weights: &[f64]) -> Result<Self> {
        Self::new(weights.len(), &[], 1, weights.to_vec(), 0, Vec::new())
    }

    /// Zero-weight filter on a star topology: vertex 0 is joined to every
    /// other vertex, which mirrors the shape of a 1-hop neighbourhood.
    pub fn star(num_vertices: usize, vertex_dim: usize, edge_dim: usize) -> Result<Self> {
        let edges: Vec<_> = (1..num_vertices).map(|b| (0, b)).collect();
        Self::new(
            num_vertices,
            &edges,
            vertex_dim,
            vec![0.0; num_vertices * vertex_dim],
            edge_dim,
            vec![0.0; edges.len() * edge_dim],
        )
    }

    /// Draws every weight uniformly from `[-limit, limit]`.
    pub fn randomize(&mut self, limit: f64, rng: &mut impl Rng) {
        for w in self.vertex_weights_mut() {
            *w = rng.gen_range(-limit..=limit);
        }
        for w in self.edge_weights_mut() {
            *w = rng.gen_range(-limit..=limit);
        }
    }

    pub fn as_graph(&self) -> &AttributedGraph {
        &self.graph
    }

    pub fn num_vertices(&self) -> usize {
        self.graph.num_vertices()
    }

    pub fn num_edges(&self) -> usize {
        self.graph.num_edges()
    }

    pub fn vertex_dim(&self) -> usize {
        self.graph.vertex_dim()
    }

    pub fn edge_dim(&self) -> usize {
        self.graph.edge_dim()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        self.graph.edges()
    }

    pub fn vertex_weight(&self, a: usize) -> &[f64] {
        self.graph.vertex_attr(a)
    }

    pub fn edge_weight(&self, e: usize) -> &[f64] {
        self.graph.edge_attr(e)
    }

    pub fn vertex_weights(&self) -> &[f64] {
        self.graph.vertex_attrs()
    }

    pub fn edge_weights(&self) -> &[f64] {
        self.graph.edge_attrs()
    }

    pub fn vertex_weights_mut(&mut self) -> &mut [f64] {
        &mut self.graph.vertex_attrs
    }

    pub fn edge_weights_mut(&mut self) -> &mut [f64] {
        &mut self.graph.edge_attrs
    }

    /// `|V_F|·d_v + |E_F|·d_e`.
    pub fn num_params(&self) -> usize {
        self.vertex_weights().len() + self.edge_weights().len()
    }
}
