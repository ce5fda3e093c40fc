//! Attributed graphs, neighbourhood extraction and filter graphs.
//!
//! Every graph is undirected and stores its vertices in increasing id order.
//! Internally vertices and edges are addressed by dense indices (position in
//! the sorted id list, position in the sorted edge list); ids only matter at
//! the I/O boundary and when relating a subgraph to its parent.

mod filter;
pub mod io;
mod neighborhood;

pub use filter::FilterGraph;
pub(crate) use neighborhood::extract as neighborhood_at;
pub use neighborhood::{l_hop_neighborhood, NeighborhoodGraph};

use crate::error::{Error, Result};

/// Identifier of a vertex as it appears in graph files.
pub type VertexId = u64;

/// An undirected graph whose vertices and (optionally) edges carry dense real
/// attribute vectors.
///
/// Edges are stored as `(lo, hi)` vertex-index pairs with `lo < hi`, sorted
/// lexicographically. An edge dimension of zero means the graph carries no
/// edge attributes.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributedGraph {
    ids: Vec<VertexId>,
    vertex_dim: usize,
    vertex_attrs: Vec<f64>,
    edges: Vec<(usize, usize)>,
    edge_dim: usize,
    edge_attrs: Vec<f64>,
    // (neighbour index, edge index), sorted by neighbour
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl AttributedGraph {
    /// Builds a graph from `(id, attribute)` vertices and `(id, id, attribute)`
    /// edges, validating every structural invariant.
    pub fn new(
        vertex_dim: usize,
        edge_dim: usize,
        vertices: Vec<(VertexId, Vec<f64>)>,
        edges: Vec<(VertexId, VertexId, Vec<f64>)>,
    ) -> Result<Self> {
        if vertex_dim == 0 {
            return Err(Error::domain("vertex attribute dimension must be at least 1"));
        }
        let mut vertices = vertices;
        vertices.sort_by_key(|(id, _)| *id);
        let mut ids = Vec::with_capacity(vertices.len());
        let mut vertex_attrs = Vec::with_capacity(vertices.len() * vertex_dim);
        for (id, attr) in vertices {
            if ids.last() == Some(&id) {
                return Err(Error::domain(format!("duplicate vertex id {id}")));
            }
            if attr.len() != vertex_dim {
                return Err(Error::domain(format!(
                    "vertex {id} has {} attributes, expected {vertex_dim}",
                    attr.len()
                )));
            }
            ids.push(id);
            vertex_attrs.extend(attr);
        }

        let mut indexed = Vec::with_capacity(edges.len());
        for (a, b, attr) in edges {
            let ia = index_in(&ids, a)
                .ok_or_else(|| Error::domain(format!("edge {a}-{b}: unknown vertex {a}")))?;
            let ib = index_in(&ids, b)
                .ok_or_else(|| Error::domain(format!("edge {a}-{b}: unknown vertex {b}")))?;
            if ia == ib {
                return Err(Error::domain(format!("self-loop on vertex {a}")));
            }
            if attr.len() != edge_dim {
                return Err(Error::domain(format!(
                    "edge {a}-{b} has {} attributes, expected {edge_dim}",
                    attr.len()
                )));
            }
            indexed.push((ia.min(ib), ia.max(ib), attr));
        }
        indexed.sort_by_key(|(a, b, _)| (*a, *b));
        for pair in indexed.windows(2) {
            if pair[0].0 == pair[1].0 && pair[0].1 == pair[1].1 {
                return Err(Error::domain(format!(
                    "duplicate edge {}-{}",
                    ids[pair[0].0], ids[pair[0].1]
                )));
            }
        }
        let mut edge_list = Vec::with_capacity(indexed.len());
        let mut edge_attrs = Vec::with_capacity(indexed.len() * edge_dim);
        for (a, b, attr) in indexed {
            edge_list.push((a, b));
            edge_attrs.extend(attr);
        }
        Ok(Self::from_sorted_parts(
            ids,
            vertex_dim,
            vertex_attrs,
            edge_list,
            edge_dim,
            edge_attrs,
        ))
    }

    /// Index-based constructor for callers that already hold sorted, valid data.
    pub(crate) fn from_sorted_parts(
        ids: Vec<VertexId>,
        vertex_dim: usize,
        vertex_attrs: Vec<f64>,
        edges: Vec<(usize, usize)>,
        edge_dim: usize,
        edge_attrs: Vec<f64>,
    ) -> Self {
        debug_assert!(ids.windows(2).all(|w| w[0] < w[1]));
        debug_assert_eq!(vertex_attrs.len(), ids.len() * vertex_dim);
        debug_assert_eq!(edge_attrs.len(), edges.len() * edge_dim);
        debug_assert!(edges.windows(2).all(|w| w[0] < w[1]));
        let mut adjacency = vec![Vec::new(); ids.len()];
        for (e, &(a, b)) in edges.iter().enumerate() {
            debug_assert!(a < b && b < ids.len());
            adjacency[a].push((b, e));
            adjacency[b].push((a, e));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Self {
            ids,
            vertex_dim,
            vertex_attrs,
            edges,
            edge_dim,
            edge_attrs,
            adjacency,
        }
    }

    /// Graph with vertices `0..n`, the given index edges and attributes.
    pub fn from_indexed(
        vertex_dim: usize,
        vertex_attrs: Vec<f64>,
        edges: &[(usize, usize)],
        edge_dim: usize,
        edge_attrs: Vec<f64>,
    ) -> Result<Self> {
        if vertex_dim == 0 || !vertex_attrs.len().is_multiple_of(vertex_dim) {
            return Err(Error::domain(
                "vertex attributes do not tile the vertex dimension",
            ));
        }
        if edge_attrs.len() != edges.len() * edge_dim {
            return Err(Error::domain("edge attribute count does not match edges"));
        }
        let n = vertex_attrs.len() / vertex_dim;
        let vertices = (0..n)
            .map(|i| {
                let id = i as VertexId;
                (id, vertex_attrs[i * vertex_dim..(i + 1) * vertex_dim].to_vec())
            })
            .collect();
        let edges = edges
            .iter()
            .enumerate()
            .map(|(e, &(a, b))| {
                (
                    a as VertexId,
                    b as VertexId,
                    edge_attrs[e * edge_dim..(e + 1) * edge_dim].to_vec(),
                )
            })
            .collect();
        Self::new(vertex_dim, edge_dim, vertices, edges)
    }

    pub fn num_vertices(&self) -> usize {
        self.ids.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_dim(&self) -> usize {
        self.vertex_dim
    }

    pub fn edge_dim(&self) -> usize {
        self.edge_dim
    }

    pub fn ids(&self) -> &[VertexId] {
        &self.ids
    }

    pub fn id(&self, index: usize) -> VertexId {
        self.ids[index]
    }

    pub fn index_of(&self, id: VertexId) -> Option<usize> {
        index_in(&self.ids, id)
    }

    pub fn vertex_attr(&self, index: usize) -> &[f64] {
        &self.vertex_attrs[index * self.vertex_dim..(index + 1) * self.vertex_dim]
    }

    /// All vertex attributes, row-major (`num_vertices × vertex_dim`).
    pub fn vertex_attrs(&self) -> &[f64] {
        &self.vertex_attrs
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_attr(&self, edge: usize) -> &[f64] {
        &self.edge_attrs[edge * self.edge_dim..(edge + 1) * self.edge_dim]
    }

    /// All edge attributes, row-major (`num_edges × edge_dim`).
    pub fn edge_attrs(&self) -> &[f64] {
        &self.edge_attrs
    }

    /// `(neighbour, edge)` pairs of a vertex, sorted by neighbour index.
    pub fn incident(&self, index: usize) -> &[(usize, usize)] {
        &self.adjacency[index]
    }

    pub fn neighbors(&self, index: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[index].iter().map(|&(n, _)| n)
    }

    pub fn degree(&self, index: usize) -> usize {
        self.adjacency[index].len()
    }

    /// Index of the edge joining two vertex indices, in either orientation.
    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        let list = &self.adjacency[a];
        list.binary_search_by_key(&b, |&(n, _)| n)
            .ok()
            .map(|pos| list[pos].1)
    }

    /// Same topology with new vertex attributes.
    pub fn with_vertex_attrs(&self, vertex_dim: usize, vertex_attrs: Vec<f64>) -> Result<Self> {
        if vertex_dim == 0 || vertex_attrs.len() != self.num_vertices() * vertex_dim {
            return Err(Error::domain(format!(
                "expected {} vertex attributes of dimension {vertex_dim}, got {} values",
                self.num_vertices(),
                vertex_attrs.len()
            )));
        }
        Ok(Self {
            vertex_dim,
            vertex_attrs,
            ..self.clone()
        })
    }

    /// Same topology with new edge attributes (`edge_dim` may be zero).
    pub fn with_edge_attrs(&self, edge_dim: usize, edge_attrs: Vec<f64>) -> Result<Self> {
        if edge_attrs.len() != self.num_edges() * edge_dim {
            return Err(Error::domain(format!(
                "expected {} edge attributes of dimension {edge_dim}, got {} values",
                self.num_edges(),
                edge_attrs.len()
            )));
        }
        Ok(Self {
            edge_dim,
            edge_attrs,
            ..self.clone()
        })
    }

    /// Drops the edge attributes, keeping the topology.
    pub fn without_edge_attrs(&self) -> Self {
        Self {
            edge_dim: 0,
            edge_attrs: Vec::new(),
            ..self.clone()
        }
    }

    /// Renames every vertex through `relabel`, which must be injective.
    pub fn relabeled(&self, relabel: impl Fn(VertexId) -> VertexId) -> Result<Self> {
        let vertices = (0..self.num_vertices())
            .map(|i| (relabel(self.ids[i]), self.vertex_attr(i).to_vec()))
            .collect();
        let edges = self
            .edges
            .iter()
            .enumerate()
            .map(|(e, &(a, b))| {
                (
                    relabel(self.ids[a]),
                    relabel(self.ids[b]),
                    self.edge_attr(e).to_vec(),
                )
            })
            .collect();
        Self::new(self.vertex_dim, self.edge_dim, vertices, edges)
    }

    /// Mean size of the 1-hop closed neighbourhoods (degree + 1).
    pub fn mean_neighborhood_size(&self) -> f64 {
        if self.ids.is_empty() {
            return 0.0;
        }
        let total: usize = self.adjacency.iter().map(|l| l.len() + 1).sum();
        total as f64 / self.ids.len() as f64
    }
}

fn index_in(ids: &[VertexId], id: VertexId) -> Option<usize> {
    ids.binary_search(&id).ok()
}
