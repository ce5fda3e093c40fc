use std::collections::VecDeque;

use super::{AttributedGraph, VertexId};
use crate::error::{Error, Result};

/// The induced subgraph on the closed `l`-hop ball around a root vertex.
///
/// Local vertices keep their parent ids, so `graph.ids()` doubles as the map
/// from local vertices to parent vertices. `origin` and `edge_origin` give the
/// corresponding parent *indices*.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodGraph {
    pub root: VertexId,
    pub graph: AttributedGraph,
    origin: Vec<usize>,
    edge_origin: Vec<usize>,
}

impl NeighborhoodGraph {
    /// Parent index of a local vertex.
    pub fn origin(&self, local: usize) -> usize {
        self.origin[local]
    }

    /// Parent indices of all local vertices, in local order.
    pub fn origins(&self) -> &[usize] {
        &self.origin
    }

    /// Parent index of a local edge.
    pub fn edge_origin(&self, local: usize) -> usize {
        self.edge_origin[local]
    }

    pub fn edge_origins(&self) -> &[usize] {
        &self.edge_origin
    }

    /// Local index of the root.
    pub fn root_index(&self) -> usize {
        self.graph
            .index_of(self.root)
            .expect("root belongs to its neighbourhood")
    }
}

impl std::ops::Deref for NeighborhoodGraph {
    type Target = AttributedGraph;

    fn deref(&self) -> &AttributedGraph {
        &self.graph
    }
}

/// Extracts the closed `hops`-hop neighbourhood of vertex `id`.
pub fn l_hop_neighborhood(graph: &AttributedGraph, id: VertexId, hops: usize) -> Result<NeighborhoodGraph> {
    let root = graph
        .index_of(id)
        .ok_or_else(|| Error::domain(format!("unknown vertex id {id}")))?;
    if hops == 0 {
        return Err(Error::domain("neighbourhood reach must be at least one hop"));
    }
    Ok(extract(graph, root, hops))
}

pub(crate) fn extract(graph: &AttributedGraph, root: usize, hops: usize) -> NeighborhoodGraph {
    let members = ball(graph, root, hops);
    let edge_origin = induced_edges(graph, &members);

    let dv = graph.vertex_dim();
    let de = graph.edge_dim();
    let mut vertex_attrs = Vec::with_capacity(members.len() * dv);
    for &m in &members {
        vertex_attrs.extend_from_slice(graph.vertex_attr(m));
    }
    let mut edges = Vec::with_capacity(edge_origin.len());
    let mut edge_attrs = Vec::with_capacity(edge_origin.len() * de);
    for &e in &edge_origin {
        let (a, b) = graph.edges()[e];
        // members is sorted, so local indices preserve the (lo, hi) order
        let la = members.binary_search(&a).expect("endpoint in ball");
        let lb = members.binary_search(&b).expect("endpoint in ball");
        edges.push((la, lb));
        edge_attrs.extend_from_slice(graph.edge_attr(e));
    }
    let ids = members.iter().map(|&m| graph.id(m)).collect();
    NeighborhoodGraph {
        root: graph.id(root),
        graph: AttributedGraph::from_sorted_parts(ids, dv, vertex_attrs, edges, de, edge_attrs),
        origin: members,
        edge_origin,
    }
}

/// Sorted indices of all vertices within `hops` of `root` (root included).
pub(crate) fn ball(graph: &AttributedGraph, root: usize, hops: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; graph.num_vertices()];
    let mut queue = VecDeque::new();
    let mut members = vec![root];
    dist[root] = 0;
    queue.push_back(root);
    while let Some(v) = queue.pop_front() {
        if dist[v] == hops {
            continue;
        }
        for n in graph.neighbors(v) {
            if dist[n] == usize::MAX {
                dist[n] = dist[v] + 1;
                members.push(n);
                queue.push_back(n);
            }
        }
    }
    members.sort_unstable();
    members
}

/// Sorted indices of the parent edges with both endpoints in `members`
/// (which must be sorted).
pub(crate) fn induced_edges(graph: &AttributedGraph, members: &[usize]) -> Vec<usize> {
    let mut edges = Vec::new();
    for &m in members {
        for &(n, e) in graph.incident(m) {
            if n > m && members.binary_search(&n).is_ok() {
                edges.push(e);
            }
        }
    }
    edges.sort_unstable();
    edges
}
