//! Graph coarsening by Louvain communities, and global average pooling.
//!
//! Edge weights for community detection are `max(μ(i)·μ(j), 1e-6)`. Before
//! running Louvain the graph is put in a canonical vertex order computed by
//! colour refinement from the attributes, and communities are numbered in
//! that order. Isomorphic inputs therefore coarsen to identical graphs, which
//! keeps the whole network invariant to vertex relabelling.

use std::cmp::Ordering;

use super::louvain::{louvain, WeightedGraph};
use crate::error::{Error, Result};
use crate::graph::AttributedGraph;
use crate::matching::dot;

/// Floor applied to attribute scalar products used as Louvain weights.
pub const MIN_EDGE_WEIGHT: f64 = 1e-6;

/// A vertex partition recorded by a pooling forward pass, with the max-pool
/// routing needed by backward.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    community: Vec<usize>,
    num_communities: usize,
    dim: usize,
    // [community][component] -> input vertex holding the maximum
    argmax: Vec<usize>,
}

impl Partition {
    pub fn community_of(&self, vertex: usize) -> usize {
        self.community[vertex]
    }

    pub fn communities(&self) -> &[usize] {
        &self.community
    }

    pub fn num_communities(&self) -> usize {
        self.num_communities
    }

    pub fn num_vertices(&self) -> usize {
        self.community.len()
    }

    /// Members of each community, in vertex order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_communities];
        for (v, &c) in self.community.iter().enumerate() {
            out[c].push(v);
        }
        out
    }
}

/// Coarsens `g` with Louvain communities. `target` (desired community size)
/// is advisory: the first-level Louvain partition is used as is.
pub fn louvain_pool(g: &AttributedGraph, target: usize) -> Result<(AttributedGraph, Partition)> {
    let _ = target;
    if g.num_vertices() == 0 {
        return Err(Error::domain("cannot pool an empty graph"));
    }
    let community = louvain_partition(g);
    apply_partition(g, &community)
}

/// First-level Louvain communities of `g`, numbered canonically.
pub fn louvain_partition(g: &AttributedGraph) -> Vec<usize> {
    let n = g.num_vertices();
    let order = canonical_order(g);
    let mut position = vec![0usize; n];
    for (pos, &v) in order.iter().enumerate() {
        position[v] = pos;
    }
    let weighted = WeightedGraph::from_edges(
        n,
        g.edges().iter().map(|&(a, b)| {
            let w = dot(g.vertex_attr(a), g.vertex_attr(b)).max(MIN_EDGE_WEIGHT);
            (position[a], position[b], w)
        }),
    );
    let canonical = louvain(&weighted).first_level(n);
    (0..n).map(|v| canonical[position[v]]).collect()
}

/// Max-pools `g` over a given partition (community index per vertex, dense
/// `0..k`). Coarse vertex `c` gets the element-wise maximum of its members;
/// two coarse vertices are adjacent when any of their members are.
pub fn apply_partition(g: &AttributedGraph, community: &[usize]) -> Result<(AttributedGraph, Partition)> {
    let n = g.num_vertices();
    if community.len() != n {
        return Err(Error::domain(format!(
            "partition covers {} vertices, graph has {n}",
            community.len()
        )));
    }
    let k = community.iter().copied().max().map_or(0, |c| c + 1);
    let dim = g.vertex_dim();
    let mut seen = vec![false; k];
    for &c in community {
        seen[c] = true;
    }
    if seen.contains(&false) {
        return Err(Error::domain("community indices must be dense"));
    }

    let mut attrs = vec![f64::NEG_INFINITY; k * dim];
    let mut argmax = vec![usize::MAX; k * dim];
    for (v, &c) in community.iter().enumerate().take(n) {
        for (d, &x) in g.vertex_attr(v).iter().enumerate() {
            // strict: the lowest vertex index keeps ties
            if argmax[c * dim + d] == usize::MAX || x > attrs[c * dim + d] {
                attrs[c * dim + d] = x;
                argmax[c * dim + d] = v;
            }
        }
    }
    let mut edges: Vec<(usize, usize)> = g
        .edges()
        .iter()
        .filter_map(|&(a, b)| {
            let (ca, cb) = (community[a], community[b]);
            (ca != cb).then(|| (ca.min(cb), ca.max(cb)))
        })
        .collect();
    edges.sort_unstable();
    edges.dedup();
    let coarse = AttributedGraph::from_indexed(dim, attrs, &edges, 0, Vec::new())?;
    Ok((
        coarse,
        Partition {
            community: community.to_vec(),
            num_communities: k,
            dim,
            argmax,
        },
    ))
}

/// Routes each upstream component to the member that held the maximum.
pub fn pool_backward(partition: &Partition, upstream: &[f64]) -> Result<Vec<f64>> {
    if upstream.len() != partition.num_communities * partition.dim {
        return Err(Error::domain(format!(
            "pool gradient has {} entries, expected {}",
            upstream.len(),
            partition.num_communities * partition.dim
        )));
    }
    let dim = partition.dim;
    let mut grad = vec![0.0; partition.community.len() * dim];
    for (slot, &v) in partition.argmax.iter().enumerate() {
        let d = slot % dim;
        grad[v * dim + d] += upstream[slot];
    }
    Ok(grad)
}

/// Component-wise mean of the vertex attributes. Each component is summed in
/// ascending order, so the result does not depend on vertex numbering.
pub fn global_avg_pool(g: &AttributedGraph) -> Result<Vec<f64>> {
    let n = g.num_vertices();
    if n == 0 {
        return Err(Error::domain("global pooling needs at least one vertex"));
    }
    let dim = g.vertex_dim();
    let mut column = Vec::with_capacity(n);
    Ok((0..dim)
        .map(|d| {
            column.clear();
            column.extend((0..n).map(|v| g.vertex_attr(v)[d]));
            column.sort_by(f64::total_cmp);
            column.iter().fold(0.0, |acc, x| acc + x) / n as f64
        })
        .collect())
}

/// Spreads `upstream / n` to every vertex.
pub fn global_avg_pool_backward(num_vertices: usize, upstream: &[f64]) -> Vec<f64> {
    let scale = 1.0 / num_vertices as f64;
    let row: Vec<f64> = upstream.iter().map(|u| u * scale).collect();
    row.repeat(num_vertices)
}

/// Vertex indices in a relabelling-invariant order: vertices are coloured by
/// attribute, colours are refined by the multiset of neighbour colours until
/// stable, and the order is by final colour (ties by index).
pub fn canonical_order(g: &AttributedGraph) -> Vec<usize> {
    let n = g.num_vertices();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| compare_attrs(g.vertex_attr(a), g.vertex_attr(b)));
    let mut color = vec![0usize; n];
    let mut classes = 0;
    for (pos, &v) in idx.iter().enumerate() {
        if pos > 0 && compare_attrs(g.vertex_attr(idx[pos - 1]), g.vertex_attr(v)) != Ordering::Equal {
            classes += 1;
        }
        color[v] = classes;
    }
    let mut classes = if n == 0 { 0 } else { classes + 1 };

    loop {
        let signatures: Vec<(usize, Vec<usize>)> = (0..n)
            .map(|v| {
                let mut nb: Vec<usize> = g.neighbors(v).map(|u| color[u]).collect();
                nb.sort_unstable();
                (color[v], nb)
            })
            .collect();
        idx.sort_by(|&a, &b| signatures[a].cmp(&signatures[b]));
        let mut next = vec![0usize; n];
        let mut count = 0;
        for (pos, &v) in idx.iter().enumerate() {
            if pos > 0 && signatures[idx[pos - 1]] != signatures[v] {
                count += 1;
            }
            next[v] = count;
        }
        let count = if n == 0 { 0 } else { count + 1 };
        color = next;
        if count == classes {
            break;
        }
        classes = count;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (color[v], v));
    order
}

fn compare_attrs(a: &[f64], b: &[f64]) -> Ordering {
    crate::matching::compare_vectors(a, b)
}
