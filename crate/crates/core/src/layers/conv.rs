//! Graph convolution by matching.
//!
//! For every input vertex `i` the closed `l`-hop neighbourhood `g^i` is
//! matched against each filter graph; the matching score becomes the output
//! attribute of `i` for that filter. With edge matching enabled, every input
//! edge `ij` also receives, per filter, an aggregate (max or mean) of the
//! similarities it obtained in all neighbourhoods that contain it.
//!
//! Backward treats every matching as fixed, which makes the layer linear in
//! both its weights and its input attributes around the recorded point.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, FilterGraph, NeighborhoodGraph};
use crate::matching::{dot, gms_bp_edges, gms_no_edges, Matching};

/// Aggregation of the edge similarities an edge collects across the
/// neighbourhoods containing it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theta {
    Max,
    Avg,
}

impl std::str::FromStr for Theta {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(Theta::Max),
            "avg" => Ok(Theta::Avg),
            other => Err(Error::Config(format!(
                "theta must be `max` or `avg`, got `{other}`"
            ))),
        }
    }
}

impl std::fmt::Display for Theta {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Theta::Max => "max",
            Theta::Avg => "avg",
        })
    }
}

/// A set of filter graphs sharing one topology, applied to the same input.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvLayer {
    filters: Vec<FilterGraph>,
    pub hops: usize,
    pub theta: Theta,
    pub edge_matching: bool,
}

/// Everything backward needs from a forward pass.
#[derive(Debug, Clone)]
pub struct ConvTape {
    input: AttributedGraph,
    input_edge_dim: usize,
    neighborhoods: Vec<NeighborhoodGraph>,
    // [vertex][filter]
    matchings: Vec<Vec<Matching>>,
    // per input edge: (neighbourhood root, local edge index), roots ascending
    omega: Vec<Vec<(usize, usize)>>,
    // [edge][filter] position in omega[edge] of the maximising neighbourhood
    argmax: Vec<Vec<usize>>,
}

impl ConvTape {
    pub fn neighborhood(&self, vertex: usize) -> &NeighborhoodGraph {
        &self.neighborhoods[vertex]
    }

    pub fn matching(&self, vertex: usize, filter: usize) -> &Matching {
        &self.matchings[vertex][filter]
    }

    /// Neighbourhood roots whose subgraph contains input edge `e`.
    pub fn omega(&self, edge: usize) -> impl Iterator<Item = usize> + '_ {
        self.omega[edge].iter().map(|&(k, _)| k)
    }

    /// Root of the neighbourhood selected by θ = max for `(edge, filter)`.
    pub fn argmax_root(&self, edge: usize, filter: usize) -> Option<usize> {
        let pos = *self.argmax.get(edge)?.get(filter)?;
        Some(self.omega[edge][pos].0)
    }

    /// True when both tapes selected the same assignments everywhere; used
    /// to confirm that a perturbed point is still on the same linear piece.
    pub fn same_assignments(&self, other: &ConvTape) -> bool {
        self.matchings.len() == other.matchings.len()
            && self
                .matchings
                .iter()
                .zip(&other.matchings)
                .all(|(a, b)| a.iter().zip(b).all(|(x, y)| x.filter_map() == y.filter_map()))
            && self.argmax == other.argmax
    }
}

/// Gradients of a convolution layer.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvGradients {
    /// Per filter: vertex-weight gradient, same layout as the weights.
    pub vertex_weights: Vec<Vec<f64>>,
    /// Per filter: edge-weight gradient.
    pub edge_weights: Vec<Vec<f64>>,
    pub input_vertex: Vec<f64>,
    pub input_edge: Vec<f64>,
}

impl ConvLayer {
    pub fn new(filters: Vec<FilterGraph>, hops: usize, theta: Theta, edge_matching: bool) -> Result<Self> {
        let first = filters
            .first()
            .ok_or_else(|| Error::Config("a convolution layer needs at least one filter".into()))?;
        if hops == 0 {
            return Err(Error::Config(
                "neighbourhood reach must be at least one hop".into(),
            ));
        }
        for f in &filters[1..] {
            if f.num_vertices() != first.num_vertices()
                || f.edges() != first.edges()
                || f.vertex_dim() != first.vertex_dim()
                || f.edge_dim() != first.edge_dim()
            {
                return Err(Error::Config(
                    "all filters of a layer must share topology and weight dimensions".into(),
                ));
            }
        }
        if !edge_matching && first.edge_dim() != 0 {
            return Err(Error::Config(
                "the no-edge model uses filters without edge weights".into(),
            ));
        }
        Ok(Self {
            filters,
            hops,
            theta,
            edge_matching,
        })
    }

    /// `count` zero-weight star filters of `vertices` vertices.
    pub fn stars(
        count: usize,
        vertices: usize,
        vertex_dim: usize,
        edge_dim: usize,
        hops: usize,
        theta: Theta,
        edge_matching: bool,
    ) -> Result<Self> {
        let edge_dim = if edge_matching { edge_dim } else { 0 };
        let filters = (0..count)
            .map(|_| FilterGraph::star(vertices, vertex_dim, edge_dim))
            .collect::<Result<Vec<_>>>()?;
        Self::new(filters, hops, theta, edge_matching)
    }

    /// Glorot-uniform initialisation with fan-in = parameters per filter and
    /// fan-out = number of filters.
    pub fn init_glorot(&mut self, rng: &mut impl Rng) {
        let fan_in = self.filters[0].num_params() as f64;
        let fan_out = self.filters.len() as f64;
        let limit = (6.0 / (fan_in + fan_out)).sqrt();
        for f in &mut self.filters {
            f.randomize(limit, rng);
        }
    }

    pub fn filters(&self) -> &[FilterGraph] {
        &self.filters
    }

    pub fn filters_mut(&mut self) -> &mut [FilterGraph] {
        &mut self.filters
    }

    pub fn num_filters(&self) -> usize {
        self.filters.len()
    }

    pub fn input_vertex_dim(&self) -> usize {
        self.filters[0].vertex_dim()
    }

    pub fn input_edge_dim(&self) -> usize {
        self.filters[0].edge_dim()
    }

    fn check_input(&self, g: &AttributedGraph) -> Result<()> {
        if g.vertex_dim() != self.input_vertex_dim() {
            return Err(Error::domain(format!(
                "input vertex dimension {} does not match filter dimension {}",
                g.vertex_dim(),
                self.input_vertex_dim()
            )));
        }
        if self.edge_matching && g.edge_dim() != self.input_edge_dim() {
            return Err(Error::domain(format!(
                "input edge dimension {} does not match filter dimension {}",
                g.edge_dim(),
                self.input_edge_dim()
            )));
        }
        Ok(())
    }

    /// Convolves `g`. The output keeps the vertex and edge sets of `g`; vertex
    /// attributes are the per-filter GMS scores, edge attributes the
    /// per-filter θ-aggregated edge scores (absent in the no-edge model).
    pub fn forward(&self, g: &AttributedGraph) -> Result<(AttributedGraph, ConvTape)> {
        self.check_input(g)?;
        let base = if self.edge_matching {
            g.clone()
        } else {
            g.without_edge_attrs()
        };
        let n = base.num_vertices();
        let nf = self.filters.len();
        let hops = self.hops;

        let neighborhoods: Vec<NeighborhoodGraph> = (0..n)
            .into_par_iter()
            .map(|i| crate::graph::neighborhood_at(&base, i, hops))
            .collect();
        let matchings: Vec<Vec<Matching>> = neighborhoods
            .par_iter()
            .map(|nb| {
                self.filters
                    .iter()
                    .map(|f| {
                        if self.edge_matching {
                            gms_bp_edges(&nb.graph, f)
                        } else {
                            gms_no_edges(&nb.graph, f)
                        }
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;

        let mut vertex_out = Vec::with_capacity(n * nf);
        for row in &matchings {
            vertex_out.extend(row.iter().map(|m| m.score));
        }

        let mut omega = Vec::new();
        let mut argmax = Vec::new();
        let mut edge_out = Vec::new();
        if self.edge_matching {
            omega = vec![Vec::new(); base.num_edges()];
            for (k, nb) in neighborhoods.iter().enumerate() {
                for (le, &e) in nb.edge_origins().iter().enumerate() {
                    omega[e].push((k, le));
                }
            }
            argmax = vec![vec![0usize; nf]; base.num_edges()];
            edge_out = Vec::with_capacity(base.num_edges() * nf);
            for (e, members) in omega.iter().enumerate() {
                for (p, f) in self.filters.iter().enumerate() {
                    let score = |&(k, le): &(usize, usize)| {
                        matchings[k][p]
                            .edge_image(le)
                            .map_or(0.0, |fe| dot(base.edge_attr(e), f.edge_weight(fe)))
                    };
                    let value = match self.theta {
                        Theta::Max => {
                            let mut best = 0;
                            let mut best_score = f64::NEG_INFINITY;
                            for (pos, member) in members.iter().enumerate() {
                                let s = score(member);
                                if s > best_score {
                                    best = pos;
                                    best_score = s;
                                }
                            }
                            argmax[e][p] = best;
                            best_score
                        }
                        Theta::Avg => {
                            members.iter().map(score).fold(0.0, |a, s| a + s) / members.len() as f64
                        }
                    };
                    edge_out.push(value);
                }
            }
        }

        let out = base
            .with_vertex_attrs(nf, vertex_out)?
            .with_edge_attrs(if self.edge_matching { nf } else { 0 }, edge_out)?;
        let tape = ConvTape {
            input_edge_dim: g.edge_dim(),
            input: base,
            neighborhoods,
            matchings,
            omega,
            argmax,
        };
        Ok((out, tape))
    }

    /// Chain rule through the recorded matchings. `d_vertex` is
    /// `num_vertices × num_filters`; `d_edge` is `num_edges × num_filters`
    /// with edge matching and empty otherwise.
    pub fn backward(&self, tape: &ConvTape, d_vertex: &[f64], d_edge: &[f64]) -> Result<ConvGradients> {
        let g = &tape.input;
        let nf = self.filters.len();
        let n = g.num_vertices();
        let m = g.num_edges();
        if tape.matchings.len() != n
            || tape.matchings.iter().any(|row| row.len() != nf)
            || g.vertex_dim() != self.input_vertex_dim()
        {
            return Err(Error::domain("tape was not produced by this layer"));
        }
        if d_vertex.len() != n * nf {
            return Err(Error::domain(format!(
                "vertex gradient has {} entries, expected {}",
                d_vertex.len(),
                n * nf
            )));
        }
        let expected_edge = if self.edge_matching { m * nf } else { 0 };
        if d_edge.len() != expected_edge {
            return Err(Error::domain(format!(
                "edge gradient has {} entries, expected {expected_edge}",
                d_edge.len()
            )));
        }

        let dv = g.vertex_dim();
        let de = g.edge_dim();
        let mut grads = ConvGradients {
            vertex_weights: self
                .filters
                .iter()
                .map(|f| vec![0.0; f.vertex_weights().len()])
                .collect(),
            edge_weights: self
                .filters
                .iter()
                .map(|f| vec![0.0; f.edge_weights().len()])
                .collect(),
            input_vertex: vec![0.0; n * dv],
            input_edge: vec![0.0; m * tape.input_edge_dim],
        };

        for (i, nb) in tape.neighborhoods.iter().enumerate() {
            for (p, f) in self.filters.iter().enumerate() {
                let up = d_vertex[i * nf + p];
                let matching = &tape.matchings[i][p];
                for a in 0..f.num_vertices() {
                    let Some(k) = matching.filter_preimage(a) else {
                        continue;
                    };
                    let x = nb.vertex_attr(k);
                    let w = f.vertex_weight(a);
                    axpy(&mut grads.vertex_weights[p][a * dv..(a + 1) * dv], up, x);
                    let parent = nb.origin(k);
                    axpy(&mut grads.input_vertex[parent * dv..(parent + 1) * dv], up, w);
                }
                if self.edge_matching {
                    for fe in 0..f.num_edges() {
                        let Some(le) = matching.filter_edge_preimage(fe) else {
                            continue;
                        };
                        let x = nb.edge_attr(le);
                        let w = f.edge_weight(fe);
                        axpy(&mut grads.edge_weights[p][fe * de..(fe + 1) * de], up, x);
                        let parent = nb.edge_origin(le);
                        axpy(&mut grads.input_edge[parent * de..(parent + 1) * de], up, w);
                    }
                }
            }
        }

        if self.edge_matching {
            for (e, members) in tape.omega.iter().enumerate() {
                let x = g.edge_attr(e);
                for (p, f) in self.filters.iter().enumerate() {
                    let up = d_edge[e * nf + p];
                    let (selected, scale) = match self.theta {
                        Theta::Max => {
                            let pos = tape.argmax[e][p];
                            (&members[pos..pos + 1], 1.0)
                        }
                        Theta::Avg => (&members[..], 1.0 / members.len() as f64),
                    };
                    for &(k, le) in selected {
                        let Some(fe) = tape.matchings[k][p].edge_image(le) else {
                            continue;
                        };
                        let w = f.edge_weight(fe);
                        axpy(&mut grads.edge_weights[p][fe * de..(fe + 1) * de], up * scale, x);
                        axpy(&mut grads.input_edge[e * de..(e + 1) * de], up * scale, w);
                    }
                }
            }
        }
        Ok(grads)
    }
}

#[inline]
fn axpy(acc: &mut [f64], alpha: f64, x: &[f64]) {
    for (a, b) in acc.iter_mut().zip(x) {
        *a += alpha * b;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(attrs: [f64; 3]) -> AttributedGraph {
        AttributedGraph::from_indexed(1, attrs.to_vec(), &[(0, 1), (1, 2)], 0, vec![]).unwrap()
    }

    fn edge_detector() -> ConvLayer {
        ConvLayer::new(
            vec![FilterGraph::from_scalars(&[-1.0, 1.0]).unwrap()],
            1,
            Theta::Max,
            false,
        )
        .unwrap()
    }

    #[test]
    fn path_with_edge_detector() {
        let (out, _) = edge_detector().forward(&path([0.0, 1.0, 0.0])).unwrap();
        assert_eq!(out.vertex_attrs(), &[1.0, 1.0, 1.0]);
        assert_eq!(out.edges(), path([0.0; 3]).edges());
        assert_eq!(out.edge_dim(), 0);
    }

    #[test]
    fn constant_graph_gives_zero() {
        let (out, _) = edge_detector().forward(&path([0.7; 3])).unwrap();
        assert!(out.vertex_attrs().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn identical_filters_stack_equal_components() {
        let f = FilterGraph::from_scalars(&[0.5, -2.0]).unwrap();
        let layer = ConvLayer::new(vec![f.clone(), f.clone(), f], 1, Theta::Max, false).unwrap();
        let (out, _) = layer.forward(&path([0.3, -1.0, 2.0])).unwrap();
        assert_eq!(out.vertex_dim(), 3);
        for i in 0..3 {
            let a = out.vertex_attr(i);
            assert!(a[0] == a[1] && a[1] == a[2]);
        }
    }

    #[test]
    fn center_vertex_weight_gradient() {
        let layer = edge_detector();
        let (_, tape) = layer.forward(&path([0.0, 1.0, 0.0])).unwrap();
        // upstream selects only mu(b)
        let grads = layer.backward(&tape, &[0.0, 1.0, 0.0], &[]).unwrap();
        assert_eq!(grads.vertex_weights[0], vec![0.0, 1.0]);
        // W_b' = 1 flows back to the attr-1 vertex, W_a = -1 to one zero vertex
        assert_eq!(grads.input_vertex[1], 1.0);
        assert_eq!(grads.input_vertex[0] + grads.input_vertex[2], -1.0);
    }

    #[test]
    fn null_matched_filter_vertex_gets_no_gradient() {
        let g = AttributedGraph::from_indexed(1, vec![2.0], &[], 0, vec![]).unwrap();
        let layer = ConvLayer::new(
            vec![FilterGraph::from_scalars(&[1.0, -3.0]).unwrap()],
            1,
            Theta::Max,
            false,
        )
        .unwrap();
        let (out, tape) = layer.forward(&g).unwrap();
        assert_eq!(out.vertex_attrs(), &[2.0]);
        let grads = layer.backward(&tape, &[1.0], &[]).unwrap();
        assert_eq!(grads.vertex_weights[0], vec![2.0, 0.0]);
    }

    #[test]
    fn stale_tape_and_bad_upstream_rejected() {
        let layer = edge_detector();
        let (_, tape) = layer.forward(&path([0.0, 1.0, 0.0])).unwrap();
        assert!(layer.backward(&tape, &[1.0], &[]).is_err());
        assert!(layer.backward(&tape, &[1.0; 3], &[1.0]).is_err());
        let wide = ConvLayer::new(
            vec![FilterGraph::from_scalars(&[1.0]).unwrap(); 2],
            1,
            Theta::Max,
            false,
        )
        .unwrap();
        assert!(wide.backward(&tape, &[1.0; 6], &[]).is_err());
    }

    #[test]
    fn edge_scores_aggregate_over_omega() {
        // path with edge attrs; star filter with a single edge
        let g = AttributedGraph::from_indexed(1, vec![1.0, 2.0, 3.0], &[(0, 1), (1, 2)], 1, vec![1.0, -1.0])
            .unwrap();
        let f = FilterGraph::new(2, &[(0, 1)], 1, vec![1.0, 1.0], 1, vec![2.0]).unwrap();
        for theta in [Theta::Max, Theta::Avg] {
            let layer = ConvLayer::new(vec![f.clone()], 1, theta, true).unwrap();
            let (out, tape) = layer.forward(&g).unwrap();
            assert_eq!(out.edge_dim(), 1);
            for e in 0..2 {
                let members: Vec<usize> = tape.omega(e).collect();
                assert!(members.len() >= 2);
                let values: Vec<f64> = tape.omega[e]
                    .iter()
                    .map(|&(k, le)| {
                        tape.matching(k, 0)
                            .edge_image(le)
                            .map_or(0.0, |fe| dot(g.edge_attr(e), f.edge_weight(fe)))
                    })
                    .collect();
                let expected = match theta {
                    Theta::Max => values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                    Theta::Avg => values.iter().sum::<f64>() / values.len() as f64,
                };
                assert_eq!(out.edge_attr(e)[0], expected);
            }
        }
    }
}
