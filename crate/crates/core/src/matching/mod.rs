//! Graph matching similarity (GMS) between an input graph and a filter graph.
//!
//! A feasible matching assigns every filter vertex to a distinct input vertex
//! or to the null vertex ε; input vertices left out are matched to ε. An input
//! edge `ij` is matched to filter edge `ab` exactly when `{i, j}` is mapped
//! onto `{a, b}`; otherwise it goes to the null edge εε. Null elements
//! contribute zero similarity.

mod gms;
mod lsap;

pub(crate) use gms::compare_vectors;
pub use gms::{gms_bp_edges, gms_brute_force, gms_no_edges, BRUTE_FORCE_MAX_FILTER};
pub use lsap::{solve_lsap, Assignment, CostMatrix};

use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, FilterGraph};

/// Which terms of the similarity function are optimised.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// `Σ s_V` only: the no-edge model.
    VerticesOnly,
    /// `Σ s_V + Σ s_E`.
    Full,
}

/// `s_V`: dot product of a vertex attribute with a filter vertex weight;
/// `None` stands for ε and yields 0.
pub fn node_similarity(x: Option<&[f64]>, w: Option<&[f64]>) -> Result<f64> {
    checked_dot(x, w, "vertex")
}

/// `s_E`: dot product of an edge attribute with a filter edge weight; `None`
/// stands for εε and yields 0.
pub fn edge_similarity(x: Option<&[f64]>, w: Option<&[f64]>) -> Result<f64> {
    checked_dot(x, w, "edge")
}

fn checked_dot(x: Option<&[f64]>, w: Option<&[f64]>, what: &str) -> Result<f64> {
    match (x, w) {
        (Some(x), Some(w)) if x.len() != w.len() => Err(Error::domain(format!(
            "{what} attribute has dimension {}, filter weight has {}",
            x.len(),
            w.len()
        ))),
        (Some(x), Some(w)) => Ok(dot(x, w)),
        _ => Ok(0.0),
    }
}

#[inline]
pub(crate) fn dot(x: &[f64], w: &[f64]) -> f64 {
    x.iter().zip(w).fold(0.0, |acc, (a, b)| acc + a * b)
}

/// A feasible assignment between an input graph `g` and a filter `F`, with
/// its similarity score. Indices are vertex/edge indices of each graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    vertex_map: Vec<Option<usize>>,
    filter_map: Vec<Option<usize>>,
    edge_map: Vec<Option<usize>>,
    filter_edge_map: Vec<Option<usize>>,
    pub score: f64,
}

impl Matching {
    /// Builds the matching induced by `filter_map` (filter vertex → input
    /// vertex or ε) and scores it under `objective`.
    pub fn from_filter_map(
        g: &AttributedGraph,
        filter: &FilterGraph,
        filter_map: Vec<Option<usize>>,
        objective: Objective,
    ) -> Result<Self> {
        if filter_map.len() != filter.num_vertices() {
            return Err(Error::domain("filter map must cover every filter vertex"));
        }
        let mut vertex_map = vec![None; g.num_vertices()];
        for (a, image) in filter_map.iter().enumerate() {
            if let Some(i) = *image {
                if i >= g.num_vertices() || vertex_map[i].is_some() {
                    return Err(Error::domain(format!(
                        "filter map is not injective or out of range at filter vertex {a}"
                    )));
                }
                vertex_map[i] = Some(a);
            }
        }
        let mut edge_map = vec![None; g.num_edges()];
        let mut filter_edge_map = vec![None; filter.num_edges()];
        for (fe, &(a, b)) in filter.edges().iter().enumerate() {
            if let (Some(i), Some(j)) = (filter_map[a], filter_map[b]) {
                if let Some(ge) = g.edge_between(i, j) {
                    edge_map[ge] = Some(fe);
                    filter_edge_map[fe] = Some(ge);
                }
            }
        }
        let mut m = Self {
            vertex_map,
            filter_map,
            edge_map,
            filter_edge_map,
            score: 0.0,
        };
        m.score = m.similarity(g, filter, objective)?;
        Ok(m)
    }

    /// Filter vertex matched to input vertex `i` (`None` = ε).
    pub fn vertex_image(&self, i: usize) -> Option<usize> {
        self.vertex_map[i]
    }

    /// Input vertex matched to filter vertex `a` (`None` = ε).
    pub fn filter_preimage(&self, a: usize) -> Option<usize> {
        self.filter_map[a]
    }

    /// Filter edge matched to input edge `e` (`None` = εε).
    pub fn edge_image(&self, e: usize) -> Option<usize> {
        self.edge_map[e]
    }

    /// Input edge matched to filter edge `fe` (`None` = εε).
    pub fn filter_edge_preimage(&self, fe: usize) -> Option<usize> {
        self.filter_edge_map[fe]
    }

    pub fn vertex_map(&self) -> &[Option<usize>] {
        &self.vertex_map
    }

    pub fn filter_map(&self) -> &[Option<usize>] {
        &self.filter_map
    }

    pub fn edge_map(&self) -> &[Option<usize>] {
        &self.edge_map
    }

    /// Recomputes `s(g, F, y)` from the maps: filter vertices in order, then
    /// filter edges in order. Every solver scores through this function.
    pub fn similarity(&self, g: &AttributedGraph, filter: &FilterGraph, objective: Objective) -> Result<f64> {
        if g.vertex_dim() != filter.vertex_dim() {
            return Err(Error::domain(format!(
                "input vertex dimension {} does not match filter dimension {}",
                g.vertex_dim(),
                filter.vertex_dim()
            )));
        }
        let mut total = 0.0;
        for (a, image) in self.filter_map.iter().enumerate() {
            if let Some(i) = *image {
                total += dot(g.vertex_attr(i), filter.vertex_weight(a));
            }
        }
        if objective == Objective::Full {
            if g.edge_dim() != filter.edge_dim() {
                return Err(Error::domain(format!(
                    "input edge dimension {} does not match filter dimension {}",
                    g.edge_dim(),
                    filter.edge_dim()
                )));
            }
            for (fe, image) in self.filter_edge_map.iter().enumerate() {
                if let Some(ge) = *image {
                    total += dot(g.edge_attr(ge), filter.edge_weight(fe));
                }
            }
        }
        Ok(total)
    }

    /// Checks the assignment constraints: each filter vertex has exactly one
    /// image (possibly ε), each input vertex at most one, the two maps are
    /// mutually inverse, and the edge map is the one induced by the vertices.
    pub fn is_feasible(&self, g: &AttributedGraph, filter: &FilterGraph) -> bool {
        if self.filter_map.len() != filter.num_vertices() || self.vertex_map.len() != g.num_vertices() {
            return false;
        }
        let real = self.filter_map.iter().filter(|x| x.is_some()).count();
        // ε only when the input graph is too small to cover the filter
        if real != filter.num_vertices().min(g.num_vertices()) {
            return false;
        }
        for (a, image) in self.filter_map.iter().enumerate() {
            if let Some(i) = *image {
                if self.vertex_map.get(i) != Some(&Some(a)) {
                    return false;
                }
            }
        }
        for (i, image) in self.vertex_map.iter().enumerate() {
            if let Some(a) = *image {
                if self.filter_map.get(a) != Some(&Some(i)) {
                    return false;
                }
            }
        }
        for (ge, &(i, j)) in g.edges().iter().enumerate() {
            let induced = match (self.vertex_map[i], self.vertex_map[j]) {
                (Some(a), Some(b)) => filter.as_graph().edge_between(a, b),
                _ => None,
            };
            if induced != self.edge_map[ge] {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn similarity_is_a_dot_product() {
        assert_eq!(node_similarity(Some(&[2.0]), Some(&[3.0])).unwrap(), 6.0);
        assert_eq!(
            node_similarity(Some(&[1.0, 0.0]), Some(&[0.0, 1.0])).unwrap(),
            0.0
        );
        assert_eq!(
            edge_similarity(Some(&[1.0, 2.0]), Some(&[2.0, 1.0])).unwrap(),
            4.0
        );
        assert_eq!(
            edge_similarity(Some(&[0.0, 0.0]), Some(&[7.0, -3.0])).unwrap(),
            0.0
        );
    }

    #[test]
    fn null_elements_score_zero() {
        assert_eq!(node_similarity(None, Some(&[5.0])).unwrap(), 0.0);
        assert_eq!(node_similarity(Some(&[5.0]), None).unwrap(), 0.0);
        assert_eq!(edge_similarity(None, Some(&[1.0, 1.0])).unwrap(), 0.0);
        assert_eq!(edge_similarity(Some(&[1.0, 1.0]), None).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        assert!(node_similarity(Some(&[1.0]), Some(&[1.0, 2.0])).is_err());
        assert!(edge_similarity(Some(&[1.0, 2.0]), Some(&[1.0])).is_err());
    }

    #[test]
    fn induced_edge_map() {
        let g = AttributedGraph::from_indexed(1, vec![1.0, 2.0, 3.0], &[(0, 1), (1, 2)], 1, vec![10.0, 20.0])
            .unwrap();
        let f = FilterGraph::new(2, &[(0, 1)], 1, vec![1.0, 1.0], 1, vec![1.0]).unwrap();
        let m = Matching::from_filter_map(&g, &f, vec![Some(2), Some(1)], Objective::Full).unwrap();
        assert_eq!(m.edge_image(1), Some(0));
        assert_eq!(m.edge_image(0), None);
        assert_eq!(m.filter_edge_preimage(0), Some(1));
        assert_eq!(m.score, 3.0 + 2.0 + 20.0);
        assert!(m.is_feasible(&g, &f));
        let v = Matching::from_filter_map(&g, &f, vec![Some(2), Some(1)], Objective::VerticesOnly).unwrap();
        assert_eq!(v.score, 5.0);
    }

    #[test]
    fn non_injective_map_rejected() {
        let g = AttributedGraph::from_indexed(1, vec![1.0, 2.0], &[], 0, vec![]).unwrap();
        let f = FilterGraph::from_scalars(&[1.0, 1.0]).unwrap();
        assert!(Matching::from_filter_map(&g, &f, vec![Some(0), Some(0)], Objective::VerticesOnly).is_err());
    }
}
