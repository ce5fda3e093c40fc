use std::cmp::Ordering;

use super::lsap::{solve_lsap, CostMatrix};
use super::{dot, Matching, Objective};
use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, FilterGraph};

/// Filter size limit of [`gms_brute_force`].
pub const BRUTE_FORCE_MAX_FILTER: usize = 8;

/// Exact GMS of the no-edge model, `max_y Σ s_V(i, a)`, as an LSAP on
/// negated similarities. When the input has fewer vertices than the filter,
/// zero-cost dummy rows stand for ε.
///
/// Rows of the cost matrix are ordered by attribute value rather than by
/// vertex id, so the optimum and its score depend only on the multiset of
/// input attributes: relabelling the input graph cannot change the result.
pub fn gms_no_edges(g: &AttributedGraph, filter: &FilterGraph) -> Result<Matching> {
    check_vertex_dims(g, filter)?;
    let rows = attribute_order(g);
    let cost = CostMatrix::padded(rows.len(), filter.num_vertices(), |r, a| {
        -dot(g.vertex_attr(rows[r]), filter.vertex_weight(a))
    });
    finish(g, filter, &rows, &cost, Objective::VerticesOnly)
}

/// Square Fast BP heuristic for the full objective.
///
/// Each candidate pair `(i, a)` gets `s_V(i, a)` plus the best similarity of
/// an assignment between the edges incident to `i` and those incident to
/// `a` (itself a small LSAP). One square LSAP on these augmented costs gives
/// the vertex assignment; the returned score is the true objective of that
/// assignment, not the estimate.
pub fn gms_bp_edges(g: &AttributedGraph, filter: &FilterGraph) -> Result<Matching> {
    check_vertex_dims(g, filter)?;
    check_edge_dims(g, filter)?;
    let fg = filter.as_graph();
    let rows = attribute_order(g);
    let mut estimate = vec![0.0; rows.len() * filter.num_vertices()];
    for (r, &i) in rows.iter().enumerate() {
        let gi = g.incident(i);
        for a in 0..filter.num_vertices() {
            let fa = fg.incident(a);
            let edge_cost = CostMatrix::padded(gi.len(), fa.len(), |x, y| {
                -dot(g.edge_attr(gi[x].1), filter.edge_weight(fa[y].1))
            });
            let best = solve_lsap(&edge_cost)?;
            estimate[r * filter.num_vertices() + a] =
                dot(g.vertex_attr(i), filter.vertex_weight(a)) - best.cost;
        }
    }
    let cost = CostMatrix::padded(rows.len(), filter.num_vertices(), |r, a| {
        -estimate[r * filter.num_vertices() + a]
    });
    finish(g, filter, &rows, &cost, Objective::Full)
}

/// Exact GMS by enumerating every feasible filter map, for filters of at most
/// [`BRUTE_FORCE_MAX_FILTER`] vertices. Maps are visited in lexicographic
/// order (ε after every real vertex) and only a strictly better score
/// replaces the incumbent.
pub fn gms_brute_force(g: &AttributedGraph, filter: &FilterGraph, objective: Objective) -> Result<Matching> {
    check_vertex_dims(g, filter)?;
    if objective == Objective::Full {
        check_edge_dims(g, filter)?;
    }
    let nf = filter.num_vertices();
    if nf > BRUTE_FORCE_MAX_FILTER {
        return Err(Error::domain(format!(
            "brute force is limited to {BRUTE_FORCE_MAX_FILTER} filter vertices, got {nf}"
        )));
    }
    let ng = g.num_vertices();
    let dummies = nf.saturating_sub(ng);

    struct Search<'a> {
        g: &'a AttributedGraph,
        filter: &'a FilterGraph,
        objective: Objective,
        used: Vec<bool>,
        dummies_left: usize,
        current: Vec<Option<usize>>,
        best: Option<Matching>,
    }

    impl Search<'_> {
        fn visit(&mut self, a: usize) -> Result<()> {
            if a == self.filter.num_vertices() {
                let m = Matching::from_filter_map(self.g, self.filter, self.current.clone(), self.objective)?;
                if self.best.as_ref().is_none_or(|b| m.score > b.score) {
                    self.best = Some(m);
                }
                return Ok(());
            }
            for i in 0..self.g.num_vertices() {
                if !self.used[i] {
                    self.used[i] = true;
                    self.current[a] = Some(i);
                    self.visit(a + 1)?;
                    self.used[i] = false;
                }
            }
            if self.dummies_left > 0 {
                self.dummies_left -= 1;
                self.current[a] = None;
                self.visit(a + 1)?;
                self.dummies_left += 1;
            }
            Ok(())
        }
    }

    let mut search = Search {
        g,
        filter,
        objective,
        used: vec![false; ng],
        dummies_left: dummies,
        current: vec![None; nf],
        best: None,
    };
    search.visit(0)?;
    Ok(search.best.expect("at least one feasible map exists"))
}

fn finish(
    g: &AttributedGraph,
    filter: &FilterGraph,
    rows: &[usize],
    cost: &CostMatrix,
    objective: Objective,
) -> Result<Matching> {
    let assignment = solve_lsap(cost)?;
    let mut filter_map = vec![None; filter.num_vertices()];
    for (r, &c) in assignment.row_to_col.iter().enumerate() {
        if !cost.is_padding_row(r) && !cost.is_padding_col(c) {
            filter_map[c] = Some(rows[r]);
        }
    }
    Matching::from_filter_map(g, filter, filter_map, objective)
}

/// Vertex indices sorted by attribute vector (lexicographic, total order on
/// floats), ties by index.
fn attribute_order(g: &AttributedGraph) -> Vec<usize> {
    let mut order: Vec<usize> = (0..g.num_vertices()).collect();
    order.sort_by(|&x, &y| compare_vectors(g.vertex_attr(x), g.vertex_attr(y)).then(x.cmp(&y)));
    order
}

pub(crate) fn compare_vectors(x: &[f64], y: &[f64]) -> Ordering {
    for (a, b) in x.iter().zip(y) {
        match a.total_cmp(b) {
            Ordering::Equal => continue,
            ord => return ord,
        }
    }
    x.len().cmp(&y.len())
}

fn check_vertex_dims(g: &AttributedGraph, filter: &FilterGraph) -> Result<()> {
    if g.vertex_dim() != filter.vertex_dim() {
        return Err(Error::domain(format!(
            "input vertex dimension {} does not match filter dimension {}",
            g.vertex_dim(),
            filter.vertex_dim()
        )));
    }
    Ok(())
}

fn check_edge_dims(g: &AttributedGraph, filter: &FilterGraph) -> Result<()> {
    if g.edge_dim() != filter.edge_dim() {
        return Err(Error::domain(format!(
            "input edge dimension {} does not match filter dimension {}",
            g.edge_dim(),
            filter.edge_dim()
        )));
    }
    Ok(())
}
