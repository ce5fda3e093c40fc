//! Louvain community detection on weighted undirected graphs.
//!
//! Nodes are visited in index order and a node only moves to a neighbouring
//! community whose modularity gain is strictly larger than staying put; among
//! equal gains the lowest community index wins. The result is therefore a
//! deterministic function of the node numbering.

/// Symmetric weighted adjacency. A self-loop entry `(i, w)` in `adj[i]`
/// holds the diagonal `A_ii` (internal weight counted in both directions).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    adj: Vec<Vec<(usize, f64)>>,
}

impl WeightedGraph {
    /// Builds from undirected edges `(a, b, w)` with `a != b`; parallel edges
    /// are summed.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (a, b, w) in edges {
            debug_assert!(a != b);
            adj[a].push((b, w));
            adj[b].push((a, w));
        }
        for list in &mut adj {
            merge_sorted(list);
        }
        Self { adj }
    }

    pub fn num_nodes(&self) -> usize {
        self.adj.len()
    }

    fn degree(&self, i: usize) -> f64 {
        self.adj[i].iter().fold(0.0, |acc, &(_, w)| acc + w)
    }

    fn total_weight_x2(&self) -> f64 {
        (0..self.num_nodes()).fold(0.0, |acc, i| acc + self.degree(i))
    }
}

fn merge_sorted(list: &mut Vec<(usize, f64)>) {
    list.sort_by_key(|&(n, _)| n);
    let mut merged: Vec<(usize, f64)> = Vec::with_capacity(list.len());
    for &(n, w) in list.iter() {
        match merged.last_mut() {
            Some(last) if last.0 == n => last.1 += w,
            _ => merged.push((n, w)),
        }
    }
    *list = merged;
}

/// Newman modularity of a partition (community index per node).
pub fn modularity(graph: &WeightedGraph, community: &[usize]) -> f64 {
    let two_m = graph.total_weight_x2();
    if two_m == 0.0 {
        return 0.0;
    }
    let k = community.iter().copied().max().map_or(0, |c| c + 1);
    let mut internal = vec![0.0; k];
    let mut tot = vec![0.0; k];
    for (i, list) in graph.adj.iter().enumerate() {
        let c = community[i];
        for &(j, w) in list {
            tot[c] += w;
            if community[j] == c {
                internal[c] += w;
            }
        }
    }
    (0..k).fold(0.0, |q, c| q + internal[c] / two_m - (tot[c] / two_m).powi(2))
}

/// Successive partitions found by the Louvain method.
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    /// `levels[l][v]`: community of original node `v` after level `l`.
    /// Communities are numbered densely by their smallest member.
    pub levels: Vec<Vec<usize>>,
    /// Modularity of each level on the original graph.
    pub modularity: Vec<f64>,
}

impl Dendrogram {
    /// Partition after the first local-moving phase, or singletons when no
    /// move improved modularity.
    pub fn first_level(&self, n: usize) -> Vec<usize> {
        self.levels.first().cloned().unwrap_or_else(|| (0..n).collect())
    }
}

const MAX_PASSES: usize = 1000;

pub fn louvain(graph: &WeightedGraph) -> Dendrogram {
    let n = graph.num_nodes();
    let mut levels: Vec<Vec<usize>> = Vec::new();
    let mut modularities = Vec::new();
    let mut current = graph.clone();
    let mut membership: Vec<usize> = (0..n).collect();
    while let Some(local) = local_moving(&current) {
        let local = renumber(&local);
        for c in membership.iter_mut() {
            *c = local[*c];
        }
        levels.push(membership.clone());
        modularities.push(modularity(graph, &membership));
        current = aggregate(&current, &local);
        if current.num_nodes() <= 1 {
            break;
        }
    }
    Dendrogram {
        levels,
        modularity: modularities,
    }
}

/// One local-moving phase. `None` when no node changed community.
fn local_moving(graph: &WeightedGraph) -> Option<Vec<usize>> {
    let n = graph.num_nodes();
    let two_m = graph.total_weight_x2();
    if two_m == 0.0 {
        return None;
    }
    let k: Vec<f64> = (0..n).map(|i| graph.degree(i)).collect();
    let mut community: Vec<usize> = (0..n).collect();
    let mut tot = k.clone();
    let mut links = vec![0.0; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut any_move = false;

    for _ in 0..MAX_PASSES {
        let mut moved = false;
        for i in 0..n {
            let own = community[i];
            for &(j, w) in &graph.adj[i] {
                if j == i {
                    continue;
                }
                let c = community[j];
                if links[c] == 0.0 && !touched.contains(&c) {
                    touched.push(c);
                }
                links[c] += w;
            }
            tot[own] -= k[i];
            let gain = |c: usize, links: &[f64]| links[c] - tot[c] * k[i] / two_m;
            let mut best = own;
            let mut best_gain = gain(own, &links);
            touched.sort_unstable();
            for &c in &touched {
                let g = gain(c, &links);
                if g > best_gain {
                    best = c;
                    best_gain = g;
                }
            }
            tot[best] += k[i];
            if best != own {
                community[i] = best;
                moved = true;
                any_move = true;
            }
            for &c in &touched {
                links[c] = 0.0;
            }
            touched.clear();
        }
        if !moved {
            break;
        }
    }
    any_move.then_some(community)
}

/// Dense renumbering by order of first appearance.
fn renumber(community: &[usize]) -> Vec<usize> {
    let mut map = vec![usize::MAX; community.len()];
    let mut next = 0;
    community
        .iter()
        .map(|&c| {
            if map[c] == usize::MAX {
                map[c] = next;
                next += 1;
            }
            map[c]
        })
        .collect()
}

fn aggregate(graph: &WeightedGraph, community: &[usize]) -> WeightedGraph {
    let k = community.iter().copied().max().map_or(0, |c| c + 1);
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); k];
    for (i, list) in graph.adj.iter().enumerate() {
        let ci = community[i];
        for &(j, w) in list {
            adj[ci].push((community[j], w));
        }
    }
    for list in &mut adj {
        merge_sorted(list);
    }
    WeightedGraph { adj }
}
