#![allow(dead_code)]

use matchconv::graph::{AttributedGraph, FilterGraph};
use proptest::prelude::*;
use rand::Rng;

/// Random simple graph on `n` vertices with attributes in [-1, 1].
pub fn random_graph(rng: &mut impl Rng, n: usize, dv: usize, de: usize, density: f64) -> AttributedGraph {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(density) {
                edges.push((a, b));
            }
        }
    }
    let attrs = (0..n * dv).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let edge_attrs = (0..edges.len() * de).map(|_| rng.gen_range(-1.0..1.0)).collect();
    AttributedGraph::from_indexed(dv, attrs, &edges, de, edge_attrs).unwrap()
}

pub fn random_filter(rng: &mut impl Rng, n: usize, dv: usize, de: usize, density: f64) -> FilterGraph {
    FilterGraph::from_graph(&random_graph(rng, n, dv, de, density)).unwrap()
}

/// Proptest strategy: graphs with up to `max_n` vertices, sparse ids.
pub fn arb_graph(max_n: usize, dv: usize, de: usize) -> impl Strategy<Value = AttributedGraph> {
    (1..=max_n)
        .prop_flat_map(move |n| {
            let pairs = n * (n - 1) / 2;
            (
                Just(n),
                proptest::collection::vec(any::<bool>(), pairs),
                proptest::collection::vec(-10.0f64..10.0, n * dv),
                proptest::collection::vec(-10.0f64..10.0, pairs * de),
                proptest::collection::btree_set(0u64..1000, n),
            )
        })
        .prop_map(move |(n, mask, attrs, edge_pool, ids)| {
            let ids: Vec<u64> = ids.into_iter().collect();
            let mut vertices = Vec::new();
            for (i, &id) in ids.iter().enumerate() {
                vertices.push((id, attrs[i * dv..(i + 1) * dv].to_vec()));
            }
            let mut edges = Vec::new();
            let mut k = 0;
            for a in 0..n {
                for b in a + 1..n {
                    if mask[k] {
                        edges.push((ids[a], ids[b], edge_pool[k * de..(k + 1) * de].to_vec()));
                    }
                    k += 1;
                }
            }
            AttributedGraph::new(dv, de, vertices, edges).unwrap()
        })
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                go(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}
