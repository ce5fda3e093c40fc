//! Matches a small filter against a graph with the three solvers and prints
//! the assignments.
//!
//! cargo run --example match_graphs

use matchconv::graph::{AttributedGraph, FilterGraph};
use matchconv::matching::{gms_bp_edges, gms_brute_force, gms_no_edges, Matching, Objective};

fn show(label: &str, g: &AttributedGraph, f: &FilterGraph, m: &Matching) {
    println!("{label}: score {}", m.score);
    for a in 0..f.num_vertices() {
        match m.filter_preimage(a) {
            Some(i) => println!("  filter vertex {a} -> graph vertex {}", g.id(i)),
            None => println!("  filter vertex {a} -> eps"),
        }
    }
}

fn main() -> matchconv::Result<()> {
    // a triangle 10-11-12 with a pendant vertex 13
    let g = AttributedGraph::new(
        1,
        1,
        vec![
            (10, vec![0.2]),
            (11, vec![0.9]),
            (12, vec![-0.4]),
            (13, vec![0.5]),
        ],
        vec![
            (10, 11, vec![1.0]),
            (11, 12, vec![-1.0]),
            (10, 12, vec![0.5]),
            (12, 13, vec![2.0]),
        ],
    )?;
    // a 3-vertex path filter
    let f = FilterGraph::new(3, &[(0, 1), (1, 2)], 1, vec![1.0, -1.0, 0.5], 1, vec![0.8, -0.3])?;

    show("vertices only, LSAP", &g, &f, &gms_no_edges(&g, &f)?);
    show(
        "vertices only, exhaustive",
        &g,
        &f,
        &gms_brute_force(&g, &f, Objective::VerticesOnly)?,
    );
    let bp = gms_bp_edges(&g, &f)?;
    let exact = gms_brute_force(&g, &f, Objective::Full)?;
    show("with edges, bipartite", &g, &f, &bp);
    show("with edges, exhaustive", &g, &f, &exact);
    println!("bipartite gap: {}", exact.score - bp.score);
    Ok(())
}
