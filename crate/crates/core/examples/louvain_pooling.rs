//! Louvain pooling of a grid graph: community structure and the coarse
//! graph after each of three successive poolings.
//!
//! cargo run --example louvain_pooling

use matchconv::data::grid::grid_graph;
use matchconv::layers::louvain_pool;

fn main() -> matchconv::Result<()> {
    // a bright cross on a dark 9x9 background
    let side = 9;
    let values: Vec<f64> = (0..side * side)
        .map(|i| if i / side == 4 || i % side == 4 { 1.0 } else { 0.1 })
        .collect();
    let mut g = grid_graph(&values, side)?.without_edge_attrs();
    for level in 1..=3 {
        let (coarse, partition) = louvain_pool(&g, 4)?;
        let sizes: Vec<usize> = partition.members().iter().map(|m| m.len()).collect();
        println!(
            "level {level}: {} vertices -> {} communities, sizes {sizes:?}, {} coarse edges",
            g.num_vertices(),
            coarse.num_vertices(),
            coarse.num_edges()
        );
        g = coarse;
        if g.num_vertices() == 1 {
            break;
        }
    }
    println!("coarse attributes: {:?}", g.vertex_attrs());
    Ok(())
}
