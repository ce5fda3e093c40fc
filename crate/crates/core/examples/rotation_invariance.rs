//! The no-edge network ignores orientation: a digit and its quarter turns
//! give bit-identical graph embeddings.
//!
//! cargo run --release --example rotation_invariance -- [mnist dir] [count]

use std::path::PathBuf;

use matchconv::data::{image_to_grid_graph, load_mnist_dir, rotate_image, Rotation};
use matchconv::model::{Model, ModelConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let dir = args
        .first()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/mnist-2class")));
    let count: usize = args.get(1).map_or(Ok(10), |s| s.parse())?;

    let model = Model::initialized(ModelConfig::desk(2, 5), 7)?;
    let samples = load_mnist_dir(&dir)?;
    let mut identical = 0;
    for (img, _) in samples.iter().take(count) {
        let base = model.embed(&image_to_grid_graph(img)?)?;
        let same = [Rotation::Quarter, Rotation::Half, Rotation::ThreeQuarters]
            .into_iter()
            .map(|r| model.embed(&image_to_grid_graph(&rotate_image(img, r))?))
            .collect::<Result<Vec<_>, _>>()?
            .iter()
            .all(|e| e == &base);
        identical += same as usize;
    }
    println!("{identical}/{count} digits give identical embeddings under all quarter turns");
    Ok(())
}
