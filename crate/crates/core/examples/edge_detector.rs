//! The (-1, 1) filter as an edge detector: convolves an MNIST digit and its
//! quarter turn, and writes both responses as PGM images.
//!
//! cargo run --release --example edge_detector -- [mnist dir] [index] [out dir]

use std::path::PathBuf;

use matchconv::cli::convolve_scalar;
use matchconv::data::pgm::{normalize_to_bytes, write_pgm};
use matchconv::data::{image_to_grid_graph, load_mnist_dir, rotate_image, Rotation, GRID_SIDE};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let dir = args
        .first()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/mnist-2class")));
    let index: usize = args.get(1).map_or(Ok(0), |s| s.parse())?;
    let out = args.get(2).map_or_else(std::env::temp_dir, PathBuf::from);

    let samples = load_mnist_dir(&dir)?;
    let (img, label) = &samples[index];
    for (name, image) in [
        ("original", img.clone()),
        ("rotated", rotate_image(img, Rotation::Quarter)),
    ] {
        let g = image_to_grid_graph(&image)?.without_edge_attrs();
        let response = convolve_scalar(&g, &[-1.0, 1.0], 1)?;
        let path = out.join(format!("digit{label}_{name}.pgm"));
        write_pgm(&path, GRID_SIDE, GRID_SIDE, &normalize_to_bytes(&response))?;
        let strong = response.iter().filter(|&&x| x > 0.25).count();
        println!("{name}: {strong} strong responses, wrote {}", path.display());
    }
    Ok(())
}
