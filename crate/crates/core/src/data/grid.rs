//! Images as grid graphs.

use std::f64::consts::FRAC_PI_2;

use super::idx::{Image, SIDE};
use crate::error::{Error, Result};
use crate::graph::AttributedGraph;

/// Side of the downsampled grid.
pub const GRID_SIDE: usize = SIDE / 2;

/// Right-angle rotations, counter-clockwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rotation {
    Quarter,
    Half,
    ThreeQuarters,
}

impl Rotation {
    pub fn from_degrees(degrees: u32) -> Result<Self> {
        match degrees {
            90 => Ok(Self::Quarter),
            180 => Ok(Self::Half),
            270 => Ok(Self::ThreeQuarters),
            other => Err(Error::Config(format!(
                "rotation must be 90, 180 or 270 degrees, got {other}"
            ))),
        }
    }

    fn turns(self) -> usize {
        match self {
            Self::Quarter => 1,
            Self::Half => 2,
            Self::ThreeQuarters => 3,
        }
    }
}

/// Rotates a square row-major raster counter-clockwise about its centre.
pub fn rotate_square<T: Copy>(pixels: &[T], side: usize, rotation: Rotation) -> Vec<T> {
    let mut out = pixels.to_vec();
    for _ in 0..rotation.turns() {
        let src = out.clone();
        for r in 0..side {
            for c in 0..side {
                // (r, c) -> (side-1-c, r)
                out[(side - 1 - c) * side + r] = src[r * side + c];
            }
        }
    }
    out
}

pub fn rotate_image(img: &Image, rotation: Rotation) -> Image {
    Image {
        pixels: rotate_square(&img.pixels, SIDE, rotation),
    }
}

/// 2×2 mean pooling to 14×14. The four values are summed in ascending
/// order so the result does not depend on their position in the block.
pub fn downsample(img: &Image) -> Vec<f64> {
    let mut out = Vec::with_capacity(GRID_SIDE * GRID_SIDE);
    for r in 0..GRID_SIDE {
        for c in 0..GRID_SIDE {
            let mut block = [
                img.at(2 * r, 2 * c),
                img.at(2 * r, 2 * c + 1),
                img.at(2 * r + 1, 2 * c),
                img.at(2 * r + 1, 2 * c + 1),
            ];
            block.sort_by(f64::total_cmp);
            out.push(block.iter().fold(0.0, |a, x| a + x) / 4.0);
        }
    }
    out
}

/// Quarter-resolution grid graph: one vertex per downsampled pixel (id =
/// row-major position, attribute = intensity), 4-adjacency, and edge
/// attributes `(ρ, φ)` = `(1, angle of the displacement from the lower id)`.
pub fn image_to_grid_graph(img: &Image) -> Result<AttributedGraph> {
    if img.pixels.len() != SIDE * SIDE {
        return Err(Error::Data(format!(
            "grid conversion expects a {SIDE}x{SIDE} image, got {} pixels",
            img.pixels.len()
        )));
    }
    grid_graph(&downsample(img), GRID_SIDE)
}

/// Grid graph over an arbitrary square raster.
pub fn grid_graph(values: &[f64], side: usize) -> Result<AttributedGraph> {
    if values.len() != side * side {
        return Err(Error::Data(format!(
            "raster has {} values, expected {side}x{side}",
            values.len()
        )));
    }
    let mut edges = Vec::with_capacity(2 * side * side);
    let mut edge_attrs = Vec::with_capacity(4 * side * side);
    for r in 0..side {
        for c in 0..side {
            let v = r * side + c;
            if c + 1 < side {
                edges.push((v, v + 1));
                edge_attrs.extend_from_slice(&[1.0, 0.0]);
            }
            if r + 1 < side {
                // angles in image coordinates: x right, y down
                edges.push((v, v + side));
                edge_attrs.extend_from_slice(&[1.0, FRAC_PI_2]);
            }
        }
    }
    AttributedGraph::from_indexed(1, values.to_vec(), &edges, 2, edge_attrs)
}
