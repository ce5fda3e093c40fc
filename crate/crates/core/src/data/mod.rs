//! Datasets of labelled graphs: MNIST grid graphs and superpixel RAGs.

pub mod grid;
pub mod idx;
pub mod pgm;
pub mod rag;

use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{l_hop_neighborhood, AttributedGraph};

pub use grid::{image_to_grid_graph, rotate_image, Rotation, GRID_SIDE};
pub use idx::{load_mnist_idx, Image};
pub use rag::load_rag_dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Valid,
    Test,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub graph: AttributedGraph,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub examples: Vec<Example>,
    pub num_classes: usize,
    pub split: Split,
}

impl Dataset {
    pub fn new(examples: Vec<Example>, num_classes: usize, split: Split) -> Result<Self> {
        if let Some(bad) = examples.iter().find(|e| e.label >= num_classes) {
            return Err(Error::Data(format!(
                "label {} out of range for {num_classes} classes",
                bad.label
            )));
        }
        if let Some(first) = examples.first() {
            let (dv, de) = (first.graph.vertex_dim(), first.graph.edge_dim());
            if examples
                .iter()
                .any(|e| e.graph.vertex_dim() != dv || e.graph.edge_dim() != de)
            {
                return Err(Error::Data("examples disagree on attribute dimensions".into()));
            }
        }
        Ok(Self {
            examples,
            num_classes,
            split,
        })
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    /// `(vertex_dim, edge_dim)` of the examples, if any.
    pub fn dims(&self) -> Option<(usize, usize)> {
        self.examples
            .first()
            .map(|e| (e.graph.vertex_dim(), e.graph.edge_dim()))
    }

    /// Mean size of the closed `hops`-hop neighbourhoods over all vertices
    /// of all graphs.
    pub fn mean_neighborhood_size(&self, hops: usize) -> Result<f64> {
        let mut total = 0usize;
        let mut count = 0usize;
        for e in &self.examples {
            for &id in e.graph.ids() {
                total += l_hop_neighborhood(&e.graph, id, hops)?.num_vertices();
                count += 1;
            }
        }
        if count == 0 {
            return Err(Error::Data("dataset has no vertices".into()));
        }
        Ok(total as f64 / count as f64)
    }

    /// Filter size matched to the data: the rounded mean neighbourhood size.
    pub fn default_filter_vertices(&self, hops: usize) -> Result<usize> {
        Ok((self.mean_neighborhood_size(hops)?.round() as usize).max(1))
    }
}

/// MNIST variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MnistKind {
    /// Upright images in every split.
    Reduced,
    /// Every split rotated.
    Rotated,
    /// Upright train and validation, rotated test.
    Mixed,
}

impl std::str::FromStr for MnistKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reduced" => Ok(Self::Reduced),
            "rotated" => Ok(Self::Rotated),
            "mixed" => Ok(Self::Mixed),
            other => Err(Error::Config(format!(
                "dataset kind must be reduced, rotated or mixed, got `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSizes {
    pub train: usize,
    pub valid: usize,
    pub test: usize,
}

impl SplitSizes {
    pub const FULL: SplitSizes = SplitSizes {
        train: 10_000,
        valid: 2_000,
        test: 50_000,
    };

    /// Keeps the 10 000 / 2 000 / 50 000 proportions with `train` examples.
    pub fn scaled(train: usize) -> Self {
        Self {
            train,
            valid: (train / 5).max(1),
            test: train * 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Splits {
    pub train: Dataset,
    pub valid: Dataset,
    pub test: Dataset,
}

/// Rotation applied to the `index`-th rotated example: 90, 180, 270 in turn.
pub fn rotation_for(index: usize) -> Rotation {
    match index % 3 {
        0 => Rotation::Quarter,
        1 => Rotation::Half,
        _ => Rotation::ThreeQuarters,
    }
}

/// Loads every IDX pair found in `dir`: the standard `train-*` and `t10k-*`
/// files, or a single `images-idx3-ubyte` / `labels-idx1-ubyte` pair.
pub fn load_mnist_dir(dir: &Path) -> Result<Vec<(Image, u8)>> {
    let pairs = [
        ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
        ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
        ("images-idx3-ubyte", "labels-idx1-ubyte"),
    ];
    let mut samples = Vec::new();
    let mut found = false;
    for (images, labels) in pairs {
        let (ip, lp) = (dir.join(images), dir.join(labels));
        if ip.is_file() && lp.is_file() {
            samples.extend(load_mnist_idx(&ip, &lp)?);
            found = true;
        }
    }
    if !found {
        return Err(Error::Data(format!("no MNIST IDX files in {}", dir.display())));
    }
    Ok(samples)
}

/// Splits labelled images into train / valid / test grid-graph datasets.
///
/// `classes` keeps only the listed digits and renumbers them by position.
/// Images are taken in file order: train first, then valid, then test. The
/// test split is shortened when the pool runs out; train and valid are not.
pub fn build_mnist_splits(
    samples: &[(Image, u8)],
    kind: MnistKind,
    classes: Option<&[u8]>,
    sizes: SplitSizes,
) -> Result<Splits> {
    let (pool, num_classes): (Vec<(&Image, usize)>, usize) = match classes {
        Some(keep) => {
            if keep.is_empty() {
                return Err(Error::Config("class filter is empty".into()));
            }
            let pool = samples
                .iter()
                .filter_map(|(img, l)| keep.iter().position(|k| k == l).map(|p| (img, p)))
                .collect();
            (pool, keep.len())
        }
        None => (samples.iter().map(|(img, l)| (img, *l as usize)).collect(), 10),
    };
    let needed = sizes.train + sizes.valid;
    if pool.len() <= needed || sizes.train == 0 {
        return Err(Error::Data(format!(
            "{} images available, need more than {needed} for train and validation",
            pool.len()
        )));
    }
    let test_len = sizes.test.min(pool.len() - needed);
    let rotate = |split: Split| match kind {
        MnistKind::Reduced => false,
        MnistKind::Rotated => true,
        MnistKind::Mixed => split == Split::Test,
    };
    let make = |range: std::ops::Range<usize>, split: Split| -> Result<Dataset> {
        let examples = pool[range]
            .iter()
            .enumerate()
            .map(|(i, &(img, label))| {
                let graph = if rotate(split) {
                    image_to_grid_graph(&rotate_image(img, rotation_for(i)))?
                } else {
                    image_to_grid_graph(img)?
                };
                Ok(Example { graph, label })
            })
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(examples, num_classes, split)
    };
    Ok(Splits {
        train: make(0..sizes.train, Split::Train)?,
        valid: make(sizes.train..needed, Split::Valid)?,
        test: make(needed..needed + test_len, Split::Test)?,
    })
}
