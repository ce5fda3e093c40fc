//! Network layers: graph matching convolution, Louvain pooling, dense output.

pub mod conv;
pub mod dense;
pub mod louvain;
pub mod pool;

pub use conv::{ConvGradients, ConvLayer, ConvTape, Theta};
pub use dense::{relu_backward, relu_forward, softmax_cross_entropy, Dense, DenseGradients};
pub use louvain::{louvain, modularity, Dendrogram, WeightedGraph};
pub use pool::{
    apply_partition, canonical_order, global_avg_pool, global_avg_pool_backward, louvain_partition,
    louvain_pool, pool_backward, Partition,
};
