//! The classification network: a stack of conv → activation → Louvain pool
//! blocks, a global average pool and a dense output layer.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::AttributedGraph;
use crate::layers::{
    global_avg_pool, global_avg_pool_backward, louvain_pool, pool_backward, relu_backward, relu_forward,
    softmax_cross_entropy, ConvLayer, ConvTape, Dense, Partition, Theta,
};

/// Shape of a network. Everything needed to rebuild it from a flat
/// parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    /// Filters per convolution block.
    pub filters: Vec<usize>,
    /// Vertices per filter graph (star topology).
    pub filter_vertices: usize,
    pub hops: usize,
    pub theta: Theta,
    pub edge_matching: bool,
    /// ReLU after each convolution.
    pub activation: bool,
    pub input_vertex_dim: usize,
    pub input_edge_dim: usize,
    pub num_classes: usize,
}

impl ModelConfig {
    /// The reduced desk-scale architecture (8/16/32 filters) on scalar
    /// intensities with polar edge attributes.
    pub fn desk(num_classes: usize, filter_vertices: usize) -> Self {
        Self {
            filters: vec![8, 16, 32],
            filter_vertices,
            hops: 1,
            theta: Theta::Max,
            edge_matching: false,
            activation: true,
            input_vertex_dim: 1,
            input_edge_dim: 2,
            num_classes,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.filters.is_empty() || self.filters.contains(&0) {
            return Err(Error::Config("every block needs at least one filter".into()));
        }
        if self.filter_vertices == 0 {
            return Err(Error::Config("filters need at least one vertex".into()));
        }
        if self.num_classes < 2 {
            return Err(Error::Config("classification needs at least two classes".into()));
        }
        if self.input_vertex_dim == 0 {
            return Err(Error::Config("input graphs need vertex attributes".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    config: ModelConfig,
    convs: Vec<ConvLayer>,
    dense: Dense,
}

/// Intermediate values of one forward pass.
#[derive(Debug, Clone)]
pub struct Trace {
    blocks: Vec<BlockTrace>,
    pooled_vertices: usize,
    embedding: Vec<f64>,
    pub logits: Vec<f64>,
}

#[derive(Debug, Clone)]
struct BlockTrace {
    tape: ConvTape,
    pre_activation: Vec<f64>,
    num_edges: usize,
    partition: Partition,
}

impl Trace {
    pub fn embedding(&self) -> &[f64] {
        &self.embedding
    }

    /// Community count after each pooling block.
    pub fn pooled_sizes(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .map(|b| b.partition.num_communities())
            .collect()
    }

    /// True when both passes took the same matchings, partitions and
    /// activation pattern, i.e. the network is the same linear map at both
    /// points.
    pub fn same_route(&self, other: &Trace) -> bool {
        self.blocks.len() == other.blocks.len()
            && self.blocks.iter().zip(&other.blocks).all(|(a, b)| {
                a.tape.same_assignments(&b.tape)
                    && a.partition == b.partition
                    && a.pre_activation.len() == b.pre_activation.len()
                    && a.pre_activation
                        .iter()
                        .zip(&b.pre_activation)
                        .all(|(x, y)| (*x > 0.0) == (*y > 0.0))
            })
    }
}

impl Model {
    /// Zero-weight network of the given shape.
    pub fn new(config: ModelConfig) -> Result<Self> {
        config.validate()?;
        let mut convs = Vec::with_capacity(config.filters.len());
        let mut vertex_dim = config.input_vertex_dim;
        for (layer, &count) in config.filters.iter().enumerate() {
            // pooling drops edge attributes, so only the first block sees them
            let edge_matching = config.edge_matching && layer == 0;
            convs.push(ConvLayer::stars(
                count,
                config.filter_vertices,
                vertex_dim,
                config.input_edge_dim,
                config.hops,
                config.theta,
                edge_matching,
            )?);
            vertex_dim = count;
        }
        let dense = Dense::zeros(vertex_dim, config.num_classes);
        Ok(Self { config, convs, dense })
    }

    /// Glorot-initialised network; the same seed gives the same weights.
    pub fn initialized(config: ModelConfig, seed: u64) -> Result<Self> {
        let mut model = Self::new(config)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for conv in &mut model.convs {
            conv.init_glorot(&mut rng);
        }
        model.dense.init_glorot(&mut rng);
        Ok(model)
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn convs(&self) -> &[ConvLayer] {
        &self.convs
    }

    pub fn dense(&self) -> &Dense {
        &self.dense
    }

    pub fn num_params(&self) -> usize {
        self.convs
            .iter()
            .flat_map(|c| c.filters())
            .map(|f| f.num_params())
            .sum::<usize>()
            + self.dense.weights.len()
            + self.dense.bias.len()
    }

    /// All weights in a fixed order: per conv layer, per filter, vertex then
    /// edge weights; then dense weights and bias.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for f in self.convs.iter().flat_map(|c| c.filters()) {
            out.extend_from_slice(f.vertex_weights());
            out.extend_from_slice(f.edge_weights());
        }
        out.extend_from_slice(&self.dense.weights);
        out.extend_from_slice(&self.dense.bias);
        out
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.num_params() {
            return Err(Error::domain(format!(
                "model has {} parameters, got {}",
                self.num_params(),
                params.len()
            )));
        }
        let mut rest = params;
        let mut take = |len: usize| {
            let (head, tail) = rest.split_at(len);
            rest = tail;
            head
        };
        for f in self.convs.iter_mut().flat_map(|c| c.filters_mut()) {
            let nv = f.vertex_weights().len();
            f.vertex_weights_mut().copy_from_slice(take(nv));
            let ne = f.edge_weights().len();
            f.edge_weights_mut().copy_from_slice(take(ne));
        }
        let nw = self.dense.weights.len();
        self.dense.weights.copy_from_slice(take(nw));
        let nb = self.dense.bias.len();
        self.dense.bias.copy_from_slice(take(nb));
        Ok(())
    }

    fn check_input(&self, g: &AttributedGraph) -> Result<()> {
        if g.num_vertices() == 0 {
            return Err(Error::Data("input graph has no vertices".into()));
        }
        if g.vertex_dim() != self.config.input_vertex_dim {
            return Err(Error::Config(format!(
                "model expects vertex attributes of dimension {}, input has {}",
                self.config.input_vertex_dim,
                g.vertex_dim()
            )));
        }
        if self.config.edge_matching && g.edge_dim() != self.config.input_edge_dim {
            return Err(Error::Config(format!(
                "model expects edge attributes of dimension {}, input has {}",
                self.config.input_edge_dim,
                g.edge_dim()
            )));
        }
        Ok(())
    }

    pub fn forward(&self, g: &AttributedGraph) -> Result<Trace> {
        self.check_input(g)?;
        let mut current = g.clone();
        let mut blocks = Vec::with_capacity(self.convs.len());
        for conv in &self.convs {
            let (out, tape) = conv.forward(&current)?;
            let pre_activation = out.vertex_attrs().to_vec();
            let activated = if self.config.activation {
                out.with_vertex_attrs(out.vertex_dim(), relu_forward(&pre_activation))?
            } else {
                out
            };
            let num_edges = activated.num_edges() * activated.edge_dim();
            let (coarse, partition) = louvain_pool(&activated, 4)?;
            blocks.push(BlockTrace {
                tape,
                pre_activation,
                num_edges,
                partition,
            });
            current = coarse;
        }
        let embedding = global_avg_pool(&current)?;
        let logits = self.dense.forward(&embedding)?;
        Ok(Trace {
            blocks,
            pooled_vertices: current.num_vertices(),
            embedding,
            logits,
        })
    }

    /// Graph-level feature vector fed to the dense layer.
    pub fn embed(&self, g: &AttributedGraph) -> Result<Vec<f64>> {
        Ok(self.forward(g)?.embedding)
    }

    pub fn predict(&self, g: &AttributedGraph) -> Result<usize> {
        Ok(argmax(&self.forward(g)?.logits))
    }

    /// Loss and flat parameter gradient (same order as [`Model::params`]).
    pub fn loss_and_gradient(&self, g: &AttributedGraph, label: usize) -> Result<(f64, Vec<f64>, Trace)> {
        let trace = self.forward(g)?;
        let (loss, d_logits) = softmax_cross_entropy(&trace.logits, label)?;
        let grad = self.backward(&trace, &d_logits)?;
        Ok((loss, grad, trace))
    }

    /// Parameter gradient given the gradient with respect to the logits.
    pub fn backward(&self, trace: &Trace, d_logits: &[f64]) -> Result<Vec<f64>> {
        let dense = self.dense.backward(&trace.embedding, d_logits)?;
        let mut upstream = global_avg_pool_backward(trace.pooled_vertices, &dense.input);
        let mut conv_grads = Vec::with_capacity(self.convs.len());
        for (conv, block) in self.convs.iter().zip(&trace.blocks).rev() {
            let d_activated = pool_backward(&block.partition, &upstream)?;
            let d_out = if self.config.activation {
                relu_backward(&block.pre_activation, &d_activated)
            } else {
                d_activated
            };
            let d_edge = vec![0.0; block.num_edges];
            let grads = conv.backward(&block.tape, &d_out, &d_edge)?;
            upstream = grads.input_vertex.clone();
            conv_grads.push(grads);
        }
        conv_grads.reverse();

        let mut out = Vec::with_capacity(self.num_params());
        for grads in &conv_grads {
            for (v, e) in grads.vertex_weights.iter().zip(&grads.edge_weights) {
                out.extend_from_slice(v);
                out.extend_from_slice(e);
            }
        }
        out.extend_from_slice(&dense.weights);
        out.extend_from_slice(&dense.bias);
        Ok(out)
    }
}

/// Index of the largest value; the first one on ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}
