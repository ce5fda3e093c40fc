//! Finite-difference verification of every backward pass.
//!
//! Each check draws random instances, contracts the layer output with a
//! random upstream vector `u` to get a scalar `J = u · y`, and compares the
//! analytic gradient of `J` with central differences. Matchings, pooling
//! partitions and activation patterns are piecewise constant; a coordinate
//! whose ±h perturbation changes them sits on a kink, and the instance is
//! redrawn.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::AttributedGraph;
use crate::layers::{
    apply_partition, global_avg_pool, global_avg_pool_backward, pool_backward, relu_backward, relu_forward,
    softmax_cross_entropy, ConvLayer, ConvTape, Dense, Theta,
};
use crate::model::{Model, ModelConfig};

/// Denominator floor of the relative error, so that a pair of vanishing
/// gradients does not divide by zero.
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct GradcheckConfig {
    pub seed: u64,
    /// Accepted instances per layer.
    pub instances: usize,
    /// Largest random input graph.
    pub max_vertices: usize,
    pub step: f64,
    pub tolerance: f64,
    /// Adds a bias to every analytic gradient; the checks must then fail.
    pub corrupt: bool,
}

impl Default for GradcheckConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            instances: 20,
            max_vertices: 7,
            step: 1e-6,
            tolerance: 1e-4,
            corrupt: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerReport {
    pub layer: String,
    pub instances: usize,
    /// Instances redrawn because a perturbation crossed a kink.
    pub redrawn: usize,
    pub coordinates: usize,
    pub max_relative_error: f64,
}

impl LayerReport {
    pub fn passed(&self, tolerance: f64) -> bool {
        self.instances > 0 && self.max_relative_error < tolerance
    }
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(RELATIVE_ERROR_FLOOR)
}

/// Runs every layer check.
pub fn run_all(config: &GradcheckConfig) -> Result<Vec<LayerReport>> {
    Ok(vec![
        check_conv(config, false, Theta::Max)?,
        check_conv(config, true, Theta::Max)?,
        check_conv(config, true, Theta::Avg)?,
        check_pool(config)?,
        check_global_pool(config)?,
        check_relu(config)?,
        check_dense(config)?,
        check_loss(config)?,
        check_network(config)?,
    ])
}

/// One scalar evaluation: `J` and whatever decides the linear piece.
type Probe<K> = Result<(f64, K)>;

struct Checker<'a> {
    config: &'a GradcheckConfig,
    report: LayerReport,
}

impl<'a> Checker<'a> {
    fn new(config: &'a GradcheckConfig, layer: &str) -> Self {
        Self {
            config,
            report: LayerReport {
                layer: layer.to_string(),
                instances: 0,
                redrawn: 0,
                coordinates: 0,
                max_relative_error: 0.0,
            },
        }
    }

    fn attempts(&self) -> usize {
        self.config.instances * 50
    }

    /// Compares `analytic` with central differences of `probe` around `x`.
    /// Returns false (and records a redraw) when any perturbation leaves
    /// the linear piece of `base`.
    fn compare<K>(
        &mut self,
        x: &[f64],
        mut analytic: Vec<f64>,
        base: &K,
        same: impl Fn(&K, &K) -> bool,
        probe: impl Fn(&[f64]) -> Probe<K>,
    ) -> Result<bool> {
        let h = self.config.step;
        let mut numeric = Vec::with_capacity(x.len());
        let mut point = x.to_vec();
        for i in 0..x.len() {
            point[i] = x[i] + h;
            let (plus, kp) = probe(&point)?;
            point[i] = x[i] - h;
            let (minus, km) = probe(&point)?;
            point[i] = x[i];
            if !same(base, &kp) || !same(base, &km) {
                self.report.redrawn += 1;
                return Ok(false);
            }
            numeric.push((plus - minus) / (2.0 * h));
        }
        if self.config.corrupt {
            for a in &mut analytic {
                *a += 0.1;
            }
        }
        for (a, n) in analytic.iter().zip(&numeric) {
            let e = relative_error(*a, *n);
            if e > self.report.max_relative_error || e.is_nan() {
                self.report.max_relative_error = if e.is_nan() { f64::INFINITY } else { e };
            }
        }
        self.report.coordinates += x.len();
        self.report.instances += 1;
        Ok(true)
    }

    fn finish(self) -> Result<LayerReport> {
        if self.report.instances < self.config.instances {
            return Err(Error::domain(format!(
                "{}: only {} of {} instances were differentiable",
                self.report.layer, self.report.instances, self.config.instances
            )));
        }
        Ok(self.report)
    }
}

fn uniform_vec(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Connected random graph: a random spanning tree plus extra edges.
fn random_graph(rng: &mut impl Rng, n: usize, vertex_dim: usize, edge_dim: usize) -> AttributedGraph {
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.gen_range(0..v), v));
    }
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(0.25) && !edges.contains(&(a, b)) {
                edges.push((a, b));
            }
        }
    }
    edges.sort_unstable();
    let edge_attrs = uniform_vec(rng, edges.len() * edge_dim);
    AttributedGraph::from_indexed(
        vertex_dim,
        uniform_vec(rng, n * vertex_dim),
        &edges,
        edge_dim,
        edge_attrs,
    )
    .expect("valid random graph")
}

fn conv_name(edge_matching: bool, theta: Theta) -> String {
    if edge_matching {
        format!("conv (edges, theta={theta})")
    } else {
        "conv (no edges)".to_string()
    }
}

/// Convolution layer: gradient with respect to all filter weights and all
/// input attributes.
pub fn check_conv(config: &GradcheckConfig, edge_matching: bool, theta: Theta) -> Result<LayerReport> {
    let mut checker = Checker::new(config, &conv_name(edge_matching, theta));
    let mut rng =
        ChaCha8Rng::seed_from_u64(config.seed ^ if edge_matching { 0x11 } else { 0x10 } ^ theta as u64);
    for _ in 0..checker.attempts() {
        if checker.report.instances == config.instances {
            break;
        }
        let n = rng.gen_range(2..=config.max_vertices.max(2));
        let dv = rng.gen_range(1..=2);
        let de = if edge_matching { 2 } else { 0 };
        let g = random_graph(&mut rng, n, dv, de);
        let filter_vertices = rng.gen_range(2..=4);
        let mut layer = ConvLayer::stars(2, filter_vertices, dv, de, 1, theta, edge_matching)?;
        for f in layer.filters_mut() {
            f.randomize(1.0, &mut rng);
        }

        let weights: Vec<f64> = layer
            .filters()
            .iter()
            .flat_map(|f| f.vertex_weights().iter().chain(f.edge_weights()).copied())
            .collect();
        let mut x = weights.clone();
        x.extend_from_slice(g.vertex_attrs());
        x.extend_from_slice(g.edge_attrs());

        let (out, tape) = layer.forward(&g)?;
        let u_vertex = uniform_vec(&mut rng, out.vertex_attrs().len());
        let u_edge = uniform_vec(&mut rng, out.edge_attrs().len());
        let grads = layer.backward(&tape, &u_vertex, &u_edge)?;
        let mut analytic = Vec::with_capacity(x.len());
        for (v, e) in grads.vertex_weights.iter().zip(&grads.edge_weights) {
            analytic.extend_from_slice(v);
            analytic.extend_from_slice(e);
        }
        analytic.extend_from_slice(&grads.input_vertex);
        analytic.extend_from_slice(&grads.input_edge);

        let probe = |point: &[f64]| -> Probe<ConvTape> {
            let (w, rest) = point.split_at(weights.len());
            let (va, ea) = rest.split_at(g.vertex_attrs().len());
            let mut l = layer.clone();
            let mut offset = 0;
            for f in l.filters_mut() {
                let nv = f.vertex_weights().len();
                f.vertex_weights_mut().copy_from_slice(&w[offset..offset + nv]);
                offset += nv;
                let ne = f.edge_weights().len();
                f.edge_weights_mut().copy_from_slice(&w[offset..offset + ne]);
                offset += ne;
            }
            let input = g
                .with_vertex_attrs(dv, va.to_vec())?
                .with_edge_attrs(de, ea.to_vec())?;
            let (y, t) = l.forward(&input)?;
            Ok((dot(y.vertex_attrs(), &u_vertex) + dot(y.edge_attrs(), &u_edge), t))
        };
        checker.compare(&x, analytic, &tape, |a, b| a.same_assignments(b), probe)?;
    }
    checker.finish()
}

/// Max pooling over a fixed random partition.
pub fn check_pool(config: &GradcheckConfig) -> Result<LayerReport> {
    let mut checker = Checker::new(config, "louvain pool");
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x20);
    for _ in 0..checker.attempts() {
        if checker.report.instances == config.instances {
            break;
        }
        let n = rng.gen_range(1..=config.max_vertices.max(1));
        let dim = rng.gen_range(1..=3);
        let g = random_graph(&mut rng, n, dim, 0);
        let k = rng.gen_range(1..=n);
        // every community non-empty: first k vertices seed them
        let community: Vec<usize> = (0..n)
            .map(|v| if v < k { v } else { rng.gen_range(0..k) })
            .collect();
        let (coarse, partition) = apply_partition(&g, &community)?;
        let u = uniform_vec(&mut rng, coarse.vertex_attrs().len());
        let analytic = pool_backward(&partition, &u)?;
        let probe = |point: &[f64]| {
            let (y, p) = apply_partition(&g.with_vertex_attrs(dim, point.to_vec())?, &community)?;
            Ok((dot(y.vertex_attrs(), &u), p))
        };
        checker.compare(g.vertex_attrs(), analytic, &partition, |a, b| a == b, probe)?;
    }
    checker.finish()
}

pub fn check_global_pool(config: &GradcheckConfig) -> Result<LayerReport> {
    let mut checker = Checker::new(config, "global average pool");
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x30);
    for _ in 0..config.instances {
        let n = rng.gen_range(1..=config.max_vertices.max(1));
        let dim = rng.gen_range(1..=3);
        let g = random_graph(&mut rng, n, dim, 0);
        let u = uniform_vec(&mut rng, dim);
        let analytic = global_avg_pool_backward(n, &u);
        let probe = |point: &[f64]| {
            let y = global_avg_pool(&g.with_vertex_attrs(dim, point.to_vec())?)?;
            Ok((dot(&y, &u), ()))
        };
        checker.compare(g.vertex_attrs(), analytic, &(), |_, _| true, probe)?;
    }
    checker.finish()
}

pub fn check_relu(config: &GradcheckConfig) -> Result<LayerReport> {
    let mut checker = Checker::new(config, "relu");
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x40);
    for _ in 0..checker.attempts() {
        if checker.report.instances == config.instances {
            break;
        }
        let len = rng.gen_range(1..=8);
        let x = uniform_vec(&mut rng, len);
        let u = uniform_vec(&mut rng, len);
        let pattern = |v: &[f64]| v.iter().map(|&a| a > 0.0).collect::<Vec<_>>();
        let analytic = relu_backward(&x, &u);
        let probe = |point: &[f64]| Ok((dot(&relu_forward(point), &u), pattern(point)));
        checker.compare(&x, analytic, &pattern(&x), |a, b| a == b, probe)?;
    }
    checker.finish()
}

/// Dense layer: weights, bias and input.
pub fn check_dense(config: &GradcheckConfig) -> Result<LayerReport> {
    let mut checker = Checker::new(config, "dense");
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x50);
    for _ in 0..config.instances {
        let (i, o) = (rng.gen_range(1..=5), rng.gen_range(1..=4));
        let mut dense = Dense::zeros(i, o);
        dense.weights = uniform_vec(&mut rng, i * o);
        dense.bias = uniform_vec(&mut rng, o);
        let input = uniform_vec(&mut rng, i);
        let u = uniform_vec(&mut rng, o);
        let g = dense.backward(&input, &u)?;
        let mut x = dense.weights.clone();
        x.extend_from_slice(&dense.bias);
        x.extend_from_slice(&input);
        let analytic = [g.weights, g.bias, g.input].concat();
        let probe = |point: &[f64]| {
            let (w, rest) = point.split_at(i * o);
            let (b, inp) = rest.split_at(o);
            let d = Dense {
                weights: w.to_vec(),
                bias: b.to_vec(),
                ..dense.clone()
            };
            Ok((dot(&d.forward(inp)?, &u), ()))
        };
        checker.compare(&x, analytic, &(), |_, _| true, probe)?;
    }
    checker.finish()
}

/// Softmax cross-entropy with respect to the logits.
pub fn check_loss(config: &GradcheckConfig) -> Result<LayerReport> {
    let mut checker = Checker::new(config, "softmax cross-entropy");
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x60);
    for _ in 0..config.instances {
        let k = rng.gen_range(2..=6);
        let logits: Vec<f64> = (0..k).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let label = rng.gen_range(0..k);
        let (_, analytic) = softmax_cross_entropy(&logits, label)?;
        let probe = |point: &[f64]| Ok((softmax_cross_entropy(point, label)?.0, ()));
        checker.compare(&logits, analytic, &(), |_, _| true, probe)?;
    }
    checker.finish()
}

/// The whole network, end to end, with respect to every parameter.
pub fn check_network(config: &GradcheckConfig) -> Result<LayerReport> {
    let mut checker = Checker::new(config, "network");
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x70);
    for _ in 0..checker.attempts() {
        if checker.report.instances == config.instances {
            break;
        }
        let edge_matching = rng.gen_bool(0.5);
        let model_config = ModelConfig {
            filters: vec![2, 3],
            filter_vertices: rng.gen_range(2..=3),
            hops: 1,
            theta: if rng.gen_bool(0.5) { Theta::Max } else { Theta::Avg },
            edge_matching,
            activation: true,
            input_vertex_dim: 1,
            input_edge_dim: 2,
            num_classes: 2,
        };
        let model = Model::initialized(model_config, rng.gen())?;
        let n = rng.gen_range(3..=config.max_vertices.max(3) + 3);
        let g = random_graph(&mut rng, n, 1, 2);
        let label = rng.gen_range(0..2);
        let (_, analytic, trace) = model.loss_and_gradient(&g, label)?;
        let probe = |point: &[f64]| {
            let mut m = model.clone();
            m.set_params(point)?;
            let t = m.forward(&g)?;
            Ok((softmax_cross_entropy(&t.logits, label)?.0, t))
        };
        checker.compare(&model.params(), analytic, &trace, |a, b| a.same_route(b), probe)?;
    }
    checker.finish()
}
