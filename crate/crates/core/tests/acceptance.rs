//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. The training criteria take several minutes on one core.

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use matchconv::data::pgm::{decode_pgm, encode_pgm};
use matchconv::data::{
    build_mnist_splits, image_to_grid_graph, load_mnist_dir, rotate_image, MnistKind, Rotation, SplitSizes,
    Splits,
};
use matchconv::gradcheck::{run_all, GradcheckConfig};
use matchconv::graph::{AttributedGraph, FilterGraph};
use matchconv::layers::{louvain, louvain_partition, modularity, WeightedGraph};
use matchconv::matching::{gms_bp_edges, gms_brute_force, gms_no_edges, solve_lsap, CostMatrix, Objective};
use matchconv::model::{Model, ModelConfig};
use matchconv::optim::{evaluate, train, TrainConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist-2class")
}

fn random_graph(rng: &mut impl Rng, n: usize, dv: usize, de: usize, density: f64) -> AttributedGraph {
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

fn random_filter(rng: &mut impl Rng, n: usize, dv: usize, de: usize) -> FilterGraph {
    FilterGraph::from_graph(&random_graph(rng, n, dv, de, 0.5)).unwrap()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for c in 0..used.len() {
            if !used[c] {
                used[c] = true;
                prefix.push(c);
                go(prefix, used, out);
                prefix.pop();
                used[c] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, max: usize, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for c in 0..=max + 1 {
            prefix.push(c);
            go(prefix, max.max(c), n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(&mut vec![0], 0, n, &mut out);
    out
}

fn lsap_exactness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=6);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| rng.gen_range(-10.0..=10.0)).collect())
            .collect();
        // same summation order as the solver's reported cost
        let best = permutations(n)
            .iter()
            .map(|p| p.iter().enumerate().fold(0.0, |s, (r, &c)| s + rows[r][c]))
            .fold(f64::INFINITY, f64::min);
        let a = solve_lsap(&CostMatrix::from_rows(&rows).unwrap()).unwrap();
        mismatches += (a.cost != best) as usize;
    }
    let elapsed = start.elapsed();
    outcome(
        mismatches == 0 && elapsed < Duration::from_secs(5),
        format!("1000 matrices, {mismatches} mismatches, {elapsed:.2?}"),
    )
}

fn gms_exactness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut mismatches = 0;
    for _ in 0..500 {
        let n = rng.gen_range(1..=7);
        let dv = rng.gen_range(1..=3);
        let g = random_graph(&mut rng, n, dv, 0, 0.4);
        let nf = rng.gen_range(1..=5);
        let f = random_filter(&mut rng, nf, dv, 0);
        let fast = gms_no_edges(&g, &f).unwrap().score;
        let exact = gms_brute_force(&g, &f, Objective::VerticesOnly).unwrap().score;
        mismatches += (fast != exact) as usize;
    }
    let elapsed = start.elapsed();
    outcome(
        mismatches == 0 && elapsed < Duration::from_secs(30),
        format!("500 pairs, {mismatches} mismatches, {elapsed:.2?}"),
    )
}

fn bp_bound() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let (mut violations, mut gap_sum) = (0, 0.0);
    for _ in 0..200 {
        let n = rng.gen_range(1..=7);
        let g = random_graph(&mut rng, n, 1, 2, 0.5);
        let nf = rng.gen_range(1..=5);
        let f = random_filter(&mut rng, nf, 1, 2);
        let bp = gms_bp_edges(&g, &f).unwrap();
        let exact = gms_brute_force(&g, &f, Objective::Full).unwrap();
        if bp.score > exact.score || !bp.is_feasible(&g, &f) {
            violations += 1;
        }
        gap_sum += exact.score - bp.score;
    }
    let elapsed = start.elapsed();
    outcome(
        violations == 0 && elapsed < Duration::from_secs(120),
        format!(
            "200 pairs, {violations} violations, mean gap {:.4}, {elapsed:.2?}",
            gap_sum / 200.0
        ),
    )
}

fn gradient_check() -> Outcome {
    let config = GradcheckConfig::default();
    let reports = run_all(&config).unwrap();
    let pass = reports
        .iter()
        .all(|r| r.instances >= 20 && r.passed(config.tolerance));
    let worst = reports
        .iter()
        .max_by(|a, b| a.max_relative_error.total_cmp(&b.max_relative_error))
        .unwrap();
    outcome(
        pass,
        format!(
            "{} layers, worst {} at {:.2e}",
            reports.len(),
            worst.layer,
            worst.max_relative_error
        ),
    )
}

fn rotation_invariance(samples: &[(matchconv::data::Image, u8)]) -> Outcome {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let model = Model::initialized(ModelConfig::desk(2, 5), 21).unwrap();
    let identical = pool.install(|| {
        samples
            .iter()
            .take(50)
            .filter(|(img, _)| {
                let base = model.embed(&image_to_grid_graph(img).unwrap()).unwrap();
                let turned = rotate_image(img, Rotation::Quarter);
                base == model.embed(&image_to_grid_graph(&turned).unwrap()).unwrap()
            })
            .count()
    });
    outcome(
        identical == 50,
        format!("{identical}/50 digits bit-identical after a 90° turn"),
    )
}

fn desk_splits(samples: &[(matchconv::data::Image, u8)]) -> Splits {
    let sizes = SplitSizes {
        train: 500,
        valid: 100,
        test: 200,
    };
    build_mnist_splits(samples, MnistKind::Reduced, Some(&[0, 1]), sizes).unwrap()
}

/// Trains the desk network and returns its test accuracy.
fn desk_accuracy(splits: &Splits, hops: usize, filter_vertices: usize) -> f64 {
    let config = ModelConfig {
        hops,
        ..ModelConfig::desk(2, filter_vertices)
    };
    let mut model = Model::initialized(config, 1).unwrap();
    let cfg = TrainConfig {
        epochs: 10,
        lr: 1e-3,
        seed: 1,
    };
    train(&mut model, &splits.train, Some(&splits.valid), &cfg, |_| {}).unwrap();
    evaluate(&model, &splits.test).unwrap().accuracy()
}

fn convolve(dir: &Path, name: &str, side: usize, pixels: &[u8]) -> Vec<u8> {
    let input = dir.join(format!("{name}.pgm"));
    let output = dir.join(format!("{name}_out.pgm"));
    std::fs::write(&input, encode_pgm(side, side, pixels).unwrap()).unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_matchconv"))
        .args(["convolve", "--filter", "-1,1", "--threads", "1", "--input"])
        .arg(&input)
        .arg("--out")
        .arg(&output)
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    decode_pgm(&std::fs::read(&output).unwrap()).unwrap().2
}

fn edge_detector() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let side = 8;
    let flat = convolve(dir.path(), "flat", side, &[128; 64]);
    let uniform = flat.iter().all(|&p| p == flat[0]);

    // left half black, right half white
    let step: Vec<u8> = (0..side * side)
        .map(|i| if i % side < side / 2 { 0 } else { 255 })
        .collect();
    let out = convolve(dir.path(), "step", side, &step);
    // a vertex responds iff its closed 4-neighbourhood sees both colours
    let expected: Vec<bool> = (0..side * side)
        .map(|i| {
            let (r, c) = (i / side, i % side);
            let mut seen = vec![step[i]];
            if c > 0 {
                seen.push(step[i - 1]);
            }
            if c + 1 < side {
                seen.push(step[i + 1]);
            }
            if r > 0 {
                seen.push(step[i - side]);
            }
            if r + 1 < side {
                seen.push(step[i + side]);
            }
            seen.contains(&0) && seen.contains(&255)
        })
        .collect();
    let max = *out.iter().max().unwrap();
    let exact = out.iter().zip(&expected).all(|(&p, &e)| (p == max) == e);
    let boundary = expected.iter().filter(|&&e| e).count();
    outcome(
        uniform && exact,
        format!(
            "constant image uniform: {uniform}; maxima on exactly the {boundary} boundary vertices: {exact}"
        ),
    )
}

fn louvain_sanity() -> Outcome {
    let mut edges = Vec::new();
    for offset in [0, 4] {
        for a in 0..4 {
            for b in a + 1..4 {
                edges.push((offset + a, offset + b));
            }
        }
    }
    edges.push((3, 4));
    let g = AttributedGraph::from_indexed(1, vec![1.0; 8], &edges, 0, vec![]).unwrap();
    let found = louvain_partition(&g);
    let weighted = WeightedGraph::from_edges(8, edges.iter().map(|&(a, b)| (a, b, 1.0)));
    let best = set_partitions(8)
        .into_iter()
        .max_by(|a, b| modularity(&weighted, a).total_cmp(&modularity(&weighted, b)))
        .unwrap();
    let communities = found.iter().max().map_or(0, |m| m + 1);
    let cliques_ok = communities == 2 && found == best;

    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut decreases = 0;
    for _ in 0..100 {
        let n = rng.gen_range(2..40);
        let p = rng.gen_range(0.05..0.5);
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if rng.gen_bool(p) {
                    edges.push((a, b, rng.gen_range(1e-6..2.0)));
                }
            }
        }
        let w = WeightedGraph::from_edges(n, edges);
        let singletons: Vec<usize> = (0..n).collect();
        let mut previous = modularity(&w, &singletons);
        for &q in &louvain(&w).modularity {
            decreases += (q < previous) as usize;
            previous = q;
        }
    }
    outcome(
        cliques_ok && decreases == 0,
        format!("two 4-cliques -> {communities} communities (oracle agrees: {}); {decreases} modularity decreases over 100 graphs", found == best),
    )
}

fn main() -> ExitCode {
    let mut failures = 0;
    let mut report = |name: &str, o: Outcome| {
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failures += (!o.pass) as usize;
    };
    report("lsap exactness", lsap_exactness());
    report("gms exactness without edges", gms_exactness());
    report("bipartite bound with edges", bp_bound());
    report("gradient check", gradient_check());

    let samples = load_mnist_dir(&fixture()).unwrap();
    report("rotation invariance", rotation_invariance(&samples));
    report("edge detector", edge_detector());
    report("louvain sanity", louvain_sanity());

    let splits = desk_splits(&samples);
    let start = Instant::now();
    let one_hop = desk_accuracy(&splits, 1, 5);
    report(
        "mnist 0/1, 1-hop",
        outcome(
            one_hop >= 0.90,
            format!(
                "test accuracy {:.1}% (needs >= 90%), {:.0?}",
                100.0 * one_hop,
                start.elapsed()
            ),
        ),
    );
    let start = Instant::now();
    let two_hop = desk_accuracy(&splits, 2, 5);
    let delta = 100.0 * (two_hop - one_hop);
    report(
        "mnist 0/1, 2-hop",
        outcome(
            delta.abs() < 5.0,
            format!(
                "test accuracy {:.1}%, change {delta:+.1} points (needs < 5), 5-vertex filters, {:.0?}",
                100.0 * two_hop,
                start.elapsed()
            ),
        ),
    );
    let fv = splits.train.default_filter_vertices(2).unwrap();
    let start = Instant::now();
    let rescaled = desk_accuracy(&splits, 2, fv);
    println!(
        "NOTE mnist 0/1, 2-hop with {fv}-vertex filters: test accuracy {:.1}%, change {:+.1} points, {:.0?}",
        100.0 * rescaled,
        100.0 * (rescaled - one_hop),
        start.elapsed()
    );

    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
