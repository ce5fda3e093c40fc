//! Trains the no-edge network on MNIST digits 0 and 1 as 14×14 grid graphs.
//!
//! cargo run --release --example train_mnist_2class -- [mnist dir] [train] [test] [epochs] [hops]
//!
//! A fifth of the training size is held out for validation and the best
//! validation epoch is kept.

use std::path::PathBuf;
use std::time::Instant;

use matchconv::data::{build_mnist_splits, load_mnist_dir, MnistKind, SplitSizes};
use matchconv::model::{Model, ModelConfig};
use matchconv::optim::{evaluate, train, TrainConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let dir = args
        .first()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/mnist-2class")));
    let arg = |i: usize, default: usize| args.get(i).map_or(Ok(default), |s| s.parse());
    let (train_len, test_len, epochs, hops) = (arg(1, 500)?, arg(2, 200)?, arg(3, 10)?, arg(4, 1)?);

    let samples = load_mnist_dir(&dir)?;
    let sizes = SplitSizes {
        train: train_len,
        valid: (train_len / 5).max(1),
        test: test_len,
    };
    let splits = build_mnist_splits(&samples, MnistKind::Reduced, Some(&[0, 1]), sizes)?;
    let filter_vertices = splits.train.default_filter_vertices(hops)?;
    let config = ModelConfig {
        hops,
        ..ModelConfig::desk(2, filter_vertices)
    };
    println!(
        "{} train / {} valid / {} test graphs, {filter_vertices}-vertex filters, {hops}-hop neighbourhoods",
        splits.train.len(),
        splits.valid.len(),
        splits.test.len()
    );

    let mut model = Model::initialized(config, 1)?;
    let cfg = TrainConfig {
        epochs,
        lr: 1e-3,
        seed: 1,
    };
    let start = Instant::now();
    train(&mut model, &splits.train, Some(&splits.valid), &cfg, |r| {
        let valid = r.valid_accuracy.unwrap_or(f64::NAN);
        println!(
            "epoch {:>3}  loss {:.4}  valid {:.3}  ({:.1?})",
            r.epoch,
            r.loss,
            valid,
            start.elapsed()
        );
    })?;
    let eval = evaluate(&model, &splits.test)?;
    println!(
        "test accuracy {:.2}%  confusion {:?}",
        100.0 * eval.accuracy(),
        eval.confusion
    );
    Ok(())
}
