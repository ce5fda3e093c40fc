use std::path::PathBuf;

use matchconv::data::{build_mnist_splits, load_mnist_dir, MnistKind, SplitSizes, Splits};
use matchconv::model::{Model, ModelConfig};
use matchconv::optim::{evaluate, format_checkpoint, parse_checkpoint, train, TrainConfig};

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist-2class")
}

fn splits(train: usize) -> Splits {
    let samples = load_mnist_dir(&fixture()).unwrap();
    let sizes = SplitSizes {
        train,
        valid: 10,
        test: 40,
    };
    build_mnist_splits(&samples, MnistKind::Reduced, Some(&[0, 1]), sizes).unwrap()
}

fn small_model(seed: u64) -> Model {
    let config = ModelConfig {
        filters: vec![4, 8],
        ..ModelConfig::desk(2, 5)
    };
    Model::initialized(config, seed).unwrap()
}

#[test]
fn loss_falls_on_twenty_digits() {
    let s = splits(20);
    let mut model = small_model(3);
    let cfg = TrainConfig {
        epochs: 10,
        lr: 1e-2,
        seed: 3,
    };
    let history = train(&mut model, &s.train, None, &cfg, |_| {}).unwrap();
    assert_eq!(history.len(), 10);
    assert!(history.iter().all(|r| r.loss.is_finite()));
    assert!(history[9].loss < history[0].loss, "{history:?}");
    assert!(evaluate(&model, &s.train).unwrap().accuracy() >= 0.9);
}

#[test]
fn fixed_seed_runs_are_identical() {
    let s = splits(12);
    let cfg = TrainConfig {
        epochs: 2,
        lr: 1e-3,
        seed: 9,
    };
    let run = || {
        let mut model = small_model(1);
        let history = train(&mut model, &s.train, Some(&s.valid), &cfg, |_| {}).unwrap();
        (format_checkpoint(&model), history)
    };
    let (a, ha) = run();
    let (b, hb) = run();
    assert_eq!(ha, hb);
    assert_eq!(a, b);
    let restored = parse_checkpoint(&a, std::path::Path::new("m")).unwrap();
    assert_eq!(format_checkpoint(&restored), a);
}

#[test]
fn evaluation_is_repeatable() {
    let s = splits(10);
    let model = small_model(5);
    assert_eq!(
        evaluate(&model, &s.test).unwrap(),
        evaluate(&model, &s.test).unwrap()
    );
}
