use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::adam::AdamState;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::Model;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    /// Drives the per-epoch shuffles.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 50,
            lr: 1e-3,
            seed: 0,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::Config(format!(
                "learning rate must be positive, got {}",
                self.lr
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    /// Mean training loss over the epoch.
    pub loss: f64,
    pub valid_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub correct: usize,
    pub total: usize,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<usize>>,
}

impl Evaluation {
    pub fn accuracy(&self) -> f64 {
        self.correct as f64 / self.total as f64
    }
}

/// Argmax-class accuracy. Examples are scored in parallel; the result does
/// not depend on the thread count.
pub fn evaluate(model: &Model, dataset: &Dataset) -> Result<Evaluation> {
    if dataset.is_empty() {
        return Err(Error::Data("cannot evaluate on an empty dataset".into()));
    }
    let k = model.config().num_classes;
    if dataset.num_classes > k {
        return Err(Error::Config(format!(
            "dataset has {} classes, model predicts {k}",
            dataset.num_classes
        )));
    }
    let predictions = dataset
        .examples
        .par_iter()
        .map(|e| model.predict(&e.graph))
        .collect::<Result<Vec<_>>>()?;
    let mut confusion = vec![vec![0usize; k]; k];
    for (e, &p) in dataset.examples.iter().zip(&predictions) {
        confusion[e.label][p] += 1;
    }
    let correct = (0..k).map(|c| confusion[c][c]).sum();
    Ok(Evaluation {
        correct,
        total: dataset.len(),
        confusion,
    })
}

/// Per-example Adam training. When `valid` is given, the model of the epoch
/// with the best validation accuracy is kept (the earliest on ties);
/// otherwise the final model. `on_epoch` sees each record as it completes.
pub fn train(
    model: &mut Model,
    train_set: &Dataset,
    valid: Option<&Dataset>,
    config: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<Vec<EpochRecord>> {
    config.validate()?;
    if train_set.is_empty() {
        return Err(Error::Data("training set is empty".into()));
    }
    if train_set.num_classes != model.config().num_classes {
        return Err(Error::Config(format!(
            "dataset has {} classes, model predicts {}",
            train_set.num_classes,
            model.config().num_classes
        )));
    }
    // surfaces dimension mismatches before any update
    model.forward(&train_set.examples[0].graph)?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut adam = AdamState::new(model.num_params(), config.lr);
    let mut params = model.params();
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);
    let mut best: Option<(f64, Vec<f64>)> = None;

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for &i in &order {
            let example = &train_set.examples[i];
            let (loss, grad, _) = model.loss_and_gradient(&example.graph, example.label)?;
            if !loss.is_finite() {
                return Err(Error::domain(format!("loss became {loss} in epoch {epoch}")));
            }
            total += loss;
            adam.step(&mut params, &grad)?;
            model.set_params(&params)?;
        }
        let valid_accuracy = match valid {
            Some(v) => Some(evaluate(model, v)?.accuracy()),
            None => None,
        };
        if let Some(acc) = valid_accuracy {
            if best.as_ref().is_none_or(|(b, _)| acc > *b) {
                best = Some((acc, params.clone()));
            }
        }
        let record = EpochRecord {
            epoch,
            loss: total / train_set.len() as f64,
            valid_accuracy,
        };
        on_epoch(&record);
        history.push(record);
    }
    if let Some((_, p)) = best {
        model.set_params(&p)?;
    }
    Ok(history)
}
