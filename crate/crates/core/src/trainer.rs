//! Mini-batch training with Adam and validation-loss early stopping.

use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use rand::seq::SliceRandom;
use serde::Serialize;
use thiserror::Error;

use crate::corpus::{EmbeddingTable, LabeledInstance};
use crate::evaluator::{evaluate, EvalError, MfsBaseline};
use crate::lexicon::SenseInventory;
use crate::model::{ModelConfig, ModelError, ModelParams, Mode};
use crate::numerics::{adam_update, derive_seed_n, rng_from_seed, AdamConfig, GradStore, ParamStore};
use crate::parallel::Workers;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("training corpus has no polysemous instances")]
    EmptyTrain,
    #[error("development corpus is empty")]
    EmptyDev,
    #[error("non-finite loss or gradient at instance {instance_id} (epoch {epoch})")]
    NonFinite { instance_id: String, epoch: usize },
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("instance {instance_id}: {source}")]
    Model { instance_id: String, source: ModelError },
    #[error(transparent)]
    Setup(#[from] ModelError),
    #[error("development evaluation failed: {0}")]
    Eval(Box<EvalError>),
    #[error("cannot write training log: {0}")]
    Log(std::io::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrainConfig {
    pub lr: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub shuffle: bool,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let adam = AdamConfig::default();
        TrainConfig {
            lr: adam.lr,
            max_epochs: 100,
            patience: 10,
            batch_size: 32,
            seed: 42,
            shuffle: true,
            beta1: adam.beta1,
            beta2: adam.beta2,
            eps: adam.eps,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.batch_size == 0 {
            return Err(TrainError::Config("batch size must be at least 1".into()));
        }
        if self.max_epochs == 0 {
            return Err(TrainError::Config("max epochs must be at least 1".into()));
        }
        if self.patience > self.max_epochs {
            return Err(TrainError::Config("patience cannot exceed max epochs".into()));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(TrainError::Config("learning rate must be positive".into()));
        }
        Ok(())
    }

    fn adam(&self) -> AdamConfig {
        AdamConfig { lr: self.lr, beta1: self.beta1, beta2: self.beta2, eps: self.eps }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub dev_loss: f64,
    pub dev_acc: f64,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrainReport {
    pub epochs: Vec<EpochRecord>,
    /// 1-based epoch whose weights were returned.
    pub best_epoch: usize,
    pub stopped_early: bool,
}

/// Tracks the best validation loss and signals when `patience` epochs have
/// passed without a new minimum.
#[derive(Clone, Debug)]
pub struct EarlyStopping {
    patience: usize,
    best_loss: f64,
    best_epoch: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        EarlyStopping { patience, best_loss: f64::INFINITY, best_epoch: 0 }
    }

    /// Records the loss of `epoch` (1-based). Returns `(improved, stop)`.
    pub fn observe(&mut self, epoch: usize, loss: f64) -> (bool, bool) {
        let improved = loss < self.best_loss;
        if improved {
            self.best_loss = loss;
            self.best_epoch = epoch;
        }
        (improved, epoch - self.best_epoch >= self.patience)
    }

    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }
}

/// Adds a word expert for every polysemous training target, in order of
/// first appearance.
pub fn add_word_experts(params: &mut ModelParams, train: &[LabeledInstance], inv: &SenseInventory) -> Result<(), ModelError> {
    for inst in train {
        let key = inst.key();
        let n = inv.senses_of_key(&key).len();
        if n > 1 {
            params.ensure_expert(&key, n)?;
        }
    }
    Ok(())
}

/// Mean dev loss over instances the model can score with a gold label.
pub fn dev_loss(params: &ModelParams, inv: &SenseInventory, dev: &[LabeledInstance], workers: &Workers) -> Result<f64, TrainError> {
    let losses = workers.map(dev, |_, inst| {
        if inst.gold_sense.is_none() || params.expert(&inst.key()).is_none() {
            return Ok(None);
        }
        params
            .instance_loss(inv, inst, Mode::Eval)
            .map(Some)
            .map_err(|source| TrainError::Model { instance_id: inst.instance_id.clone(), source })
    });
    let mut sum = 0.0;
    let mut n = 0usize;
    for (inst, l) in dev.iter().zip(losses) {
        if let Some(l) = l? {
            if !l.is_finite() {
                return Err(TrainError::NonFinite { instance_id: inst.instance_id.clone(), epoch: 0 });
            }
            sum += l;
            n += 1;
        }
    }
    Ok(if n == 0 { 0.0 } else { sum / n as f64 })
}

fn log_line(log: &mut Option<&mut dyn Write>, value: serde_json::Value) -> Result<(), TrainError> {
    if let Some(w) = log {
        writeln!(w, "{value}").map_err(TrainError::Log)?;
    }
    Ok(())
}

fn apply_batch(store: &mut ParamStore, grads: &GradStore, adam: &AdamConfig) -> Result<(), ModelError> {
    for idx in grads.touched() {
        let g = grads.slot(idx).expect("touched slot");
        let group = store.get_mut(idx);
        let t = group.steps + 1;
        adam_update(group, g, adam, t)?;
    }
    Ok(())
}

/// Trains a fresh model and returns the weights from the epoch with the
/// lowest validation loss.
///
/// When `log` is given, the effective configuration is written as the
/// first JSON line, followed by one line per epoch.
#[allow(clippy::too_many_arguments)]
pub fn train(
    model_cfg: ModelConfig,
    train_set: &[LabeledInstance],
    dev: &[LabeledInstance],
    inv: &SenseInventory,
    embeddings: Arc<EmbeddingTable>,
    cfg: &TrainConfig,
    workers: &Workers,
    mut log: Option<&mut dyn Write>,
) -> Result<(ModelParams, TrainReport), TrainError> {
    cfg.validate()?;
    if dev.is_empty() {
        return Err(TrainError::EmptyDev);
    }
    let active: Vec<usize> = (0..train_set.len()).filter(|&i| !train_set[i].monosemous).collect();
    if active.is_empty() {
        return Err(TrainError::EmptyTrain);
    }
    let mut params = ModelParams::init(model_cfg, embeddings)?;
    add_word_experts(&mut params, train_set, inv)?;
    let mfs = MfsBaseline::fit(train_set, inv);
    let adam = cfg.adam();

    let model_pairs: serde_json::Map<String, serde_json::Value> =
        params.config.to_pairs().into_iter().map(|(k, v)| (k.to_string(), v.into())).collect();
    log_line(&mut log, serde_json::json!({ "model": model_pairs, "train": cfg, "workers": workers.count() }))?;

    let mut stopper = EarlyStopping::new(cfg.patience);
    let mut best = params.store.clone();
    let mut epochs = Vec::new();
    let mut stopped_early = false;
    let mut order = active;
    for epoch in 1..=cfg.max_epochs {
        let started = Instant::now();
        if cfg.shuffle {
            order.sort_unstable();
            order.shuffle(&mut rng_from_seed(derive_seed_n(cfg.seed, "shuffle", epoch as u64)));
        }
        let mut total = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let results = workers.map(batch, |_, &i| {
                let inst = &train_set[i];
                let seed = derive_seed_n(derive_seed_n(cfg.seed, "dropout", epoch as u64), "instance", i as u64);
                params
                    .loss_and_gradient(inv, inst, Mode::Train { seed })
                    .map_err(|source| TrainError::Model { instance_id: inst.instance_id.clone(), source })
            });
            let mut grads = GradStore::for_store(&params.store);
            for (&i, r) in batch.iter().zip(results) {
                let (loss, g) = r?;
                if !loss.is_finite() || !g.is_finite() {
                    return Err(TrainError::NonFinite { instance_id: train_set[i].instance_id.clone(), epoch });
                }
                total += loss;
                grads.accumulate(&g);
            }
            grads.scale(1.0 / batch.len() as f64);
            apply_batch(&mut params.store, &grads, &adam)?;
        }
        let train_loss = total / order.len() as f64;
        let dl = dev_loss(&params, inv, dev, workers)?;
        let acc = evaluate(&params, inv, dev, Some(&mfs), workers).map_err(|e| TrainError::Eval(Box::new(e)))?.f1;
        let record = EpochRecord { epoch, train_loss, dev_loss: dl, dev_acc: acc, seconds: started.elapsed().as_secs_f64() };
        log_line(&mut log, serde_json::to_value(&record).expect("serializable record"))?;
        epochs.push(record);
        let (improved, stop) = stopper.observe(epoch, dl);
        if improved {
            best = params.store.clone();
        }
        if stop {
            stopped_early = epoch < cfg.max_epochs;
            break;
        }
    }
    params.store = best;
    Ok((params, TrainReport { epochs, best_epoch: stopper.best_epoch(), stopped_early }))
}
