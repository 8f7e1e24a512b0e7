//! The disambiguation network: context and gloss encoders, relation fusion,
//! multi-pass memory, and the mixed word-expert/gloss scorer.

mod checkpoint;
mod config;
mod network;
mod params;

use thiserror::Error;

pub use checkpoint::{load_checkpoint, parse_checkpoint, save_checkpoint, write_checkpoint, CHECKPOINT_VERSION};
pub use config::{ModelConfig, UpdateRule};
pub use network::{fusion_sequences, memory_pass, MemoryState, Mode, PredictionDistribution};
pub use params::{expert_names, BiLstmSlots, ExpertSlots, Layout, LstmSlots, MemorySlots, ModelParams, UNIFORM_INIT};

use crate::corpus::LabeledInstance;
use crate::lexicon::{LexiconError, SenseInventory, WordKey};
use crate::numerics::{grad_check, GradCheckReport, GradStore, NumericsError, ParamStore, DEFAULT_STEP};
use crate::parallel::Workers;
use network::Net;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("no word expert for {0}; the word was not seen in training")]
    UnseenTarget(WordKey),
    #[error("no candidate senses for {0}")]
    NoCandidates(String),
    #[error("instance {0} has no gold sense")]
    MissingGold(String),
    #[error("instance {0}: gold sense {1} is not a candidate")]
    GoldNotCandidate(String, String),
    #[error("empty gloss")]
    EmptyGloss,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid model configuration: {0}")]
    Config(String),
    #[error("checkpoint line {line}: {message}")]
    Checkpoint { line: usize, message: String },
    #[error("unsupported checkpoint format version {0}")]
    UnsupportedVersion(String),
    #[error("cannot access {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
}

impl ModelParams {
    fn net(&self) -> Net<'_> {
        Net { params: self, store: &self.store }
    }

    /// Probability distribution over the target's candidate senses, with
    /// the per-pass memory trace.
    pub fn score(&self, inv: &SenseInventory, inst: &LabeledInstance, mode: Mode) -> Result<PredictionDistribution, ModelError> {
        network::score_with(self.net(), inv, inst, mode)
    }

    /// Cross-entropy of the gold sense.
    pub fn instance_loss(&self, inv: &SenseInventory, inst: &LabeledInstance, mode: Mode) -> Result<f64, ModelError> {
        network::loss_with(self.net(), inv, inst, mode)
    }

    /// Loss under an alternative weight store with the same layout. Used by
    /// the finite-difference checker.
    pub fn loss_with_store(
        &self,
        store: &ParamStore,
        inv: &SenseInventory,
        inst: &LabeledInstance,
        mode: Mode,
    ) -> Result<f64, ModelError> {
        network::loss_with(Net { params: self, store }, inv, inst, mode)
    }

    pub fn loss_and_gradient(
        &self,
        inv: &SenseInventory,
        inst: &LabeledInstance,
        mode: Mode,
    ) -> Result<(f64, GradStore), ModelError> {
        network::loss_and_grad_with(self.net(), inv, inst, mode)
    }

    /// Mean loss over `instances` and its gradient.
    pub fn batch_loss_and_gradient(
        &self,
        inv: &SenseInventory,
        instances: &[LabeledInstance],
        mode: Mode,
    ) -> Result<(f64, GradStore), ModelError> {
        let mut total = 0.0;
        let mut grads = GradStore::for_store(&self.store);
        for inst in instances {
            let (l, g) = self.loss_and_gradient(inv, inst, mode)?;
            total += l;
            grads.accumulate(&g);
        }
        let scale = 1.0 / instances.len().max(1) as f64;
        grads.scale(scale);
        Ok((total * scale, grads))
    }

    /// Central-difference check of the mean-loss gradient over `instances`
    /// for every trainable group.
    pub fn check_gradients(
        &self,
        inv: &SenseInventory,
        instances: &[LabeledInstance],
        mode: Mode,
        workers: &Workers,
    ) -> Result<GradCheckReport, ModelError> {
        let (_, grads) = self.batch_loss_and_gradient(inv, instances, mode)?;
        // Instances were already scored once above, so loss errors cannot
        // occur for perturbed copies with the same layout.
        let loss = |s: &ParamStore| {
            let sum: f64 = instances
                .iter()
                .map(|inst| self.loss_with_store(s, inv, inst, mode).unwrap_or(f64::NAN))
                .sum();
            sum / instances.len().max(1) as f64
        };
        Ok(grad_check(loss, &self.store, &grads, DEFAULT_STEP, workers)?)
    }

    /// `[forward final state over the left context ; backward final state
    /// over the right context]`, target excluded.
    pub fn encode_context(&self, inst: &LabeledInstance) -> Result<Vec<f64>, ModelError> {
        network::context_vector(self.net(), inst)
    }

    /// Bidirectional encoding of a gloss, truncated to the configured length.
    pub fn encode_gloss(&self, tokens: &[String]) -> Result<Vec<f64>, ModelError> {
        network::gloss_vector(self.net(), tokens)
    }

    /// Fuses gloss vectors along both relation directions. `hyper` and
    /// `hypo` are nearest-first, as produced by gloss expansion.
    pub fn fuse_relations(&self, hyper: &[Vec<f64>], original: &[f64], hypo: &[Vec<f64>]) -> Result<Vec<f64>, ModelError> {
        network::fuse_with(self.net(), hyper, original, hypo)
    }

    /// One application of the configured memory update rule.
    pub fn update_memory(&self, memory: &[f64], summary: &[f64], context: &[f64]) -> Result<Vec<f64>, ModelError> {
        network::update_with(self.net(), memory, summary, context)
    }
}
