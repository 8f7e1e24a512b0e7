use std::collections::BTreeMap;
use std::sync::Arc;

use super::config::{ModelConfig, UpdateRule};
use super::ModelError;
use crate::corpus::EmbeddingTable;
use crate::lexicon::{Pos, WordKey};
use crate::numerics::{
    derive_seed, init_uniform, LstmCell, LstmCellParams, NumericsError, ParamGroup, ParamStore, Tensor,
};

/// Range of the uniform initializer used for every non-LSTM weight.
pub const UNIFORM_INIT: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LstmSlots {
    pub w_ih: usize,
    pub w_hh: usize,
    pub bias: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BiLstmSlots {
    pub fwd: LstmSlots,
    pub bwd: LstmSlots,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MemorySlots {
    Linear { h: usize },
    Concatenation { w: usize, b: usize },
}

/// Per-word classifier `W_x` (senses × 2n), bias, and mixing logit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExpertSlots {
    pub w: usize,
    pub b: usize,
    pub rho: usize,
    pub senses: usize,
}

/// Where each logical weight lives inside the [`ParamStore`].
#[derive(Clone, Debug, PartialEq)]
pub struct Layout {
    pub context: BiLstmSlots,
    pub gloss: BiLstmSlots,
    pub fusion: Option<BiLstmSlots>,
    pub memory: MemorySlots,
    pub experts: BTreeMap<WordKey, ExpertSlots>,
}

pub fn expert_names(key: &WordKey) -> [String; 3] {
    [
        format!("wordexpert/{}/{}/W", key.lemma, key.pos),
        format!("wordexpert/{}/{}/b", key.lemma, key.pos),
        format!("lambda/{}/{}", key.lemma, key.pos),
    ]
}

fn lstm_names(prefix: &str) -> [String; 3] {
    [format!("{prefix}/w_ih"), format!("{prefix}/w_hh"), format!("{prefix}/bias")]
}

fn push_lstm(store: &mut ParamStore, prefix: &str, input: usize, hidden: usize, seed: u64) -> Result<LstmSlots, NumericsError> {
    let cell = LstmCellParams::init(input, hidden, derive_seed(seed, prefix))?;
    let [a, b, c] = lstm_names(prefix);
    Ok(LstmSlots {
        w_ih: store.push(ParamGroup::new(a, cell.input_weights, true))?,
        w_hh: store.push(ParamGroup::new(b, cell.recurrent_weights, true))?,
        bias: store.push(ParamGroup::new(c, cell.bias, true))?,
    })
}

fn push_bilstm(store: &mut ParamStore, prefix: &str, input: usize, hidden: usize, seed: u64) -> Result<BiLstmSlots, NumericsError> {
    Ok(BiLstmSlots {
        fwd: push_lstm(store, &format!("{prefix}/fwd"), input, hidden, seed)?,
        bwd: push_lstm(store, &format!("{prefix}/bwd"), input, hidden, seed)?,
    })
}

fn push_uniform(store: &mut ParamStore, name: &str, shape: &[usize], seed: u64) -> Result<usize, NumericsError> {
    let t = init_uniform(shape, derive_seed(seed, name), -UNIFORM_INIT, UNIFORM_INIT)?;
    store.push(ParamGroup::new(name, t, true))
}

fn find_lstm(store: &ParamStore, prefix: &str) -> Result<LstmSlots, ModelError> {
    let [a, b, c] = lstm_names(prefix);
    let get = |n: &str| store.index_of(n).ok_or_else(|| ModelError::Config(format!("missing parameter group {n}")));
    Ok(LstmSlots { w_ih: get(&a)?, w_hh: get(&b)?, bias: get(&c)? })
}

fn find_bilstm(store: &ParamStore, prefix: &str) -> Result<BiLstmSlots, ModelError> {
    Ok(BiLstmSlots { fwd: find_lstm(store, &format!("{prefix}/fwd"))?, bwd: find_lstm(store, &format!("{prefix}/bwd"))? })
}

/// All trainable weights plus the frozen embedding table they read from.
#[derive(Clone, Debug)]
pub struct ModelParams {
    pub config: ModelConfig,
    pub store: ParamStore,
    pub layout: Layout,
    pub embeddings: Arc<EmbeddingTable>,
}

impl ModelParams {
    /// Fresh parameters: orthogonal LSTM weights, uniform elsewhere. Word
    /// experts are added separately with [`ModelParams::ensure_expert`].
    pub fn init(config: ModelConfig, embeddings: Arc<EmbeddingTable>) -> Result<Self, ModelError> {
        config.validate()?;
        let n = config.hidden_size;
        let d = embeddings.dim();
        let seed = config.seed;
        let mut store = ParamStore::new();
        let context = push_bilstm(&mut store, "context", d, n, seed)?;
        let gloss = push_bilstm(&mut store, "gloss", d, n, seed)?;
        let fusion = if config.extended { Some(push_bilstm(&mut store, "fusion", 2 * n, n, seed)?) } else { None };
        let memory = match config.update_rule {
            UpdateRule::Linear => MemorySlots::Linear { h: push_uniform(&mut store, "memory/H", &[2 * n, 2 * n], seed)? },
            UpdateRule::Concatenation => MemorySlots::Concatenation {
                w: push_uniform(&mut store, "memory/W", &[2 * n, 6 * n], seed)?,
                b: push_uniform(&mut store, "memory/b", &[2 * n], seed)?,
            },
        };
        let layout = Layout { context, gloss, fusion, memory, experts: BTreeMap::new() };
        Ok(ModelParams { config, store, layout, embeddings })
    }

    /// Adds a classifier sized for `senses` candidates if `key` has none.
    /// The mixing logit starts at 0 (λ = 0.5).
    pub fn ensure_expert(&mut self, key: &WordKey, senses: usize) -> Result<ExpertSlots, ModelError> {
        if let Some(slots) = self.layout.experts.get(key) {
            if slots.senses != senses {
                return Err(ModelError::Config(format!(
                    "word expert {key} has {} outputs but the inventory lists {senses} senses",
                    slots.senses
                )));
            }
            return Ok(*slots);
        }
        let two_n = 2 * self.config.hidden_size;
        let [wn, bn, rn] = expert_names(key);
        let seed = self.config.seed;
        let slots = ExpertSlots {
            w: push_uniform(&mut self.store, &wn, &[senses, two_n], seed)?,
            b: push_uniform(&mut self.store, &bn, &[senses], seed)?,
            rho: self.store.push(ParamGroup::new(rn, Tensor::scalar(0.0)?, true))?,
            senses,
        };
        self.layout.experts.insert(key.clone(), slots);
        Ok(slots)
    }

    /// Recovers the layout from group names, checking shapes against
    /// `config` and the embedding dimension.
    pub fn from_store(config: ModelConfig, store: ParamStore, embeddings: Arc<EmbeddingTable>) -> Result<Self, ModelError> {
        config.validate()?;
        let n = config.hidden_size;
        let d = embeddings.dim();
        let context = find_bilstm(&store, "context")?;
        let gloss = find_bilstm(&store, "gloss")?;
        let fusion = if config.extended { Some(find_bilstm(&store, "fusion")?) } else { None };
        let memory = match (config.update_rule, store.index_of("memory/H"), store.index_of("memory/W"), store.index_of("memory/b")) {
            (UpdateRule::Linear, Some(h), None, None) => MemorySlots::Linear { h },
            (UpdateRule::Concatenation, None, Some(w), Some(b)) => MemorySlots::Concatenation { w, b },
            _ => {
                return Err(ModelError::Config(format!(
                    "memory weights do not match the {} update rule",
                    config.update_rule
                )))
            }
        };
        let mut experts = BTreeMap::new();
        for (i, g) in store.groups().iter().enumerate() {
            let Some(rest) = g.name.strip_prefix("wordexpert/").and_then(|r| r.strip_suffix("/W")) else {
                continue;
            };
            let (lemma, pos) = rest
                .rsplit_once('/')
                .ok_or_else(|| ModelError::Config(format!("malformed expert name {}", g.name)))?;
            let pos: Pos = pos.parse().map_err(ModelError::Config)?;
            let key = WordKey::new(lemma, pos);
            let [_, bn, rn] = expert_names(&key);
            let b = store.index_of(&bn).ok_or_else(|| ModelError::Config(format!("missing {bn}")))?;
            let rho = store.index_of(&rn).ok_or_else(|| ModelError::Config(format!("missing {rn}")))?;
            let senses = g.tensor.rows();
            if store.tensor(b).len() != senses || store.tensor(rho).len() != 1 || g.tensor.cols() != 2 * n {
                return Err(ModelError::Config(format!("inconsistent shapes for word expert {key}")));
            }
            experts.insert(key, ExpertSlots { w: i, b, rho, senses });
        }
        let layout = Layout { context, gloss, fusion, memory, experts };
        let params = ModelParams { config, store, layout, embeddings };
        params.check_shapes(d)?;
        Ok(params)
    }

    fn check_shapes(&self, d: usize) -> Result<(), ModelError> {
        let n = self.config.hidden_size;
        let check_bi = |bi: &BiLstmSlots, input: usize, what: &str| -> Result<(), ModelError> {
            for s in [bi.fwd, bi.bwd] {
                let cell = self.cell_from(&self.store, s)?;
                if cell.hidden_size() != n || cell.input_size() != input {
                    return Err(ModelError::Config(format!("{what} LSTM has the wrong shape")));
                }
            }
            Ok(())
        };
        check_bi(&self.layout.context, d, "context")?;
        check_bi(&self.layout.gloss, d, "gloss")?;
        if let Some(f) = &self.layout.fusion {
            check_bi(f, 2 * n, "fusion")?;
        }
        let ok = match self.layout.memory {
            MemorySlots::Linear { h } => self.store.tensor(h).shape() == [2 * n, 2 * n],
            MemorySlots::Concatenation { w, b } => {
                self.store.tensor(w).shape() == [2 * n, 6 * n] && self.store.tensor(b).shape() == [2 * n]
            }
        };
        if !ok {
            return Err(ModelError::Config("memory update weights have the wrong shape".into()));
        }
        Ok(())
    }

    pub(crate) fn cell_from<'s>(&self, store: &'s ParamStore, s: LstmSlots) -> Result<LstmCell<'s>, ModelError> {
        Ok(LstmCell::new(store.tensor(s.w_ih), store.tensor(s.w_hh), store.tensor(s.bias))?)
    }

    pub fn expert(&self, key: &WordKey) -> Option<ExpertSlots> {
        self.layout.experts.get(key).copied()
    }

    /// Mixing weight λ = sigmoid(ρ) for a word, if it has an expert.
    pub fn lambda(&self, key: &WordKey) -> Option<f64> {
        self.expert(key).map(|e| crate::numerics::sigmoid(self.store.tensor(e.rho).data()[0]))
    }

    /// Group indices of the context, gloss, fusion and memory weights.
    pub fn shared_groups(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut bi = |b: &BiLstmSlots| {
            for s in [b.fwd, b.bwd] {
                out.extend([s.w_ih, s.w_hh, s.bias]);
            }
        };
        bi(&self.layout.context);
        bi(&self.layout.gloss);
        if let Some(f) = &self.layout.fusion {
            bi(f);
        }
        match self.layout.memory {
            MemorySlots::Linear { h } => out.push(h),
            MemorySlots::Concatenation { w, b } => out.extend([w, b]),
        }
        out
    }

    /// Group indices belonging to the gloss encoder and fusion layer.
    pub fn gloss_groups(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for b in std::iter::once(&self.layout.gloss).chain(self.layout.fusion.as_ref()) {
            for s in [b.fwd, b.bwd] {
                out.extend([s.w_ih, s.w_hh, s.bias]);
            }
        }
        out
    }
}
