//! Labeled instances and frozen word embeddings.
//!
//! Corpus lines carry six tab-separated columns:
//!
//! ```text
//! instance_id <TAB> target_index <TAB> gold_sense_or_dash <TAB> lemma <TAB> pos <TAB> tokens
//! ```
//!
//! Embedding files hold `word v1 v2 ... vD` per line.

use std::collections::HashMap;
use std::path::Path;

use rand::Rng;
use thiserror::Error;

use crate::lexicon::{Pos, SenseId, SenseInventory, WordKey};
use crate::numerics::rng_from_seed;

/// Seed for the shared out-of-vocabulary vector.
pub const UNK_SEED: u64 = 0x005e_ed0f_0000_0001;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{source_name}:{line}: {message}")]
    Parse { source_name: String, line: usize, message: String },
    #[error("{source_name}:{line}: instance {instance_id}: {message}")]
    Validation { source_name: String, line: usize, instance_id: String, message: String },
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledInstance {
    pub instance_id: String,
    pub tokens: Vec<String>,
    pub target_index: usize,
    pub target_lemma: String,
    pub target_pos: Pos,
    pub gold_sense: Option<SenseId>,
    /// The target has exactly one candidate sense.
    pub monosemous: bool,
}

impl LabeledInstance {
    pub fn key(&self) -> WordKey {
        WordKey::new(&self.target_lemma, self.target_pos)
    }

    pub fn target_token(&self) -> &str {
        &self.tokens[self.target_index]
    }

    /// Tokens left and right of the target, excluding the target itself.
    pub fn context_halves(&self) -> (&[String], &[String]) {
        (&self.tokens[..self.target_index], &self.tokens[self.target_index + 1..])
    }

    fn to_tsv_line(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}",
            self.instance_id,
            self.target_index,
            self.gold_sense.as_ref().map_or("-", SenseId::as_str),
            self.target_lemma,
            self.target_pos,
            self.tokens.join(" ")
        )
    }
}

/// Free-function form of [`LabeledInstance::context_halves`].
pub fn context_halves(inst: &LabeledInstance) -> (&[String], &[String]) {
    inst.context_halves()
}

pub fn load_corpus(path: impl AsRef<Path>, inv: &SenseInventory) -> Result<Vec<LabeledInstance>, CorpusError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| CorpusError::Io { path: path.display().to_string(), source })?;
    parse_corpus(&text, &path.display().to_string(), inv)
}

pub fn parse_corpus(text: &str, source_name: &str, inv: &SenseInventory) -> Result<Vec<LabeledInstance>, CorpusError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let raw = raw.trim_end_matches('\r');
        if raw.trim().is_empty() || raw.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| CorpusError::Parse { source_name: source_name.to_string(), line, message };
        let cols: Vec<&str> = raw.split('\t').collect();
        if cols.len() != 6 {
            return Err(parse_err(format!("expected 6 tab-separated columns, found {}", cols.len())));
        }
        let instance_id = cols[0].trim().to_string();
        if instance_id.is_empty() {
            return Err(parse_err("empty instance id".into()));
        }
        let target_index: usize = cols[1]
            .trim()
            .parse()
            .map_err(|_| parse_err(format!("invalid target index {:?}", cols[1])))?;
        let gold_sense = match cols[2].trim() {
            "-" => None,
            s => Some(SenseId::new(s).map_err(parse_err)?),
        };
        let target_lemma = cols[3].trim().to_lowercase();
        if target_lemma.is_empty() {
            return Err(parse_err("empty target lemma".into()));
        }
        let target_pos: Pos = cols[4].trim().parse().map_err(parse_err)?;
        let tokens: Vec<String> = cols[5].split_whitespace().map(str::to_lowercase).collect();
        if tokens.is_empty() {
            return Err(parse_err("empty token sequence".into()));
        }
        if target_index >= tokens.len() {
            return Err(parse_err(format!(
                "target index {} out of range for {} tokens",
                target_index,
                tokens.len()
            )));
        }
        let candidates = inv.senses_of(&target_lemma, target_pos);
        if let Some(gold) = &gold_sense {
            if !candidates.iter().any(|r| &r.sense_id == gold) {
                return Err(CorpusError::Validation {
                    source_name: source_name.to_string(),
                    line,
                    instance_id,
                    message: format!("gold sense {gold} is not a candidate of {target_lemma}/{target_pos}"),
                });
            }
        }
        out.push(LabeledInstance {
            instance_id,
            tokens,
            target_index,
            target_lemma,
            target_pos,
            gold_sense,
            monosemous: candidates.len() == 1,
        });
    }
    Ok(out)
}

pub fn corpus_to_tsv(instances: &[LabeledInstance]) -> String {
    let mut out = String::new();
    for inst in instances {
        out.push_str(&inst.to_tsv_line());
        out.push('\n');
    }
    out
}

/// Frozen embedding matrix with a shared out-of-vocabulary vector.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    vectors: Vec<f64>,
    unk: Vec<f64>,
}

impl EmbeddingTable {
    /// Builds a table from `(word, vector)` pairs; later duplicates of a
    /// word are ignored. The unknown-word vector is drawn from [`UNK_SEED`].
    pub fn from_entries(dim: usize, entries: impl IntoIterator<Item = (String, Vec<f64>)>) -> Result<Self, String> {
        let mut unk_rng = rng_from_seed(UNK_SEED);
        let unk = (0..dim).map(|_| unk_rng.random_range(-0.1..=0.1)).collect();
        let mut table = EmbeddingTable { dim, words: Vec::new(), index: HashMap::new(), vectors: Vec::new(), unk };
        for (word, vec) in entries {
            table.insert(word, &vec)?;
        }
        Ok(table)
    }

    /// Reassembles a table from its stored parts (checkpoint loading).
    pub fn from_parts(dim: usize, words: Vec<String>, vectors: Vec<f64>, unk: Vec<f64>) -> Result<Self, String> {
        if unk.len() != dim || vectors.len() != words.len() * dim {
            return Err("embedding parts have inconsistent sizes".into());
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(format!("duplicate embedding word {w:?}"));
            }
        }
        Ok(EmbeddingTable { dim, words, index, vectors, unk })
    }

    fn insert(&mut self, word: String, vec: &[f64]) -> Result<(), String> {
        if vec.len() != self.dim {
            return Err(format!("vector for {word:?} has {} components, expected {}", vec.len(), self.dim));
        }
        if vec.iter().any(|v| !v.is_finite()) {
            return Err(format!("non-finite component in vector for {word:?}"));
        }
        if self.index.contains_key(&word) {
            return Ok(());
        }
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.vectors.extend_from_slice(vec);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn vectors(&self) -> &[f64] {
        &self.vectors
    }

    pub fn unk(&self) -> &[f64] {
        &self.unk
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    /// Never fails: unknown words map to the shared unknown vector.
    pub fn lookup(&self, word: &str) -> &[f64] {
        match self.index.get(word) {
            Some(&i) => &self.vectors[i * self.dim..(i + 1) * self.dim],
            None => &self.unk,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, w) in self.words.iter().enumerate() {
            out.push_str(w);
            for v in &self.vectors[i * self.dim..(i + 1) * self.dim] {
                out.push(' ');
                out.push_str(&format!("{:.17e}", v));
            }
            out.push('\n');
        }
        out
    }
}

pub fn load_embeddings(path: impl AsRef<Path>, expected_dim: Option<usize>) -> Result<EmbeddingTable, CorpusError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| CorpusError::Io { path: path.display().to_string(), source })?;
    parse_embeddings(&text, &path.display().to_string(), expected_dim)
}

pub fn parse_embeddings(text: &str, source_name: &str, expected_dim: Option<usize>) -> Result<EmbeddingTable, CorpusError> {
    let mut dim = expected_dim;
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let parse_err = |message: String| CorpusError::Parse { source_name: source_name.to_string(), line, message };
        let mut parts = raw.split(' ').filter(|s| !s.is_empty());
        let Some(word) = parts.next() else { continue };
        let values: Vec<f64> = parts
            .map(|s| s.trim().parse::<f64>().map_err(|_| parse_err(format!("invalid number {s:?}"))))
            .collect::<Result<_, _>>()?;
        match dim {
            None => {
                if values.is_empty() {
                    return Err(parse_err(format!("no vector components for {word:?}")));
                }
                dim = Some(values.len());
            }
            Some(d) if d != values.len() => {
                return Err(parse_err(format!("expected {} components, found {}", d, values.len())));
            }
            Some(_) => {}
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(parse_err(format!("non-finite component for {word:?}")));
        }
        entries.push((word.to_lowercase(), values));
    }
    let dim = dim.ok_or_else(|| CorpusError::Parse {
        source_name: source_name.to_string(),
        line: 0,
        message: "empty embedding file".into(),
    })?;
    EmbeddingTable::from_entries(dim, entries).map_err(|message| CorpusError::Parse {
        source_name: source_name.to_string(),
        line: 0,
        message,
    })
}
