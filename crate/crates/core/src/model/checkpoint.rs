//! Plain-text checkpoints.
//!
//! ```text
//! gas-checkpoint 1
//! config <key> <value>          (one per config field)
//! vocab <count>
//! <word>                        (count lines)
//! param frozen 2 <count+1> <dim> embedding/table
//! <values, one matrix row per line, unknown-word row last>
//! param trainable <ndims> <dims...> <name>
//! <values>
//! ...
//! end
//! ```
//!
//! Values use 17 significant digits so a save/load cycle is bit-exact.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use super::config::ModelConfig;
use super::params::ModelParams;
use super::ModelError;
use crate::corpus::EmbeddingTable;
use crate::numerics::{ParamGroup, ParamStore, Tensor};

pub const CHECKPOINT_VERSION: &str = "1";
const MAGIC: &str = "gas-checkpoint";
const EMBEDDING_GROUP: &str = "embedding/table";

fn write_values(out: &mut String, shape: &[usize], data: &[f64]) {
    let row = if shape.len() >= 2 { shape[shape.len() - 1].max(1) } else { data.len().max(1) };
    for chunk in data.chunks(row) {
        let mut first = true;
        for v in chunk {
            if !first {
                out.push(' ');
            }
            first = false;
            let _ = write!(out, "{v:.16e}");
        }
        out.push('\n');
    }
}

fn write_param(out: &mut String, name: &str, trainable: bool, shape: &[usize], data: &[f64]) {
    let kind = if trainable { "trainable" } else { "frozen" };
    let dims: Vec<String> = shape.iter().map(usize::to_string).collect();
    let _ = writeln!(out, "param {kind} {} {} {name}", shape.len(), dims.join(" "));
    write_values(out, shape, data);
}

/// Serializes a model to the checkpoint text format.
pub fn write_checkpoint(params: &ModelParams) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC} {CHECKPOINT_VERSION}");
    for (k, v) in params.config.to_pairs() {
        let _ = writeln!(out, "config {k} {v}");
    }
    let emb = &params.embeddings;
    let _ = writeln!(out, "vocab {}", emb.len());
    for w in emb.words() {
        out.push_str(w);
        out.push('\n');
    }
    let mut table = emb.vectors().to_vec();
    table.extend_from_slice(emb.unk());
    write_param(&mut out, EMBEDDING_GROUP, false, &[emb.len() + 1, emb.dim()], &table);
    for g in params.store.groups() {
        write_param(&mut out, &g.name, g.trainable, g.tensor.shape(), g.tensor.data());
    }
    out.push_str("end\n");
    out
}

pub fn save_checkpoint(params: &ModelParams, path: impl AsRef<Path>) -> Result<(), ModelError> {
    let path = path.as_ref();
    std::fs::write(path, write_checkpoint(params))
        .map_err(|source| ModelError::Io { path: path.display().to_string(), source })
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<ModelParams, ModelError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| ModelError::Io { path: path.display().to_string(), source })?;
    parse_checkpoint(&text)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<&'a str, ModelError> {
        match self.inner.next() {
            Some((i, l)) => {
                self.line = i + 1;
                Ok(l.trim_end_matches('\r'))
            }
            None => Err(self.err("unexpected end of file")),
        }
    }

    fn err(&self, message: impl Into<String>) -> ModelError {
        ModelError::Checkpoint { line: self.line, message: message.into() }
    }
}

fn read_values(lines: &mut Lines<'_>, count: usize) -> Result<Vec<f64>, ModelError> {
    let mut values = Vec::with_capacity(count);
    while values.len() < count {
        let l = lines.next()?;
        if l.starts_with("param ") || l == "end" {
            return Err(lines.err(format!("expected {count} values, found {}", values.len())));
        }
        for tok in l.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| lines.err(format!("invalid number {tok:?}")))?;
            values.push(v);
        }
        if values.len() > count {
            return Err(lines.err(format!("expected {count} values, found more")));
        }
    }
    Ok(values)
}

pub fn parse_checkpoint(text: &str) -> Result<ModelParams, ModelError> {
    let mut lines = Lines { inner: text.lines().enumerate(), line: 0 };
    let header = lines.next()?;
    match header.split_once(' ') {
        Some((MAGIC, CHECKPOINT_VERSION)) => {}
        Some((MAGIC, other)) => return Err(ModelError::UnsupportedVersion(other.to_string())),
        _ => return Err(lines.err("not a checkpoint file")),
    }

    let mut config = ModelConfig::default();
    let mut line = lines.next()?;
    while let Some(rest) = line.strip_prefix("config ") {
        let (k, v) = rest.split_once(' ').ok_or_else(|| lines.err("config line needs a key and a value"))?;
        config.set_pair(k, v).map_err(|m| lines.err(m))?;
        line = lines.next()?;
    }

    let vocab: usize = line
        .strip_prefix("vocab ")
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| lines.err("expected vocab header"))?;
    let mut words = Vec::with_capacity(vocab);
    for _ in 0..vocab {
        let w = lines.next()?;
        if w.is_empty() || w.contains(char::is_whitespace) {
            return Err(lines.err(format!("invalid vocabulary word {w:?}")));
        }
        words.push(w.to_string());
    }

    let mut store = ParamStore::new();
    let mut embeddings = None;
    loop {
        let l = lines.next()?;
        if l == "end" {
            break;
        }
        let fields: Vec<&str> = l.split_whitespace().collect();
        if fields.len() < 4 || fields[0] != "param" {
            return Err(lines.err(format!("expected param header, found {l:?}")));
        }
        let trainable = match fields[1] {
            "trainable" => true,
            "frozen" => false,
            other => return Err(lines.err(format!("unknown parameter kind {other:?}"))),
        };
        let ndims: usize = fields[2].parse().map_err(|_| lines.err("invalid dimension count"))?;
        if fields.len() != 4 + ndims {
            return Err(lines.err("param header has the wrong number of fields"));
        }
        let shape: Vec<usize> = fields[3..3 + ndims]
            .iter()
            .map(|d| d.parse().map_err(|_| lines.err(format!("invalid dimension {d:?}"))))
            .collect::<Result<_, _>>()?;
        let name = fields[3 + ndims];
        let count = shape.iter().product();
        let values = read_values(&mut lines, count)?;
        if name == EMBEDDING_GROUP {
            if shape.len() != 2 || shape[0] != vocab + 1 {
                return Err(lines.err("embedding table does not match the vocabulary"));
            }
            let dim = shape[1];
            let unk = values[vocab * dim..].to_vec();
            let mut vectors = values;
            vectors.truncate(vocab * dim);
            embeddings =
                Some(EmbeddingTable::from_parts(dim, std::mem::take(&mut words), vectors, unk).map_err(|m| lines.err(m))?);
            continue;
        }
        let tensor = Tensor::new(shape, values).map_err(|e| lines.err(e.to_string()))?;
        store.push(ParamGroup::new(name, tensor, trainable)).map_err(|e| lines.err(e.to_string()))?;
    }
    let embeddings = embeddings.ok_or_else(|| lines.err("checkpoint has no embedding table"))?;
    ModelParams::from_store(config, store, Arc::new(embeddings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::{Pos, WordKey};
    use crate::model::UpdateRule;

    fn model(rule: UpdateRule) -> ModelParams {
        let emb = EmbeddingTable::from_entries(
            3,
            vec![("a".to_string(), vec![0.1, -0.2, 1.0 / 3.0]), ("b".to_string(), vec![1e-300, 2.5, -7.0])],
        )
        .unwrap();
        let cfg = ModelConfig { hidden_size: 2, update_rule: rule, ..Default::default() };
        let mut p = ModelParams::init(cfg, Arc::new(emb)).unwrap();
        p.ensure_expert(&WordKey::new("bed", Pos::Noun), 3).unwrap();
        p
    }

    #[test]
    fn round_trip_is_bit_exact() {
        for rule in [UpdateRule::Linear, UpdateRule::Concatenation] {
            let p = model(rule);
            let text = write_checkpoint(&p);
            let back = parse_checkpoint(&text).unwrap();
            assert!(back.store.bit_equal(&p.store));
            assert_eq!(back.config, p.config);
            assert_eq!(*back.embeddings, *p.embeddings);
            assert_eq!(back.layout, p.layout);
            assert_eq!(write_checkpoint(&back), text);
        }
    }

    #[test]
    fn rejects_other_versions() {
        let text = write_checkpoint(&model(UpdateRule::Linear)).replacen("gas-checkpoint 1", "gas-checkpoint 9", 1);
        assert!(matches!(parse_checkpoint(&text), Err(ModelError::UnsupportedVersion(v)) if v == "9"));
    }

    #[test]
    fn truncation_is_a_parse_error() {
        let text = write_checkpoint(&model(UpdateRule::Concatenation));
        let cut: String = text.lines().take(text.lines().count() / 2).map(|l| format!("{l}\n")).collect();
        assert!(matches!(parse_checkpoint(&cut), Err(ModelError::Checkpoint { .. })));
        let missing_end = text.trim_end().trim_end_matches("end");
        assert!(parse_checkpoint(missing_end).is_err());
    }
}
