//! Conversion from the WordNet database files (`data.noun`, `index.noun`,
//! ...) to the inventory TSV format.
//!
//! Each (word, synset) pair becomes one sense whose id is a sense key
//! `lemma%T:FF:II::`. Hypernym and hyponym pointers (including instance
//! pointers) link to the first word of the target synset. When `index.*`
//! files are present they fix the sense rank order; otherwise senses keep
//! data-file order. Satellite adjectives get no head-word suffix.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use thiserror::Error;

use crate::lexicon::{LexiconError, Pos, SenseId, SenseInventory, SenseRecord};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{file}:{line}: {message}")]
    Parse { file: String, line: usize, message: String },
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("no data.* files found in {0}")]
    Empty(String),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
}

const FILES: [(&str, Pos); 4] = [("noun", Pos::Noun), ("verb", Pos::Verb), ("adj", Pos::Adj), ("adv", Pos::Adv)];

#[derive(Clone, Debug, PartialEq)]
pub struct Synset {
    pub offset: u64,
    pub pos: Pos,
    /// WordNet synset type digit: 1 n, 2 v, 3 a, 4 r, 5 s.
    pub ss_type: u8,
    pub lex_filenum: u32,
    /// `(lemma, lex_id)` in synset order.
    pub words: Vec<(String, u32)>,
    pub hypernyms: Vec<(Pos, u64)>,
    pub hyponyms: Vec<(Pos, u64)>,
    pub gloss: Vec<String>,
}

fn pos_of(c: &str) -> Option<(Pos, u8)> {
    match c {
        "n" => Some((Pos::Noun, 1)),
        "v" => Some((Pos::Verb, 2)),
        "a" => Some((Pos::Adj, 3)),
        "r" => Some((Pos::Adv, 4)),
        "s" => Some((Pos::Adj, 5)),
        _ => None,
    }
}

fn clean_lemma(word: &str) -> String {
    let w = match word.find('(') {
        Some(i) if word.ends_with(')') => &word[..i],
        _ => word,
    };
    w.to_lowercase()
}

/// Definition part of a WordNet gloss, lowercased, punctuation stripped.
pub fn tokenize_gloss(gloss: &str) -> Vec<String> {
    let definition = gloss.split("; \"").next().unwrap_or("");
    definition
        .split_whitespace()
        .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
        .filter(|t| !t.is_empty())
        .collect()
}

pub fn parse_data_file(text: &str, file: &str) -> Result<Vec<Synset>, IngestError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.starts_with(' ') || line.trim().is_empty() {
            continue;
        }
        let err = |message: String| IngestError::Parse { file: file.to_string(), line: i + 1, message };
        let (fields, gloss) = match line.split_once(" | ") {
            Some((f, g)) => (f, g),
            None => (line.trim_end_matches(" |"), ""),
        };
        let f: Vec<&str> = fields.split_whitespace().collect();
        let mut at = 0;
        let mut next = |what: &str| -> Result<&str, IngestError> {
            let v = f.get(at).copied().ok_or_else(|| err(format!("missing {what}")))?;
            at += 1;
            Ok(v)
        };
        let offset: u64 = next("offset")?.parse().map_err(|_| err("invalid synset offset".into()))?;
        let lex_filenum: u32 = next("lex_filenum")?.parse().map_err(|_| err("invalid lex_filenum".into()))?;
        let (pos, ss_type) = pos_of(next("ss_type")?).ok_or_else(|| err("invalid ss_type".into()))?;
        let w_cnt = usize::from_str_radix(next("w_cnt")?, 16).map_err(|_| err("invalid w_cnt".into()))?;
        let mut words = Vec::with_capacity(w_cnt);
        for _ in 0..w_cnt {
            let w = clean_lemma(next("word")?);
            let lex_id = u32::from_str_radix(next("lex_id")?, 16).map_err(|_| err("invalid lex_id".into()))?;
            words.push((w, lex_id));
        }
        let p_cnt: usize = next("p_cnt")?.parse().map_err(|_| err("invalid p_cnt".into()))?;
        let mut hypernyms = Vec::new();
        let mut hyponyms = Vec::new();
        for _ in 0..p_cnt {
            let symbol = next("pointer symbol")?;
            let target: u64 = next("pointer offset")?.parse().map_err(|_| err("invalid pointer offset".into()))?;
            let (tpos, _) = pos_of(next("pointer pos")?).ok_or_else(|| err("invalid pointer pos".into()))?;
            next("source/target")?;
            match symbol {
                "@" | "@i" => hypernyms.push((tpos, target)),
                "~" | "~i" => hyponyms.push((tpos, target)),
                _ => {}
            }
        }
        out.push(Synset { offset, pos, ss_type, lex_filenum, words, hypernyms, hyponyms, gloss: tokenize_gloss(gloss) });
    }
    Ok(out)
}

/// `(lemma, synset offsets in sense-number order)` per index line.
pub fn parse_index_file(text: &str, file: &str) -> Result<Vec<(String, Vec<u64>)>, IngestError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.starts_with(' ') || line.trim().is_empty() {
            continue;
        }
        let err = |message: &str| IngestError::Parse { file: file.to_string(), line: i + 1, message: message.to_string() };
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() < 4 {
            return Err(err("truncated index line"));
        }
        let synset_cnt: usize = f[2].parse().map_err(|_| err("invalid synset_cnt"))?;
        let p_cnt: usize = f[3].parse().map_err(|_| err("invalid p_cnt"))?;
        let start = 4 + p_cnt + 2;
        let offsets = f
            .get(start..start + synset_cnt)
            .ok_or_else(|| err("truncated offset list"))?
            .iter()
            .map(|o| o.parse::<u64>().map_err(|_| err("invalid offset")))
            .collect::<Result<Vec<_>, _>>()?;
        out.push((f[0].to_lowercase(), offsets));
    }
    Ok(out)
}

fn sense_key(lemma: &str, s: &Synset, lex_id: u32) -> String {
    format!("{lemma}%{}:{:02}:{:02}::", s.ss_type, s.lex_filenum, lex_id)
}

/// Builds an inventory from parsed synsets and optional index orderings.
pub fn build_inventory(synsets: &[Synset], index: &[(Pos, String, Vec<u64>)]) -> Result<SenseInventory, IngestError> {
    let by_key: HashMap<(Pos, u64), &Synset> = synsets.iter().map(|s| ((s.pos, s.offset), s)).collect();
    let head = |pos: Pos, off: u64| -> Option<SenseId> {
        let s = by_key.get(&(pos, off))?;
        let (w, id) = s.words.first()?;
        SenseId::new(sense_key(w, s, *id)).ok()
    };
    let make = |s: &Synset, lemma: &str, lex_id: u32| -> Result<SenseRecord, IngestError> {
        let id = SenseId::new(sense_key(lemma, s, lex_id)).map_err(|m| IngestError::Parse {
            file: "<synset>".into(),
            line: 0,
            message: m,
        })?;
        let link = |v: &[(Pos, u64)]| -> Vec<SenseId> {
            let mut seen = HashSet::new();
            v.iter().filter_map(|&(p, o)| head(p, o)).filter(|h| *h != id && seen.insert(h.clone())).collect()
        };
        let gloss = if s.gloss.is_empty() { vec![lemma.to_string()] } else { s.gloss.clone() };
        Ok(SenseRecord {
            hypernyms: link(&s.hypernyms),
            hyponyms: link(&s.hyponyms),
            sense_id: id,
            lemma: lemma.to_string(),
            pos: s.pos,
            gloss,
        })
    };
    let mut records = Vec::new();
    let mut emitted: HashSet<(Pos, u64, String)> = HashSet::new();
    for (pos, lemma, offsets) in index {
        for &off in offsets {
            let Some(s) = by_key.get(&(*pos, off)) else { continue };
            let Some((_, lex_id)) = s.words.iter().find(|(w, _)| w == lemma) else { continue };
            if emitted.insert((*pos, off, lemma.clone())) {
                records.push(make(s, lemma, *lex_id)?);
            }
        }
    }
    for s in synsets {
        for (w, lex_id) in &s.words {
            if emitted.insert((s.pos, s.offset, w.clone())) {
                records.push(make(s, w, *lex_id)?);
            }
        }
    }
    Ok(SenseInventory::from_records(records)?)
}

/// Reads `data.{noun,verb,adj,adv}` (and `index.*` when present) from `dir`.
pub fn ingest_wordnet_dir(dir: impl AsRef<Path>) -> Result<SenseInventory, IngestError> {
    let dir = dir.as_ref();
    let read = |p: &Path| {
        std::fs::read_to_string(p).map_err(|source| IngestError::Io { path: p.display().to_string(), source })
    };
    let mut synsets = Vec::new();
    let mut index = Vec::new();
    for (suffix, pos) in FILES {
        let data = dir.join(format!("data.{suffix}"));
        if data.exists() {
            synsets.extend(parse_data_file(&read(&data)?, &data.display().to_string())?);
        }
        let idx = dir.join(format!("index.{suffix}"));
        if idx.exists() {
            for (lemma, offs) in parse_index_file(&read(&idx)?, &idx.display().to_string())? {
                index.push((pos, lemma, offs));
            }
        }
    }
    if synsets.is_empty() {
        return Err(IngestError::Empty(dir.display().to_string()));
    }
    build_inventory(&synsets, &index)
}
