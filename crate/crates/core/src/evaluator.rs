//! Scoring against gold labels, the most-frequent-sense baseline, backoff
//! for unseen targets, attention-trace export and the pass-count sweep.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::corpus::{EmbeddingTable, LabeledInstance};
use crate::lexicon::{Pos, SenseId, SenseInventory, WordKey};
use crate::model::{ModelConfig, ModelError, ModelParams, Mode};
use crate::parallel::Workers;
use crate::trainer::{train, TrainConfig, TrainError};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("instance {0}: target has no candidate senses")]
    Unanswerable(String),
    #[error("instance {0} has no gold sense")]
    MissingGold(String),
    #[error("instance {instance_id}: {source}")]
    Model { instance_id: String, source: ModelError },
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("trace line {line}: {message}")]
    TraceParse { line: usize, message: String },
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub attempted: usize,
    pub correct: usize,
    pub total_gold: usize,
}

impl Counts {
    pub fn precision(&self) -> f64 {
        ratio(self.correct, self.attempted)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.correct, self.total_gold)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p == r {
            p
        } else if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalReport {
    pub attempted: usize,
    pub correct: usize,
    pub total_gold: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub per_pos: BTreeMap<Pos, Counts>,
    /// Instances answered by the backoff policy.
    pub backoff_count: usize,
    /// Instances whose gold sense is not among the target's candidates.
    pub invalid_gold: Vec<String>,
}

impl EvalReport {
    fn from_counts(total: Counts, per_pos: BTreeMap<Pos, Counts>, backoff_count: usize, invalid_gold: Vec<String>) -> Self {
        EvalReport {
            attempted: total.attempted,
            correct: total.correct,
            total_gold: total.total_gold,
            precision: total.precision(),
            recall: total.recall(),
            f1: total.f1(),
            per_pos,
            backoff_count,
            invalid_gold,
        }
    }

    /// Flat `key value` lines.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "attempted {}", self.attempted);
        let _ = writeln!(out, "correct {}", self.correct);
        let _ = writeln!(out, "total_gold {}", self.total_gold);
        let _ = writeln!(out, "precision {:.6}", self.precision);
        let _ = writeln!(out, "recall {:.6}", self.recall);
        let _ = writeln!(out, "f1 {:.6}", self.f1);
        for pos in Pos::ALL {
            let c = self.per_pos.get(&pos).copied().unwrap_or_default();
            let _ = writeln!(out, "{}.total_gold {}", pos.name(), c.total_gold);
            let _ = writeln!(out, "{}.correct {}", pos.name(), c.correct);
            let _ = writeln!(out, "{}.f1 {:.6}", pos.name(), c.f1());
        }
        let _ = writeln!(out, "backoff_count {}", self.backoff_count);
        let _ = writeln!(out, "invalid_gold {}", self.invalid_gold.len());
        out
    }

    /// Single-line JSON summary.
    pub fn summary_line(&self) -> String {
        serde_json::json!({
            "attempted": self.attempted,
            "correct": self.correct,
            "total_gold": self.total_gold,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "backoff_count": self.backoff_count,
        })
        .to_string()
    }
}

/// One answer per instance.
#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub instance_id: String,
    pub sense_id: SenseId,
    /// Model probability of the chosen sense; `None` for backoff answers.
    pub prob: Option<f64>,
    pub backoff: bool,
}

/// Tallies predictions (aligned with `corpus`) against gold labels.
pub fn score_predictions(corpus: &[LabeledInstance], predictions: &[Prediction], inv: &SenseInventory) -> Result<EvalReport, EvalError> {
    if corpus.len() != predictions.len() {
        return Err(EvalError::Invalid(format!(
            "{} predictions for {} instances",
            predictions.len(),
            corpus.len()
        )));
    }
    let mut total = Counts::default();
    let mut per_pos: BTreeMap<Pos, Counts> = BTreeMap::new();
    let mut backoff = 0;
    let mut invalid = Vec::new();
    for (inst, pred) in corpus.iter().zip(predictions) {
        let gold = inst.gold_sense.as_ref().ok_or_else(|| EvalError::MissingGold(inst.instance_id.clone()))?;
        let valid = inv.senses_of_key(&inst.key()).iter().any(|r| &r.sense_id == gold);
        if !valid {
            invalid.push(inst.instance_id.clone());
        }
        let hit = valid && &pred.sense_id == gold;
        for c in [&mut total, per_pos.entry(inst.target_pos).or_default()] {
            c.attempted += 1;
            c.total_gold += 1;
            c.correct += usize::from(hit);
        }
        backoff += usize::from(pred.backoff);
    }
    Ok(EvalReport::from_counts(total, per_pos, backoff, invalid))
}

/// Most frequent training sense per (lemma, POS).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MfsBaseline {
    best: HashMap<WordKey, SenseId>,
}

impl MfsBaseline {
    /// Counts gold senses; ties go to the sense listed first in the
    /// inventory.
    pub fn fit(train: &[LabeledInstance], inv: &SenseInventory) -> Self {
        let mut counts: HashMap<WordKey, HashMap<&SenseId, usize>> = HashMap::new();
        for inst in train {
            if let Some(g) = &inst.gold_sense {
                *counts.entry(inst.key()).or_default().entry(g).or_default() += 1;
            }
        }
        let mut best = HashMap::new();
        for (key, c) in counts {
            let mut choice: Option<(&SenseId, usize)> = None;
            for rec in inv.senses_of_key(&key) {
                let n = c.get(&rec.sense_id).copied().unwrap_or(0);
                if n > 0 && choice.is_none_or(|(_, m)| n > m) {
                    choice = Some((&rec.sense_id, n));
                }
            }
            if let Some((s, _)) = choice {
                best.insert(key, s.clone());
            }
        }
        MfsBaseline { best }
    }

    pub fn covers(&self, key: &WordKey) -> bool {
        self.best.contains_key(key)
    }

    /// Training MFS, or the rank-1 inventory sense for unseen targets.
    pub fn predict(&self, key: &WordKey, inv: &SenseInventory) -> Option<SenseId> {
        self.best.get(key).cloned().or_else(|| inv.senses_of_key(key).first().map(|r| r.sense_id.clone()))
    }

    pub fn predict_all(&self, corpus: &[LabeledInstance], inv: &SenseInventory) -> Result<Vec<Prediction>, EvalError> {
        corpus
            .iter()
            .map(|inst| {
                let s = self.predict(&inst.key(), inv).ok_or_else(|| EvalError::Unanswerable(inst.instance_id.clone()))?;
                Ok(Prediction { instance_id: inst.instance_id.clone(), sense_id: s, prob: None, backoff: false })
            })
            .collect()
    }

    pub fn evaluate(&self, corpus: &[LabeledInstance], inv: &SenseInventory) -> Result<EvalReport, EvalError> {
        score_predictions(corpus, &self.predict_all(corpus, inv)?, inv)
    }
}

/// Answer for a target the model cannot score: the MFS answer when `mfs`
/// covers it, otherwise the rank-1 sense.
pub fn backoff_predict(inst: &LabeledInstance, inv: &SenseInventory, mfs: Option<&MfsBaseline>) -> Result<SenseId, EvalError> {
    let key = inst.key();
    if let Some(m) = mfs.filter(|m| m.covers(&key)) {
        if let Some(s) = m.predict(&key, inv) {
            return Ok(s);
        }
    }
    inv.senses_of_key(&key)
        .first()
        .map(|r| r.sense_id.clone())
        .ok_or_else(|| EvalError::Unanswerable(inst.instance_id.clone()))
}

pub fn predict_one(
    params: &ModelParams,
    inv: &SenseInventory,
    inst: &LabeledInstance,
    mfs: Option<&MfsBaseline>,
) -> Result<Prediction, EvalError> {
    match params.score(inv, inst, Mode::Eval) {
        Ok(d) => {
            let i = d.argmax();
            Ok(Prediction {
                instance_id: inst.instance_id.clone(),
                sense_id: d.sense_ids[i].clone(),
                prob: Some(d.probs[i]),
                backoff: false,
            })
        }
        Err(ModelError::UnseenTarget(_)) => Ok(Prediction {
            instance_id: inst.instance_id.clone(),
            sense_id: backoff_predict(inst, inv, mfs)?,
            prob: None,
            backoff: true,
        }),
        Err(ModelError::NoCandidates(_)) => Err(EvalError::Unanswerable(inst.instance_id.clone())),
        Err(source) => Err(EvalError::Model { instance_id: inst.instance_id.clone(), source }),
    }
}

/// Model predictions in corpus order, with backoff for unseen targets.
pub fn predict_all(
    params: &ModelParams,
    inv: &SenseInventory,
    corpus: &[LabeledInstance],
    mfs: Option<&MfsBaseline>,
    workers: &Workers,
) -> Result<Vec<Prediction>, EvalError> {
    workers.map(corpus, |_, inst| predict_one(params, inv, inst, mfs)).into_iter().collect()
}

pub fn evaluate(
    params: &ModelParams,
    inv: &SenseInventory,
    corpus: &[LabeledInstance],
    mfs: Option<&MfsBaseline>,
    workers: &Workers,
) -> Result<EvalReport, EvalError> {
    let preds = predict_all(params, inv, corpus, mfs, workers)?;
    score_predictions(corpus, &preds, inv)
}

/// Per-pass attention for one instance.
#[derive(Clone, Debug, PartialEq)]
pub struct AttentionTrace {
    pub instance_id: String,
    pub sense_ids: Vec<SenseId>,
    pub glosses: Vec<String>,
    /// One row per pass, one column per candidate sense.
    pub attention: Vec<Vec<f64>>,
    pub chosen: SenseId,
    pub gold: Option<SenseId>,
}

pub fn compute_traces(
    params: &ModelParams,
    inv: &SenseInventory,
    corpus: &[LabeledInstance],
    workers: &Workers,
) -> Result<Vec<AttentionTrace>, EvalError> {
    workers
        .map(corpus, |_, inst| {
            let d = params
                .score(inv, inst, Mode::Eval)
                .map_err(|source| EvalError::Model { instance_id: inst.instance_id.clone(), source })?;
            let glosses = d
                .sense_ids
                .iter()
                .map(|s| inv.get(s).map(|r| r.gloss.join(" ")).unwrap_or_default())
                .collect();
            Ok(AttentionTrace {
                instance_id: inst.instance_id.clone(),
                chosen: d.best_sense().clone(),
                attention: d.trace.iter().map(|m| m.attention.clone()).collect(),
                sense_ids: d.sense_ids,
                glosses,
                gold: inst.gold_sense.clone(),
            })
        })
        .into_iter()
        .collect()
}

/// Tab-separated `instance_id pass sense_id attention` rows. Glosses, the
/// chosen sense and the gold sense go on `#` comment lines.
pub fn format_traces(traces: &[AttentionTrace]) -> String {
    let mut out = String::from("# instance_id\tpass\tsense_id\tattention\n");
    for t in traces {
        let _ = writeln!(
            out,
            "# {} chosen={} gold={}",
            t.instance_id,
            t.chosen,
            t.gold.as_ref().map_or("-", SenseId::as_str)
        );
        for (s, g) in t.sense_ids.iter().zip(&t.glosses) {
            let _ = writeln!(out, "# {} {}: {}", t.instance_id, s, g);
        }
        for (k, row) in t.attention.iter().enumerate() {
            for (s, a) in t.sense_ids.iter().zip(row) {
                let _ = writeln!(out, "{}\t{}\t{}\t{:.17e}", t.instance_id, k + 1, s, a);
            }
        }
    }
    out
}

pub fn export_traces(
    params: &ModelParams,
    inv: &SenseInventory,
    corpus: &[LabeledInstance],
    path: impl AsRef<Path>,
    workers: &Workers,
) -> Result<Vec<AttentionTrace>, EvalError> {
    let traces = compute_traces(params, inv, corpus, workers)?;
    let path = path.as_ref();
    std::fs::write(path, format_traces(&traces))
        .map_err(|source| EvalError::Io { path: path.display().to_string(), source })?;
    Ok(traces)
}

/// One attention row per pass.
pub type TraceRows = Vec<Vec<(SenseId, f64)>>;

/// Attention matrices keyed by instance id, in file order.
pub fn parse_traces(text: &str) -> Result<Vec<(String, TraceRows)>, EvalError> {
    let mut out: Vec<(String, TraceRows)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let err = |message: String| EvalError::TraceParse { line: i + 1, message };
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 4 {
            return Err(err(format!("expected 4 columns, found {}", cols.len())));
        }
        let pass: usize = cols[1].parse().map_err(|_| err(format!("invalid pass {:?}", cols[1])))?;
        let sense = SenseId::new(cols[2]).map_err(err)?;
        let value: f64 = cols[3].parse().map_err(|_| err(format!("invalid attention {:?}", cols[3])))?;
        if out.last().is_none_or(|(id, _)| id != cols[0]) {
            out.push((cols[0].to_string(), Vec::new()));
        }
        let rows = &mut out.last_mut().expect("pushed above").1;
        if pass == rows.len() + 1 {
            rows.push(Vec::new());
        } else if pass != rows.len() {
            return Err(err(format!("pass {pass} out of sequence")));
        }
        rows.last_mut().expect("row exists").push((sense, value));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub passes: usize,
    pub f1: f64,
    pub best_epoch: usize,
}

/// Trains one model per pass count with identical seeds and data and
/// reports test F1 for each.
#[allow(clippy::too_many_arguments)]
pub fn sweep_passes(
    base: &ModelConfig,
    train_cfg: &TrainConfig,
    train_set: &[LabeledInstance],
    dev: &[LabeledInstance],
    test: &[LabeledInstance],
    inv: &SenseInventory,
    emb: std::sync::Arc<EmbeddingTable>,
    pass_values: &[usize],
    workers: &Workers,
) -> Result<Vec<SweepRow>, EvalError> {
    if pass_values.is_empty() {
        return Err(EvalError::Invalid("no pass values to sweep".into()));
    }
    let mfs = MfsBaseline::fit(train_set, inv);
    let mut rows = Vec::with_capacity(pass_values.len());
    for &p in pass_values {
        let cfg = ModelConfig { passes: p, ..base.clone() };
        let (params, report) = train(cfg, train_set, dev, inv, emb.clone(), train_cfg, workers, None)?;
        let r = evaluate(&params, inv, test, Some(&mfs), workers)?;
        rows.push(SweepRow { passes: p, f1: r.f1, best_epoch: report.best_epoch });
    }
    Ok(rows)
}

pub fn format_sweep(rows: &[SweepRow]) -> String {
    let mut out = String::from("passes\tf1\tbest_epoch\n");
    for r in rows {
        let _ = writeln!(out, "{}\t{:.2}\t{}", r.passes, 100.0 * r.f1, r.best_epoch);
    }
    out
}
