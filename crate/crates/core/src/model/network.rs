//! Forward scoring and hand-derived backpropagation for the full network.

use std::collections::HashMap;

use rand_chacha::ChaCha8Rng;

use super::params::{ExpertSlots, LstmSlots, MemorySlots, ModelParams};
use super::ModelError;
use crate::corpus::LabeledInstance;
use crate::lexicon::{ExpandedGlossList, SenseId, SenseInventory};
use crate::numerics::{
    add_assign, backward_lstm, cross_entropy, dot, dropout_mask_with, outer_acc, rng_from_seed, run_lstm,
    sigmoid, softmax, softmax_backward, GradStore, LstmCell, LstmGrads, ParamStore, SeqTrace, LOG_CLAMP,
};

/// Dropout behaviour for one forward pass.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Eval,
    /// Dropout on, masks drawn from this seed.
    Train { seed: u64 },
}

/// Memory state for one pass.
#[derive(Clone, Debug, PartialEq)]
pub struct MemoryState {
    /// 1-based pass index.
    pub pass: usize,
    /// Memory read by this pass; the context vector for pass 1.
    pub memory_in: Vec<f64>,
    pub logits: Vec<f64>,
    pub attention: Vec<f64>,
    /// Attention-weighted sum of gloss vectors.
    pub summary: Vec<f64>,
    /// Updated memory; `None` on the final pass, whose logits go straight
    /// to scoring.
    pub memory_out: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PredictionDistribution {
    pub sense_ids: Vec<SenseId>,
    pub probs: Vec<f64>,
    pub score_c: Vec<f64>,
    pub score_g: Vec<f64>,
    pub lambda: f64,
    pub trace: Vec<MemoryState>,
}

impl PredictionDistribution {
    /// Index of the most probable sense, lowest index on ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = i;
            }
        }
        best
    }

    pub fn best_sense(&self) -> &SenseId {
        &self.sense_ids[self.argmax()]
    }
}

/// Read-only view that pairs model metadata with a particular weight store,
/// so the gradient checker can evaluate perturbed copies.
#[derive(Clone, Copy)]
pub(crate) struct Net<'a> {
    pub params: &'a ModelParams,
    pub store: &'a ParamStore,
}

impl<'a> Net<'a> {
    fn cell(&self, s: LstmSlots) -> LstmCell<'a> {
        LstmCell {
            input_weights: self.store.tensor(s.w_ih),
            recurrent_weights: self.store.tensor(s.w_hh),
            bias: self.store.tensor(s.bias),
        }
    }

    fn n(&self) -> usize {
        self.params.config.hidden_size
    }

    fn embed<'t>(&self, tokens: impl Iterator<Item = &'t String>) -> Vec<&'a [f64]> {
        let emb: &'a crate::corpus::EmbeddingTable = &self.params.embeddings;
        tokens.map(|t| emb.lookup(t)).collect()
    }
}

struct ContextFwd {
    left: SeqTrace,
    right: SeqTrace,
    vector: Vec<f64>,
}

fn context_forward(net: Net<'_>, inst: &LabeledInstance) -> Result<ContextFwd, ModelError> {
    let n = net.n();
    let (left, right) = inst.context_halves();
    let left_x = net.embed(left.iter());
    // The backward direction reads the right half from the sentence end.
    let right_x = net.embed(right.iter().rev());
    let ctx = net.params.layout.context;
    let left = run_lstm(net.cell(ctx.fwd), &left_x)?;
    let right = run_lstm(net.cell(ctx.bwd), &right_x)?;
    let mut vector = left.final_h(n);
    vector.extend(right.final_h(n));
    Ok(ContextFwd { left, right, vector })
}

struct GlossFwd {
    fwd: SeqTrace,
    bwd: SeqTrace,
    vector: Vec<f64>,
}

fn gloss_forward(net: Net<'_>, tokens: &[String]) -> Result<GlossFwd, ModelError> {
    if tokens.is_empty() {
        return Err(ModelError::EmptyGloss);
    }
    let n = net.n();
    let kept = &tokens[..tokens.len().min(net.params.config.max_gloss_tokens)];
    let g = net.params.layout.gloss;
    let fwd = run_lstm(net.cell(g.fwd), &net.embed(kept.iter()))?;
    let bwd = run_lstm(net.cell(g.bwd), &net.embed(kept.iter().rev()))?;
    let mut vector = fwd.final_h(n);
    vector.extend(bwd.final_h(n));
    Ok(GlossFwd { fwd, bwd, vector })
}

/// Hypernym-side and hyponym-side input orders for the fusion layer:
/// farthest relation first, each ending on the original gloss.
pub fn fusion_sequences(expanded: &ExpandedGlossList) -> (Vec<SenseId>, Vec<SenseId>) {
    let side = |list: &[crate::lexicon::GlossEntry]| {
        let mut ids: Vec<SenseId> = list.iter().rev().map(|e| e.sense_id.clone()).collect();
        ids.push(expanded.original.sense_id.clone());
        ids
    };
    (side(&expanded.hypernym_glosses), side(&expanded.hyponym_glosses))
}

struct FusionFwd {
    hyper_slots: Vec<usize>,
    hypo_slots: Vec<usize>,
    fwd: SeqTrace,
    bwd: SeqTrace,
}

struct SenseFwd {
    own_slot: usize,
    fusion: Option<FusionFwd>,
    mask: Vec<f64>,
    vector: Vec<f64>,
}

struct PassFwd {
    memory_in: Vec<f64>,
    logits: Vec<f64>,
    attention: Vec<f64>,
    summary: Vec<f64>,
    /// `[m : u : c]` and the pre-activation, concatenation rule only.
    concat: Option<(Vec<f64>, Vec<f64>)>,
    memory_out: Option<Vec<f64>>,
}

struct Forward {
    sense_ids: Vec<SenseId>,
    context: ContextFwd,
    c_mask: Vec<f64>,
    c: Vec<f64>,
    glosses: Vec<GlossFwd>,
    senses: Vec<SenseFwd>,
    passes: Vec<PassFwd>,
    expert: Option<ExpertSlots>,
    score_c: Vec<f64>,
    score_g: Vec<f64>,
    lambda: f64,
    probs: Vec<f64>,
}

impl Forward {
    fn distribution(self) -> PredictionDistribution {
        let trace = self
            .passes
            .into_iter()
            .enumerate()
            .map(|(k, p)| MemoryState {
                pass: k + 1,
                memory_in: p.memory_in,
                logits: p.logits,
                attention: p.attention,
                summary: p.summary,
                memory_out: p.memory_out,
            })
            .collect();
        PredictionDistribution {
            sense_ids: self.sense_ids,
            probs: self.probs,
            score_c: self.score_c,
            score_g: self.score_g,
            lambda: self.lambda,
            trace,
        }
    }
}

fn apply_mask(v: &[f64], mask: &[f64]) -> Vec<f64> {
    v.iter().zip(mask).map(|(a, b)| a * b).collect()
}

fn draw_mask(rng: &mut Option<ChaCha8Rng>, len: usize, rate: f64) -> Result<Vec<f64>, ModelError> {
    Ok(match rng {
        Some(r) => dropout_mask_with(len, rate, r, true)?,
        None => vec![1.0; len],
    })
}

/// `e_i = g_i · m`, `α = softmax(e)`, `u = Σ α_i g_i`.
pub fn memory_pass(glosses: &[Vec<f64>], memory: &[f64]) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>), ModelError> {
    if glosses.is_empty() {
        return Err(ModelError::NoCandidates("memory pass over zero glosses".into()));
    }
    if glosses.iter().any(|g| g.len() != memory.len()) {
        return Err(ModelError::Dimension(format!(
            "gloss vectors must match memory dimension {}",
            memory.len()
        )));
    }
    let logits: Vec<f64> = glosses.iter().map(|g| dot(g, memory)).collect();
    let attention = softmax(&logits)?;
    let mut summary = vec![0.0; memory.len()];
    for (g, &a) in glosses.iter().zip(&attention) {
        for (s, &x) in summary.iter_mut().zip(g) {
            *s += a * x;
        }
    }
    Ok((logits, attention, summary))
}

fn concat_input(memory: &[f64], summary: &[f64], c: &[f64]) -> Vec<f64> {
    let mut x = Vec::with_capacity(memory.len() * 3);
    x.extend_from_slice(memory);
    x.extend_from_slice(summary);
    x.extend_from_slice(c);
    x
}

/// Memory refresh, returning the new memory and (for the concatenation
/// rule) the cached input and pre-activation.
fn update_forward(
    net: Net<'_>,
    memory: &[f64],
    summary: &[f64],
    c: &[f64],
) -> (Vec<f64>, Option<(Vec<f64>, Vec<f64>)>) {
    match net.params.layout.memory {
        MemorySlots::Linear { h } => {
            let mut out = summary.to_vec();
            net.store.tensor(h).matvec_acc(memory, &mut out);
            (out, None)
        }
        MemorySlots::Concatenation { w, b } => {
            let x = concat_input(memory, summary, c);
            let mut pre = net.store.tensor(b).data().to_vec();
            net.store.tensor(w).matvec_acc(&x, &mut pre);
            let out = pre.iter().map(|&v| v.max(0.0)).collect();
            (out, Some((x, pre)))
        }
    }
}

fn forward(net: Net<'_>, inv: &SenseInventory, inst: &LabeledInstance, mode: Mode) -> Result<Forward, ModelError> {
    let cfg = &net.params.config;
    let n = cfg.hidden_size;
    let key = inst.key();
    let candidates = inv.senses_of_key(&key);
    if candidates.is_empty() {
        return Err(ModelError::NoCandidates(key.to_string()));
    }
    let expert = net.params.expert(&key);
    if expert.is_none() && candidates.len() > 1 {
        return Err(ModelError::UnseenTarget(key));
    }
    if let Some(e) = expert {
        if e.senses != candidates.len() {
            return Err(ModelError::Config(format!(
                "word expert {key} has {} outputs but the inventory lists {} senses",
                e.senses,
                candidates.len()
            )));
        }
    }
    let mut rng = match mode {
        Mode::Train { seed } if cfg.dropout_rate > 0.0 => Some(rng_from_seed(seed)),
        _ => None,
    };

    let context = context_forward(net, inst)?;
    let c_mask = draw_mask(&mut rng, 2 * n, cfg.dropout_rate)?;
    let c = apply_mask(&context.vector, &c_mask);

    // Encode every distinct gloss once per instance.
    let mut slot_of: HashMap<SenseId, usize> = HashMap::new();
    let mut glosses: Vec<GlossFwd> = Vec::new();
    let mut encode = |id: &SenseId, tokens: &[String]| -> Result<usize, ModelError> {
        if let Some(&s) = slot_of.get(id) {
            return Ok(s);
        }
        glosses.push(gloss_forward(net, tokens)?);
        slot_of.insert(id.clone(), glosses.len() - 1);
        Ok(glosses.len() - 1)
    };

    let mut senses = Vec::with_capacity(candidates.len());
    let mut pending = Vec::with_capacity(candidates.len());
    for rec in &candidates {
        let own_slot = encode(&rec.sense_id, &rec.gloss)?;
        let plan = if let Some(_fusion) = net.params.layout.fusion {
            let expanded = inv.expand_gloss_capped(&rec.sense_id, cfg.expansion_depth, cfg.max_expansion)?;
            let mut hyper_slots = Vec::new();
            for e in expanded.hypernym_glosses.iter().rev() {
                hyper_slots.push(encode(&e.sense_id, &e.tokens)?);
            }
            hyper_slots.push(own_slot);
            let mut hypo_slots = Vec::new();
            for e in expanded.hyponym_glosses.iter().rev() {
                hypo_slots.push(encode(&e.sense_id, &e.tokens)?);
            }
            hypo_slots.push(own_slot);
            Some((hyper_slots, hypo_slots))
        } else {
            None
        };
        pending.push((own_slot, plan));
    }
    for (own_slot, plan) in pending {
        let (fusion, raw) = match (plan, net.params.layout.fusion) {
            (Some((hyper_slots, hypo_slots)), Some(f)) => {
                let hx: Vec<&[f64]> = hyper_slots.iter().map(|&s| glosses[s].vector.as_slice()).collect();
                let ox: Vec<&[f64]> = hypo_slots.iter().map(|&s| glosses[s].vector.as_slice()).collect();
                let fwd = run_lstm(net.cell(f.fwd), &hx)?;
                let bwd = run_lstm(net.cell(f.bwd), &ox)?;
                let mut raw = fwd.final_h(n);
                raw.extend(bwd.final_h(n));
                (Some(FusionFwd { hyper_slots, hypo_slots, fwd, bwd }), raw)
            }
            _ => (None, glosses[own_slot].vector.clone()),
        };
        let mask = draw_mask(&mut rng, 2 * n, cfg.dropout_rate)?;
        let vector = apply_mask(&raw, &mask);
        senses.push(SenseFwd { own_slot, fusion, mask, vector });
    }

    let gloss_vectors: Vec<Vec<f64>> = senses.iter().map(|s| s.vector.clone()).collect();
    let mut passes = Vec::with_capacity(cfg.passes);
    let mut memory = c.clone();
    for k in 1..=cfg.passes {
        let (logits, attention, summary) = memory_pass(&gloss_vectors, &memory)?;
        let (memory_out, concat) = if k < cfg.passes {
            let (m, cache) = update_forward(net, &memory, &summary, &c);
            (Some(m), cache)
        } else {
            (None, None)
        };
        let next = memory_out.clone();
        passes.push(PassFwd { memory_in: memory, logits, attention, summary, concat, memory_out });
        if let Some(m) = next {
            memory = m;
        } else {
            break;
        }
    }
    let score_g = passes.last().expect("at least one pass").logits.clone();

    let (score_c, lambda) = match expert {
        Some(e) => {
            let mut sc = net.store.tensor(e.b).data().to_vec();
            net.store.tensor(e.w).matvec_acc(&c, &mut sc);
            (sc, sigmoid(net.store.tensor(e.rho).data()[0]))
        }
        None => (vec![0.0; candidates.len()], 0.5),
    };
    let mixed: Vec<f64> = score_c.iter().zip(&score_g).map(|(a, b)| lambda * a + (1.0 - lambda) * b).collect();
    let probs = softmax(&mixed)?;

    Ok(Forward {
        sense_ids: candidates.iter().map(|r| r.sense_id.clone()).collect(),
        context,
        c_mask,
        c,
        glosses,
        senses,
        passes,
        expert,
        score_c,
        score_g,
        lambda,
        probs,
    })
}

fn gold_index(fwd: &Forward, inst: &LabeledInstance) -> Result<usize, ModelError> {
    let gold = inst.gold_sense.as_ref().ok_or_else(|| ModelError::MissingGold(inst.instance_id.clone()))?;
    fwd.sense_ids
        .iter()
        .position(|s| s == gold)
        .ok_or_else(|| ModelError::GoldNotCandidate(inst.instance_id.clone(), gold.to_string()))
}

fn flush_lstm(grads: &mut GradStore, slots: LstmSlots, g: &LstmGrads) {
    add_assign(grads.slot_mut(slots.w_ih, g.input_weights.len()), &g.input_weights);
    add_assign(grads.slot_mut(slots.w_hh, g.recurrent_weights.len()), &g.recurrent_weights);
    add_assign(grads.slot_mut(slots.bias, g.bias.len()), &g.bias);
}

fn backward(net: Net<'_>, fwd: &Forward, gold: usize) -> GradStore {
    let mut grads = GradStore::for_store(net.store);
    if fwd.probs.len() == 1 || fwd.probs[gold] < LOG_CLAMP {
        // Constant loss: a single candidate, or the clamp is active.
        return grads;
    }
    let n = net.n();
    let two_n = 2 * n;
    let senses = fwd.probs.len();

    let mut dz = fwd.probs.clone();
    dz[gold] -= 1.0;
    let lambda = fwd.lambda;
    let mut dc = vec![0.0; two_n];
    let mut dg: Vec<Vec<f64>> = vec![vec![0.0; two_n]; senses];

    if let Some(e) = fwd.expert {
        let d_sc: Vec<f64> = dz.iter().map(|v| lambda * v).collect();
        let d_lambda: f64 = dz.iter().zip(fwd.score_c.iter().zip(&fwd.score_g)).map(|(d, (a, b))| d * (a - b)).sum();
        outer_acc(grads.slot_mut(e.w, senses * two_n), &d_sc, &fwd.c);
        add_assign(grads.slot_mut(e.b, senses), &d_sc);
        grads.slot_mut(e.rho, 1)[0] += d_lambda * lambda * (1.0 - lambda);
        net.store.tensor(e.w).matvec_t_acc(&d_sc, &mut dc);
    }
    let d_sg: Vec<f64> = dz.iter().map(|v| (1.0 - lambda) * v).collect();

    // Memory passes in reverse. `dm` is the gradient on the memory produced
    // by the pass being processed.
    let mut dm: Option<Vec<f64>> = None;
    let last = fwd.passes.len();
    for (k, pass) in fwd.passes.iter().enumerate().rev() {
        let mut de = vec![0.0; senses];
        let mut dm_in = vec![0.0; two_n];
        let mut du = vec![0.0; two_n];
        if k + 1 == last {
            add_assign(&mut de, &d_sg);
        }
        if let Some(dm_out) = dm.take() {
            match net.params.layout.memory {
                MemorySlots::Linear { h } => {
                    outer_acc(grads.slot_mut(h, two_n * two_n), &dm_out, &pass.memory_in);
                    net.store.tensor(h).matvec_t_acc(&dm_out, &mut dm_in);
                    du.copy_from_slice(&dm_out);
                }
                MemorySlots::Concatenation { w, b } => {
                    let (x, pre) = pass.concat.as_ref().expect("concatenation cache");
                    let dpre: Vec<f64> =
                        dm_out.iter().zip(pre).map(|(&d, &p)| if p > 0.0 { d } else { 0.0 }).collect();
                    outer_acc(grads.slot_mut(w, two_n * 3 * two_n), &dpre, x);
                    add_assign(grads.slot_mut(b, two_n), &dpre);
                    let mut dx = vec![0.0; 3 * two_n];
                    net.store.tensor(w).matvec_t_acc(&dpre, &mut dx);
                    add_assign(&mut dm_in, &dx[..two_n]);
                    du.copy_from_slice(&dx[two_n..2 * two_n]);
                    add_assign(&mut dc, &dx[2 * two_n..]);
                }
            }
        }
        if du.iter().any(|&v| v != 0.0) {
            let d_alpha: Vec<f64> = fwd.senses.iter().map(|s| dot(&du, &s.vector)).collect();
            for (i, s) in fwd.senses.iter().enumerate() {
                let _ = s;
                let a = pass.attention[i];
                for (g, &d) in dg[i].iter_mut().zip(&du) {
                    *g += a * d;
                }
            }
            add_assign(&mut de, &softmax_backward(&pass.attention, &d_alpha));
        }
        for (i, s) in fwd.senses.iter().enumerate() {
            let d = de[i];
            if d == 0.0 {
                continue;
            }
            for (x, &g) in dm_in.iter_mut().zip(&s.vector) {
                *x += d * g;
            }
            for (g, &m) in dg[i].iter_mut().zip(&pass.memory_in) {
                *g += d * m;
            }
        }
        dm = Some(dm_in);
    }
    if let Some(dm0) = dm {
        add_assign(&mut dc, &dm0);
    }

    // Dropout, then the gloss pathway.
    let mut d_gloss: Vec<Option<Vec<f64>>> = vec![None; fwd.glosses.len()];
    let mut add_gloss = |slot: usize, d: &[f64]| match &mut d_gloss[slot] {
        Some(v) => add_assign(v, d),
        None => d_gloss[slot] = Some(d.to_vec()),
    };
    let layout = &net.params.layout;
    let mut fusion_grads = layout.fusion.map(|f| (LstmGrads::zeros(net.cell(f.fwd)), LstmGrads::zeros(net.cell(f.bwd))));
    for (i, s) in fwd.senses.iter().enumerate() {
        let d_raw = apply_mask(&dg[i], &s.mask);
        match (&s.fusion, layout.fusion, fusion_grads.as_mut()) {
            (Some(ff), Some(f), Some((gf, gb))) => {
                let dx = backward_lstm(net.cell(f.fwd), &ff.fwd, &d_raw[..n], gf, true);
                for (&slot, d) in ff.hyper_slots.iter().zip(&dx) {
                    add_gloss(slot, d);
                }
                let dx = backward_lstm(net.cell(f.bwd), &ff.bwd, &d_raw[n..], gb, true);
                for (&slot, d) in ff.hypo_slots.iter().zip(&dx) {
                    add_gloss(slot, d);
                }
            }
            _ => add_gloss(s.own_slot, &d_raw),
        }
    }
    if let (Some(f), Some((gf, gb))) = (layout.fusion, &fusion_grads) {
        flush_lstm(&mut grads, f.fwd, gf);
        flush_lstm(&mut grads, f.bwd, gb);
    }
    let gl = layout.gloss;
    let mut gf = LstmGrads::zeros(net.cell(gl.fwd));
    let mut gb = LstmGrads::zeros(net.cell(gl.bwd));
    for (enc, d) in fwd.glosses.iter().zip(&d_gloss) {
        if let Some(d) = d {
            backward_lstm(net.cell(gl.fwd), &enc.fwd, &d[..n], &mut gf, false);
            backward_lstm(net.cell(gl.bwd), &enc.bwd, &d[n..], &mut gb, false);
        }
    }
    flush_lstm(&mut grads, gl.fwd, &gf);
    flush_lstm(&mut grads, gl.bwd, &gb);

    let dc_raw = apply_mask(&dc, &fwd.c_mask);
    let ctx = layout.context;
    let mut gf = LstmGrads::zeros(net.cell(ctx.fwd));
    let mut gb = LstmGrads::zeros(net.cell(ctx.bwd));
    backward_lstm(net.cell(ctx.fwd), &fwd.context.left, &dc_raw[..n], &mut gf, false);
    backward_lstm(net.cell(ctx.bwd), &fwd.context.right, &dc_raw[n..], &mut gb, false);
    flush_lstm(&mut grads, ctx.fwd, &gf);
    flush_lstm(&mut grads, ctx.bwd, &gb);
    grads
}

pub(crate) fn score_with(net: Net<'_>, inv: &SenseInventory, inst: &LabeledInstance, mode: Mode) -> Result<PredictionDistribution, ModelError> {
    Ok(forward(net, inv, inst, mode)?.distribution())
}

pub(crate) fn loss_with(net: Net<'_>, inv: &SenseInventory, inst: &LabeledInstance, mode: Mode) -> Result<f64, ModelError> {
    let fwd = forward(net, inv, inst, mode)?;
    let gold = gold_index(&fwd, inst)?;
    Ok(cross_entropy(&fwd.probs, gold)?)
}

pub(crate) fn loss_and_grad_with(
    net: Net<'_>,
    inv: &SenseInventory,
    inst: &LabeledInstance,
    mode: Mode,
) -> Result<(f64, GradStore), ModelError> {
    let fwd = forward(net, inv, inst, mode)?;
    let gold = gold_index(&fwd, inst)?;
    let loss = cross_entropy(&fwd.probs, gold)?;
    Ok((loss, backward(net, &fwd, gold)))
}

pub(crate) fn context_vector(net: Net<'_>, inst: &LabeledInstance) -> Result<Vec<f64>, ModelError> {
    Ok(context_forward(net, inst)?.vector)
}

pub(crate) fn gloss_vector(net: Net<'_>, tokens: &[String]) -> Result<Vec<f64>, ModelError> {
    Ok(gloss_forward(net, tokens)?.vector)
}

pub(crate) fn fuse_with(net: Net<'_>, hyper: &[Vec<f64>], original: &[f64], hypo: &[Vec<f64>]) -> Result<Vec<f64>, ModelError> {
    let f = net.params.layout.fusion.ok_or_else(|| ModelError::Config("model has no relation fusion layer".into()))?;
    let n = net.n();
    let mut hx: Vec<&[f64]> = hyper.iter().rev().map(|v| v.as_slice()).collect();
    hx.push(original);
    let mut ox: Vec<&[f64]> = hypo.iter().rev().map(|v| v.as_slice()).collect();
    ox.push(original);
    let mut out = run_lstm(net.cell(f.fwd), &hx)?.final_h(n);
    out.extend(run_lstm(net.cell(f.bwd), &ox)?.final_h(n));
    Ok(out)
}

pub(crate) fn update_with(net: Net<'_>, memory: &[f64], summary: &[f64], c: &[f64]) -> Result<Vec<f64>, ModelError> {
    let two_n = 2 * net.n();
    if memory.len() != two_n || summary.len() != two_n || c.len() != two_n {
        return Err(ModelError::Dimension(format!("memory update expects vectors of length {two_n}")));
    }
    Ok(update_forward(net, memory, summary, c).0)
}
