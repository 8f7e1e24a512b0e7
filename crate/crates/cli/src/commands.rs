use std::fmt::Write as _;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, Context};
use gas_core::corpus::{load_corpus, load_embeddings, LabeledInstance};
use gas_core::evaluator::{
    evaluate, export_traces, format_sweep, format_traces, predict_all, sweep_passes, MfsBaseline,
};
use gas_core::ingest::ingest_wordnet_dir;
use gas_core::lexicon::SenseInventory;
use gas_core::model::{load_checkpoint, save_checkpoint, ModelConfig, ModelParams, Mode, UpdateRule};
use gas_core::parallel::Workers;
use gas_core::synthetic::micro_task;
use gas_core::trainer::{train as run_training, TrainConfig};

use crate::{Common, DataArgs, Failure, ModelArgs, TrainArgs};

fn model_config(m: &ModelArgs, seed: u64) -> Result<ModelConfig, Failure> {
    let cfg = ModelConfig {
        hidden_size: m.hidden,
        passes: m.passes,
        update_rule: m.update,
        expansion_depth: m.depth,
        extended: m.extended,
        dropout_rate: m.dropout,
        max_gloss_tokens: m.max_gloss_tokens,
        max_expansion: m.max_expansion,
        seed,
    };
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(cfg)
}

fn train_config(t: &TrainArgs, seed: u64) -> Result<TrainConfig, Failure> {
    let cfg = TrainConfig {
        lr: t.lr,
        max_epochs: t.epochs,
        patience: t.patience,
        batch_size: t.batch_size,
        seed,
        shuffle: !t.no_shuffle,
        ..Default::default()
    };
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(cfg)
}

fn inventory(path: &Path) -> anyhow::Result<SenseInventory> {
    Ok(SenseInventory::load(path)?)
}

fn corpus(path: &Path, inv: &SenseInventory) -> anyhow::Result<Vec<LabeledInstance>> {
    Ok(load_corpus(path, inv)?)
}

fn checkpoint(path: &Path) -> anyhow::Result<ModelParams> {
    load_checkpoint(path).with_context(|| format!("loading checkpoint {}", path.display()))
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// `# key value` lines describing the model and run.
fn config_comment(cfg: &ModelConfig, common: &Common) -> String {
    let mut out = String::new();
    for (k, v) in cfg.to_pairs() {
        let _ = writeln!(out, "# {k} {v}");
    }
    let _ = writeln!(out, "# run_seed {}", common.seed);
    let _ = writeln!(out, "# workers {}", common.workers);
    out
}

fn mfs_from(path: Option<&Path>, inv: &SenseInventory) -> anyhow::Result<Option<MfsBaseline>> {
    path.map(|p| Ok(MfsBaseline::fit(&corpus(p, inv)?, inv))).transpose()
}

pub fn ingest(wordnet: &Path, out: &Path) -> Result<(), Failure> {
    let inv = ingest_wordnet_dir(wordnet).map_err(anyhow::Error::from)?;
    write(out, &inv.to_tsv())?;
    println!("wrote {} senses to {}", inv.len(), out.display());
    Ok(())
}

pub fn train(
    data: &DataArgs,
    model: &ModelArgs,
    train: &TrainArgs,
    out: &Path,
    log: Option<&Path>,
    common: &Common,
) -> Result<(), Failure> {
    let mcfg = model_config(model, common.seed)?;
    let tcfg = train_config(train, common.seed)?;
    let inv = inventory(&data.inventory)?;
    let train_set = corpus(&data.train, &inv)?;
    let dev = corpus(&data.dev, &inv)?;
    let emb = load_embeddings(&data.embeddings, None).map_err(anyhow::Error::from)?;
    let workers = Workers::new(common.workers);
    let log_path = log.map(Path::to_path_buf).unwrap_or_else(|| {
        let mut p = out.as_os_str().to_owned();
        p.push(".log");
        PathBuf::from(p)
    });
    let file = std::fs::File::create(&log_path).with_context(|| format!("cannot create {}", log_path.display()))?;
    let mut writer = BufWriter::new(file);
    let (params, report) =
        run_training(mcfg, &train_set, &dev, &inv, Arc::new(emb), &tcfg, &workers, Some(&mut writer))
            .map_err(anyhow::Error::from)?;
    drop(writer);
    save_checkpoint(&params, out).map_err(anyhow::Error::from)?;
    let best = &report.epochs[report.best_epoch - 1];
    println!(
        "{}",
        serde_json::json!({
            "best_epoch": report.best_epoch,
            "epochs": report.epochs.len(),
            "stopped_early": report.stopped_early,
            "dev_loss": best.dev_loss,
            "dev_acc": best.dev_acc,
            "checkpoint": out.display().to_string(),
            "log": log_path.display().to_string(),
        })
    );
    Ok(())
}

pub fn eval(ckpt: &Path, test: &Path, inv_path: &Path, mfs_train: Option<&Path>, common: &Common) -> Result<(), Failure> {
    let params = checkpoint(ckpt)?;
    let inv = inventory(inv_path)?;
    let data = corpus(test, &inv)?;
    let mfs = mfs_from(mfs_train, &inv)?;
    let report = evaluate(&params, &inv, &data, mfs.as_ref(), &Workers::new(common.workers)).map_err(anyhow::Error::from)?;
    let mut out = String::new();
    for (k, v) in params.config.to_pairs() {
        let _ = writeln!(out, "config.{k} {v}");
    }
    out.push_str(&report.to_kv());
    if let Some(m) = &mfs {
        let base = m.evaluate(&data, &inv).map_err(anyhow::Error::from)?;
        let _ = writeln!(out, "mfs.f1 {:.6}", base.f1);
    }
    print!("{out}");
    println!("{}", report.summary_line());
    Ok(())
}

pub fn disambiguate(
    ckpt: &Path,
    input: &Path,
    inv_path: &Path,
    out: &Path,
    mfs_train: Option<&Path>,
    common: &Common,
) -> Result<(), Failure> {
    let params = checkpoint(ckpt)?;
    let inv = inventory(inv_path)?;
    let data = corpus(input, &inv)?;
    let mfs = mfs_from(mfs_train, &inv)?;
    let preds = predict_all(&params, &inv, &data, mfs.as_ref(), &Workers::new(common.workers)).map_err(anyhow::Error::from)?;
    let mut text = config_comment(&params.config, common);
    for p in &preds {
        let prob = p.prob.map_or("-".to_string(), |v| format!("{v:.17e}"));
        let _ = writeln!(text, "{}\t{}\t{}", p.instance_id, p.sense_id, prob);
    }
    write(out, &text)?;
    let backoff = preds.iter().filter(|p| p.backoff).count();
    println!("wrote {} predictions ({} by backoff) to {}", preds.len(), backoff, out.display());
    Ok(())
}

pub fn trace(ckpt: &Path, input: &Path, inv_path: &Path, out: &Path, common: &Common) -> Result<(), Failure> {
    let params = checkpoint(ckpt)?;
    let inv = inventory(inv_path)?;
    let data = corpus(input, &inv)?;
    let traces = export_traces(&params, &inv, &data, out, &Workers::new(common.workers)).map_err(anyhow::Error::from)?;
    let text = config_comment(&params.config, common) + &format_traces(&traces);
    write(out, &text)?;
    println!("wrote traces for {} instances to {}", traces.len(), out.display());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn sweep(
    min: usize,
    max: usize,
    data: &DataArgs,
    test: &Path,
    model: &ModelArgs,
    train: &TrainArgs,
    out: Option<&Path>,
    common: &Common,
) -> Result<(), Failure> {
    let mcfg = model_config(model, common.seed)?;
    let tcfg = train_config(train, common.seed)?;
    let inv = inventory(&data.inventory)?;
    let train_set = corpus(&data.train, &inv)?;
    let dev = corpus(&data.dev, &inv)?;
    let test_set = corpus(test, &inv)?;
    let emb = Arc::new(load_embeddings(&data.embeddings, None).map_err(anyhow::Error::from)?);
    let passes: Vec<usize> = (min..=max).collect();
    let rows = sweep_passes(&mcfg, &tcfg, &train_set, &dev, &test_set, &inv, emb, &passes, &Workers::new(common.workers))
        .map_err(anyhow::Error::from)?;
    let text = config_comment(&mcfg, common) + &format_sweep(&rows);
    print!("{text}");
    if let Some(p) = out {
        write(p, &text)?;
    }
    Ok(())
}

pub fn grad_check(
    hidden: usize,
    passes: usize,
    rules: &[UpdateRule],
    dim: usize,
    depth: usize,
    tolerance: f64,
    common: &Common,
) -> Result<(), Failure> {
    if dim == 0 {
        return Err(Failure::Usage("embedding dimension must be at least 1".into()));
    }
    let data = micro_task(common.seed, dim);
    let workers = Workers::new(common.workers);
    let mut failed = Vec::new();
    println!("rule\tgroup\tsize\tmax_rel_error");
    for &rule in rules {
        let cfg = ModelConfig {
            hidden_size: hidden,
            passes,
            update_rule: rule,
            expansion_depth: depth,
            extended: true,
            dropout_rate: 0.0,
            seed: common.seed,
            ..Default::default()
        };
        cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
        let mut params = ModelParams::init(cfg, Arc::new(data.embeddings.clone())).map_err(anyhow::Error::from)?;
        gas_core::trainer::add_word_experts(&mut params, &data.train, &data.inventory).map_err(anyhow::Error::from)?;
        let report = params.check_gradients(&data.inventory, &data.train, Mode::Eval, &workers).map_err(anyhow::Error::from)?;
        for g in &report.groups {
            println!("{rule}\t{}\t{}\t{:.3e}", g.name, g.size, g.max_rel_error);
            if !(g.max_rel_error <= tolerance) {
                failed.push(format!("{rule}:{}", g.name));
            }
        }
        println!("{rule}\tALL\t{}\t{:.3e}", params.store.num_values(), report.max_rel_error());
    }
    if failed.is_empty() {
        println!("grad-check passed (tolerance {tolerance:e})");
        Ok(())
    } else {
        Err(Failure::Data(anyhow!("gradient check failed for {}", failed.join(", "))))
    }
}
