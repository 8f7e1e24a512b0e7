use std::sync::Arc;

use gas_core::corpus::{corpus_to_tsv, parse_corpus, parse_embeddings};
use gas_core::evaluator::{compute_traces, export_traces, parse_traces};
use gas_core::lexicon::SenseInventory;
use gas_core::model::{load_checkpoint, save_checkpoint, ModelConfig, ModelParams, Mode, UpdateRule};
use gas_core::parallel::Workers;
use gas_core::synthetic::{learning_task_sized, micro_task, random_taxonomy};
use gas_core::trainer::{dev_loss, train, TrainConfig};

#[test]
fn trained_checkpoint_reloads_bit_exact() {
    let data = learning_task_sized(4, 8, [40, 10, 10]);
    let cfg = ModelConfig { hidden_size: 6, passes: 2, seed: 3, ..Default::default() };
    let tcfg = TrainConfig { max_epochs: 3, patience: 3, batch_size: 8, seed: 3, ..Default::default() };
    let workers = Workers::sequential();
    let emb = Arc::new(data.embeddings.clone());
    let (params, _) = train(cfg, &data.train, &data.dev, &data.inventory, emb, &tcfg, &workers, None).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.ckpt");
    save_checkpoint(&params, &path).unwrap();
    let back = load_checkpoint(&path).unwrap();
    assert!(back.store.bit_equal(&params.store));
    assert_eq!(back.config, params.config);
    assert_eq!(back.layout, params.layout);
    let a = dev_loss(&params, &data.inventory, &data.dev, &workers).unwrap();
    let b = dev_loss(&back, &data.inventory, &data.dev, &workers).unwrap();
    assert_eq!(a.to_bits(), b.to_bits());
    for inst in &data.test {
        let p = params.score(&data.inventory, inst, Mode::Eval).unwrap();
        let q = back.score(&data.inventory, inst, Mode::Eval).unwrap();
        assert_eq!(p.probs, q.probs);
    }
    // Saving the reloaded model reproduces the file byte for byte.
    let again = dir.path().join("m2.ckpt");
    save_checkpoint(&back, &again).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn traces_round_trip_through_text() {
    let data = micro_task(2, 5);
    for rule in [UpdateRule::Linear, UpdateRule::Concatenation] {
        let cfg = ModelConfig { hidden_size: 4, passes: 4, update_rule: rule, seed: 1, ..Default::default() };
        let mut params = ModelParams::init(cfg, Arc::new(data.embeddings.clone())).unwrap();
        gas_core::trainer::add_word_experts(&mut params, &data.train, &data.inventory).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.tsv");
        let traces = export_traces(&params, &data.inventory, &data.test, &path, &Workers::sequential()).unwrap();
        assert_eq!(traces, compute_traces(&params, &data.inventory, &data.test, &Workers::new(2)).unwrap());
        let parsed = parse_traces(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(parsed.len(), traces.len());
        for (t, (id, rows)) in traces.iter().zip(&parsed) {
            assert_eq!(&t.instance_id, id);
            assert_eq!(rows.len(), 4);
            for (row, parsed_row) in t.attention.iter().zip(rows) {
                let senses: Vec<_> = parsed_row.iter().map(|(s, _)| s.clone()).collect();
                assert_eq!(senses, t.sense_ids);
                for (a, (_, b)) in row.iter().zip(parsed_row) {
                    assert_eq!(a.to_bits(), b.to_bits());
                }
            }
        }
    }
}

#[test]
fn inventory_corpus_and_embeddings_round_trip() {
    for seed in 0..5 {
        let inv = random_taxonomy(seed, 30);
        let back = SenseInventory::parse(&inv.to_tsv(), "t").unwrap();
        assert_eq!(back.records(), inv.records());
    }
    let data = learning_task_sized(1, 4, [20, 5, 5]);
    let back = parse_corpus(&corpus_to_tsv(&data.train), "c", &data.inventory).unwrap();
    assert_eq!(back, data.train);
    let emb = parse_embeddings(&data.embeddings.to_text(), "e", Some(4)).unwrap();
    assert_eq!(emb.words(), data.embeddings.words());
    assert_eq!(emb.vectors(), data.embeddings.vectors());
}
