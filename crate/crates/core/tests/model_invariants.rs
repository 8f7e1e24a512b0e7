use std::sync::Arc;

use gas_core::corpus::parse_corpus;
use gas_core::lexicon::{Pos, SenseInventory, WordKey};
use gas_core::model::{memory_pass, ModelConfig, ModelParams, Mode, UpdateRule};
use gas_core::synthetic::micro_task;
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    proptest::collection::vec(proptest::collection::vec(-3.0f64..3.0, cols), rows)
}

fn case() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>)> {
    (1usize..8, 1usize..10).prop_flat_map(|(s, d)| (matrix(s, d), proptest::collection::vec(-3.0f64..3.0, d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn attention_is_a_distribution((glosses, memory) in case()) {
        let (logits, alpha, summary) = memory_pass(&glosses, &memory).unwrap();
        prop_assert_eq!(alpha.len(), glosses.len());
        prop_assert!(alpha.iter().all(|a| (0.0..=1.0).contains(a)));
        prop_assert!((alpha.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for (i, g) in glosses.iter().enumerate() {
            let e: f64 = g.iter().zip(&memory).map(|(a, b)| a * b).sum();
            prop_assert!((logits[i] - e).abs() <= 1e-12 * (1.0 + e.abs()));
        }
        for k in 0..memory.len() {
            let u: f64 = glosses.iter().zip(&alpha).map(|(g, a)| a * g[k]).sum();
            prop_assert!((summary[k] - u).abs() < 1e-12);
        }
        // Larger logits never get less attention.
        for i in 0..alpha.len() {
            for j in 0..alpha.len() {
                if logits[i] > logits[j] {
                    prop_assert!(alpha[i] >= alpha[j]);
                }
            }
        }
    }

    #[test]
    fn attention_is_permutation_equivariant((glosses, memory) in case(), rot in 0usize..8) {
        let n = glosses.len();
        let perm: Vec<usize> = (0..n).map(|i| (i + rot) % n).collect();
        let permuted: Vec<Vec<f64>> = perm.iter().map(|&i| glosses[i].clone()).collect();
        let (l1, a1, u1) = memory_pass(&glosses, &memory).unwrap();
        let (l2, a2, u2) = memory_pass(&permuted, &memory).unwrap();
        for (k, &i) in perm.iter().enumerate() {
            prop_assert_eq!(l2[k].to_bits(), l1[i].to_bits());
            prop_assert!((a2[k] - a1[i]).abs() < 1e-15);
        }
        for (x, y) in u1.iter().zip(&u2) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn identical_glosses_get_uniform_attention(row in proptest::collection::vec(-3.0f64..3.0, 1..8), s in 1usize..7, m in proptest::collection::vec(-3.0f64..3.0, 8)) {
        let glosses = vec![row.clone(); s];
        let (_, alpha, _) = memory_pass(&glosses, &m[..row.len()]).unwrap();
        for a in alpha {
            prop_assert!((a - 1.0 / s as f64).abs() < 1e-15);
        }
    }
}

#[test]
fn attention_survives_extreme_logits() {
    let glosses = vec![vec![1e3], vec![-1e3], vec![0.0]];
    let (_, alpha, _) = memory_pass(&glosses, &[1e3]).unwrap();
    assert!(alpha.iter().all(|a| a.is_finite()));
    assert_eq!(alpha[0], 1.0);
}

/// With λ pinned to 0 the distribution depends on glosses only, so listing
/// the senses in another order permutes the output.
#[test]
fn gloss_scores_follow_sense_order() {
    let data = micro_task(5, 6);
    let records = data.inventory.records().to_vec();
    for rule in [UpdateRule::Linear, UpdateRule::Concatenation] {
        let cfg = ModelConfig { hidden_size: 6, passes: 3, update_rule: rule, expansion_depth: 2, seed: 9, ..Default::default() };
        let emb = Arc::new(data.embeddings.clone());
        let mut params = ModelParams::init(cfg, emb).unwrap();
        let key = WordKey::new("cell", Pos::Noun);
        let slots = params.ensure_expert(&key, 3).unwrap();
        params.store.get_mut(slots.rho).tensor.data_mut()[0] = -800.0;
        let mut shuffled = records.clone();
        shuffled.reverse();
        let inv2 = SenseInventory::from_records(shuffled).unwrap();
        let text = gas_core::corpus::corpus_to_tsv(&data.test);
        let test2 = parse_corpus(&text, "t", &inv2).unwrap();
        for (a, b) in data.test.iter().zip(&test2) {
            let p1 = params.score(&data.inventory, a, Mode::Eval).unwrap();
            let p2 = params.score(&inv2, b, Mode::Eval).unwrap();
            assert_eq!(p1.lambda, 0.0);
            let rev: Vec<_> = p2.sense_ids.iter().rev().cloned().collect();
            assert_eq!(p1.sense_ids, rev);
            for (x, y) in p1.probs.iter().zip(p2.probs.iter().rev()) {
                assert!((x - y).abs() < 1e-12, "{x} vs {y}");
            }
        }
    }
}
