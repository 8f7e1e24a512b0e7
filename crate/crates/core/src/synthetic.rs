//! Generated inventories, corpora and embeddings for tests, benchmarks and
//! the sweep demo.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{corpus_to_tsv, parse_corpus, EmbeddingTable, LabeledInstance};
use crate::lexicon::{Pos, SenseId, SenseInventory, SenseRecord};
use crate::numerics::{derive_seed, rng_from_seed};

/// An inventory, embeddings and train/dev/test splits.
#[derive(Clone, Debug)]
pub struct SyntheticData {
    pub inventory: SenseInventory,
    pub embeddings: EmbeddingTable,
    pub train: Vec<LabeledInstance>,
    pub dev: Vec<LabeledInstance>,
    pub test: Vec<LabeledInstance>,
}

/// File locations written by [`SyntheticData::write_to`].
#[derive(Clone, Debug)]
pub struct SyntheticPaths {
    pub inventory: PathBuf,
    pub embeddings: PathBuf,
    pub train: PathBuf,
    pub dev: PathBuf,
    pub test: PathBuf,
}

impl SyntheticData {
    pub fn write_to(&self, dir: impl AsRef<Path>) -> std::io::Result<SyntheticPaths> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let paths = SyntheticPaths {
            inventory: dir.join("inventory.tsv"),
            embeddings: dir.join("embeddings.txt"),
            train: dir.join("train.tsv"),
            dev: dir.join("dev.tsv"),
            test: dir.join("test.tsv"),
        };
        std::fs::write(&paths.inventory, self.inventory.to_tsv())?;
        std::fs::write(&paths.embeddings, self.embeddings.to_text())?;
        std::fs::write(&paths.train, corpus_to_tsv(&self.train))?;
        std::fs::write(&paths.dev, corpus_to_tsv(&self.dev))?;
        std::fs::write(&paths.test, corpus_to_tsv(&self.test))?;
        Ok(paths)
    }
}

fn toks(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_string).collect()
}

fn sid(s: &str) -> SenseId {
    SenseId::new(s).expect("generated sense id")
}

fn record(id: &str, lemma: &str, pos: Pos, gloss: Vec<String>, hyper: &[String], hypo: &[String]) -> SenseRecord {
    SenseRecord {
        sense_id: sid(id),
        lemma: lemma.to_string(),
        pos,
        gloss,
        hypernyms: hyper.iter().map(|s| sid(s)).collect(),
        hyponyms: hypo.iter().map(|s| sid(s)).collect(),
    }
}

/// Random vectors in `[-1, 1]^dim` for every distinct word in `words`.
pub fn random_embeddings<'a>(words: impl IntoIterator<Item = &'a str>, dim: usize, seed: u64) -> EmbeddingTable {
    let vocab: BTreeSet<&str> = words.into_iter().collect();
    let entries = vocab.into_iter().map(|w| {
        let mut rng = rng_from_seed(derive_seed(seed, w));
        (w.to_string(), (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect())
    });
    EmbeddingTable::from_entries(dim, entries).expect("consistent dimensions")
}

fn vocabulary(inv: &SenseInventory, corpora: &[&[LabeledInstance]]) -> BTreeSet<String> {
    let mut words: BTreeSet<String> = inv.records().iter().flat_map(|r| r.gloss.iter().cloned()).collect();
    for c in corpora {
        for inst in c.iter() {
            words.extend(inst.tokens.iter().cloned());
        }
    }
    words
}

/// One corpus line: tokens with the target inserted at a random position.
fn sentence(rng: &mut ChaCha8Rng, target: &str, mut words: Vec<String>) -> (usize, String) {
    words.shuffle(rng);
    let at = rng.random_range(0..=words.len());
    words.insert(at, target.to_string());
    (at, words.join(" "))
}

fn instance_line(id: &str, at: usize, gold: &str, lemma: &str, pos: Pos, text: &str) -> String {
    format!("{id}\t{at}\t{gold}\t{lemma}\t{pos}\t{text}\n")
}

fn pick_weighted(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let total: f64 = weights.iter().sum();
    let mut r = rng.random_range(0.0..total);
    for (i, w) in weights.iter().enumerate() {
        if r < *w {
            return i;
        }
        r -= w;
    }
    weights.len() - 1
}

const FILLERS: [&str; 16] = [
    "the", "a", "of", "and", "was", "with", "that", "from", "very", "then", "there", "some", "this", "his", "her", "it",
];

const LEMMAS: [(&str, Pos); 8] = [
    ("bank", Pos::Noun),
    ("bass", Pos::Noun),
    ("crane", Pos::Noun),
    ("pitch", Pos::Verb),
    ("spring", Pos::Noun),
    ("match", Pos::Verb),
    ("bolt", Pos::Noun),
    ("seal", Pos::Verb),
];

fn split(rng: &mut ChaCha8Rng, lines: Vec<String>, sizes: [usize; 3], inv: &SenseInventory) -> [Vec<LabeledInstance>; 3] {
    let mut lines = lines;
    lines.shuffle(rng);
    let mut out: [Vec<LabeledInstance>; 3] = Default::default();
    let mut start = 0;
    for (slot, n) in out.iter_mut().zip(sizes) {
        let text: String = lines[start..start + n].concat();
        *slot = parse_corpus(&text, "synthetic", inv).expect("generated corpus is valid");
        start += n;
    }
    out
}

/// Eight lemmas with two or three senses each. Every sense owns four cue
/// words that appear in its gloss; each context carries two cues of the
/// gold sense among filler words. Sense frequencies are skewed so the
/// most-frequent-sense baseline sits near one half.
pub fn learning_task(seed: u64, dim: usize) -> SyntheticData {
    learning_task_sized(seed, dim, [300, 60, 60])
}

pub fn learning_task_sized(seed: u64, dim: usize, sizes: [usize; 3]) -> SyntheticData {
    let mut rng = rng_from_seed(derive_seed(seed, "learning"));
    let mut records = Vec::new();
    let mut cues: Vec<Vec<Vec<String>>> = Vec::new();
    for (li, (lemma, pos)) in LEMMAS.iter().enumerate() {
        let senses = if li % 3 == 0 { 3 } else { 2 };
        let mut per = Vec::new();
        for s in 0..senses {
            let words: Vec<String> = (0..4).map(|c| format!("{lemma}{}cue{c}", s + 1)).collect();
            let gloss = toks(&format!("something concerning {}", words.join(" ")));
            records.push(record(&format!("{lemma}_{}", s + 1), lemma, *pos, gloss, &[], &[]));
            per.push(words);
        }
        cues.push(per);
    }
    let inv = SenseInventory::from_records(records).expect("valid inventory");
    let total: usize = sizes.iter().sum();
    let mut lines = Vec::with_capacity(total);
    for i in 0..total {
        let li = rng.random_range(0..LEMMAS.len());
        let (lemma, pos) = LEMMAS[li];
        let weights: &[f64] = if cues[li].len() == 3 { &[0.5, 0.3, 0.2] } else { &[0.55, 0.45] };
        let s = pick_weighted(&mut rng, weights);
        let mut words: Vec<String> = cues[li][s].choose_multiple(&mut rng, 2).cloned().collect();
        words.extend(FILLERS.choose_multiple(&mut rng, 4).map(|w| w.to_string()));
        let (at, text) = sentence(&mut rng, lemma, words);
        lines.push(instance_line(&format!("l{i:04}"), at, &format!("{lemma}_{}", s + 1), lemma, pos, &text));
    }
    let [train, dev, test] = split(&mut rng, lines, sizes, &inv);
    let vocab = vocabulary(&inv, &[&train, &dev, &test]);
    let embeddings = random_embeddings(vocab.iter().map(String::as_str), dim, derive_seed(seed, "embeddings"));
    SyntheticData { inventory: inv, embeddings, train, dev, test }
}

/// Disambiguating words appear only in the glosses of hypernyms and
/// hyponyms; every original gloss is the same uninformative text.
///
/// Lemmas come in pairs that share one topic per sense index. Each topic's
/// words are split in two halves. In training, the first lemma of a pair
/// sees the first half and the second lemma the second half; dev and test
/// swap the halves. A per-word classifier therefore meets unseen cue words
/// at test time, while the relation glosses link both halves to the same
/// sense.
pub fn relation_task(seed: u64, dim: usize) -> SyntheticData {
    let mut rng = rng_from_seed(derive_seed(seed, "relation"));
    let mut records = Vec::new();
    let mut topic_words: Vec<Vec<String>> = Vec::new();
    // Topic nodes: one hypernym and one hyponym per (pair, sense index).
    for pair in 0..LEMMAS.len() / 2 {
        for s in 0..2 {
            let t = topic_words.len();
            let words: Vec<String> = (0..6).map(|w| format!("topic{t}w{w}")).collect();
            let mut hyper_gloss = words.clone();
            hyper_gloss.shuffle(&mut rng);
            hyper_gloss.insert(0, "general".into());
            let mut hypo_gloss = words.clone();
            hypo_gloss.shuffle(&mut rng);
            hypo_gloss.insert(0, "particular".into());
            let users: Vec<String> = (0..2).map(|k| format!("{}_{}", LEMMAS[2 * pair + k].0, s + 1)).collect();
            records.push(record(&format!("kind{t}_1"), &format!("kind{t}"), Pos::Noun, hyper_gloss, &[], &users));
            records.push(record(&format!("case{t}_1"), &format!("case{t}"), Pos::Noun, hypo_gloss, &users, &[]));
            topic_words.push(words);
        }
    }
    for (li, (lemma, pos)) in LEMMAS.iter().enumerate() {
        for s in 0..2 {
            let t = (li / 2) * 2 + s;
            let gloss = toks("a sense of this word");
            records.push(record(
                &format!("{lemma}_{}", s + 1),
                lemma,
                *pos,
                gloss,
                &[format!("kind{t}_1")],
                &[format!("case{t}_1")],
            ));
        }
    }
    let inv = SenseInventory::from_records(records).expect("valid inventory");
    let sizes = [300, 60, 60];
    let mut lines: [Vec<String>; 3] = Default::default();
    let mut counter = 0;
    for (part, n) in sizes.iter().enumerate() {
        for _ in 0..*n {
            let li = rng.random_range(0..LEMMAS.len());
            let (lemma, pos) = LEMMAS[li];
            let s = rng.random_range(0..2);
            let t = (li / 2) * 2 + s;
            let first_half = (li % 2 == 0) == (part == 0);
            let half = if first_half { &topic_words[t][..3] } else { &topic_words[t][3..] };
            let mut words: Vec<String> = half.choose_multiple(&mut rng, 2).cloned().collect();
            words.extend(FILLERS.choose_multiple(&mut rng, 3).map(|w| w.to_string()));
            let (at, text) = sentence(&mut rng, lemma, words);
            lines[part].push(instance_line(&format!("r{counter:04}"), at, &format!("{lemma}_{}", s + 1), lemma, pos, &text));
            counter += 1;
        }
    }
    let parse = |l: &[String]| parse_corpus(&l.concat(), "synthetic", &inv).expect("generated corpus is valid");
    let (train, dev, test) = (parse(&lines[0]), parse(&lines[1]), parse(&lines[2]));
    let vocab = vocabulary(&inv, &[&train, &dev, &test]);
    let embeddings = random_embeddings(vocab.iter().map(String::as_str), dim, derive_seed(seed, "embeddings"));
    SyntheticData { inventory: inv, embeddings, train, dev, test }
}

pub const PLAY_GLOSSES: [&str; 3] = ["participate in games or sport", "perform music on a instrument", "act a role or part"];
pub const PLAY_SENTENCE: &str = "he plays a pianist in the film";

/// Three senses of the verb "play" with the glosses above. Training
/// contexts mention games, music or acting; the test set holds the single
/// sentence "he plays a pianist in the film", labeled with the acting
/// sense. "pianist" is embedded halfway between "music" and "role".
pub fn play_task(seed: u64, dim: usize) -> SyntheticData {
    let mut rng = rng_from_seed(derive_seed(seed, "play"));
    let records: Vec<SenseRecord> = PLAY_GLOSSES
        .iter()
        .enumerate()
        .map(|(i, g)| record(&format!("play_{}", i + 1), "play", Pos::Verb, toks(g), &[], &[]))
        .collect();
    let inv = SenseInventory::from_records(records).expect("valid inventory");
    let cues: [&[&str]; 3] = [
        &["football", "tennis", "team", "match", "games", "sport", "chess"],
        &["piano", "guitar", "violin", "song", "music", "instrument", "concert"],
        &["film", "stage", "role", "actor", "part", "theatre", "movie"],
    ];
    let subjects = ["he", "she", "they", "we"];
    let mut lines = Vec::new();
    for i in 0..200 {
        let s = pick_weighted(&mut rng, &[0.4, 0.35, 0.25]);
        let mut words: Vec<String> = cues[s].choose_multiple(&mut rng, 2).map(|w| w.to_string()).collect();
        words.extend(["a", "the", "in", "on", "with"].choose_multiple(&mut rng, 2).map(|w| w.to_string()));
        words.shuffle(&mut rng);
        let subject = subjects.choose(&mut rng).expect("non-empty");
        let text = format!("{subject} plays {}", words.join(" "));
        lines.push(instance_line(&format!("p{i:04}"), 1, &format!("play_{}", s + 1), "play", Pos::Verb, &text));
    }
    let [train, dev, _] = split(&mut rng, lines, [170, 30, 0], &inv);
    let test = parse_corpus(&instance_line("play.t1", 1, "play_3", "play", Pos::Verb, PLAY_SENTENCE), "synthetic", &inv)
        .expect("valid instance");
    let vocab = vocabulary(&inv, &[&train, &dev, &test]);
    let base = random_embeddings(vocab.iter().map(String::as_str), dim, derive_seed(seed, "embeddings"));
    let mix: Vec<f64> = base.lookup("music").iter().zip(base.lookup("role")).map(|(a, b)| 0.5 * (a + b)).collect();
    let entries = base.words().iter().map(|w| {
        let v = if w == "pianist" { mix.clone() } else { base.lookup(w).to_vec() };
        (w.clone(), v)
    });
    let embeddings = EmbeddingTable::from_entries(dim, entries).expect("consistent dimensions");
    SyntheticData { inventory: inv, embeddings, train, dev, test }
}

/// A three-sense noun whose senses each have one hypernym and one hyponym,
/// with a handful of labeled sentences. Sized for finite-difference checks.
pub fn micro_task(seed: u64, dim: usize) -> SyntheticData {
    let mut rng = rng_from_seed(derive_seed(seed, "micro"));
    let mut records = Vec::new();
    let glosses = ["a small container for liquid", "a place where people meet", "a sudden loud noise"];
    for (s, g) in glosses.iter().enumerate() {
        let (up, down) = (format!("up{s}_1"), format!("down{s}_1"));
        let me = format!("cell_{}", s + 1);
        records.push(record(&me, "cell", Pos::Noun, toks(g), std::slice::from_ref(&up), std::slice::from_ref(&down)));
        records.push(record(&up, &format!("up{s}"), Pos::Noun, toks(&format!("broad group {s} of things")), &[], std::slice::from_ref(&me)));
        records.push(record(&down, &format!("down{s}"), Pos::Noun, toks(&format!("narrow kind {s} of item")), &[me], &[]));
    }
    let inv = SenseInventory::from_records(records).expect("valid inventory");
    let sentences = ["the cell held water", "we met in the cell at noon", "a cell rang out loudly", "cell"];
    let mut text = String::new();
    for (i, s) in sentences.iter().enumerate() {
        let tokens: Vec<&str> = s.split(' ').collect();
        let at = tokens.iter().position(|t| *t == "cell").expect("target present");
        text.push_str(&instance_line(&format!("m{i}"), at, &format!("cell_{}", i % 3 + 1), "cell", Pos::Noun, s));
    }
    let all = parse_corpus(&text, "synthetic", &inv).expect("valid corpus");
    let vocab = vocabulary(&inv, &[&all]);
    let embeddings = random_embeddings(vocab.iter().map(String::as_str), dim, rng.random());
    SyntheticData { inventory: inv, embeddings, train: all.clone(), dev: all.clone(), test: all }
}

/// Random DAG over `nodes` noun senses `t0..`. Hypernym edges point to
/// earlier nodes in a random topological order; hyponym lists hold the
/// reverse edges in shuffled order.
pub fn random_taxonomy(seed: u64, nodes: usize) -> SenseInventory {
    let mut rng = rng_from_seed(derive_seed(seed, "taxonomy"));
    let mut order: Vec<usize> = (0..nodes).collect();
    order.shuffle(&mut rng);
    let mut hyper: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    let mut hypo: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    let density = rng.random_range(0.02..0.25);
    for i in 1..nodes {
        for j in 0..i {
            if rng.random_bool(density) {
                let (child, parent) = (order[i], order[j]);
                hyper[child].push(parent);
                hypo[parent].push(child);
            }
        }
    }
    let name = |i: usize| format!("t{i}");
    let records = (0..nodes)
        .map(|i| {
            hyper[i].shuffle(&mut rng);
            hypo[i].shuffle(&mut rng);
            let h: Vec<String> = hyper[i].iter().map(|&x| name(x)).collect();
            let o: Vec<String> = hypo[i].iter().map(|&x| name(x)).collect();
            record(&name(i), &format!("w{i}"), Pos::Noun, toks(&format!("gloss of node {i}")), &h, &o)
        })
        .collect();
    SenseInventory::from_records(records).expect("valid taxonomy")
}
