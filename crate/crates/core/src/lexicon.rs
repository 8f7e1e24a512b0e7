//! Sense inventory: loading, lookup by (lemma, POS), and depth-limited
//! breadth-first gloss expansion over hypernym/hyponym edges.
//!
//! The on-disk format is one sense per line with six tab-separated columns:
//!
//! ```text
//! sense_id <TAB> lemma <TAB> pos <TAB> hypernyms <TAB> hyponyms <TAB> gloss
//! ```
//!
//! `pos` is one of `n v a r`, relation columns are comma-separated sense ids
//! or `-`, and lines starting with `#` are comments.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("{source_name}:{line}: {message}")]
    Parse { source_name: String, line: usize, message: String },
    #[error("{source_name}: sense {from} references undefined sense {to}")]
    DanglingEdge { source_name: String, from: String, to: String },
    #[error("{source_name}:{line}: {message}")]
    Validation { source_name: String, line: usize, message: String },
    #[error("unknown sense id {0}")]
    UnknownSense(String),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pos {
    Noun,
    Verb,
    Adj,
    Adv,
}

impl Pos {
    pub const ALL: [Pos; 4] = [Pos::Noun, Pos::Verb, Pos::Adj, Pos::Adv];

    /// Single-letter code used in data files.
    pub fn code(self) -> &'static str {
        match self {
            Pos::Noun => "n",
            Pos::Verb => "v",
            Pos::Adj => "a",
            Pos::Adv => "r",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Pos::Noun => "noun",
            Pos::Verb => "verb",
            Pos::Adj => "adj",
            Pos::Adv => "adv",
        }
    }

    /// Gloss expansion only applies to nouns and verbs.
    pub fn expands(self) -> bool {
        matches!(self, Pos::Noun | Pos::Verb)
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Pos {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "n" | "noun" => Ok(Pos::Noun),
            "v" | "verb" => Ok(Pos::Verb),
            "a" | "s" | "adj" | "adjective" => Ok(Pos::Adj),
            "r" | "adv" | "adverb" => Ok(Pos::Adv),
            _ => Err(format!("unknown part of speech {s:?}")),
        }
    }
}

/// Opaque sense identifier: non-empty, no whitespace, no commas.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SenseId(String);

impl SenseId {
    pub fn new(id: impl Into<String>) -> Result<Self, String> {
        let id = id.into();
        if id.is_empty() || id == "-" {
            return Err("empty sense id".into());
        }
        if id.chars().any(|c| c.is_whitespace() || c == ',') {
            return Err(format!("sense id {id:?} contains whitespace or a comma"));
        }
        Ok(SenseId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SenseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// (lemma, POS) key for candidate lookup and per-word parameters.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WordKey {
    pub lemma: String,
    pub pos: Pos,
}

impl WordKey {
    pub fn new(lemma: &str, pos: Pos) -> Self {
        WordKey { lemma: lemma.to_lowercase(), pos }
    }
}

impl fmt::Display for WordKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.lemma, self.pos)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SenseRecord {
    pub sense_id: SenseId,
    pub lemma: String,
    pub pos: Pos,
    pub gloss: Vec<String>,
    pub hypernyms: Vec<SenseId>,
    pub hyponyms: Vec<SenseId>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GlossEntry {
    pub sense_id: SenseId,
    pub tokens: Vec<String>,
}

/// Original gloss plus relation glosses, each side nearest-first.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpandedGlossList {
    pub hypernym_glosses: Vec<GlossEntry>,
    pub original: GlossEntry,
    pub hyponym_glosses: Vec<GlossEntry>,
}

impl ExpandedGlossList {
    /// Every sense id in the structure: hypernyms, original, hyponyms.
    pub fn sense_ids(&self) -> impl Iterator<Item = &SenseId> {
        self.hypernym_glosses
            .iter()
            .chain(std::iter::once(&self.original))
            .chain(&self.hyponym_glosses)
            .map(|e| &e.sense_id)
    }
}

#[derive(Clone, Debug, Default)]
pub struct SenseInventory {
    records: Vec<SenseRecord>,
    by_id: HashMap<SenseId, usize>,
    index: HashMap<WordKey, Vec<usize>>,
}

fn parse_id_list(field: &str) -> Result<Vec<SenseId>, String> {
    if field == "-" {
        return Ok(Vec::new());
    }
    field.split(',').map(|s| SenseId::new(s.trim())).collect()
}

impl SenseInventory {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, LexiconError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|source| LexiconError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, source_name: &str) -> Result<Self, LexiconError> {
        let parse_err = |line: usize, message: String| LexiconError::Parse {
            source_name: source_name.to_string(),
            line,
            message,
        };
        let mut inv = SenseInventory::default();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 6 {
                return Err(parse_err(line_no, format!("expected 6 tab-separated columns, found {}", cols.len())));
            }
            let sense_id = SenseId::new(cols[0].trim()).map_err(|m| parse_err(line_no, m))?;
            let lemma = cols[1].trim().to_lowercase();
            if lemma.is_empty() || lemma.chars().any(char::is_whitespace) {
                return Err(parse_err(line_no, format!("invalid lemma {:?}", cols[1])));
            }
            let pos: Pos = cols[2].trim().parse().map_err(|m| parse_err(line_no, m))?;
            let hypernyms = parse_id_list(cols[3].trim()).map_err(|m| parse_err(line_no, m))?;
            let hyponyms = parse_id_list(cols[4].trim()).map_err(|m| parse_err(line_no, m))?;
            let gloss: Vec<String> = cols[5].split_whitespace().map(str::to_string).collect();
            if gloss.is_empty() {
                return Err(parse_err(line_no, format!("empty gloss for {sense_id}")));
            }
            let record = SenseRecord { sense_id, lemma, pos, gloss, hypernyms, hyponyms };
            inv.push(record).map_err(|m| LexiconError::Validation {
                source_name: source_name.to_string(),
                line: line_no,
                message: m,
            })?;
        }
        inv.check_edges(source_name)?;
        Ok(inv)
    }

    /// Builds an inventory from records already in memory, applying the
    /// same validation as [`SenseInventory::parse`].
    pub fn from_records(records: Vec<SenseRecord>) -> Result<Self, LexiconError> {
        let mut inv = SenseInventory::default();
        for (i, r) in records.into_iter().enumerate() {
            inv.push(r).map_err(|m| LexiconError::Validation {
                source_name: "<memory>".into(),
                line: i + 1,
                message: m,
            })?;
        }
        inv.check_edges("<memory>")?;
        Ok(inv)
    }

    fn push(&mut self, record: SenseRecord) -> Result<(), String> {
        if self.by_id.contains_key(&record.sense_id) {
            return Err(format!("duplicate sense id {}", record.sense_id));
        }
        if record.gloss.is_empty() {
            return Err(format!("empty gloss for {}", record.sense_id));
        }
        for (kind, list) in [("hypernym", &record.hypernyms), ("hyponym", &record.hyponyms)] {
            let mut seen = HashSet::new();
            for id in list {
                if *id == record.sense_id {
                    return Err(format!("sense {} lists itself as its own {kind}", record.sense_id));
                }
                if !seen.insert(id) {
                    return Err(format!("sense {} lists {kind} {id} twice", record.sense_id));
                }
            }
        }
        let idx = self.records.len();
        self.by_id.insert(record.sense_id.clone(), idx);
        self.index.entry(WordKey::new(&record.lemma, record.pos)).or_default().push(idx);
        self.records.push(record);
        Ok(())
    }

    fn check_edges(&self, source_name: &str) -> Result<(), LexiconError> {
        for r in &self.records {
            for id in r.hypernyms.iter().chain(&r.hyponyms) {
                if !self.by_id.contains_key(id) {
                    return Err(LexiconError::DanglingEdge {
                        source_name: source_name.to_string(),
                        from: r.sense_id.to_string(),
                        to: id.to_string(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[SenseRecord] {
        &self.records
    }

    pub fn get(&self, id: &SenseId) -> Option<&SenseRecord> {
        self.by_id.get(id).map(|&i| &self.records[i])
    }

    pub fn get_str(&self, id: &str) -> Option<&SenseRecord> {
        SenseId::new(id).ok().and_then(|id| self.get(&id))
    }

    /// Candidate senses in file (rank) order; empty when unknown.
    pub fn senses_of(&self, lemma: &str, pos: Pos) -> Vec<&SenseRecord> {
        self.senses_of_key(&WordKey::new(lemma, pos))
    }

    pub fn senses_of_key(&self, key: &WordKey) -> Vec<&SenseRecord> {
        self.index
            .get(key)
            .map(|ids| ids.iter().map(|&i| &self.records[i]).collect())
            .unwrap_or_default()
    }

    pub fn expand_gloss(&self, sense: &SenseId, depth: usize) -> Result<ExpandedGlossList, LexiconError> {
        self.expand_gloss_capped(sense, depth, None)
    }

    /// Level-by-level BFS along hypernym edges and, separately, hyponym
    /// edges, up to `depth` levels. Within a level, parents are visited in
    /// discovery order and children in stored edge order; the first visit
    /// of a sense wins. A sense reachable on both sides is kept on the
    /// hypernym side only. `cap` bounds each side's length.
    pub fn expand_gloss_capped(
        &self,
        sense: &SenseId,
        depth: usize,
        cap: Option<usize>,
    ) -> Result<ExpandedGlossList, LexiconError> {
        let start = *self.by_id.get(sense).ok_or_else(|| LexiconError::UnknownSense(sense.to_string()))?;
        let record = &self.records[start];
        let entry = |i: usize| GlossEntry {
            sense_id: self.records[i].sense_id.clone(),
            tokens: self.records[i].gloss.clone(),
        };
        let mut out = ExpandedGlossList {
            hypernym_glosses: Vec::new(),
            original: entry(start),
            hyponym_glosses: Vec::new(),
        };
        if depth == 0 || !record.pos.expands() {
            return Ok(out);
        }
        let mut hyper = self.bfs(start, depth, |r| &r.hypernyms);
        let on_hyper: HashSet<usize> = hyper.iter().copied().collect();
        let mut hypo: Vec<usize> = self.bfs(start, depth, |r| &r.hyponyms).into_iter().filter(|i| !on_hyper.contains(i)).collect();
        if let Some(c) = cap {
            hyper.truncate(c);
            hypo.truncate(c);
        }
        out.hypernym_glosses = hyper.into_iter().map(entry).collect();
        out.hyponym_glosses = hypo.into_iter().map(entry).collect();
        Ok(out)
    }

    fn bfs<F>(&self, start: usize, depth: usize, edges: F) -> Vec<usize>
    where
        F: Fn(&SenseRecord) -> &Vec<SenseId>,
    {
        let mut visited: HashSet<usize> = HashSet::from([start]);
        let mut found = Vec::new();
        let mut frontier = vec![start];
        for _ in 0..depth {
            let mut next = Vec::new();
            for &node in &frontier {
                for id in edges(&self.records[node]) {
                    let child = self.by_id[id];
                    if visited.insert(child) {
                        found.push(child);
                        next.push(child);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        found
    }

    /// Serializes back to the TSV format, records in storage order.
    pub fn to_tsv(&self) -> String {
        let list = |ids: &[SenseId]| {
            if ids.is_empty() {
                "-".to_string()
            } else {
                ids.iter().map(SenseId::as_str).collect::<Vec<_>>().join(",")
            }
        };
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\n",
                r.sense_id,
                r.lemma,
                r.pos,
                list(&r.hypernyms),
                list(&r.hyponyms),
                r.gloss.join(" ")
            ));
        }
        out
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    /// Twelve-sense neighbourhood of the garden-bed sense of "bed".
    pub const BED_FIXTURE: &str = "\
# sense_id\tlemma\tpos\thypernyms\thyponyms\tgloss
bed_1\tbed\tn\tfurniture_1\t-\ta piece of furniture that provides a place to sleep
bed_2\tbed\tn\tplot_2\tflowerbed_1,seedbed_1,turnip_bed_1\ta plot of ground in which plants are growing
plot_2\tplot\tn\tarea_1\tbed_2,garden_plot_1\ta small area of ground covered by specific vegetation
area_1\tarea\tn\t-\tplot_2\ta particular geographical region of indefinite boundary
garden_plot_1\tgarden_plot\tn\tplot_2\t-\ta plot of ground where plants are cultivated
flowerbed_1\tflowerbed\tn\tbed_2\trosebed_1\ta bed in which flowers are growing
seedbed_1\tseedbed\tn\tbed_2\t-\ta bed where seedlings are grown before transplanting
turnip_bed_1\tturnip_bed\tn\tbed_2\t-\ta bed in which turnips are growing
rosebed_1\trosebed\tn\tflowerbed_1\t-\ta bed planted with roses
furniture_1\tfurniture\tn\t-\tbed_1\tfurnishings that make a room ready for occupancy
plant_1\tplant\tv\t-\t-\tput or set seeds or seedlings into the ground
green_1\tgreen\ta\t-\t-\tof the colour between blue and yellow
";
}

#[cfg(test)]
mod tests {
    use super::fixtures::BED_FIXTURE;
    use super::*;

    fn ids(list: &[GlossEntry]) -> Vec<&str> {
        list.iter().map(|e| e.sense_id.as_str()).collect()
    }

    #[test]
    fn loads_bed_fixture() {
        let inv = SenseInventory::parse(BED_FIXTURE, "bed.tsv").unwrap();
        assert_eq!(inv.len(), 12);
        let beds = inv.senses_of("bed", Pos::Noun);
        assert_eq!(beds.len(), 2);
        assert_eq!(beds[0].sense_id.as_str(), "bed_1");
        assert_eq!(beds[1].gloss.join(" "), "a plot of ground in which plants are growing");
        assert!(inv.senses_of("unknown", Pos::Noun).is_empty());
        assert_eq!(inv.senses_of("plot", Pos::Noun).len(), 1);
        assert_eq!(inv.senses_of("BED", Pos::Noun).len(), 2);
    }

    #[test]
    fn file_order_is_rank_order() {
        let text = "s2\tbed\tn\t-\t-\tsecond\ns1\tbed\tn\t-\t-\tfirst\n";
        let inv = SenseInventory::parse(text, "t").unwrap();
        let ids: Vec<_> = inv.senses_of("bed", Pos::Noun).iter().map(|r| r.sense_id.as_str()).collect();
        assert_eq!(ids, vec!["s2", "s1"]);
    }

    #[test]
    fn dangling_edge_names_both_senses() {
        let text = "a\tx\tn\tz\t-\tsome gloss\n";
        let err = SenseInventory::parse(text, "t").unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, LexiconError::DanglingEdge { .. }));
        assert!(msg.contains(" a ") && msg.contains(" z"), "{msg}");
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        let err = SenseInventory::parse("# c\na\tx\tn\t-\t-\n", "inv.tsv").unwrap_err();
        assert!(err.to_string().starts_with("inv.tsv:2:"), "{err}");
        let err = SenseInventory::parse("a\tx\tn\t-\t-\t   \n", "inv.tsv").unwrap_err();
        assert!(err.to_string().contains("empty gloss"));
        let err = SenseInventory::parse("a\tx\tq\t-\t-\tg\n", "inv.tsv").unwrap_err();
        assert!(err.to_string().contains("part of speech"));
    }

    #[test]
    fn record_invariants_enforced() {
        assert!(SenseInventory::parse("a\tx\tn\ta\t-\tg\n", "t").is_err());
        assert!(SenseInventory::parse("a\tx\tn\tb,b\t-\tg\nb\ty\tn\t-\t-\tg\n", "t").is_err());
        assert!(SenseInventory::parse("a\tx\tn\t-\t-\tg\na\tx\tn\t-\t-\tg\n", "t").is_err());
    }

    #[test]
    fn expand_bed_depth_one() {
        let inv = SenseInventory::parse(BED_FIXTURE, "t").unwrap();
        let bed2 = SenseId::new("bed_2").unwrap();
        let e = inv.expand_gloss(&bed2, 1).unwrap();
        assert_eq!(ids(&e.hypernym_glosses), vec!["plot_2"]);
        assert_eq!(ids(&e.hyponym_glosses), vec!["flowerbed_1", "seedbed_1", "turnip_bed_1"]);
        assert_eq!(e.original.tokens.join(" "), "a plot of ground in which plants are growing");

        let e = inv.expand_gloss(&bed2, 2).unwrap();
        assert_eq!(ids(&e.hypernym_glosses), vec!["plot_2", "area_1"]);
        assert_eq!(ids(&e.hyponym_glosses), vec!["flowerbed_1", "seedbed_1", "turnip_bed_1", "rosebed_1"]);

        let e = inv.expand_gloss(&bed2, 0).unwrap();
        assert!(e.hypernym_glosses.is_empty() && e.hyponym_glosses.is_empty());

        let e = inv.expand_gloss_capped(&bed2, 4, Some(2)).unwrap();
        assert_eq!(ids(&e.hyponym_glosses), vec!["flowerbed_1", "seedbed_1"]);
    }

    #[test]
    fn adjectives_and_unknown_senses() {
        let inv = SenseInventory::parse(BED_FIXTURE, "t").unwrap();
        let e = inv.expand_gloss(&SenseId::new("green_1").unwrap(), 5).unwrap();
        assert!(e.hypernym_glosses.is_empty() && e.hyponym_glosses.is_empty());
        assert!(matches!(
            inv.expand_gloss(&SenseId::new("nope").unwrap(), 1),
            Err(LexiconError::UnknownSense(_))
        ));
    }

    #[test]
    fn cross_side_duplicates_stay_on_hypernym_side() {
        // a <-> b is both a hypernym and a hyponym of a.
        let text = "a\tx\tn\tb\tb\tg\nb\ty\tn\ta\ta\th\n";
        let inv = SenseInventory::parse(text, "t").unwrap();
        let e = inv.expand_gloss(&SenseId::new("a").unwrap(), 3).unwrap();
        assert_eq!(ids(&e.hypernym_glosses), vec!["b"]);
        assert!(e.hyponym_glosses.is_empty());
    }

    #[test]
    fn tsv_round_trip() {
        let inv = SenseInventory::parse(BED_FIXTURE, "t").unwrap();
        let again = SenseInventory::parse(&inv.to_tsv(), "t2").unwrap();
        assert_eq!(inv.records(), again.records());
    }
}
