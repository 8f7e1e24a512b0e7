use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ModelError;

/// How the memory vector is refreshed between passes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum UpdateRule {
    /// `m' = H·m + u`
    Linear,
    /// `m' = ReLU(W·[m : u : c] + b)`
    Concatenation,
}

impl fmt::Display for UpdateRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UpdateRule::Linear => "linear",
            UpdateRule::Concatenation => "concatenation",
        })
    }
}

impl FromStr for UpdateRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(UpdateRule::Linear),
            "concat" | "concatenation" => Ok(UpdateRule::Concatenation),
            _ => Err(format!("unknown update rule {s:?} (expected linear or concat)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub hidden_size: usize,
    pub passes: usize,
    pub update_rule: UpdateRule,
    pub expansion_depth: usize,
    /// Relation-expanded glosses with the fusion layer when set; otherwise
    /// each sense is represented by its own gloss only.
    pub extended: bool,
    pub dropout_rate: f64,
    pub max_gloss_tokens: usize,
    /// Optional per-side cap on expanded gloss lists.
    pub max_expansion: Option<usize>,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            hidden_size: 256,
            passes: 3,
            update_rule: UpdateRule::Concatenation,
            expansion_depth: 4,
            extended: true,
            dropout_rate: 0.5,
            max_gloss_tokens: 32,
            max_expansion: None,
            seed: 42,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: &str| Err(ModelError::Config(m.to_string()));
        if self.hidden_size == 0 {
            return bad("hidden size must be at least 1");
        }
        if self.passes == 0 {
            return bad("number of memory passes must be at least 1");
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return bad("dropout rate must be in [0, 1)");
        }
        if self.max_gloss_tokens == 0 {
            return bad("max gloss tokens must be at least 1");
        }
        Ok(())
    }

    /// Key/value pairs in a fixed order, as written to checkpoints and logs.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        vec![
            ("hidden_size", self.hidden_size.to_string()),
            ("passes", self.passes.to_string()),
            ("update_rule", self.update_rule.to_string()),
            ("expansion_depth", self.expansion_depth.to_string()),
            ("extended", self.extended.to_string()),
            ("dropout_rate", format!("{:?}", self.dropout_rate)),
            ("max_gloss_tokens", self.max_gloss_tokens.to_string()),
            ("max_expansion", self.max_expansion.map_or("none".to_string(), |c| c.to_string())),
            ("seed", self.seed.to_string()),
        ]
    }

    pub fn set_pair(&mut self, key: &str, value: &str) -> Result<(), String> {
        let num = |v: &str| v.parse::<usize>().map_err(|_| format!("invalid value {v:?} for {key}"));
        match key {
            "hidden_size" => self.hidden_size = num(value)?,
            "passes" => self.passes = num(value)?,
            "update_rule" => self.update_rule = value.parse()?,
            "expansion_depth" => self.expansion_depth = num(value)?,
            "extended" => self.extended = value.parse().map_err(|_| format!("invalid boolean {value:?}"))?,
            "dropout_rate" => self.dropout_rate = value.parse().map_err(|_| format!("invalid rate {value:?}"))?,
            "max_gloss_tokens" => self.max_gloss_tokens = num(value)?,
            "max_expansion" => {
                self.max_expansion = if value == "none" { None } else { Some(num(value)?) };
            }
            "seed" => self.seed = value.parse().map_err(|_| format!("invalid seed {value:?}"))?,
            _ => return Err(format!("unknown config key {key:?}")),
        }
        Ok(())
    }
}
