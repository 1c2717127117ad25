use std::sync::OnceLock;

use regex::{RegexSet, RegexSetBuilder};
use serde::{Deserialize, Serialize};

use super::ReviewLabel;
use crate::error::{Error, Result};

/// Regex patterns per category, matched case-insensitively.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Lexicon {
    pub update: Vec<String>,
    pub targeted: Vec<String>,
}

impl Default for Lexicon {
    fn default() -> Self {
        let s = |v: &[&str]| v.iter().map(|p| p.to_string()).collect();
        Lexicon {
            update: s(&[
                r"\bupdate soon\b",
                r"\bplease update\b",
                r"\bcan['’]?t wait for\b",
                r"\bcontinue",
                r"\bmore chapters\b",
                r"\bnext chapter\b",
            ]),
            targeted: s(&[
                r"\bcharacter",
                r"\bplot",
                r"\bgrammar",
                r"\bdialogue",
                r"\bpacing\b",
                // "chapter 12 was ..." but not a bare "chapter 12!"
                r"\bchapter\s+\d+[\s,:;\-]+[a-z]",
                r"\bdescri(be|bed|bes|bing|ption)",
                r"\bscenes?\b",
            ]),
        }
    }
}

#[derive(Debug, Clone)]
pub struct HeuristicClassifier {
    update: RegexSet,
    targeted: RegexSet,
}

fn compile(patterns: &[String]) -> Result<RegexSet> {
    RegexSetBuilder::new(patterns)
        .case_insensitive(true)
        .build()
        .map_err(|e| Error::Config(format!("bad lexicon pattern: {e}")))
}

impl HeuristicClassifier {
    pub fn new(lexicon: &Lexicon) -> Result<Self> {
        Ok(HeuristicClassifier {
            update: compile(&lexicon.update)?,
            targeted: compile(&lexicon.targeted)?,
        })
    }

    pub fn classify(&self, text: &str) -> ReviewLabel {
        ReviewLabel {
            update_encouragement: self.update.is_match(text),
            targeted: self.targeted.is_match(text),
        }
    }
}

/// Classifies with the default lexicon.
pub fn classify_review_heuristic(text: &str) -> ReviewLabel {
    static DEFAULT: OnceLock<HeuristicClassifier> = OnceLock::new();
    DEFAULT
        .get_or_init(|| HeuristicClassifier::new(&Lexicon::default()).expect("default lexicon compiles"))
        .classify(text)
}
