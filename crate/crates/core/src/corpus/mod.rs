//! Training and evaluation data: leveled-article pairing, aligned document
//! pairs, coherence-annotated texts and control-token formatting.

mod io;
mod synthetic;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::textproc::Document;

pub use io::{
    read_gcdc, read_instances, read_leveled_dir, read_pairs_dir, write_coherence_examples,
    write_instances, write_leveled_dir,
};
pub use synthetic::{
    generate_synthetic_corpus, shuffled_sentences, synthetic_coherence_examples, EASY_FOR_HARD,
};

pub const COMPLEX_LEVEL: u8 = 0;
pub const MAX_LEVEL: u8 = 4;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeveledArticle {
    pub article_id: String,
    /// Raw text per readability level; 0 is the original complex version.
    pub versions: BTreeMap<u8, String>,
}

impl LeveledArticle {
    fn validate(&self) -> Result<()> {
        if let Some(bad) = self.versions.keys().find(|&&l| l > MAX_LEVEL) {
            return Err(Error::InvalidArgument(format!(
                "article {} has level {bad} outside 0..=4",
                self.article_id
            )));
        }
        if !self.versions.contains_key(&COMPLEX_LEVEL) {
            return Err(Error::MissingComplex {
                article_id: self.article_id.clone(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl Split {
    /// Deterministic 80/10/10 assignment from a hash of `key`.
    pub fn for_key(key: &str) -> Split {
        let digest = Sha256::digest(key.as_bytes());
        let mut head = [0u8; 8];
        head.copy_from_slice(&digest[..8]);
        match u64::from_be_bytes(head) % 100 {
            0..=79 => Split::Train,
            80..=89 => Split::Valid,
            _ => Split::Test,
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplificationInstance {
    pub id: String,
    pub source: Document,
    pub target: Document,
    /// Level of the target version (1..=4) for level-labelled pairings.
    pub readability_label: Option<u8>,
    pub split: Split,
}

impl SimplificationInstance {
    pub fn new(
        id: impl Into<String>,
        source_text: &str,
        target_text: &str,
        readability_label: Option<u8>,
        split: Split,
        frame: usize,
    ) -> Result<Self> {
        let id = id.into();
        Ok(SimplificationInstance {
            source: Document::framed(format!("{id}/source"), source_text, frame)?,
            target: Document::framed(format!("{id}/target"), target_text, frame)?,
            id,
            readability_label,
            split,
        })
    }
}

/// Instances built from leveled articles plus the articles that produced none.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuildReport {
    pub instances: Vec<SimplificationInstance>,
    pub skipped: Vec<String>,
}

fn validate_all(articles: &[LeveledArticle]) -> Result<()> {
    articles.iter().try_for_each(LeveledArticle::validate)
}

/// Pairs each complex version with its simplest version (level 4, falling
/// back to level 3). Articles with neither are skipped.
pub fn build_newsela_s(articles: &[LeveledArticle], frame: usize) -> Result<BuildReport> {
    validate_all(articles)?;
    let mut report = BuildReport {
        instances: Vec::new(),
        skipped: Vec::new(),
    };
    for article in articles {
        let complex = &article.versions[&COMPLEX_LEVEL];
        let simple = [4u8, 3]
            .into_iter()
            .find_map(|l| article.versions.get(&l).map(|t| (l, t)));
        match simple {
            Some((level, text)) => report.instances.push(SimplificationInstance::new(
                format!("{}.0-{level}", article.article_id),
                complex,
                text,
                None,
                Split::for_key(&article.article_id),
                frame,
            )?),
            None => report.skipped.push(article.article_id.clone()),
        }
    }
    Ok(report)
}

/// One instance per available simple level, labelled with that level.
pub fn build_newsela_sl(articles: &[LeveledArticle], frame: usize) -> Result<BuildReport> {
    validate_all(articles)?;
    let mut report = BuildReport {
        instances: Vec::new(),
        skipped: Vec::new(),
    };
    for article in articles {
        let complex = &article.versions[&COMPLEX_LEVEL];
        let split = Split::for_key(&article.article_id);
        let before = report.instances.len();
        for (&level, text) in article.versions.range(1..=MAX_LEVEL) {
            report.instances.push(SimplificationInstance::new(
                format!("{}.0-{level}", article.article_id),
                complex,
                text,
                Some(level),
                split,
                frame,
            )?);
        }
        if report.instances.len() == before {
            report.skipped.push(article.article_id.clone());
        }
    }
    Ok(report)
}

/// Aligned complex/simple document pairs without level labels.
pub fn ingest_pairs(pairs: &[(String, String)], frame: usize) -> Result<Vec<SimplificationInstance>> {
    pairs
        .iter()
        .enumerate()
        .map(|(i, (complex, simple))| {
            for (side, text) in [("complex", complex), ("simple", simple)] {
                if text.trim().is_empty() {
                    return Err(Error::EmptyText(format!("pair {i} has an empty {side} side")));
                }
            }
            let id = format!("pair-{i:06}");
            let split = Split::for_key(&id);
            SimplificationInstance::new(id, complex, simple, None, split, frame)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConsensusClass {
    Low,
    Medium,
    High,
}

impl ConsensusClass {
    /// low ≤ 1.8 < medium ≤ 2.2 < high, on the mean rating.
    pub fn from_ratings(ratings: &[u8]) -> Result<Self> {
        if ratings.is_empty() {
            return Err(Error::InvalidRating("at least one rating is required".into()));
        }
        if let Some(bad) = ratings.iter().find(|r| !(1..=3).contains(*r)) {
            return Err(Error::InvalidRating(format!("rating {bad} is outside 1..=3")));
        }
        // compare sum/len against 9/5 and 11/5 exactly
        let sum: u64 = ratings.iter().map(|&r| u64::from(r)).sum();
        let n = ratings.len() as u64;
        Ok(if 5 * sum <= 9 * n {
            ConsensusClass::Low
        } else if 5 * sum <= 11 * n {
            ConsensusClass::Medium
        } else {
            ConsensusClass::High
        })
    }

    /// Only high-coherence texts count as coherent.
    pub fn binary_label(self) -> u8 {
        u8::from(self == ConsensusClass::High)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoherenceExample {
    pub document: Document,
    pub expert_ratings: Vec<u8>,
    pub consensus_class: ConsensusClass,
    pub binary_label: u8,
}

impl CoherenceExample {
    pub fn new(document: Document, expert_ratings: Vec<u8>) -> Result<Self> {
        let consensus_class = ConsensusClass::from_ratings(&expert_ratings)?;
        Ok(CoherenceExample {
            document,
            expert_ratings,
            consensus_class,
            binary_label: consensus_class.binary_label(),
        })
    }
}

pub fn ingest_gcdc(records: &[(String, Vec<u8>)], frame: usize) -> Result<Vec<CoherenceExample>> {
    records
        .iter()
        .enumerate()
        .map(|(i, (text, ratings))| {
            // ratings are checked before the text so the error names the real problem
            ConsensusClass::from_ratings(ratings)?;
            let doc = Document::framed(format!("gcdc-{i:06}"), text, frame)?;
            CoherenceExample::new(doc, ratings.clone())
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Simplify,
    ReadClassify,
}

impl Task {
    pub fn prefix(self) -> &'static str {
        match self {
            Task::Simplify => "simplify:",
            Task::ReadClassify => "read classify:",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::Simplify => "simplify",
            Task::ReadClassify => "read_classify",
        })
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simplify" => Ok(Task::Simplify),
            "read_classify" => Ok(Task::ReadClassify),
            other => Err(Error::Parse(format!("unknown task {other:?}"))),
        }
    }
}

/// Prefixes `text` with the task's control token.
pub fn format_control_input(task: Task, text: &str) -> Result<String> {
    if text.is_empty() {
        return Err(Error::InvalidArgument("control input text is empty".into()));
    }
    Ok(format!("{} {text}", task.prefix()))
}

/// Removes a task's control token, if present.
pub fn strip_control_input(task: Task, input: &str) -> Option<&str> {
    input
        .strip_prefix(task.prefix())
        .map(|rest| rest.strip_prefix(' ').unwrap_or(rest))
}
