//! Seeded generator of leveled articles for desk-scale experiments.
//!
//! Each article is a chain of clauses where every clause's object is the next
//! clause's subject, so consecutive sentences share a noun and non-adjacent
//! ones do not. Simpler levels are derived cumulatively:
//!
//! * level 1 replaces half of the hard words by their easy counterparts,
//! * level 2 replaces all of them and deletes intensifiers,
//! * level 3 splits compound sentences at their conjunction,
//! * level 4 deletes the trailing closing sentence.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CoherenceExample, LeveledArticle};
use crate::error::{Error, Result};
use crate::metrics::fkgl;
use crate::textproc::{frame_document, split_sentences, Document, Sentence};

/// Hard words and their easy replacements. Every easy word has fewer
/// syllables than its hard counterpart.
pub const EASY_FOR_HARD: &[(&str, &str)] = &[
    ("purchase", "buy"),
    ("commence", "start"),
    ("utilize", "use"),
    ("demonstrate", "show"),
    ("assist", "help"),
    ("require", "need"),
    ("obtain", "get"),
    ("construct", "build"),
    ("inform", "tell"),
    ("attempt", "try"),
    ("observe", "see"),
    ("consume", "eat"),
    ("depart", "leave"),
    ("examine", "check"),
    ("discover", "find"),
    ("transport", "move"),
    ("prepare", "make"),
    ("accompany", "join"),
    ("enormous", "big"),
    ("magnificent", "great"),
    ("ancient", "old"),
    ("diminutive", "small"),
    ("exhausted", "tired"),
    ("delighted", "happy"),
    ("intelligent", "smart"),
    ("beautiful", "pretty"),
    ("irritated", "angry"),
    ("delicious", "tasty"),
];

const HARD_VERBS: std::ops::Range<usize> = 0..18;
const HARD_ADJECTIVES: std::ops::Range<usize> = 18..28;

const PLAIN_VERBS: &[&str] = &["like", "visit", "follow", "watch", "paint", "wash", "greet", "meet"];

const FILLERS: &[&str] = &["very", "really", "quite", "truly"];

const CONJUNCTIONS: &[&str] = &["and", "but"];

const NOUNS: &[&str] = &[
    "farmer", "goat", "river", "market", "village", "teacher", "student", "garden", "doctor",
    "city", "bridge", "school", "horse", "boat", "forest", "baker", "bread", "mountain", "lake",
    "road", "train", "station", "dog", "cat", "child", "mother", "father", "house", "field",
    "tree", "bird", "fish", "shop", "king", "queen", "castle", "window", "letter", "song", "lamp",
    "table", "chair", "apple", "basket", "coat", "hill", "island", "ship", "sailor", "painter",
];

const CLOSERS: &[&str] = &[
    "This report was originally published by a regional newspaper.",
    "Additional coverage appeared afterwards in several national magazines.",
    "The account above was compiled from numerous eyewitness statements.",
    "Further details remain available through the community archive.",
];

#[derive(Debug, Clone, Copy)]
enum Slot {
    Plain(&'static str),
    /// Index into [`EASY_FOR_HARD`].
    Hard(usize),
    Filler(&'static str),
}

impl Slot {
    fn render(self, level: u8) -> Option<&'static str> {
        match self {
            Slot::Plain(w) => Some(w),
            Slot::Hard(i) => {
                let (hard, easy) = EASY_FOR_HARD[i];
                let replaced = level >= 2 || (level >= 1 && i % 2 == 0);
                Some(if replaced { easy } else { hard })
            }
            Slot::Filler(w) => (level < 2).then_some(w),
        }
    }
}

struct SentencePlan {
    clauses: Vec<Vec<Slot>>,
    conjunction: &'static str,
}

struct ArticlePlan {
    sentences: Vec<SentencePlan>,
    closer: &'static str,
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn render_clause(slots: &[Slot], level: u8) -> String {
    slots
        .iter()
        .filter_map(|s| s.render(level))
        .collect::<Vec<_>>()
        .join(" ")
}

impl ArticlePlan {
    fn render(&self, level: u8) -> String {
        let mut out: Vec<String> = Vec::new();
        for s in &self.sentences {
            let clauses: Vec<String> = s.clauses.iter().map(|c| render_clause(c, level)).collect();
            if level >= 3 {
                out.extend(clauses.iter().map(|c| format!("{}.", capitalize(c))));
            } else {
                let joined = clauses.join(&format!(", {} ", s.conjunction));
                out.push(format!("{}.", capitalize(&joined)));
            }
        }
        if level < 4 {
            out.push(self.closer.to_string());
        }
        out.join(" ")
    }
}

fn draw_plan(rng: &mut ChaCha8Rng) -> ArticlePlan {
    let n_sentences = rng.gen_range(4..=6);
    let max_compound = 10 - n_sentences;
    let mut compound = 0;
    let shapes: Vec<usize> = (0..n_sentences)
        .map(|_| {
            if compound < max_compound && rng.gen_bool(0.5) {
                compound += 1;
                2
            } else {
                1
            }
        })
        .collect();
    let n_clauses: usize = shapes.iter().sum();

    let nouns: Vec<&'static str> = NOUNS.choose_multiple(rng, n_clauses + 1).copied().collect();
    let mut hard_verbs: Vec<usize> = HARD_VERBS.collect();
    hard_verbs.shuffle(rng);
    let mut plain_verbs: Vec<&'static str> = PLAIN_VERBS.to_vec();
    plain_verbs.shuffle(rng);
    let mut adjectives: Vec<usize> = HARD_ADJECTIVES.collect();
    adjectives.shuffle(rng);

    let mut clause_index = 0;
    let mut sentences = Vec::with_capacity(n_sentences);
    for &shape in &shapes {
        let mut clauses = Vec::with_capacity(shape);
        for _ in 0..shape {
            let mut slots = vec![Slot::Plain("the")];
            if rng.gen_bool(0.5) {
                if let Some(adj) = adjectives.pop() {
                    if rng.gen_bool(0.4) {
                        slots.push(Slot::Filler(FILLERS.choose(rng).copied().unwrap_or("very")));
                    }
                    slots.push(Slot::Hard(adj));
                }
            }
            slots.push(Slot::Plain(nouns[clause_index]));
            slots.push(Slot::Plain("will"));
            let verb = if rng.gen_bool(0.65) {
                hard_verbs.pop().map(Slot::Hard)
            } else {
                None
            };
            let verb = verb
                .or_else(|| plain_verbs.pop().map(Slot::Plain))
                .or_else(|| hard_verbs.pop().map(Slot::Hard))
                .unwrap_or(Slot::Plain("see"));
            slots.push(verb);
            slots.push(Slot::Plain("the"));
            slots.push(Slot::Plain(nouns[clause_index + 1]));
            clauses.push(slots);
            clause_index += 1;
        }
        sentences.push(SentencePlan {
            clauses,
            conjunction: CONJUNCTIONS.choose(rng).copied().unwrap_or("and"),
        });
    }
    ArticlePlan {
        sentences,
        closer: CLOSERS.choose(rng).copied().unwrap_or(CLOSERS[0]),
    }
}

fn fkgl_of(text: &str) -> Result<f64> {
    fkgl::<f64>(&Document::from_text("", text)?)
}

/// Deterministic leveled articles; the same seed always yields the same corpus.
///
/// Every article's simplest version has an FKGL no higher than its complex
/// version.
pub fn generate_synthetic_corpus(seed: u64, n_articles: usize) -> Result<Vec<LeveledArticle>> {
    if n_articles == 0 {
        return Err(Error::InvalidArgument("n_articles must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n_articles);
    for i in 0..n_articles {
        let plan = loop {
            let plan = draw_plan(&mut rng);
            if fkgl_of(&plan.render(4))? <= fkgl_of(&plan.render(0))? {
                break plan;
            }
        };
        let versions: BTreeMap<u8, String> = (0..=4u8).map(|l| (l, plan.render(l))).collect();
        out.push(LeveledArticle {
            article_id: format!("syn{seed}-{i:05}"),
            versions,
        });
    }
    Ok(out)
}

/// A permutation of `sentences` in which no two originally adjacent
/// sentences remain adjacent (in either order), when one exists.
pub fn shuffled_sentences<R: Rng>(sentences: &[Sentence], rng: &mut R) -> Vec<Sentence> {
    let n = sentences.len();
    let mut order: Vec<usize> = (0..n).collect();
    if n < 4 {
        order.reverse();
    } else {
        loop {
            order.shuffle(rng);
            if order.windows(2).all(|w| w[0].abs_diff(w[1]) != 1) {
                break;
            }
        }
    }
    order.into_iter().map(|i| sentences[i].clone()).collect()
}

/// Ordered complex-level synthetic documents rated coherent and
/// sentence-shuffled copies rated incoherent, interleaved.
pub fn synthetic_coherence_examples(
    seed: u64,
    n_documents: usize,
    frame: usize,
) -> Result<Vec<CoherenceExample>> {
    let articles = generate_synthetic_corpus(seed, n_documents)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_c0de);
    let mut out = Vec::with_capacity(2 * n_documents);
    for a in &articles {
        let sentences = split_sentences(&a.versions[&0])?;
        let shuffled = shuffled_sentences(&sentences, &mut rng);
        let ordered = frame_document(format!("{}/ordered", a.article_id), sentences, frame)?;
        let shuffled = frame_document(format!("{}/shuffled", a.article_id), shuffled, frame)?;
        out.push(CoherenceExample::new(ordered, vec![3, 3, 3])?);
        out.push(CoherenceExample::new(shuffled, vec![1, 1, 1])?);
    }
    Ok(out)
}
