//! Count-based substitution / deletion / split simplifier.

use std::collections::BTreeMap;

use super::align::{align, EditOp};
use crate::error::{Error, Result};
use crate::textproc::{frame_document, token_spans, Document, Sentence};

/// Conjunctions the model may learn to split sentences at.
pub const SPLIT_CANDIDATES: &[&str] = &[
    "and", "but", "so", "because", "while", "although", "which", "or", "yet",
];

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Action {
    Copy,
    Delete,
    Substitute(String),
}

#[derive(Debug, Clone, Default, PartialEq)]
struct ActionCounts {
    copy: f64,
    delete: f64,
    substitute: BTreeMap<String, f64>,
}

impl ActionCounts {
    fn total(&self) -> f64 {
        self.copy + self.delete + self.substitute.values().sum::<f64>()
    }
}

/// Per-token categorical distribution over edit actions with additive
/// smoothing. The support of a token is copy, delete, every substitute seen
/// for it, and one bucket for all unseen substitutes.
#[derive(Debug, Clone, PartialEq)]
pub struct SubstitutionModel {
    alpha: f64,
    table: BTreeMap<String, ActionCounts>,
    splits: BTreeMap<String, (f64, f64)>,
    inserted: f64,
    aligned: f64,
}

impl SubstitutionModel {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "smoothing constant must be positive, got {alpha}"
            )));
        }
        Ok(SubstitutionModel {
            alpha,
            table: BTreeMap::new(),
            splits: BTreeMap::new(),
            inserted: 0.0,
            aligned: 0.0,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    fn support(&self, counts: Option<&ActionCounts>) -> (f64, f64) {
        match counts {
            Some(c) => {
                let k = 3 + c.substitute.len();
                (c.total(), self.alpha * k as f64)
            }
            None => (0.0, 3.0 * self.alpha),
        }
    }

    /// Smoothed probability of `action` for a (case-insensitive) source token.
    pub fn probability(&self, token: &str, action: &Action) -> f64 {
        let key = token.to_lowercase();
        let counts = self.table.get(&key);
        let (n, mass) = self.support(counts);
        let c = match (action, counts) {
            (_, None) => 0.0,
            (Action::Copy, Some(c)) => c.copy,
            (Action::Delete, Some(c)) => c.delete,
            (Action::Substitute(w), Some(c)) => {
                c.substitute.get(&w.to_lowercase()).copied().unwrap_or(0.0)
            }
        };
        (c + self.alpha) / (n + mass)
    }

    /// Named actions with their probabilities, plus the mass left for unseen
    /// substitutes.
    pub fn distribution(&self, token: &str) -> (Vec<(Action, f64)>, f64) {
        let key = token.to_lowercase();
        let mut actions = vec![Action::Copy, Action::Delete];
        if let Some(c) = self.table.get(&key) {
            actions.extend(c.substitute.keys().cloned().map(Action::Substitute));
        }
        let (n, mass) = self.support(self.table.get(&key));
        let named = actions
            .into_iter()
            .map(|a| {
                let p = self.probability(&key, &a);
                (a, p)
            })
            .collect();
        (named, self.alpha / (n + mass))
    }

    /// Most probable action; ties go to copy, then delete, then the
    /// alphabetically first substitute.
    pub fn best_action(&self, token: &str) -> Action {
        let Some(c) = self.table.get(&token.to_lowercase()) else {
            return Action::Copy;
        };
        let mut best = (Action::Copy, c.copy);
        if c.delete > best.1 {
            best = (Action::Delete, c.delete);
        }
        for (w, &n) in &c.substitute {
            if n > best.1 {
                best = (Action::Substitute(w.clone()), n);
            }
        }
        best.0
    }

    /// Probability that an aligned event is an insertion.
    pub fn insert_probability(&self) -> f64 {
        (self.inserted + self.alpha) / (self.inserted + self.aligned + 2.0 * self.alpha)
    }

    pub fn splits_at(&self, token: &str) -> bool {
        self.splits
            .get(&token.to_lowercase())
            .is_some_and(|&(yes, no)| yes > 0.0 && yes >= no)
    }

    /// Adds `weight` observations of `action` for `token`.
    pub fn observe(&mut self, token: &str, action: &Action, weight: f64) {
        let c = self.table.entry(token.to_lowercase()).or_default();
        match action {
            Action::Copy => c.copy += weight,
            Action::Delete => c.delete += weight,
            Action::Substitute(w) => *c.substitute.entry(w.to_lowercase()).or_insert(0.0) += weight,
        }
        self.aligned += weight;
    }

    /// Accumulates the aligned edits of one source/target pair.
    pub fn fit_pair(&mut self, source: &Document, target: &Document, weight: f64) {
        let (src, src_start) = flat_tokens(source);
        let (tgt, tgt_start) = flat_tokens(target);
        let ops = align(&src, &tgt);
        for (k, op) in ops.iter().enumerate() {
            match *op {
                EditOp::Copy { src: s, .. } => self.observe(src[s], &Action::Copy, weight),
                EditOp::Delete { src: s } => self.observe(src[s], &Action::Delete, weight),
                EditOp::Substitute { src: s, tgt: t } => {
                    self.observe(src[s], &Action::Substitute(tgt[t].to_string()), weight)
                }
                EditOp::Insert { .. } => self.inserted += weight,
            }
            let s = match *op {
                EditOp::Copy { src, .. } | EditOp::Delete { src } | EditOp::Substitute { src, .. } => src,
                EditOp::Insert { .. } => continue,
            };
            let key = src[s].to_lowercase();
            let inner = !src_start[s] && s + 1 < src.len() && !src_start[s + 1];
            if !inner || !SPLIT_CANDIDATES.contains(&key.as_str()) {
                continue;
            }
            let split = matches!(op, EditOp::Delete { .. })
                && ops[k + 1..]
                    .iter()
                    .find_map(EditOp::tgt)
                    .is_some_and(|t| tgt_start[t]);
            let entry = self.splits.entry(key).or_insert((0.0, 0.0));
            if split {
                entry.0 += weight;
            } else {
                entry.1 += weight;
            }
        }
    }

    /// Mean negative log-likelihood per aligned edit of `target` given `source`.
    pub fn nll(&self, source: &Document, target: &Document) -> f64 {
        let (src, _) = flat_tokens(source);
        let (tgt, _) = flat_tokens(target);
        let ops = align(&src, &tgt);
        if ops.is_empty() {
            return 0.0;
        }
        let sum: f64 = ops
            .iter()
            .map(|op| {
                let p = match *op {
                    EditOp::Copy { src: s, .. } => self.probability(src[s], &Action::Copy),
                    EditOp::Delete { src: s } => self.probability(src[s], &Action::Delete),
                    EditOp::Substitute { src: s, tgt: t } => {
                        self.probability(src[s], &Action::Substitute(tgt[t].to_string()))
                    }
                    EditOp::Insert { .. } => self.insert_probability(),
                };
                -p.ln()
            })
            .sum();
        sum / ops.len() as f64
    }

    /// Applies the argmax action to every token, then splits at learned
    /// conjunctions. Untouched sentences keep their exact text.
    pub fn simplify(&self, doc: &Document) -> Result<Document> {
        if doc.token_count() == 0 {
            return Err(Error::NoText(format!("document {} has no tokens", doc.id)));
        }
        let mut sentences = Vec::new();
        for s in doc.content() {
            self.rewrite(&s.text, &mut sentences);
        }
        let sentences: Vec<Sentence> = sentences
            .into_iter()
            .map(Sentence::new)
            .filter(|s| !s.tokens.is_empty())
            .collect();
        if sentences.is_empty() {
            return Ok(doc.clone());
        }
        frame_document(doc.id.clone(), sentences, doc.sentences.len())
    }

    fn rewrite(&self, text: &str, out: &mut Vec<String>) {
        let spans = token_spans(text);
        let mut cur = text[..spans.first().map_or(text.len(), |r| r.start)].to_string();
        let mut cap_next = false;
        for (i, r) in spans.iter().enumerate() {
            let tok = &text[r.clone()];
            let gap = &text[r.end..spans.get(i + 1).map_or(text.len(), |n| n.start)];
            let at_start = !cur.chars().any(char::is_alphanumeric);
            if i + 1 < spans.len() && !at_start && self.splits_at(tok) {
                out.push(close_clause(&cur));
                cur.clear();
                cap_next = true;
                continue;
            }
            match self.best_action(tok) {
                Action::Delete => {
                    if at_start && starts_upper(tok) {
                        cap_next = true;
                    }
                    if !gap.trim().is_empty() {
                        cur.truncate(cur.trim_end().len());
                        cur.push_str(gap);
                    }
                }
                action => {
                    let mut word = match action {
                        Action::Substitute(w) if starts_upper(tok) => capitalize(&w),
                        Action::Substitute(w) => w,
                        _ => tok.to_string(),
                    };
                    if cap_next {
                        word = capitalize(&word);
                        cap_next = false;
                    }
                    cur.push_str(&word);
                    cur.push_str(gap);
                }
            }
        }
        let tail = cur
            .trim()
            .trim_start_matches(|c: char| matches!(c, ',' | ';' | ':') || c.is_whitespace());
        if tail.chars().any(char::is_alphanumeric) {
            out.push(tail.to_string());
        }
    }
}

fn flat_tokens(doc: &Document) -> (Vec<&str>, Vec<bool>) {
    let mut tokens = Vec::new();
    let mut starts = Vec::new();
    for s in doc.content() {
        for (k, t) in s.tokens.iter().enumerate() {
            tokens.push(t.as_str());
            starts.push(k == 0);
        }
    }
    (tokens, starts)
}

fn close_clause(text: &str) -> String {
    let mut s = text
        .trim()
        .trim_end_matches(|c: char| matches!(c, ',' | ';' | ':') || c.is_whitespace())
        .to_string();
    if !s.ends_with(['.', '!', '?']) {
        s.push('.');
    }
    s
}

fn starts_upper(word: &str) -> bool {
    word.chars().next().is_some_and(char::is_uppercase)
}

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(text: &str) -> Document {
        Document::framed("d", text, 10).unwrap()
    }

    #[test]
    fn rejects_nonpositive_alpha() {
        assert!(SubstitutionModel::new(0.0).is_err());
        assert!(SubstitutionModel::new(-1.0).is_err());
    }

    #[test]
    fn untrained_model_is_identity() {
        let m = SubstitutionModel::new(1.0).unwrap();
        let d = doc("Mr. Smith, who is tall, will arrive. Then we eat!");
        assert_eq!(m.simplify(&d).unwrap(), d);
    }

    #[test]
    fn learns_dominant_substitution() {
        let mut m = SubstitutionModel::new(1.0).unwrap();
        for (s, t) in [
            ("I purchase food.", "I buy food."),
            ("They purchase cars.", "They buy cars."),
            ("We purchase nothing.", "We purchase nothing."),
        ] {
            m.fit_pair(&doc(s), &doc(t), 1.0);
        }
        assert_eq!(m.best_action("purchase"), Action::Substitute("buy".into()));
        let out = m.simplify(&doc("I purchase food.")).unwrap();
        assert_eq!(out.text(), "I buy food.");
    }

    #[test]
    fn distribution_sums_to_one() {
        let mut m = SubstitutionModel::new(0.5).unwrap();
        m.observe("x", &Action::Copy, 2.0);
        m.observe("x", &Action::Substitute("y".into()), 1.0);
        m.observe("x", &Action::Substitute("z".into()), 3.0);
        for tok in ["x", "unknown"] {
            let (named, rest) = m.distribution(tok);
            let total: f64 = named.iter().map(|(_, p)| p).sum::<f64>() + rest;
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn two_token_fixture_nll() {
        let mut m = SubstitutionModel::new(1.0).unwrap();
        m.observe("a", &Action::Copy, 1.0);
        m.observe("b", &Action::Delete, 1.0);
        assert_eq!(m.probability("a", &Action::Copy), 0.5);
        assert_eq!(m.probability("b", &Action::Copy), 0.25);
        let nll = m.nll(&doc("a b"), &doc("a b"));
        assert!((nll - (2f64.ln() + 4f64.ln()) / 2.0).abs() < 1e-12);
        assert!((nll - 1.0397).abs() < 1e-4);
    }

    #[test]
    fn learns_splits_and_deletions() {
        let mut m = SubstitutionModel::new(1.0).unwrap();
        let pairs = [
            ("The very old goat ran, and the cat slept.", "The old goat ran. The cat slept."),
            ("A very big dog barked, and a bird sang.", "A big dog barked. A bird sang."),
        ];
        for (s, t) in pairs {
            m.fit_pair(&doc(s), &doc(t), 1.0);
        }
        assert!(m.splits_at("and"));
        assert_eq!(m.best_action("very"), Action::Delete);
        let out = m.simplify(&doc("Very old hens ran, and the cow ate.")).unwrap();
        let texts: Vec<&str> = out.content().map(|s| s.text.as_str()).collect();
        assert_eq!(texts, ["Old hens ran.", "The cow ate."]);
        assert_eq!(out.sentences.len(), 10);
    }

    #[test]
    fn all_deleted_falls_back_to_source() {
        let mut m = SubstitutionModel::new(1.0).unwrap();
        m.observe("um", &Action::Delete, 5.0);
        let d = doc("Um um.");
        assert_eq!(m.simplify(&d).unwrap(), d);
    }

    #[test]
    fn nll_of_argmax_output_vanishes_with_alpha() {
        let mut prev = f64::INFINITY;
        for alpha in [1.0, 1e-2, 1e-4, 1e-8] {
            let mut m = SubstitutionModel::new(alpha).unwrap();
            m.fit_pair(&doc("We purchase food."), &doc("We buy food."), 1.0);
            let src = doc("We purchase food.");
            let out = m.simplify(&src).unwrap();
            let nll = m.nll(&src, &out);
            assert!(nll >= 0.0 && nll < prev);
            prev = nll;
        }
        assert!(prev < 1e-6);
    }
}
