//! Binary discourse-coherence classifier.
//!
//! A logistic regression over six surface features of a framed document,
//! fit by seeded stochastic gradient descent on binary cross-entropy. It
//! supplies the coherence gate of the training loss and the coherence rate
//! reported for system outputs.

use std::collections::BTreeSet;
use std::fmt::Display;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::CoherenceExample;
use crate::error::{Error, Result};
use crate::scalar::{relative_error, sigmoid, softplus, Real, Scalar};
use crate::textproc::Document;

/// Function words excluded from the content-word sets.
pub const STOP_WORDS: &[&str] = &[
    "a", "an", "the", "and", "or", "but", "so", "if", "of", "to", "in", "on", "at", "by", "for",
    "with", "from", "as", "into", "about", "is", "are", "was", "were", "be", "been", "am", "do",
    "does", "did", "has", "have", "had", "will", "would", "can", "could", "should", "not", "no",
    "it", "its", "he", "she", "they", "we", "you", "i", "this", "that", "these", "those", "his",
    "her", "their", "there", "then", "than",
];

pub const CONNECTIVES: &[&str] = &[
    "however", "therefore", "because", "then", "also", "but", "and", "so", "thus", "moreover",
    "furthermore", "meanwhile", "finally", "first", "second", "later", "instead", "although",
    "while", "since", "after", "before", "consequently", "hence", "besides", "afterwards",
];

pub const PRONOUNS: &[&str] = &[
    "he", "she", "it", "they", "him", "her", "them", "his", "hers", "its", "their", "theirs",
    "this", "that", "these", "those", "we", "us", "our", "you", "your", "i", "me", "my",
];

pub const FEATURE_NAMES: [&str; 6] = [
    "adjacent_overlap",
    "connective_density",
    "pronoun_density",
    "type_token_ratio",
    "length_norm",
    "bias",
];

pub const FEATURE_COUNT: usize = FEATURE_NAMES.len();

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceFeatureVector<T> {
    pub adjacent_overlap: T,
    pub connective_density: T,
    pub pronoun_density: T,
    pub type_token_ratio: T,
    pub length_norm: T,
    pub bias: T,
}

impl<T: Real> CoherenceFeatureVector<T> {
    pub fn to_array(&self) -> [T; FEATURE_COUNT] {
        [
            self.adjacent_overlap,
            self.connective_density,
            self.pronoun_density,
            self.type_token_ratio,
            self.length_norm,
            self.bias,
        ]
    }
}

fn content_words(tokens: &[String]) -> BTreeSet<String> {
    tokens
        .iter()
        .map(|t| t.to_lowercase())
        .filter(|t| !STOP_WORDS.contains(&t.as_str()))
        .collect()
}

/// Jaccard overlap; two empty sets count as identical.
fn jaccard<T: Real>(a: &BTreeSet<String>, b: &BTreeSet<String>) -> T {
    let union = a.union(b).count();
    if union == 0 {
        return T::one();
    }
    T::from_count(a.intersection(b).count()) / T::from_count(union)
}

pub fn extract_features<T: Real>(doc: &Document) -> Result<CoherenceFeatureVector<T>> {
    let sentences: Vec<_> = doc.content().collect();
    if sentences.is_empty() {
        return Err(Error::NoText(format!("document {:?} has only padding", doc.id)));
    }
    let n_sent = T::from_count(sentences.len());
    let sets: Vec<_> = sentences.iter().map(|s| content_words(&s.tokens)).collect();
    let adjacent_overlap = if sets.len() < 2 {
        T::zero()
    } else {
        let sum = sets
            .windows(2)
            .fold(T::zero(), |acc, w| acc + jaccard::<T>(&w[0], &w[1]));
        sum / T::from_count(sets.len() - 1)
    };

    let lowered: Vec<String> = doc.tokens().map(str::to_lowercase).collect();
    if lowered.is_empty() {
        return Err(Error::NoText(format!("document {:?} has no words", doc.id)));
    }
    let count_in = |list: &[&str]| lowered.iter().filter(|t| list.contains(&t.as_str())).count();
    let types: BTreeSet<&String> = lowered.iter().collect();

    Ok(CoherenceFeatureVector {
        adjacent_overlap,
        connective_density: T::from_count(count_in(CONNECTIVES)) / n_sent,
        pronoun_density: T::from_count(count_in(PRONOUNS)) / n_sent,
        type_token_ratio: T::from_count(types.len()) / T::from_count(lowered.len()),
        length_norm: n_sent / T::from_count(doc.sentences.len()),
        bias: T::one(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig<T> {
    pub learning_rate: T,
    pub epochs: usize,
    pub seed: u64,
}

impl<T: Real> Default for TrainConfig<T> {
    fn default() -> Self {
        TrainConfig {
            learning_rate: T::from_f64(0.1),
            epochs: 50,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceModel<T> {
    pub weights: [T; FEATURE_COUNT],
    pub threshold: T,
    /// `(epoch, mean training loss)`; epoch 0 is the loss before training.
    pub training_log: Vec<(usize, T)>,
}

impl<T: Real> CoherenceModel<T> {
    pub fn zeros() -> Self {
        CoherenceModel {
            weights: [T::zero(); FEATURE_COUNT],
            threshold: T::from_f64(0.5),
            training_log: Vec::new(),
        }
    }

    pub fn logit(&self, x: &[T; FEATURE_COUNT]) -> T {
        self.weights
            .iter()
            .zip(x)
            .fold(T::zero(), |acc, (w, v)| acc + *w * *v)
    }

    /// Mean binary cross-entropy over labelled feature rows.
    pub fn mean_loss(&self, data: &[([T; FEATURE_COUNT], u8)]) -> T {
        mean_bce(&self.weights, data)
    }
}

fn mean_bce<T: Real>(weights: &[T; FEATURE_COUNT], data: &[([T; FEATURE_COUNT], u8)]) -> T {
    let sum = data.iter().fold(T::zero(), |acc, (x, y)| {
        let z = weights.iter().zip(x).fold(T::zero(), |a, (w, v)| a + *w * *v);
        // -[y ln σ(z) + (1-y) ln(1-σ(z))] = softplus(z) - y z
        let y = if *y == 1 { T::one() } else { T::zero() };
        acc + softplus(z) - y * z
    });
    sum / T::from_count(data.len().max(1))
}

fn mean_gradient<T: Real>(
    weights: &[T; FEATURE_COUNT],
    data: &[([T; FEATURE_COUNT], u8)],
) -> [T; FEATURE_COUNT] {
    let mut grad = [T::zero(); FEATURE_COUNT];
    for (x, y) in data {
        let z = weights.iter().zip(x).fold(T::zero(), |a, (w, v)| a + *w * *v);
        let y = if *y == 1 { T::one() } else { T::zero() };
        let err = sigmoid(z) - y;
        for (g, v) in grad.iter_mut().zip(x) {
            *g = *g + err * *v;
        }
    }
    let n = T::from_count(data.len().max(1));
    grad.map(|g| g / n)
}

/// Feature rows for a set of labelled examples.
pub fn feature_rows<T: Real>(examples: &[CoherenceExample]) -> Result<Vec<([T; FEATURE_COUNT], u8)>> {
    examples
        .iter()
        .map(|e| Ok((extract_features::<T>(&e.document)?.to_array(), e.binary_label)))
        .collect()
}

pub fn train_coherence<T: Real>(
    examples: &[CoherenceExample],
    config: &TrainConfig<T>,
) -> Result<CoherenceModel<T>> {
    fit_rows(feature_rows(examples)?, config)
}

/// Seeded SGD on precomputed feature rows.
///
/// Rows are put in a canonical order before shuffling, so the fitted model
/// depends only on the multiset of rows and the seed.
pub fn fit_rows<T: Real>(
    mut rows: Vec<([T; FEATURE_COUNT], u8)>,
    config: &TrainConfig<T>,
) -> Result<CoherenceModel<T>> {
    if rows.is_empty() {
        return Err(Error::NoSamples("no coherence training examples".into()));
    }
    let first = rows[0].1;
    if rows.iter().all(|(_, y)| *y == first) {
        return Err(Error::DegenerateLabels(first));
    }
    if !(config.learning_rate > T::zero()) {
        return Err(Error::InvalidArgument("learning rate must be positive".into()));
    }
    rows.sort_by(|a, b| {
        a.1.cmp(&b.1).then_with(|| {
            a.0.iter()
                .zip(&b.0)
                .map(|(x, y)| Scalar::to_f64(*x).total_cmp(&Scalar::to_f64(*y)))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });

    let mut model = CoherenceModel::zeros();
    model.training_log.push((0, model.mean_loss(&rows)));
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..rows.len()).collect();
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let (x, y) = &rows[i];
            let y = if *y == 1 { T::one() } else { T::zero() };
            let err = sigmoid(model.logit(x)) - y;
            for (w, v) in model.weights.iter_mut().zip(x) {
                *w = *w - config.learning_rate * err * *v;
            }
        }
        let loss = model.mean_loss(&rows);
        model.training_log.push((epoch, loss));
    }
    Ok(model)
}

/// `(label, probability)`; the label is 1 iff the probability reaches the threshold.
pub fn predict_coherence<T: Real>(model: &CoherenceModel<T>, doc: &Document) -> Result<(u8, T)> {
    let x = extract_features::<T>(doc)?.to_array();
    let p = sigmoid(model.logit(&x));
    Ok((u8::from(p >= model.threshold), p))
}

/// Largest relative error between the analytic mean-BCE gradient and central
/// finite differences, taken over all weights.
pub fn gradient_check_coherence<T: Real>(
    model: &CoherenceModel<T>,
    rows: &[([T; FEATURE_COUNT], u8)],
    epsilon: T,
) -> Result<T> {
    if !(epsilon > T::zero()) {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    let analytic = mean_gradient(&model.weights, rows);
    let mut worst = T::zero();
    for j in 0..FEATURE_COUNT {
        let mut plus = model.weights;
        let mut minus = model.weights;
        plus[j] = plus[j] + epsilon;
        minus[j] = minus[j] - epsilon;
        let numeric = (mean_bce(&plus, rows) - mean_bce(&minus, rows)) / (epsilon + epsilon);
        worst = worst.max(relative_error(analytic[j], numeric));
    }
    Ok(worst)
}

impl<T: Real + Display + FromStr> CoherenceModel<T> {
    pub fn to_text(&self) -> String {
        let mut out = String::from("# coherence model: logistic regression\n");
        out.push_str(&format!("threshold = {}\n", self.threshold));
        for (name, w) in FEATURE_NAMES.iter().zip(&self.weights) {
            out.push_str(&format!("weight.{name} = {w}\n"));
        }
        for (epoch, loss) in &self.training_log {
            out.push_str(&format!("loss.{epoch} = {loss}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut model = CoherenceModel::zeros();
        let mut seen = [false; FEATURE_COUNT];
        let parse = |v: &str| {
            v.parse::<T>()
                .map_err(|_| Error::Parse(format!("invalid number {v:?}")))
        };
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if key == "threshold" {
                model.threshold = parse(value)?;
            } else if let Some(name) = key.strip_prefix("weight.") {
                let j = FEATURE_NAMES
                    .iter()
                    .position(|f| *f == name)
                    .ok_or_else(|| Error::Parse(format!("unknown feature {name:?}")))?;
                model.weights[j] = parse(value)?;
                seen[j] = true;
            } else if let Some(epoch) = key.strip_prefix("loss.") {
                let epoch = epoch
                    .parse()
                    .map_err(|_| Error::Parse(format!("invalid epoch {epoch:?}")))?;
                model.training_log.push((epoch, parse(value)?));
            } else {
                return Err(Error::Parse(format!("unknown key {key:?}")));
            }
        }
        if let Some(j) = seen.iter().position(|s| !s) {
            return Err(Error::Parse(format!("missing weight.{}", FEATURE_NAMES[j])));
        }
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_text(&fs::read_to_string(path)?)
    }
}
