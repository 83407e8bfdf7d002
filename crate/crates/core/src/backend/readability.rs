//! Softmax readability-level classifier over surface features.

use crate::error::{Error, Result};
use crate::metrics::ReadabilityStats;
use crate::scalar::{relative_error, Real};
use crate::textproc::Document;

pub const READABILITY_FEATURES: [&str; 5] = [
    "words_per_sentence",
    "chars_per_word",
    "syllables_per_word",
    "fre",
    "bias",
];
pub const READABILITY_FEATURE_COUNT: usize = READABILITY_FEATURES.len();
pub const LEVELS: usize = 4;

pub type ReadabilityRow<T> = ([T; READABILITY_FEATURE_COUNT], u8);

/// Scaled surface features: words/sentence ÷ 10, chars/word ÷ 5,
/// syllables/word, FRE ÷ 100, and a constant 1.
pub fn readability_features<T: Real>(doc: &Document) -> Result<[T; READABILITY_FEATURE_COUNT]> {
    let stats = ReadabilityStats::of(doc)?;
    Ok([
        stats.words_per_sentence::<T>() / T::from_f64(10.0),
        stats.chars_per_word::<T>() / T::from_f64(5.0),
        stats.syllables_per_word::<T>(),
        stats.fre::<T>() / T::from_f64(100.0),
        T::one(),
    ])
}

fn check_label(label: u8) -> Result<usize> {
    if (1..=LEVELS as u8).contains(&label) {
        Ok(usize::from(label - 1))
    } else {
        Err(Error::InvalidArgument(format!("readability label {label} is outside 1..=4")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadabilityClassifier<T> {
    /// One row per level 1..=4.
    pub weights: [[T; READABILITY_FEATURE_COUNT]; LEVELS],
}

impl<T: Real> ReadabilityClassifier<T> {
    pub fn zeros() -> Self {
        ReadabilityClassifier {
            weights: [[T::zero(); READABILITY_FEATURE_COUNT]; LEVELS],
        }
    }

    pub fn probabilities(&self, x: &[T; READABILITY_FEATURE_COUNT]) -> [T; LEVELS] {
        softmax(&self.weights, x)
    }

    /// Most probable level; ties go to the lower level.
    pub fn classify(&self, x: &[T; READABILITY_FEATURE_COUNT]) -> u8 {
        let p = self.probabilities(x);
        let mut best = 0;
        for k in 1..LEVELS {
            if p[k] > p[best] {
                best = k;
            }
        }
        best as u8 + 1
    }

    /// `−ln p(label)`.
    pub fn nll(&self, x: &[T; READABILITY_FEATURE_COUNT], label: u8) -> Result<T> {
        let k = check_label(label)?;
        Ok(-log_softmax(&self.weights, x)[k])
    }

    pub fn mean_nll(&self, rows: &[ReadabilityRow<T>]) -> Result<T> {
        if rows.is_empty() {
            return Err(Error::NoSamples("no readability rows".into()));
        }
        let mut sum = T::zero();
        for (x, y) in rows {
            sum = sum + self.nll(x, *y)?;
        }
        Ok(sum / T::from_count(rows.len()))
    }

    /// Gradient of the mean cross-entropy with respect to the weights.
    pub fn gradient(&self, rows: &[ReadabilityRow<T>]) -> Result<[[T; READABILITY_FEATURE_COUNT]; LEVELS]> {
        let weighted: Vec<_> = rows.iter().map(|&(x, y)| (x, y, T::one())).collect();
        let mut g = self.weighted_gradient(&weighted)?;
        let n = T::from_count(rows.len().max(1));
        for row in g.iter_mut() {
            for v in row.iter_mut() {
                *v = *v / n;
            }
        }
        Ok(g)
    }

    fn weighted_gradient(
        &self,
        rows: &[([T; READABILITY_FEATURE_COUNT], u8, T)],
    ) -> Result<[[T; READABILITY_FEATURE_COUNT]; LEVELS]> {
        let mut g = [[T::zero(); READABILITY_FEATURE_COUNT]; LEVELS];
        for (x, y, w) in rows {
            let target = check_label(*y)?;
            let p = self.probabilities(x);
            for k in 0..LEVELS {
                let err = if k == target { p[k] - T::one() } else { p[k] };
                for j in 0..READABILITY_FEATURE_COUNT {
                    g[k][j] = g[k][j] + *w * err * x[j];
                }
            }
        }
        Ok(g)
    }

    /// One gradient step on the weighted sum of per-row losses divided by the
    /// row count.
    pub fn sgd_step(
        &mut self,
        rows: &[([T; READABILITY_FEATURE_COUNT], u8, T)],
        learning_rate: T,
    ) -> Result<()> {
        if rows.is_empty() {
            return Ok(());
        }
        let g = self.weighted_gradient(rows)?;
        let scale = learning_rate / T::from_count(rows.len());
        for k in 0..LEVELS {
            for j in 0..READABILITY_FEATURE_COUNT {
                self.weights[k][j] = self.weights[k][j] - scale * g[k][j];
            }
        }
        Ok(())
    }
}

fn log_softmax<T: Real>(
    w: &[[T; READABILITY_FEATURE_COUNT]; LEVELS],
    x: &[T; READABILITY_FEATURE_COUNT],
) -> [T; LEVELS] {
    let mut z = [T::zero(); LEVELS];
    for k in 0..LEVELS {
        z[k] = (0..READABILITY_FEATURE_COUNT).fold(T::zero(), |acc, j| acc + w[k][j] * x[j]);
    }
    let max = z.iter().copied().fold(T::neg_infinity(), T::max);
    let lse = max + z.iter().fold(T::zero(), |acc, &v| acc + (v - max).exp()).ln();
    z.map(|v| v - lse)
}

fn softmax<T: Real>(
    w: &[[T; READABILITY_FEATURE_COUNT]; LEVELS],
    x: &[T; READABILITY_FEATURE_COUNT],
) -> [T; LEVELS] {
    log_softmax(w, x).map(T::exp)
}

/// Largest relative error between the analytic mean cross-entropy gradient
/// and central finite differences, over all weights.
pub fn gradient_check_readability<T: Real>(
    clf: &ReadabilityClassifier<T>,
    rows: &[ReadabilityRow<T>],
    epsilon: T,
) -> Result<T> {
    if !(epsilon > T::zero()) {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    let analytic = clf.gradient(rows)?;
    let mut worst = T::zero();
    for k in 0..LEVELS {
        for j in 0..READABILITY_FEATURE_COUNT {
            let mut plus = *clf;
            let mut minus = *clf;
            plus.weights[k][j] = plus.weights[k][j] + epsilon;
            minus.weights[k][j] = minus.weights[k][j] - epsilon;
            let numeric = (plus.mean_nll(rows)? - minus.mean_nll(rows)?) / (epsilon + epsilon);
            worst = worst.max(relative_error(analytic[k][j], numeric));
        }
    }
    Ok(worst)
}
