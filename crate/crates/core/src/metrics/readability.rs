//! Flesch–Kincaid grade level and Flesch reading ease over framed documents.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::textproc::{count_syllables, Document};

/// Surface counts over the non-padding sentences of a document.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReadabilityStats {
    pub sentences: usize,
    pub words: usize,
    pub syllables: usize,
    pub chars: usize,
}

impl ReadabilityStats {
    pub fn of(doc: &Document) -> Result<Self> {
        let mut stats = ReadabilityStats {
            sentences: 0,
            words: 0,
            syllables: 0,
            chars: 0,
        };
        for sentence in doc.content().filter(|s| !s.tokens.is_empty()) {
            stats.sentences += 1;
            for token in &sentence.tokens {
                stats.words += 1;
                stats.syllables += count_syllables(token)?;
                stats.chars += token.chars().count();
            }
        }
        if stats.words == 0 {
            return Err(Error::NoText(format!("document {:?} has no words", doc.id)));
        }
        Ok(stats)
    }

    pub fn words_per_sentence<T: Scalar>(&self) -> T {
        T::from_count(self.words) / T::from_count(self.sentences)
    }

    pub fn syllables_per_word<T: Scalar>(&self) -> T {
        T::from_count(self.syllables) / T::from_count(self.words)
    }

    pub fn chars_per_word<T: Scalar>(&self) -> T {
        T::from_count(self.chars) / T::from_count(self.words)
    }

    pub fn fkgl<T: Scalar>(&self) -> T {
        fkgl_from_rates(self.words_per_sentence(), self.syllables_per_word())
    }

    pub fn fre<T: Scalar>(&self) -> T {
        fre_from_rates(self.words_per_sentence(), self.syllables_per_word())
    }
}

/// `0.39·wps + 11.8·spw − 15.59`
pub fn fkgl_from_rates<T: Scalar>(words_per_sentence: T, syllables_per_word: T) -> T {
    T::from_ratio(39, 100) * words_per_sentence + T::from_ratio(118, 10) * syllables_per_word
        - T::from_ratio(1559, 100)
}

/// `206.835 − 1.015·wps − 84.6·spw`
pub fn fre_from_rates<T: Scalar>(words_per_sentence: T, syllables_per_word: T) -> T {
    T::from_ratio(206_835, 1000)
        - T::from_ratio(1015, 1000) * words_per_sentence
        - T::from_ratio(846, 10) * syllables_per_word
}

pub fn fkgl<T: Scalar>(doc: &Document) -> Result<T> {
    Ok(ReadabilityStats::of(doc)?.fkgl())
}

pub fn fre<T: Scalar>(doc: &Document) -> Result<T> {
    Ok(ReadabilityStats::of(doc)?.fre())
}
