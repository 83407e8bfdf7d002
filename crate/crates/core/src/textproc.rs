//! Sentence segmentation, word tokenization, syllable counting and
//! fixed-size document framing.
//!
//! All functions here are pure and deterministic. Metrics and classifiers
//! never see padding sentences: they iterate [`Document::content`].

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Literal used for padding sentences and their single token.
pub const PAD_TOKEN: &str = "<pad>";

/// Default number of sentences per framed document.
pub const DEFAULT_FRAME: usize = 10;

/// Tokens ending in a period that never close a sentence.
pub const ABBREVIATIONS: &[&str] = &[
    "mr.", "mrs.", "ms.", "dr.", "prof.", "st.", "vs.", "e.g.", "i.e.", "etc.",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub text: String,
    pub tokens: Vec<String>,
    pub is_pad: bool,
}

impl Sentence {
    pub fn new(text: impl Into<String>) -> Self {
        let text = text.into();
        let tokens = tokenize_words(&text);
        Sentence {
            text,
            tokens,
            is_pad: false,
        }
    }

    pub fn pad() -> Self {
        Sentence {
            text: PAD_TOKEN.to_string(),
            tokens: vec![PAD_TOKEN.to_string()],
            is_pad: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub sentences: Vec<Sentence>,
    pub pad_count: usize,
}

impl Document {
    /// Builds an unframed document from raw text.
    pub fn from_text(id: impl Into<String>, text: &str) -> Result<Self> {
        let sentences = split_sentences(text)?;
        Ok(Document {
            id: id.into(),
            sentences,
            pad_count: 0,
        })
    }

    /// Segments `text` and frames it to `frame` sentences.
    pub fn framed(id: impl Into<String>, text: &str, frame: usize) -> Result<Self> {
        frame_document(id, split_sentences(text)?, frame)
    }

    /// Non-padding sentences, in order.
    pub fn content(&self) -> impl Iterator<Item = &Sentence> + '_ {
        self.sentences.iter().filter(|s| !s.is_pad)
    }

    pub fn content_len(&self) -> usize {
        self.content().count()
    }

    /// Word tokens of all non-padding sentences, in order.
    pub fn tokens(&self) -> impl Iterator<Item = &str> + '_ {
        self.content()
            .flat_map(|s| s.tokens.iter().map(String::as_str))
    }

    pub fn token_count(&self) -> usize {
        self.content().map(|s| s.tokens.len()).sum()
    }

    /// Non-padding sentence texts joined by single spaces.
    pub fn text(&self) -> String {
        self.content()
            .map(|s| s.text.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

/// Rule-based sentence segmentation.
///
/// A boundary is placed after a run of `.`, `!` or `?` when it is followed by
/// whitespace and the next non-whitespace character is uppercase or a digit,
/// unless the run is a single period closing a word on [`ABBREVIATIONS`].
pub fn split_sentences(text: &str) -> Result<Vec<Sentence>> {
    if text.trim().is_empty() {
        return Err(Error::EmptyText("input text is empty".into()));
    }
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < chars.len() {
        if !is_terminator(chars[i].1) {
            i += 1;
            continue;
        }
        let run_start = i;
        while i < chars.len() && is_terminator(chars[i].1) {
            i += 1;
        }
        // i is one past the terminator run
        if i >= chars.len() || !chars[i].1.is_whitespace() {
            continue;
        }
        let mut j = i;
        while j < chars.len() && chars[j].1.is_whitespace() {
            j += 1;
        }
        if j >= chars.len() {
            continue;
        }
        let next = chars[j].1;
        if !(next.is_uppercase() || next.is_ascii_digit()) {
            continue;
        }
        let end = chars[i].0;
        if i - run_start == 1 && chars[run_start].1 == '.' && ends_with_abbreviation(&text[start..end])
        {
            continue;
        }
        push_sentence(&mut out, &text[start..end]);
        start = chars[j].0;
        i = j;
    }
    push_sentence(&mut out, &text[start..]);
    Ok(out)
}

fn push_sentence(out: &mut Vec<Sentence>, raw: &str) {
    // internal whitespace runs collapse to one space so sentences never span lines
    let text = raw.split_whitespace().collect::<Vec<_>>().join(" ");
    if !text.is_empty() {
        out.push(Sentence::new(text));
    }
}

fn ends_with_abbreviation(chunk: &str) -> bool {
    let word = chunk
        .rsplit(char::is_whitespace)
        .next()
        .unwrap_or("")
        .trim_start_matches(['(', '[', '"', '\'', '“', '‘'])
        .to_lowercase();
    ABBREVIATIONS.contains(&word.as_str())
}

fn is_joiner(c: char) -> bool {
    matches!(c, '\'' | '’' | '-')
}

/// Byte ranges of the word tokens of `text`.
pub fn token_spans(text: &str) -> Vec<Range<usize>> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut spans = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if !chars[i].1.is_alphanumeric() {
            i += 1;
            continue;
        }
        let start = chars[i].0;
        let mut j = i + 1;
        while j < chars.len() {
            let c = chars[j].1;
            if c.is_alphanumeric() {
                j += 1;
            } else if is_joiner(c) && j + 1 < chars.len() && chars[j + 1].1.is_alphanumeric() {
                j += 2;
            } else {
                break;
            }
        }
        let end = chars.get(j).map_or(text.len(), |&(b, _)| b);
        spans.push(start..end);
        i = j;
    }
    spans
}

/// Maximal runs of alphanumerics with internal apostrophes or hyphens.
pub fn tokenize_words(sentence_text: &str) -> Vec<String> {
    token_spans(sentence_text)
        .into_iter()
        .map(|r| sentence_text[r].to_string())
        .collect()
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

/// Vowel-group syllable heuristic.
///
/// Counts maximal runs of `aeiouy`, drops one for a trailing silent `e`
/// (but not for `-le` after a consonant), and never returns less than 1.
pub fn count_syllables(word: &str) -> Result<usize> {
    if word.is_empty() {
        return Err(Error::EmptyToken);
    }
    let lower: Vec<char> = word.to_lowercase().chars().collect();
    let mut groups = 0usize;
    let mut in_group = false;
    for &c in &lower {
        let v = is_vowel(c);
        if v && !in_group {
            groups += 1;
        }
        in_group = v;
    }
    let n = lower.len();
    if n >= 1 && lower[n - 1] == 'e' {
        let consonant_le = n >= 3
            && lower[n - 2] == 'l'
            && lower[n - 3].is_alphabetic()
            && !is_vowel(lower[n - 3]);
        if !consonant_le {
            groups = groups.saturating_sub(1);
        }
    }
    Ok(groups.max(1))
}

/// Keeps the first `frame` sentences and pads shorter inputs up to `frame`.
pub fn frame_document(
    id: impl Into<String>,
    mut sentences: Vec<Sentence>,
    frame: usize,
) -> Result<Document> {
    if sentences.is_empty() {
        return Err(Error::EmptyText("no sentences to frame".into()));
    }
    if frame == 0 {
        return Err(Error::InvalidArgument("frame size must be at least 1".into()));
    }
    sentences.truncate(frame);
    while sentences.len() < frame {
        sentences.push(Sentence::pad());
    }
    let pad_count = sentences.iter().filter(|s| s.is_pad).count();
    Ok(Document {
        id: id.into(),
        sentences,
        pad_count,
    })
}
