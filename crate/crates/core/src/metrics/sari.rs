//! SARI and its document-level extension D-SARI.
//!
//! For each n-gram order 1..=4 the prediction is compared with the source and
//! the references as n-gram multisets:
//!
//! * keep: F1 of the n-grams kept from the source,
//! * add: F1 of the n-grams introduced that are absent from the source,
//! * delete: precision of the n-grams removed from the source.
//!
//! Source and prediction counts are replicated once per reference. A component
//! whose system-side and reference-side sets are both empty scores 1; an empty
//! denominator otherwise scores 0. Comparison is case-insensitive.
//!
//! D-SARI multiplies the order-averaged components by document-level length
//! and sentence-count penalties, all of which equal 1 when the prediction has
//! the reference's token length and sentence count.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};
use crate::textproc::Document;

pub const MAX_ORDER: usize = 4;

type Counts = BTreeMap<Vec<String>, usize>;

/// Order-averaged SARI components, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SariComponents<T> {
    pub keep: T,
    pub delete: T,
    pub add: T,
}

impl<T: Scalar> SariComponents<T> {
    /// Mean of the three components scaled to `[0, 100]`.
    pub fn score(&self) -> T {
        (self.keep + self.delete + self.add) / T::from_count(3) * T::from_count(100)
    }
}

fn ngram_counts(tokens: &[String], n: usize) -> Counts {
    let mut counts = Counts::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w.to_vec()).or_insert(0) += 1;
        }
    }
    counts
}

fn lowered<S: AsRef<str>>(tokens: &[S]) -> Vec<String> {
    tokens.iter().map(|t| t.as_ref().to_lowercase()).collect()
}

fn ratio<T: Scalar>(num: usize, den: usize) -> T {
    T::from_count(num) / T::from_count(den)
}

fn f1<T: Scalar>(p: T, r: T) -> T {
    if p + r == T::zero() {
        T::zero()
    } else {
        T::from_count(2) * p * r / (p + r)
    }
}

fn order_components<T: Scalar>(
    source: &Counts,
    prediction: &Counts,
    references: &Counts,
    numref: usize,
) -> SariComponents<T> {
    let get = |m: &Counts, g: &Vec<String>| m.get(g).copied().unwrap_or(0);

    // keep
    let mut keep_sys = 0usize;
    let mut keep_all = 0usize;
    let mut keep_p = T::zero();
    let mut keep_r = T::zero();
    // delete
    let mut del_sys = 0usize;
    let mut del_all = 0usize;
    let mut del_p = T::zero();

    for (g, &sc) in source {
        let s = sc * numref;
        let c = get(prediction, g) * numref;
        let r = get(references, g);

        let kept = s.min(c);
        let kept_all = s.min(r);
        let kept_good = kept.min(r);
        if kept > 0 {
            keep_sys += 1;
            keep_p = keep_p + ratio(kept_good, kept);
        }
        if kept_all > 0 {
            keep_all += 1;
            keep_r = keep_r + ratio(kept_good, kept_all);
        }

        let deleted = s.saturating_sub(c);
        let deleted_all = s.saturating_sub(r);
        if deleted > 0 {
            del_sys += 1;
            del_p = del_p + ratio(deleted.min(deleted_all), deleted);
        }
        if deleted_all > 0 {
            del_all += 1;
        }
    }

    let keep = if keep_sys == 0 && keep_all == 0 {
        T::one()
    } else {
        let p = if keep_sys == 0 { T::zero() } else { keep_p / T::from_count(keep_sys) };
        let r = if keep_all == 0 { T::zero() } else { keep_r / T::from_count(keep_all) };
        f1(p, r)
    };

    let delete = if del_sys == 0 && del_all == 0 {
        T::one()
    } else if del_sys == 0 {
        T::zero()
    } else {
        del_p / T::from_count(del_sys)
    };

    let src: BTreeSet<&Vec<String>> = source.keys().collect();
    let refs: BTreeSet<&Vec<String>> = references.keys().collect();
    let add_sys: BTreeSet<_> = prediction.keys().filter(|g| !src.contains(g)).collect();
    let add_all: BTreeSet<_> = refs.iter().copied().filter(|g| !src.contains(g)).collect();
    let add_good = add_sys.iter().filter(|g| refs.contains(**g)).count();
    let add = if add_sys.is_empty() && add_all.is_empty() {
        T::one()
    } else {
        let p = if add_sys.is_empty() { T::zero() } else { ratio(add_good, add_sys.len()) };
        let r = if add_all.is_empty() { T::zero() } else { ratio(add_good, add_all.len()) };
        f1(p, r)
    };

    SariComponents { keep, delete, add }
}

/// SARI components over raw token sequences.
pub fn sari_components<T: Scalar, S: AsRef<str>>(
    source: &[S],
    prediction: &[S],
    references: &[Vec<S>],
) -> Result<SariComponents<T>> {
    if references.is_empty() {
        return Err(Error::NoReference);
    }
    let source = lowered(source);
    let prediction = lowered(prediction);
    let references: Vec<Vec<String>> = references.iter().map(|r| lowered(r)).collect();

    let mut total = SariComponents {
        keep: T::zero(),
        delete: T::zero(),
        add: T::zero(),
    };
    for n in 1..=MAX_ORDER {
        let mut ref_counts = Counts::new();
        for r in &references {
            for (g, c) in ngram_counts(r, n) {
                *ref_counts.entry(g).or_insert(0) += c;
            }
        }
        let c = order_components::<T>(
            &ngram_counts(&source, n),
            &ngram_counts(&prediction, n),
            &ref_counts,
            references.len(),
        );
        total.keep = total.keep + c.keep;
        total.delete = total.delete + c.delete;
        total.add = total.add + c.add;
    }
    let orders = T::from_count(MAX_ORDER);
    Ok(SariComponents {
        keep: total.keep / orders,
        delete: total.delete / orders,
        add: total.add / orders,
    })
}

/// SARI in `[0, 100]` over raw token sequences.
pub fn sari_tokens<T: Scalar, S: AsRef<str>>(
    source: &[S],
    prediction: &[S],
    references: &[Vec<S>],
) -> Result<T> {
    Ok(sari_components::<T, S>(source, prediction, references)?.score())
}

fn doc_tokens(doc: &Document) -> Vec<&str> {
    doc.tokens().collect()
}

/// Document-level SARI over the non-padding tokens of each document.
pub fn sari<T: Scalar>(source: &Document, prediction: &Document, references: &[Document]) -> Result<T> {
    let refs: Vec<Vec<&str>> = references.iter().map(doc_tokens).collect();
    sari_tokens(&doc_tokens(source), &doc_tokens(prediction), &refs)
}

/// Length and sentence-count penalties applied by D-SARI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DocumentPenalties<T> {
    /// Scales the add component; below 1 when the output is shorter than the reference.
    pub short_output: T,
    /// Scales keep and delete; below 1 when the output is longer than the reference.
    pub long_output: T,
    /// Scales keep; below 1 when sentence counts differ.
    pub sentence_count: T,
}

impl<T: Real> DocumentPenalties<T> {
    /// Penalties from input, output and reference token lengths and output and
    /// reference sentence counts.
    pub fn new(
        input_len: T,
        output_len: T,
        reference_len: T,
        output_sentences: T,
        reference_sentences: T,
    ) -> Self {
        let one = T::one();
        let short_output = if output_len >= reference_len {
            one
        } else if output_len <= T::zero() {
            T::zero()
        } else {
            ((output_len - reference_len) / output_len).exp()
        };
        let long_output = if output_len <= reference_len {
            one
        } else {
            ((reference_len - output_len) / (input_len - reference_len).max(one)).exp()
        };
        let most = output_sentences.max(reference_sentences);
        let sentence_count = if most <= T::zero() {
            one
        } else {
            (-(reference_sentences - output_sentences).abs() / most).exp()
        };
        DocumentPenalties {
            short_output,
            long_output,
            sentence_count,
        }
    }
}

/// D-SARI from raw tokens and sentence counts. With several references the
/// reference length and sentence count are their means.
pub fn d_sari_tokens<T: Real, S: AsRef<str>>(
    source: &[S],
    prediction: &[S],
    references: &[Vec<S>],
    prediction_sentences: usize,
    reference_sentences: &[usize],
) -> Result<T> {
    if reference_sentences.len() != references.len() {
        return Err(Error::InvalidArgument(
            "one sentence count per reference is required".into(),
        ));
    }
    let c = sari_components::<T, S>(source, prediction, references)?;
    let k = T::from_count(references.len());
    let ref_len = references
        .iter()
        .fold(T::zero(), |acc, r| acc + T::from_count(r.len()))
        / k;
    let ref_sents = reference_sentences
        .iter()
        .fold(T::zero(), |acc, &n| acc + T::from_count(n))
        / k;
    let p = DocumentPenalties::new(
        T::from_count(source.len()),
        T::from_count(prediction.len()),
        ref_len,
        T::from_count(prediction_sentences),
        ref_sents,
    );
    Ok(SariComponents {
        keep: c.keep * p.long_output * p.sentence_count,
        delete: c.delete * p.long_output,
        add: c.add * p.short_output,
    }
    .score())
}

pub fn d_sari<T: Real>(source: &Document, prediction: &Document, references: &[Document]) -> Result<T> {
    let refs: Vec<Vec<&str>> = references.iter().map(doc_tokens).collect();
    let ref_sents: Vec<usize> = references.iter().map(Document::content_len).collect();
    d_sari_tokens(
        &doc_tokens(source),
        &doc_tokens(prediction),
        &refs,
        prediction.content_len(),
        &ref_sents,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    fn toks(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    #[test]
    fn perfect_match_scores_100() {
        let s = toks("a b c d");
        assert_eq!(sari_tokens::<Rational64, _>(&s, &s, &[s.clone()]).unwrap(), Rational64::from_integer(100));
        let r = toks("a a b");
        assert_eq!(
            sari_tokens::<Rational64, _>(&toks("a a a c b"), &r, &[r.clone()]).unwrap(),
            Rational64::from_integer(100)
        );
    }

    #[test]
    fn hand_traced_deletion_example() {
        // source "a b c d", prediction = reference = "a b d"
        // order 1: keep {a,b,d} all good: P=R=1; delete {c}: good; add: both empty -> 1
        // order 2: source {ab,bc,cd}, pred {ab,bd}: keep {ab} P=1, R=1 -> 1;
        //          delete {bc,cd}, ref lacks both -> 1; add {bd} in ref -> 1
        // order 3: source {abc,bcd}, pred {abd}: keep empty both -> 1; delete {abc,bcd} good -> 1;
        //          add {abd} in ref -> 1
        // order 4: source {abcd}, pred {}: keep empty both -> 1; delete {abcd} good -> 1;
        //          add empty both -> 1
        let v = sari_tokens::<Rational64, _>(&toks("a b c d"), &toks("a b d"), &[toks("a b d")]).unwrap();
        assert_eq!(v, Rational64::from_integer(100));
    }

    #[test]
    fn identity_against_different_reference() {
        // source = prediction = "a b c", reference = "a b"
        // order 1: keep sys {a,b,c}, good {a,b}: P=2/3; keep_all {a,b}: R=1 -> F1 = 4/5
        //          delete sys empty, reference deletes {c} -> 0; add empty both -> 1
        // order 2: keep sys {ab,bc}, good {ab}: P=1/2, R=1 -> 2/3; delete 0; add 1
        // order 3: keep sys {abc}, good none: P=0, keep_all empty: R=0 -> 0; delete 0 ({abc} deleted by ref); add 1
        // order 4: everything empty -> 1, 1, 1
        let keep = (Rational64::new(4, 5) + Rational64::new(2, 3) + Rational64::from_integer(1)) / 4;
        let delete = Rational64::new(1, 4);
        let add = Rational64::from_integer(1);
        let expected = (keep + delete + add) / 3 * 100;
        let v = sari_tokens::<Rational64, _>(&toks("a b c"), &toks("a b c"), &[toks("a b")]).unwrap();
        assert_eq!(v, expected);
    }

    #[test]
    fn duplicate_references_do_not_change_score() {
        let (s, p, r) = (toks("a b c a"), toks("a c c"), toks("b c a"));
        let one = sari_tokens::<Rational64, _>(&s, &p, &[r.clone()]).unwrap();
        let two = sari_tokens::<Rational64, _>(&s, &p, &[r.clone(), r.clone()]).unwrap();
        assert_eq!(one, two);
    }

    #[test]
    fn empty_reference_list() {
        let s = toks("a");
        assert!(matches!(sari_tokens::<f64, &str>(&s, &s, &[]), Err(Error::NoReference)));
        assert!(matches!(d_sari_tokens::<f64, &str>(&s, &s, &[], 1, &[]), Err(Error::NoReference)));
    }

    #[test]
    fn empty_prediction_is_scored() {
        let v = sari_tokens::<f64, _>(&toks("a b"), &[], &[toks("a")]).unwrap();
        assert!((0.0..=100.0).contains(&v));
    }

    #[test]
    fn penalties_are_one_at_equal_lengths() {
        let p = DocumentPenalties::new(12.0f64, 8.0, 8.0, 3.0, 3.0);
        assert_eq!((p.short_output, p.long_output, p.sentence_count), (1.0, 1.0, 1.0));
        let p = DocumentPenalties::new(12.0f64, 12.0, 8.0, 3.0, 2.0);
        assert!((p.long_output - (-1.0f64).exp()).abs() < 1e-15);
        assert!((p.sentence_count - (-1.0f64 / 3.0).exp()).abs() < 1e-15);
        let p = DocumentPenalties::new(12.0f64, 4.0, 8.0, 1.0, 1.0);
        assert!((p.short_output - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(DocumentPenalties::new(3.0f64, 0.0, 2.0, 0.0, 1.0).short_output, 0.0);
    }

    #[test]
    fn d_sari_documents() {
        let src = Document::framed(
            "s",
            "The old farmer will purchase the goat. The goat will consume grass and it will sleep. The end came.",
            10,
        )
        .unwrap();
        let reference = Document::framed(
            "r",
            "The farmer will buy the goat. The goat will eat grass. It will sleep.",
            10,
        )
        .unwrap();
        let refs = [reference.clone()];
        let perfect: f64 = d_sari(&src, &reference, &refs).unwrap();
        assert!((perfect - 100.0).abs() < 1e-12);
        let s: f64 = sari(&src, &src, &refs).unwrap();
        let d: f64 = d_sari(&src, &src, &refs).unwrap();
        assert!(d <= s);
        assert!(d < s, "identity output is longer than the reference, so it is penalized");
    }
}
