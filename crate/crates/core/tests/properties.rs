use num_rational::Rational64;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use simdoc::backend::align::{align, EditOp};
use simdoc::backend::{readability_features, ReadabilityClassifier};
use simdoc::coherence::{feature_rows, fit_rows, predict_coherence, CoherenceModel, TrainConfig};
use simdoc::corpus::{
    format_control_input, read_instances, strip_control_input, synthetic_coherence_examples, write_instances,
    ConsensusClass, SimplificationInstance, Split, Task,
};
use simdoc::loss::{partial_loss, total_loss, LossConfig, LossMode};
use simdoc::metrics::{d_sari_tokens, fkgl_from_rates, fre_from_rates, sari_tokens};
use simdoc::textproc::{count_syllables, frame_document, split_sentences, tokenize_words, Sentence, PAD_TOKEN};

fn word() -> impl Strategy<Value = String> {
    "[a-z]{1,10}"
}

fn sentence() -> impl Strategy<Value = String> {
    (prop::collection::vec(word(), 1..8), prop::sample::select(vec![".", "!", "?"])).prop_map(|(words, end)| {
        let mut s = words.join(" ");
        s[..1].make_ascii_uppercase();
        s.push_str(end);
        s
    })
}

fn text() -> impl Strategy<Value = String> {
    prop::collection::vec(sentence(), 1..8).prop_map(|s| s.join(" "))
}

fn abc(max: usize) -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d"]).prop_map(String::from), 0..=max)
}

fn rat(n: i64) -> Rational64 {
    Rational64::from_integer(n)
}

proptest! {
    #[test]
    fn syllables_are_at_least_one(w in "[A-Za-z]{1,15}") {
        prop_assert!(count_syllables(&w).unwrap() >= 1);
    }

    #[test]
    fn split_sentences_is_idempotent(t in text()) {
        let sentences = split_sentences(&t).unwrap();
        prop_assert_eq!(sentences.clone(), split_sentences(&t).unwrap());
        for s in &sentences {
            prop_assert_eq!(split_sentences(&s.text).unwrap(), vec![s.clone()]);
        }
    }

    #[test]
    fn retokenizing_reproduces_tokens(t in text()) {
        for s in split_sentences(&t).unwrap() {
            prop_assert_eq!(tokenize_words(&s.text), s.tokens);
        }
    }

    #[test]
    fn framing_is_idempotent(t in text(), k in 1usize..12) {
        let once = frame_document("d", split_sentences(&t).unwrap(), k).unwrap();
        let twice = frame_document("d", once.sentences.clone(), k).unwrap();
        prop_assert_eq!(&once, &twice);
        prop_assert_eq!(once.sentences.len(), k);
        prop_assert!(once.pad_count <= k);
        let first_pad = once.sentences.iter().position(|s| s.is_pad).unwrap_or(k);
        prop_assert!(once.sentences[first_pad..].iter().all(|s| s.is_pad && s.tokens == [PAD_TOKEN]));
        prop_assert!(once.tokens().all(|t| t != PAD_TOKEN));
    }

    #[test]
    fn readability_formulas_are_monotone(wps in 1u32..40, spw in 1u32..40, bump in 1u32..10) {
        let (w, s, b) = (f64::from(wps), f64::from(spw) / 10.0, f64::from(bump) / 10.0);
        prop_assert!(fkgl_from_rates(w, s + b) > fkgl_from_rates(w, s));
        prop_assert!(fkgl_from_rates(w + b, s) > fkgl_from_rates(w, s));
        prop_assert!(fre_from_rates(w, s + b) < fre_from_rates(w, s));
        prop_assert!(fre_from_rates(w + b, s) < fre_from_rates(w, s));
    }

    #[test]
    fn sari_is_bounded_and_reference_order_free(
        src in abc(6), pred in abc(6), r1 in abc(6), r2 in abc(6),
    ) {
        let refs = vec![r1.clone(), r2.clone()];
        let swapped = vec![r2.clone(), r1.clone()];
        let v: Rational64 = sari_tokens(&src, &pred, &refs).unwrap();
        prop_assert!(v >= rat(0) && v <= rat(100));
        prop_assert_eq!(v, sari_tokens(&src, &pred, &swapped).unwrap());

        let d: f64 = d_sari_tokens(&src, &pred, &refs, 2, &[1, 3]).unwrap();
        let d_swapped: f64 = d_sari_tokens(&src, &pred, &swapped, 2, &[3, 1]).unwrap();
        prop_assert!((0.0..=100.0).contains(&d));
        prop_assert!((d - d_swapped).abs() < 1e-9);
    }

    #[test]
    fn perfect_match_is_a_fixed_point(src in abc(8), r in abc(8).prop_filter("non-empty", |r| !r.is_empty())) {
        let v: Rational64 = sari_tokens(&src, &r, std::slice::from_ref(&r)).unwrap();
        prop_assert_eq!(v, rat(100));
        let d: f64 = d_sari_tokens(&src, &r, std::slice::from_ref(&r), 2, &[2]).unwrap();
        prop_assert!((d - 100.0).abs() < 1e-9);
    }

    #[test]
    fn coherence_bonus_never_increases_total(
        losses in prop::collection::vec((0i64..50, 0i64..50, any::<bool>()), 1..10),
        flip in any::<prop::sample::Index>(),
        delta_num in 1i64..=10,
    ) {
        let config = LossConfig::new(LossMode::SRC, Rational64::new(delta_num, 10)).unwrap();
        let build = |flags: &[bool]| {
            let samples = losses
                .iter()
                .zip(flags)
                .map(|(&(s, r, _), &c)| partial_loss(rat(s), Some(rat(r)), Some(c), &config).unwrap())
                .collect();
            total_loss(samples).unwrap().total
        };
        let mut flags: Vec<bool> = losses.iter().map(|l| l.2).collect();
        let i = flip.index(flags.len());
        flags[i] = false;
        let before = build(&flags);
        flags[i] = true;
        prop_assert!(build(&flags) <= before);
    }

    #[test]
    fn delta_one_collapses_gated_modes(s in 0i64..100, r in 0i64..100, c in any::<bool>()) {
        let one = Rational64::from_integer(1);
        let gated = |mode| LossConfig::new(mode, one).unwrap();
        let sc = partial_loss(rat(s), None, Some(c), &gated(LossMode::SC)).unwrap().partial;
        let plain = partial_loss(rat(s), None, None, &gated(LossMode::S)).unwrap().partial;
        prop_assert_eq!(sc, plain);
        let src = partial_loss(rat(s), Some(rat(r)), Some(c), &gated(LossMode::SRC)).unwrap().partial;
        let sr = partial_loss(rat(s), Some(rat(r)), None, &gated(LossMode::SR)).unwrap().partial;
        prop_assert_eq!(src, sr);
    }

    #[test]
    fn partial_loss_is_homogeneous(s in 0i64..100, r in 0i64..100, k in 0i64..20, c in any::<bool>()) {
        let config = LossConfig::new(LossMode::SRC, Rational64::new(9, 10)).unwrap();
        let base = partial_loss(rat(s), Some(rat(r)), Some(c), &config).unwrap().partial;
        let scaled = partial_loss(rat(k * s), Some(rat(k * r)), Some(c), &config).unwrap().partial;
        prop_assert_eq!(scaled, rat(k) * base);
    }

    #[test]
    fn total_loss_ignores_sample_order(losses in prop::collection::vec(0i64..100, 1..12), seed in any::<u64>()) {
        let config = LossConfig::<Rational64>::with_default_delta(LossMode::S);
        let mut samples: Vec<_> = losses
            .iter()
            .map(|&l| partial_loss(rat(l), None, None, &config).unwrap())
            .collect();
        let before = total_loss(samples.clone()).unwrap().total;
        samples.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(total_loss(samples).unwrap().total, before);
        prop_assert_eq!(before, rat(losses.iter().sum::<i64>()) / rat(losses.len() as i64));
    }

    #[test]
    fn consensus_follows_the_mean(ratings in prop::collection::vec(1u8..=3, 1..8)) {
        let mean = Rational64::new(ratings.iter().map(|&r| i64::from(r)).sum(), ratings.len() as i64);
        let expected = if mean <= Rational64::new(9, 5) {
            ConsensusClass::Low
        } else if mean <= Rational64::new(11, 5) {
            ConsensusClass::Medium
        } else {
            ConsensusClass::High
        };
        let class = ConsensusClass::from_ratings(&ratings).unwrap();
        prop_assert_eq!(class, expected);
        prop_assert_eq!(class.binary_label(), u8::from(expected == ConsensusClass::High));
    }

    #[test]
    fn control_input_carries_one_prefix(t in "[ -~]{1,40}", read in any::<bool>()) {
        let task = if read { Task::ReadClassify } else { Task::Simplify };
        let input = format_control_input(task, &t).unwrap();
        let prefixes = [Task::Simplify.prefix(), Task::ReadClassify.prefix()];
        prop_assert_eq!(prefixes.iter().filter(|p| input.starts_with(**p)).count(), 1);
        prop_assert_eq!(strip_control_input(task, &input), Some(t.as_str()));
    }

    #[test]
    fn corpus_file_round_trips(
        rows in prop::collection::vec((text(), text(), prop::option::of(1u8..=4), 0usize..3, 1usize..12), 0..6),
    ) {
        let splits = [Split::Train, Split::Valid, Split::Test];
        let instances: Vec<SimplificationInstance> = rows
            .iter()
            .enumerate()
            .map(|(i, (s, t, l, split, frame))| {
                SimplificationInstance::new(format!("x{i}"), s, t, *l, splits[*split], *frame).unwrap()
            })
            .collect();
        let mut buf = Vec::new();
        write_instances(&mut buf, &instances).unwrap();
        prop_assert_eq!(read_instances(buf.as_slice()).unwrap(), instances);
    }

    #[test]
    fn aligning_a_sequence_with_itself_copies(tokens in abc(12)) {
        let ops = align(&tokens, &tokens);
        prop_assert_eq!(ops.len(), tokens.len());
        for (i, op) in ops.iter().enumerate() {
            prop_assert_eq!(op, &EditOp::Copy { src: i, tgt: i });
        }
    }

    #[test]
    fn readability_softmax_sums_to_one(
        weights in prop::collection::vec(-20.0f64..20.0, 20),
        t in text(),
    ) {
        let mut clf = ReadabilityClassifier::zeros();
        for (k, w) in weights.iter().enumerate() {
            clf.weights[k / 5][k % 5] = *w;
        }
        let doc = simdoc::Document::framed("d", &t, 10).unwrap();
        let x = readability_features::<f64>(&doc).unwrap();
        let p = clf.probabilities(&x);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
        prop_assert!((1..=4).contains(&clf.classify(&x)));
    }

    #[test]
    fn raising_the_threshold_never_creates_positives(t in text(), lo in 0.0f64..1.0, hi in 0.0f64..1.0) {
        let doc = simdoc::Document::framed("d", &t, 10).unwrap();
        let mut model = CoherenceModel::<f64>::zeros();
        model.weights = [1.5, -0.5, 0.8, 0.2, -1.0, 0.1];
        model.threshold = lo.min(hi);
        let (low_label, p) = predict_coherence(&model, &doc).unwrap();
        model.threshold = lo.max(hi);
        let (high_label, q) = predict_coherence(&model, &doc).unwrap();
        prop_assert_eq!(p, q);
        prop_assert!(high_label <= low_label);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn coherence_training_ignores_row_order(seed in any::<u64>(), train_seed in 0u64..100) {
        let examples = synthetic_coherence_examples(5, 12, 10).unwrap();
        let rows = feature_rows::<f64>(&examples).unwrap();
        let mut permuted = rows.clone();
        permuted.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let config = TrainConfig { learning_rate: 0.1, epochs: 5, seed: train_seed };
        prop_assert_eq!(fit_rows(rows, &config).unwrap(), fit_rows(permuted, &config).unwrap());
    }
}

#[test]
fn pad_sentence_holds_only_the_pad_token() {
    let pad = Sentence::pad();
    assert!(pad.is_pad);
    assert_eq!(pad.tokens, [PAD_TOKEN]);
}
