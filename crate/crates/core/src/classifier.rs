//! STAT/NO_STAT window classifier, bootstrapped from grammar labels.
//!
//! A window is the 5 non-punctuation tokens on each side of a center token.
//! Features are bag-of-words over the window with numbers collapsed to one
//! placeholder, plus a separate feature for the center token. The model is a
//! linear SVM (hinge loss, L2) fitted by stochastic subgradient descent.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{
    NarrativeDocument, Provenance, Sentence, Span, StatKey, Token, TokenKind, WMention, WType,
    WValue, WhatValue,
};
use crate::grammar::{match_grammar, normalize_number, Grammar};
use crate::segmenter::classify_token;

pub const PAD: &str = "⟨pad⟩";
pub const NUM: &str = "⟨num⟩";
pub const HALF_WINDOW: usize = 5;
pub const MODEL_FORMAT: &str = "1";

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("EMPTY_CORPUS: no sentences to build windows from")]
    EmptyCorpus,
    #[error("SINGLE_CLASS_INPUT: training data needs both STAT and NO_STAT windows")]
    SingleClassInput,
    #[error("EMPTY_TEST_SET: nothing to evaluate")]
    EmptyTestSet,
    #[error("UNREADABLE_FILE: {path}: {source}")]
    UnreadableFile {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("SCHEMA_MISMATCH: {0}")]
    SchemaMismatch(String),
    #[error("INVALID_MODEL: {0}")]
    InvalidModel(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum WindowLabel {
    Stat,
    NoStat,
}

impl WindowLabel {
    fn sign(self) -> f64 {
        match self {
            WindowLabel::Stat => 1.0,
            WindowLabel::NoStat => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSource {
    pub doc_id: String,
    pub sentence_index: usize,
    pub center_span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowExample {
    /// Five left then five right context norms, padded with [`PAD`].
    pub tokens: Vec<String>,
    pub center_token: String,
    pub label: WindowLabel,
    pub source: WindowSource,
}

fn is_number_norm(norm: &str) -> bool {
    matches!(
        classify_token(norm, norm),
        TokenKind::Number | TokenKind::NumberWord
    )
}

fn feature_norm(norm: &str) -> &str {
    if is_number_norm(norm) {
        NUM
    } else {
        norm
    }
}

impl WindowExample {
    /// Window around `tokens[center]` in a tokenized sentence.
    pub fn around(
        sentence: &Sentence,
        center: usize,
        doc_id: &str,
        label: WindowLabel,
    ) -> WindowExample {
        let toks = &sentence.tokens;
        let context = |it: &mut dyn Iterator<Item = &Token>| -> Vec<String> {
            let mut v: Vec<String> = it
                .filter(|t| t.kind != TokenKind::Punct)
                .take(HALF_WINDOW)
                .map(|t| t.norm.clone())
                .collect();
            v.resize(HALF_WINDOW, PAD.to_string());
            v
        };
        let mut left = context(&mut toks[..center].iter().rev());
        left.reverse();
        let right = context(&mut toks[center + 1..].iter());
        left.extend(right);
        WindowExample {
            tokens: left,
            center_token: toks[center].norm.clone(),
            label,
            source: WindowSource {
                doc_id: doc_id.to_string(),
                sentence_index: sentence.index,
                center_span: toks[center].span,
            },
        }
    }

    /// Feature strings with multiplicity; pads contribute nothing.
    pub fn feature_strings(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .tokens
            .iter()
            .filter(|t| t.as_str() != PAD)
            .map(|t| format!("w={}", feature_norm(t)))
            .collect();
        if self.center_token != PAD {
            out.push(format!("c={}", feature_norm(&self.center_token)));
        }
        out
    }
}

/// Sparse feature counts keyed by vocabulary id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub counts: BTreeMap<usize, f64>,
}

impl FeatureVector {
    pub fn dot(&self, w: &[f64]) -> f64 {
        self.counts.iter().map(|(&i, &c)| w[i] * c).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub reg_lambda: f64,
    pub epochs: u32,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            reg_lambda: 1e-4,
            epochs: 20,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub true_positive: usize,
    pub false_positive: usize,
    pub true_negative: usize,
    pub false_negative: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.true_positive + self.false_positive + self.true_negative + self.false_negative
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub accuracy: f64,
    /// 0 when nothing is predicted STAT.
    pub precision: f64,
    /// 0 when there are no STAT windows.
    pub recall: f64,
    pub confusion_matrix: ConfusionMatrix,
    /// Accuracy over sentences: a sentence is STAT if any of its windows is.
    pub sentence_accuracy: f64,
    pub n_sentences: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    pub n_train: usize,
    pub n_test: usize,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub sentence_accuracy: f64,
    pub n_test_sentences: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatClassifierModel {
    pub format_version: String,
    pub vocabulary: BTreeMap<String, usize>,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub hyperparams: Hyperparams,
    pub training_report: TrainingReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: WindowLabel,
    pub margin: f64,
    pub confidence: f64,
}

pub fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl StatClassifierModel {
    pub fn featurize(&self, window: &WindowExample) -> FeatureVector {
        featurize(&self.vocabulary, window)
    }

    pub fn validate(&self) -> Result<(), ClassifierError> {
        if self.weights.len() != self.vocabulary.len() {
            return Err(ClassifierError::InvalidModel(format!(
                "{} weights for {} vocabulary entries",
                self.weights.len(),
                self.vocabulary.len()
            )));
        }
        if self.vocabulary.values().any(|&i| i >= self.weights.len()) {
            return Err(ClassifierError::InvalidModel("vocabulary id out of range".into()));
        }
        if !self.bias.is_finite() || self.weights.iter().any(|w| !w.is_finite()) {
            return Err(ClassifierError::InvalidModel("non-finite parameter".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        crate::domain::to_canonical_json(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ClassifierError> {
        let m: StatClassifierModel =
            serde_json::from_str(text).map_err(|e| ClassifierError::SchemaMismatch(e.to_string()))?;
        if m.format_version != MODEL_FORMAT {
            return Err(ClassifierError::SchemaMismatch(format!(
                "model format {} (expected {MODEL_FORMAT})",
                m.format_version
            )));
        }
        m.validate()?;
        Ok(m)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ClassifierError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ClassifierError::UnreadableFile {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }
}

fn featurize(vocab: &BTreeMap<String, usize>, window: &WindowExample) -> FeatureVector {
    let mut fv = FeatureVector::default();
    for f in window.feature_strings() {
        if let Some(&id) = vocab.get(&f) {
            *fv.counts.entry(id).or_default() += 1.0;
        }
    }
    fv
}

/// Ids assigned in sorted feature order.
pub fn build_vocabulary<'a>(windows: impl IntoIterator<Item = &'a WindowExample>) -> BTreeMap<String, usize> {
    let all: BTreeSet<String> = windows
        .into_iter()
        .flat_map(|w| w.feature_strings())
        .collect();
    all.into_iter().enumerate().map(|(i, f)| (f, i)).collect()
}

/// Index of the token a WHAT mention is centered on: its first number, else
/// its first token.
fn mention_center(sentence: &Sentence, m: &WMention) -> Option<usize> {
    let inside: Vec<usize> = (0..sentence.tokens.len())
        .filter(|&i| m.span.contains(&sentence.tokens[i].span))
        .collect();
    inside
        .iter()
        .copied()
        .find(|&i| sentence.tokens[i].is_numeric())
        .or_else(|| inside.first().copied())
}

/// Grammar-labeled training windows.
///
/// Every grammar WHAT mention yields one STAT window. Sentences with no WHAT
/// mention yield NO_STAT windows centered on each of their numbers, then on
/// randomly drawn word tokens until the two classes are the same size or the
/// words run out.
pub fn build_windows(
    corpus: &[NarrativeDocument],
    g: &Grammar,
    seed: u64,
) -> Result<Vec<WindowExample>, ClassifierError> {
    if corpus.iter().all(|d| d.sentences.is_empty()) {
        return Err(ClassifierError::EmptyCorpus);
    }
    let mut positives = Vec::new();
    let mut negatives = Vec::new();
    // (doc, sentence, token) candidates for sampled negatives
    let mut word_pool: Vec<(usize, usize, usize)> = Vec::new();

    for (di, doc) in corpus.iter().enumerate() {
        for s in &doc.sentences {
            let whats: Vec<WMention> = match_grammar(s, &doc.raw_text, g)
                .into_iter()
                .filter(|m| m.w_type == WType::What)
                .collect();
            if whats.is_empty() {
                for (ti, t) in s.tokens.iter().enumerate() {
                    if t.is_numeric() {
                        negatives.push(WindowExample::around(s, ti, &doc.doc_id, WindowLabel::NoStat));
                    } else if t.kind == TokenKind::Word {
                        word_pool.push((di, s.index, ti));
                    }
                }
            } else {
                for m in &whats {
                    if let Some(ti) = mention_center(s, m) {
                        positives.push(WindowExample::around(s, ti, &doc.doc_id, WindowLabel::Stat));
                    }
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    word_pool.shuffle(&mut rng);
    let mut pool = word_pool.into_iter();
    while negatives.len() < positives.len() {
        let Some((di, si, ti)) = pool.next() else {
            break;
        };
        let s = &corpus[di].sentences[si];
        negatives.push(WindowExample::around(s, ti, &corpus[di].doc_id, WindowLabel::NoStat));
    }
    positives.extend(negatives);
    Ok(positives)
}

/// Pegasos-style subgradient descent on
/// `lambda/2 * |w|^2 + mean(max(0, 1 - y (w.x + b)))`.
///
/// The bias is handled as the weight of a constant feature and is
/// regularized with the rest. Returns the average of the iterates from the
/// second half of training.
pub fn fit_linear_svm(
    xs: &[FeatureVector],
    ys: &[f64],
    dim: usize,
    hp: &Hyperparams,
) -> (Vec<f64>, f64) {
    assert_eq!(xs.len(), ys.len());
    let lambda = hp.reg_lambda;
    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut w_avg = vec![0.0; dim];
    let mut b_avg = 0.0;
    let mut n_avg = 0.0;
    let total_steps = xs.len() as u64 * u64::from(hp.epochs);
    let radius = 1.0 / lambda.sqrt();

    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut t: u64 = 0;
    for _ in 0..hp.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let violated = ys[i] * (xs[i].dot(&w) + b) < 1.0;
            let shrink = 1.0 - eta * lambda;
            w.iter_mut().for_each(|wj| *wj *= shrink);
            b *= shrink;
            if violated {
                for (&j, &c) in &xs[i].counts {
                    w[j] += eta * ys[i] * c;
                }
                b += eta * ys[i];
            }
            let norm = (w.iter().map(|x| x * x).sum::<f64>() + b * b).sqrt();
            if norm > radius {
                let scale = radius / norm;
                w.iter_mut().for_each(|wj| *wj *= scale);
                b *= scale;
            }
            if 2 * t > total_steps {
                n_avg += 1.0;
                for (a, x) in w_avg.iter_mut().zip(&w) {
                    *a += (x - *a) / n_avg;
                }
                b_avg += (b - b_avg) / n_avg;
            }
        }
    }
    if n_avg == 0.0 {
        (w, b)
    } else {
        (w_avg, b_avg)
    }
}

/// Regularized hinge objective the fit minimizes.
pub fn svm_objective(xs: &[FeatureVector], ys: &[f64], w: &[f64], b: f64, lambda: f64) -> f64 {
    let reg = 0.5 * lambda * (w.iter().map(|x| x * x).sum::<f64>() + b * b);
    let loss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (1.0 - y * (x.dot(w) + b)).max(0.0))
        .sum();
    reg + loss / xs.len().max(1) as f64
}

/// Seeded 80/20 split: `(train, test)` index lists.
pub fn split_indices(n: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_test = (n as f64 * 0.2).round() as usize;
    let test = idx[..n_test].to_vec();
    let train = idx[n_test..].to_vec();
    (train, test)
}

fn check_labels<'a>(examples: impl IntoIterator<Item = &'a WindowExample>) -> Result<(), ClassifierError> {
    let labels: BTreeSet<WindowLabel> = examples.into_iter().map(|e| e.label).collect();
    if labels.len() < 2 {
        return Err(ClassifierError::SingleClassInput);
    }
    Ok(())
}

/// Fit on every example; the training report describes the training set.
pub fn fit(examples: &[WindowExample], hp: &Hyperparams) -> Result<StatClassifierModel, ClassifierError> {
    check_labels(examples)?;
    let refs: Vec<&WindowExample> = examples.iter().collect();
    let mut model = fit_refs(&refs, hp);
    let ev = evaluate(&model, examples)?;
    model.training_report = report(examples.len(), 0, &ev);
    Ok(model)
}

fn fit_refs(examples: &[&WindowExample], hp: &Hyperparams) -> StatClassifierModel {
    let vocabulary = build_vocabulary(examples.iter().copied());
    let xs: Vec<FeatureVector> = examples.iter().map(|e| featurize(&vocabulary, e)).collect();
    let ys: Vec<f64> = examples.iter().map(|e| e.label.sign()).collect();
    let (weights, bias) = fit_linear_svm(&xs, &ys, vocabulary.len(), hp);
    StatClassifierModel {
        format_version: MODEL_FORMAT.to_string(),
        vocabulary,
        weights,
        bias,
        hyperparams: *hp,
        training_report: report(0, 0, &Evaluation::zero()),
    }
}

fn report(n_train: usize, n_test: usize, ev: &Evaluation) -> TrainingReport {
    TrainingReport {
        n_train,
        n_test,
        accuracy: ev.accuracy,
        precision: ev.precision,
        recall: ev.recall,
        sentence_accuracy: ev.sentence_accuracy,
        n_test_sentences: ev.n_sentences,
    }
}

/// Fit on a seeded 80% split and report metrics on the held-out 20%.
pub fn train(examples: &[WindowExample], hp: &Hyperparams) -> Result<StatClassifierModel, ClassifierError> {
    check_labels(examples)?;
    let (train_idx, test_idx) = split_indices(examples.len(), hp.seed);
    let train_set: Vec<&WindowExample> = train_idx.iter().map(|&i| &examples[i]).collect();
    check_labels(train_set.iter().copied())?;
    let test_set: Vec<WindowExample> = test_idx.iter().map(|&i| examples[i].clone()).collect();
    let mut model = fit_refs(&train_set, hp);
    let ev = if test_set.is_empty() {
        Evaluation::zero()
    } else {
        evaluate(&model, &test_set)?
    };
    model.training_report = report(train_set.len(), test_set.len(), &ev);
    Ok(model)
}

/// Held-out windows for a given split seed, in split order.
pub fn held_out(examples: &[WindowExample], seed: u64) -> Vec<WindowExample> {
    split_indices(examples.len(), seed)
        .1
        .into_iter()
        .map(|i| examples[i].clone())
        .collect()
}

pub fn predict(window: &WindowExample, m: &StatClassifierModel) -> Prediction {
    let margin = m.featurize(window).dot(&m.weights) + m.bias;
    Prediction {
        label: if margin > 0.0 {
            WindowLabel::Stat
        } else {
            WindowLabel::NoStat
        },
        margin,
        confidence: logistic(margin),
    }
}

impl Evaluation {
    fn zero() -> Self {
        Evaluation {
            accuracy: 0.0,
            precision: 0.0,
            recall: 0.0,
            confusion_matrix: ConfusionMatrix::default(),
            sentence_accuracy: 0.0,
            n_sentences: 0,
        }
    }
}

pub fn evaluate(m: &StatClassifierModel, test: &[WindowExample]) -> Result<Evaluation, ClassifierError> {
    evaluate_with(test, |w| predict(w, m).label)
}

/// Metrics for an arbitrary window predictor.
pub fn evaluate_with(
    test: &[WindowExample],
    predictor: impl Fn(&WindowExample) -> WindowLabel,
) -> Result<Evaluation, ClassifierError> {
    if test.is_empty() {
        return Err(ClassifierError::EmptyTestSet);
    }
    let mut cm = ConfusionMatrix::default();
    // (doc, sentence) -> (gold STAT, predicted STAT)
    let mut sentences: BTreeMap<(&str, usize), (bool, bool)> = BTreeMap::new();
    for w in test {
        let pred = predictor(w);
        match (w.label, pred) {
            (WindowLabel::Stat, WindowLabel::Stat) => cm.true_positive += 1,
            (WindowLabel::Stat, WindowLabel::NoStat) => cm.false_negative += 1,
            (WindowLabel::NoStat, WindowLabel::Stat) => cm.false_positive += 1,
            (WindowLabel::NoStat, WindowLabel::NoStat) => cm.true_negative += 1,
        }
        let e = sentences
            .entry((w.source.doc_id.as_str(), w.source.sentence_index))
            .or_default();
        e.0 |= w.label == WindowLabel::Stat;
        e.1 |= pred == WindowLabel::Stat;
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let sentence_hits = sentences.values().filter(|(g, p)| g == p).count();
    Ok(Evaluation {
        accuracy: ratio(cm.true_positive + cm.true_negative, cm.total()),
        precision: ratio(cm.true_positive, cm.true_positive + cm.false_positive),
        recall: ratio(cm.true_positive, cm.true_positive + cm.false_negative),
        confusion_matrix: cm,
        sentence_accuracy: ratio(sentence_hits, sentences.len()),
        n_sentences: sentences.len(),
    })
}

/// Classifier WHAT mentions for tokens no other mention covers.
///
/// `existing` holds the sentence's lexicon and grammar mentions; any token
/// inside one of them is skipped, as is punctuation.
pub fn scan_for_missed_stats(
    sentence: &Sentence,
    existing: &[WMention],
    raw_text: &str,
    doc_id: &str,
    m: &StatClassifierModel,
    threshold: f64,
) -> Vec<WMention> {
    let mut out = Vec::new();
    for (ti, tok) in sentence.tokens.iter().enumerate() {
        if tok.kind == TokenKind::Punct || existing.iter().any(|e| e.span.overlaps(&tok.span)) {
            continue;
        }
        let window = WindowExample::around(sentence, ti, doc_id, WindowLabel::NoStat);
        let p = predict(&window, m);
        if p.confidence < threshold {
            continue;
        }
        let quantity = if tok.is_numeric() {
            normalize_number(std::slice::from_ref(tok)).ok()
        } else {
            None
        };
        out.push(WMention {
            sentence_index: sentence.index,
            w_type: WType::What,
            span: tok.span,
            surface: raw_text[tok.span.start..tok.span.end].to_string(),
            value: WValue::What(WhatValue {
                stat_key: StatKey::UnknownStat,
                quantity,
            }),
            provenance: Provenance::Classifier,
            confidence: p.confidence,
        });
    }
    out
}

/// Convenience wrapper: grammar mentions for the sentence are computed here.
pub fn scan_sentence(
    sentence: &Sentence,
    raw_text: &str,
    doc_id: &str,
    g: &Grammar,
    m: &StatClassifierModel,
    threshold: f64,
) -> Vec<WMention> {
    let grammar = match_grammar(sentence, raw_text, g);
    scan_for_missed_stats(sentence, &grammar, raw_text, doc_id, m, threshold)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(text: &str) -> NarrativeDocument {
        NarrativeDocument::parse("t", "", "", text)
    }

    #[test]
    fn window_shape_and_padding() {
        let d = doc("Durant scored 25 points.");
        let s = &d.sentences[0];
        let w = WindowExample::around(s, 2, "t", WindowLabel::Stat);
        assert_eq!(w.tokens.len(), 10);
        assert_eq!(w.center_token, "25");
        assert_eq!(&w.tokens[..5], &[PAD, PAD, PAD, "durant", "scored"]);
        assert_eq!(&w.tokens[5..], &["points", PAD, PAD, PAD, PAD]);
        let mut f = w.feature_strings();
        f.sort();
        assert_eq!(f, vec!["c=⟨num⟩", "w=durant", "w=points", "w=scored"]);
    }

    #[test]
    fn one_positive_window_for_durant_scored() {
        let g = Grammar::basketball();
        let ws = build_windows(&[doc("Durant scored 25 points.")], &g, 1).unwrap();
        let pos: Vec<_> = ws.iter().filter(|w| w.label == WindowLabel::Stat).collect();
        assert_eq!(pos.len(), 1);
        assert_eq!(pos[0].center_token, "25");
    }

    #[test]
    fn no_grammar_matches_no_positives() {
        let g = Grammar::basketball();
        let ws = build_windows(&[doc("The crowd was loud. Fans sang in 2017.")], &g, 1).unwrap();
        assert!(ws.iter().all(|w| w.label == WindowLabel::NoStat));
        assert_eq!(ws.len(), 1);
        assert!(matches!(build_windows(&[], &g, 1), Err(ClassifierError::EmptyCorpus)));
        assert!(matches!(build_windows(&[doc("")], &g, 1), Err(ClassifierError::EmptyCorpus)));
    }

    fn toy() -> Vec<WindowExample> {
        let texts = [
            ("Smith had 12 points tonight.", 2, WindowLabel::Stat),
            ("Jones added 9 points late.", 2, WindowLabel::Stat),
            ("Brown hit 4 points quickly.", 2, WindowLabel::Stat),
            ("Green made 7 points again.", 2, WindowLabel::Stat),
            ("The arena holds 20 thousand fans.", 3, WindowLabel::NoStat),
            ("It was game 3 of the series.", 3, WindowLabel::NoStat),
            ("They flew home on 5 June.", 4, WindowLabel::NoStat),
            ("Tickets cost 80 dollars each.", 2, WindowLabel::NoStat),
        ];
        texts
            .iter()
            .map(|(t, c, l)| WindowExample::around(&doc(t).sentences[0], *c, "t", *l))
            .collect()
    }

    #[test]
    fn separable_toy_set_is_learned() {
        let m = fit(&toy(), &Hyperparams { reg_lambda: 1e-2, epochs: 200, seed: 7 }).unwrap();
        let ev = evaluate(&m, &toy()).unwrap();
        assert_eq!(ev.accuracy, 1.0);
        assert_eq!(m.training_report.accuracy, 1.0);
    }

    #[test]
    fn single_class_and_empty_test_set() {
        let pos: Vec<_> = toy().into_iter().filter(|w| w.label == WindowLabel::Stat).collect();
        assert!(matches!(fit(&pos, &Hyperparams::default()), Err(ClassifierError::SingleClassInput)));
        assert!(matches!(train(&[], &Hyperparams::default()), Err(ClassifierError::SingleClassInput)));
        let m = fit(&toy(), &Hyperparams::default()).unwrap();
        assert!(matches!(evaluate(&m, &[]), Err(ClassifierError::EmptyTestSet)));
    }

    #[test]
    fn majority_predictor_on_balanced_set() {
        let ev = evaluate_with(&toy(), |_| WindowLabel::Stat).unwrap();
        assert_eq!(ev.accuracy, 0.5);
        assert_eq!(ev.recall, 1.0);
        assert_eq!(ev.precision, 0.5);
    }

    #[test]
    fn all_pad_window_follows_bias() {
        let m = fit(&toy(), &Hyperparams::default()).unwrap();
        let w = WindowExample {
            tokens: vec![PAD.to_string(); 10],
            center_token: PAD.to_string(),
            label: WindowLabel::NoStat,
            source: WindowSource {
                doc_id: "t".into(),
                sentence_index: 0,
                center_span: Span::new(0, 0),
            },
        };
        let p = predict(&w, &m);
        assert_eq!(p.margin, m.bias);
        assert_eq!(p.label == WindowLabel::Stat, m.bias > 0.0);
    }

    #[test]
    fn deterministic_weights() {
        let hp = Hyperparams { reg_lambda: 1e-3, epochs: 30, seed: 3 };
        let a = fit(&toy(), &hp).unwrap();
        let b = fit(&toy(), &hp).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        let bits = |m: &StatClassifierModel| m.weights.iter().map(|w| w.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn model_json_round_trip_and_validation() {
        let m = fit(&toy(), &Hyperparams::default()).unwrap();
        let back = StatClassifierModel::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        let mut bad = m.clone();
        bad.weights.pop();
        assert!(matches!(
            StatClassifierModel::from_json(&bad.to_json()),
            Err(ClassifierError::InvalidModel(_))
        ));
    }

    #[test]
    fn split_is_eighty_twenty_and_disjoint() {
        let (tr, te) = split_indices(100, 9);
        assert_eq!((tr.len(), te.len()), (80, 20));
        let all: BTreeSet<usize> = tr.iter().chain(&te).copied().collect();
        assert_eq!(all.len(), 100);
    }

    #[test]
    fn covered_sentence_yields_nothing() {
        let g = Grammar::basketball();
        let m = fit(&toy(), &Hyperparams::default()).unwrap();
        let d = doc("12 points");
        assert!(scan_sentence(&d.sentences[0], &d.raw_text, "t", &g, &m, 0.5).is_empty());
    }
}
