//! Invariant checking for coupled documents, and the report type shared with
//! game-data validation.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::domain::{CoupledDocument, Provenance, WType, WValue, SCHEMA_VERSION};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn push(&mut self, code: &str, message: impl Into<String>) {
        self.violations.push(Violation {
            code: code.to_string(),
            message: message.into(),
        });
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn codes(&self) -> Vec<&str> {
        self.violations.iter().map(|v| v.code.as_str()).collect()
    }

    pub fn has(&self, code: &str) -> bool {
        self.violations.iter().any(|v| v.code == code)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("no violations");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{}: {}", v.code, v.message)?;
        }
        Ok(())
    }
}

/// Every invariant violation in `doc`. Never mutates the input.
pub fn validate_coupled_document(doc: &CoupledDocument) -> ValidationReport {
    let mut r = ValidationReport::default();
    let nd = &doc.document;
    let n = nd.sentences.len();

    if doc.schema_version != SCHEMA_VERSION {
        r.push(
            "SCHEMA_VERSION",
            format!("expected {SCHEMA_VERSION}, found {}", doc.schema_version),
        );
    }

    let mut prev_end = 0;
    for (pos, s) in nd.sentences.iter().enumerate() {
        if s.index != pos {
            r.push("SENTENCE_INDEX", format!("sentence at position {pos} has index {}", s.index));
        }
        if s.span.start > s.span.end || s.span.end > nd.raw_text.len() || s.span.is_empty() {
            r.push("SENTENCE_SPAN", format!("sentence {pos} span {:?} invalid", s.span));
            continue;
        }
        if pos > 0 && s.span.start < prev_end {
            r.push("SENTENCE_ORDER", format!("sentence {pos} overlaps or precedes sentence {}", pos - 1));
        }
        prev_end = s.span.end;
        let mut tok_end = s.span.start;
        for t in &s.tokens {
            let ok = t.span.start >= tok_end
                && s.span.contains(&t.span)
                && t.span.slice(&nd.raw_text) == Some(t.text.as_str());
            if !ok {
                r.push(
                    "TOKEN_SPAN",
                    format!("token `{}` in sentence {pos} has bad span {:?}", t.text, t.span),
                );
            }
            tok_end = t.span.end.max(tok_end);
        }
    }

    for (mi, m) in doc.mentions.iter().enumerate() {
        let Some(sentence) = nd.sentences.get(m.sentence_index) else {
            r.push(
                "SENTENCE_RANGE",
                format!("mention {mi} references sentence {} of {n}", m.sentence_index),
            );
            continue;
        };
        if !sentence.span.contains(&m.span) {
            r.push(
                "SPAN_OUTSIDE_SENTENCE",
                format!("mention {mi} span {:?} outside sentence {}", m.span, m.sentence_index),
            );
        } else if m.span.slice(&nd.raw_text) != Some(m.surface.as_str()) {
            r.push(
                "SURFACE_MISMATCH",
                format!("mention {mi} surface `{}` does not match its span", m.surface),
            );
        }
        if m.value.w_type() != m.w_type {
            r.push(
                "VALUE_TYPE",
                format!("mention {mi} is {} but carries a {} value", m.w_type, m.value.w_type()),
            );
        }
        match (m.provenance, m.w_type) {
            (Provenance::Lexicon, t) if t != WType::Who => {
                r.push("PROVENANCE", format!("mention {mi}: LEXICON provenance on {t}"))
            }
            (Provenance::Classifier, t) if t != WType::What => {
                r.push("PROVENANCE", format!("mention {mi}: CLASSIFIER provenance on {t}"))
            }
            _ => {}
        }
        let confidence_ok = match m.provenance {
            Provenance::Lexicon | Provenance::Grammar => m.confidence == 1.0,
            Provenance::Classifier => (0.0..=1.0).contains(&m.confidence),
        };
        if !confidence_ok {
            r.push(
                "CONFIDENCE",
                format!("mention {mi}: confidence {} invalid for {}", m.confidence, m.provenance),
            );
        }
        if let WValue::When(w) = &m.value {
            for problem in w.check() {
                r.push("WHEN_VALUE", format!("mention {mi}: {problem}"));
            }
        }
        if let WValue::What(w) = &m.value {
            if w.quantity.is_some_and(|q| !(q >= 0.0 && q.is_finite())) {
                r.push("WHAT_QUANTITY", format!("mention {mi}: negative or non-finite quantity"));
            }
        }
        if !doc.viz_states.contains_key(&m.sentence_index) {
            r.push(
                "MISSING_VIZ_STATE",
                format!("no viz state for sentence {}", m.sentence_index),
            );
        }
        let indexed = doc
            .inverse_index
            .lookup(&m.value)
            .is_some_and(|set| set.contains(&m.sentence_index));
        if !indexed {
            r.push(
                "ROUND_TRIP",
                format!(
                    "mention {mi} (`{}`) not found in the inverse index for sentence {}",
                    m.surface, m.sentence_index
                ),
            );
        }
    }

    for &i in doc.viz_states.keys() {
        if i >= n {
            r.push("VIZ_STATE_RANGE", format!("viz state for sentence {i} of {n}"));
        }
    }
    for (key, set) in doc.inverse_index.all_sets() {
        if let Some(bad) = set.iter().find(|&&i| i >= n) {
            r.push("INDEX_RANGE", format!("{key} references sentence {bad} of {n}"));
        }
        if set.is_empty() && key != "clock_only" {
            r.push("INDEX_EMPTY", format!("{key} is empty"));
        }
    }
    r
}
