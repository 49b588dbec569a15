//! Rule-based sentence segmentation and tokenization.
//!
//! Boundaries fall after `.`, `!` or `?` (plus any closing quotes or brackets)
//! when followed by end of text or by whitespace and a capitalized word, and at
//! blank lines. A period ending one of [`ABBREVIATIONS`] or a lone capital
//! initial ("J.", "R.") never ends a sentence.

use crate::domain::{Sentence, Span, Token, TokenKind};

pub const ABBREVIATIONS: [&str; 7] = ["Mr", "Dr", "Jr", "Sr", "St", "vs", "No"];

/// Number words and their values. Compounds ("twenty five") are summed by
/// [`crate::grammar::normalize_number`].
pub const NUMBER_WORDS: [(&str, u32); 27] = [
    ("one", 1),
    ("two", 2),
    ("three", 3),
    ("four", 4),
    ("five", 5),
    ("six", 6),
    ("seven", 7),
    ("eight", 8),
    ("nine", 9),
    ("ten", 10),
    ("eleven", 11),
    ("twelve", 12),
    ("thirteen", 13),
    ("fourteen", 14),
    ("fifteen", 15),
    ("sixteen", 16),
    ("seventeen", 17),
    ("eighteen", 18),
    ("nineteen", 19),
    ("twenty", 20),
    ("thirty", 30),
    ("forty", 40),
    ("fifty", 50),
    ("sixty", 60),
    ("seventy", 70),
    ("eighty", 80),
    ("ninety", 90),
];

pub const ORDINAL_WORDS: [(&str, u32); 10] = [
    ("first", 1),
    ("second", 2),
    ("third", 3),
    ("fourth", 4),
    ("fifth", 5),
    ("sixth", 6),
    ("seventh", 7),
    ("eighth", 8),
    ("ninth", 9),
    ("tenth", 10),
];

pub fn number_word_value(norm: &str) -> Option<u32> {
    NUMBER_WORDS
        .iter()
        .find(|(w, _)| *w == norm)
        .map(|&(_, v)| v)
}

/// Value of an ordinal token ("fourth", "4th").
pub fn ordinal_value(norm: &str) -> Option<u32> {
    if let Some(&(_, v)) = ORDINAL_WORDS.iter().find(|(w, _)| *w == norm) {
        return Some(v);
    }
    let digits_end = norm.find(|c: char| !c.is_ascii_digit())?;
    if digits_end == 0 {
        return None;
    }
    let (digits, suffix) = norm.split_at(digits_end);
    matches!(suffix, "st" | "nd" | "rd" | "th")
        .then(|| digits.parse().ok())
        .flatten()
}

fn is_clock(s: &str) -> bool {
    let Some((m, ss)) = s.split_once(':') else {
        return false;
    };
    (1..=2).contains(&m.len())
        && ss.len() == 2
        && m.bytes().all(|b| b.is_ascii_digit())
        && ss.bytes().all(|b| b.is_ascii_digit())
}

fn is_number_literal(s: &str) -> bool {
    let (int, frac) = match s.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (s, None),
    };
    !int.is_empty()
        && int.bytes().all(|b| b.is_ascii_digit())
        && frac.is_none_or(|f| !f.is_empty() && f.bytes().all(|b| b.is_ascii_digit()))
}

pub fn classify_token(text: &str, norm: &str) -> TokenKind {
    if is_clock(text) {
        TokenKind::Clock
    } else if is_number_literal(text) {
        TokenKind::Number
    } else if number_word_value(norm).is_some() {
        TokenKind::NumberWord
    } else if ordinal_value(norm).is_some() {
        TokenKind::Ordinal
    } else if text.chars().any(|c| c.is_alphanumeric()) || text == "'s" || text == "’s" {
        TokenKind::Word
    } else {
        TokenKind::Punct
    }
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '’'
}

/// Split one sentence into tokens. `base_offset` is the byte offset of
/// `sentence_text` within the document; token spans are document offsets.
pub fn tokenize(sentence_text: &str, base_offset: usize) -> Vec<Token> {
    let chars: Vec<(usize, char)> = sentence_text.char_indices().collect();
    let end_of = |i: usize| {
        chars
            .get(i)
            .map_or(sentence_text.len(), |&(off, _)| off)
    };
    let is_alnum_at = |i: usize| chars.get(i).is_some_and(|&(_, c)| c.is_alphanumeric());
    let is_digit_at = |i: usize| chars.get(i).is_some_and(|&(_, c)| c.is_ascii_digit());
    // An apostrophe starting a possessive or contraction "'s" that stands alone.
    let is_split_s = |i: usize| {
        chars.get(i).is_some_and(|&(_, c)| is_apostrophe(c))
            && chars.get(i + 1).is_some_and(|&(_, c)| c == 's' || c == 'S')
            && !is_alnum_at(i + 2)
    };

    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (start, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let mut j = i + 1;
        if c.is_alphanumeric() {
            loop {
                while is_alnum_at(j) {
                    j += 1;
                }
                let Some(&(_, next)) = chars.get(j) else { break };
                let joins = match next {
                    '-' => is_alnum_at(j + 1),
                    _ if is_apostrophe(next) => is_alnum_at(j + 1) && !is_split_s(j),
                    '.' | ':' => is_digit_at(j - 1) && is_digit_at(j + 1),
                    _ => false,
                };
                if !joins {
                    break;
                }
                j += 1;
            }
        } else if is_split_s(i) {
            j = i + 2;
        }
        let end = end_of(j);
        let text = &sentence_text[start..end];
        let norm = text.to_lowercase();
        let kind = classify_token(text, &norm);
        tokens.push(Token {
            text: text.to_string(),
            span: Span::new(base_offset + start, base_offset + end),
            norm,
            kind,
        });
        i = j;
    }
    tokens
}

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '!' | '?')
}

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | '”' | '’' | ')' | ']')
}

fn is_opener(c: char) -> bool {
    matches!(c, '"' | '\'' | '“' | '‘' | '(' | '[')
}

/// Whether the period at byte `dot` closes an abbreviation or an initial.
fn ends_abbreviation(text: &str, dot: usize) -> bool {
    let before = &text[..dot];
    let word_start = before
        .char_indices()
        .rev()
        .take_while(|(_, c)| c.is_alphabetic())
        .last()
        .map_or(dot, |(i, _)| i);
    let word = &before[word_start..];
    if word.is_empty() {
        return false;
    }
    let mut cs = word.chars();
    let single_cap = matches!((cs.next(), cs.next()), (Some(c), None) if c.is_uppercase());
    single_cap || ABBREVIATIONS.contains(&word)
}

/// Sentence spans (trimmed of surrounding whitespace) in document order.
pub fn segment_spans(raw_text: &str) -> Vec<Span> {
    let chars: Vec<(usize, char)> = raw_text.char_indices().collect();
    let mut cuts = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (off, c) = chars[i];
        if c == '\n' {
            // blank line = paragraph break
            let mut j = i + 1;
            while j < chars.len() && chars[j].1.is_whitespace() && chars[j].1 != '\n' {
                j += 1;
            }
            if j < chars.len() && chars[j].1 == '\n' {
                cuts.push(off);
                i = j + 1;
                continue;
            }
            i += 1;
            continue;
        }
        if !is_terminator(c) {
            i += 1;
            continue;
        }
        let mut j = i + 1;
        while j < chars.len() && is_terminator(chars[j].1) {
            j += 1;
        }
        let single_period = c == '.' && j == i + 1;
        while j < chars.len() && is_closer(chars[j].1) {
            j += 1;
        }
        let end = chars.get(j).map_or(raw_text.len(), |&(o, _)| o);
        let mut k = j;
        while k < chars.len() && chars[k].1.is_whitespace() {
            k += 1;
        }
        let boundary = if k == chars.len() {
            true
        } else if k == j {
            false
        } else {
            while k < chars.len() && is_opener(chars[k].1) {
                k += 1;
            }
            let capital = chars.get(k).is_some_and(|&(_, c)| c.is_uppercase());
            capital && !(single_period && ends_abbreviation(raw_text, off))
        };
        if boundary {
            cuts.push(end);
        }
        i = j;
    }

    let mut spans = Vec::new();
    let mut start = 0;
    for cut in cuts.into_iter().chain(std::iter::once(raw_text.len())) {
        if let Some(span) = trim_span(raw_text, start, cut) {
            spans.push(span);
        }
        start = cut;
    }
    spans
}

fn trim_span(text: &str, start: usize, end: usize) -> Option<Span> {
    let piece = &text[start..end];
    let lead = piece.len() - piece.trim_start().len();
    let trail = piece.len() - piece.trim_end().len();
    (lead + trail < piece.len()).then(|| Span::new(start + lead, end - trail))
}

/// Segment into sentences with empty token lists.
pub fn segment(raw_text: &str) -> Vec<Sentence> {
    segment_spans(raw_text)
        .into_iter()
        .enumerate()
        .map(|(index, span)| Sentence {
            index,
            span,
            tokens: Vec::new(),
        })
        .collect()
}

/// Segment and tokenize in one pass.
pub fn segment_and_tokenize(raw_text: &str) -> Vec<Sentence> {
    let mut sentences = segment(raw_text);
    for s in &mut sentences {
        s.tokens = tokenize(&raw_text[s.span.start..s.span.end], s.span.start);
    }
    sentences
}
