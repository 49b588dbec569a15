//! Story grammar: a line-oriented rule DSL compiled and matched over token
//! streams to extract WHAT (stats), WHEN (game times) and WHERE (court regions).
//!
//! ```text
//! # comment
//! let NUM = #NUMBER | #NUMBER_WORD
//! what points: <Capture n: $NUM> ("points" | "pts") => POINTS qty=n
//! when clock_left: <Capture c: #CLOCK> ("left" | "remaining") => clock=c
//! where paint: "in" "the" ("paint" | "key") => PAINT
//! ```
//!
//! Literals are quoted and lowercased; a multi-word literal expands to one
//! literal per token. `#CLASS` matches a token kind, `(a | b)` alternates,
//! `[...]` is optional, `<Capture name: ...>` records the matched tokens for
//! the emit clause, and `$NAME` splices a `let` definition.
//!
//! Matching scans left to right. At each token every rule is tried; the longest
//! match wins and ties go to the rule that appears first in the file. Matched
//! tokens are consumed, so mentions never overlap.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{
    NarrativeDocument, Provenance, Region, Sentence, Span, StatKey, Token, TokenKind, WMention,
    WType, WValue, WhatValue, WhenValue, WhereValue,
};
use crate::segmenter::{number_word_value, ordinal_value, tokenize, NUMBER_WORDS};

/// The basketball grammar shipped with the crate.
pub const BASKETBALL_GRAMMAR: &str = include_str!("../grammars/basketball.grammar");

pub const QUARTER_SECONDS: f64 = 720.0;
pub const OVERTIME_SECONDS: f64 = 300.0;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error("SYNTAX_ERROR at {line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("UNKNOWN_CLASS at {line}:{col}: `#{name}`")]
    UnknownClass { line: usize, col: usize, name: String },
    #[error("UNKNOWN_STAT_KEY at {line}:{col}: `{name}`")]
    UnknownStatKey { line: usize, col: usize, name: String },
    #[error("UNKNOWN_REGION at {line}:{col}: `{name}`")]
    UnknownRegion { line: usize, col: usize, name: String },
    #[error("DUPLICATE_RULE_NAME at line {line}: `{name}`")]
    DuplicateRuleName { line: usize, name: String },
    #[error("UNKNOWN_CAPTURE at line {line}: rule `{rule}` references `{name}`")]
    UnknownCapture {
        line: usize,
        rule: String,
        name: String,
    },
    #[error("UNKNOWN_DEFINITION at {line}:{col}: `${name}`")]
    UnknownDefinition { line: usize, col: usize, name: String },
    #[error("NESTED_CAPTURE at {line}:{col}: `{name}` inside another capture")]
    NestedCapture { line: usize, col: usize, name: String },
    #[error("INVALID_EMIT at line {line}: {message}")]
    InvalidEmit { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormalizeError {
    #[error("NOT_A_NUMBER: `{0}`")]
    NotANumber(String),
    #[error("OUT_OF_RANGE: {0}")]
    OutOfRange(String),
    #[error("NOT_A_PERIOD: `{0}`")]
    NotAPeriod(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TokenClass {
    Number,
    NumberWord,
    Clock,
    Ordinal,
}

impl TokenClass {
    fn parse(name: &str) -> Option<Self> {
        match name {
            "NUMBER" => Some(Self::Number),
            "NUMBER_WORD" => Some(Self::NumberWord),
            "CLOCK" => Some(Self::Clock),
            "ORDINAL" => Some(Self::Ordinal),
            _ => None,
        }
    }

    pub fn matches(&self, kind: TokenKind) -> bool {
        matches!(
            (self, kind),
            (Self::Number, TokenKind::Number)
                | (Self::NumberWord, TokenKind::NumberWord)
                | (Self::Clock, TokenKind::Clock)
                | (Self::Ordinal, TokenKind::Ordinal)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternAtom {
    /// Matches one token whose norm equals the text.
    Literal(String),
    Class(TokenClass),
    /// Two or more alternative sequences, tried in order.
    Alt(Vec<Vec<PatternAtom>>),
    Opt(Vec<PatternAtom>),
    Capture { name: String, body: Vec<PatternAtom> },
}

/// Where a WHEN field gets its value: a capture or a constant.
#[derive(Debug, Clone, PartialEq)]
pub enum ValueRef {
    Capture(String),
    Const(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum EmitSpec {
    What {
        stat_key: StatKey,
        quantity: Option<String>,
    },
    When {
        quarter: Option<ValueRef>,
        clock: Option<String>,
        minutes: Option<ValueRef>,
        seconds: Option<ValueRef>,
        interval: bool,
    },
    Where {
        region: Region,
    },
}

impl EmitSpec {
    fn capture_refs(&self) -> Vec<&str> {
        fn from_ref(r: &Option<ValueRef>) -> Option<&str> {
            match r {
                Some(ValueRef::Capture(c)) => Some(c.as_str()),
                _ => None,
            }
        }
        match self {
            EmitSpec::What { quantity, .. } => quantity.iter().map(String::as_str).collect(),
            EmitSpec::When {
                quarter,
                clock,
                minutes,
                seconds,
                ..
            } => from_ref(quarter)
                .into_iter()
                .chain(clock.as_deref())
                .chain(from_ref(minutes))
                .chain(from_ref(seconds))
                .collect(),
            EmitSpec::Where { .. } => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrammarRule {
    pub name: String,
    pub w_type: WType,
    pub pattern: Vec<PatternAtom>,
    pub emit: EmitSpec,
    /// Position in the source file; lower wins ties.
    pub priority: usize,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grammar {
    pub rules: Vec<GrammarRule>,
    pub number_word_table: BTreeMap<String, u32>,
}

impl Grammar {
    pub fn parse(source: &str) -> Result<Self, GrammarError> {
        parse_grammar(source)
    }

    pub fn basketball() -> Self {
        parse_grammar(BASKETBALL_GRAMMAR).expect("shipped grammar parses")
    }

    pub fn rule(&self, name: &str) -> Option<&GrammarRule> {
        self.rules.iter().find(|r| r.name == name)
    }

    pub fn count(&self, w_type: WType) -> usize {
        self.rules.iter().filter(|r| r.w_type == w_type).count()
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Lex {
    Ident(String),
    Str(String),
    Class(String),
    Def(String),
    Int(f64),
    Sym(&'static str),
}

impl fmt::Display for Lex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lex::Ident(s) => write!(f, "`{s}`"),
            Lex::Str(s) => write!(f, "\"{s}\""),
            Lex::Class(s) => write!(f, "`#{s}`"),
            Lex::Def(s) => write!(f, "`${s}`"),
            Lex::Int(v) => write!(f, "`{v}`"),
            Lex::Sym(s) => write!(f, "`{s}`"),
        }
    }
}

fn lex_line(line: &str, line_no: usize) -> Result<Vec<(Lex, usize)>, GrammarError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let syntax = |col: usize, message: String| GrammarError::Syntax {
        line: line_no,
        col,
        message,
    };
    let ident_char = |c: char| c.is_ascii_alphanumeric() || c == '_';
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        match c {
            '#' if chars.get(i + 1).is_some_and(|c| c.is_ascii_uppercase()) => {
                let start = i + 1;
                i = start;
                while i < chars.len() && ident_char(chars[i]) {
                    i += 1;
                }
                out.push((Lex::Class(chars[start..i].iter().collect()), col));
            }
            '#' => break,
            '$' => {
                let start = i + 1;
                i = start;
                while i < chars.len() && ident_char(chars[i]) {
                    i += 1;
                }
                if i == start {
                    return Err(syntax(col, "expected a definition name after `$`".into()));
                }
                out.push((Lex::Def(chars[start..i].iter().collect()), col));
            }
            '"' => {
                let start = i + 1;
                i = start;
                while i < chars.len() && chars[i] != '"' {
                    i += 1;
                }
                if i == chars.len() {
                    return Err(syntax(col, "unterminated string literal".into()));
                }
                out.push((Lex::Str(chars[start..i].iter().collect()), col));
                i += 1;
            }
            '=' if chars.get(i + 1) == Some(&'>') => {
                out.push((Lex::Sym("=>"), col));
                i += 2;
            }
            '(' | ')' | '[' | ']' | '<' | '>' | ':' | '|' | '=' => {
                let sym = match c {
                    '(' => "(",
                    ')' => ")",
                    '[' => "[",
                    ']' => "]",
                    '<' => "<",
                    '>' => ">",
                    ':' => ":",
                    '|' => "|",
                    _ => "=",
                };
                out.push((Lex::Sym(sym), col));
                i += 1;
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let v = text
                    .parse()
                    .map_err(|_| syntax(col, format!("bad number `{text}`")))?;
                out.push((Lex::Int(v), col));
            }
            c if ident_char(c) => {
                let start = i;
                while i < chars.len() && ident_char(chars[i]) {
                    i += 1;
                }
                out.push((Lex::Ident(chars[start..i].iter().collect()), col));
            }
            other => return Err(syntax(col, format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

struct LineParser<'a> {
    toks: Vec<(Lex, usize)>,
    pos: usize,
    line: usize,
    line_len: usize,
    defs: &'a HashMap<String, Vec<PatternAtom>>,
}

impl LineParser<'_> {
    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.line_len + 1, |t| t.1)
    }

    fn peek(&self) -> Option<&Lex> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn err(&self, message: impl Into<String>) -> GrammarError {
        GrammarError::Syntax {
            line: self.line,
            col: self.col(),
            message: message.into(),
        }
    }

    fn expect_sym(&mut self, sym: &str) -> Result<(), GrammarError> {
        match self.peek() {
            Some(Lex::Sym(s)) if *s == sym => {
                self.pos += 1;
                Ok(())
            }
            Some(other) => Err(self.err(format!("expected `{sym}`, found {other}"))),
            None => Err(self.err(format!("expected `{sym}`, found end of line"))),
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, GrammarError> {
        match self.peek() {
            Some(Lex::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            Some(other) => Err(self.err(format!("expected {what}, found {other}"))),
            None => Err(self.err(format!("expected {what}, found end of line"))),
        }
    }

    fn at_sym(&self, sym: &str) -> bool {
        matches!(self.peek(), Some(Lex::Sym(s)) if *s == sym)
    }

    /// alternation := sequence ('|' sequence)*
    fn alternation(&mut self, in_capture: bool) -> Result<Vec<PatternAtom>, GrammarError> {
        let mut branches = vec![self.sequence(in_capture)?];
        while self.at_sym("|") {
            self.pos += 1;
            branches.push(self.sequence(in_capture)?);
        }
        if branches.len() == 1 {
            Ok(branches.pop().unwrap())
        } else {
            Ok(vec![PatternAtom::Alt(branches)])
        }
    }

    fn sequence(&mut self, in_capture: bool) -> Result<Vec<PatternAtom>, GrammarError> {
        let mut seq = Vec::new();
        loop {
            match self.peek() {
                Some(Lex::Str(_))
                | Some(Lex::Class(_))
                | Some(Lex::Def(_))
                | Some(Lex::Sym("("))
                | Some(Lex::Sym("["))
                | Some(Lex::Sym("<")) => seq.extend(self.atom(in_capture)?),
                _ => break,
            }
        }
        if seq.is_empty() {
            return Err(self.err("expected a pattern"));
        }
        Ok(seq)
    }

    fn atom(&mut self, in_capture: bool) -> Result<Vec<PatternAtom>, GrammarError> {
        let col = self.col();
        let (tok, _) = self.toks[self.pos].clone();
        self.pos += 1;
        match tok {
            Lex::Str(text) => {
                let parts: Vec<PatternAtom> = tokenize(&text, 0)
                    .into_iter()
                    .map(|t| PatternAtom::Literal(t.norm))
                    .collect();
                if parts.is_empty() {
                    return Err(GrammarError::Syntax {
                        line: self.line,
                        col,
                        message: "empty literal".into(),
                    });
                }
                Ok(parts)
            }
            Lex::Class(name) => TokenClass::parse(&name)
                .map(|c| vec![PatternAtom::Class(c)])
                .ok_or(GrammarError::UnknownClass {
                    line: self.line,
                    col,
                    name,
                }),
            Lex::Def(name) => {
                let body = self.defs.get(&name).ok_or(GrammarError::UnknownDefinition {
                    line: self.line,
                    col,
                    name: name.clone(),
                })?;
                if in_capture && contains_capture(body) {
                    return Err(GrammarError::NestedCapture {
                        line: self.line,
                        col,
                        name,
                    });
                }
                Ok(body.clone())
            }
            Lex::Sym("(") => {
                let inner = self.alternation(in_capture)?;
                self.expect_sym(")")?;
                Ok(inner)
            }
            Lex::Sym("[") => {
                let inner = self.alternation(in_capture)?;
                self.expect_sym("]")?;
                Ok(vec![PatternAtom::Opt(inner)])
            }
            Lex::Sym("<") => {
                let kw = self.ident("`Capture`")?;
                if kw != "Capture" {
                    return Err(GrammarError::Syntax {
                        line: self.line,
                        col: col + 1,
                        message: format!("expected `Capture`, found `{kw}`"),
                    });
                }
                let name = self.ident("capture name")?;
                if in_capture {
                    return Err(GrammarError::NestedCapture {
                        line: self.line,
                        col,
                        name,
                    });
                }
                self.expect_sym(":")?;
                let body = self.alternation(true)?;
                self.expect_sym(">")?;
                Ok(vec![PatternAtom::Capture { name, body }])
            }
            other => Err(GrammarError::Syntax {
                line: self.line,
                col,
                message: format!("unexpected {other}"),
            }),
        }
    }

    fn value_ref(&mut self) -> Result<ValueRef, GrammarError> {
        match self.peek().cloned() {
            Some(Lex::Ident(s)) => {
                self.pos += 1;
                Ok(ValueRef::Capture(s))
            }
            Some(Lex::Int(v)) => {
                self.pos += 1;
                Ok(ValueRef::Const(v))
            }
            _ => Err(self.err("expected a capture name or a number")),
        }
    }

    fn emit(&mut self, w_type: WType) -> Result<EmitSpec, GrammarError> {
        let line = self.line;
        let invalid = |message: String| GrammarError::InvalidEmit { line, message };
        match w_type {
            WType::What => {
                let col = self.col();
                let key = self.ident("a stat key")?;
                let stat_key = key.parse::<StatKey>().map_err(|_| GrammarError::UnknownStatKey {
                    line,
                    col,
                    name: key,
                })?;
                let mut quantity = None;
                while self.peek().is_some() {
                    let field = self.ident("`qty`")?;
                    if field != "qty" {
                        return Err(invalid(format!("unknown WHAT field `{field}`")));
                    }
                    self.expect_sym("=")?;
                    quantity = Some(self.ident("capture name")?);
                }
                Ok(EmitSpec::What { stat_key, quantity })
            }
            WType::Where => {
                let col = self.col();
                let name = self.ident("a region")?;
                let region = name.parse::<Region>().map_err(|_| GrammarError::UnknownRegion {
                    line,
                    col,
                    name,
                })?;
                if let Some(extra) = self.peek() {
                    return Err(self.err(format!("unexpected {extra} after region")));
                }
                Ok(EmitSpec::Where { region })
            }
            WType::When => {
                let (mut quarter, mut clock, mut minutes, mut seconds) = (None, None, None, None);
                let mut interval = false;
                while self.peek().is_some() {
                    let field = self.ident("a WHEN field")?;
                    if field == "interval" {
                        interval = true;
                        continue;
                    }
                    self.expect_sym("=")?;
                    match field.as_str() {
                        "quarter" => quarter = Some(self.value_ref()?),
                        "clock" => clock = Some(self.ident("capture name")?),
                        "minutes" => minutes = Some(self.value_ref()?),
                        "seconds" => seconds = Some(self.value_ref()?),
                        other => return Err(invalid(format!("unknown WHEN field `{other}`"))),
                    }
                }
                let timed = [clock.is_some(), minutes.is_some(), seconds.is_some()]
                    .iter()
                    .filter(|b| **b)
                    .count();
                if quarter.is_none() && timed == 0 {
                    return Err(invalid("WHEN needs quarter, clock, minutes or seconds".into()));
                }
                if timed > 1 {
                    return Err(invalid("clock, minutes and seconds are exclusive".into()));
                }
                if interval && timed == 0 {
                    return Err(invalid("interval needs a clock, minutes or seconds".into()));
                }
                Ok(EmitSpec::When {
                    quarter,
                    clock,
                    minutes,
                    seconds,
                    interval,
                })
            }
            WType::Who => Err(invalid("WHO rules are not supported".into())),
        }
    }
}

fn contains_capture(atoms: &[PatternAtom]) -> bool {
    atoms.iter().any(|a| match a {
        PatternAtom::Capture { .. } => true,
        PatternAtom::Alt(branches) => branches.iter().any(|b| contains_capture(b)),
        PatternAtom::Opt(inner) => contains_capture(inner),
        _ => false,
    })
}

fn collect_captures<'a>(atoms: &'a [PatternAtom], out: &mut Vec<&'a str>) {
    for a in atoms {
        match a {
            PatternAtom::Capture { name, .. } => out.push(name),
            PatternAtom::Alt(branches) => branches.iter().for_each(|b| collect_captures(b, out)),
            PatternAtom::Opt(inner) => collect_captures(inner, out),
            _ => {}
        }
    }
}

/// Whether `atoms` can match without consuming a token.
fn nullable(atoms: &[PatternAtom]) -> bool {
    atoms.iter().all(|a| match a {
        PatternAtom::Literal(_) | PatternAtom::Class(_) => false,
        PatternAtom::Opt(_) => true,
        PatternAtom::Alt(branches) => branches.iter().any(|b| nullable(b)),
        PatternAtom::Capture { body, .. } => nullable(body),
    })
}

/// Compile grammar DSL source.
pub fn parse_grammar(source: &str) -> Result<Grammar, GrammarError> {
    let mut defs: HashMap<String, Vec<PatternAtom>> = HashMap::new();
    let mut rules: Vec<GrammarRule> = Vec::new();
    let mut names = HashSet::new();

    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        let toks = lex_line(line, line_no)?;
        if toks.is_empty() {
            continue;
        }
        let mut p = LineParser {
            toks,
            pos: 0,
            line: line_no,
            line_len: line.chars().count(),
            defs: &defs,
        };
        let head = p.ident("`what`, `when`, `where` or `let`")?;
        if head == "let" {
            let name = p.ident("definition name")?;
            p.expect_sym("=")?;
            let body = p.alternation(false)?;
            if let Some(extra) = p.peek() {
                return Err(p.err(format!("unexpected {extra}")));
            }
            defs.insert(name, body);
            continue;
        }
        let w_type = match head.as_str() {
            "what" => WType::What,
            "when" => WType::When,
            "where" => WType::Where,
            other => {
                return Err(GrammarError::Syntax {
                    line: line_no,
                    col: 1,
                    message: format!("unknown rule type `{other}`"),
                })
            }
        };
        let name = p.ident("rule name")?;
        p.expect_sym(":")?;
        let pattern = p.alternation(false)?;
        p.expect_sym("=>")?;
        let emit = p.emit(w_type)?;

        if nullable(&pattern) {
            return Err(GrammarError::Syntax {
                line: line_no,
                col: 1,
                message: format!("rule `{name}` can match the empty sequence"),
            });
        }
        let mut caps = Vec::new();
        collect_captures(&pattern, &mut caps);
        for r in emit.capture_refs() {
            if !caps.contains(&r) {
                return Err(GrammarError::UnknownCapture {
                    line: line_no,
                    rule: name,
                    name: r.to_string(),
                });
            }
        }
        if !names.insert(name.clone()) {
            return Err(GrammarError::DuplicateRuleName { line: line_no, name });
        }
        let priority = rules.len();
        rules.push(GrammarRule {
            name,
            w_type,
            pattern,
            emit,
            priority,
            line: line_no,
        });
    }

    Ok(Grammar {
        rules,
        number_word_table: NUMBER_WORDS
            .iter()
            .map(|&(w, v)| (w.to_string(), v))
            .collect(),
    })
}

// ---------------------------------------------------------------------------
// Matching
// ---------------------------------------------------------------------------

/// Captured token ranges `[start, end)` by capture name.
pub type Captures = Vec<(String, usize, usize)>;

fn match_seq(
    atoms: &[PatternAtom],
    toks: &[Token],
    pos: usize,
    caps: &Captures,
    k: &mut dyn FnMut(usize, &Captures),
) {
    let Some((first, rest)) = atoms.split_first() else {
        k(pos, caps);
        return;
    };
    match first {
        PatternAtom::Literal(lit) => {
            if toks.get(pos).is_some_and(|t| &t.norm == lit) {
                match_seq(rest, toks, pos + 1, caps, k);
            }
        }
        PatternAtom::Class(class) => {
            if toks.get(pos).is_some_and(|t| class.matches(t.kind)) {
                match_seq(rest, toks, pos + 1, caps, k);
            }
        }
        PatternAtom::Alt(branches) => {
            for b in branches {
                match_seq(b, toks, pos, caps, &mut |p, c| match_seq(rest, toks, p, c, k));
            }
        }
        PatternAtom::Opt(inner) => {
            // greedy: present before absent
            match_seq(inner, toks, pos, caps, &mut |p, c| match_seq(rest, toks, p, c, k));
            match_seq(rest, toks, pos, caps, k);
        }
        PatternAtom::Capture { name, body } => {
            match_seq(body, toks, pos, caps, &mut |p, c| {
                let mut c = c.clone();
                c.push((name.clone(), pos, p));
                match_seq(rest, toks, p, &c, k);
            });
        }
    }
}

/// Longest match of `rule` starting at token `pos`: `(end, captures)`.
/// Among paths reaching the same end the first in pattern order wins.
pub fn match_rule_at(rule: &GrammarRule, toks: &[Token], pos: usize) -> Option<(usize, Captures)> {
    let mut best: Option<(usize, Captures)> = None;
    match_seq(&rule.pattern, toks, pos, &Vec::new(), &mut |end, caps| {
        if end > pos && best.as_ref().is_none_or(|(b, _)| end > *b) {
            best = Some((end, caps.clone()));
        }
    });
    best
}

/// A rule match with token range and captures; value normalization applied.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleMatch {
    pub rule: usize,
    pub start: usize,
    pub end: usize,
    pub value: Result<WValue, NormalizeError>,
}

/// Left-to-right longest-match scan over a token slice.
pub fn scan_tokens(g: &Grammar, toks: &[Token]) -> Vec<RuleMatch> {
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < toks.len() {
        let mut best: Option<(usize, usize, Captures)> = None;
        for (ri, rule) in g.rules.iter().enumerate() {
            if let Some((end, caps)) = match_rule_at(rule, toks, pos) {
                if best.as_ref().is_none_or(|(_, e, _)| end > *e) {
                    best = Some((ri, end, caps));
                }
            }
        }
        match best {
            Some((ri, end, caps)) => {
                let value = emit_value(&g.rules[ri].emit, toks, &caps);
                out.push(RuleMatch {
                    rule: ri,
                    start: pos,
                    end,
                    value,
                });
                pos = end;
            }
            None => pos += 1,
        }
    }
    out
}

fn captured<'a>(toks: &'a [Token], caps: &Captures, name: &str) -> &'a [Token] {
    caps.iter()
        .rev()
        .find(|(n, _, _)| n == name)
        .map_or(&[][..], |&(_, s, e)| &toks[s..e])
}

fn emit_value(emit: &EmitSpec, toks: &[Token], caps: &Captures) -> Result<WValue, NormalizeError> {
    match emit {
        EmitSpec::What { stat_key, quantity } => {
            let quantity = match quantity {
                Some(name) => {
                    let t = captured(toks, caps, name);
                    // an optional capture that did not participate leaves no quantity
                    if t.is_empty() {
                        None
                    } else {
                        Some(normalize_number(t)?)
                    }
                }
                None => None,
            };
            Ok(WValue::What(WhatValue {
                stat_key: *stat_key,
                quantity,
            }))
        }
        EmitSpec::Where { region } => Ok(WValue::Where(normalize_where(*region))),
        EmitSpec::When {
            quarter,
            clock,
            minutes,
            seconds,
            interval,
        } => {
            let resolve = |r: &ValueRef| -> Result<Option<WhenPart>, NormalizeError> {
                Ok(match r {
                    ValueRef::Const(v) => Some(WhenPart::Const(*v)),
                    ValueRef::Capture(name) => {
                        let t = captured(toks, caps, name);
                        (!t.is_empty()).then(|| WhenPart::Tokens(t.to_vec()))
                    }
                })
            };
            let q = quarter.as_ref().map(resolve).transpose()?.flatten();
            let time = if let Some(c) = clock {
                let t = captured(toks, caps, c);
                (!t.is_empty()).then(|| TimeSource::Clock(t.to_vec()))
            } else if let Some(m) = minutes {
                resolve(m)?.map(TimeSource::Minutes)
            } else if let Some(s) = seconds {
                resolve(s)?.map(TimeSource::Seconds)
            } else {
                None
            };
            normalize_when(q, time, *interval).map(WValue::When)
        }
    }
}

/// Grammar-derived WHAT/WHEN/WHERE mentions in `sentence`.
pub fn match_grammar(sentence: &Sentence, raw_text: &str, g: &Grammar) -> Vec<WMention> {
    let toks = &sentence.tokens;
    scan_tokens(g, toks)
        .into_iter()
        .filter_map(|m| {
            let value = m.value.ok()?;
            let span = Span::new(toks[m.start].span.start, toks[m.end - 1].span.end);
            Some(WMention {
                sentence_index: sentence.index,
                w_type: value.w_type(),
                span,
                surface: raw_text[span.start..span.end].to_string(),
                value,
                provenance: Provenance::Grammar,
                confidence: 1.0,
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

/// Value of a NUMBER token or a (compound) number-word sequence.
pub fn normalize_number(tokens: &[Token]) -> Result<f64, NormalizeError> {
    let text = || {
        tokens
            .iter()
            .map(|t| t.text.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    };
    match tokens {
        [t] if t.kind == TokenKind::Number => t.norm.parse().map_err(|_| NormalizeError::NotANumber(text())),
        [t] if t.kind == TokenKind::NumberWord => number_word_value(&t.norm)
            .map(f64::from)
            .ok_or_else(|| NormalizeError::NotANumber(text())),
        [tens, units] if tens.kind == TokenKind::NumberWord && units.kind == TokenKind::NumberWord => {
            match (number_word_value(&tens.norm), number_word_value(&units.norm)) {
                (Some(t), Some(u)) if t >= 20 && t % 10 == 0 && (1..=9).contains(&u) => {
                    Ok(f64::from(t + u))
                }
                _ => Err(NormalizeError::NotANumber(text())),
            }
        }
        _ => Err(NormalizeError::NotANumber(text())),
    }
}

#[derive(Debug, Clone)]
pub enum WhenPart {
    Tokens(Vec<Token>),
    Const(f64),
}

#[derive(Debug, Clone)]
pub enum TimeSource {
    Clock(Vec<Token>),
    Minutes(WhenPart),
    Seconds(WhenPart),
}

fn part_number(part: &WhenPart) -> Result<f64, NormalizeError> {
    match part {
        WhenPart::Const(v) => Ok(*v),
        WhenPart::Tokens(t) => normalize_number(t),
    }
}

/// Period number from captured tokens: an ordinal ("fourth", "4th"),
/// "overtime"/"OT" (period 5), an ordinal followed by "overtime" (4 + n), or a
/// bare number.
pub fn normalize_period(part: &WhenPart) -> Result<u32, NormalizeError> {
    let toks = match part {
        WhenPart::Const(v) if *v >= 1.0 && v.fract() == 0.0 => return Ok(*v as u32),
        WhenPart::Const(v) => return Err(NormalizeError::NotAPeriod(v.to_string())),
        WhenPart::Tokens(t) => t,
    };
    let is_ot = |t: &Token| matches!(t.norm.as_str(), "overtime" | "ot");
    let text = || {
        toks.iter()
            .map(|t| t.text.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    };
    let q = match toks.as_slice() {
        [t] if is_ot(t) => 5,
        [t] if t.kind == TokenKind::Ordinal => {
            ordinal_value(&t.norm).ok_or_else(|| NormalizeError::NotAPeriod(text()))?
        }
        [t] if t.kind == TokenKind::Number => t
            .norm
            .parse()
            .map_err(|_| NormalizeError::NotAPeriod(text()))?,
        [o, t] if o.kind == TokenKind::Ordinal && is_ot(t) => {
            4 + ordinal_value(&o.norm).ok_or_else(|| NormalizeError::NotAPeriod(text()))?
        }
        _ => return Err(NormalizeError::NotAPeriod(text())),
    };
    if q == 0 {
        return Err(NormalizeError::OutOfRange(format!("period {q}")));
    }
    Ok(q)
}

fn clock_seconds(toks: &[Token]) -> Result<f64, NormalizeError> {
    match toks {
        [t] if t.kind == TokenKind::Clock => {
            let (m, s) = t.norm.split_once(':').expect("clock token");
            let m: f64 = m.parse().map_err(|_| NormalizeError::NotANumber(t.text.clone()))?;
            let s: f64 = s.parse().map_err(|_| NormalizeError::NotANumber(t.text.clone()))?;
            if s >= 60.0 {
                return Err(NormalizeError::OutOfRange(format!("clock {}", t.text)));
            }
            Ok(60.0 * m + s)
        }
        _ => Err(NormalizeError::NotANumber(
            toks.iter().map(|t| t.text.as_str()).collect::<Vec<_>>().join(" "),
        )),
    }
}

/// Build a [`WhenValue`] from a period part and/or a time part.
///
/// Minutes become `60·N` seconds remaining, clocks `M:SS` become `60·M + SS`.
/// Interval rules ("in the final three minutes") run from that clock to 0:00.
pub fn normalize_when(
    quarter: Option<WhenPart>,
    time: Option<TimeSource>,
    interval: bool,
) -> Result<WhenValue, NormalizeError> {
    let quarter = quarter.as_ref().map(normalize_period).transpose()?;
    let seconds = match &time {
        None => None,
        Some(TimeSource::Clock(t)) => Some(clock_seconds(t)?),
        Some(TimeSource::Minutes(p)) => Some(60.0 * part_number(p)?),
        Some(TimeSource::Seconds(p)) => Some(part_number(p)?),
    };
    if quarter.is_none() && seconds.is_none() {
        return Err(NormalizeError::OutOfRange("no period or clock captured".into()));
    }
    if let Some(s) = seconds {
        let limit = match quarter {
            Some(q) if q > 4 => OVERTIME_SECONDS,
            _ => QUARTER_SECONDS,
        };
        if !(0.0..=limit).contains(&s) {
            return Err(NormalizeError::OutOfRange(format!(
                "{s} seconds outside [0, {limit}]"
            )));
        }
    }
    let is_interval = interval && seconds.is_some();
    Ok(WhenValue {
        quarter,
        seconds_remaining_in_quarter: seconds,
        is_interval,
        interval_end_seconds: is_interval.then_some(0.0),
    })
}

pub fn normalize_where(region: Region) -> WhereValue {
    WhereValue { region }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SentenceLabel {
    Stat,
    NoStat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSentence {
    pub sentence_index: usize,
    pub label: SentenceLabel,
}

/// STAT iff the grammar yields at least one WHAT mention in the sentence.
pub fn label_sentences(doc: &NarrativeDocument, g: &Grammar) -> Vec<LabeledSentence> {
    doc.sentences
        .iter()
        .map(|s| {
            let stat = match_grammar(s, &doc.raw_text, g)
                .iter()
                .any(|m| m.w_type == WType::What);
            LabeledSentence {
                sentence_index: s.index,
                label: if stat {
                    SentenceLabel::Stat
                } else {
                    SentenceLabel::NoStat
                },
            }
        })
        .collect()
}
