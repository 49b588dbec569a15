//! Shared data model: documents, tokens, 4W mentions and the coupled-document
//! artifact consumed by the service.
//!
//! All character spans are UTF-8 byte offsets into the document's `raw_text`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Version tag written into every serialized [`CoupledDocument`].
pub const SCHEMA_VERSION: &str = "1.0";

/// Half-open byte interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }

    /// Slice `text` by this span; `None` when out of range or not on a char boundary.
    pub fn slice<'a>(&self, text: &'a str) -> Option<&'a str> {
        text.get(self.start..self.end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TokenKind {
    Word,
    Number,
    NumberWord,
    Clock,
    Ordinal,
    Punct,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub span: Span,
    pub norm: String,
    pub kind: TokenKind,
}

impl Token {
    pub fn is_numeric(&self) -> bool {
        matches!(self.kind, TokenKind::Number | TokenKind::NumberWord)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub index: usize,
    pub span: Span,
    pub tokens: Vec<Token>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NarrativeDocument {
    pub doc_id: String,
    pub title: String,
    pub source: String,
    pub raw_text: String,
    pub sentences: Vec<Sentence>,
}

impl NarrativeDocument {
    /// Segment and tokenize `raw_text` into a ready-to-extract document.
    pub fn parse(
        doc_id: impl Into<String>,
        title: impl Into<String>,
        source: impl Into<String>,
        raw_text: impl Into<String>,
    ) -> Self {
        let raw_text = raw_text.into();
        let sentences = crate::segmenter::segment_and_tokenize(&raw_text);
        Self {
            doc_id: doc_id.into(),
            title: title.into(),
            source: source.into(),
            raw_text,
            sentences,
        }
    }

    pub fn sentence_text(&self, index: usize) -> Option<&str> {
        self.sentences
            .get(index)
            .and_then(|s| s.span.slice(&self.raw_text))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum WType {
    Who,
    What,
    When,
    Where,
}

impl fmt::Display for WType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WType::Who => "WHO",
            WType::What => "WHAT",
            WType::When => "WHEN",
            WType::Where => "WHERE",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Provenance {
    Lexicon,
    Grammar,
    Classifier,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Lexicon => "LEXICON",
            Provenance::Grammar => "GRAMMAR",
            Provenance::Classifier => "CLASSIFIER",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EntityKind {
    Player,
    Team,
    Coach,
    Referee,
}

/// Game statistic keys a WHAT mention can normalize to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StatKey {
    Points,
    Rebounds,
    Assists,
    Steals,
    Blocks,
    Turnovers,
    Fouls,
    Minutes,
    Fgm,
    Fga,
    Tpm,
    Tpa,
    Ftm,
    Fta,
    Touches,
    UnknownStat,
}

impl StatKey {
    pub const ALL: [StatKey; 16] = [
        StatKey::Points,
        StatKey::Rebounds,
        StatKey::Assists,
        StatKey::Steals,
        StatKey::Blocks,
        StatKey::Turnovers,
        StatKey::Fouls,
        StatKey::Minutes,
        StatKey::Fgm,
        StatKey::Fga,
        StatKey::Tpm,
        StatKey::Tpa,
        StatKey::Ftm,
        StatKey::Fta,
        StatKey::Touches,
        StatKey::UnknownStat,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            StatKey::Points => "POINTS",
            StatKey::Rebounds => "REBOUNDS",
            StatKey::Assists => "ASSISTS",
            StatKey::Steals => "STEALS",
            StatKey::Blocks => "BLOCKS",
            StatKey::Turnovers => "TURNOVERS",
            StatKey::Fouls => "FOULS",
            StatKey::Minutes => "MINUTES",
            StatKey::Fgm => "FGM",
            StatKey::Fga => "FGA",
            StatKey::Tpm => "TPM",
            StatKey::Tpa => "TPA",
            StatKey::Ftm => "FTM",
            StatKey::Fta => "FTA",
            StatKey::Touches => "TOUCHES",
            StatKey::UnknownStat => "UNKNOWN_STAT",
        }
    }
}

impl fmt::Display for StatKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StatKey {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StatKey::ALL
            .iter()
            .copied()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown stat key `{s}`"))
    }
}

/// Court regions a WHERE mention (or a shot) can refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Region {
    RestrictedArea,
    Paint,
    Midrange,
    ThreePoint,
    FreeThrowLine,
    Corner,
    Baseline,
}

impl Region {
    pub const ALL: [Region; 7] = [
        Region::RestrictedArea,
        Region::Paint,
        Region::Midrange,
        Region::ThreePoint,
        Region::FreeThrowLine,
        Region::Corner,
        Region::Baseline,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Region::RestrictedArea => "RESTRICTED_AREA",
            Region::Paint => "PAINT",
            Region::Midrange => "MIDRANGE",
            Region::ThreePoint => "THREE_POINT",
            Region::FreeThrowLine => "FREE_THROW_LINE",
            Region::Corner => "CORNER",
            Region::Baseline => "BASELINE",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Region {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Region::ALL
            .iter()
            .copied()
            .find(|r| r.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown region `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WhoValue {
    pub entity_id: String,
    pub kind: EntityKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhatValue {
    pub stat_key: StatKey,
    pub quantity: Option<f64>,
}

/// A time reference inside a game. Clock values count down from 720 s
/// (regulation quarter) or 300 s (overtime).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhenValue {
    pub quarter: Option<u32>,
    pub seconds_remaining_in_quarter: Option<f64>,
    pub is_interval: bool,
    pub interval_end_seconds: Option<f64>,
}

impl WhenValue {
    pub fn quarter(quarter: u32) -> Self {
        Self {
            quarter: Some(quarter),
            seconds_remaining_in_quarter: None,
            is_interval: false,
            interval_end_seconds: None,
        }
    }

    pub fn clock(seconds_remaining: f64) -> Self {
        Self {
            quarter: None,
            seconds_remaining_in_quarter: Some(seconds_remaining),
            is_interval: false,
            interval_end_seconds: None,
        }
    }

    /// Violated constraints, as human-readable strings.
    pub fn check(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.quarter.is_none() && self.seconds_remaining_in_quarter.is_none() {
            out.push("neither quarter nor clock set".to_string());
        }
        if let Some(q) = self.quarter {
            if q == 0 {
                out.push("quarter must be >= 1".to_string());
            }
        }
        if let Some(s) = self.seconds_remaining_in_quarter {
            if !(0.0..=720.0).contains(&s) {
                out.push(format!("seconds remaining {s} outside [0, 720]"));
            }
        }
        if self.is_interval {
            match (self.interval_end_seconds, self.seconds_remaining_in_quarter) {
                (Some(end), Some(start)) if end <= start => {}
                (Some(end), Some(start)) => {
                    out.push(format!("interval end {end} after interval start {start}"))
                }
                (None, _) => out.push("interval without end".to_string()),
                (Some(_), None) => out.push("interval without start clock".to_string()),
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WhereValue {
    pub region: Region,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum WValue {
    Who(WhoValue),
    What(WhatValue),
    When(WhenValue),
    Where(WhereValue),
}

impl WValue {
    pub fn w_type(&self) -> WType {
        match self {
            WValue::Who(_) => WType::Who,
            WValue::What(_) => WType::What,
            WValue::When(_) => WType::When,
            WValue::Where(_) => WType::Where,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WMention {
    pub sentence_index: usize,
    pub w_type: WType,
    pub span: Span,
    pub surface: String,
    pub value: WValue,
    pub provenance: Provenance,
    pub confidence: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VizState {
    pub players: BTreeSet<String>,
    pub teams: BTreeSet<String>,
    pub stat_keys: BTreeSet<StatKey>,
    pub time_marks: Vec<WhenValue>,
    pub regions: BTreeSet<Region>,
}

impl VizState {
    pub fn is_empty(&self) -> bool {
        self.players.is_empty()
            && self.teams.is_empty()
            && self.stat_keys.is_empty()
            && self.time_marks.is_empty()
            && self.regions.is_empty()
    }
}

/// W value → sentence indexes. `clock_only` holds sentences whose WHEN
/// mentions carry a clock but no period.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InverseIndex {
    pub by_entity: BTreeMap<String, BTreeSet<usize>>,
    pub by_stat: BTreeMap<StatKey, BTreeSet<usize>>,
    pub by_quarter: BTreeMap<u32, BTreeSet<usize>>,
    pub by_region: BTreeMap<Region, BTreeSet<usize>>,
    pub clock_only: BTreeSet<usize>,
}

impl InverseIndex {
    pub fn insert(&mut self, mention: &WMention) {
        let i = mention.sentence_index;
        match &mention.value {
            WValue::Who(who) => {
                self.by_entity
                    .entry(who.entity_id.clone())
                    .or_default()
                    .insert(i);
            }
            WValue::What(what) => {
                self.by_stat.entry(what.stat_key).or_default().insert(i);
            }
            WValue::When(when) => match when.quarter {
                Some(q) => {
                    self.by_quarter.entry(q).or_default().insert(i);
                }
                None => {
                    self.clock_only.insert(i);
                }
            },
            WValue::Where(w) => {
                self.by_region.entry(w.region).or_default().insert(i);
            }
        }
    }

    /// Sentences indexed under `value`'s key.
    pub fn lookup(&self, value: &WValue) -> Option<&BTreeSet<usize>> {
        match value {
            WValue::Who(who) => self.by_entity.get(&who.entity_id),
            WValue::What(what) => self.by_stat.get(&what.stat_key),
            WValue::When(when) => match when.quarter {
                Some(q) => self.by_quarter.get(&q),
                None => Some(&self.clock_only),
            },
            WValue::Where(w) => self.by_region.get(&w.region),
        }
    }

    pub(crate) fn all_sets(&self) -> impl Iterator<Item = (String, &BTreeSet<usize>)> {
        let entities = self
            .by_entity
            .iter()
            .map(|(k, v)| (format!("by_entity[{k}]"), v));
        let stats = self
            .by_stat
            .iter()
            .map(|(k, v)| (format!("by_stat[{k}]"), v));
        let quarters = self
            .by_quarter
            .iter()
            .map(|(k, v)| (format!("by_quarter[{k}]"), v));
        let regions = self
            .by_region
            .iter()
            .map(|(k, v)| (format!("by_region[{k}]"), v));
        entities
            .chain(stats)
            .chain(quarters)
            .chain(regions)
            .chain(std::iter::once(("clock_only".to_string(), &self.clock_only)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledDocument {
    pub schema_version: String,
    pub document: NarrativeDocument,
    pub mentions: Vec<WMention>,
    pub viz_states: BTreeMap<usize, VizState>,
    pub inverse_index: InverseIndex,
}

impl CoupledDocument {
    pub fn mentions_in(&self, sentence_index: usize) -> impl Iterator<Item = &WMention> {
        self.mentions
            .iter()
            .filter(move |m| m.sentence_index == sentence_index)
    }
}

/// Encode any serializable value as pretty JSON with lexicographically sorted keys.
pub fn to_canonical_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    // serde_json::Value maps are BTreeMaps, so going through Value sorts keys.
    let v = serde_json::to_value(value)?;
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}
