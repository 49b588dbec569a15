//! Binds extracted mentions to game data: per-sentence viz states, the
//! inverse index, and selector queries over sentences.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{
    CoupledDocument, EntityKind, InverseIndex, NarrativeDocument, Region, StatKey, VizState,
    WMention, WValue, WhenValue, SCHEMA_VERSION,
};
use crate::gamedata::{court, period_bounds, to_elapsed, GameData, ShotSelector};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CouplerError {
    #[error("SENTENCE_RANGE: sentence {index} requested from a {len}-sentence document")]
    SentenceRange { index: usize, len: usize },
    #[error("EMPTY_SELECTOR: at least one selector field must be set")]
    EmptySelector,
    #[error("INVALID_SELECTOR: {0}")]
    InvalidSelector(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CouplerWarning {
    pub code: String,
    pub mention_index: usize,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct Coupling {
    pub document: CoupledDocument,
    pub warnings: Vec<CouplerWarning>,
}

/// Canonical mention order: sentence, then span, then W type.
fn sort_mentions(mentions: &mut [WMention]) {
    mentions.sort_by(|a, b| {
        (a.sentence_index, a.span.start, a.span.end, a.w_type)
            .cmp(&(b.sentence_index, b.span.start, b.span.end, b.w_type))
    });
}

pub fn couple(
    doc: &NarrativeDocument,
    mentions: &[WMention],
    game: &GameData,
) -> Result<Coupling, CouplerError> {
    let n = doc.sentences.len();
    let mut mentions = mentions.to_vec();
    sort_mentions(&mut mentions);

    let roster = game.roster();
    let mut viz_states: BTreeMap<usize, VizState> =
        (0..n).map(|i| (i, VizState::default())).collect();
    let mut inverse_index = InverseIndex::default();
    let mut warnings = Vec::new();

    for (mi, m) in mentions.iter().enumerate() {
        let Some(state) = viz_states.get_mut(&m.sentence_index) else {
            return Err(CouplerError::SentenceRange {
                index: m.sentence_index,
                len: n,
            });
        };
        inverse_index.insert(m);
        match &m.value {
            WValue::Who(who) => {
                if !roster.contains(who.entity_id.as_str()) {
                    warnings.push(CouplerWarning {
                        code: "ENTITY_NOT_IN_GAME".into(),
                        mention_index: mi,
                        message: format!(
                            "`{}` ({}) is not on either roster; kept for highlighting only",
                            m.surface, who.entity_id
                        ),
                    });
                    continue;
                }
                if who.kind == EntityKind::Team {
                    state.teams.insert(who.entity_id.clone());
                } else {
                    state.players.insert(who.entity_id.clone());
                }
            }
            WValue::What(what) => {
                state.stat_keys.insert(what.stat_key);
            }
            WValue::When(when) => {
                if !state.time_marks.contains(when) {
                    state.time_marks.push(when.clone());
                }
            }
            WValue::Where(w) => {
                state.regions.insert(w.region);
            }
        }
    }

    Ok(Coupling {
        document: CoupledDocument {
            schema_version: SCHEMA_VERSION.to_string(),
            document: doc.clone(),
            mentions,
            viz_states,
            inverse_index,
        },
        warnings,
    })
}

pub fn viz_state_for(cd: &CoupledDocument, sentence_index: usize) -> Result<&VizState, CouplerError> {
    let len = cd.document.sentences.len();
    if sentence_index >= len {
        return Err(CouplerError::SentenceRange {
            index: sentence_index,
            len,
        });
    }
    cd.viz_states
        .get(&sentence_index)
        .ok_or(CouplerError::SentenceRange {
            index: sentence_index,
            len,
        })
}

/// Sentence query. Fields combine conjunctively; set members disjunctively.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Selector {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub players: Option<BTreeSet<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub teams: Option<BTreeSet<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stat_keys: Option<BTreeSet<StatKey>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quarter: Option<u32>,
    /// Elapsed seconds since tipoff, inclusive.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_range: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regions: Option<BTreeSet<Region>>,
}

impl Selector {
    pub fn is_empty(&self) -> bool {
        self.players.is_none()
            && self.teams.is_none()
            && self.stat_keys.is_none()
            && self.quarter.is_none()
            && self.time_range.is_none()
            && self.regions.is_none()
    }

    pub fn check(&self) -> Result<(), CouplerError> {
        if self.is_empty() {
            return Err(CouplerError::EmptySelector);
        }
        if let Some((t0, t1)) = self.time_range {
            if !(t0.is_finite() && t1.is_finite()) || t0 > t1 {
                return Err(CouplerError::InvalidSelector(format!(
                    "time_range [{t0}, {t1}] is not an ordered finite interval"
                )));
            }
        }
        if self.quarter == Some(0) {
            return Err(CouplerError::InvalidSelector("quarter must be >= 1".into()));
        }
        Ok(())
    }

    /// The narrowest selector that retrieves sentences carrying `value`.
    pub fn of_value(value: &WValue) -> Selector {
        let one = |s: &str| Some(BTreeSet::from([s.to_string()]));
        match value {
            WValue::Who(w) if w.kind == EntityKind::Team => Selector {
                teams: one(&w.entity_id),
                ..Default::default()
            },
            WValue::Who(w) => Selector {
                players: one(&w.entity_id),
                ..Default::default()
            },
            WValue::What(w) => Selector {
                stat_keys: Some(BTreeSet::from([w.stat_key])),
                ..Default::default()
            },
            WValue::When(w) => match w.quarter {
                Some(q) => Selector {
                    quarter: Some(q),
                    ..Default::default()
                },
                None => {
                    let t = w
                        .seconds_remaining_in_quarter
                        .and_then(|c| to_elapsed(1, c).ok())
                        .unwrap_or(0.0);
                    Selector {
                        time_range: Some((t, t)),
                        ..Default::default()
                    }
                }
            },
            WValue::Where(w) => Selector {
                regions: Some(BTreeSet::from([w.region])),
                ..Default::default()
            },
        }
    }
}

/// One period a WHEN mention can refer to, with its elapsed-time extent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedTime {
    pub period: u32,
    pub start: f64,
    pub end: f64,
}

/// Highest period referenced anywhere in the document, at least regulation.
pub fn max_period(cd: &CoupledDocument) -> u32 {
    cd.inverse_index
        .by_quarter
        .keys()
        .copied()
        .max()
        .unwrap_or(0)
        .max(court::REGULATION_PERIODS)
}

/// Elapsed-time readings of a WHEN value. A period alone covers the whole
/// period; a clock with no period is read in every period up to `max_period`.
pub fn resolve_when(when: &WhenValue, max_period: u32) -> Vec<ResolvedTime> {
    let periods: Vec<u32> = match when.quarter {
        Some(q) => vec![q],
        None => (1..=max_period).collect(),
    };
    let mut out = Vec::new();
    for p in periods {
        let Ok((start, len)) = period_bounds(p) else {
            continue;
        };
        let extent = match when.seconds_remaining_in_quarter {
            None => Some((start, start + len)),
            Some(clock) => {
                let end_clock = if when.is_interval {
                    when.interval_end_seconds.unwrap_or(clock)
                } else {
                    clock
                };
                match (to_elapsed(p, clock), to_elapsed(p, end_clock)) {
                    (Ok(a), Ok(b)) => Some((a.min(b), a.max(b))),
                    _ => None,
                }
            }
        };
        if let Some((start, end)) = extent {
            out.push(ResolvedTime { period: p, start, end });
        }
    }
    out
}

fn when_hits_range(when: &WhenValue, max_period: u32, (t0, t1): (f64, f64)) -> bool {
    resolve_when(when, max_period)
        .iter()
        .any(|r| r.start <= t1 && t0 <= r.end)
}

fn when_hits_quarter(when: &WhenValue, max_period: u32, q: u32) -> bool {
    resolve_when(when, max_period).iter().any(|r| r.period == q)
}

/// Sorted sentence indexes satisfying every populated field of `sel`.
pub fn query_sentences(cd: &CoupledDocument, sel: &Selector) -> Result<Vec<usize>, CouplerError> {
    sel.check()?;
    let idx = &cd.inverse_index;
    let maxp = max_period(cd);

    fn union<K: Ord>(map: &BTreeMap<K, BTreeSet<usize>>, keys: &BTreeSet<K>) -> BTreeSet<usize> {
        keys.iter()
            .filter_map(|k| map.get(k))
            .flatten()
            .copied()
            .collect()
    }

    let mut constraints: Vec<BTreeSet<usize>> = Vec::new();
    if let Some(p) = &sel.players {
        constraints.push(union(&idx.by_entity, p));
    }
    if let Some(t) = &sel.teams {
        constraints.push(union(&idx.by_entity, t));
    }
    if let Some(s) = &sel.stat_keys {
        constraints.push(union(&idx.by_stat, s));
    }
    if let Some(r) = &sel.regions {
        constraints.push(union(&idx.by_region, r));
    }
    // Time fields need the resolved readings, so they scan the mentions.
    if let Some(q) = sel.quarter {
        constraints.push(time_matches(cd, |w| when_hits_quarter(w, maxp, q)));
    }
    if let Some(range) = sel.time_range {
        constraints.push(time_matches(cd, |w| when_hits_range(w, maxp, range)));
    }

    let mut it = constraints.into_iter();
    let first = it.next().unwrap_or_default();
    let result = it.fold(first, |acc, c| acc.intersection(&c).copied().collect());
    Ok(result.into_iter().collect())
}

fn time_matches(cd: &CoupledDocument, pred: impl Fn(&WhenValue) -> bool) -> BTreeSet<usize> {
    cd.mentions
        .iter()
        .filter_map(|m| match &m.value {
            WValue::When(w) if pred(w) => Some(m.sentence_index),
            _ => None,
        })
        .collect()
}

/// Shot filter for a sentence's viz state: its players, its single period if
/// it names exactly one, and its regions.
pub fn shot_selector_for(state: &VizState) -> ShotSelector {
    let quarters: BTreeSet<u32> = state.time_marks.iter().filter_map(|w| w.quarter).collect();
    ShotSelector {
        players: (!state.players.is_empty()).then(|| state.players.clone()),
        teams: (state.players.is_empty() && !state.teams.is_empty()).then(|| state.teams.clone()),
        quarter: (quarters.len() == 1).then(|| *quarters.iter().next().unwrap()),
        time_range: None,
        regions: (!state.regions.is_empty()).then(|| state.regions.clone()),
        made: None,
    }
}
