//! Sentence queries answered by scanning every mention, with game clock
//! readings restated from the geometry oracle.

use std::collections::BTreeSet;

use storylink_core::coupler::Selector;
use storylink_core::domain::{CoupledDocument, WValue, WhenValue};

use crate::geometry_oracle;

/// Readings of a WHEN mention as elapsed intervals, from the restated clock.
pub fn readings(w: &WhenValue, max_period: u32) -> Vec<(u32, f64, f64)> {
    let periods: Vec<u32> = match w.quarter {
        Some(q) => vec![q],
        None => (1..=max_period).collect(),
    };
    periods
        .into_iter()
        .filter_map(|p| {
            let len = geometry_oracle::period_length(p);
            match w.seconds_remaining_in_quarter {
                None => Some((p, geometry_oracle::elapsed(p, len), geometry_oracle::elapsed(p, 0.0))),
                Some(c) if c <= len => {
                    let t = geometry_oracle::elapsed(p, c);
                    let end = if w.is_interval { geometry_oracle::elapsed(p, w.interval_end_seconds.unwrap()) } else { t };
                    Some((p, t.min(end), t.max(end)))
                }
                Some(_) => None,
            }
        })
        .collect()
}

/// Sentences satisfying `sel`, checked mention by mention.
pub fn brute_force(cd: &CoupledDocument, sel: &Selector) -> Vec<usize> {
    let max_period = cd
        .mentions
        .iter()
        .filter_map(|m| match &m.value {
            WValue::When(w) => w.quarter,
            _ => None,
        })
        .max()
        .unwrap_or(0)
        .max(4);
    let ms = |i: usize| cd.mentions.iter().filter(move |m| m.sentence_index == i);
    (0..cd.document.sentences.len())
        .filter(|&i| {
            let who = |set: &Option<BTreeSet<String>>| {
                set.as_ref().is_none_or(|set| {
                    ms(i).any(|m| matches!(&m.value, WValue::Who(w) if set.contains(&w.entity_id)))
                })
            };
            let stat = sel.stat_keys.as_ref().is_none_or(|set| {
                ms(i).any(|m| matches!(&m.value, WValue::What(w) if set.contains(&w.stat_key)))
            });
            let region = sel.regions.as_ref().is_none_or(|set| {
                ms(i).any(|m| matches!(&m.value, WValue::Where(w) if set.contains(&w.region)))
            });
            let quarter = sel.quarter.is_none_or(|q| {
                ms(i).any(|m| match &m.value {
                    WValue::When(w) => readings(w, max_period).iter().any(|r| r.0 == q),
                    _ => false,
                })
            });
            let time = sel.time_range.is_none_or(|(t0, t1)| {
                ms(i).any(|m| match &m.value {
                    WValue::When(w) => readings(w, max_period).iter().any(|r| r.1 <= t1 && t0 <= r.2),
                    _ => false,
                })
            });
            who(&sel.players) && who(&sel.teams) && stat && region && quarter && time
        })
        .collect()
}
