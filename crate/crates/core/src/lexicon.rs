//! Closed-world WHO extraction from a league lexicon.
//!
//! Aliases are tokenized with the same tokenizer as the narrative and compiled
//! into a trie keyed by token norms. Matching is leftmost, then longest.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{EntityKind, Provenance, Sentence, WMention, WType, WValue, WhoValue};
use crate::segmenter::tokenize;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("UNREADABLE_FILE: {path}: {source}")]
    UnreadableFile {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("MISSING_FIELD: entry {entry}: {detail}")]
    MissingField { entry: String, detail: String },
    #[error("DUPLICATE_ALIAS: alias `{alias}` is shared by `{first}` and `{second}`")]
    DuplicateAlias {
        alias: String,
        first: String,
        second: String,
    },
    #[error("DUPLICATE_ID: entity id `{0}` appears more than once")]
    DuplicateId(String),
}

/// On-disk lexicon entry: `{"id","name","kind","aliases":[…],"team":…}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconEntry {
    #[serde(rename = "id")]
    pub entity_id: String,
    #[serde(rename = "name")]
    pub canonical_name: String,
    pub kind: EntityKind,
    #[serde(default)]
    pub aliases: Vec<String>,
    #[serde(rename = "team", default, skip_serializing_if = "Option::is_none")]
    pub team_id: Option<String>,
}

#[derive(Debug, Deserialize)]
struct LexiconFile {
    entities: Vec<serde_json::Value>,
}

#[derive(Debug, Default)]
struct TrieNode {
    children: HashMap<String, TrieNode>,
    /// Index into `EntityLexicon::entries` when an alias ends here.
    terminal: Option<usize>,
}

#[derive(Debug, Default)]
pub struct EntityLexicon {
    entries: Vec<LexiconEntry>,
    root: TrieNode,
    max_alias_tokens: usize,
}

fn alias_key(alias: &str) -> Vec<String> {
    tokenize(alias, 0).into_iter().map(|t| t.norm).collect()
}

impl EntityLexicon {
    /// Validate entries and compile the alias trie. The canonical name is always
    /// matched as an alias.
    pub fn new(entries: Vec<LexiconEntry>) -> Result<Self, LexiconError> {
        let mut lex = EntityLexicon::default();
        let mut seen_ids = BTreeSet::new();
        let mut owners: HashMap<Vec<String>, usize> = HashMap::new();
        for (idx, entry) in entries.iter().enumerate() {
            if entry.entity_id.trim().is_empty() {
                return Err(LexiconError::MissingField {
                    entry: format!("#{idx}"),
                    detail: "empty id".into(),
                });
            }
            if !seen_ids.insert(entry.entity_id.clone()) {
                return Err(LexiconError::DuplicateId(entry.entity_id.clone()));
            }
            if entry.kind == EntityKind::Player && entry.team_id.is_none() {
                return Err(LexiconError::MissingField {
                    entry: entry.entity_id.clone(),
                    detail: "PLAYER entries need `team`".into(),
                });
            }
            for alias in std::iter::once(&entry.canonical_name).chain(&entry.aliases) {
                let key = alias_key(alias);
                if key.is_empty() {
                    return Err(LexiconError::MissingField {
                        entry: entry.entity_id.clone(),
                        detail: "empty alias".into(),
                    });
                }
                match owners.get(&key) {
                    Some(&other) if other != idx => {
                        return Err(LexiconError::DuplicateAlias {
                            alias: alias.clone(),
                            first: entries[other].entity_id.clone(),
                            second: entry.entity_id.clone(),
                        })
                    }
                    Some(_) => continue,
                    None => {}
                }
                lex.max_alias_tokens = lex.max_alias_tokens.max(key.len());
                let mut node = &mut lex.root;
                for part in &key {
                    node = node.children.entry(part.clone()).or_default();
                }
                node.terminal = Some(idx);
                owners.insert(key, idx);
            }
        }
        lex.entries = entries;
        Ok(lex)
    }

    pub fn from_json(text: &str) -> Result<Self, LexiconError> {
        let file: LexiconFile =
            serde_json::from_str(text).map_err(|e| LexiconError::MissingField {
                entry: "<file>".into(),
                detail: e.to_string(),
            })?;
        let mut entries = Vec::with_capacity(file.entities.len());
        for (idx, raw) in file.entities.into_iter().enumerate() {
            let name = raw
                .get("id")
                .and_then(|v| v.as_str())
                .map_or_else(|| format!("#{idx}"), str::to_string);
            let entry: LexiconEntry =
                serde_json::from_value(raw).map_err(|e| LexiconError::MissingField {
                    entry: name,
                    detail: e.to_string(),
                })?;
            entries.push(entry);
        }
        Self::new(entries)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LexiconError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| LexiconError::UnreadableFile {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    pub fn get(&self, entity_id: &str) -> Option<&LexiconEntry> {
        self.entries.iter().find(|e| e.entity_id == entity_id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn count_kind(&self, kind: EntityKind) -> usize {
        self.entries.iter().filter(|e| e.kind == kind).count()
    }

    /// True when `norms` (a tokenized, lowercased alias) names `entity_id`.
    pub fn is_alias_of(&self, norms: &[String], entity_id: &str) -> bool {
        let mut node = &self.root;
        for n in norms {
            match node.children.get(n) {
                Some(next) => node = next,
                None => return false,
            }
        }
        node.terminal
            .is_some_and(|i| self.entries[i].entity_id == entity_id)
    }

    /// Longest alias starting at token `start`: `(entry index, token count)`.
    fn longest_at(&self, norms: &[&str], start: usize) -> Option<(usize, usize)> {
        let mut node = &self.root;
        let mut best = None;
        for (offset, norm) in norms[start..].iter().enumerate() {
            match node.children.get(*norm) {
                Some(next) => node = next,
                None => break,
            }
            if let Some(entry) = node.terminal {
                best = Some((entry, offset + 1));
            }
        }
        best
    }
}

/// WHO mentions in `sentence`, non-overlapping, in token order.
pub fn match_who(sentence: &Sentence, raw_text: &str, lex: &EntityLexicon) -> Vec<WMention> {
    let norms: Vec<&str> = sentence.tokens.iter().map(|t| t.norm.as_str()).collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < norms.len() {
        let Some((entry_idx, len)) = lex.longest_at(&norms, i) else {
            i += 1;
            continue;
        };
        let entry = &lex.entries[entry_idx];
        let span = crate::domain::Span::new(
            sentence.tokens[i].span.start,
            sentence.tokens[i + len - 1].span.end,
        );
        out.push(WMention {
            sentence_index: sentence.index,
            w_type: WType::Who,
            span,
            surface: raw_text[span.start..span.end].to_string(),
            value: WValue::Who(WhoValue {
                entity_id: entry.entity_id.clone(),
                kind: entry.kind,
            }),
            provenance: Provenance::Lexicon,
            confidence: 1.0,
        });
        i += len;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::NarrativeDocument;

    fn entry(id: &str, kind: EntityKind, aliases: &[&str]) -> LexiconEntry {
        LexiconEntry {
            entity_id: id.into(),
            canonical_name: aliases[0].into(),
            kind,
            aliases: aliases[1..].iter().map(|s| s.to_string()).collect(),
            team_id: (kind == EntityKind::Player).then(|| "gsw".to_string()),
        }
    }

    fn small() -> EntityLexicon {
        EntityLexicon::new(vec![
            entry("durant", EntityKind::Player, &["Kevin Durant", "Durant", "KD"]),
            entry("gsw", EntityKind::Team, &["Golden State Warriors", "Warriors", "Golden State"]),
        ])
        .unwrap()
    }

    fn who_ids(text: &str, lex: &EntityLexicon) -> Vec<(String, String)> {
        let doc = NarrativeDocument::parse("d", "", "", text);
        doc.sentences
            .iter()
            .flat_map(|s| match_who(s, &doc.raw_text, lex))
            .map(|m| match m.value {
                WValue::Who(w) => (m.surface, w.entity_id),
                _ => unreachable!(),
            })
            .collect()
    }

    #[test]
    fn longest_match_wins() {
        let got = who_ids("Kevin Durant and the Golden State Warriors won.", &small());
        assert_eq!(
            got,
            vec![
                ("Kevin Durant".to_string(), "durant".to_string()),
                ("Golden State Warriors".to_string(), "gsw".to_string()),
            ]
        );
    }

    #[test]
    fn case_insensitive_and_possessive() {
        let got = who_ids("DURANT's night. kd again.", &small());
        assert_eq!(got.len(), 2);
        assert_eq!(got[0].0, "DURANT");
        assert_eq!(got[1].0, "kd");
    }

    #[test]
    fn no_roster_words() {
        assert!(who_ids("The crowd was loud all night.", &small()).is_empty());
    }

    #[test]
    fn empty_lexicon_matches_nothing() {
        let lex = EntityLexicon::from_json(r#"{"entities":[]}"#).unwrap();
        assert!(lex.is_empty());
        assert!(who_ids("Durant scored.", &lex).is_empty());
    }

    #[test]
    fn duplicate_alias_is_rejected() {
        let err = EntityLexicon::new(vec![
            entry("steph", EntityKind::Player, &["Stephen Curry", "Curry"]),
            entry("seth", EntityKind::Player, &["Seth Curry", "curry"]),
        ])
        .unwrap_err();
        match err {
            LexiconError::DuplicateAlias { first, second, .. } => {
                assert_eq!((first.as_str(), second.as_str()), ("steph", "seth"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn player_without_team_is_missing_field() {
        let json = r#"{"entities":[{"id":"x","name":"X Y","kind":"PLAYER","aliases":[]}]}"#;
        assert!(matches!(
            EntityLexicon::from_json(json),
            Err(LexiconError::MissingField { .. })
        ));
        let json = r#"{"entities":[{"id":"x","kind":"TEAM"}]}"#;
        match EntityLexicon::from_json(json) {
            Err(LexiconError::MissingField { entry, .. }) => assert_eq!(entry, "x"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unreadable_file() {
        assert!(matches!(
            EntityLexicon::load("/nonexistent/lexicon.json"),
            Err(LexiconError::UnreadableFile { .. })
        ));
    }

    #[test]
    fn is_alias_of_checks_owner() {
        let lex = small();
        assert!(lex.is_alias_of(&["kevin".into(), "durant".into()], "durant"));
        assert!(!lex.is_alias_of(&["kevin".into()], "durant"));
        assert!(!lex.is_alias_of(&["warriors".into()], "durant"));
    }
}
