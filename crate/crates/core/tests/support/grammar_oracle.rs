//! Brute-force grammar matcher used as a test oracle.
//!
//! Shares nothing with the production matcher beyond the rule AST and the
//! value types. Tokens are found with a regex, each rule is compiled to one
//! anchored regex over the sentence text with tokens fenced by control
//! characters, and every (start, end) token pair is tried longest-first.

use std::collections::HashMap;
use std::sync::LazyLock;

use fancy_regex::Regex;
use storylink_core::domain::{WValue, WhatValue, WhenValue, WhereValue};
use storylink_core::grammar::{EmitSpec, Grammar, GrammarRule, PatternAtom, TokenClass, ValueRef};

const OPEN: char = '\u{2}';
const CLOSE: char = '\u{3}';

const UNITS: [&str; 19] = [
    "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven",
    "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen",
];
const TENS: [&str; 8] = ["twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety"];
const ORDINALS: [&str; 10] = [
    "first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth", "tenth",
];

const CLOCK_RE: &str = r"[0-9]{1,2}:[0-9]{2}";
const NUMBER_RE: &str = r"[0-9]+(?:\.[0-9]+)?";

fn word_value(w: &str) -> Option<u32> {
    let w = w.to_lowercase();
    if let Some(i) = UNITS.iter().position(|u| *u == w) {
        return Some(i as u32 + 1);
    }
    TENS.iter().position(|t| *t == w).map(|i| 20 + 10 * i as u32)
}

fn ordinal(w: &str) -> Option<u32> {
    let w = w.to_lowercase();
    if let Some(i) = ORDINALS.iter().position(|o| *o == w) {
        return Some(i as u32 + 1);
    }
    static RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^([0-9]+)(?:st|nd|rd|th)$").unwrap());
    let caps = RE.captures(&w).unwrap()?;
    caps[1].parse().ok()
}

fn is_clock(s: &str) -> bool {
    static RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(&format!("^(?:{CLOCK_RE})$")).unwrap());
    RE.is_match(s).unwrap()
}

fn is_number(s: &str) -> bool {
    static RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(&format!("^(?:{NUMBER_RE})$")).unwrap());
    RE.is_match(s).unwrap()
}

/// Byte ranges of the tokens in `text`.
pub fn tokens(text: &str) -> Vec<(usize, usize)> {
    static RE: LazyLock<Regex> = LazyLock::new(|| {
        Regex::new(
            r"['’][sS](?![\p{L}\p{N}])|[\p{L}\p{N}]+(?:(?:-|['’](?![sS](?![\p{L}\p{N}])))[\p{L}\p{N}]+|(?<=[0-9])[.:](?=[0-9])[\p{L}\p{N}]+)*|\S",
        )
        .unwrap()
    });
    RE.find_iter(text).map(|m| m.unwrap()).map(|m| (m.start(), m.end())).collect()
}

fn fenced(inner: &str) -> String {
    format!("{OPEN}(?:{inner}){CLOSE}")
}

fn class_re(c: &TokenClass) -> String {
    match c {
        TokenClass::Clock => fenced(CLOCK_RE),
        TokenClass::Number => fenced(NUMBER_RE),
        TokenClass::NumberWord => {
            let words: Vec<&str> = UNITS.iter().chain(TENS.iter()).copied().collect();
            fenced(&format!("(?i:{})", words.join("|")))
        }
        TokenClass::Ordinal => fenced(&format!("(?i:{}|[0-9]+(?:st|nd|rd|th))", ORDINALS.join("|"))),
    }
}

struct Compiler {
    groups: Vec<String>,
}

impl Compiler {
    fn seq(&mut self, atoms: &[PatternAtom]) -> String {
        atoms.iter().map(|a| self.atom(a)).collect::<Vec<_>>().join(r"\s*")
    }

    fn atom(&mut self, a: &PatternAtom) -> String {
        match a {
            PatternAtom::Literal(lit) => lit
                .split_whitespace()
                .map(|w| fenced(&format!("(?i:{})", fancy_regex::escape(w))))
                .collect::<Vec<_>>()
                .join(r"\s*"),
            PatternAtom::Class(c) => class_re(c),
            PatternAtom::Alt(branches) => {
                let bs: Vec<String> = branches.iter().map(|b| self.seq(b)).collect();
                format!("(?:{})", bs.join("|"))
            }
            PatternAtom::Opt(inner) => format!(r"(?:{})?", self.seq(inner)),
            PatternAtom::Capture { name, body } => {
                let g = format!("g{}", self.groups.len());
                self.groups.push(name.clone());
                format!("(?P<{g}>{})", self.seq(body))
            }
        }
    }
}

struct CompiledRule {
    re: Regex,
    groups: Vec<String>,
}

fn compile(rule: &GrammarRule) -> CompiledRule {
    let mut c = Compiler { groups: Vec::new() };
    let body = c.seq(&rule.pattern);
    CompiledRule {
        re: Regex::new(&format!(r"^(?:{body})$")).unwrap(),
        groups: c.groups,
    }
}

/// Token texts inside a fenced fragment.
fn unfence(s: &str) -> Vec<String> {
    s.split(OPEN)
        .filter_map(|p| p.split_once(CLOSE).map(|(t, _)| t.to_string()))
        .collect()
}

fn number(toks: &[String]) -> Option<f64> {
    match toks {
        [t] if is_clock(t) => None,
        [t] if is_number(t) => t.parse().ok(),
        [t] => word_value(t).map(f64::from),
        [a, b] => {
            let (t, u) = (word_value(a)?, word_value(b)?);
            (t >= 20 && t % 10 == 0 && (1..=9).contains(&u)).then(|| f64::from(t + u))
        }
        _ => None,
    }
}

fn period(toks: &[String]) -> Option<u32> {
    let ot = |t: &str| matches!(t.to_lowercase().as_str(), "overtime" | "ot");
    let q = match toks {
        [t] if ot(t) => 5,
        [t] if is_number(t) && !t.contains('.') => t.parse().ok()?,
        [t] => ordinal(t)?,
        [o, t] if ot(t) => 4 + ordinal(o)?,
        _ => return None,
    };
    (q >= 1).then_some(q)
}

fn clock(toks: &[String]) -> Option<f64> {
    match toks {
        [t] if is_clock(t) => {
            let (m, s) = t.split_once(':')?;
            let (m, s): (f64, f64) = (m.parse().ok()?, s.parse().ok()?);
            (s < 60.0).then_some(60.0 * m + s)
        }
        _ => None,
    }
}

/// `Err(())` means the rule matched but its value did not normalize.
fn value(rule: &GrammarRule, caps: &HashMap<String, Vec<String>>) -> Result<WValue, ()> {
    let cap = |name: &str| caps.get(name).filter(|t| !t.is_empty());
    match &rule.emit {
        EmitSpec::Where { region } => Ok(WValue::Where(WhereValue { region: *region })),
        EmitSpec::What { stat_key, quantity } => {
            let quantity = match quantity.as_deref().and_then(cap) {
                None => None,
                Some(t) => Some(number(t).ok_or(())?),
            };
            Ok(WValue::What(WhatValue {
                stat_key: *stat_key,
                quantity,
            }))
        }
        EmitSpec::When {
            quarter,
            clock: clock_ref,
            minutes,
            seconds,
            interval,
        } => {
            let quarter = match quarter {
                None => None,
                Some(ValueRef::Const(v)) => {
                    if *v < 1.0 || v.fract() != 0.0 {
                        return Err(());
                    }
                    Some(*v as u32)
                }
                Some(ValueRef::Capture(n)) => match cap(n) {
                    None => None,
                    Some(t) => Some(period(t).ok_or(())?),
                },
            };
            let amount = |r: &ValueRef| -> Result<Option<f64>, ()> {
                match r {
                    ValueRef::Const(v) => Ok(Some(*v)),
                    ValueRef::Capture(n) => cap(n).map(|t| number(t).ok_or(())).transpose(),
                }
            };
            let secs = if let Some(c) = clock_ref {
                cap(c).map(|t| clock(t).ok_or(())).transpose()?
            } else if let Some(m) = minutes {
                amount(m)?.map(|m| 60.0 * m)
            } else if let Some(s) = seconds {
                amount(s)?
            } else {
                None
            };
            if quarter.is_none() && secs.is_none() {
                return Err(());
            }
            if let Some(s) = secs {
                let limit = if quarter.is_some_and(|q| q > 4) { 300.0 } else { 720.0 };
                if !(0.0..=limit).contains(&s) {
                    return Err(());
                }
            }
            let is_interval = *interval && secs.is_some();
            Ok(WValue::When(WhenValue {
                quarter,
                seconds_remaining_in_quarter: secs,
                is_interval,
                interval_end_seconds: is_interval.then_some(0.0),
            }))
        }
    }
}

pub struct Oracle {
    rules: Vec<(GrammarRule, CompiledRule)>,
}

impl Oracle {
    pub fn new(g: &Grammar) -> Self {
        let mut rules: Vec<GrammarRule> = g.rules.clone();
        rules.sort_by_key(|r| r.priority);
        Oracle {
            rules: rules.into_iter().map(|r| {
                let c = compile(&r);
                (r, c)
            }).collect(),
        }
    }

    /// Mentions in `text` as (byte range, value), left to right.
    pub fn matches(&self, text: &str) -> Vec<((usize, usize), WValue)> {
        let toks = tokens(text);
        // fenced text and the fenced offset of every token start / end
        let mut marked = String::new();
        let mut starts = Vec::new();
        let mut ends = Vec::new();
        for (i, &(s, e)) in toks.iter().enumerate() {
            if i > 0 {
                marked.push_str(&text[toks[i - 1].1..s]);
            }
            starts.push(marked.len());
            marked.push(OPEN);
            marked.push_str(&text[s..e]);
            marked.push(CLOSE);
            ends.push(marked.len());
        }

        let mut out = Vec::new();
        let mut pos = 0;
        while pos < toks.len() {
            let mut best: Option<(usize, &GrammarRule, HashMap<String, Vec<String>>)> = None;
            for (rule, c) in &self.rules {
                for end in (pos + 1..=toks.len()).rev() {
                    if best.as_ref().is_some_and(|(e, _, _)| end <= *e) {
                        break;
                    }
                    let frag = &marked[starts[pos]..ends[end - 1]];
                    let Some(m) = c.re.captures(frag).unwrap() else {
                        continue;
                    };
                    // the rightmost participating group wins for repeated names
                    let mut caps: HashMap<String, (usize, Vec<String>)> = HashMap::new();
                    for (gi, name) in c.groups.iter().enumerate() {
                        if let Some(g) = m.name(&format!("g{gi}")) {
                            let slot = caps.entry(name.clone()).or_insert((0, Vec::new()));
                            if g.start() >= slot.0 {
                                *slot = (g.start(), unfence(g.as_str()));
                            }
                        }
                    }
                    best = Some((end, rule, caps.into_iter().map(|(k, (_, v))| (k, v)).collect()));
                    break;
                }
            }
            match best {
                Some((end, rule, caps)) => {
                    if let Ok(v) = value(rule, &caps) {
                        out.push(((toks[pos].0, toks[end - 1].1), v));
                    }
                    pos = end;
                }
                None => pos += 1,
            }
        }
        out
    }
}
