//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

#[path = "../../core/tests/support/geometry_oracle.rs"]
mod geometry_oracle;
#[path = "../../core/tests/support/grammar_oracle.rs"]
mod grammar_oracle;
#[path = "../../core/tests/support/coupling_oracle.rs"]
mod coupling_oracle;

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use tempfile::TempDir;

use storylink::pipeline::{
    extract_mentions, load_corpus, run_couple, run_extract, run_train, CoupleConfig, ExtractConfig,
    ExtractionOutput, TrainConfig, MENTIONS_FILE,
};
use storylink_core::classifier::{build_windows, scan_for_missed_stats, Hyperparams, StatClassifierModel};
use storylink_core::coupler::{query_sentences, Selector};
use storylink_core::domain::{
    EntityKind, NarrativeDocument, Provenance, Region, StatKey, WValue, WType, WhatValue,
};
use storylink_core::gamedata::{classify_region, to_elapsed};
use storylink_core::grammar::{match_grammar, Grammar};
use storylink_core::lexicon::{match_who, EntityLexicon};
use storylink_core::validation::validate_coupled_document;

type Outcome = Result<String, String>;

fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(rel)
}

fn lexicon_path() -> PathBuf {
    fixture("lexicon/finals2017.json")
}

fn within(limit: Duration, took: Duration) -> Result<(), String> {
    if took <= limit {
        Ok(())
    } else {
        Err(format!("took {took:.2?}, limit {limit:?}"))
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

const FIG3: &str = "The Warriors trailed by six with three minutes left before Durant, criticized for leaving Oklahoma City last summer to chase a championship, brought them back, scoring 14 in the fourth.";

fn criterion_1(model: &Path) -> Outcome {
    let dir = TempDir::new().map_err(|e| e.to_string())?;
    let story = dir.path().join("fig3.txt");
    fs::write(&story, FIG3).map_err(|e| e.to_string())?;
    let start = Instant::now();
    run_extract(&ExtractConfig {
        story,
        lexicon: lexicon_path(),
        grammar: None,
        model: Some(model.to_path_buf()),
        threshold: 0.8,
        out: dir.path().into(),
    })
    .map_err(|e| e.to_string())?;
    let took = start.elapsed();
    let out: ExtractionOutput =
        serde_json::from_str(&fs::read_to_string(dir.path().join(MENTIONS_FILE)).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;

    let mut players = BTreeSet::new();
    let mut teams = BTreeSet::new();
    let mut whats = Vec::new();
    let mut whens = Vec::new();
    let mut wheres = 0;
    for m in &out.mentions {
        match &m.value {
            WValue::Who(w) if w.kind == EntityKind::Team => {
                teams.insert(w.entity_id.clone());
            }
            WValue::Who(w) => {
                players.insert(w.entity_id.clone());
            }
            WValue::What(w) => whats.push(w.clone()),
            WValue::When(w) => whens.push(w.clone()),
            WValue::Where(_) => wheres += 1,
        }
    }
    check(players == BTreeSet::from(["durant".to_string()]), || format!("players {players:?}"))?;
    let points_14 = WhatValue { stat_key: StatKey::Points, quantity: Some(14.0) };
    check(whats == vec![points_14], || format!("whats {whats:?}"))?;
    check(whens.iter().any(|w| w.quarter == Some(4)), || format!("no quarter 4 in {whens:?}"))?;
    check(whens.iter().any(|w| w.seconds_remaining_in_quarter == Some(180.0)), || {
        format!("no 180 s in {whens:?}")
    })?;
    check(wheres == 0, || format!("{wheres} where mentions"))?;
    within(Duration::from_secs(1), took)?;
    Ok(format!(
        "WHO players {players:?} (teams {teams:?}), WHAT POINTS 14, WHEN q4 + 180 s, WHERE none, {took:.2?}"
    ))
}

#[derive(Deserialize)]
struct MiniSentence {
    text: String,
}

#[derive(Deserialize)]
struct MiniCorpus {
    sentences: Vec<MiniSentence>,
}

fn criterion_2() -> Outcome {
    let mc: MiniCorpus = serde_json::from_str(
        &fs::read_to_string(fixture("grammar/mini_corpus.json")).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let start = Instant::now();
    let g = Grammar::basketball();
    let oracle = grammar_oracle::Oracle::new(&g);
    let mut agree = 0;
    let mut first_miss = None;
    for s in &mc.sentences {
        let doc = NarrativeDocument::parse("m", "", "", s.text.as_str());
        let engine: Vec<_> = doc
            .sentences
            .iter()
            .flat_map(|sent| match_grammar(sent, &doc.raw_text, &g))
            .map(|m| ((m.span.start, m.span.end), m.value))
            .collect();
        if engine == oracle.matches(&s.text) {
            agree += 1;
        } else if first_miss.is_none() {
            first_miss = Some(s.text.clone());
        }
    }
    let took = start.elapsed();
    check(mc.sentences.len() == 50, || format!("{} sentences", mc.sentences.len()))?;
    check(agree == mc.sentences.len(), || format!("{agree}/50 agree; first miss: {first_miss:?}"))?;
    within(Duration::from_secs(5), took)?;
    Ok(format!("{agree}/50 sentences agree on span and value, {took:.2?}"))
}

fn train_model(out: &Path) -> Result<storylink_core::classifier::TrainingReport, String> {
    run_train(&TrainConfig {
        corpus: fixture("corpus"),
        grammar: None,
        model: out.to_path_buf(),
        hyperparams: Hyperparams { reg_lambda: 1e-4, epochs: 20, seed: 42 },
    })
    .map_err(|e| e.to_string())
}

fn criterion_3(dir: &Path) -> Outcome {
    let start = Instant::now();
    let (a, b) = (dir.join("model.json"), dir.join("model_again.json"));
    let report = train_model(&a)?;
    let took = start.elapsed();
    train_model(&b)?;
    let corpus = load_corpus(&fixture("corpus")).map_err(|e| e.to_string())?;
    let windows = build_windows(&corpus, &Grammar::basketball(), 42).map_err(|e| e.to_string())?;
    check(corpus.len() == 13, || format!("{} stories", corpus.len()))?;
    check(windows.len() >= 600, || format!("{} windows", windows.len()))?;
    check(report.n_test >= 150, || format!("{} held-out windows", report.n_test))?;
    check(report.accuracy >= 0.95, || format!("held-out accuracy {:.4}", report.accuracy))?;
    let identical = fs::read(&a).map_err(|e| e.to_string())? == fs::read(&b).map_err(|e| e.to_string())?;
    check(identical, || "two runs wrote different model bytes".into())?;
    within(Duration::from_secs(60), took)?;
    Ok(format!(
        "{} windows ({} train / {} held out), accuracy {:.4}, identical bytes, {took:.2?}",
        windows.len(),
        report.n_train,
        report.n_test,
        report.accuracy
    ))
}

#[derive(Deserialize)]
struct Paraphrase {
    text: String,
    target: String,
}

#[derive(Deserialize)]
struct Paraphrases {
    sentences: Vec<Paraphrase>,
}

fn criterion_4(model_path: &Path) -> Outcome {
    let set: Paraphrases = serde_json::from_str(
        &fs::read_to_string(fixture("paraphrases/paraphrases.json")).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let model = StatClassifierModel::load(model_path).map_err(|e| e.to_string())?;
    let lex = EntityLexicon::load(lexicon_path()).map_err(|e| e.to_string())?;
    let g = Grammar::basketball();
    let mut hits = 0;
    for p in &set.sentences {
        let doc = NarrativeDocument::parse("p", "", "", p.text.as_str());
        let at = p.text.find(&p.target).ok_or_else(|| format!("{:?} not in {:?}", p.target, p.text))?;
        let target = (at, at + p.target.len());
        let mut found = Vec::new();
        for s in &doc.sentences {
            let mut existing = match_who(s, &doc.raw_text, &lex);
            let grammar = match_grammar(s, &doc.raw_text, &g);
            let covered = grammar
                .iter()
                .any(|m| m.w_type == WType::What && m.span.start < target.1 && target.0 < m.span.end);
            check(!covered, || format!("grammar already covers {:?}", p.target))?;
            existing.extend(grammar);
            found.extend(scan_for_missed_stats(s, &existing, &doc.raw_text, "p", &model, 0.8));
        }
        if found
            .iter()
            .any(|m| m.provenance == Provenance::Classifier && (m.span.start, m.span.end) == target)
        {
            hits += 1;
        }
    }
    let recall = f64::from(hits) / set.sentences.len() as f64;
    check(set.sentences.len() == 10, || format!("{} paraphrases", set.sentences.len()))?;
    check(recall >= 0.6, || format!("recall {recall:.2} ({hits}/10)"))?;
    Ok(format!("recall {recall:.2} ({hits}/{}) at threshold 0.8", set.sentences.len()))
}

fn random_selector(rng: &mut ChaCha8Rng) -> Selector {
    let pick = |rng: &mut ChaCha8Rng, from: &[&str]| -> BTreeSet<String> {
        let n = rng.gen_range(1..=2);
        from.choose_multiple(rng, n).map(|s| s.to_string()).collect()
    };
    let mut sel = Selector::default();
    while sel.is_empty() {
        if rng.gen_bool(0.5) {
            sel.players = Some(pick(rng, &["durant", "curry", "james", "irving", "love", "kerr", "nobody"]));
        }
        if rng.gen_bool(0.3) {
            sel.teams = Some(pick(rng, &["gsw", "cle"]));
        }
        if rng.gen_bool(0.4) {
            let keys = [StatKey::Points, StatKey::Rebounds, StatKey::Assists, StatKey::Tpm];
            let n = rng.gen_range(1..=2);
            sel.stat_keys = Some(keys.choose_multiple(rng, n).copied().collect());
        }
        if rng.gen_bool(0.3) {
            sel.quarter = Some(rng.gen_range(1..=5));
        }
        if rng.gen_bool(0.3) {
            let t0 = rng.gen_range(0.0..3000.0);
            sel.time_range = Some((t0, t0 + rng.gen_range(0.0..900.0)));
        }
        if rng.gen_bool(0.2) {
            let regions = [Region::Paint, Region::ThreePoint, Region::RestrictedArea];
            let n = rng.gen_range(1..=2);
            sel.regions = Some(regions.choose_multiple(rng, n).copied().collect());
        }
    }
    sel
}

fn criterion_5(model: &Path) -> Outcome {
    let start = Instant::now();
    let dir = TempDir::new().map_err(|e| e.to_string())?;
    run_extract(&ExtractConfig {
        story: fixture("stories/finals2017_g3_recap.txt"),
        lexicon: lexicon_path(),
        grammar: None,
        model: Some(model.to_path_buf()),
        threshold: 0.8,
        out: dir.path().into(),
    })
    .map_err(|e| e.to_string())?;
    let (cd, _) = run_couple(&CoupleConfig { game: fixture("games/finals2017_g3.json"), out: dir.path().into(), strict: true })
        .map_err(|e| e.to_string())?;

    for m in &cd.mentions {
        let hits = query_sentences(&cd, &Selector::of_value(&m.value)).map_err(|e| e.to_string())?;
        check(hits.contains(&m.sentence_index), || format!("mention not recovered: {m:?}"))?;
        let expected = coupling_oracle::brute_force(&cd, &Selector::of_value(&m.value));
        check(hits == expected, || format!("query for {:?}: {hits:?} vs oracle {expected:?}", m.value))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..500 {
        let sel = random_selector(&mut rng);
        let hits = query_sentences(&cd, &sel).map_err(|e| e.to_string())?;
        let expected = coupling_oracle::brute_force(&cd, &sel);
        check(hits == expected, || format!("{sel:?}: {hits:?} vs oracle {expected:?}"))?;
    }
    let report = validate_coupled_document(&cd);
    check(report.is_empty(), || format!("validation: {:?}", report.codes()))?;
    let took = start.elapsed();
    within(Duration::from_secs(5), took)?;
    Ok(format!(
        "{} mentions recovered, 500 seeded selectors sound and complete, validation clean, {took:.2?}",
        cd.mentions.len()
    ))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20170607);
    for _ in 0..1000 {
        let (x, y) = (rng.gen_range(-25.0..=25.0), rng.gen_range(0.0..=47.0));
        let got = classify_region(x, y).ok();
        check(got == geometry_oracle::region(x, y), || format!("({x}, {y}) -> {got:?}"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let draw = |rng: &mut ChaCha8Rng| {
        let q = rng.gen_range(1..=7u32);
        (q, rng.gen_range(0.0..=geometry_oracle::period_length(q)))
    };
    let mut boundary_ties = 0;
    for _ in 0..10_000 {
        let (a, b) = (draw(&mut rng), draw(&mut rng));
        let ea = to_elapsed(a.0, a.1).map_err(|e| e.to_string())?;
        let eb = to_elapsed(b.0, b.1).map_err(|e| e.to_string())?;
        check((ea - geometry_oracle::elapsed(a.0, a.1)).abs() < 1e-9, || format!("{a:?} -> {ea}"))?;
        if a.0 < b.0 || (a.0 == b.0 && a.1 > b.1) {
            let boundary = b.0 == a.0 + 1 && a.1 == 0.0 && b.1 == geometry_oracle::period_length(b.0);
            check(ea < eb || (boundary && ea == eb), || format!("{a:?} {b:?} -> {ea} {eb}"))?;
            boundary_ties += usize::from(ea == eb);
        }
    }
    Ok(format!("1000/1000 regions agree, 10000 clock pairs ordered ({boundary_ties} period-boundary ties)"))
}

fn run_pipeline(out: &Path) -> Result<(), String> {
    run_extract(&ExtractConfig {
        story: fixture("stories/finals2017_g3_recap.txt"),
        lexicon: lexicon_path(),
        grammar: None,
        model: None,
        threshold: 0.8,
        out: out.into(),
    })
    .map_err(|e| e.to_string())?;
    run_couple(&CoupleConfig { game: fixture("games/finals2017_g3.json"), out: out.into(), strict: true })
        .map_err(|e| e.to_string())?;
    Ok(())
}

fn criterion_7() -> Outcome {
    let (a, b) = (TempDir::new().map_err(|e| e.to_string())?, TempDir::new().map_err(|e| e.to_string())?);
    run_pipeline(a.path())?;
    run_pipeline(b.path())?;
    let listing = |d: &Path| -> Result<BTreeSet<String>, String> {
        Ok(fs::read_dir(d)
            .map_err(|e| e.to_string())?
            .filter_map(|e| e.ok())
            .map(|e| e.file_name().to_string_lossy().into_owned())
            .collect())
    };
    let names = listing(a.path())?;
    check(names == listing(b.path())?, || "different file sets".into())?;
    check(names.len() == 4, || format!("files {names:?}"))?;
    for n in &names {
        let same = fs::read(a.path().join(n)).map_err(|e| e.to_string())?
            == fs::read(b.path().join(n)).map_err(|e| e.to_string())?;
        check(same, || format!("{n} differs"))?;
    }
    // in-memory extraction agrees with the written file
    let lex = EntityLexicon::load(lexicon_path()).map_err(|e| e.to_string())?;
    let written: ExtractionOutput = serde_json::from_str(
        &fs::read_to_string(a.path().join(MENTIONS_FILE)).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let again = extract_mentions(&written.document, &lex, &Grammar::basketball(), None);
    check(again == written.mentions, || "re-extraction differs".into())?;
    Ok(format!("{} output files byte-identical across two runs", names.len()))
}

fn main() {
    let work = TempDir::new().expect("temp dir");
    let model = work.path().join("model.json");
    // 3 trains the model that 1, 4 and 5 load
    let trained = criterion_3(work.path());
    let results: Vec<(u32, Outcome)> = vec![
        (1, criterion_1(&model)),
        (2, criterion_2()),
        (3, trained),
        (4, criterion_4(&model)),
        (5, criterion_5(&model)),
        (6, criterion_6()),
        (7, criterion_7()),
    ];
    let mut failed = 0;
    for (n, r) in &results {
        match r {
            Ok(detail) => println!("PASS criterion {n}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {n}: {detail}");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
