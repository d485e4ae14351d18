//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::{BTreeMap, HashMap};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use chrono::{DateTime, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use termsuggest::analytics::synthetic::{category_log, field_study_log};
use termsuggest::analytics::{
    metrics_by_service, pattern_report, sessionize, Classifier, LogRecord, PatternCategory, SearchEvent, SelectionEvent,
    ServiceType,
};
use termsuggest::combined::{combined_suggest, CombinedParams, Section};
use termsuggest::recommender::{build_association_table, llr, AssociationParams, ContingencyCounts, DocumentRecord};
use termsuggest::suggesters::{CrossConcordance, Mapping, Relation, Thesaurus, UserTerms};
use termsuggest::vocabulary::{normalize, PrefixIndex, RankOrder, VocabularyEntry};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(start: Instant, budget: Duration) -> Result<Duration, String> {
    let took = start.elapsed();
    ensure(took < budget, || format!("took {took:?}, budget {budget:?}"))?;
    Ok(took)
}

fn field_study_figures() -> Outcome {
    let start = Instant::now();
    let log = field_study_log(2012);
    let m = metrics_by_service(&log);
    let took = within_budget(start, Duration::from_secs(1))?;
    let expected = [
        (ServiceType::UserSearchTerms, 7.06, 25.2),
        (ServiceType::Concordance, 2.91, 10.4),
        (ServiceType::Thesaurus, 9.00, 37.5),
        (ServiceType::Combined, 14.12, 50.9),
    ];
    let mut shown = Vec::new();
    for (service, per_search, per_user) in expected {
        let r = m.get(&service).ok_or(format!("{service} missing"))?;
        let got = r.share_per_searches.ok_or(format!("{service}: no searches"))?;
        ensure(r.unique_users == 1000, || format!("{service}: {} users", r.unique_users))?;
        ensure((got - per_search).abs() <= 0.02, || format!("{service}: {got:.4}% per search, want {per_search}%"))?;
        ensure((r.share_per_users - per_user).abs() <= 0.02, || {
            format!("{service}: {:.4}% per user, want {per_user}%", r.share_per_users)
        })?;
        shown.push(format!("{service} {got:.2}%/{:.1}%", r.share_per_users));
    }
    Ok(format!("{} in {took:?}", shown.join(", ")))
}

fn at(secs: i64) -> DateTime<Utc> {
    DateTime::<Utc>::from_timestamp(1_330_000_000 + secs, 0).unwrap()
}

fn selection(session: &str, entered: &str, chosen: &str, section: Section, secs: i64) -> LogRecord {
    LogRecord::Selection(SelectionEvent {
        entered_term: entered.into(),
        chosen_term: chosen.into(),
        position: 1,
        section,
        service_type: if section == Section::Alternative { ServiceType::Combined } else { ServiceType::Thesaurus },
        timestamp: at(secs),
        session_id: session.into(),
    })
}

fn worked_examples() -> Outcome {
    use Section::*;
    let log = vec![
        selection("row1", "acci", "accident", Main, 0),
        selection("row2", "accident", "accident", Main, 0),
        selection("row3", "acci", "accident", Main, 0),
        selection("row3", "accident", "accident", Main, 60),
        selection("row4", "accident", "accident analysis", Main, 0),
        selection("row5", "cognitive maps", "cognitive development", Main, 0),
        selection("row6", "mother-child clinic", "mother", Main, 0),
        selection("row7", "medicine", "Doctor-patient-relationship", Alternative, 0),
    ];
    let classified = Classifier::default().classify_log(&log);
    let got: Vec<(String, Option<u8>)> =
        classified.iter().map(|c| (c.event.session_id.clone(), c.category.number())).collect();
    let want: Vec<(String, Option<u8>)> = [
        ("row1", 1),
        ("row2", 2),
        ("row3", 1),
        ("row3", 3),
        ("row4", 4),
        ("row5", 5),
        ("row6", 6),
        ("row7", 7),
    ]
    .iter()
    .map(|(s, n)| (s.to_string(), Some(*n)))
    .collect();
    ensure(got == want, || format!("got {got:?}"))?;
    Ok("all seven examples classify as expected".into())
}

fn category_shares() -> Outcome {
    use PatternCategory::*;
    let classified = Classifier::default().classify_log(&category_log());
    let report = pattern_report(&classified);
    let close = |a: f64, b: f64| (a - b).abs() < 1e-9;
    let cts = report.services.get(&ServiceType::Combined).ok_or("CTS missing")?;
    let rows = [
        (Completion, 49.71, 2.35, 52.06),
        (FullEntrySelected, 13.75, 0.4, 14.15),
        (Extension, 4.9, 6.29, 11.19),
        (StatisticallyNear, 0.0, 22.0, 22.0),
    ];
    for (c, main, alt, total) in rows {
        let got = (
            cts.section_share(c, Section::Main),
            cts.section_share(c, Section::Alternative),
            cts.share_of(c),
        );
        ensure(close(got.0, main) && close(got.1, alt) && close(got.2, total), || {
            format!("CTS category {c}: got {got:?}, want ({main}, {alt}, {total})")
        })?;
    }
    let others = [
        (ServiceType::UserSearchTerms, [52.98, 9.92, 36.11]),
        (ServiceType::Concordance, [52.89, 16.34, 30.77]),
        (ServiceType::Thesaurus, [64.27, 13.6, 20.53]),
    ];
    for (service, want) in others {
        let p = &report.services[&service];
        for (c, w) in [Completion, FullEntrySelected, Extension].into_iter().zip(want) {
            ensure(close(p.share_of(c), w), || format!("{service} category {c}: {} want {w}", p.share_of(c)))?;
        }
    }
    Ok("CTS 52.06/14.15/11.19/22 with section split, other services exact".into())
}

/// G² from entropies: 2 (Σ k ln k − Σ r ln r − Σ c ln c + N ln N).
fn entropy_g2(k: [u64; 4]) -> f64 {
    let xlx = |x: u64| if x == 0 { 0.0 } else { x as f64 * (x as f64).ln() };
    let rows = [k[0] + k[1], k[2] + k[3]];
    let cols = [k[0] + k[2], k[1] + k[3]];
    if rows[0] == 0 || cols[0] == 0 {
        return 0.0;
    }
    let n = rows[0] + rows[1];
    let g = 2.0 * (k.iter().map(|&x| xlx(x)).sum::<f64>() - rows.iter().map(|&x| xlx(x)).sum::<f64>()
        - cols.iter().map(|&x| xlx(x)).sum::<f64>()
        + xlx(n));
    g.max(0.0)
}

fn llr_oracle() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut tables = 0;
    for a in 0..=20 {
        for b in 0..=20 {
            for c in 0..=20 {
                for d in 0..=20 {
                    let diff = (llr(ContingencyCounts::new(a, b, c, d)) - entropy_g2([a, b, c, d])).abs();
                    ensure(diff < 1e-9, || format!("({a},{b},{c},{d}) differs by {diff}"))?;
                    worst = worst.max(diff);
                    tables += 1;
                }
            }
        }
    }
    for r in 1..=12u64 {
        for s in 1..=12u64 {
            for x in 1..=6u64 {
                for y in 1..=6u64 {
                    let t = ContingencyCounts::new(r * x, r * y, s * x, s * y);
                    ensure(llr(t).abs() < 1e-9, || format!("independent {t:?} scored {}", llr(t)))?;
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10_000 {
        let t = ContingencyCounts::new(
            rng.gen_range(0..5000),
            rng.gen_range(0..5000),
            rng.gen_range(0..5000),
            rng.gen_range(0..100_000),
        );
        let (g, h) = (llr(t), llr(t.transposed()));
        ensure((g - h).abs() <= 1e-9 * g.max(1.0), || format!("{t:?}: {g} vs transposed {h}"))?;
    }
    let took = within_budget(start, Duration::from_secs(30))?;
    Ok(format!("{tables} tables, max diff {worst:.1e}, 10000 transposes, {took:?}"))
}

/// Filter, sort, truncate over a hand-merged copy of the raw entries.
fn naive_lookup(raw: &[(String, u64)], prefix: &str, limit: usize, order: RankOrder) -> Vec<(String, u64)> {
    let mut merged: Vec<(String, String, u64)> = Vec::new();
    for (display, freq) in raw {
        let key = normalize(display);
        if key.is_empty() {
            continue;
        }
        match merged.iter_mut().find(|m| m.0 == key) {
            Some(m) => m.2 = m.2.max(*freq),
            None => merged.push((key, display.clone(), *freq)),
        }
    }
    let p = normalize(prefix);
    let mut hits: Vec<(String, String, u64)> = merged.into_iter().filter(|m| m.0.starts_with(&p)).collect();
    match order {
        RankOrder::Alphabetical => hits.sort_by(|a, b| a.0.cmp(&b.0)),
        RankOrder::FrequencyDesc => hits.sort_by(|a, b| b.2.cmp(&a.2).then(a.0.cmp(&b.0))),
    }
    hits.into_iter().take(limit).map(|(_, d, f)| (d, f)).collect()
}

fn random_word(rng: &mut impl Rng, alphabet: &[char], len: std::ops::Range<usize>) -> String {
    let n = rng.gen_range(len);
    (0..n).map(|_| *alphabet.choose(rng).unwrap()).collect()
}

fn prefix_index_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let alphabet: Vec<char> = "abcAB ÄäéE".chars().collect();
    for trial in 0..10_000 {
        let n = rng.gen_range(0..60);
        let raw: Vec<(String, u64)> = (0..n)
            .map(|_| (random_word(&mut rng, &alphabet, 0..7), rng.gen_range(0..8)))
            .collect();
        let prefix = random_word(&mut rng, &alphabet, 0..4);
        let limit = rng.gen_range(0..15);
        let order = if rng.gen_bool(0.5) { RankOrder::Alphabetical } else { RankOrder::FrequencyDesc };
        let index = PrefixIndex::build(raw.iter().map(|(w, f)| VocabularyEntry::with_frequency(w, *f)));
        let got: Vec<(String, u64)> = index
            .lookup(&prefix, limit, order)
            .into_iter()
            .map(|e| (e.term.display().to_string(), e.frequency.unwrap_or(0)))
            .collect();
        let want = naive_lookup(&raw, &prefix, limit, order);
        ensure(got == want, || format!("trial {trial}, prefix {prefix:?}, {order:?}: {got:?} != {want:?}"))?;
    }
    let took = within_budget(start, Duration::from_secs(10))?;
    Ok(format!("10000 trials in {took:?}"))
}

fn cts_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let alphabet: Vec<char> = "abcd".chars().collect();
    let mut inputs = 0;
    let mut with_alternatives = 0;
    for _ in 0..300 {
        let words: Vec<String> = (0..rng.gen_range(4..30)).map(|_| random_word(&mut rng, &alphabet, 2..7)).collect();
        let thesaurus = Thesaurus::from_descriptors(words.iter().step_by(2).map(String::as_str));
        let corpus: Vec<DocumentRecord> = (0..rng.gen_range(1..40))
            .map(|i| {
                let title: Vec<&str> = (0..rng.gen_range(1..5)).map(|_| words.choose(&mut rng).unwrap().as_str()).collect();
                let ctrl: Vec<&str> = (0..rng.gen_range(0..4)).map(|_| words.choose(&mut rng).unwrap().as_str()).collect();
                DocumentRecord::new(&i.to_string(), &title.join(" "), None, &ctrl)
            })
            .collect();
        let table = build_association_table(&corpus, AssociationParams { min_count: 1, top_k: 30 }).map_err(|e| e.to_string())?;
        let params = CombinedParams {
            ts_limit: rng.gen_range(1..8),
            alt_limit: rng.gen_range(1..8),
            threshold: 3,
        };
        for _ in 0..40 {
            let mut input = random_word(&mut rng, &alphabet, 0..7);
            if rng.gen_bool(0.5) {
                input = words.choose(&mut rng).unwrap().clone();
            }
            if rng.gen_bool(0.2) {
                input = format!("  {} ", input.to_uppercase());
            }
            inputs += 1;
            let out = combined_suggest(&thesaurus, &table, &input, &params);
            ensure(out.thesaurus == thesaurus.suggest(&input, params.ts_limit), || {
                format!("thesaurus section differs for {input:?}")
            })?;
            if normalize(&input).chars().count() <= 3 {
                ensure(out.alternative.is_empty(), || format!("alternatives for short input {input:?}"))?;
            }
            for a in &out.alternative {
                ensure(out.thesaurus.iter().all(|m| m.term.normalized() != a.term.normalized()), || {
                    format!("{:?} in both sections for {input:?}", a.term.display())
                })?;
            }
            let positions: Vec<usize> = out.iter().map(|(_, s)| s.position).collect();
            ensure(positions == (1..=out.len()).collect::<Vec<_>>(), || format!("positions {positions:?}"))?;
            with_alternatives += usize::from(!out.alternative.is_empty());
        }
    }
    Ok(format!("{inputs} inputs, {with_alternatives} with an alternative section"))
}

fn sessionization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let gaps = [0, 1, 600, 7199, 7200, 7201, 9000, 86_400];
    let mut splits = 0;
    for _ in 0..500 {
        let mut log = Vec::new();
        for id in ["a", "b", "c", "d"].iter().take(rng.gen_range(1..5)) {
            let mut t = rng.gen_range(0..1000);
            for _ in 0..rng.gen_range(1..30) {
                log.push(LogRecord::Search(SearchEvent {
                    submitted_term: String::new(),
                    service_type: None,
                    timestamp: at(t),
                    session_id: id.to_string(),
                }));
                t += gaps.choose(&mut rng).unwrap();
            }
        }
        log.shuffle(&mut rng);

        let mut times: BTreeMap<String, Vec<i64>> = BTreeMap::new();
        for r in &log {
            times.entry(r.session_id().to_string()).or_default().push(r.timestamp().timestamp());
        }
        let mut want: Vec<(String, Vec<i64>)> = Vec::new();
        for (id, mut ts) in times {
            ts.sort();
            let mut current = vec![ts[0]];
            for w in ts.windows(2) {
                if w[1] - w[0] > 7200 {
                    want.push((id.clone(), std::mem::take(&mut current)));
                    splits += 1;
                }
                current.push(w[1]);
            }
            want.push((id, current));
        }
        let got: Vec<(String, Vec<i64>)> = sessionize(&log)
            .into_iter()
            .map(|s| (s.session_id.clone(), s.events.iter().map(|e| e.timestamp().timestamp()).collect()))
            .collect();
        ensure(got == want, || format!("got {got:?}\nwant {want:?}"))?;
    }
    Ok(format!("500 streams, {splits} splits, none at gaps of 7200 s or less"))
}

fn p95(mut samples: Vec<Duration>) -> Duration {
    samples.sort();
    samples[(samples.len() * 95).div_ceil(100) - 1]
}

fn latency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let syllables = ["ka", "so", "ri", "men", "tal", "ver", "lu", "xe", "dor", "pi", "qua", "ne", "sta", "bo", "gri"];
    let word = |rng: &mut ChaCha8Rng| -> String {
        let n = rng.gen_range(2..6);
        (0..n).map(|_| *syllables.choose(rng).unwrap()).collect()
    };
    let mut vocab: Vec<String> = Vec::with_capacity(100_000);
    let mut seen = std::collections::HashSet::new();
    while vocab.len() < 100_000 {
        let w = if rng.gen_bool(0.3) { format!("{} {}", word(&mut rng), word(&mut rng)) } else { word(&mut rng) };
        if seen.insert(w.clone()) {
            vocab.push(w);
        }
    }
    let ust = UserTerms::new(vocab.iter().map(|w| VocabularyEntry::with_frequency(w, rng.gen_range(1..10_000))));
    let thesaurus = Thesaurus::from_descriptors(vocab.iter().map(String::as_str));
    let mappings: Vec<Mapping> = (0..20_000)
        .map(|i| Mapping::new("src", &vocab[i], Relation::Equivalence, "dst", &vocab[(i * 7 + 3) % vocab.len()]))
        .collect();
    let hts = CrossConcordance::new(mappings).map_err(|e| e.to_string())?;
    let free: Vec<&String> = vocab.iter().filter(|w| !w.contains(' ')).take(5000).collect();
    let corpus: Vec<DocumentRecord> = (0..10_000)
        .map(|i| {
            let title: Vec<&str> = (0..8).map(|_| free.choose(&mut rng).unwrap().as_str()).collect();
            let ctrl: Vec<&str> = (0..3).map(|_| vocab[rng.gen_range(0..2000)].as_str()).collect();
            DocumentRecord::new(&i.to_string(), &title.join(" "), None, &ctrl)
        })
        .collect();
    let table = build_association_table(&corpus, AssociationParams::default()).map_err(|e| e.to_string())?;

    let queries: Vec<String> = (0..2000)
        .map(|_| {
            let w = vocab.choose(&mut rng).unwrap();
            w.chars().take(rng.gen_range(1..=w.chars().count().min(10))).collect()
        })
        .collect();
    let params = CombinedParams::default();
    let mut per_service: HashMap<&str, Vec<Duration>> = HashMap::new();
    for q in &queries {
        let mut time = |name, f: &dyn Fn() -> usize| {
            let t = Instant::now();
            std::hint::black_box(f());
            per_service.entry(name).or_default().push(t.elapsed());
        };
        time("UST", &|| ust.suggest(q, 10).len());
        time("HTS", &|| hts.suggest(q, 10).len());
        time("TS", &|| thesaurus.suggest(q, 10).len());
        time("CTS", &|| combined_suggest(&thesaurus, &table, q, &params).len());
    }
    let mut shown = Vec::new();
    for name in ["UST", "HTS", "TS", "CTS"] {
        let p = p95(per_service.remove(name).unwrap());
        ensure(p < Duration::from_millis(10), || format!("{name} p95 {p:?}"))?;
        shown.push(format!("{name} {p:?}"));
    }
    Ok(format!("p95 over 2000 queries: {}", shown.join(", ")))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("field-study key figures reproduced", field_study_figures),
        ("worked examples classify to categories 1-7", worked_examples),
        ("category shares reproduced", category_shares),
        ("log-likelihood ratio matches entropy oracle", llr_oracle),
        ("prefix index matches naive scan", prefix_index_oracle),
        ("combined suggestion section invariants", cts_invariants),
        ("sessions split exactly at gaps over two hours", sessionization),
        ("p95 suggestion latency under 10 ms", latency),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(reason) => {
                failed += 1;
                println!("FAIL  {name}: {reason}");
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
