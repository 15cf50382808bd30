//! Runs every acceptance criterion in order and prints one PASS/FAIL line each.

mod common;

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use graftok::decoder::{expand_head, predict_next, run_bench, BenchConfig, TokenHead};
use graftok::extension::extend_vocabulary;
use graftok::prompt::{build_prompt, family_label, render_prompt, LanguageFamilyMap, PromptOptions, Slot};
use graftok::report::reduction_report;
use graftok::trainer::{count_corpus, learn_merges, LearnedExtension, TrainerConfig};
use graftok::DecodeMode;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use common::synth::{self, INDIC};
use common::{base, oracle};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed <= limit, || format!("took {elapsed:.1?}, limit {limit:?}"))
}

fn all_extensions(y: usize) -> Vec<LearnedExtension> {
    let mut langs: Vec<&str> = INDIC.to_vec();
    langs.push("en");
    langs
        .iter()
        .enumerate()
        .map(|(i, lang)| {
            let (train, _) = synth::split(lang, 3000, 0, 1000 + i as u64);
            common::train(lang, &train, y)
        })
        .collect()
}

fn c1_english_baseline() -> Outcome {
    let start = Instant::now();
    let text = "I love my country";
    let ids = base().encode(text);
    ensure(ids == [40, 1842, 616, 1499], || format!("base ids {ids:?}"))?;
    let base_time = start.elapsed();
    for y in [125, 1000] {
        let ext = common::extend(&all_extensions(y));
        let n = ext.encode(text).len();
        ensure(n == 4, || format!("extended (y={y}) gives {n} tokens"))?;
    }
    within(base_time, Duration::from_secs(1))?;
    Ok("4 tokens with the base and with 9-language extensions at y=125 and y=1000".into())
}

fn c2_roundtrip() -> Outcome {
    let ext = common::extend(&all_extensions(250));
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut fixed = vec![
        "नमस्ते दुनिया".to_string(),
        "வணக்கம் உலகம்".into(),
        "വിദ്യാർത്ഥികൾ".into(),
        "hello नमस्ते வணக்கம் 👋🏽".into(),
        "👨‍👩‍👧 family".into(),
        "".into(),
    ];
    while fixed.len() < 1000 {
        fixed.push(synth::mixed_string(&mut rng));
    }
    for s in &fixed {
        for tok in [base(), &ext] {
            let back = tok.decode(&tok.encode(s), DecodeMode::Strict).map_err(|e| e.to_string())?;
            ensure(&back == s, || format!("roundtrip failed for {s:?}"))?;
        }
    }
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!("1000 strings exact under base and extended tokenizers in {:.2?}", start.elapsed()))
}

fn c3_oracle() -> Outcome {
    let start = Instant::now();
    let alphabet: Vec<char> = "abcnक्ामिகும ".chars().collect();
    let mut merges_total = 0;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lines: Vec<String> = (0..rng.random_range(3..12))
            .map(|_| {
                (0..rng.random_range(3..20))
                    .map(|_| alphabet[rng.random_range(0..alphabet.len())])
                    .collect()
            })
            .collect();
        let counts = count_corpus(&lines);
        ensure(counts.distinct() <= 50, || format!("corpus {seed} has {} chunks", counts.distinct()))?;
        let y = rng.random_range(5..40);
        let fast = learn_merges(&counts, base(), "xx", TrainerConfig::new(y));
        let slow = oracle::learn(&oracle::chunk_counts(&lines), base(), y, 2);
        ensure(fast.merges == slow, || format!("corpus {seed}: trainer and oracle disagree"))?;
        merges_total += slow.len();
    }
    within(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!("20 corpora, {merges_total} merges identical"))
}

fn c4_monotone_reduction() -> Outcome {
    let start = Instant::now();
    let mut details = Vec::new();
    for (i, lang) in ["hi", "bn", "ta", "ml"].iter().enumerate() {
        let (train, held) = synth::split(lang, 20_000, 5_000, 4000 + i as u64);
        let held_set: HashSet<&String> = held.iter().collect();
        ensure(train.iter().all(|l| !held_set.contains(l)), || "train and held-out overlap".into())?;
        let ext = common::extend(&[common::train(lang, &train, 250)]);
        let report = reduction_report(&held, base(), &ext);
        let s = &report.summary;
        ensure(s.monotonicity_violations == 0, || {
            format!("{lang}: {} lines got longer", s.monotonicity_violations)
        })?;
        ensure(s.mean_reduction >= 0.15, || format!("{lang}: mean reduction {:.3}", s.mean_reduction))?;
        details.push(format!("{lang} {:.1}%", 100.0 * s.mean_reduction));
    }
    within(start.elapsed(), Duration::from_secs(120))?;
    Ok(format!("5000 held-out lines each, no line longer, mean reduction {}", details.join(", ")))
}

fn c5_budget_sweep() -> Outcome {
    let start = Instant::now();
    let budgets = [1000, 500, 250, 125];
    let held: BTreeMap<&str, Vec<String>> = INDIC
        .iter()
        .enumerate()
        .map(|(i, lang)| (*lang, synth::split(lang, 3000, 2000, 1000 + i as u64).1))
        .collect();
    let prompts = LanguageFamilyMap::default().prompt_tokens();
    let mut reductions: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for y in budgets {
        let exts = all_extensions(y);
        let (tok, manifest) = extend_vocabulary(base(), &exts, &prompts).map_err(|e| e.to_string())?;
        for l in &manifest.languages {
            ensure(l.materialized <= y && l.learned <= y, || {
                format!("{} materialized {} > {y}", l.language, l.materialized)
            })?;
        }
        for (lang, lines) in &held {
            let r = reduction_report(lines, base(), &tok).summary.mean_reduction;
            reductions.entry(lang).or_default().push(r);
        }
    }
    let mut violations = Vec::new();
    for (lang, rs) in &reductions {
        for (w, ys) in rs.windows(2).zip(budgets.windows(2)) {
            if w[1] > w[0] {
                violations.push(format!("{lang} y={}->{}", ys[0], ys[1]));
            }
        }
    }
    ensure(violations.len() <= 1, || format!("monotonicity violations: {}", violations.join(", ")))?;
    within(start.elapsed(), Duration::from_secs(300))?;
    let hi: Vec<String> = reductions["hi"].iter().map(|r| format!("{:.1}%", 100.0 * r)).collect();
    let flag = if violations.is_empty() {
        "no violations".to_string()
    } else {
        format!("FLAGGED violation: {}", violations[0])
    };
    Ok(format!("counts <= y for all 8 languages; hi reduction at y=1000..125: {}; {flag}", hi.join(" ")))
}

fn c6_head_preservation() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut checks = 0;
    for i in 0..100u64 {
        let rows = rng.random_range(1..400);
        let dim = rng.random_range(1..64);
        let head = TokenHead::random(rows, dim, i).map_err(|e| e.to_string())?;
        let hidden: Vec<f32> = (0..dim).map(|_| rng.random_range(-4.0..4.0)).collect();
        let before = head.logits(&hidden).map_err(|e| e.to_string())?;
        for k in [1, 250, 2002] {
            let big = expand_head(&head, k, i * 31 + k as u64);
            let after = big.logits(&hidden).map_err(|e| e.to_string())?;
            let max_diff = before
                .iter()
                .zip(&after)
                .map(|(a, b)| (a - b).abs())
                .fold(0f32, f32::max);
            let bit_exact = before.iter().zip(&after).all(|(a, b)| a.to_bits() == b.to_bits());
            ensure(bit_exact && max_diff == 0.0, || format!("pair {i}, k={k}: diff {max_diff}"))?;
            let (_, p) = predict_next(&big, &hidden).map_err(|e| e.to_string())?;
            let sum: f64 = p.iter().sum();
            ensure((sum - 1.0).abs() < 1e-6, || format!("pair {i}, k={k}: softmax sums to {sum}"))?;
            checks += 1;
        }
    }
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!("{checks} expansions bit-exact on old logits, softmax sums within 1e-6"))
}

fn c7_decoding_cost() -> Outcome {
    let start = Instant::now();
    let config = BenchConfig {
        pairs: vec![(79, 31)],
        ..BenchConfig::default()
    };
    let result = run_bench(&config).map_err(|e| e.to_string())?;
    let r2 = result.fit.r_squared;
    let sp = &result.speedups[0];
    let (lo, hi) = (0.8 * 79.0 / 31.0, 1.2 * (79.0f64 / 31.0).powi(2));
    ensure(r2 >= 0.95, || format!("r^2 = {r2:.4}"))?;
    ensure((lo..=hi).contains(&sp.measured_ratio), || {
        format!("measured 79/31 ratio {:.3} outside [{lo:.2}, {hi:.2}]", sp.measured_ratio)
    })?;
    within(start.elapsed(), Duration::from_secs(180))?;
    Ok(format!(
        "r^2 = {r2:.4}, measured 79/31 ratio {:.3} (fit predicts {:.3}), range [{lo:.2}, {hi:.2}]",
        sp.measured_ratio, sp.ratio
    ))
}

fn c8_prompts() -> Outcome {
    let start = Instant::now();
    let map = LanguageFamilyMap::default();
    let (tok, _) = extend_vocabulary(base(), &[], &map.prompt_tokens()).map_err(|e| e.to_string())?;
    let vocab = tok.vocab();
    // language ids follow the multilingual speech-model ordering after <SOT> (50257)
    let golden: [(&str, &str, u32); 8] = [
        ("hi", "indo", 50275),
        ("gu", "indo", 50332),
        ("mr", "indo", 50319),
        ("bn", "indo", 50301),
        ("ta", "dra", 50286),
        ("te", "dra", 50298),
        ("kn", "dra", 50305),
        ("ml", "dra", 50295),
    ];
    let family_id = |f: &str| vocab.special_id(&format!("<{f}>")).unwrap();
    let mut family_tokens: BTreeMap<&str, HashSet<u32>> = BTreeMap::new();
    for (lang, family, lang_id) in golden {
        let p = build_prompt(lang, PromptOptions::default(), vocab, &map).map_err(|e| e.to_string())?;
        let expected = vec![50360, family_id(family), 50257, lang_id, 50358, 50362];
        ensure(p.ids == expected, || format!("{lang}: ids {:?}, expected {expected:?}", p.ids))?;
        let rendered = render_prompt(&p.ids, vocab).map_err(|e| e.to_string())?;
        let want = format!("<SOTP><{family}><SOT><|{lang}|><|transcribe|><|notimestamps|>");
        ensure(rendered == want, || format!("{lang}: rendered {rendered}"))?;
        family_tokens
            .entry(family_label(family).unwrap())
            .or_default()
            .insert(p.slot(Slot::FamilyPrompt).unwrap());
    }
    ensure(family_tokens.values().all(|s| s.len() == 1), || "a family uses several tokens".into())?;
    let all: HashSet<u32> = family_tokens.values().flatten().copied().collect();
    ensure(all.len() == 2, || "family tokens coincide".into())?;
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok("8 languages match; Indo-Aryan and Dravidian each share one distinct family token".into())
}

fn strip_volatile(v: &mut Value) {
    if let Value::Object(m) = v {
        m.remove("volatile");
    }
}

fn pipeline(dir: &Path, seed: &str) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let bin = env!("CARGO_BIN_EXE_graftok");
    let (train, held) = synth::split("ta", 2000, 500, 99);
    fs::write(dir.join("train.txt"), train.join("\n")).map_err(|e| e.to_string())?;
    fs::write(dir.join("held.txt"), held.join("\n")).map_err(|e| e.to_string())?;
    let p = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let steps: Vec<Vec<String>> = vec![
        vec!["train-bpe", "--lang", "ta", "--corpus", &p("train.txt"), "-y", "250", "--out", &p("ta.json")],
        vec!["extend", "--ext", &p("ta.json"), "--out", &p("tok")],
        vec!["stats", "--corpus", &p("held.txt"), "--extended", &p("tok"), "--out", &p("stats")],
        vec![
            "bench", "--ns", "8,16,24,32,40", "--hidden", "32", "--layers", "1", "--vocab-size", "512", "--warmup",
            "0", "--out", &p("bench.json"),
        ],
    ]
    .into_iter()
    .map(|s| s.into_iter().map(String::from).collect())
    .collect();
    for args in steps {
        let out = Command::new(bin)
            .arg("--seed")
            .arg(seed)
            .args(&args)
            .env_remove(graftok::cli::BASE_DIR_ENV)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(out.status.success(), || {
            format!("{}: {}", args[0], String::from_utf8_lossy(&out.stderr))
        })?;
    }
    let mut files = BTreeMap::new();
    for name in ["ta.json", "tok/vocab.json", "tok/merges.txt", "tok/manifest.json", "stats/report.json", "stats/report.csv"] {
        files.insert(name.to_string(), fs::read(dir.join(name)).map_err(|e| e.to_string())?);
    }
    let mut bench: Value =
        serde_json::from_slice(&fs::read(dir.join("bench.json")).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    strip_volatile(&mut bench);
    files.insert("bench.json".into(), serde_json::to_vec(&bench).unwrap());
    Ok(files)
}

fn c9_determinism() -> Outcome {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = pipeline(a.path(), "7")?;
    let second = pipeline(b.path(), "7")?;
    for (name, bytes) in &first {
        ensure(second.get(name) == Some(bytes), || format!("{name} differs between runs"))?;
    }
    let report: Value = serde_json::from_slice(&first["stats/report.json"]).unwrap();
    ensure(report["seed"] == 7, || "seed missing from report".into())?;
    Ok(format!("{} artifacts byte-identical across two seeded runs", first.len()))
}

fn main() {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [Criterion; 9] = [
        ("english baseline exactness", c1_english_baseline),
        ("roundtrip", c2_roundtrip),
        ("trainer oracle equivalence", c3_oracle),
        ("monotone reduction", c4_monotone_reduction),
        ("budget sweep", c5_budget_sweep),
        ("head-expansion preservation", c6_head_preservation),
        ("decoding-cost scaling", c7_decoding_cost),
        ("prompt exactness", c8_prompts),
        ("determinism", c9_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !filter.is_empty() && !filter.iter().any(|x| name.contains(x.as_str()) || *x == n.to_string()) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {n} PASS {name}: {detail} [{secs:.1}s]"),
            Err(why) => {
                failed += 1;
                println!("criterion {n} FAIL {name}: {why} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
