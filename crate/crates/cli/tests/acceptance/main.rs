//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod oracle;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use lonesense_core::dataset::{build_windows, column_name, flatten, split_column, window_day};
use lonesense_core::eval::{change_rate, fmt_pct};
use lonesense_core::features::{DailyFeatureRow, ExtractParams};
use lonesense_core::forest::{best_subset, run_rfe, train_forest, ForestConfig, RfeConfig};
use lonesense_core::llm::{
    build_prompt, parse_response, serialize, LlmPrediction, PredictionEntry, PromptMode,
};
use lonesense_core::model::{score_total, AssessmentPoint, SensorKind, Stage, Uls8Record};
use lonesense_core::synth::planted_dataset;
use lonesense_core::{CoverageRule, FeatureWindow, Target};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("took {took:.2?}, limit {limit:?}"))
}

// 1 -------------------------------------------------------------------------

fn scoring_oracle() -> Result<String, String> {
    let start = Instant::now();
    for code in 0u32..65_536 {
        let items: Vec<i64> = (0..8).map(|i| ((code >> (2 * i)) & 3) as i64 + 1).collect();
        let want: i64 = items
            .iter()
            .enumerate()
            .map(|(i, &s)| if i == 2 || i == 5 { 5 - s } else { s })
            .sum();
        let got = score_total(&items).map_err(|e| format!("{items:?}: {e}"))?;
        ensure(got as i64 == want, || format!("{items:?}: {got} vs {want}"))?;
        ensure((8..=32).contains(&got), || {
            format!("{items:?}: {got} out of range")
        })?;
    }
    within(start, Duration::from_secs(1))?;
    Ok(format!("65536 vectors in {:.2?}", start.elapsed()))
}

// 2 -------------------------------------------------------------------------

fn extraction_oracle() -> Result<String, String> {
    let start = Instant::now();
    let params = ExtractParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for sensor in SensorKind::ALL {
        for k in 0..1000 {
            let day = oracle::generate(sensor, &mut rng);
            oracle::check(sensor, &day, &params).map_err(|e| {
                format!(
                    "{sensor} day #{k} ({} in {:?}, {} events): {e}",
                    day.window.date,
                    day.window.zone,
                    day.events.len()
                )
            })?;
        }
    }
    within(start, Duration::from_secs(30))?;
    Ok(format!("7 sensors x 1000 days in {:.2?}", start.elapsed()))
}

// 3 -------------------------------------------------------------------------

fn window_arithmetic() -> Result<String, String> {
    let catalog = ExtractParams::default().catalog();
    ensure(catalog.len() == 76, || {
        format!("catalog has {} features", catalog.len())
    })?;
    let when = NaiveDate::from_ymd_opt(2024, 5, 1).unwrap();
    let record = Uls8Record::new(&[2, 2, 3, 2, 2, 3, 2, 2]).unwrap();
    let outcome = |covered: usize| {
        let rows: Vec<DailyFeatureRow> = (1..=covered)
            .map(|k| {
                // Spread the covered days over the window.
                let day = window_day(when, 2 * k - 1);
                let mut r = DailyFeatureRow::empty("P001", day, &catalog);
                r.has_any_data.insert(SensorKind::Calls, true);
                r
            })
            .collect();
        let a = AssessmentPoint {
            participant_id: "P001".into(),
            stage: Stage::Midterm,
            assessment_date: when,
            record,
        };
        build_windows(&rows, &[a], &catalog, &CoverageRule::default())
    };
    let (inc6, exc6) = outcome(6);
    ensure(inc6.is_empty() && exc6.len() == 1, || {
        "6 covered days were not excluded".into()
    })?;
    let (inc7, exc7) = outcome(7);
    ensure(inc7.len() == 1 && exc7.is_empty(), || {
        "7 covered days were not included".into()
    })?;
    ensure(inc7[0].coverage_days == 7, || {
        format!("coverage {}", inc7[0].coverage_days)
    })?;

    let flat = flatten(&inc7, &catalog, Target::Total);
    ensure(flat.n_cols() == 1064, || {
        format!("{} columns", flat.n_cols())
    })?;
    let mut expected: Vec<String> = catalog
        .iter()
        .flat_map(|f| (1..=14).map(move |d| column_name(&f.name, d)))
        .collect();
    let mut got = flat.columns.clone();
    expected.sort();
    got.sort();
    ensure(got == expected, || {
        "column set differs from features x days".into()
    })?;
    ensure(
        flat.columns
            .iter()
            .all(|c| split_column(c).is_some_and(|(_, d)| (1..=14).contains(&d))),
        || "column without a day suffix".into(),
    )?;
    Ok("76 x 14 = 1064 columns; 6 days excluded, 7 included".into())
}

// 4 -------------------------------------------------------------------------

fn metric_fixtures() -> Result<String, String> {
    let cases = [(8.60, 5.17, "-39.9%"), (11.10, 6.40, "-42.3%")];
    let mut shown = Vec::new();
    for (zero, one, want) in cases {
        let got = fmt_pct(change_rate(zero, one));
        ensure(got == want, || {
            format!("{zero} -> {one}: {got}, expected {want}")
        })?;
        shown.push(format!("{zero:.2}->{one:.2} = {got}"));
    }
    Ok(shown.join("; "))
}

// 5 -------------------------------------------------------------------------

fn forest_sanity() -> Result<String, String> {
    let start = Instant::now();
    let mut good = 0;
    let mut notes = Vec::new();
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Vec<f64>> = (0..300)
            .map(|_| (0..10).map(|_| rng.sample(StandardNormal)).collect())
            .collect();
        let y: Vec<f64> = x
            .iter()
            .map(|r| 3.0 * r[0] + rng.sample::<f64, _>(StandardNormal))
            .collect();
        let (xtr, xte) = x.split_at(200);
        let (ytr, yte) = y.split_at(200);
        let cfg = ForestConfig {
            n_trees: 100,
            rng_seed: seed,
            ..Default::default()
        };
        let f = train_forest(xtr, ytr, &cfg).map_err(|e| e.to_string())?;
        let pred = f.predict(xte).map_err(|e| e.to_string())?;
        let mae = pred
            .iter()
            .zip(yte)
            .map(|(p, t)| (p - t).abs())
            .sum::<f64>()
            / yte.len() as f64;
        let m = ytr.iter().sum::<f64>() / ytr.len() as f64;
        let base = yte.iter().map(|t| (m - t).abs()).sum::<f64>() / yte.len() as f64;
        let top = (0..10)
            .max_by(|&a, &b| f.feature_importances[a].total_cmp(&f.feature_importances[b]))
            .unwrap();
        let ok = mae <= 0.7 * base && top == 0;
        good += usize::from(ok);
        notes.push(format!("{:.0}%", 100.0 * (1.0 - mae / base)));
    }
    within(start, Duration::from_secs(60))?;
    ensure(good >= 8, || {
        format!("{good}/10 seeds passed; gains {}", notes.join(" "))
    })?;
    Ok(format!(
        "{good}/10 seeds; MAE gain over mean {}",
        notes.join(" ")
    ))
}

// 6 -------------------------------------------------------------------------

fn rfe_recovery() -> Result<String, String> {
    let start = Instant::now();
    let catalog = ExtractParams::default().catalog();
    let mut good = 0;
    let mut hits_per_seed = Vec::new();
    for seed in 0..10u64 {
        let p = planted_dataset(100, 4, 40, 0.5, seed).map_err(|e| e.to_string())?;
        let fcfg = ForestConfig {
            n_trees: 100,
            rng_seed: seed,
            ..Default::default()
        };
        let rcfg = RfeConfig {
            step: 1,
            min_features: 6,
            seed,
            ..Default::default()
        };
        let trace = run_rfe(&p.data, &fcfg, &rcfg).map_err(|e| e.to_string())?;
        let last = trace.steps.last().unwrap();
        ensure(last.remaining.len() == 6, || {
            format!("final step keeps {}", last.remaining.len())
        })?;
        let hits = last
            .remaining
            .iter()
            .filter(|c| p.signal.contains(c))
            .count();
        good += usize::from(hits >= 3);
        hits_per_seed.push(hits.to_string());
        if seed == 0 {
            let best = trace.argmin();
            println!(
                "    seed 0 argmin: step {} cv_mae {:.3} cv_mbe {:.3} with {} features",
                best.step,
                best.cv_mae,
                best.cv_mbe,
                best.remaining.len()
            );
            println!("    | No. | Sensor | Feature | Day |");
            println!("    |---|---|---|---|");
            for r in best_subset(&trace, &catalog) {
                println!(
                    "    | {} | {} | {} | {} |",
                    r.number, r.sensor, r.feature, r.day
                );
            }
        }
    }
    within(start, Duration::from_secs(300))?;
    ensure(good >= 8, || {
        format!("{good}/10 seeds; planted hits {}", hits_per_seed.join(" "))
    })?;
    Ok(format!(
        "{good}/10 seeds; planted features in final 6: {}",
        hits_per_seed.join(" ")
    ))
}

// 7 -------------------------------------------------------------------------

fn fixture_window(
    stage: Stage,
    counts: impl Fn(usize) -> f64,
    delays: impl Fn(usize) -> f64,
) -> FeatureWindow {
    let catalog = ExtractParams::default().catalog();
    let when = NaiveDate::from_ymd_opt(2024, 5, 1).unwrap();
    let days = (1..=14)
        .map(|k| {
            let mut r = DailyFeatureRow::empty("P001", window_day(when, k), &catalog);
            r.values
                .insert("keyboard_key_press_count".into(), counts(k));
            r.values
                .insert("keyboard_inter_key_delay_avg".into(), delays(k));
            r
        })
        .collect();
    FeatureWindow {
        participant_id: "P001".into(),
        stage,
        assessment_date: when,
        record: Uls8Record::new(&[2, 3, 2, 1, 4, 3, 2, 2]).unwrap(),
        days,
        coverage_days: 14,
    }
}

fn golden(name: &str) -> String {
    let p = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name);
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn first_diff(a: &str, b: &str) -> String {
    match a
        .lines()
        .zip(b.lines())
        .enumerate()
        .find(|(_, (x, y))| x != y)
    {
        Some((i, (x, y))) => format!("line {}: {x:?} vs {y:?}", i + 1),
        None => format!("lengths {} vs {}", a.len(), b.len()),
    }
}

fn prompt_goldens() -> Result<String, String> {
    let catalog = ExtractParams::default()
        .catalog()
        .select(&["keyboard_key_press_count", "keyboard_inter_key_delay_avg"])
        .unwrap();
    let target = fixture_window(
        Stage::EndOfSemester,
        |k| 10.0 * k as f64,
        |k| 300.0 + k as f64 / 4.0,
    );
    let example = fixture_window(Stage::Midterm, |k| 5.0 * k as f64, |k| 200.0 + k as f64);
    let zero = build_prompt(
        &target,
        None,
        &catalog,
        SensorKind::Keyboard,
        PromptMode::ZeroShot,
    )
    .map_err(|e| e.to_string())?;
    let one = build_prompt(
        &target,
        Some(&example),
        &catalog,
        SensorKind::Keyboard,
        PromptMode::OneShot,
    )
    .map_err(|e| e.to_string())?;
    let opening = "You are an expert in analysing human behavior and psychological wellbeing.";
    let caution = "Some zero entries may correspond to missing values";
    for (name, text) in [
        ("golden_zero_shot.txt", &zero),
        ("golden_one_shot.txt", &one),
    ] {
        let want = golden(name);
        ensure(*text == want, || {
            format!("{name}: {}", first_diff(text, &want))
        })?;
        ensure(text.starts_with(opening), || {
            format!("{name}: opening line")
        })?;
    }
    ensure(one.contains(caution), || "one-shot caution missing".into())?;
    ensure(!zero.contains(caution), || {
        "zero-shot carries the one-shot caution".into()
    })?;
    Ok(format!(
        "zero-shot {} bytes, one-shot {} bytes match",
        zero.len(),
        one.len()
    ))
}

// 8 -------------------------------------------------------------------------

fn valid_array(scores: [u8; 8]) -> String {
    let body: Vec<String> = scores
        .iter()
        .enumerate()
        .map(|(i, s)| {
            format!(
                r#"{{"entry": {}, "score": {s}, "reason": "r{}"}}"#,
                i + 1,
                i + 1
            )
        })
        .collect();
    format!("[{}]", body.join(",\n"))
}

fn parser_robustness() -> Result<String, String> {
    let ok = valid_array([1, 2, 3, 4, 1, 2, 3, 4]);
    let p = parse_response(&ok).map_err(|e| format!("valid: {e}"))?;
    ensure(p.scores() == [1, 2, 3, 4, 1, 2, 3, 4], || {
        "valid scores".into()
    })?;
    let fenced = format!("```json\n{ok}\n```");
    ensure(parse_response(&fenced).as_ref() == Ok(&p), || {
        "fenced array rejected".into()
    })?;
    let plain_fence = format!("```\n{ok}\n```");
    ensure(parse_response(&plain_fence).as_ref() == Ok(&p), || {
        "bare fence rejected".into()
    })?;

    let seven: Vec<&str> = ok.lines().take(7).collect();
    let arity = format!("{}]", seven.join("\n").trim_end_matches(','));
    let range = valid_array([1, 2, 3, 5, 1, 2, 3, 4]);
    let dup = ok.replace(r#""entry": 5"#, r#""entry": 4"#);
    let mut codes = Vec::new();
    for (label, raw) in [("arity", arity), ("range", range), ("duplicate", dup)] {
        let code = parse_response(&raw).err().map(|e| e.code());
        ensure(code == Some(label), || {
            format!("{label} case gave {code:?}")
        })?;
        codes.push(label);
    }

    let alphabet: Vec<char> = "ab Z\"\\/\n\t{}[],:é✓0".chars().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for k in 0..1000 {
        let mut entries: Vec<PredictionEntry> = (1..=8u8)
            .map(|entry| PredictionEntry {
                entry,
                score: rng.random_range(1..=4),
                reason: (0..rng.random_range(0..40))
                    .map(|_| alphabet[rng.random_range(0..alphabet.len())])
                    .collect(),
            })
            .collect();
        entries.shuffle(&mut rng);
        let pred = LlmPrediction::from_entries(entries).map_err(|e| e.to_string())?;
        let back =
            parse_response(&serialize(&pred)).map_err(|e| format!("round trip #{k}: {e}"))?;
        ensure(back == pred, || {
            format!("round trip #{k} changed the prediction")
        })?;
    }
    Ok(format!(
        "codes {} distinct; 1000 round trips",
        codes.join("/")
    ))
}

// 9, 10 ---------------------------------------------------------------------

fn lonesense(work: &Path, args: &[&str]) -> Result<(), String> {
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/small_run.toml");
    let out = Command::new(env!("CARGO_BIN_EXE_lonesense"))
        .arg("-q")
        .arg("-c")
        .arg(&cfg)
        .arg("-w")
        .arg(work)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!(
            "{args:?} exited {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(
                    p.strip_prefix(dir).unwrap().to_path_buf(),
                    std::fs::read(&p).unwrap(),
                );
            }
        }
    }
    out
}

fn same_tree(a: &Path, b: &Path) -> Result<usize, String> {
    let (ta, tb) = (tree(a), tree(b));
    ensure(!ta.is_empty(), || format!("{} is empty", a.display()))?;
    ensure(ta.keys().eq(tb.keys()), || {
        format!("file sets differ under {}", a.display())
    })?;
    for (k, v) in &ta {
        ensure(tb[k] == *v, || format!("{} differs", k.display()))?;
    }
    Ok(ta.len())
}

struct Runs {
    _tmp: tempfile::TempDir,
    first: PathBuf,
}

fn pipeline_runs() -> Result<Runs, String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (a, b, c) = (
        tmp.path().join("a"),
        tmp.path().join("b"),
        tmp.path().join("c"),
    );
    for w in [&a, &b] {
        lonesense(w, &["pipeline", "--backend", "mock", "--seed", "17"])?;
    }
    let report_files = same_tree(&a.join("report"), &b.join("report"))?;

    let recorded = a.join("llm");
    let recorded = recorded.to_str().unwrap();
    lonesense(
        &c,
        &[
            "pipeline",
            "--backend",
            "replay",
            "--replay",
            recorded,
            "--seed",
            "17",
        ],
    )?;
    let m1 = std::fs::read(a.join("eval/metrics.json")).map_err(|e| e.to_string())?;
    let m3 = std::fs::read(c.join("eval/metrics.json")).map_err(|e| e.to_string())?;
    ensure(m1 == m3, || "replayed eval/metrics.json differs".into())?;
    same_tree(&a.join("report"), &c.join("report"))?;
    println!("    {report_files} report files identical across mock runs and the replay run");
    Ok(Runs {
        _tmp: tmp,
        first: a,
    })
}

fn collect_pairs(v: &serde_json::Value, out: &mut Vec<(f64, f64)>) {
    match v {
        serde_json::Value::Object(m) => {
            for (a, b) in [("mae", "mbe"), ("cv_mae", "cv_mbe")] {
                if let (Some(x), Some(y)) = (
                    m.get(a).and_then(|x| x.as_f64()),
                    m.get(b).and_then(|x| x.as_f64()),
                ) {
                    out.push((x, y));
                }
            }
            m.values().for_each(|c| collect_pairs(c, out));
        }
        serde_json::Value::Array(xs) => xs.iter().for_each(|c| collect_pairs(c, out)),
        _ => {}
    }
}

fn bias_bound(work: &Path) -> Result<String, String> {
    let mut files = vec![
        work.join("eval/metrics.json"),
        work.join("report/metrics.json"),
    ];
    for stage in std::fs::read_dir(work.join("rfe")).map_err(|e| e.to_string())? {
        let p = stage.map_err(|e| e.to_string())?.path().join("trace.json");
        if p.is_file() {
            files.push(p);
        }
    }
    let mut pairs = Vec::new();
    for f in &files {
        let text = std::fs::read_to_string(f).map_err(|e| format!("{}: {e}", f.display()))?;
        let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
        collect_pairs(&v, &mut pairs);
    }
    ensure(pairs.len() > 10, || {
        format!("only {} metric pairs found", pairs.len())
    })?;
    for (mae, mbe) in &pairs {
        ensure(mbe.abs() <= mae + 1e-9, || format!("|{mbe}| > {mae}"))?;
    }
    Ok(format!(
        "{} MAE/MBE pairs across {} files",
        pairs.len(),
        files.len()
    ))
}

fn panic_text(p: Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<String>()
        .cloned()
        .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_else(|| "panicked".into())
}

fn guarded<T>(f: impl FnOnce() -> Result<T, String>) -> Result<T, String> {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| Err(panic_text(p)))
}

fn main() {
    let simple: [(u32, &str, Check); 8] = [
        (1, "scoring oracle", scoring_oracle),
        (2, "extraction oracle", extraction_oracle),
        (3, "window/flatten arithmetic", window_arithmetic),
        (4, "change-rate fixtures", metric_fixtures),
        (5, "forest sanity", forest_sanity),
        (6, "RFE recovery", rfe_recovery),
        (7, "prompt goldens", prompt_goldens),
        (8, "parser robustness", parser_robustness),
    ];
    let mut failed = 0;
    let mut report = |n: u32, name: &str, r: Result<String, String>| {
        match &r {
            Ok(msg) => println!("PASS criterion {n} ({name}): {msg}"),
            Err(msg) => println!("FAIL criterion {n} ({name}): {msg}"),
        }
        failed += usize::from(r.is_err());
    };
    for (n, name, f) in simple {
        report(n, name, guarded(f));
    }
    let runs = guarded(pipeline_runs);
    report(
        9,
        "end-to-end determinism",
        runs.as_ref()
            .map(|_| "two mock runs byte-identical; replay reproduces metrics".to_string())
            .map_err(Clone::clone),
    );
    let bound = match &runs {
        Ok(r) => guarded(|| bias_bound(&r.first)),
        Err(_) => Err("no pipeline run to inspect".into()),
    };
    report(10, "bias bound", bound);

    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all 10 criteria passed");
}
