//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use mop_core::evaluation::{evaluate_mid, f_beta, read_gold, round2, EntryPolicy, SlotRecord};
use mop_core::extraction::{read_mid, Flag, MidEntry, EXISTENTIAL};
use mop_core::filter::{
    classify, feature_expectations, parse_examples, train_maxent, train_nb, FeatureKind, FeatureVector, Label,
    LabeledExample, Method, Model, TrainOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<(), String>;

fn desk() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/resources/desk")
}

fn mop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mop"))
        .args(args)
        .env_remove("MOP_RESOURCES")
        .env("SOURCE_DATE_EPOCH", "0")
        .output()
        .expect("binary runs")
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Writes `text` as a one-document corpus and extracts it with default settings.
fn extract_text(dir: &Path, doc: &str, text: &str) -> Result<(Vec<MidEntry>, Duration), String> {
    let corpus = dir.join(format!("{doc}-corpus"));
    std::fs::create_dir_all(&corpus).map_err(|e| e.to_string())?;
    std::fs::write(corpus.join(format!("{doc}.txt")), text).map_err(|e| e.to_string())?;
    let out = dir.join(format!("{doc}.jsonl"));
    let start = Instant::now();
    let run = mop(&["extract", "--corpus", corpus.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let elapsed = start.elapsed();
    ensure(run.status.success(), || String::from_utf8_lossy(&run.stderr).into_owned())?;
    let mid = read_mid(&std::fs::read_to_string(&out).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    Ok((mid, elapsed))
}

fn tracheae_end_to_end() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (mid, elapsed) = extract_text(
        dir.path(),
        "Histology",
        "This means that they ingest oxygen from the air via fine hollow tubes, known as tracheae.",
    )?;
    ensure(mid.len() == 1, || format!("expected one entry, got {}", mid.len()))?;
    let e = &mid[0];
    let got = (e.autonym.as_str(), e.information.as_str(), e.markers.as_str());
    ensure(got == ("tracheae", "fine hollow tubes", "known as"), || format!("got {got:?}"))?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))
}

fn filter_discrimination() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let kept = "Since the shame that was elicited by the coding procedure was seldom explicitly mentioned by the patient or the therapist, Lewis called it unacknowledged shame.";
    let rejected = "It was Lewis (1971;1976) who called attention to emotional elements in what until then had been construed as a perceptual phenomenon .";
    let unseen = "\u{201C}Intercursive\u{201D} power, on the other hand, is power in Weber\u{2019}s sense of constraint by an actor or group of actors over others.";
    let (a, _) = extract_text(dir.path(), "kept", kept)?;
    ensure(a.len() == 1 && a[0].autonym == "unacknowledged shame", || format!("kept sentence gave {a:?}"))?;
    let (b, _) = extract_text(dir.path(), "rejected", rejected)?;
    ensure(b.is_empty(), || format!("called attention survived: {b:?}"))?;
    let (c, _) = extract_text(dir.path(), "unseen", unseen)?;
    ensure(c.is_empty(), || format!("pattern-less EMO was extracted: {c:?}"))
}

fn f_measure_reproduction() -> Check {
    for (p, r) in [(0.97, 0.79), (0.94, 0.81)] {
        let f = f_beta(p, r, 1.0);
        ensure((f - 0.87).abs() <= 0.005, || format!("F({p}, {r}) = {f}"))?;
        ensure(round2(f) == 0.87, || format!("F({p}, {r}) rounds to {}", round2(f)))?;
    }
    Ok(())
}

const VALUES: &[&str] = &["a", "b", "c", "d", "BOUNDARY"];

fn value_at(v: &FeatureVector, pos: i32) -> &str {
    let w = v.width as i32;
    match pos {
        p if p < 0 => &v.left[(w + p) as usize],
        0 => &v.marker,
        p => &v.right[(p - 1) as usize],
    }
}

/// Posterior from a count table rebuilt from the raw examples.
fn count_table_posterior(train: &[LabeledExample], alpha: f64, probe: &FeatureVector) -> f64 {
    let w = probe.width as i32;
    let mut score = [0.0; 2];
    for (slot, label) in [Label::Yes, Label::No].into_iter().enumerate() {
        let own: Vec<&LabeledExample> = train.iter().filter(|e| e.label == label).collect();
        let n = own.len() as f64;
        let mut s = n / train.len() as f64;
        for pos in -w..=w {
            let x = value_at(probe, pos);
            let c = own.iter().filter(|e| value_at(&e.vector, pos) == x).count() as f64;
            let vocab: BTreeSet<&str> = train.iter().map(|e| value_at(&e.vector, pos)).collect();
            s *= (c + alpha) / (n + alpha * (vocab.len() as f64 + 1.0));
        }
        score[slot] = s;
    }
    if score[0] + score[1] == 0.0 {
        return train.iter().filter(|e| e.label == Label::Yes).count() as f64 / train.len() as f64;
    }
    score[0] / (score[0] + score[1])
}

fn random_vector(rng: &mut ChaCha8Rng, width: usize) -> FeatureVector {
    let mut pick = || VALUES[rng.random_range(0..VALUES.len())].to_string();
    let left = (0..width).map(|_| pick()).collect();
    let right = (0..width).map(|_| pick()).collect();
    FeatureVector {
        left,
        marker: ["called", "term", "known"][rng.random_range(0..3)].to_string(),
        right,
        kind: FeatureKind::Word,
        width,
    }
}

fn nb_oracle_equivalence() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for round in 0..100 {
        let width = rng.random_range(1..=3);
        let n = rng.random_range(2..=30);
        let alpha = [0.0, 0.1, 0.5, 1.0, 2.5][rng.random_range(0..5)];
        let mut train: Vec<LabeledExample> = (0..n)
            .map(|_| LabeledExample {
                vector: random_vector(&mut rng, width),
                label: if rng.random_bool(0.5) { Label::Yes } else { Label::No },
            })
            .collect();
        train[0].label = Label::Yes;
        train[1].label = Label::No;
        let model = Model::NaiveBayes(train_nb(&train, alpha).map_err(|e| e.to_string())?);
        let mut probes: Vec<FeatureVector> = (0..5).map(|_| random_vector(&mut rng, width)).collect();
        probes[0].right[0] = "zz".into();
        probes.extend(train.iter().map(|e| e.vector.clone()));
        for probe in &probes {
            let (_, p) = classify(&model, probe).map_err(|e| e.to_string())?;
            let expected = count_table_posterior(&train, alpha, probe);
            ensure((p - expected).abs() < 1e-9, || format!("dataset {round}: {p} vs {expected}"))?;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))
}

fn desk_examples(dir: &Path, kind: &str) -> Result<Vec<LabeledExample>, String> {
    let out = dir.join(format!("{kind}.tsv"));
    let run = mop(&[
        "featurize",
        "--corpus",
        desk().join("corpus").to_str().unwrap(),
        "--gold",
        desk().join("gold.jsonl").to_str().unwrap(),
        "--kind",
        kind,
        "--width",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    ensure(run.status.success(), || String::from_utf8_lossy(&run.stderr).into_owned())?;
    parse_examples(&std::fs::read_to_string(out).map_err(|e| e.to_string())?).map_err(|e| e.to_string())
}

fn maxent_training_properties() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let opts = |method| TrainOptions { method, max_iters: 100_000, ll_tolerance: 1e-6 };
    for kind in ["pos", "word"] {
        let ex = desk_examples(dir.path(), kind)?;
        let (m, report) = train_maxent(&ex, &opts(Method::Gis)).map_err(|e| e.to_string())?;
        for w in report.log_likelihood.windows(2) {
            ensure(w[1] >= w[0] - 1e-12, || format!("{kind}: LL fell from {} to {}", w[0], w[1]))?;
        }
        ensure(report.converged, || format!("{kind}: no convergence"))?;
        for (f, (emp, model)) in feature_expectations(&m, &ex).into_iter().enumerate() {
            let rel = (emp - model).abs() / emp.max(1e-12);
            ensure(rel < 1e-3, || format!("{kind} feature {f}: {emp} vs {model}"))?;
        }
    }
    let mut lines = String::new();
    for i in 0..10 {
        lines += &format!("YES\tWORD\t1\tw{}\tcalled\tthe\n", i % 3);
        lines += &format!("NO\tWORD\t1\tw{}\tcalled\tback\n", (i + 1) % 3);
    }
    let sep = parse_examples(&lines).map_err(|e| e.to_string())?;
    let gis = Model::MaxEnt(train_maxent(&sep, &opts(Method::Gis)).map_err(|e| e.to_string())?.0);
    let iis = Model::MaxEnt(train_maxent(&sep, &opts(Method::Iis)).map_err(|e| e.to_string())?.0);
    for e in &sep {
        let a = classify(&gis, &e.vector).map_err(|e| e.to_string())?.0;
        let b = classify(&iis, &e.vector).map_err(|e| e.to_string())?.0;
        ensure(a == b, || format!("GIS {a:?} vs IIS {b:?} on {:?}", e.vector))?;
    }
    Ok(())
}

fn sweep_shape() -> Check {
    let corpus = desk().join("corpus");
    let gold = desk().join("gold.jsonl");
    let args = ["sweep", "--corpus", corpus.to_str().unwrap(), "--gold", gold.to_str().unwrap(), "--mode", "held-out"];
    let (a, b) = (mop(&args), mop(&args));
    ensure(a.status.success(), || String::from_utf8_lossy(&a.stderr).into_owned())?;
    ensure(a.stdout == b.stdout, || "sweep output differs between runs".into())?;
    let text = String::from_utf8_lossy(&a.stdout);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    ensure(rows.len() == 18, || format!("{} rows", rows.len()))?;
    let features = |kind: &str| {
        rows.iter()
            .find(|r| r[2] == kind && r[3] == "1")
            .and_then(|r| r[4].parse::<usize>().ok())
            .ok_or_else(|| format!("no {kind}/1 row"))
    };
    let (word, pos) = (features("WORD")?, features("POS")?);
    ensure(word > pos, || format!("WORD/1 {word} vs POS/1 {pos}"))
}

fn slot(key: &str, autonym: &str) -> SlotRecord {
    SlotRecord {
        key: key.into(),
        doc: "d".into(),
        autonym: autonym.into(),
        information: "x".into(),
        markers: "called".into(),
    }
}

fn similarity_threshold_boundary() -> Check {
    let autonym_tp = |sys: &str, gold: &str, t: f64| -> Result<usize, String> {
        let r = evaluate_mid(&[slot("k", sys)], &[slot("k", gold)], t, EntryPolicy::All, 1.0).map_err(|e| e.to_string())?;
        Ok(r.autonym.tp)
    };
    ensure(autonym_tp("alpha beta", "alpha beta gamma", 0.65)? == 1, || "2/3 overlap scored negative".into())?;
    ensure(autonym_tp("alpha", "alpha beta", 0.65)? == 0, || "1/2 overlap scored positive".into())?;

    let gold_text = std::fs::read_to_string(desk().join("gold_mid.jsonl")).map_err(|e| e.to_string())?;
    let gold: Vec<SlotRecord> = read_mid(&gold_text).map_err(|e| e.to_string())?.iter().map(SlotRecord::from_mid).collect();
    // degrade the gold to create partial overlaps
    let system: Vec<SlotRecord> = gold
        .iter()
        .map(|g| SlotRecord {
            autonym: g.autonym.split_whitespace().last().unwrap_or("").to_string(),
            information: g.information.split_whitespace().skip(1).collect::<Vec<_>>().join(" "),
            ..g.clone()
        })
        .collect();
    let mut last: Option<[usize; 3]> = None;
    for t in [0.5, 0.65, 0.8] {
        let r = evaluate_mid(&system, &gold, t, EntryPolicy::All, 1.0).map_err(|e| e.to_string())?;
        let now = [r.autonym.tp, r.information.tp, r.entry.tp];
        if let Some(prev) = last {
            ensure(now.iter().zip(prev).all(|(n, p)| *n <= p), || format!("threshold {t}: {now:?} after {prev:?}"))?;
        }
        last = Some(now);
    }
    Ok(())
}

fn desk_regression() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().join("mid.jsonl");
    let run = mop(&["extract", "--corpus", desk().join("corpus").to_str().unwrap(), "--out", out.to_str().unwrap()]);
    ensure(run.status.success(), || String::from_utf8_lossy(&run.stderr).into_owned())?;
    let produced = std::fs::read(&out).map_err(|e| e.to_string())?;
    let stored = std::fs::read(desk().join("gold_mid.jsonl")).map_err(|e| e.to_string())?;
    ensure(produced == stored, || "MID differs from the stored fixture".into())?;
    let mid = read_mid(&String::from_utf8_lossy(&produced)).map_err(|e| e.to_string())?;
    let sys: Vec<SlotRecord> = mid.iter().map(SlotRecord::from_mid).collect();
    let r = evaluate_mid(&sys, &sys.clone(), 0.65, EntryPolicy::All, 1.0).map_err(|e| e.to_string())?;
    for (name, m) in [("autonym", &r.autonym), ("information", &r.information), ("markers", &r.markers)] {
        ensure(m.precision == Some(1.0) && m.recall == Some(1.0), || format!("{name}: {m:?}"))?;
    }
    // the gold sentence file must agree with the fixture too
    let gold = read_gold(&std::fs::read_to_string(desk().join("gold.jsonl")).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    ensure(gold.iter().filter(|g| g.is_emo).count() >= mid.len(), || "gold EMO count below MID size".into())
}

fn placeholder_semantics() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (mid, _) = extract_text(
        dir.path(),
        "Chemistry",
        "A few have positive enthalpies of formation. They are called \u{201C}endothermic compounds.\u{201D} A so called cell-type-specific TF can be used by closely related cells.",
    )?;
    let they = mid.iter().find(|e| e.information == "They").ok_or("no anaphoric entry")?;
    ensure(they.flags.contains(&Flag::AnaphoricUnresolved), || format!("{they:?}"))?;
    ensure(they.autonym == "endothermic compounds", || format!("{they:?}"))?;
    let x = mid.iter().find(|e| e.information == EXISTENTIAL).ok_or("no existential entry")?;
    ensure(x.flags.contains(&Flag::ExistentialPlaceholder), || format!("{x:?}"))?;
    ensure(x.autonym == "cell-type-specific TF", || format!("{x:?}"))?;
    for e in &mid {
        ensure(!e.information.contains("enthalpies"), || format!("antecedent substituted: {e:?}"))?;
    }
    Ok(())
}

fn main() {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("tracheae end-to-end", tracheae_end_to_end),
        ("filter discrimination", filter_discrimination),
        ("F-measure reproduction", f_measure_reproduction),
        ("NB oracle equivalence", nb_oracle_equivalence),
        ("MaxEnt training properties", maxent_training_properties),
        ("sweep shape", sweep_shape),
        ("similarity threshold boundary", similarity_threshold_boundary),
        ("desk-corpus regression", desk_regression),
        ("placeholder semantics", placeholder_semantics),
    ];
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(()) => println!("PASS {} {name}", n + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", n + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
