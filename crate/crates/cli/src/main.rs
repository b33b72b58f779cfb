//! `mop`: batch extraction, training, evaluation and sweeps.
//!
//! Exit codes: 0 success, 1 unexpected failure, 2 resource or usage error,
//! 3 data error, 4 gold/corpus alignment error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mop_core::config::{load_config, FilterMode, PipelineConfig, RunManifest};
use mop_core::corpus::{load_corpus_dir, load_manifest, Document};
use mop_core::evaluation::{
    evaluate_filtering, evaluate_mid, labeled_instances, read_gold, EntryPolicy, EvalReport, GoldRecord, SlotRecord,
};
use mop_core::extraction::{build_mid, read_mid, write_mid_jsonl, write_mid_tsv, MidEntry};
use mop_core::filter::{
    evaluate_sweep, format_example, parse_examples, save_model, split_held_out, train_maxent, train_nb, Algorithm,
    FeatureKind, LabeledExample, Method, Model, SplitMode, SweepGrid, SweepRow, TrainOptions,
};
use mop_core::{Error, ErrorClass};

#[derive(Parser)]
#[command(name = "mop", version, about = "Extract explicit metalinguistic operations into a MID")]
struct Cli {
    /// `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one configuration key (repeatable), e.g. `--set width=2`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline and write the MID, its TSV view and a manifest.
    Extract(ExtractArgs),
    /// Train a filter classifier.
    Train(TrainArgs),
    /// Score filtering and MID slots against gold annotations.
    Eval(EvalArgs),
    /// Compare every algorithm, feature kind and window width.
    Sweep(SweepArgs),
    /// Re-export a MID as JSON lines or TSV.
    Export(ExportArgs),
    /// Write labeled feature vectors for gold-annotated candidates.
    Featurize(FeaturizeArgs),
}

#[derive(Args, Default)]
struct ResourceArgs {
    #[arg(long)]
    patterns: Option<PathBuf>,
    #[arg(long)]
    collocations: Option<PathBuf>,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long)]
    rules: Option<PathBuf>,
    #[arg(long)]
    abbreviations: Option<PathBuf>,
    /// Resource directory; defaults to $MOP_RESOURCES.
    #[arg(long)]
    resources: Option<PathBuf>,
}

#[derive(Args)]
struct ExtractArgs {
    /// Corpus directory (or a manifest file).
    #[arg(long)]
    corpus: PathBuf,
    #[command(flatten)]
    res: ResourceArgs,
    #[arg(long, value_enum)]
    filter: Option<FilterArg>,
    /// Trained model, used with `--filter classifier`.
    #[arg(long)]
    model: Option<PathBuf>,
    /// JSON lines output; the TSV view and manifest are written beside it.
    #[arg(long, default_value = "mid.jsonl")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum FilterArg {
    Collocation,
    Classifier,
    None,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Nb,
    Gis,
    Iis,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Nb => Algorithm::NaiveBayes,
            AlgoArg::Gis => Algorithm::Gis,
            AlgoArg::Iis => Algorithm::Iis,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Pos,
    Word,
}

impl From<KindArg> for FeatureKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Pos => FeatureKind::Pos,
            KindArg::Word => FeatureKind::Word,
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    /// Labeled example file (`mop featurize` output).
    #[arg(long, conflicts_with_all = ["corpus", "gold"])]
    data: Option<PathBuf>,
    #[arg(long, requires = "gold")]
    corpus: Option<PathBuf>,
    #[arg(long, requires = "corpus")]
    gold: Option<PathBuf>,
    #[command(flatten)]
    res: ResourceArgs,
    #[arg(long, value_enum)]
    algo: Option<AlgoArg>,
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    #[arg(long)]
    width: Option<usize>,
    /// Naive Bayes smoothing.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = TrainOptions::default().max_iters)]
    max_iters: usize,
    #[arg(long, default_value_t = TrainOptions::default().ll_tolerance)]
    tolerance: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Gold annotations (JSON lines).
    #[arg(long)]
    gold: PathBuf,
    /// Score MID slots against a gold MID instead of the annotation slots.
    #[arg(long)]
    gold_mid: Option<PathBuf>,
    /// Score MID slots only on gold EMOs that some trigger pattern matched.
    #[arg(long)]
    golden_standard: bool,
    #[command(flatten)]
    res: ResourceArgs,
    #[arg(long, value_enum)]
    filter: Option<FilterArg>,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long, value_enum)]
    entry_policy: Option<PolicyArg>,
    #[arg(long)]
    report_csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Any,
    All,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum ModeArg {
    HeldOut,
    HeldIn,
    Both,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    gold: PathBuf,
    #[command(flatten)]
    res: ResourceArgs,
    #[arg(long, value_enum, default_value = "both")]
    mode: ModeArg,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = TrainOptions::default().max_iters)]
    max_iters: usize,
    /// CSV output; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Jsonl,
    Tsv,
}

#[derive(Args)]
struct ExportArgs {
    /// MID in JSON lines.
    #[arg(long)]
    mid: PathBuf,
    #[arg(long, value_enum, default_value = "jsonl")]
    format: FormatArg,
    /// Standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FeaturizeArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    gold: PathBuf,
    #[command(flatten)]
    res: ResourceArgs,
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    #[arg(long)]
    width: Option<usize>,
    /// Standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<Error>()) {
        Some(e) => match e.class() {
            ErrorClass::Resource => 2,
            ErrorClass::Data => 3,
            ErrorClass::Alignment => 4,
        },
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // Library errors already embed their cause in the message.
            let mut msg = String::new();
            for cause in e.chain() {
                let c = cause.to_string();
                if !msg.contains(&c) {
                    if !msg.is_empty() {
                        msg.push_str(": ");
                    }
                    msg.push_str(&c);
                }
            }
            eprintln!("error: {msg}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut overrides = Vec::new();
    for kv in &cli.set {
        let Some((k, v)) = kv.split_once('=') else {
            bail!(Error::Config(format!("--set expects KEY=VALUE, got `{kv}`")));
        };
        overrides.push((k.trim().to_string(), v.trim().to_string()));
    }
    let cfg = load_config(cli.config.as_deref(), &overrides)?;
    match cli.command {
        Command::Extract(a) => extract(cfg, a),
        Command::Train(a) => train(cfg, a),
        Command::Eval(a) => eval(cfg, a),
        Command::Sweep(a) => sweep(cfg, a),
        Command::Export(a) => export(a),
        Command::Featurize(a) => featurize(cfg, a),
    }
}

/// Command-line flags win over the config file, which wins over the
/// environment fallback.
fn apply_resources(cfg: &mut PipelineConfig, r: &ResourceArgs) {
    let pick = |flag: &Option<PathBuf>, slot: &mut Option<PathBuf>| {
        if flag.is_some() {
            slot.clone_from(flag);
        }
    };
    pick(&r.patterns, &mut cfg.patterns_path);
    pick(&r.collocations, &mut cfg.collocations_path);
    pick(&r.lexicon, &mut cfg.lexicon_path);
    pick(&r.rules, &mut cfg.rules_path);
    pick(&r.abbreviations, &mut cfg.abbreviations_path);
    pick(&r.resources, &mut cfg.resource_root);
    if cfg.resource_root.is_none() {
        cfg.resource_root = std::env::var_os("MOP_RESOURCES").map(PathBuf::from);
    }
}

fn apply_filter(cfg: &mut PipelineConfig, filter: Option<FilterArg>, model: &Option<PathBuf>) {
    if let Some(f) = filter {
        cfg.filter_mode = match f {
            FilterArg::Collocation => FilterMode::Collocation,
            FilterArg::Classifier => FilterMode::Classifier,
            FilterArg::None => FilterMode::None,
        };
    }
    if model.is_some() {
        cfg.model_path.clone_from(model);
    }
}

fn load_docs(path: &Path) -> Result<Vec<Document>> {
    let docs = if path.is_file() { load_manifest(path)? } else { load_corpus_dir(path)? };
    Ok(docs)
}

fn read(path: &Path) -> Result<String> {
    Ok(fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

fn write(path: &Path, content: &str) -> Result<()> {
    fs::write(path, content).map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn emit(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => write(p, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn load_gold(path: &Path) -> Result<Vec<GoldRecord>> {
    Ok(read_gold(&read(path)?)?)
}

/// Seconds since the epoch, honoring SOURCE_DATE_EPOCH for reproducible output.
fn now() -> chrono::DateTime<chrono::Utc> {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|s| chrono::DateTime::from_timestamp(s, 0))
        .unwrap_or_else(chrono::Utc::now)
}

fn extract(mut cfg: PipelineConfig, a: ExtractArgs) -> Result<()> {
    apply_resources(&mut cfg, &a.res);
    apply_filter(&mut cfg, a.filter, &a.model);
    let pipeline = cfg.build_pipeline()?;
    let docs = load_docs(&a.corpus)?;
    let (entries, _) = build_mid(&docs, &pipeline)?;
    let mids: Vec<MidEntry> = entries.into_iter().map(|e| e.entry).collect();
    write(&a.out, &write_mid_jsonl(&mids))?;
    write(&a.out.with_extension("tsv"), &write_mid_tsv(&mids))?;
    let manifest = RunManifest::new(&cfg, &docs, mids.len(), now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
    write(&a.out.with_extension("manifest.json"), &manifest.to_json())?;
    eprintln!("{} documents, {} entries -> {}", docs.len(), mids.len(), a.out.display());
    Ok(())
}

fn gold_examples(cfg: &PipelineConfig, corpus: &Path, gold: &Path, kind: FeatureKind, width: usize) -> Result<Vec<LabeledExample>> {
    let pipeline = cfg.build_pipeline()?;
    let instances = labeled_instances(&pipeline, &load_docs(corpus)?, &load_gold(gold)?)?;
    Ok(instances.iter().map(|i| i.example(kind, width)).collect::<mop_core::Result<_>>()?)
}

fn train(mut cfg: PipelineConfig, a: TrainArgs) -> Result<()> {
    apply_resources(&mut cfg, &a.res);
    if let Some(x) = a.algo {
        cfg.classifier = x.into();
    }
    if let Some(k) = a.kind {
        cfg.feature_kind = k.into();
    }
    if let Some(w) = a.width {
        cfg.width = w;
    }
    if let Some(x) = a.alpha {
        cfg.alpha = x;
    }
    cfg.validate()?;
    let examples = match (&a.data, &a.corpus, &a.gold) {
        (Some(d), _, _) => {
            let ex = parse_examples(&read(d)?)?;
            if let Some(e) = ex.iter().find(|e| e.vector.shape() != (cfg.feature_kind, cfg.width)) {
                if a.kind.is_some() || a.width.is_some() {
                    bail!(Error::MixedFeatures);
                }
                (cfg.feature_kind, cfg.width) = e.vector.shape();
            }
            ex
        }
        (None, Some(c), Some(g)) => gold_examples(&cfg, c, g, cfg.feature_kind, cfg.width)?,
        _ => bail!(Error::Config("train needs --data or --corpus with --gold".into())),
    };
    println!("examples: {}", examples.len());
    let model = match cfg.classifier {
        Algorithm::NaiveBayes => {
            let m = train_nb(&examples, cfg.alpha)?;
            let w = m.width as i32;
            let sizes: Vec<String> = (-w..=w).map(|p| format!("{p}:{}", m.vocabulary(p))).collect();
            println!("model: NB alpha {}", m.alpha);
            println!("features: {}", m.feature_count());
            println!("vocabulary: {}", sizes.join(" "));
            Model::NaiveBayes(m)
        }
        algo => {
            let method = if algo == Algorithm::Gis { Method::Gis } else { Method::Iis };
            let opts = TrainOptions {
                method,
                max_iters: a.max_iters,
                ll_tolerance: a.tolerance,
            };
            let (m, report) = train_maxent(&examples, &opts)?;
            println!("model: {method}");
            println!("features: {}", m.feature_count());
            println!("iterations: {}{}", report.iterations(), if report.converged { "" } else { " (not converged)" });
            println!("log-likelihood: {:.6}", report.final_log_likelihood());
            Model::MaxEnt(m)
        }
    };
    write(&a.out, &save_model(&model, &now().format("%Y-%m-%d").to_string()))?;
    Ok(())
}

fn eval(mut cfg: PipelineConfig, a: EvalArgs) -> Result<()> {
    apply_resources(&mut cfg, &a.res);
    apply_filter(&mut cfg, a.filter, &a.model);
    if let Some(b) = a.beta {
        cfg.beta = b;
    }
    if let Some(t) = a.threshold {
        cfg.threshold = t;
    }
    if let Some(p) = a.entry_policy {
        cfg.entry_policy = match p {
            PolicyArg::Any => EntryPolicy::Any,
            PolicyArg::All => EntryPolicy::All,
        };
    }
    let pipeline = cfg.build_pipeline()?;
    let docs = load_docs(&a.corpus)?;
    let gold = load_gold(&a.gold)?;
    let (entries, outcomes) = build_mid(&docs, &pipeline)?;
    let filtering = evaluate_filtering(&outcomes, &gold, false, cfg.beta)?;
    let golden_standard = evaluate_filtering(&outcomes, &gold, true, cfg.beta)?;
    let mid = if let Some(path) = &a.gold_mid {
        let gold_mid = read_mid(&read(path)?)?;
        let sys: Vec<SlotRecord> = entries.iter().map(|e| SlotRecord::from_mid(&e.entry)).collect();
        let gld: Vec<SlotRecord> = gold_mid.iter().map(SlotRecord::from_mid).collect();
        Some(evaluate_mid(&sys, &gld, cfg.threshold, cfg.entry_policy, cfg.beta)?)
    } else if gold.iter().any(GoldRecord::has_slots) {
        let matched: std::collections::BTreeSet<String> =
            outcomes.iter().filter(|o| o.matched).map(|o| o.sentence_ref.to_string()).collect();
        let sys: Vec<SlotRecord> = entries.iter().map(SlotRecord::from_extracted).collect();
        let gld: Vec<SlotRecord> = gold
            .iter()
            .filter_map(SlotRecord::from_gold)
            .filter(|g| !a.golden_standard || matched.contains(&g.key))
            .collect();
        Some(evaluate_mid(&sys, &gld, cfg.threshold, cfg.entry_policy, cfg.beta)?)
    } else {
        None
    };
    let report = EvalReport {
        filtering,
        golden_standard,
        mid,
    };
    print!("{}", report.table());
    if let Some(p) = &a.report_csv {
        write(p, &report.csv())?;
    }
    Ok(())
}

fn sweep(mut cfg: PipelineConfig, a: SweepArgs) -> Result<()> {
    apply_resources(&mut cfg, &a.res);
    if let Some(x) = a.alpha {
        cfg.alpha = x;
    }
    cfg.validate()?;
    let pipeline = cfg.build_pipeline()?;
    let instances = labeled_instances(&pipeline, &load_docs(&a.corpus)?, &load_gold(&a.gold)?)?;
    let grid = SweepGrid {
        alpha: cfg.alpha,
        train: TrainOptions {
            max_iters: a.max_iters,
            ..TrainOptions::default()
        },
        ..SweepGrid::default()
    };
    let mut rows: Vec<SweepRow> = Vec::new();
    if a.mode != ModeArg::HeldIn {
        let (train, test) = split_held_out(&instances);
        rows.extend(evaluate_sweep(&train, &test, &grid, SplitMode::HeldOut)?);
    }
    if a.mode != ModeArg::HeldOut {
        rows.extend(evaluate_sweep(&instances, &instances, &grid, SplitMode::HeldIn)?);
    }
    let mut csv = format!("{}\n", SweepRow::CSV_HEADER);
    for r in &rows {
        csv.push_str(&r.csv());
        csv.push('\n');
    }
    emit(a.out.as_deref(), &csv)
}

fn export(a: ExportArgs) -> Result<()> {
    let mids = read_mid(&read(&a.mid)?).with_context(|| format!("reading {}", a.mid.display()))?;
    let text = match a.format {
        FormatArg::Jsonl => write_mid_jsonl(&mids),
        FormatArg::Tsv => write_mid_tsv(&mids),
    };
    emit(a.out.as_deref(), &text)
}

fn featurize(mut cfg: PipelineConfig, a: FeaturizeArgs) -> Result<()> {
    apply_resources(&mut cfg, &a.res);
    if let Some(k) = a.kind {
        cfg.feature_kind = k.into();
    }
    if let Some(w) = a.width {
        cfg.width = w;
    }
    cfg.validate()?;
    let examples = gold_examples(&cfg, &a.corpus, &a.gold, cfg.feature_kind, cfg.width)?;
    let mut out = String::new();
    for e in &examples {
        out.push_str(&format_example(e));
        out.push('\n');
    }
    emit(a.out.as_deref(), &out)
}
