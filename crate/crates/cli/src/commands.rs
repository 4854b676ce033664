use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use compnli::corpus::{label_distribution, load_corpus, save_corpus, Corpus, CorpusFormat, Label};
use compnli::diagnostics::{
    conditional_stats_par, has_antonym_pair, high_overlap_subset_from, negation_differs,
    rank_by_overlap_with, top_k_label_distribution, OverlapMeasure,
};
use compnli::generator::{
    concat, generate, parse_pool, split, vocab_diff, GeneratorConfig, PairType, SplitSizes,
};
use compnli::lexicon::{load_embeddings, load_thesaurus, EmbeddingTable};
use compnli::models::{
    evaluate, finetune, load_classifier, mix, save_classifier, train, two_proportion_test,
    Combiner, EncoderKind, Hyperparameters, TrainingLog,
};
use compnli::report::{
    conditional_table, confusion_table, overlap_table, sha256_file, Manifest, ReportContext,
    ReportFormat, Table,
};
use serde_json::json;

use crate::{
    Cli, Command, EvalArgs, FileFormat, FinetuneArgs, Format, GenerateArgs, HyperArgs, MixArgs,
    SigtestArgs, StatsArgs, StatsKind, TrainArgs, VocabDiffArgs,
};

#[derive(Debug)]
pub struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(message: impl Into<String>) -> anyhow::Error {
    UsageError(message.into()).into()
}

/// 1 for usage errors, 2 for data errors, 3 for numerical failures.
pub fn exit_code(error: &anyhow::Error) -> u8 {
    for cause in error.chain() {
        if cause.downcast_ref::<UsageError>().is_some() {
            return 1;
        }
        if let Some(e) = cause.downcast_ref::<compnli::Error>() {
            return match e {
                compnli::Error::NonFiniteLoss { .. } => 3,
                compnli::Error::InvalidConfig(_)
                | compnli::Error::InfeasibleSplit(_)
                | compnli::Error::InvalidArgument(_) => 1,
                _ => 2,
            };
        }
    }
    2
}

/// Collects inputs and outputs of one invocation and writes its manifest.
struct Run {
    format: ReportFormat,
    threads: usize,
    seed: u64,
    manifest: Manifest,
}

impl Run {
    fn input(&mut self, path: &Path) -> Result<()> {
        self.manifest.add_input(path)?;
        Ok(())
    }

    fn write(&mut self, path: &Path, contents: &str) -> Result<()> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
        fs::write(path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.manifest.add_output(path);
        Ok(())
    }

    fn corpus(&mut self, path: &Path) -> Result<Corpus> {
        self.input(path)?;
        let loaded = load_corpus(path, CorpusFormat::from_path(path))?;
        if loaded.skipped > 0 {
            eprintln!(
                "warning: {}: skipped {} unusable lines",
                path.display(),
                loaded.skipped
            );
        }
        Ok(loaded.corpus)
    }

    fn embeddings(&mut self, path: &Path, corpora: &[&Corpus]) -> Result<EmbeddingTable> {
        let vocab: HashSet<String> = corpora
            .iter()
            .flat_map(|c| c.iter())
            .flat_map(|p| p.premise.tokens().iter().chain(p.hypothesis.tokens()))
            .cloned()
            .collect();
        let loaded = load_embeddings(path, Some(&vocab))?;
        if loaded.rejected > 0 {
            eprintln!(
                "warning: {}: rejected {} malformed lines",
                path.display(),
                loaded.rejected
            );
        }
        let table = loaded.table;
        self.manifest.inputs.push(compnli::report::InputHash {
            path: path.display().to_string(),
            sha256: table.source_sha256().unwrap_or_default().to_string(),
        });
        eprintln!(
            "{} of {} corpus tokens have vectors",
            table.len(),
            vocab.len()
        );
        Ok(table)
    }

    fn print(&self, table: &Table) {
        print!("{}", table.render(self.format));
    }
}

fn manifest_path(out: &Path, is_dir: bool) -> PathBuf {
    if is_dir {
        out.join("manifest.json")
    } else {
        let mut name = out.as_os_str().to_owned();
        name.push(".manifest.json");
        PathBuf::from(name)
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    if cli.threads == 0 {
        return Err(usage("--threads must be at least 1"));
    }
    let (name, out, is_dir) = match &cli.command {
        Command::Generate(a) => ("generate", &a.out, true),
        Command::Stats(a) => ("stats", &a.out, true),
        Command::VocabDiff(a) => ("vocab-diff", &a.out, false),
        Command::Train(a) => ("train", &a.out, false),
        Command::Eval(a) => ("eval", &a.out, true),
        Command::Mix(a) => ("mix", &a.out, false),
        Command::Finetune(a) => ("finetune", &a.out, false),
        Command::Sigtest(a) => ("sigtest", &a.out, false),
    };
    let mut run = Run {
        format: match cli.format {
            Format::Tsv => ReportFormat::Tsv,
            Format::Human => ReportFormat::Human,
        },
        threads: cli.threads,
        seed: cli.seed,
        manifest: Manifest::new(name, serde_json::to_value(cli)?),
    };
    match &cli.command {
        Command::Generate(a) => cmd_generate(&mut run, a)?,
        Command::Stats(a) => cmd_stats(&mut run, a)?,
        Command::VocabDiff(a) => cmd_vocab_diff(&mut run, a)?,
        Command::Train(a) => cmd_train(&mut run, a)?,
        Command::Eval(a) => cmd_eval(&mut run, a)?,
        Command::Mix(a) => cmd_mix(&mut run, a)?,
        Command::Finetune(a) => cmd_finetune(&mut run, a)?,
        Command::Sigtest(a) => cmd_sigtest(&mut run, a)?,
    }
    let path = manifest_path(out, is_dir);
    run.manifest.write(&path)?;
    Ok(())
}

fn data_dir_file(explicit: &Option<PathBuf>, name: &str, flag: &str) -> Result<PathBuf> {
    if let Some(p) = explicit {
        return Ok(p.clone());
    }
    let dir = std::env::var_os("COMPNLI_DATA_DIR")
        .ok_or_else(|| usage(format!("--{flag} not given and COMPNLI_DATA_DIR is unset")))?;
    Ok(PathBuf::from(dir).join(name))
}

fn embeddings_path(explicit: &Option<PathBuf>) -> Result<PathBuf> {
    if let Some(p) = explicit {
        return Ok(p.clone());
    }
    let dir = std::env::var_os("COMPNLI_DATA_DIR")
        .ok_or_else(|| usage("--embeddings not given and COMPNLI_DATA_DIR is unset"))?;
    let dir = PathBuf::from(dir);
    let mut found: Vec<PathBuf> = fs::read_dir(&dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().and_then(|n| n.to_str()).unwrap_or("");
            name.starts_with("glove") && name.ends_with(".txt")
        })
        .collect();
    found.sort();
    found
        .into_iter()
        .next()
        .ok_or_else(|| anyhow::anyhow!("no glove*.txt file in {}", dir.display()))
}

fn corpus_format(format: FileFormat) -> CorpusFormat {
    match format {
        FileFormat::Jsonl => CorpusFormat::SnliJsonl,
        FileFormat::Tsv => CorpusFormat::Tsv,
    }
}

fn write_corpus(run: &mut Run, corpus: &Corpus, path: &Path, format: CorpusFormat) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    save_corpus(corpus, path, format)?;
    run.manifest.add_output(path);
    Ok(())
}

fn cmd_generate(run: &mut Run, args: &GenerateArgs) -> Result<()> {
    let defaults = GeneratorConfig::default_pools(run.seed);
    let mut pool = |path: &Option<PathBuf>, default: Vec<String>| -> Result<Vec<String>> {
        match path {
            Some(p) => {
                let text = fs::read_to_string(p)
                    .with_context(|| format!("reading pool file {}", p.display()))?;
                run.input(p)?;
                Ok(parse_pool(&text))
            }
            None => Ok(default),
        }
    };
    let subjects = pool(&args.subjects, defaults.subjects)?;
    let adjectives = pool(&args.adjectives, defaults.adjectives)?;
    let pair_types = args
        .types
        .iter()
        .map(|t| t.parse::<PairType>())
        .collect::<compnli::Result<Vec<_>>>()?;
    if args.split.len() != 3 {
        return Err(usage("--split expects three sizes: train,validation,test"));
    }
    let sizes = (!args.no_split).then(|| SplitSizes {
        train: args.split[0],
        validation: args.split[1],
        test: args.split[2],
    });
    let config = GeneratorConfig {
        subjects,
        adjectives,
        pair_types,
        split_sizes: sizes,
        seed: run.seed,
    };
    config.validate()?;
    let corpora = generate(&config)?;
    let format = corpus_format(args.corpus_format);
    let ext = format.extension();

    let mut table = Table::new(
        "Generated Comparisons corpora",
        &["corpus", "premises", "pairs"],
    )
    .with_context("subjects", config.subjects.len().to_string())
    .with_context("adjectives", config.adjectives.len().to_string())
    .with_context("seed", run.seed.to_string());
    let mut counts = BTreeMap::new();
    for (kind, corpus) in &corpora {
        write_corpus(
            run,
            corpus,
            &args.out.join(format!("{}.{ext}", corpus.name)),
            format,
        )?;
        table.push(vec![
            corpus.name.clone(),
            (corpus.len() / 2).to_string(),
            corpus.len().to_string(),
        ]);
        counts.insert(kind.as_str().to_string(), corpus.len());
    }
    let mut split_counts = BTreeMap::new();
    if let Some(sizes) = sizes {
        let all: Vec<&Corpus> = corpora.values().collect();
        let splits = split(&concat("comparisons", &all), sizes, run.seed)?;
        for (name, corpus) in [
            ("train", &splits.train),
            ("validation", &splits.validation),
            ("test", &splits.test),
        ] {
            write_corpus(run, corpus, &args.out.join(format!("{name}.{ext}")), format)?;
            table.push(vec![name.to_string(), "-".into(), corpus.len().to_string()]);
            split_counts.insert(name, corpus.len());
        }
    }
    run.manifest.results = json!({ "pairs_per_type": counts, "splits": split_counts });
    run.print(&table);
    Ok(())
}

fn parse_subset(spec: &str) -> Result<usize> {
    spec.strip_prefix("top:")
        .and_then(|k| k.parse::<usize>().ok())
        .filter(|&k| k > 0)
        .ok_or_else(|| usage(format!("--subset expects top:K with K > 0, got {spec:?}")))
}

fn cmd_stats(run: &mut Run, args: &StatsArgs) -> Result<()> {
    let path = data_dir_file(&args.corpus, "snli_1.0_train.jsonl", "corpus")?;
    let measure: OverlapMeasure = args.measure.parse()?;
    let mut corpus = run.corpus(&path)?;
    if let Some(spec) = &args.subset {
        let k = parse_subset(spec)?;
        let r = rank_by_overlap_with(&corpus, measure, run.threads)?;
        corpus = high_overlap_subset_from(&r, &corpus, k)?;
    }
    let mut ctx = ReportContext {
        corpus: corpus.name.clone(),
        predicate: String::new(),
        thesaurus_sha256: None,
    };
    let (stem, table) = match args.kind {
        StatsKind::Overlap => {
            let r = rank_by_overlap_with(&corpus, measure, run.threads)?;
            ctx.predicate = format!("overlap ({})", args.measure);
            let mut rows = Vec::new();
            for &k in &args.top {
                rows.push((k.to_string(), k, top_k_label_distribution(&r, &corpus, k)?));
            }
            rows.push((
                "all".to_string(),
                corpus.len(),
                label_distribution(&corpus)?,
            ));
            let mut rates = String::from("rank\tindex\tsource_id\trate\tlabel\n");
            for (rank, entry) in r.entries.iter().enumerate() {
                let pair = &corpus.pairs[entry.index];
                rates.push_str(&format!(
                    "{}\t{}\t{}\t{:.6}\t{}\n",
                    rank + 1,
                    entry.index,
                    pair.source_id,
                    entry.rate,
                    pair.label
                ));
            }
            run.write(&args.out.join("overlap_rates.tsv"), &rates)?;
            ("overlap", overlap_table(&ctx, &rows))
        }
        StatsKind::Antonym => {
            let tpath = data_dir_file(&args.thesaurus, "thesaurus.jsonl", "thesaurus")?;
            let thesaurus = load_thesaurus(&tpath)?;
            run.input(&tpath)?;
            ctx.predicate = "antonym".into();
            ctx.thesaurus_sha256 = Some(sha256_file(&tpath)?);
            let stats = conditional_stats_par(
                &corpus,
                |p| has_antonym_pair(p, &thesaurus),
                "antonym",
                run.threads,
            )?;
            ("antonym", conditional_table(&ctx, &stats))
        }
        StatsKind::Negation => {
            ctx.predicate = "negation".into();
            let stats = conditional_stats_par(&corpus, negation_differs, "negation", run.threads)?;
            ("negation", conditional_table(&ctx, &stats))
        }
        StatsKind::VocabDiff => {
            let against = args
                .against
                .as_ref()
                .ok_or_else(|| usage("stats vocab-diff needs --against"))?;
            let other = run.corpus(against)?;
            ctx.predicate = format!("vocab-diff against {}", other.name);
            (
                "vocab-diff",
                vocab_table(&ctx, &corpus, &other, args.threshold),
            )
        }
    };
    run.write(&args.out.join(format!("{stem}.tsv")), &table.to_tsv())?;
    run.write(&args.out.join(format!("{stem}.txt")), &table.to_human())?;
    run.print(&table);
    Ok(())
}

fn vocab_table(ctx: &ReportContext, a: &Corpus, b: &Corpus, threshold: f64) -> Table {
    let mut table = Table::new(
        format!("Tokens whose rate differs by more than {threshold}"),
        &[
            "token",
            &format!("rate_{}", a.name),
            &format!("rate_{}", b.name),
            "gap",
        ],
    )
    .with_context("corpus", &ctx.corpus)
    .with_context("predicate", &ctx.predicate)
    .with_context("tokenizer", compnli::corpus::TOKENIZER_VERSION);
    for g in vocab_diff(a, b, threshold) {
        table.push(vec![
            g.token.clone(),
            format!("{:.6}", g.rate_a),
            format!("{:.6}", g.rate_b),
            format!("{:.6}", g.gap()),
        ]);
    }
    table
}

fn cmd_vocab_diff(run: &mut Run, args: &VocabDiffArgs) -> Result<()> {
    let a = run.corpus(&args.a)?;
    let b = run.corpus(&args.b)?;
    let ctx = ReportContext {
        corpus: a.name.clone(),
        predicate: format!("vocab-diff against {}", b.name),
        thesaurus_sha256: None,
    };
    let table = vocab_table(&ctx, &a, &b, args.threshold);
    run.write(&args.out, &table.to_tsv())?;
    run.print(&table);
    Ok(())
}

fn hyperparameters(args: &HyperArgs, base: Hyperparameters) -> Result<Hyperparameters> {
    let mut h = base;
    if let Some(v) = args.hidden {
        h.hidden_dim = v;
    }
    if let Some(v) = &args.combiner {
        h.combiner = v.parse::<Combiner>()?;
    }
    if let Some(v) = args.batch_size {
        h.batch_size = v;
    }
    if let Some(v) = args.learning_rate {
        h.learning_rate = v;
    }
    if let Some(v) = args.decay {
        h.decay = v;
    }
    if let Some(v) = args.shrink {
        h.shrink = v;
    }
    if let Some(v) = args.min_learning_rate {
        h.min_learning_rate = v;
    }
    if let Some(v) = args.max_epochs {
        h.max_epochs = v;
    }
    if let Some(v) = args.max_grad_norm {
        h.max_grad_norm = v;
    }
    h.validate()?;
    Ok(h)
}

fn log_table(log: &TrainingLog) -> Table {
    let mut header = vec!["epoch", "learning_rate", "train_accuracy", "dev_accuracy"];
    let monitors: Vec<String> = log
        .monitors
        .iter()
        .map(|m| format!("{m}_accuracy"))
        .collect();
    header.extend(monitors.iter().map(String::as_str));
    let mut table = Table::new("Training log", &header)
        .with_context(
            "best_epoch",
            log.best_epoch
                .map(|e| e.to_string())
                .unwrap_or_else(|| "none".into()),
        )
        .with_context("stop", format!("{:?}", log.stop));
    for e in &log.epochs {
        let mut row = vec![
            e.epoch.to_string(),
            format!("{:e}", e.learning_rate),
            format!("{:.4}", e.train_accuracy),
            format!("{:.4}", e.dev_accuracy),
        ];
        row.extend(e.monitor_accuracy.iter().map(|a| format!("{a:.4}")));
        table.push(row);
    }
    table
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

fn report_training(run: &mut Run, out: &Path, log: &TrainingLog) -> Result<()> {
    if log.all_oov_sentences > 0 {
        eprintln!(
            "warning: {} sentences had no token with a vector and were encoded as zero",
            log.all_oov_sentences
        );
    }
    run.write(&sibling(out, ".log.tsv"), &log.to_tsv())?;
    run.manifest.results = json!({
        "epochs": log.epochs.len(),
        "best_epoch": log.best_epoch,
        "all_oov_sentences": log.all_oov_sentences,
    });
    run.print(&log_table(log));
    Ok(())
}

fn cmd_train(run: &mut Run, args: &TrainArgs) -> Result<()> {
    let train_path = data_dir_file(&args.train, "snli_1.0_train.jsonl", "train")?;
    let dev_path = data_dir_file(&args.dev, "snli_1.0_dev.jsonl", "dev")?;
    let encoder: EncoderKind = args.encoder.parse()?;
    let hyper = hyperparameters(&args.hyper, Hyperparameters::default())?;
    let train_set = run.corpus(&train_path)?;
    let dev = run.corpus(&dev_path)?;
    let table = run.embeddings(&embeddings_path(&args.embeddings)?, &[&train_set, &dev])?;
    let (classifier, log) = train(&train_set, &dev, &table, encoder, &hyper, run.seed)?;
    if let Some(parent) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    save_classifier(&classifier, &args.out)?;
    run.manifest.add_output(&args.out);
    report_training(run, &args.out, &log)
}

fn cmd_finetune(run: &mut Run, args: &FinetuneArgs) -> Result<()> {
    run.input(&args.model)?;
    let classifier = load_classifier(&args.model)?;
    let hyper = hyperparameters(&args.hyper, classifier.meta.hyperparameters.clone())?;
    let train_set = run.corpus(&args.train)?;
    let dev = run.corpus(&args.dev)?;
    let mut held_out = Vec::new();
    for p in &args.held_out {
        held_out.push(run.corpus(p)?);
    }
    let mut all: Vec<&Corpus> = vec![&train_set, &dev];
    all.extend(held_out.iter());
    let table = run.embeddings(&embeddings_path(&args.embeddings)?, &all)?;
    let monitors: Vec<(&str, &Corpus)> = held_out.iter().map(|c| (c.name.as_str(), c)).collect();
    let (tuned, log) = finetune(
        &classifier,
        &table,
        &train_set,
        &dev,
        &monitors,
        &hyper,
        run.seed,
    )?;
    save_classifier(&tuned, &args.out)?;
    run.manifest.add_output(&args.out);
    report_training(run, &args.out, &log)
}

fn cmd_eval(run: &mut Run, args: &EvalArgs) -> Result<()> {
    run.input(&args.model)?;
    let classifier = load_classifier(&args.model)?;
    let test_path = data_dir_file(&args.test, "snli_1.0_test.jsonl", "test")?;
    let test = run.corpus(&test_path)?;
    let table = run.embeddings(&embeddings_path(&args.embeddings)?, &[&test])?;
    let eval = evaluate(&classifier, &table, &test)?;

    let mut summary = Table::new("Accuracy", &["subset", "pairs", "accuracy"])
        .with_context("corpus", &test.name)
        .with_context("encoder", classifier.encoder.as_str());
    summary.push(vec![
        "all".into(),
        eval.confusion.total().to_string(),
        format!("{:.4}", eval.accuracy),
    ]);
    let mut confusion =
        confusion_table(format!("Confusion matrix: {}", test.name), &eval.confusion).to_tsv();
    let mut human = String::new();
    for (kind, m) in &eval.per_type {
        summary.push(vec![
            kind.as_str().to_string(),
            m.total().to_string(),
            format!("{:.4}", m.accuracy().unwrap_or(0.0)),
        ]);
        let t = confusion_table(
            format!("Confusion matrix: {} ({})", test.name, kind.as_str()),
            m,
        );
        confusion.push('\n');
        confusion.push_str(&t.to_tsv());
        human.push('\n');
        human.push_str(&t.render(run.format));
    }
    run.write(&args.out.join("accuracy.tsv"), &summary.to_tsv())?;
    run.write(&args.out.join("confusion.tsv"), &confusion)?;
    run.write(
        &args.out.join("predictions.tsv"),
        &eval.predictions_tsv(&test),
    )?;
    run.manifest.results = json!({
        "accuracy": eval.accuracy,
        "per_type": eval.per_type.iter().map(|(k, m)| (k.as_str(), m.accuracy())).collect::<BTreeMap<_, _>>(),
    });
    run.print(&summary);
    println!();
    print!(
        "{}",
        confusion_table(format!("Confusion matrix: {}", test.name), &eval.confusion)
            .render(run.format)
    );
    print!("{human}");
    Ok(())
}

fn cmd_mix(run: &mut Run, args: &MixArgs) -> Result<()> {
    let a = run.corpus(&args.a)?;
    let b = run.corpus(&args.b)?;
    let mixed = mix(&a, &b, run.seed);
    write_corpus(run, &mixed, &args.out, CorpusFormat::from_path(&args.out))?;
    run.manifest.results = json!({ "pairs": mixed.len(), "from_a": a.len(), "from_b": b.len() });
    let mut table = Table::new("Mixed corpus", &["corpus", "pairs"]);
    table.push(vec![a.name.clone(), a.len().to_string()]);
    table.push(vec![b.name.clone(), b.len().to_string()]);
    table.push(vec![mixed.name.clone(), mixed.len().to_string()]);
    run.print(&table);
    Ok(())
}

/// (successes among gold contradictions, their count, successes among gold
/// entailments, their count) where a success is a `predicted` prediction.
fn prediction_counts(text: &str, pair_type: Option<&str>, predicted: Label) -> Result<[u64; 4]> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or_default().split('\t').collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| anyhow::anyhow!("predictions file lacks a {name} column"))
    };
    let (gold, pred, kind) = (col("gold")?, col("predicted")?, col("pair_type")?);
    let mut counts = [0u64; 4];
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split('\t').collect();
        let get = |c: usize| {
            fields
                .get(c)
                .copied()
                .ok_or_else(|| anyhow::anyhow!("predictions line {} is short", i + 2))
        };
        if pair_type.is_some_and(|t| get(kind).map(|k| k != t).unwrap_or(true)) {
            continue;
        }
        let g: Label = get(gold)?.parse()?;
        let success = get(pred)?.parse::<Label>()? == predicted;
        match g {
            Label::Contradiction => {
                counts[0] += success as u64;
                counts[1] += 1;
            }
            Label::Entailment => {
                counts[2] += success as u64;
                counts[3] += 1;
            }
            Label::Neutral => {}
        }
    }
    Ok(counts)
}

fn cmd_sigtest(run: &mut Run, args: &SigtestArgs) -> Result<()> {
    let predicted: Label = args.predicted.parse()?;
    let (counts, samples) = match (&args.predictions, &args.counts) {
        (Some(path), _) => {
            run.input(path)?;
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let kind = match &args.pair_type {
                Some(t) => Some(t.parse::<PairType>()?.as_str()),
                None => None,
            };
            (
                prediction_counts(&text, kind, predicted)?,
                ["gold contradiction", "gold entailment"],
            )
        }
        (None, Some(c)) if c.len() == 4 => ([c[0], c[1], c[2], c[3]], ["a", "b"]),
        (None, Some(_)) => return Err(usage("--counts expects successes_a,n_a,successes_b,n_b")),
        (None, None) => return Err(usage("give --predictions or --counts")),
    };
    let t = two_proportion_test(counts[0], counts[1], counts[2], counts[3])?;
    let mut table = Table::new(
        "Two-proportion z-test",
        &["sample", "successes", "n", "proportion"],
    )
    .with_context("success", format!("predicted {predicted}"))
    .with_context("z", format!("{:.6}", t.z))
    .with_context("p_value", format!("{:e}", t.p_value));
    if let Some(kind) = &args.pair_type {
        table = table.with_context("pair_type", kind);
    }
    table.push(vec![
        samples[0].into(),
        counts[0].to_string(),
        counts[1].to_string(),
        format!("{:.6}", t.proportion_a),
    ]);
    table.push(vec![
        samples[1].into(),
        counts[2].to_string(),
        counts[3].to_string(),
        format!("{:.6}", t.proportion_b),
    ]);
    run.write(&args.out, &table.to_tsv())?;
    run.manifest.results = json!({ "z": t.z, "p_value": t.p_value });
    run.print(&table);
    Ok(())
}
