//! NLI corpora: labels, tokenized sentences, labeled pairs and the two
//! on-disk formats (SNLI-style JSONL and three-column TSV).

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bumped whenever `tokenize` changes behaviour; embedded in every report.
pub const TOKENIZER_VERSION: &str = "compnli-tokenizer/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Entailment,
    Neutral,
    Contradiction,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::Entailment, Label::Neutral, Label::Contradiction];

    pub fn index(self) -> usize {
        match self {
            Label::Entailment => 0,
            Label::Neutral => 1,
            Label::Contradiction => 2,
        }
    }

    pub fn from_index(index: usize) -> Option<Label> {
        Label::ALL.get(index).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Entailment => "entailment",
            Label::Neutral => "neutral",
            Label::Contradiction => "contradiction",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "entailment" => Ok(Label::Entailment),
            "neutral" => Ok(Label::Neutral),
            "contradiction" => Ok(Label::Contradiction),
            other => Err(Error::InvalidArgument(format!(
                "not a gold label: {other:?}"
            ))),
        }
    }
}

/// Lowercases, isolates punctuation and splits on whitespace.
///
/// An apostrophe between `n` and a word-final `t` stays attached to its
/// host token, so "don't" and a pre-split "n't" survive as single tokens.
/// Typographic apostrophes (U+2019) are folded to ASCII first.
pub fn tokenize(text: &str) -> Vec<String> {
    let chars: Vec<char> = text
        .to_lowercase()
        .chars()
        .map(|c| if c == '\u{2019}' { '\'' } else { c })
        .collect();

    let mut tokens = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if c.is_whitespace() {
            flush(&mut current, &mut tokens);
        } else if c.is_alphanumeric()
            || (c == '\''
                && current.ends_with('n')
                && chars.get(i + 1) == Some(&'t')
                && !chars.get(i + 2).is_some_and(|next| next.is_alphanumeric()))
        {
            current.push(c);
        } else {
            flush(&mut current, &mut tokens);
            tokens.push(c.to_string());
        }
    }
    flush(&mut current, &mut tokens);
    tokens
}

fn flush(current: &mut String, tokens: &mut Vec<String>) {
    if !current.is_empty() {
        tokens.push(std::mem::take(current));
    }
}

/// Raw text plus its canonical tokenization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sentence {
    raw: String,
    tokens: Vec<String>,
}

impl Sentence {
    pub fn new(raw: impl Into<String>) -> Self {
        let raw = raw.into();
        let tokens = tokenize(&raw);
        Sentence { raw, tokens }
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledPair {
    pub premise: Sentence,
    pub hypothesis: Sentence,
    pub label: Label,
    pub source_id: String,
}

impl LabeledPair {
    pub fn new(
        premise: impl Into<String>,
        hypothesis: impl Into<String>,
        label: Label,
        source_id: impl Into<String>,
    ) -> Self {
        LabeledPair {
            premise: Sentence::new(premise),
            hypothesis: Sentence::new(hypothesis),
            label,
            source_id: source_id.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Corpus {
    pub name: String,
    pub pairs: Vec<LabeledPair>,
}

impl Corpus {
    pub fn new(name: impl Into<String>, pairs: Vec<LabeledPair>) -> Self {
        Corpus {
            name: name.into(),
            pairs,
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LabeledPair> {
        self.pairs.iter()
    }

    /// Sub-corpus built from `indices`, in the order given.
    pub fn select(&self, name: impl Into<String>, indices: &[usize]) -> Corpus {
        Corpus::new(
            name,
            indices.iter().map(|&i| self.pairs[i].clone()).collect(),
        )
    }

    pub fn label_counts(&self) -> LabelCounts {
        let mut counts = LabelCounts::default();
        for pair in &self.pairs {
            counts.add(pair.label);
        }
        counts
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a LabeledPair;
    type IntoIter = std::slice::Iter<'a, LabeledPair>;

    fn into_iter(self) -> Self::IntoIter {
        self.pairs.iter()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelCounts(pub [usize; 3]);

impl LabelCounts {
    pub fn add(&mut self, label: Label) {
        self.0[label.index()] += 1;
    }

    pub fn get(&self, label: Label) -> usize {
        self.0[label.index()]
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    /// `None` when no pairs were counted.
    pub fn fractions(&self) -> Option<LabelFractions> {
        let total = self.total();
        if total == 0 {
            return None;
        }
        let t = total as f64;
        Some(LabelFractions(self.0.map(|c| c as f64 / t)))
    }
}

/// Per-label fractions in entailment, neutral, contradiction order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelFractions(pub [f64; 3]);

impl LabelFractions {
    pub fn get(&self, label: Label) -> f64 {
        self.0[label.index()]
    }
}

pub fn label_distribution(corpus: &Corpus) -> Result<LabelFractions> {
    corpus
        .label_counts()
        .fractions()
        .ok_or_else(|| Error::EmptyCorpus(corpus.name.clone()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusFormat {
    SnliJsonl,
    Tsv,
}

impl CorpusFormat {
    /// `.tsv` files are TSV, everything else is treated as JSONL.
    pub fn from_path(path: &Path) -> CorpusFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("tsv") => CorpusFormat::Tsv,
            _ => CorpusFormat::SnliJsonl,
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            CorpusFormat::SnliJsonl => "jsonl",
            CorpusFormat::Tsv => "tsv",
        }
    }
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "snli-jsonl" | "jsonl" => Ok(CorpusFormat::SnliJsonl),
            "tsv" => Ok(CorpusFormat::Tsv),
            other => Err(Error::InvalidArgument(format!(
                "unknown corpus format {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Deserialize)]
struct SnliRecord {
    gold_label: String,
    sentence1: String,
    sentence2: String,
    #[serde(rename = "pairID")]
    pair_id: Option<String>,
}

#[derive(Serialize)]
struct SnliRecordOut<'a> {
    gold_label: Label,
    sentence1: &'a str,
    sentence2: &'a str,
    #[serde(rename = "pairID")]
    pair_id: &'a str,
}

#[derive(Clone, Debug)]
pub struct LoadedCorpus {
    pub corpus: Corpus,
    /// Lines dropped for an invalid gold label, a parse failure or an empty sentence.
    pub skipped: usize,
}

pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<LoadedCorpus> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "corpus".to_string());
    read_corpus(BufReader::new(file), &name, format).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

/// Reads a corpus from any buffered source; `name` prefixes synthesized ids.
pub fn read_corpus<R: BufRead>(
    reader: R,
    name: &str,
    format: CorpusFormat,
) -> Result<LoadedCorpus> {
    let mut pairs = Vec::new();
    let mut skipped = 0;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(name, e))?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_line(&line, format) {
            Some((label, premise, hypothesis, id)) => {
                let id = id.unwrap_or_else(|| format!("{name}:{}", lineno + 1));
                let pair = LabeledPair::new(premise, hypothesis, label, id);
                if pair.premise.is_empty() || pair.hypothesis.is_empty() {
                    skipped += 1;
                } else {
                    pairs.push(pair);
                }
            }
            None => skipped += 1,
        }
    }
    if pairs.is_empty() {
        return Err(Error::EmptyCorpus(name.to_string()));
    }
    Ok(LoadedCorpus {
        corpus: Corpus::new(name, pairs),
        skipped,
    })
}

fn parse_line(line: &str, format: CorpusFormat) -> Option<(Label, String, String, Option<String>)> {
    match format {
        CorpusFormat::SnliJsonl => {
            let record: SnliRecord = serde_json::from_str(line).ok()?;
            let label = record.gold_label.parse().ok()?;
            Some((label, record.sentence1, record.sentence2, record.pair_id))
        }
        CorpusFormat::Tsv => {
            let mut cols = line.split('\t');
            let label = cols.next()?.trim().parse().ok()?;
            let premise = cols.next()?.to_string();
            let hypothesis = cols.next()?.to_string();
            if cols.next().is_some() {
                return None;
            }
            Some((label, premise, hypothesis, None))
        }
    }
}

/// Writes `corpus` in `format`. TSV drops `source_id`; tabs and newlines
/// inside sentences are replaced by spaces there.
pub fn write_corpus<W: Write>(corpus: &Corpus, mut out: W, format: CorpusFormat) -> Result<()> {
    let io = |e| Error::io(corpus.name.as_str(), e);
    for pair in corpus {
        match format {
            CorpusFormat::SnliJsonl => {
                let record = SnliRecordOut {
                    gold_label: pair.label,
                    sentence1: pair.premise.raw(),
                    sentence2: pair.hypothesis.raw(),
                    pair_id: &pair.source_id,
                };
                serde_json::to_writer(&mut out, &record)?;
                out.write_all(b"\n").map_err(io)?;
            }
            CorpusFormat::Tsv => {
                let clean = |s: &str| s.replace(['\t', '\n', '\r'], " ");
                writeln!(
                    out,
                    "{}\t{}\t{}",
                    pair.label,
                    clean(pair.premise.raw()),
                    clean(pair.hypothesis.raw())
                )
                .map_err(io)?;
            }
        }
    }
    out.flush().map_err(io)
}

pub fn save_corpus(corpus: &Corpus, path: &Path, format: CorpusFormat) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_corpus(corpus, std::io::BufWriter::new(file), format)
}
