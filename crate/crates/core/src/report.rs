//! Tabular reports, file hashing and run manifests.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{Label, LabelFractions, TOKENIZER_VERSION};
use crate::diagnostics::ConditionalStats;
use crate::error::{Error, Result};
use crate::models::ConfusionMatrix;

pub const TOOL_NAME: &str = "compnli";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ReportFormat {
    #[default]
    Tsv,
    Human,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tsv" => Ok(ReportFormat::Tsv),
            "human" => Ok(ReportFormat::Human),
            other => Err(Error::InvalidArgument(format!(
                "unknown report format {other:?}"
            ))),
        }
    }
}

/// A titled table with key/value provenance lines.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub title: String,
    pub context: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(title: impl Into<String>, header: &[&str]) -> Self {
        Table {
            title: title.into(),
            context: Vec::new(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn with_context(mut self, key: &str, value: impl Into<String>) -> Self {
        self.context.push((key.to_string(), value.into()));
        self
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Context as `# key: value` lines, then a header and the rows.
    pub fn to_tsv(&self) -> String {
        let mut out = format!("# {}\n", self.title);
        for (k, v) in &self.context {
            let _ = writeln!(out, "# {k}: {v}");
        }
        out.push_str(&self.header.join("\t"));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join("\t"));
            out.push('\n');
        }
        out
    }

    pub fn to_human(&self) -> String {
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.chars().count()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let line = |cells: &[String]| {
            let mut s = String::new();
            for (i, (cell, w)) in cells.iter().zip(&widths).enumerate() {
                if i > 0 {
                    s.push_str("  ");
                }
                let pad = w - cell.chars().count();
                if i == 0 {
                    s.push_str(cell);
                    s.extend(std::iter::repeat_n(' ', pad));
                } else {
                    s.extend(std::iter::repeat_n(' ', pad));
                    s.push_str(cell);
                }
            }
            s.trim_end().to_string()
        };
        let mut out = format!("{}\n", self.title);
        for (k, v) in &self.context {
            let _ = writeln!(out, "  {k}: {v}");
        }
        out.push('\n');
        let head = line(&self.header);
        let _ = writeln!(out, "{head}");
        let _ = writeln!(out, "{}", "-".repeat(head.chars().count()));
        for row in &self.rows {
            let _ = writeln!(out, "{}", line(row));
        }
        out
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Tsv => self.to_tsv(),
            ReportFormat::Human => self.to_human(),
        }
    }
}

/// Provenance embedded in every diagnostics report.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportContext {
    pub corpus: String,
    pub predicate: String,
    pub thesaurus_sha256: Option<String>,
}

impl ReportContext {
    fn apply(&self, table: Table) -> Table {
        table
            .with_context("corpus", &self.corpus)
            .with_context("predicate", &self.predicate)
            .with_context(
                "thesaurus_sha256",
                self.thesaurus_sha256.as_deref().unwrap_or("none"),
            )
            .with_context("tokenizer", TOKENIZER_VERSION)
    }
}

fn fraction(x: f64) -> String {
    format!("{x:.4}")
}

fn optional(x: Option<f64>) -> String {
    x.map(fraction).unwrap_or_else(|| "undefined".into())
}

/// Label distribution of the top-k overlap-ranked pairs, one row per k.
pub fn overlap_table(ctx: &ReportContext, rows: &[(String, usize, LabelFractions)]) -> Table {
    let mut table = ctx.apply(Table::new(
        "Label distribution of the highest-overlap pairs",
        &["top_k", "pairs", "entailment", "neutral", "contradiction"],
    ));
    for (name, n, f) in rows {
        let mut row = vec![name.clone(), n.to_string()];
        row.extend(Label::ALL.iter().map(|&l| fraction(f.get(l))));
        table.push(row);
    }
    table
}

/// Both conditionals per label, in the layout of the antonym and negation tables.
pub fn conditional_table(ctx: &ReportContext, stats: &ConditionalStats) -> Table {
    let p = &stats.predicate_name;
    let mut table = ctx.apply(Table::new(
        format!("Conditional rates for predicate `{p}`"),
        &[
            "label",
            "joint",
            "label_count",
            &format!("P({p}|label)"),
            &format!("P(label|{p})"),
        ],
    ));
    table = table
        .with_context("predicate_count", stats.predicate_count.to_string())
        .with_context("total", stats.total.to_string());
    for &l in &Label::ALL {
        table.push(vec![
            l.to_string(),
            stats.joint_counts.get(l).to_string(),
            stats.label_counts.get(l).to_string(),
            optional(stats.p_pred_given_label(l)),
            optional(stats.p_label_given_pred(l)),
        ]);
    }
    table
}

/// Counts and row-normalized rates, one row per true label.
pub fn confusion_table(title: impl Into<String>, matrix: &ConfusionMatrix) -> Table {
    let mut table = Table::new(
        title,
        &[
            "true\\predicted",
            "entailment",
            "neutral",
            "contradiction",
            "rate_entailment",
            "rate_neutral",
            "rate_contradiction",
        ],
    );
    let normalized = matrix.row_normalized();
    for &l in &Label::ALL {
        let mut row = vec![l.to_string()];
        row.extend(matrix.counts[l.index()].iter().map(|c| c.to_string()));
        match normalized[l.index()] {
            Some(r) => row.extend(r.iter().map(|&x| fraction(x))),
            None => row.extend(std::iter::repeat_n("undefined".to_string(), 3)),
        }
        table.push(row);
    }
    table = table.with_context("pairs", matrix.total().to_string());
    table.with_context("accuracy", optional(matrix.accuracy()))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut hasher = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = reader.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputHash {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub inputs: Vec<InputHash>,
    pub outputs: Vec<String>,
    /// Command-specific counts, e.g. pairs per generated type.
    pub results: serde_json::Value,
    pub timestamp_unix: u64,
}

impl Manifest {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        Manifest {
            tool: TOOL_NAME.to_string(),
            version: TOOL_VERSION.to_string(),
            command: command.to_string(),
            config,
            inputs: Vec::new(),
            outputs: Vec::new(),
            results: serde_json::Value::Null,
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(InputHash {
            path: path.display().to_string(),
            sha256: sha256_file(path)?,
        });
        Ok(())
    }

    pub fn add_output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}
