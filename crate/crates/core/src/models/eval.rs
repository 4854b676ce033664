//! Accuracy, confusion matrices and the E/C twin symmetry check.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Label};
use crate::error::{Error, Result};
use crate::generator::{PairMeta, PairType};
use crate::lexicon::EmbeddingTable;
use crate::models::train::Classifier;

/// `counts[true][predicted]`, indexed by [`Label::index`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[usize; 3]; 3],
}

impl ConfusionMatrix {
    pub fn add(&mut self, truth: Label, predicted: Label) {
        self.counts[truth.index()][predicted.index()] += 1;
    }

    pub fn get(&self, truth: Label, predicted: Label) -> usize {
        self.counts[truth.index()][predicted.index()]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> usize {
        (0..3).map(|i| self.counts[i][i]).sum()
    }

    pub fn accuracy(&self) -> Option<f64> {
        let total = self.total();
        (total > 0).then(|| self.correct() as f64 / total as f64)
    }

    /// Each row divided by its sum; `None` for rows with no examples.
    pub fn row_normalized(&self) -> [Option<[f64; 3]>; 3] {
        self.counts.map(|row| {
            let n: usize = row.iter().sum();
            (n > 0).then(|| row.map(|c| c as f64 / n as f64))
        })
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for (a, b) in self
            .counts
            .iter_mut()
            .flatten()
            .zip(other.counts.iter().flatten())
        {
            *a += b;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub corpus: String,
    pub accuracy: f64,
    pub confusion: ConfusionMatrix,
    /// Present for pairs whose `source_id` carries generator metadata.
    pub per_type: BTreeMap<PairType, ConfusionMatrix>,
    pub predictions: Vec<Label>,
}

impl Evaluation {
    /// One row per pair: source id, gold label, predicted label, pair type.
    pub fn predictions_tsv(&self, corpus: &Corpus) -> String {
        let mut out = String::from("source_id\tgold\tpredicted\tpair_type\n");
        for (pair, pred) in corpus.iter().zip(&self.predictions) {
            let kind = PairMeta::parse(&pair.source_id)
                .map(|m| m.triple.pair_type.as_str())
                .unwrap_or("-");
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}",
                pair.source_id, pair.label, pred, kind
            );
        }
        out
    }
}

pub fn evaluate(
    classifier: &Classifier,
    table: &EmbeddingTable,
    test: &Corpus,
) -> Result<Evaluation> {
    if test.is_empty() {
        return Err(Error::EmptyCorpus(test.name.clone()));
    }
    classifier.check_table(table)?;
    let predictions = classifier.predict(table, &test.pairs);
    let mut confusion = ConfusionMatrix::default();
    let mut per_type: BTreeMap<PairType, ConfusionMatrix> = BTreeMap::new();
    for (pair, &pred) in test.iter().zip(&predictions) {
        confusion.add(pair.label, pred);
        if let Some(meta) = PairMeta::parse(&pair.source_id) {
            per_type
                .entry(meta.triple.pair_type)
                .or_default()
                .add(pair.label, pred);
        }
    }
    Ok(Evaluation {
        corpus: test.name.clone(),
        accuracy: confusion.accuracy().unwrap_or(0.0),
        confusion,
        per_type,
        predictions,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub triples: usize,
    pub per_type_triples: BTreeMap<PairType, usize>,
    /// Entailment-pair source ids whose twin received a different prediction.
    pub violations: Vec<String>,
}

/// Compares the predictions for each premise's entailment and contradiction
/// hypotheses.
pub fn symmetry_check(
    classifier: &Classifier,
    table: &EmbeddingTable,
    corpus: &Corpus,
) -> Result<SymmetryReport> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus(corpus.name.clone()));
    }
    classifier.check_table(table)?;
    let mut metas = Vec::with_capacity(corpus.len());
    for pair in corpus {
        let meta = PairMeta::parse(&pair.source_id).ok_or_else(|| {
            Error::MissingTwin(format!("{} has no triple metadata", pair.source_id))
        })?;
        metas.push(meta);
    }
    let predictions = classifier.predict(table, &corpus.pairs);
    let by_id: HashMap<&str, usize> = corpus
        .iter()
        .enumerate()
        .map(|(i, p)| (p.source_id.as_str(), i))
        .collect();

    let mut report = SymmetryReport {
        triples: 0,
        per_type_triples: BTreeMap::new(),
        violations: Vec::new(),
    };
    for (i, meta) in metas.iter().enumerate() {
        let twin_id = meta.twin().source_id();
        let &j = by_id.get(twin_id.as_str()).ok_or_else(|| {
            Error::MissingTwin(format!(
                "{} has no twin {twin_id}",
                corpus.pairs[i].source_id
            ))
        })?;
        if meta.role != Label::Entailment {
            continue;
        }
        report.triples += 1;
        *report
            .per_type_triples
            .entry(meta.triple.pair_type)
            .or_default() += 1;
        if predictions[i] != predictions[j] {
            report.violations.push(corpus.pairs[i].source_id.clone());
        }
    }
    Ok(report)
}
