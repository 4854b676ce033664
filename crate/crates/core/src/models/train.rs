//! The trainable classifier and its optimization loop.
//!
//! Mini-batch SGD on summed cross-entropy with gradient-norm clipping. The
//! learning rate decays multiplicatively each epoch and is divided by
//! `shrink` whenever dev accuracy fails to beat the best seen so far;
//! training stops once it falls below `min_learning_rate` or after
//! `max_epochs`. The returned weights are those of the best dev epoch.

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Label, LabeledPair};
use crate::error::{Error, Result};
use crate::lexicon::EmbeddingTable;
use crate::models::encoder::{Combiner, Encoder, EncoderKind};
use crate::models::mlp::{Mlp, CLASSES};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub hidden_dim: usize,
    pub combiner: Combiner,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub decay: f64,
    pub shrink: f64,
    pub min_learning_rate: f64,
    pub max_epochs: usize,
    /// Gradient-norm clipping threshold; non-positive disables clipping.
    pub max_grad_norm: f64,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Hyperparameters {
            hidden_dim: 512,
            combiner: Combiner::FourBlock,
            batch_size: 64,
            learning_rate: 0.1,
            decay: 0.99,
            shrink: 5.0,
            min_learning_rate: 1e-5,
            max_epochs: 20,
            max_grad_norm: 5.0,
        }
    }
}

impl Hyperparameters {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(format!("hyperparameter {what}")));
        if self.hidden_dim == 0 {
            return bad("hidden_dim must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be finite and non-negative");
        }
        if !(self.decay > 0.0 && self.shrink > 0.0 && self.min_learning_rate >= 0.0) {
            return bad("decay and shrink must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub seed: u64,
    /// Epochs of every training and fine-tuning run applied to these weights.
    pub epochs: usize,
    pub hyperparameters: Hyperparameters,
    pub init: String,
    pub history: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classifier {
    pub encoder: EncoderKind,
    pub combiner: Combiner,
    pub embedding_dim: usize,
    pub embedding_fingerprint: String,
    pub mlp: Mlp,
    pub meta: TrainingMeta,
}

const INIT: &str = "uniform(-1/sqrt(fan_in), 1/sqrt(fan_in))";

impl Classifier {
    /// Freshly initialized weights, seeded.
    pub fn untrained(
        kind: EncoderKind,
        table: &EmbeddingTable,
        hyper: &Hyperparameters,
        seed: u64,
    ) -> Result<Self> {
        hyper.validate()?;
        let input_dim = hyper.combiner.blocks() * kind.output_dim(table.dimension());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(Classifier {
            encoder: kind,
            combiner: hyper.combiner,
            embedding_dim: table.dimension(),
            embedding_fingerprint: table.fingerprint(),
            mlp: Mlp::init(input_dim, hyper.hidden_dim, &mut rng),
            meta: TrainingMeta {
                seed,
                epochs: 0,
                hyperparameters: hyper.clone(),
                init: INIT.to_string(),
                history: Vec::new(),
            },
        })
    }

    pub fn input_dim(&self) -> usize {
        self.mlp.input_dim
    }

    /// Fails unless `table` is the embedding table the classifier was built on.
    pub fn check_table(&self, table: &EmbeddingTable) -> Result<()> {
        if table.dimension() != self.embedding_dim {
            return Err(Error::EncoderMismatch(format!(
                "classifier expects {}-d embeddings, table has {}",
                self.embedding_dim,
                table.dimension()
            )));
        }
        let fp = table.fingerprint();
        if fp != self.embedding_fingerprint {
            return Err(Error::EncoderMismatch(format!(
                "embedding table fingerprint {fp} differs from the training table {}",
                self.embedding_fingerprint
            )));
        }
        Ok(())
    }

    pub(crate) fn featurizer<'a>(&self, table: &'a EmbeddingTable) -> Featurizer<'a> {
        Featurizer::new(Encoder::new(self.encoder, table), self.combiner)
    }

    /// Class probabilities per pair, in corpus order.
    pub fn predict_proba(
        &self,
        table: &EmbeddingTable,
        pairs: &[LabeledPair],
    ) -> Vec<[f64; CLASSES]> {
        let mut featurizer = self.featurizer(table);
        let mut out = Vec::with_capacity(pairs.len());
        let mut x = Vec::new();
        for chunk in pairs.chunks(1024) {
            featurizer.batch(chunk.iter(), &mut x);
            let fwd = self.mlp.forward(&x);
            out.extend(fwd.probs.chunks_exact(CLASSES).map(|r| [r[0], r[1], r[2]]));
        }
        out
    }

    pub fn predict(&self, table: &EmbeddingTable, pairs: &[LabeledPair]) -> Vec<Label> {
        self.predict_proba(table, pairs)
            .iter()
            .map(|p| Label::from_index(argmax(p)).expect("three classes"))
            .collect()
    }

    pub fn accuracy(&self, table: &EmbeddingTable, corpus: &Corpus) -> f64 {
        if corpus.is_empty() {
            return 0.0;
        }
        let correct = self
            .predict(table, &corpus.pairs)
            .iter()
            .zip(corpus)
            .filter(|(p, pair)| **p == pair.label)
            .count();
        correct as f64 / corpus.len() as f64
    }
}

/// First index of the maximum; ties go to the lower label index.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in row.iter().enumerate() {
        if p > row[best] {
            best = i;
        }
    }
    best
}

/// Builds classifier input rows from pairs.
pub(crate) struct Featurizer<'a> {
    encoder: Encoder<'a>,
    combiner: Combiner,
    u: Vec<f64>,
    v: Vec<f64>,
    pub all_oov: usize,
}

impl<'a> Featurizer<'a> {
    pub fn new(encoder: Encoder<'a>, combiner: Combiner) -> Self {
        let d = encoder.output_dim();
        Featurizer {
            encoder,
            combiner,
            u: vec![0.0; d],
            v: vec![0.0; d],
            all_oov: 0,
        }
    }

    pub fn row_dim(&self) -> usize {
        self.combiner.blocks() * self.encoder.output_dim()
    }

    pub fn batch<'p>(&mut self, pairs: impl Iterator<Item = &'p LabeledPair>, out: &mut Vec<f64>) {
        out.clear();
        let dim = self.row_dim();
        for pair in pairs {
            if self.encoder.encode_into(pair.premise.tokens(), &mut self.u) == 0 {
                self.all_oov += 1;
            }
            if self
                .encoder
                .encode_into(pair.hypothesis.tokens(), &mut self.v)
                == 0
            {
                self.all_oov += 1;
            }
            let start = out.len();
            out.resize(start + dim, 0.0);
            self.combiner
                .combine_into(&self.u, &self.v, &mut out[start..]);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxEpochs,
    LearningRateFloor,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub learning_rate: f64,
    pub mean_loss: f64,
    pub train_accuracy: f64,
    pub dev_accuracy: f64,
    /// Accuracies on the monitored sets, in `TrainingLog::monitors` order.
    pub monitor_accuracy: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub monitors: Vec<String>,
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: Option<usize>,
    pub stop: StopReason,
    /// Sentences encoded to the zero vector because every token was OOV.
    pub all_oov_sentences: usize,
}

impl TrainingLog {
    /// Tab-separated: epoch, learning rate, train accuracy, dev accuracy,
    /// then one column per monitored set.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("epoch\tlearning_rate\ttrain_accuracy\tdev_accuracy");
        for m in &self.monitors {
            let _ = write!(out, "\t{m}_accuracy");
        }
        out.push('\n');
        for e in &self.epochs {
            let _ = write!(
                out,
                "{}\t{}\t{:.6}\t{:.6}",
                e.epoch, e.learning_rate, e.train_accuracy, e.dev_accuracy
            );
            for a in &e.monitor_accuracy {
                let _ = write!(out, "\t{a:.6}");
            }
            out.push('\n');
        }
        out
    }
}

fn vocabulary_coverage(table: &EmbeddingTable, corpus: &Corpus) -> (usize, usize) {
    let mut seen = HashSet::new();
    for pair in corpus {
        for t in pair.premise.tokens().iter().chain(pair.hypothesis.tokens()) {
            seen.insert(t.as_str());
        }
    }
    let covered = seen.iter().filter(|t| table.contains(t)).count();
    (covered, seen.len())
}

/// Trains a fresh classifier from `seed`.
pub fn train(
    train_set: &Corpus,
    dev: &Corpus,
    table: &EmbeddingTable,
    kind: EncoderKind,
    hyper: &Hyperparameters,
    seed: u64,
) -> Result<(Classifier, TrainingLog)> {
    let mut classifier = Classifier::untrained(kind, table, hyper, seed)?;
    let log = optimize(&mut classifier, train_set, dev, &[], table, hyper, seed)?;
    classifier.meta.history.push(format!(
        "train on {} ({} epochs)",
        train_set.name,
        log.epochs.len()
    ));
    Ok((classifier, log))
}

/// Continues training `classifier` on `new_train`. `held_out` sets (e.g. the
/// original task's test split) are evaluated and logged every epoch.
pub fn finetune(
    classifier: &Classifier,
    table: &EmbeddingTable,
    new_train: &Corpus,
    dev: &Corpus,
    held_out: &[(&str, &Corpus)],
    hyper: &Hyperparameters,
    seed: u64,
) -> Result<(Classifier, TrainingLog)> {
    classifier.check_table(table)?;
    if hyper.combiner != classifier.combiner || hyper.hidden_dim != classifier.mlp.hidden_dim {
        return Err(Error::EncoderMismatch(
            "fine-tuning hyperparameters must keep the combiner and hidden size".into(),
        ));
    }
    let mut tuned = classifier.clone();
    let log = optimize(&mut tuned, new_train, dev, held_out, table, hyper, seed)?;
    tuned.meta.history.push(format!(
        "finetune on {} ({} epochs)",
        new_train.name,
        log.epochs.len()
    ));
    Ok((tuned, log))
}

fn optimize(
    classifier: &mut Classifier,
    train_set: &Corpus,
    dev: &Corpus,
    monitors: &[(&str, &Corpus)],
    table: &EmbeddingTable,
    hyper: &Hyperparameters,
    seed: u64,
) -> Result<TrainingLog> {
    hyper.validate()?;
    if train_set.is_empty() {
        return Err(Error::EmptyCorpus(train_set.name.clone()));
    }
    if dev.is_empty() {
        return Err(Error::EmptyCorpus(dev.name.clone()));
    }
    let (covered, _) = vocabulary_coverage(table, train_set);
    if covered == 0 {
        return Err(Error::InvalidArgument(format!(
            "no token of {} has an embedding",
            train_set.name
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut featurizer = classifier.featurizer(table);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut x = Vec::with_capacity(hyper.batch_size * featurizer.row_dim());
    let mut targets = Vec::with_capacity(hyper.batch_size);

    let mut lr = hyper.learning_rate;
    let mut best: Option<(f64, Mlp, usize)> = None;
    let mut records = Vec::new();
    let mut stop = StopReason::MaxEpochs;

    for epoch in 1..=hyper.max_epochs {
        if epoch > 1 {
            lr *= hyper.decay;
        }
        order.shuffle(&mut rng);
        let mut correct = 0usize;
        let mut loss_sum = 0.0;
        for (b, chunk) in order.chunks(hyper.batch_size).enumerate() {
            featurizer.batch(chunk.iter().map(|&i| &train_set.pairs[i]), &mut x);
            targets.clear();
            targets.extend(chunk.iter().map(|&i| train_set.pairs[i].label.index()));

            let (loss, grads, fwd) = classifier.mlp.loss_and_gradients(&x, &targets);
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch,
                    batch: b,
                    learning_rate: lr,
                });
            }
            loss_sum += loss;
            correct += fwd
                .probs
                .chunks_exact(CLASSES)
                .zip(&targets)
                .filter(|(p, &t)| argmax(p) == t)
                .count();

            let norm = grads.norm();
            let scale = if hyper.max_grad_norm > 0.0 && norm > hyper.max_grad_norm {
                hyper.max_grad_norm / norm
            } else {
                1.0
            };
            classifier.mlp.step(&grads, lr * scale);
        }
        if !classifier.mlp.is_finite() {
            return Err(Error::NonFiniteLoss {
                epoch,
                batch: usize::MAX,
                learning_rate: lr,
            });
        }

        let dev_accuracy = classifier.accuracy(table, dev);
        records.push(EpochRecord {
            epoch,
            learning_rate: lr,
            mean_loss: loss_sum / train_set.len() as f64,
            train_accuracy: correct as f64 / train_set.len() as f64,
            dev_accuracy,
            monitor_accuracy: monitors
                .iter()
                .map(|(_, c)| classifier.accuracy(table, c))
                .collect(),
        });

        if best.as_ref().is_none_or(|(acc, _, _)| dev_accuracy > *acc) {
            best = Some((dev_accuracy, classifier.mlp.clone(), epoch));
        } else {
            lr /= hyper.shrink;
            if lr < hyper.min_learning_rate {
                stop = StopReason::LearningRateFloor;
                break;
            }
        }
    }

    let best_epoch = best.map(|(_, mlp, epoch)| {
        classifier.mlp = mlp;
        epoch
    });
    classifier.meta.epochs += records.len();
    Ok(TrainingLog {
        monitors: monitors.iter().map(|(n, _)| n.to_string()).collect(),
        epochs: records,
        best_epoch,
        stop,
        all_oov_sentences: featurizer.all_oov,
    })
}

/// Concatenates `a` and `b`, then shuffles with `seed`.
pub fn mix(a: &Corpus, b: &Corpus, seed: u64) -> Corpus {
    let mut pairs: Vec<LabeledPair> = a.pairs.iter().chain(&b.pairs).cloned().collect();
    pairs.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Corpus::new(format!("{}+{}", a.name, b.name), pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> EmbeddingTable {
        let mut t = EmbeddingTable::new(3).unwrap();
        t.insert("red", &[1.0, 0.0, 0.0]).unwrap();
        t.insert("blue", &[0.0, 1.0, 0.0]).unwrap();
        t.insert("green", &[0.0, 0.0, 1.0]).unwrap();
        t.insert("dark", &[0.5, 0.5, -0.5]).unwrap();
        t
    }

    /// Label is a function of the hypothesis colour: separable in the features.
    fn toy() -> Corpus {
        let rows = [
            ("red", "red", Label::Entailment),
            ("blue", "red", Label::Entailment),
            ("dark red", "red", Label::Entailment),
            ("green", "red dark", Label::Entailment),
            ("red", "blue", Label::Neutral),
            ("green", "blue", Label::Neutral),
            ("dark", "blue", Label::Neutral),
            ("red", "green", Label::Contradiction),
            ("blue", "green", Label::Contradiction),
            ("dark", "green", Label::Contradiction),
        ];
        Corpus::new(
            "toy",
            rows.iter()
                .enumerate()
                .map(|(i, (p, h, l))| LabeledPair::new(*p, *h, *l, i.to_string()))
                .collect(),
        )
    }

    fn small_hyper() -> Hyperparameters {
        Hyperparameters {
            hidden_dim: 16,
            batch_size: 4,
            max_epochs: 50,
            ..Hyperparameters::default()
        }
    }

    #[test]
    fn separable_toy_reaches_full_accuracy() {
        let t = table();
        let data = toy();
        let h = Hyperparameters {
            batch_size: 1,
            learning_rate: 0.5,
            shrink: 1.0,
            ..small_hyper()
        };
        let (clf, log) = train(&data, &data, &t, EncoderKind::Bow, &h, 11).unwrap();
        assert!(log.epochs.len() <= 50);
        assert_eq!(clf.accuracy(&t, &data), 1.0);
    }

    #[test]
    fn training_is_bit_deterministic() {
        let t = table();
        let data = toy();
        let h = Hyperparameters {
            max_epochs: 5,
            ..small_hyper()
        };
        let (a, la) = train(&data, &data, &t, EncoderKind::HalfSplit, &h, 3).unwrap();
        let (b, lb) = train(&data, &data, &t, EncoderKind::HalfSplit, &h, 3).unwrap();
        let bits = |c: &Classifier| {
            c.mlp
                .params_flat()
                .iter()
                .map(|x| x.to_bits())
                .collect::<Vec<_>>()
        };
        assert_eq!(bits(&a), bits(&b));
        assert_eq!(la, lb);
    }

    #[test]
    fn zero_epoch_and_zero_rate_finetune_keep_weights() {
        let t = table();
        let data = toy();
        let (clf, _) = train(&data, &data, &t, EncoderKind::Bow, &small_hyper(), 5).unwrap();
        let none = Hyperparameters {
            max_epochs: 0,
            ..small_hyper()
        };
        let (same, log) = finetune(&clf, &t, &data, &data, &[], &none, 1).unwrap();
        assert!(log.epochs.is_empty());
        assert_eq!(same.mlp, clf.mlp);
        let frozen = Hyperparameters {
            learning_rate: 0.0,
            max_epochs: 3,
            ..small_hyper()
        };
        let (same, _) = finetune(&clf, &t, &data, &data, &[("toy", &data)], &frozen, 1).unwrap();
        assert_eq!(same.mlp, clf.mlp);
    }

    #[test]
    fn finetune_rejects_other_table() {
        let t = table();
        let data = toy();
        let (clf, _) = train(&data, &data, &t, EncoderKind::Bow, &small_hyper(), 5).unwrap();
        let mut other = table();
        other.insert("yellow", &[1.0, 1.0, 0.0]).unwrap();
        let err = finetune(&clf, &other, &data, &data, &[], &small_hyper(), 1).unwrap_err();
        assert!(matches!(err, Error::EncoderMismatch(_)));
    }

    #[test]
    fn huge_learning_rate_aborts_with_diagnostic() {
        let t = table();
        let data = toy();
        let h = Hyperparameters {
            learning_rate: 1e300,
            max_grad_norm: 0.0,
            ..small_hyper()
        };
        let err = train(&data, &data, &t, EncoderKind::Bow, &h, 5).unwrap_err();
        assert!(err.is_numerical(), "{err}");
    }

    #[test]
    fn no_embedding_coverage_is_rejected() {
        let t = table();
        let data = Corpus::new(
            "oov",
            vec![LabeledPair::new("zz", "yy", Label::Neutral, "0")],
        );
        assert!(train(&data, &data, &t, EncoderKind::Bow, &small_hyper(), 0).is_err());
    }

    #[test]
    fn learning_rate_schedule() {
        let t = table();
        let data = toy();
        let h = Hyperparameters {
            max_epochs: 8,
            ..small_hyper()
        };
        let (_, log) = train(&data, &data, &t, EncoderKind::Bow, &h, 2).unwrap();
        let mut lr = h.learning_rate;
        let mut best = f64::NEG_INFINITY;
        for (i, e) in log.epochs.iter().enumerate() {
            if i > 0 {
                lr *= h.decay;
            }
            assert!((e.learning_rate - lr).abs() < 1e-15);
            if e.dev_accuracy > best {
                best = e.dev_accuracy;
            } else {
                lr /= h.shrink;
            }
        }
        let tsv = log.to_tsv();
        assert!(tsv.starts_with("epoch\tlearning_rate\ttrain_accuracy\tdev_accuracy\n"));
        assert_eq!(tsv.lines().count(), log.epochs.len() + 1);
    }

    #[test]
    fn stops_at_learning_rate_floor() {
        let t = table();
        let data = toy();
        let h = Hyperparameters {
            learning_rate: 2e-5,
            max_epochs: 100,
            ..small_hyper()
        };
        let (_, log) = train(&data, &data, &t, EncoderKind::Bow, &h, 2).unwrap();
        assert_eq!(log.stop, StopReason::LearningRateFloor);
        assert!(log.epochs.len() < 100);
    }

    #[test]
    fn mix_preserves_multiset() {
        let a = toy();
        let b = Corpus::new(
            "b",
            vec![LabeledPair::new("red", "blue", Label::Neutral, "b0")],
        );
        let m = mix(&a, &b, 4);
        assert_eq!(m.len(), 11);
        let mut ids: Vec<_> = m.iter().map(|p| p.source_id.clone()).collect();
        ids.sort();
        let mut expect: Vec<_> = a
            .iter()
            .chain(&b.pairs)
            .map(|p| p.source_id.clone())
            .collect();
        expect.sort();
        assert_eq!(ids, expect);
        assert_eq!(m, mix(&a, &b, 4));
        let alone = mix(&a, &Corpus::new("empty", vec![]), 4);
        assert_eq!(alone.len(), a.len());
    }
}
