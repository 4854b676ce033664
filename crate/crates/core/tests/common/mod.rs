#![allow(dead_code)]

pub mod gradients;
pub mod oracle;

use std::collections::BTreeSet;

use compnli::corpus::{Corpus, Label, LabeledPair};
use compnli::generator::{concat, generate, split, GeneratorConfig, SplitSizes, Splits};
use compnli::lexicon::EmbeddingTable;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn vocabulary(corpora: &[&Corpus]) -> BTreeSet<String> {
    corpora
        .iter()
        .flat_map(|c| c.iter())
        .flat_map(|p| p.premise.tokens().iter().chain(p.hypothesis.tokens()))
        .cloned()
        .collect()
}

/// Independent uniform vectors in [-1, 1] for every word.
pub fn random_table(words: &BTreeSet<String>, dim: usize, seed: u64) -> EmbeddingTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = EmbeddingTable::new(dim).unwrap();
    let mut v = vec![0.0; dim];
    for w in words {
        v.iter_mut().for_each(|x| *x = rng.random_range(-1.0..1.0));
        table.insert(w.clone(), &v).unwrap();
    }
    table
}

/// All three pair types from the default pools, split by unordered triple.
pub fn comparisons_splits(sizes: SplitSizes, seed: u64) -> Splits {
    let config = GeneratorConfig {
        split_sizes: None,
        ..GeneratorConfig::default_pools(seed)
    };
    let by_type = generate(&config).unwrap();
    let all: Vec<&Corpus> = by_type.values().collect();
    split(&concat("comparisons", &all), sizes, seed).unwrap()
}

const FILLER: &[&str] = &[
    "a", "the", "in", "on", "with", "at", "near", "his", "her", "park", "street", "beach", "ball",
    "car", "dress", "hat", "shirt", "water", "field", "stage", "store", "table", "guitar",
    "camera", "bike", "is", "are", "sits", "runs", "walks", "plays", "holds", "reads", "watches",
    "eats", "jumps", "sings", "rides", "wears", "red", "blue", "green", "white", "black", "small",
    "large", "old", "young",
];
const SUBJECTS: &[&str] = &[
    "man", "woman", "boy", "girl", "child", "person", "dog", "lady", "guy", "baby",
];
const ANTONYMS: &[(&str, &str)] = &[
    ("sits", "stands"),
    ("small", "large"),
    ("old", "young"),
    ("black", "white"),
    ("sleeps", "wakes"),
    ("inside", "outside"),
];

fn sentence(rng: &mut ChaCha8Rng, len: usize) -> Vec<&'static str> {
    let mut words = vec!["the", *SUBJECTS.choose(rng).unwrap()];
    while words.len() < len {
        words.push(FILLER.choose(rng).unwrap());
    }
    words
}

/// A corpus in which lexical overlap predicts the label: entailed hypotheses
/// are subsets of the premise, contradictions add a negation or swap in an
/// antonym, and neutral hypotheses are mostly fresh words.
pub fn overlap_biased_corpus(name: &str, n: usize, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(n);
    for i in 0..n {
        let len = rng.random_range(6..10);
        let mut premise = sentence(&mut rng, len);
        let (hypothesis, label) = match i % 3 {
            0 => {
                let mut h = premise.clone();
                let drops = rng.random_range(1..3);
                for _ in 0..drops {
                    let at = rng.random_range(2..h.len());
                    h.remove(at);
                }
                (h, Label::Entailment)
            }
            1 => {
                let mut h = premise.clone();
                if rng.random_bool(0.5) {
                    h.insert(2, "not");
                } else {
                    let (a, b) = *ANTONYMS.choose(&mut rng).unwrap();
                    let at = rng.random_range(2..premise.len());
                    premise[at] = a;
                    h = premise.clone();
                    h[at] = b;
                }
                (h, Label::Contradiction)
            }
            _ => {
                let mut h = sentence(&mut rng, len);
                h.shuffle(&mut rng);
                (h, Label::Neutral)
            }
        };
        pairs.push(LabeledPair::new(
            premise.join(" "),
            hypothesis.join(" "),
            label,
            format!("{name}:{i}"),
        ));
    }
    Corpus::new(name, pairs)
}
