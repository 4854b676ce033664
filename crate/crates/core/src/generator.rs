//! The Comparisons dataset: premise "the X is more Y than the Z" paired
//! with one entailed and one contradicted hypothesis per rule family.
//!
//! | type       | entailment hypothesis   | contradiction hypothesis |
//! |------------|-------------------------|--------------------------|
//! | same       | X is more Y than Z      | Z is more Y than X       |
//! | more_less  | Z is less Y than X      | X is less Y than Z       |
//! | not        | Z is not more Y than X  | X is not more Y than Z   |
//!
//! Every generated pair carries a `source_id` of the form
//! `cmp|<type>|<X>|<Y>|<Z>|<E or C>`, which is what links an entailment pair
//! to its contradiction twin and lets splits stay disjoint per triple.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Label, LabeledPair, Sentence};
use crate::error::{Error, Result};

pub const DEFAULT_SUBJECTS: &str = include_str!("../data/subjects.txt");
pub const DEFAULT_ADJECTIVES: &str = include_str!("../data/adjectives.txt");

const ID_PREFIX: &str = "cmp";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairType {
    Same,
    MoreLess,
    Not,
}

impl PairType {
    pub const ALL: [PairType; 3] = [PairType::Same, PairType::MoreLess, PairType::Not];

    pub fn as_str(self) -> &'static str {
        match self {
            PairType::Same => "same",
            PairType::MoreLess => "more_less",
            PairType::Not => "not",
        }
    }
}

impl fmt::Display for PairType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PairType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "same" => Ok(PairType::Same),
            "more_less" | "more-less" | "moreless" => Ok(PairType::MoreLess),
            "not" => Ok(PairType::Not),
            other => Err(Error::InvalidArgument(format!(
                "unknown pair type {other:?}"
            ))),
        }
    }
}

/// Slot fillers for one premise: X (subject), Y (adjective), Z (object).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ComparisonTriple {
    pub subject: String,
    pub adjective: String,
    pub object: String,
    pub pair_type: PairType,
}

impl ComparisonTriple {
    pub fn new(
        subject: impl Into<String>,
        adjective: impl Into<String>,
        object: impl Into<String>,
        pair_type: PairType,
    ) -> Result<Self> {
        let triple = ComparisonTriple {
            subject: subject.into(),
            adjective: adjective.into(),
            object: object.into(),
            pair_type,
        };
        for slot in [&triple.subject, &triple.adjective, &triple.object] {
            check_phrase(slot)?;
        }
        if triple.subject == triple.object {
            return Err(Error::InvalidArgument(format!(
                "subject and object must differ (both {:?})",
                triple.subject
            )));
        }
        Ok(triple)
    }

    /// Key shared by a triple and its X/Z mirror; splits never separate it.
    pub fn group_key(&self) -> (PairType, &str, &str, &str) {
        let (a, b) = if self.subject <= self.object {
            (&self.subject, &self.object)
        } else {
            (&self.object, &self.subject)
        };
        (self.pair_type, a, b, &self.adjective)
    }
}

fn check_phrase(phrase: &str) -> Result<()> {
    if phrase.trim().is_empty() {
        return Err(Error::InvalidArgument("empty slot filler".into()));
    }
    if phrase.trim() != phrase || phrase.contains(['|', '\t', '\n', '\r']) {
        return Err(Error::InvalidArgument(format!(
            "slot filler {phrase:?} has surrounding whitespace or a reserved character"
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Realization {
    pub premise: Sentence,
    pub entailment: Sentence,
    pub contradiction: Sentence,
}

fn clause(first: &str, modifier: &str, adjective: &str, second: &str) -> String {
    format!("The {first} is {modifier} {adjective} than the {second}")
}

pub fn realize(triple: &ComparisonTriple) -> Realization {
    let (x, y, z) = (&triple.subject, &triple.adjective, &triple.object);
    let premise = clause(x, "more", y, z);
    let (entailment, contradiction) = match triple.pair_type {
        PairType::Same => (premise.clone(), clause(z, "more", y, x)),
        PairType::MoreLess => (clause(z, "less", y, x), clause(x, "less", y, z)),
        PairType::Not => (clause(z, "not more", y, x), clause(x, "not more", y, z)),
    };
    Realization {
        premise: Sentence::new(premise),
        entailment: Sentence::new(entailment),
        contradiction: Sentence::new(contradiction),
    }
}

/// What a generated pair's `source_id` records about it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PairMeta {
    pub triple: ComparisonTriple,
    pub role: Label,
}

impl PairMeta {
    pub fn source_id(&self) -> String {
        let role = if self.role == Label::Entailment {
            "E"
        } else {
            "C"
        };
        let t = &self.triple;
        format!(
            "{ID_PREFIX}|{}|{}|{}|{}|{role}",
            t.pair_type, t.subject, t.adjective, t.object
        )
    }

    pub fn parse(source_id: &str) -> Option<PairMeta> {
        let mut parts = source_id.split('|');
        if parts.next()? != ID_PREFIX {
            return None;
        }
        let pair_type = parts.next()?.parse().ok()?;
        let (x, y, z) = (parts.next()?, parts.next()?, parts.next()?);
        let role = match parts.next()? {
            "E" => Label::Entailment,
            "C" => Label::Contradiction,
            _ => return None,
        };
        if parts.next().is_some() {
            return None;
        }
        let triple = ComparisonTriple::new(x, y, z, pair_type).ok()?;
        Some(PairMeta { triple, role })
    }

    /// The other hypothesis for the same premise.
    pub fn twin(&self) -> PairMeta {
        let role = if self.role == Label::Entailment {
            Label::Contradiction
        } else {
            Label::Entailment
        };
        PairMeta {
            triple: self.triple.clone(),
            role,
        }
    }
}

/// The entailment and contradiction pairs for one triple, in that order.
pub fn labeled_pairs(triple: &ComparisonTriple) -> [LabeledPair; 2] {
    let r = realize(triple);
    let meta = |role| PairMeta {
        triple: triple.clone(),
        role,
    };
    [
        LabeledPair {
            premise: r.premise.clone(),
            hypothesis: r.entailment,
            label: Label::Entailment,
            source_id: meta(Label::Entailment).source_id(),
        },
        LabeledPair {
            premise: r.premise,
            hypothesis: r.contradiction,
            label: Label::Contradiction,
            source_id: meta(Label::Contradiction).source_id(),
        },
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub train: usize,
    pub validation: usize,
    pub test: usize,
}

impl SplitSizes {
    pub fn total(&self) -> usize {
        self.train + self.validation + self.test
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub subjects: Vec<String>,
    pub adjectives: Vec<String>,
    pub pair_types: Vec<PairType>,
    pub split_sizes: Option<SplitSizes>,
    pub seed: u64,
}

/// One phrase per line; blank lines and `#` comments are ignored.
pub fn parse_pool(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

impl GeneratorConfig {
    /// Shipped pools: 10 subjects and 163 adjectives, so each pair type has
    /// 10·9·163 = 14,670 premises and 29,340 labeled pairs; splits default to
    /// 40,000 / 2,000 / 2,000 pairs.
    pub fn default_pools(seed: u64) -> Self {
        GeneratorConfig {
            subjects: parse_pool(DEFAULT_SUBJECTS),
            adjectives: parse_pool(DEFAULT_ADJECTIVES),
            pair_types: PairType::ALL.to_vec(),
            split_sizes: Some(SplitSizes {
                train: 40_000,
                validation: 2_000,
                test: 2_000,
            }),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check_pool = |name: &str, pool: &[String]| -> Result<()> {
            if pool.is_empty() {
                return Err(Error::InvalidConfig(format!("{name} pool is empty")));
            }
            let mut seen = std::collections::HashSet::new();
            for phrase in pool {
                check_phrase(phrase)?;
                if !seen.insert(phrase) {
                    return Err(Error::InvalidConfig(format!("duplicate {name} {phrase:?}")));
                }
            }
            Ok(())
        };
        check_pool("subject", &self.subjects)?;
        check_pool("adjective", &self.adjectives)?;
        if self.subjects.len() < 2 {
            return Err(Error::InvalidConfig(
                "at least two subjects are needed to form an X ≠ Z pair".into(),
            ));
        }
        if self.pair_types.is_empty() {
            return Err(Error::InvalidConfig("no pair types selected".into()));
        }
        let mut types = self.pair_types.clone();
        types.sort();
        types.dedup();
        if types.len() != self.pair_types.len() {
            return Err(Error::InvalidConfig("duplicate pair type".into()));
        }
        if let Some(sizes) = self.split_sizes {
            let available = self.pairs_per_type() * self.pair_types.len();
            if sizes.total() > available {
                return Err(Error::InvalidConfig(format!(
                    "split sizes sum to {} but only {available} pairs can be generated",
                    sizes.total()
                )));
            }
        }
        Ok(())
    }

    /// 2·n·(n−1)·m.
    pub fn pairs_per_type(&self) -> usize {
        let n = self.subjects.len();
        2 * n * n.saturating_sub(1) * self.adjectives.len()
    }
}

fn type_seed(seed: u64, pair_type: PairType) -> u64 {
    seed ^ (0x9E37_79B9_7F4A_7C15u64.wrapping_mul(pair_type as u64 + 1))
}

/// One shuffled corpus per requested pair type, named `comparisons_<type>`.
pub fn generate(config: &GeneratorConfig) -> Result<BTreeMap<PairType, Corpus>> {
    config.validate()?;
    let mut out = BTreeMap::new();
    for &pair_type in &config.pair_types {
        let mut pairs = Vec::with_capacity(config.pairs_per_type());
        for x in &config.subjects {
            for z in config.subjects.iter().filter(|z| *z != x) {
                for y in &config.adjectives {
                    let triple =
                        ComparisonTriple::new(x.as_str(), y.as_str(), z.as_str(), pair_type)?;
                    pairs.extend(labeled_pairs(&triple));
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(type_seed(config.seed, pair_type));
        pairs.shuffle(&mut rng);
        out.insert(
            pair_type,
            Corpus::new(format!("comparisons_{pair_type}"), pairs),
        );
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Splits {
    pub train: Corpus,
    pub validation: Corpus,
    pub test: Corpus,
}

/// Seeded, group-disjoint split.
///
/// Pairs are grouped by triple with X/Z unordered (four pairs per group for
/// generated data; any pair without comparison metadata is its own group).
/// Groups are shuffled and dealt to train, validation and test in turn. When
/// a group is larger than what a split still needs, its leading pairs fill
/// the split and the remainder is discarded rather than leaked.
pub fn split(corpus: &Corpus, sizes: SplitSizes, seed: u64) -> Result<Splits> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut by_key: HashMap<(PairType, String, String, String), usize> = HashMap::new();
    for (i, pair) in corpus.iter().enumerate() {
        match PairMeta::parse(&pair.source_id) {
            Some(meta) => {
                let (t, a, b, y) = meta.triple.group_key();
                let key = (t, a.to_string(), b.to_string(), y.to_string());
                match by_key.get(&key) {
                    Some(&g) => groups[g].push(i),
                    None => {
                        by_key.insert(key, groups.len());
                        groups.push(vec![i]);
                    }
                }
            }
            None => groups.push(vec![i]),
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    groups.shuffle(&mut rng);

    let mut next = groups.into_iter();
    let mut take = |need: usize, which: &str| -> Result<Vec<usize>> {
        let mut chosen = Vec::with_capacity(need);
        while chosen.len() < need {
            let group = next.next().ok_or_else(|| {
                Error::InfeasibleSplit(format!(
                    "ran out of triple groups while filling {which} ({} of {need} pairs)",
                    chosen.len()
                ))
            })?;
            let room = need - chosen.len();
            chosen.extend(group.into_iter().take(room));
        }
        Ok(chosen)
    };
    let train = take(sizes.train, "train")?;
    let validation = take(sizes.validation, "validation")?;
    let test = take(sizes.test, "test")?;

    Ok(Splits {
        train: corpus.select(format!("{}_train", corpus.name), &train),
        validation: corpus.select(format!("{}_validation", corpus.name), &validation),
        test: corpus.select(format!("{}_test", corpus.name), &test),
    })
}

/// Concatenates corpora in order under a new name.
pub fn concat(name: impl Into<String>, corpora: &[&Corpus]) -> Corpus {
    Corpus::new(
        name,
        corpora
            .iter()
            .flat_map(|c| c.pairs.iter().cloned())
            .collect(),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VocabGap {
    pub token: String,
    pub rate_a: f64,
    pub rate_b: f64,
}

impl VocabGap {
    pub fn gap(&self) -> f64 {
        (self.rate_a - self.rate_b).abs()
    }
}

/// Token occurrence rate (count / total tokens, premises and hypotheses).
pub fn token_rates(corpus: &Corpus) -> HashMap<&str, f64> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    let mut total = 0usize;
    for pair in corpus {
        for tok in pair.premise.tokens().iter().chain(pair.hypothesis.tokens()) {
            *counts.entry(tok.as_str()).or_default() += 1;
            total += 1;
        }
    }
    let t = total.max(1) as f64;
    counts.into_iter().map(|(k, c)| (k, c as f64 / t)).collect()
}

/// Tokens whose occurrence rates differ by more than `threshold`, largest
/// gap first (ties by token).
pub fn vocab_diff(a: &Corpus, b: &Corpus, threshold: f64) -> Vec<VocabGap> {
    let ra = token_rates(a);
    let rb = token_rates(b);
    let mut tokens: Vec<&str> = ra.keys().chain(rb.keys()).copied().collect();
    tokens.sort_unstable();
    tokens.dedup();
    let mut gaps: Vec<VocabGap> = tokens
        .into_iter()
        .map(|t| VocabGap {
            token: t.to_string(),
            rate_a: ra.get(t).copied().unwrap_or(0.0),
            rate_b: rb.get(t).copied().unwrap_or(0.0),
        })
        .filter(|g| g.gap() > threshold)
        .collect();
    gaps.sort_by(|x, y| {
        y.gap()
            .total_cmp(&x.gap())
            .then_with(|| x.token.cmp(&y.token))
    });
    gaps
}
