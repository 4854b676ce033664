//! Lexical-heuristic statistics over NLI corpora: word-overlap ranking,
//! antonym pairs reached through one synonym hop, and negation cues.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Label, LabelCounts, LabelFractions, LabeledPair, Sentence};
use crate::error::{Error, Result};
use crate::lexicon::Thesaurus;

/// How "total # of words" is read in the overlap rate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OverlapMeasure {
    /// |types(p) ∩ types(h)| / |types(p) ∪ types(h)|.
    #[default]
    Jaccard,
    /// Tokens (with repetition) of either sentence whose type also occurs in
    /// the other sentence, over the summed sentence lengths.
    TokenShare,
}

impl std::str::FromStr for OverlapMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jaccard" => Ok(OverlapMeasure::Jaccard),
            "token-share" => Ok(OverlapMeasure::TokenShare),
            other => Err(Error::InvalidArgument(format!(
                "unknown overlap measure {other:?}"
            ))),
        }
    }
}

fn types(sentence: &Sentence) -> HashSet<&str> {
    sentence.tokens().iter().map(String::as_str).collect()
}

pub fn overlap_rate(pair: &LabeledPair) -> Result<f64> {
    overlap_rate_with(pair, OverlapMeasure::Jaccard)
}

pub fn overlap_rate_with(pair: &LabeledPair, measure: OverlapMeasure) -> Result<f64> {
    if pair.premise.is_empty() || pair.hypothesis.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "pair {} has an empty sentence",
            pair.source_id
        )));
    }
    let p = types(&pair.premise);
    let h = types(&pair.hypothesis);
    Ok(match measure {
        OverlapMeasure::Jaccard => {
            let shared = p.intersection(&h).count();
            shared as f64 / (p.len() + h.len() - shared) as f64
        }
        OverlapMeasure::TokenShare => {
            let shared = |tokens: &[String], other: &HashSet<&str>| {
                tokens.iter().filter(|t| other.contains(t.as_str())).count()
            };
            let hits = shared(pair.premise.tokens(), &h) + shared(pair.hypothesis.tokens(), &p);
            hits as f64 / (pair.premise.tokens().len() + pair.hypothesis.tokens().len()) as f64
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankedPair {
    pub index: usize,
    pub rate: f64,
}

/// Pairs sorted by non-increasing overlap rate; ties keep corpus order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapRanking {
    pub measure: OverlapMeasure,
    pub entries: Vec<RankedPair>,
}

impl OverlapRanking {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn top(&self, k: usize) -> &[RankedPair] {
        &self.entries[..k.min(self.entries.len())]
    }
}

pub fn rank_by_overlap(corpus: &Corpus) -> Result<OverlapRanking> {
    rank_by_overlap_with(corpus, OverlapMeasure::Jaccard, 1)
}

/// `threads > 1` computes rates on a dedicated pool; the result is identical.
pub fn rank_by_overlap_with(
    corpus: &Corpus,
    measure: OverlapMeasure,
    threads: usize,
) -> Result<OverlapRanking> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus(corpus.name.clone()));
    }
    let rates: Vec<f64> = if threads > 1 {
        with_threads(threads, || {
            corpus
                .pairs
                .par_iter()
                .map(|p| overlap_rate_with(p, measure))
                .collect::<Result<Vec<_>>>()
        })?
    } else {
        corpus
            .iter()
            .map(|p| overlap_rate_with(p, measure))
            .collect::<Result<Vec<_>>>()?
    };
    let mut entries: Vec<RankedPair> = rates
        .into_iter()
        .enumerate()
        .map(|(index, rate)| RankedPair { index, rate })
        .collect();
    // stable: equal rates stay in corpus order
    entries.sort_by(|a, b| b.rate.total_cmp(&a.rate));
    Ok(OverlapRanking { measure, entries })
}

pub fn top_k_label_distribution(
    ranking: &OverlapRanking,
    corpus: &Corpus,
    k: usize,
) -> Result<LabelFractions> {
    check_k(k, ranking.len())?;
    let mut counts = LabelCounts::default();
    for entry in ranking.top(k) {
        counts.add(corpus.pairs[entry.index].label);
    }
    counts
        .fractions()
        .ok_or_else(|| Error::EmptyCorpus(corpus.name.clone()))
}

fn check_k(k: usize, len: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    if k > len {
        return Err(Error::InvalidArgument(format!(
            "k = {k} exceeds corpus size {len}"
        )));
    }
    Ok(())
}

/// The `k` highest-overlap pairs, kept in corpus order.
pub fn high_overlap_subset(corpus: &Corpus, k: usize) -> Result<Corpus> {
    let ranking = rank_by_overlap(corpus)?;
    high_overlap_subset_from(&ranking, corpus, k)
}

pub fn high_overlap_subset_from(
    ranking: &OverlapRanking,
    corpus: &Corpus,
    k: usize,
) -> Result<Corpus> {
    check_k(k, ranking.len())?;
    let mut indices: Vec<usize> = ranking.top(k).iter().map(|e| e.index).collect();
    indices.sort_unstable();
    Ok(corpus.select(format!("{}_top{k}", corpus.name), &indices))
}

/// True iff the hypothesis contains an antonym of the premise word `a` or of
/// one of `a`'s direct synonyms, for some premise word `a`.
pub fn has_antonym_pair(pair: &LabeledPair, thesaurus: &Thesaurus) -> bool {
    let hypothesis = types(&pair.hypothesis);
    pair.premise.tokens().iter().any(|a| {
        std::iter::once(a)
            .chain(thesaurus.synonyms(a))
            .flat_map(|s| thesaurus.antonyms(s))
            .any(|w| hypothesis.contains(w.as_str()))
    })
}

/// `no` and `not` as whole tokens, or any token ending in `n't`.
pub fn has_negation(sentence: &Sentence) -> bool {
    sentence
        .tokens()
        .iter()
        .any(|t| t == "no" || t == "not" || t.ends_with("n't"))
}

pub fn negation_differs(pair: &LabeledPair) -> bool {
    has_negation(&pair.premise) != has_negation(&pair.hypothesis)
}

/// Counts of a binary predicate against the three gold labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionalStats {
    pub predicate_name: String,
    pub joint_counts: LabelCounts,
    pub label_counts: LabelCounts,
    pub predicate_count: usize,
    pub total: usize,
}

impl ConditionalStats {
    /// P(predicate | label); `None` when the label never occurs.
    pub fn p_pred_given_label(&self, label: Label) -> Option<f64> {
        let n = self.label_counts.get(label);
        (n > 0).then(|| self.joint_counts.get(label) as f64 / n as f64)
    }

    /// P(label | predicate); `None` when the predicate never holds.
    pub fn p_label_given_pred(&self, label: Label) -> Option<f64> {
        (self.predicate_count > 0)
            .then(|| self.joint_counts.get(label) as f64 / self.predicate_count as f64)
    }

    fn merge(mut self, other: ConditionalStats) -> ConditionalStats {
        for l in Label::ALL {
            self.joint_counts.0[l.index()] += other.joint_counts.get(l);
            self.label_counts.0[l.index()] += other.label_counts.get(l);
        }
        self.predicate_count += other.predicate_count;
        self.total += other.total;
        self
    }

    fn empty(name: &str) -> ConditionalStats {
        ConditionalStats {
            predicate_name: name.to_string(),
            joint_counts: LabelCounts::default(),
            label_counts: LabelCounts::default(),
            predicate_count: 0,
            total: 0,
        }
    }

    fn observe(&mut self, label: Label, holds: bool) {
        self.label_counts.add(label);
        self.total += 1;
        if holds {
            self.joint_counts.add(label);
            self.predicate_count += 1;
        }
    }
}

pub fn conditional_stats<P>(corpus: &Corpus, predicate: P, name: &str) -> ConditionalStats
where
    P: Fn(&LabeledPair) -> bool,
{
    let mut stats = ConditionalStats::empty(name);
    for pair in corpus {
        stats.observe(pair.label, predicate(pair));
    }
    stats
}

/// Parallel fold with count merging; equal to [`conditional_stats`].
pub fn conditional_stats_par<P>(
    corpus: &Corpus,
    predicate: P,
    name: &str,
    threads: usize,
) -> Result<ConditionalStats>
where
    P: Fn(&LabeledPair) -> bool + Sync,
{
    with_threads(threads, || {
        Ok(corpus
            .pairs
            .par_iter()
            .fold(
                || ConditionalStats::empty(name),
                |mut acc, pair| {
                    acc.observe(pair.label, predicate(pair));
                    acc
                },
            )
            .reduce(|| ConditionalStats::empty(name), ConditionalStats::merge))
    })
}

pub(crate) fn with_threads<T: Send>(
    threads: usize,
    f: impl FnOnce() -> Result<T> + Send,
) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{generate, GeneratorConfig, PairType};
    use crate::lexicon::ThesaurusRecord;
    use proptest::prelude::*;

    fn pair(p: &str, h: &str, label: Label) -> LabeledPair {
        LabeledPair::new(p, h, label, "t")
    }

    fn thesaurus(entries: &[(&str, &[&str], &[&str])]) -> Thesaurus {
        Thesaurus::from_records(entries.iter().map(|(w, s, a)| ThesaurusRecord {
            word: w.to_string(),
            synonyms: s.iter().map(|x| x.to_string()).collect(),
            antonyms: a.iter().map(|x| x.to_string()).collect(),
        }))
    }

    #[test]
    fn overlap_of_permutation_is_one() {
        let p = pair(
            "the woman is more cheerful than the man",
            "the man is more cheerful than the woman",
            Label::Contradiction,
        );
        assert_eq!(overlap_rate(&p).unwrap(), 1.0);
        assert_eq!(
            overlap_rate_with(&p, OverlapMeasure::TokenShare).unwrap(),
            1.0
        );
    }

    #[test]
    fn overlap_of_disjoint_pair_is_zero() {
        assert_eq!(
            overlap_rate(&pair("a b", "c d", Label::Neutral)).unwrap(),
            0.0
        );
    }

    #[test]
    fn overlap_of_ladder_example() {
        // premise types: several people are trying to climb a ladder in tree (10)
        // hypothesis types: people are watching a ball game (6)
        // shared: people are a (3); union 13
        let p = pair(
            "Several people are trying to climb a ladder in a tree",
            "People are watching a ball game",
            Label::Contradiction,
        );
        assert!((overlap_rate(&p).unwrap() - 3.0 / 13.0).abs() < 1e-15);
    }

    #[test]
    fn token_share_counts_repeats() {
        // "a a b" vs "a c": premise hits 2 of 3, hypothesis hits 1 of 2
        let p = pair("a a b", "a c", Label::Neutral);
        assert!(
            (overlap_rate_with(&p, OverlapMeasure::TokenShare).unwrap() - 3.0 / 5.0).abs() < 1e-15
        );
    }

    #[test]
    fn overlap_rejects_empty_sentence() {
        let p = pair("a", "", Label::Neutral);
        assert!(overlap_rate(&p).is_err());
    }

    #[test]
    fn ranking_orders_and_breaks_ties_by_corpus_order() {
        // rates: 1/5 = 0.2, 1.0, 0.5
        let c = Corpus::new(
            "r",
            vec![
                pair("a b c", "a d e", Label::Entailment),
                pair("x y", "y x", Label::Neutral),
                pair("p q", "p", Label::Contradiction),
            ],
        );
        let r = rank_by_overlap(&c).unwrap();
        let order: Vec<_> = r.entries.iter().map(|e| e.index).collect();
        assert_eq!(order, [1, 2, 0]);

        let tied = Corpus::new(
            "t",
            vec![
                pair("a", "a", Label::Neutral),
                pair("b", "b", Label::Entailment),
            ],
        );
        let order: Vec<_> = rank_by_overlap(&tied)
            .unwrap()
            .entries
            .iter()
            .map(|e| e.index)
            .collect();
        assert_eq!(order, [0, 1]);
        assert!(rank_by_overlap(&Corpus::new("e", vec![])).is_err());
    }

    #[test]
    fn top_k_full_equals_label_distribution() {
        let c = Corpus::new(
            "r",
            vec![
                pair("a b c", "a d e", Label::Entailment),
                pair("x y", "y x", Label::Neutral),
                pair("p q", "p", Label::Contradiction),
                pair("p q", "z", Label::Contradiction),
            ],
        );
        let r = rank_by_overlap(&c).unwrap();
        assert_eq!(
            top_k_label_distribution(&r, &c, 4).unwrap(),
            crate::corpus::label_distribution(&c).unwrap()
        );
        assert_eq!(
            top_k_label_distribution(&r, &c, 1).unwrap().0,
            [0.0, 1.0, 0.0]
        );
        assert!(top_k_label_distribution(&r, &c, 0).is_err());
        assert!(top_k_label_distribution(&r, &c, 5).is_err());
    }

    #[test]
    fn high_overlap_subset_keeps_corpus_order() {
        let c = Corpus::new(
            "r",
            vec![
                pair("a b c", "a d e", Label::Entailment),
                pair("x y", "y x", Label::Neutral),
                pair("p q", "p", Label::Contradiction),
            ],
        );
        let sub = high_overlap_subset(&c, 2).unwrap();
        assert_eq!(sub.pairs, vec![c.pairs[1].clone(), c.pairs[2].clone()]);
        assert_eq!(high_overlap_subset(&c, 3).unwrap().pairs, c.pairs);
    }

    #[test]
    fn antonym_direct() {
        let t = thesaurus(&[("more", &[], &["less"])]);
        let p = pair(
            "the man is more tall",
            "the man is less tall",
            Label::Contradiction,
        );
        assert!(has_antonym_pair(&p, &t));
    }

    #[test]
    fn antonym_through_synonym_hop() {
        let t = thesaurus(&[("happy", &["cheerful"], &[]), ("cheerful", &[], &["sad"])]);
        assert!(has_antonym_pair(
            &pair("a happy dog", "a sad dog", Label::Contradiction),
            &t
        ));
        // one hop only, and only premise -> hypothesis through synonyms
        assert!(!has_antonym_pair(
            &pair("a sad dog", "a happy dog", Label::Contradiction),
            &t
        ));
    }

    #[test]
    fn antonym_empty_thesaurus() {
        let t = Thesaurus::default();
        assert!(!has_antonym_pair(
            &pair("more", "less", Label::Contradiction),
            &t
        ));
    }

    #[test]
    fn negation_cases() {
        assert!(has_negation(&Sentence::new(
            "the woman is not more cheerful than the man"
        )));
        assert!(has_negation(&Sentence::new("people don't run")));
        assert!(has_negation(&Sentence::new("There is no dog.")));
        assert!(!has_negation(&Sentence::new("nothing happened")));
        assert!(!has_negation(&Sentence::new("a note on the door")));
    }

    #[test]
    fn negation_differs_cases() {
        assert!(negation_differs(&pair(
            "a dog runs",
            "a dog does not run",
            Label::Contradiction
        )));
        assert!(!negation_differs(&pair(
            "no dog runs",
            "a dog doesn't run",
            Label::Entailment
        )));
        assert!(!negation_differs(&pair(
            "a dog runs",
            "a dog sleeps",
            Label::Neutral
        )));
    }

    #[test]
    fn always_false_predicate() {
        let c = Corpus::new(
            "f",
            vec![
                pair("a", "b", Label::Entailment),
                pair("a", "b", Label::Contradiction),
            ],
        );
        let s = conditional_stats(&c, |_| false, "never");
        assert_eq!(s.p_pred_given_label(Label::Entailment), Some(0.0));
        assert_eq!(s.p_pred_given_label(Label::Contradiction), Some(0.0));
        assert_eq!(s.p_pred_given_label(Label::Neutral), None);
        assert_eq!(s.p_label_given_pred(Label::Contradiction), None);
    }

    #[test]
    fn comparisons_same_type_has_full_overlap() {
        let cfg = GeneratorConfig {
            subjects: vec!["cat".into(), "dog".into(), "man".into()],
            adjectives: vec!["big".into(), "calm".into()],
            pair_types: vec![PairType::Same],
            split_sizes: None,
            seed: 0,
        };
        let c = &generate(&cfg).unwrap()[&PairType::Same];
        assert!(c.iter().all(|p| overlap_rate(p).unwrap() == 1.0));
    }

    const WORDS: &[&str] = &[
        "a", "b", "c", "d", "no", "not", "don't", "more", "less", "big", "small",
    ];

    fn arb_pair() -> impl Strategy<Value = LabeledPair> {
        (
            prop::collection::vec(prop::sample::select(WORDS), 1..8),
            prop::collection::vec(prop::sample::select(WORDS), 1..8),
            0usize..3,
        )
            .prop_map(|(p, h, l)| {
                LabeledPair::new(p.join(" "), h.join(" "), Label::from_index(l).unwrap(), "p")
            })
    }

    proptest! {
        #[test]
        fn overlap_is_symmetric_and_bounded(p in arb_pair()) {
            let swapped = LabeledPair { premise: p.hypothesis.clone(), hypothesis: p.premise.clone(), ..p.clone() };
            for m in [OverlapMeasure::Jaccard, OverlapMeasure::TokenShare] {
                let r = overlap_rate_with(&p, m).unwrap();
                prop_assert!((0.0..=1.0).contains(&r));
                prop_assert_eq!(r, overlap_rate_with(&swapped, m).unwrap());
            }
            let equal_sets = types(&p.premise) == types(&p.hypothesis);
            prop_assert_eq!(overlap_rate(&p).unwrap() == 1.0, equal_sets);
        }

        #[test]
        fn conditional_identities(pairs in prop::collection::vec(arb_pair(), 1..60)) {
            let c = Corpus::new("p", pairs);
            let t = thesaurus(&[("more", &[], &["less"]), ("big", &[], &["small"])]);
            for stats in [
                conditional_stats(&c, negation_differs, "negation"),
                conditional_stats(&c, |p| has_antonym_pair(p, &t), "antonym"),
            ] {
                prop_assert_eq!(stats.joint_counts.total(), stats.predicate_count);
                prop_assert_eq!(stats.label_counts.total(), stats.total);
                for l in Label::ALL {
                    prop_assert!(stats.joint_counts.get(l) <= stats.label_counts.get(l));
                    if let (Some(a), Some(b)) = (stats.p_pred_given_label(l), stats.p_label_given_pred(l)) {
                        let lhs = a * stats.label_counts.get(l) as f64;
                        let rhs = b * stats.predicate_count as f64;
                        prop_assert!((lhs - rhs).abs() < 1e-9);
                        prop_assert!((lhs - stats.joint_counts.get(l) as f64).abs() < 1e-9);
                    }
                }
            }
        }

        #[test]
        fn parallel_matches_sequential(pairs in prop::collection::vec(arb_pair(), 1..80)) {
            let c = Corpus::new("p", pairs);
            let seq = conditional_stats(&c, negation_differs, "neg");
            let par = conditional_stats_par(&c, negation_differs, "neg", 4).unwrap();
            prop_assert_eq!(seq, par);
            let r1 = rank_by_overlap_with(&c, OverlapMeasure::Jaccard, 1).unwrap();
            let r4 = rank_by_overlap_with(&c, OverlapMeasure::Jaccard, 4).unwrap();
            prop_assert_eq!(r1, r4);
        }

        #[test]
        fn antonym_symmetric_without_synonyms(p in arb_pair()) {
            let t = thesaurus(&[("more", &[], &["less"]), ("big", &[], &["small"]), ("a", &[], &["d"])]);
            let swapped = LabeledPair { premise: p.hypothesis.clone(), hypothesis: p.premise.clone(), ..p.clone() };
            prop_assert_eq!(has_antonym_pair(&p, &t), has_antonym_pair(&swapped, &t));
        }
    }
}
