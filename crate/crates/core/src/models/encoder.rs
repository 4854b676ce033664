//! Sentence encoders and the pair-feature combiner.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Sentence;
use crate::error::{Error, Result};
use crate::lexicon::EmbeddingTable;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncoderKind {
    /// Mean of the word vectors.
    Bow,
    /// Mean of the first ⌈n/2⌉ tokens concatenated with the mean of the rest.
    HalfSplit,
}

impl EncoderKind {
    pub fn output_dim(self, embedding_dim: usize) -> usize {
        match self {
            EncoderKind::Bow => embedding_dim,
            EncoderKind::HalfSplit => 2 * embedding_dim,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EncoderKind::Bow => "bow",
            EncoderKind::HalfSplit => "half_split",
        }
    }
}

impl fmt::Display for EncoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EncoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bow" => Ok(EncoderKind::Bow),
            "half_split" | "half-split" => Ok(EncoderKind::HalfSplit),
            other => Err(Error::InvalidArgument(format!("unknown encoder {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Encoded {
    pub vector: Vec<f64>,
    /// Set when no token of the sentence had a vector; `vector` is then zero.
    pub all_oov: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct Encoder<'a> {
    pub kind: EncoderKind,
    pub table: &'a EmbeddingTable,
}

impl<'a> Encoder<'a> {
    pub fn new(kind: EncoderKind, table: &'a EmbeddingTable) -> Self {
        Encoder { kind, table }
    }

    pub fn output_dim(&self) -> usize {
        self.kind.output_dim(self.table.dimension())
    }

    pub fn encode(&self, sentence: &Sentence) -> Encoded {
        let mut vector = vec![0.0; self.output_dim()];
        let found = self.encode_into(sentence.tokens(), &mut vector);
        Encoded {
            vector,
            all_oov: found == 0,
        }
    }

    /// Writes the encoding into `out` and returns how many tokens had vectors.
    pub fn encode_into(&self, tokens: &[String], out: &mut [f64]) -> usize {
        debug_assert_eq!(out.len(), self.output_dim());
        match self.kind {
            EncoderKind::Bow => mean_into(self.table, tokens, out),
            EncoderKind::HalfSplit => {
                let cut = tokens.len().div_ceil(2);
                let (first, second) = out.split_at_mut(self.table.dimension());
                mean_into(self.table, &tokens[..cut], first)
                    + mean_into(self.table, &tokens[cut..], second)
            }
        }
    }
}

/// Mean of the known tokens' vectors, summed in sorted token order so that
/// any permutation of `tokens` yields a bit-identical result.
fn mean_into(table: &EmbeddingTable, tokens: &[String], out: &mut [f64]) -> usize {
    out.iter_mut().for_each(|x| *x = 0.0);
    let mut known: Vec<&[f64]> = Vec::with_capacity(tokens.len());
    let mut sorted: Vec<&str> = tokens.iter().map(String::as_str).collect();
    sorted.sort_unstable();
    for tok in sorted {
        if let Some(v) = table.get(tok) {
            known.push(v);
        }
    }
    for v in &known {
        for (o, x) in out.iter_mut().zip(v.iter()) {
            *o += x;
        }
    }
    if !known.is_empty() {
        let n = known.len() as f64;
        out.iter_mut().for_each(|x| *x /= n);
    }
    known.len()
}

/// How premise and hypothesis encodings are joined into classifier input.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Combiner {
    /// [u; v; |u−v|; u⊙v]
    #[default]
    FourBlock,
    /// [u; v]
    Concat,
}

impl Combiner {
    pub fn blocks(self) -> usize {
        match self {
            Combiner::FourBlock => 4,
            Combiner::Concat => 2,
        }
    }

    pub fn combine_into(self, u: &[f64], v: &[f64], out: &mut [f64]) {
        let d = u.len();
        debug_assert_eq!(out.len(), self.blocks() * d);
        out[..d].copy_from_slice(u);
        out[d..2 * d].copy_from_slice(v);
        if self == Combiner::FourBlock {
            for i in 0..d {
                out[2 * d + i] = (u[i] - v[i]).abs();
                out[3 * d + i] = u[i] * v[i];
            }
        }
    }
}

impl FromStr for Combiner {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "four-block" => Ok(Combiner::FourBlock),
            "concat" => Ok(Combiner::Concat),
            other => Err(Error::InvalidArgument(format!(
                "unknown combiner {other:?}"
            ))),
        }
    }
}

/// [u; v; |u−v|; u⊙v].
pub fn pair_features(u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            found: v.len(),
        });
    }
    let mut out = vec![0.0; 4 * u.len()];
    Combiner::FourBlock.combine_into(u, v, &mut out);
    Ok(out)
}
