//! Word vectors and the synonym/antonym thesaurus.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Dense word vectors of a single fixed dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTable {
    dimension: usize,
    index: HashMap<String, usize>,
    tokens: Vec<String>,
    data: Vec<f64>,
    source_sha256: Option<String>,
}

impl EmbeddingTable {
    pub fn new(dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidArgument(
                "embedding dimension must be positive".into(),
            ));
        }
        Ok(EmbeddingTable {
            dimension,
            index: HashMap::new(),
            tokens: Vec::new(),
            data: Vec::new(),
            source_sha256: None,
        })
    }

    /// Adds `token`; a token already present keeps its first vector.
    pub fn insert(&mut self, token: impl Into<String>, vector: &[f64]) -> Result<bool> {
        if vector.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: vector.len(),
            });
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "non-finite embedding component".into(),
            ));
        }
        let token = token.into();
        if self.index.contains_key(&token) {
            return Ok(false);
        }
        self.index.insert(token.clone(), self.tokens.len());
        self.tokens.push(token);
        self.data.extend_from_slice(vector);
        Ok(true)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// `None` for tokens without a vector.
    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.index.get(token).map(|&i| self.row(i))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dimension..(i + 1) * self.dimension]
    }

    /// SHA-256 of the file the table was read from, if any.
    pub fn source_sha256(&self) -> Option<&str> {
        self.source_sha256.as_deref()
    }

    /// Identifies the vectors. Tables read from the same file share the
    /// file's hash whatever vocabulary filter was applied; tables built in
    /// memory get an order-independent content hash.
    pub fn fingerprint(&self) -> String {
        if let Some(source) = &self.source_sha256 {
            return format!("file:{source}");
        }
        self.content_hash()
    }

    pub fn content_hash(&self) -> String {
        let mut order: Vec<usize> = (0..self.tokens.len()).collect();
        order.sort_by(|&a, &b| self.tokens[a].cmp(&self.tokens[b]));
        let mut hasher = Sha256::new();
        hasher.update((self.dimension as u64).to_le_bytes());
        for i in order {
            hasher.update(self.tokens[i].as_bytes());
            hasher.update([0u8]);
            for v in self.row(i) {
                hasher.update(v.to_bits().to_le_bytes());
            }
        }
        hex::encode(hasher.finalize())
    }
}

#[derive(Clone, Debug)]
pub struct LoadedEmbeddings {
    pub table: EmbeddingTable,
    /// Lines whose field count disagrees with the inferred dimension or
    /// whose components do not parse as finite decimals.
    pub rejected: usize,
}

/// Reads `token v1 ... vD` lines. The dimension comes from the first line;
/// a leading word2vec-style `count dim` header line is skipped.
pub fn load_embeddings(
    path: &Path,
    vocab_filter: Option<&HashSet<String>>,
) -> Result<LoadedEmbeddings> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut hasher = Sha256::new();

    let mut table: Option<EmbeddingTable> = None;
    let mut rejected = 0;
    let mut vector = Vec::new();
    let mut bytes = Vec::new();
    for lineno in 0.. {
        bytes.clear();
        if reader
            .read_until(b'\n', &mut bytes)
            .map_err(|e| Error::io(path, e))?
            == 0
        {
            break;
        }
        hasher.update(&bytes);
        let Ok(line) = std::str::from_utf8(&bytes) else {
            rejected += 1;
            continue;
        };
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(' ');
        let token = fields.next().unwrap_or_default();
        let rest: Vec<&str> = fields.collect();

        if lineno == 0
            && rest.len() == 1
            && token.parse::<u64>().is_ok()
            && rest[0].parse::<u64>().is_ok()
        {
            continue;
        }
        if table.is_none() {
            match EmbeddingTable::new(rest.len()) {
                Ok(t) => table = Some(t),
                Err(_) => {
                    rejected += 1;
                    continue;
                }
            }
        }
        let table = table.as_mut().expect("initialized above");
        if rest.len() != table.dimension() {
            rejected += 1;
            continue;
        }
        if vocab_filter.is_some_and(|f| !f.contains(token)) {
            continue;
        }
        vector.clear();
        let parsed = rest.iter().try_for_each(|f| match f.parse::<f64>() {
            Ok(v) if v.is_finite() => {
                vector.push(v);
                Ok(())
            }
            _ => Err(()),
        });
        if parsed.is_err() {
            rejected += 1;
            continue;
        }
        table.insert(token, &vector)?;
    }

    match table {
        Some(mut table) if !table.is_empty() => {
            table.source_sha256 = Some(hex::encode(hasher.finalize()));
            Ok(LoadedEmbeddings { table, rejected })
        }
        _ => Err(Error::EmptyEmbeddings(path.to_path_buf())),
    }
}

/// One line of a thesaurus file.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThesaurusRecord {
    pub word: String,
    #[serde(default)]
    pub synonyms: Vec<String>,
    #[serde(default)]
    pub antonyms: Vec<String>,
}

static EMPTY: BTreeSet<String> = BTreeSet::new();

/// Single-hop synonym relation plus a symmetric, irreflexive antonym relation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Thesaurus {
    synonyms: BTreeMap<String, BTreeSet<String>>,
    antonyms: BTreeMap<String, BTreeSet<String>>,
}

impl Thesaurus {
    pub fn from_records<I: IntoIterator<Item = ThesaurusRecord>>(records: I) -> Self {
        let mut thesaurus = Thesaurus::default();
        for record in records {
            thesaurus.add_record(record);
        }
        thesaurus.close_antonyms();
        thesaurus
    }

    fn add_record(&mut self, record: ThesaurusRecord) {
        let word = record.word.to_lowercase();
        if !record.synonyms.is_empty() {
            self.synonyms
                .entry(word.clone())
                .or_default()
                .extend(record.synonyms.iter().map(|s| s.to_lowercase()));
        }
        if !record.antonyms.is_empty() {
            self.antonyms
                .entry(word)
                .or_default()
                .extend(record.antonyms.iter().map(|s| s.to_lowercase()));
        }
    }

    /// Adds b→a for every a→b and drops self-antonyms. Idempotent.
    pub fn close_antonyms(&mut self) {
        let edges: Vec<(String, String)> = self
            .antonyms
            .iter()
            .flat_map(|(a, bs)| bs.iter().map(move |b| (b.clone(), a.clone())))
            .collect();
        for (b, a) in edges {
            self.antonyms.entry(b).or_default().insert(a);
        }
        for (word, set) in self.antonyms.iter_mut() {
            set.remove(word);
        }
        self.antonyms.retain(|_, set| !set.is_empty());
    }

    pub fn synonyms(&self, word: &str) -> &BTreeSet<String> {
        self.synonyms.get(word).unwrap_or(&EMPTY)
    }

    pub fn antonyms(&self, word: &str) -> &BTreeSet<String> {
        self.antonyms.get(word).unwrap_or(&EMPTY)
    }

    pub fn is_empty(&self) -> bool {
        self.synonyms.is_empty() && self.antonyms.is_empty()
    }

    /// Number of words with at least one antonym.
    pub fn antonym_entries(&self) -> usize {
        self.antonyms.len()
    }
}

/// Loads a JSON-lines thesaurus (`{"word": .., "synonyms": [..], "antonyms": [..]}`).
/// Records for the same word are merged.
pub fn load_thesaurus(path: &Path) -> Result<Thesaurus> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let record: ThesaurusRecord = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: lineno + 1,
            message: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(Thesaurus::from_records(records))
}
