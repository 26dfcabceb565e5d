//! Dependency-parsed review sentences: CoNLL-U ingestion, selection filters
//! and seeded sampling.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::io::BufRead;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const PUNCT: &str = "PUNCT";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    /// 1-based position.
    pub index: usize,
    pub surface: String,
    pub lemma: String,
    pub upos: String,
    /// Governor index, 0 for the root.
    pub head: usize,
    pub deprel: String,
    pub space_after: bool,
}

impl Token {
    pub fn is_punct(&self) -> bool {
        self.upos == PUNCT
    }

    pub fn is_nominal(&self) -> bool {
        self.upos == "NOUN" || self.upos == "PROPN"
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedSentence {
    pub sent_id: Option<String>,
    pub text: Option<String>,
    pub tokens: Vec<Token>,
    pub review_id: String,
    pub business_id: String,
    pub stars: u8,
    pub is_fragment: Option<bool>,
}

impl ParsedSentence {
    /// Token by 1-based index.
    pub fn token(&self, index: usize) -> &Token {
        &self.tokens[index - 1]
    }

    /// Number of non-punctuation tokens.
    pub fn word_count(&self) -> usize {
        self.tokens.iter().filter(|t| !t.is_punct()).count()
    }

    pub fn root(&self) -> Option<&Token> {
        self.tokens.iter().find(|t| t.head == 0)
    }

    /// Surface text: the `# text` comment when present, otherwise the tokens
    /// joined by single spaces honouring `SpaceAfter=No`.
    pub fn surface(&self) -> String {
        if let Some(text) = &self.text {
            return text.clone();
        }
        let mut out = String::new();
        for (i, t) in self.tokens.iter().enumerate() {
            out.push_str(&t.surface);
            if t.space_after && i + 1 < self.tokens.len() {
                out.push(' ');
            }
        }
        out
    }

    /// Fragment status: the upstream flag when present, otherwise true iff
    /// the root is not a VERB, AUX or ADJ.
    pub fn is_fragment(&self) -> bool {
        if let Some(flag) = self.is_fragment {
            return flag;
        }
        !matches!(self.root().map(|t| t.upos.as_str()), Some("VERB" | "AUX" | "ADJ"))
    }

    /// Writes the retained token columns back as CoNLL-U (lemma, xpos and
    /// feats are not all retained; unknown columns are `_`).
    pub fn to_conllu(&self) -> String {
        let mut out = String::new();
        if let Some(id) = &self.sent_id {
            let _ = writeln!(out, "# sent_id = {id}");
        }
        if let Some(text) = &self.text {
            let _ = writeln!(out, "# text = {text}");
        }
        let _ = writeln!(out, "# review_id = {}", self.review_id);
        let _ = writeln!(out, "# business_id = {}", self.business_id);
        let _ = writeln!(out, "# stars = {}", self.stars);
        if let Some(f) = self.is_fragment {
            let _ = writeln!(out, "# is_fragment = {f}");
        }
        for t in &self.tokens {
            let misc = if t.space_after { "_" } else { "SpaceAfter=No" };
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t_\t_\t{}\t{}\t_\t{}",
                t.index, t.surface, t.lemma, t.upos, t.head, t.deprel, misc
            );
        }
        out.push('\n');
        out
    }
}

/// Review-level metadata, one JSON object per line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReviewMeta {
    pub review_id: String,
    pub business_id: String,
    pub stars: u8,
}

#[derive(Debug, Error)]
pub enum ConlluError {
    #[error("line {line}: expected 10 tab-separated columns, found {found}")]
    ColumnCount { line: usize, found: usize },
    #[error("line {line}: {field} `{value}` is not a valid integer")]
    BadInteger {
        line: usize,
        field: &'static str,
        value: String,
    },
    #[error("sentence {sentence}: {message}")]
    Invalid { sentence: String, message: String },
    #[error("sentence {sentence}: no star rating (neither `# stars` nor metadata for its review)")]
    MissingStars { sentence: String },
    #[error("metadata line {line}: {message}")]
    Metadata { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Parses review metadata JSON lines keyed by review id.
pub fn read_metadata<R: BufRead>(reader: R) -> Result<HashMap<String, ReviewMeta>, ConlluError> {
    let mut out = HashMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let meta: ReviewMeta = serde_json::from_str(&line).map_err(|e| ConlluError::Metadata {
            line: i + 1,
            message: e.to_string(),
        })?;
        if !(1..=5).contains(&meta.stars) {
            return Err(ConlluError::Metadata {
                line: i + 1,
                message: format!("stars {} outside 1..=5", meta.stars),
            });
        }
        out.insert(meta.review_id.clone(), meta);
    }
    Ok(out)
}

#[derive(Default)]
struct Block {
    first_line: usize,
    comments: HashMap<String, String>,
    tokens: Vec<Token>,
}

/// Streaming CoNLL-U reader yielding one sentence per blank-line separated block.
pub struct ConlluReader<'m, R> {
    lines: std::io::Lines<R>,
    line_no: usize,
    metadata: &'m HashMap<String, ReviewMeta>,
    seq: usize,
}

impl<'m, R: BufRead> ConlluReader<'m, R> {
    pub fn new(reader: R, metadata: &'m HashMap<String, ReviewMeta>) -> Self {
        ConlluReader {
            lines: reader.lines(),
            line_no: 0,
            metadata,
            seq: 0,
        }
    }

    fn next_block(&mut self) -> Result<Option<Block>, ConlluError> {
        let mut block: Option<Block> = None;
        for line in self.lines.by_ref() {
            let line = line?;
            self.line_no += 1;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                if block.is_some() {
                    return Ok(block);
                }
                continue;
            }
            let b = block.get_or_insert_with(|| Block {
                first_line: self.line_no,
                ..Block::default()
            });
            if let Some(comment) = line.strip_prefix('#') {
                if let Some((k, v)) = comment.split_once('=') {
                    b.comments.insert(k.trim().to_string(), v.trim().to_string());
                }
                continue;
            }
            if let Some(tok) = parse_token_line(line, self.line_no)? {
                b.tokens.push(tok);
            }
        }
        Ok(block)
    }

    fn finish(&mut self, block: Block) -> Result<ParsedSentence, ConlluError> {
        self.seq += 1;
        let name = block
            .comments
            .get("sent_id")
            .cloned()
            .unwrap_or_else(|| format!("#{} (line {})", self.seq, block.first_line));
        let invalid = |message: String| ConlluError::Invalid {
            sentence: name.clone(),
            message,
        };
        if block.tokens.is_empty() {
            return Err(invalid("no tokens".into()));
        }
        let n = block.tokens.len();
        for (i, t) in block.tokens.iter().enumerate() {
            if t.index != i + 1 {
                return Err(invalid(format!("token ids not contiguous at id {}", t.index)));
            }
            if t.head > n || t.head == t.index {
                return Err(invalid(format!("token {} has invalid head {}", t.index, t.head)));
            }
            if t.deprel.is_empty() || t.deprel == "_" {
                return Err(invalid(format!("token {} has no dependency relation", t.index)));
            }
        }
        let review_id = block.comments.get("review_id").cloned().unwrap_or_default();
        let meta = self.metadata.get(&review_id);
        let stars = match block.comments.get("stars") {
            Some(v) => Some(v.parse::<u8>().map_err(|_| invalid(format!("bad stars `{v}`")))?),
            None => meta.map(|m| m.stars),
        };
        let stars = stars.ok_or_else(|| ConlluError::MissingStars { sentence: name.clone() })?;
        if !(1..=5).contains(&stars) {
            return Err(invalid(format!("stars {stars} outside 1..=5")));
        }
        let business_id = block
            .comments
            .get("business_id")
            .cloned()
            .or_else(|| meta.map(|m| m.business_id.clone()))
            .unwrap_or_default();
        let is_fragment = match block.comments.get("is_fragment").map(String::as_str) {
            None => None,
            Some("true" | "1" | "yes") => Some(true),
            Some("false" | "0" | "no") => Some(false),
            Some(other) => return Err(invalid(format!("bad is_fragment `{other}`"))),
        };
        Ok(ParsedSentence {
            sent_id: block.comments.get("sent_id").cloned(),
            text: block.comments.get("text").cloned(),
            tokens: block.tokens,
            review_id,
            business_id,
            stars,
            is_fragment,
        })
    }
}

impl<R: BufRead> Iterator for ConlluReader<'_, R> {
    type Item = Result<ParsedSentence, ConlluError>;

    fn next(&mut self) -> Option<Self::Item> {
        match self.next_block() {
            Ok(Some(block)) => Some(self.finish(block)),
            Ok(None) => None,
            Err(e) => Some(Err(e)),
        }
    }
}

/// Returns `None` for multiword-token ranges and empty nodes.
fn parse_token_line(line: &str, line_no: usize) -> Result<Option<Token>, ConlluError> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != 10 {
        return Err(ConlluError::ColumnCount {
            line: line_no,
            found: cols.len(),
        });
    }
    if cols[0].contains('-') || cols[0].contains('.') {
        return Ok(None);
    }
    let int = |field: &'static str, v: &str| {
        v.parse::<usize>().map_err(|_| ConlluError::BadInteger {
            line: line_no,
            field,
            value: v.to_string(),
        })
    };
    Ok(Some(Token {
        index: int("id", cols[0])?,
        surface: cols[1].to_string(),
        lemma: cols[2].to_string(),
        upos: cols[3].to_string(),
        head: int("head", cols[6])?,
        deprel: cols[7].to_string(),
        space_after: !cols[9].split('|').any(|f| f == "SpaceAfter=No"),
    }))
}

pub fn read_conllu<R: BufRead>(
    reader: R,
    metadata: &HashMap<String, ReviewMeta>,
) -> Result<Vec<ParsedSentence>, ConlluError> {
    ConlluReader::new(reader, metadata).collect()
}

/// Sentence selection policy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterPolicy {
    pub min_len: usize,
    pub max_len: usize,
    pub anchor_values: BTreeSet<String>,
    pub drop_fragments: bool,
}

impl Default for FilterPolicy {
    fn default() -> Self {
        FilterPolicy {
            min_len: 4,
            max_len: 30,
            anchor_values: ["meat", "beef", "chicken", "crab", "steak"]
                .into_iter()
                .map(String::from)
                .collect(),
            drop_fragments: true,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid filter policy: min_len {min_len} / max_len {max_len}")]
pub struct PolicyError {
    pub min_len: usize,
    pub max_len: usize,
}

impl FilterPolicy {
    pub fn validate(&self) -> Result<(), PolicyError> {
        if self.min_len == 0 || self.min_len > self.max_len {
            return Err(PolicyError {
                min_len: self.min_len,
                max_len: self.max_len,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectReason {
    TooShort,
    TooLong,
    NoAnchor,
    Fragment,
}

/// Applies length, anchor and fragment checks in that order.
pub fn passes_filter(s: &ParsedSentence, policy: &FilterPolicy) -> Result<(), RejectReason> {
    let words = s.word_count();
    if words < policy.min_len {
        return Err(RejectReason::TooShort);
    }
    if words > policy.max_len {
        return Err(RejectReason::TooLong);
    }
    if !has_anchor(s, &policy.anchor_values) {
        return Err(RejectReason::NoAnchor);
    }
    if policy.drop_fragments && s.is_fragment() {
        return Err(RejectReason::Fragment);
    }
    Ok(())
}

fn has_anchor(s: &ParsedSentence, anchors: &BTreeSet<String>) -> bool {
    let widest = anchors.iter().map(|a| a.split_whitespace().count()).max().unwrap_or(0);
    let words: Vec<String> = s.tokens.iter().map(|t| t.surface.to_lowercase()).collect();
    let matches = |w: &str| anchors.contains(w) || w.strip_suffix('s').is_some_and(|stem| anchors.contains(stem));
    (1..=widest).any(|width| words.windows(width).any(|span| matches(&span.join(" "))))
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("cannot sample {requested} sentences from a pool of {available}")]
pub struct SampleError {
    pub requested: usize,
    pub available: usize,
}

/// Uniform sample without replacement, returned in pool order.
pub fn sample_sentences<T: Clone>(pool: &[T], n: usize, seed: u64) -> Result<Vec<T>, SampleError> {
    if n > pool.len() {
        return Err(SampleError {
            requested: n,
            available: pool.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, pool.len(), n).into_vec();
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| pool[i].clone()).collect())
}
