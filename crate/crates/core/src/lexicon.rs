//! Attribute lexicons: surface noun phrases mapped to restaurant attribute types.
//!
//! Lexicon files are plain UTF-8 text, one surface form per line, `#` starting
//! a comment line. A TOML manifest maps each attribute type to its file:
//!
//! ```toml
//! food = "food.txt"
//! cuisine = "cuisine.txt"
//! ```
//!
//! Keys are normalized to lowercase, single-space-joined tokens. Underscores
//! are read as token separators so that MR values (`chicken_chimichanga`) and
//! lexicon keys (`chicken chimichanga`) address the same entry.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The seven restaurant attribute types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeType {
    Food,
    Cuisine,
    Service,
    Staff,
    Ambiance,
    Price,
    RestaurantType,
}

impl AttributeType {
    pub const ALL: [AttributeType; 7] = [
        AttributeType::Food,
        AttributeType::Cuisine,
        AttributeType::Service,
        AttributeType::Staff,
        AttributeType::Ambiance,
        AttributeType::Price,
        AttributeType::RestaurantType,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AttributeType::Food => "food",
            AttributeType::Cuisine => "cuisine",
            AttributeType::Service => "service",
            AttributeType::Staff => "staff",
            AttributeType::Ambiance => "ambiance",
            AttributeType::Price => "price",
            AttributeType::RestaurantType => "restaurant_type",
        }
    }

    /// Delexicalization placeholder, e.g. `[FOOD]`.
    pub fn placeholder(self) -> &'static str {
        match self {
            AttributeType::Food => "[FOOD]",
            AttributeType::Cuisine => "[CUISINE]",
            AttributeType::Service => "[SERVICE]",
            AttributeType::Staff => "[STAFF]",
            AttributeType::Ambiance => "[AMBIANCE]",
            AttributeType::Price => "[PRICE]",
            AttributeType::RestaurantType => "[RESTAURANT]",
        }
    }
}

impl fmt::Display for AttributeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown attribute type `{0}`")]
pub struct UnknownAttribute(pub String);

impl FromStr for AttributeType {
    type Err = UnknownAttribute;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "food" => Ok(AttributeType::Food),
            "cuisine" => Ok(AttributeType::Cuisine),
            "service" => Ok(AttributeType::Service),
            "staff" => Ok(AttributeType::Staff),
            "ambiance" => Ok(AttributeType::Ambiance),
            "price" => Ok(AttributeType::Price),
            "restaurant_type" | "restaurant-type" => Ok(AttributeType::RestaurantType),
            other => Err(UnknownAttribute(other.to_string())),
        }
    }
}

/// Where a lexicon entry came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntrySource {
    SeedFile,
    CompoundExpansion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Entry {
    pub attr: AttributeType,
    pub source: EntrySource,
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("cannot read lexicon file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid lexicon manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },
    #[error("`{form}` is already typed {existing}, cannot also be {requested}")]
    Conflict {
        form: String,
        existing: AttributeType,
        requested: AttributeType,
    },
    #[error("compound `{form}` does not resolve to {requested} (resolves to {resolved:?})")]
    HeadMismatch {
        form: String,
        requested: AttributeType,
        resolved: Option<AttributeType>,
    },
    #[error("empty phrase")]
    Empty,
}

/// Lowercases, maps underscores to spaces and collapses whitespace.
pub fn normalize(s: &str) -> String {
    s.to_lowercase()
        .replace('_', " ")
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

/// Surface form → attribute type map with longest-match lookup.
#[derive(Debug, Clone, Default)]
pub struct AttributeLexicon {
    entries: BTreeMap<String, Entry>,
    max_tokens: usize,
}

impl AttributeLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Longest entry, in tokens.
    pub fn max_tokens(&self) -> usize {
        self.max_tokens
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &Entry)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Inserts a seed entry. Re-inserting the same form with the same type is a no-op.
    pub fn insert(&mut self, form: &str, attr: AttributeType) -> Result<(), LexiconError> {
        self.insert_with_source(form, attr, EntrySource::SeedFile)
    }

    fn insert_with_source(&mut self, form: &str, attr: AttributeType, source: EntrySource) -> Result<(), LexiconError> {
        let key = normalize(form);
        if key.is_empty() {
            return Err(LexiconError::Empty);
        }
        if let Some(existing) = self.entries.get(&key) {
            if existing.attr != attr {
                return Err(LexiconError::Conflict {
                    form: key,
                    existing: existing.attr,
                    requested: attr,
                });
            }
            return Ok(());
        }
        self.max_tokens = self.max_tokens.max(key.split(' ').count());
        self.entries.insert(key, Entry { attr, source });
        Ok(())
    }

    /// Exact lookup of an already-joined form.
    pub fn get(&self, form: &str) -> Option<&Entry> {
        self.entries.get(&normalize(form))
    }

    /// Resolves a phrase to an attribute type.
    ///
    /// The full join is tried first; failing that, the longest contiguous
    /// sub-phrase that is an entry decides, the rightmost one on ties since
    /// English compounds are head-final.
    pub fn lookup<S: AsRef<str>>(&self, phrase: &[S]) -> Option<AttributeType> {
        let tokens = phrase_tokens(phrase);
        if tokens.is_empty() {
            return None;
        }
        let longest = tokens.len().min(self.max_tokens.max(1));
        if let Some(e) = self.entries.get(&tokens.join(" ")) {
            return Some(e.attr);
        }
        for width in (1..=longest).rev() {
            for start in (0..=tokens.len() - width).rev() {
                if let Some(e) = self.entries.get(&tokens[start..start + width].join(" ")) {
                    return Some(e.attr);
                }
            }
        }
        None
    }

    /// Longest entry starting at `start` in an already-lowercased token stream.
    /// Returns the matched width in tokens.
    pub fn longest_match_at<S: AsRef<str>>(&self, tokens: &[S], start: usize) -> Option<(usize, AttributeType)> {
        let widest = self.max_tokens.min(tokens.len().saturating_sub(start));
        let mut key = String::new();
        let mut best = None;
        for (i, tok) in tokens[start..start + widest].iter().enumerate() {
            if i > 0 {
                key.push(' ');
            }
            key.push_str(tok.as_ref());
            if let Some(e) = self.entries.get(&key) {
                best = Some((i + 1, e.attr));
            }
        }
        best
    }

    /// Records a noun compound as a new entry of the type its parts resolve to.
    pub fn record_compound<S: AsRef<str>>(&mut self, compound: &[S], attr: AttributeType) -> Result<(), LexiconError> {
        let tokens = phrase_tokens(compound);
        if tokens.is_empty() {
            return Err(LexiconError::Empty);
        }
        let resolved = self.lookup(&tokens);
        if resolved != Some(attr) {
            return Err(LexiconError::HeadMismatch {
                form: tokens.join(" "),
                requested: attr,
                resolved,
            });
        }
        self.insert_with_source(&tokens.join(" "), attr, EntrySource::CompoundExpansion)
    }

    /// Entries added by compound expansion, sorted by form.
    pub fn compounds(&self) -> impl Iterator<Item = (&str, AttributeType)> {
        self.entries
            .iter()
            .filter(|(_, e)| e.source == EntrySource::CompoundExpansion)
            .map(|(k, e)| (k.as_str(), e.attr))
    }

    /// Parses one lexicon file body into `self` under `attr`.
    pub fn extend_from_str(&mut self, body: &str, attr: AttributeType) -> Result<(), LexiconError> {
        for line in body.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            self.insert(line, attr)?;
        }
        Ok(())
    }
}

fn phrase_tokens<S: AsRef<str>>(phrase: &[S]) -> Vec<String> {
    phrase
        .iter()
        .flat_map(|t| {
            normalize(t.as_ref())
                .split(' ')
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Loads one file per attribute type.
pub fn load_lexicons(paths: &HashMap<AttributeType, PathBuf>) -> Result<AttributeLexicon, LexiconError> {
    let mut lex = AttributeLexicon::new();
    // Fixed type order keeps conflict reporting deterministic.
    for attr in AttributeType::ALL {
        let Some(path) = paths.get(&attr) else { continue };
        let body = fs::read_to_string(path).map_err(|source| LexiconError::Io {
            path: path.clone(),
            source,
        })?;
        lex.extend_from_str(&body, attr)?;
    }
    Ok(lex)
}

/// Reads a TOML manifest (`food = "food.txt"`, ...). Relative paths resolve
/// against the manifest's directory.
pub fn read_manifest(path: &Path) -> Result<HashMap<AttributeType, PathBuf>, LexiconError> {
    let body = fs::read_to_string(path).map_err(|source| LexiconError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let raw: BTreeMap<String, String> = toml::from_str(&body).map_err(|e| LexiconError::Manifest {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let mut out = HashMap::new();
    for (key, file) in raw {
        let attr = key.parse::<AttributeType>().map_err(|e| LexiconError::Manifest {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        out.insert(attr, base.join(file));
    }
    Ok(out)
}

pub fn load_manifest(path: &Path) -> Result<AttributeLexicon, LexiconError> {
    load_lexicons(&read_manifest(path)?)
}
