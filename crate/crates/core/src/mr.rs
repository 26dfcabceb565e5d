//! Meaning representations and their canonical text encoding.
//!
//! ```text
//! (attr=food, val=chicken_chimichanga, adj=tasty, mention=1), (attr=food, val=beef, adj=no_adj, mention=1) +[sentiment=positive, len=medium, first_person=false, exclamation=true]
//! ```
//!
//! Fields a variant does not carry are left out, both in the text and in
//! the in-memory value, so that parsing the text gives back the same MR.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::AttributeType;

pub const NO_ADJ: &str = "no_adj";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "BASE")]
    Base,
    #[serde(rename = "+ADJ")]
    Adj,
    #[serde(rename = "+SENT")]
    Sent,
    #[serde(rename = "+STYLE")]
    Style,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Base, Variant::Adj, Variant::Sent, Variant::Style];

    pub fn has_adj(self) -> bool {
        self != Variant::Base
    }

    pub fn has_sentiment(self) -> bool {
        matches!(self, Variant::Sent | Variant::Style)
    }

    pub fn has_style(self) -> bool {
        self == Variant::Style
    }

    pub fn label(self) -> &'static str {
        match self {
            Variant::Base => "BASE",
            Variant::Adj => "+ADJ",
            Variant::Sent => "+SENT",
            Variant::Style => "+STYLE",
        }
    }

    /// Short lowercase name used on the command line and in file names.
    pub fn slug(self) -> &'static str {
        match self {
            Variant::Base => "base",
            Variant::Adj => "adj",
            Variant::Sent => "sent",
            Variant::Style => "style",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Variant {
    type Err = MrParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.slug() == s.to_lowercase() || v.label() == s.to_uppercase())
            .ok_or_else(|| MrParseError::new(format!("unknown variant `{s}`")))
    }
}

/// Adjective slot of a tuple.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Adjective {
    None,
    Word(String),
}

impl Adjective {
    pub fn word(&self) -> Option<&str> {
        match self {
            Adjective::None => None,
            Adjective::Word(w) => Some(w),
        }
    }

    pub fn as_str(&self) -> &str {
        self.word().unwrap_or(NO_ADJ)
    }

    pub fn parse(s: &str) -> Adjective {
        if s == NO_ADJ {
            Adjective::None
        } else {
            Adjective::Word(s.to_string())
        }
    }
}

impl Serialize for Adjective {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Adjective {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(Adjective::parse(&s))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MrTuple {
    pub attr: AttributeType,
    #[serde(rename = "val")]
    pub value: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adj: Option<Adjective>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mention: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sentiment {
    Negative = 1,
    Neutral = 2,
    Positive = 3,
}

impl Sentiment {
    pub fn from_stars(stars: u8) -> Sentiment {
        match stars {
            0..=2 => Sentiment::Negative,
            3 => Sentiment::Neutral,
            _ => Sentiment::Positive,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sentiment::Negative => "negative",
            Sentiment::Neutral => "neutral",
            Sentiment::Positive => "positive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LenBin {
    Short,
    Medium,
    Long,
}

impl LenBin {
    pub const ALL: [LenBin; 3] = [LenBin::Short, LenBin::Medium, LenBin::Long];

    /// short ≤ 10 words, medium 11–20, long ≥ 21.
    pub fn from_words(words: usize) -> LenBin {
        match words {
            0..=10 => LenBin::Short,
            11..=20 => LenBin::Medium,
            _ => LenBin::Long,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LenBin::Short => "short",
            LenBin::Medium => "medium",
            LenBin::Long => "long",
        }
    }
}

/// Sentence-level features of a reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StyleFeatures {
    pub sentiment: Sentiment,
    pub len_bin: LenBin,
    pub first_person: bool,
    pub exclamation: bool,
}

/// The +STYLE-only part of the style block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StyleTargets {
    #[serde(rename = "len")]
    pub len_bin: LenBin,
    pub first_person: bool,
    pub exclamation: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeaningRepresentation {
    pub variant: Variant,
    pub tuples: Vec<MrTuple>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentiment: Option<Sentiment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub style: Option<StyleTargets>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct MrParseError(pub String);

impl MrParseError {
    fn new(msg: impl Into<String>) -> Self {
        MrParseError(msg.into())
    }
}

/// Characters that may not appear inside a value or adjective.
const RESERVED: &[char] = &['(', ')', ',', '=', '[', ']', '+'];

fn check_atom(kind: &str, s: &str) -> Result<(), MrParseError> {
    if s.is_empty() || s.chars().any(|c| c.is_whitespace() || RESERVED.contains(&c)) {
        return Err(MrParseError::new(format!("invalid {kind} `{s}`")));
    }
    if s.chars().any(char::is_uppercase) {
        return Err(MrParseError::new(format!("{kind} `{s}` is not lowercase")));
    }
    Ok(())
}

impl MeaningRepresentation {
    /// Projects a fully populated +STYLE extraction onto `variant`.
    pub fn project(tuples: &[MrTuple], style: StyleFeatures, variant: Variant) -> Self {
        let tuples = tuples
            .iter()
            .map(|t| MrTuple {
                attr: t.attr,
                value: t.value.clone(),
                adj: if variant.has_adj() { t.adj.clone() } else { None },
                mention: if variant.has_style() { t.mention } else { None },
            })
            .collect();
        MeaningRepresentation {
            variant,
            tuples,
            sentiment: variant.has_sentiment().then_some(style.sentiment),
            style: variant.has_style().then_some(StyleTargets {
                len_bin: style.len_bin,
                first_person: style.first_person,
                exclamation: style.exclamation,
            }),
        }
    }

    /// Re-projects onto a poorer variant. Returns `None` when `variant` needs
    /// fields this MR does not carry.
    pub fn restrict(&self, variant: Variant) -> Option<Self> {
        if variant > self.variant {
            return None;
        }
        let mut out = self.clone();
        out.variant = variant;
        for t in &mut out.tuples {
            if !variant.has_adj() {
                t.adj = None;
            }
            if !variant.has_style() {
                t.mention = None;
            }
        }
        if !variant.has_sentiment() {
            out.sentiment = None;
        }
        if !variant.has_style() {
            out.style = None;
        }
        Some(out)
    }

    /// Checks field presence against the variant and value syntax.
    pub fn validate(&self) -> Result<(), MrParseError> {
        if self.tuples.is_empty() {
            return Err(MrParseError::new("MR has no tuples"));
        }
        for t in &self.tuples {
            check_atom("value", &t.value)?;
            if t.adj.is_some() != self.variant.has_adj() {
                return Err(MrParseError::new(format!(
                    "adj presence does not match {}",
                    self.variant
                )));
            }
            if let Some(Adjective::Word(w)) = &t.adj {
                check_atom("adjective", w)?;
                if w == NO_ADJ {
                    return Err(MrParseError::new("adjective word spells the no_adj marker"));
                }
            }
            match t.mention {
                Some(0) => return Err(MrParseError::new("mention must be >= 1")),
                Some(_) if !self.variant.has_style() => {
                    return Err(MrParseError::new(format!("{} carries no mention", self.variant)))
                }
                None if self.variant.has_style() => return Err(MrParseError::new("missing mention")),
                _ => {}
            }
        }
        if self.sentiment.is_some() != self.variant.has_sentiment() || self.style.is_some() != self.variant.has_style()
        {
            return Err(MrParseError::new(format!(
                "style block does not match {}",
                self.variant
            )));
        }
        Ok(())
    }

    /// Canonical text rendering.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, t) in self.tuples.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            out.push_str("(attr=");
            out.push_str(t.attr.as_str());
            out.push_str(", val=");
            out.push_str(&t.value);
            if let Some(adj) = &t.adj {
                out.push_str(", adj=");
                out.push_str(adj.as_str());
            }
            if let Some(m) = t.mention {
                out.push_str(", mention=");
                out.push_str(&m.to_string());
            }
            out.push(')');
        }
        if let Some(sentiment) = self.sentiment {
            out.push_str(" +[sentiment=");
            out.push_str(sentiment.as_str());
            if let Some(s) = &self.style {
                out.push_str(", len=");
                out.push_str(s.len_bin.as_str());
                out.push_str(", first_person=");
                out.push_str(if s.first_person { "true" } else { "false" });
                out.push_str(", exclamation=");
                out.push_str(if s.exclamation { "true" } else { "false" });
            }
            out.push(']');
        }
        out
    }

    /// Parses the canonical text rendering; the variant is inferred from the
    /// fields present.
    pub fn parse_text(text: &str) -> Result<Self, MrParseError> {
        let (tuple_part, style_part) = match text.find(" +[") {
            Some(pos) => {
                let block = &text[pos + 3..];
                let block = block
                    .strip_suffix(']')
                    .ok_or_else(|| MrParseError::new("unterminated style block"))?;
                (&text[..pos], Some(block))
            }
            None => (text, None),
        };

        let mut tuples = Vec::new();
        let mut rest = tuple_part;
        loop {
            let body = rest
                .strip_prefix('(')
                .ok_or_else(|| MrParseError::new(format!("expected `(` at `{rest}`")))?;
            let close = body.find(')').ok_or_else(|| MrParseError::new("unterminated tuple"))?;
            tuples.push(parse_tuple(&body[..close])?);
            rest = &body[close + 1..];
            if rest.is_empty() {
                break;
            }
            rest = rest
                .strip_prefix(", ")
                .ok_or_else(|| MrParseError::new(format!("expected `, ` between tuples at `{rest}`")))?;
        }

        let (sentiment, style) = match style_part {
            None => (None, None),
            Some(block) => parse_style(block)?,
        };
        let has_adj = tuples[0].adj.is_some();
        let has_mention = tuples[0].mention.is_some();
        let variant = match (has_adj, sentiment.is_some(), style.is_some() || has_mention) {
            (false, false, false) => Variant::Base,
            (true, false, false) => Variant::Adj,
            (true, true, false) => Variant::Sent,
            (true, true, true) => Variant::Style,
            _ => return Err(MrParseError::new("field combination matches no variant")),
        };
        let mr = MeaningRepresentation {
            variant,
            tuples,
            sentiment,
            style,
        };
        mr.validate()?;
        Ok(mr)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("MR serializes")
    }
}

impl fmt::Display for MeaningRepresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn parse_fields(body: &str) -> Result<Vec<(&str, &str)>, MrParseError> {
    body.split(", ")
        .map(|kv| {
            kv.split_once('=')
                .ok_or_else(|| MrParseError::new(format!("expected key=value, got `{kv}`")))
        })
        .collect()
}

fn parse_tuple(body: &str) -> Result<MrTuple, MrParseError> {
    let fields = parse_fields(body)?;
    let keys: Vec<&str> = fields.iter().map(|(k, _)| *k).collect();
    if !matches!(
        keys.as_slice(),
        ["attr", "val"] | ["attr", "val", "adj"] | ["attr", "val", "adj", "mention"]
    ) {
        return Err(MrParseError::new(format!("unexpected tuple fields {keys:?}")));
    }
    let attr = fields[0]
        .1
        .parse::<AttributeType>()
        .map_err(|e| MrParseError::new(e.to_string()))?;
    let value = fields[1].1.to_string();
    check_atom("value", &value)?;
    let adj = fields.get(2).map(|(_, v)| Adjective::parse(v));
    let mention = match fields.get(3) {
        Some((_, m)) => Some(
            m.parse::<u32>()
                .map_err(|_| MrParseError::new(format!("bad mention `{m}`")))?,
        ),
        None => None,
    };
    Ok(MrTuple {
        attr,
        value,
        adj,
        mention,
    })
}

fn parse_bool(v: &str) -> Result<bool, MrParseError> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(MrParseError::new(format!("bad boolean `{v}`"))),
    }
}

fn parse_style(block: &str) -> Result<(Option<Sentiment>, Option<StyleTargets>), MrParseError> {
    let fields = parse_fields(block)?;
    let sentiment = |v: &str| match v {
        "negative" => Ok(Sentiment::Negative),
        "neutral" => Ok(Sentiment::Neutral),
        "positive" => Ok(Sentiment::Positive),
        _ => Err(MrParseError::new(format!("bad sentiment `{v}`"))),
    };
    match fields.as_slice() {
        [("sentiment", s)] => Ok((Some(sentiment(s)?), None)),
        [("sentiment", s), ("len", l), ("first_person", p), ("exclamation", e)] => {
            let len_bin = LenBin::ALL
                .into_iter()
                .find(|b| b.as_str() == *l)
                .ok_or_else(|| MrParseError::new(format!("bad len `{l}`")))?;
            Ok((
                Some(sentiment(s)?),
                Some(StyleTargets {
                    len_bin,
                    first_person: parse_bool(p)?,
                    exclamation: parse_bool(e)?,
                }),
            ))
        }
        _ => Err(MrParseError::new(format!("unexpected style block `{block}`"))),
    }
}
