//! MR extraction from a single parsed sentence.
//!
//! Nouns that resolve in the attribute lexicon are expanded to their full
//! noun compound, adjectives are collected from `amod`, copular `nsubj` and
//! `compound` relations to the compound head, repeated values are numbered
//! by mention order, and sentence-level style features are read off the
//! star rating and the tokens.

use std::collections::{BTreeSet, HashMap};
use std::ops::RangeInclusive;

use thiserror::Error;

use crate::lexicon::{AttributeLexicon, AttributeType};
use crate::mr::{Adjective, LenBin, MeaningRepresentation, MrTuple, Sentiment, StyleFeatures, Variant};
use crate::sentence::ParsedSentence;

pub const FIRST_PERSON: [&str; 8] = ["i", "we", "me", "us", "my", "our", "mine", "ours"];

/// A lexicon value found in a sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueSpan {
    pub attr: AttributeType,
    /// Lowercased compound tokens joined by `_`.
    pub value: String,
    /// 1-based token positions covered, coordinators included.
    pub span: RangeInclusive<usize>,
    /// Compound head.
    pub head: usize,
    /// Tokens making up `value`.
    pub tokens: Vec<String>,
}

fn is_coordination(deprel: &str) -> bool {
    deprel == "cc" || deprel == "punct"
}

fn base_rel(deprel: &str) -> &str {
    deprel.split(':').next().unwrap_or(deprel)
}

/// Token positions that belong to the noun compound headed by `head`:
/// `compound` dependents (transitively), nouns coordinated with a compound
/// dependent, and the coordinators between them.
fn compound_members(s: &ParsedSentence, head: usize) -> BTreeSet<usize> {
    let mut members = BTreeSet::from([head]);
    loop {
        let mut grew = false;
        for t in &s.tokens {
            if members.contains(&t.index) || !members.contains(&t.head) {
                continue;
            }
            let rel = t.deprel.as_str();
            let governor_is_modifier = t.head != head && base_rel(&s.token(t.head).deprel) == "compound";
            let joins = rel == "compound"
                || (base_rel(rel) == "conj" && governor_is_modifier && t.is_nominal())
                || (is_coordination(rel) && base_rel(&s.token(t.head).deprel) == "conj");
            if joins {
                members.insert(t.index);
                grew = true;
            }
        }
        if !grew {
            return members;
        }
    }
}

/// Maximal run of compound members contiguous with the head, trimmed so
/// that it neither starts nor ends on a coordinator.
fn compound_span(s: &ParsedSentence, head: usize) -> RangeInclusive<usize> {
    let members = compound_members(s, head);
    let mut start = head;
    while start > 1 && members.contains(&(start - 1)) {
        start -= 1;
    }
    let mut end = head;
    while end < s.tokens.len() && members.contains(&(end + 1)) {
        end += 1;
    }
    while start < head && is_coordination(&s.token(start).deprel) {
        start += 1;
    }
    while end > head && is_coordination(&s.token(end).deprel) {
        end -= 1;
    }
    start..=end
}

fn span_words(s: &ParsedSentence, span: &RangeInclusive<usize>) -> Vec<String> {
    span.clone()
        .map(|i| s.token(i))
        .filter(|t| !is_coordination(&t.deprel))
        .map(|t| t.surface.to_lowercase())
        .collect()
}

/// Lexicon values in sentence order. Overlapping candidates resolve to the
/// longest span, then the leftmost.
pub fn extract_values(s: &ParsedSentence, lex: &AttributeLexicon) -> Vec<ValueSpan> {
    let mut candidates: Vec<ValueSpan> = s
        .tokens
        .iter()
        .filter(|t| t.is_nominal())
        .filter_map(|t| {
            let span = compound_span(s, t.index);
            let tokens = span_words(s, &span);
            let attr = lex.lookup(&tokens)?;
            Some(ValueSpan {
                attr,
                value: tokens.join("_"),
                span,
                head: t.index,
                tokens,
            })
        })
        .filter(|v| v.tokens.iter().all(|w| valid_atom(w)))
        .collect();
    candidates.sort_by(|a, b| {
        let len = |v: &ValueSpan| v.span.end() - v.span.start();
        len(b).cmp(&len(a)).then(a.span.start().cmp(b.span.start()))
    });
    let mut taken: Vec<ValueSpan> = Vec::new();
    for c in candidates {
        let overlaps = taken
            .iter()
            .any(|t| c.span.start() <= t.span.end() && t.span.start() <= c.span.end());
        if !overlaps {
            taken.push(c);
        }
    }
    taken.sort_by_key(|v| *v.span.start());
    taken
}

/// Values may not contain MR syntax characters.
fn valid_atom(w: &str) -> bool {
    !w.is_empty() && !w.chars().any(|c| c.is_whitespace() || "(),=[]+_".contains(c))
}

/// Adjective for each value: the candidate nearest the compound head,
/// leftmost on ties.
pub fn extract_adjectives(s: &ParsedSentence, values: &[ValueSpan]) -> Vec<Adjective> {
    values
        .iter()
        .map(|v| {
            let h = v.head;
            let head_tok = s.token(h);
            let mut candidates: Vec<usize> = s
                .tokens
                .iter()
                .filter(|t| {
                    let rel = base_rel(&t.deprel);
                    (t.head == h && rel == "amod") || (t.head == h && rel == "compound" && t.upos == "ADJ")
                })
                .map(|t| t.index)
                .collect();
            if head_tok.head != 0 {
                let gov = s.token(head_tok.head);
                let rel = base_rel(&head_tok.deprel);
                if gov.upos == "ADJ" && (rel == "nsubj" || rel == "compound") {
                    candidates.push(gov.index);
                }
            }
            candidates
                .into_iter()
                .filter(|&i| valid_atom(&s.token(i).surface.to_lowercase()))
                .min_by_key(|&i| (i.abs_diff(h), i))
                .map(|i| Adjective::Word(s.token(i).surface.to_lowercase()))
                .unwrap_or(Adjective::None)
        })
        .collect()
}

/// Numbers repeated (attr, value) pairs 1..k in order.
pub fn assign_mentions(tuples: &[(AttributeType, String, Adjective)]) -> Vec<MrTuple> {
    let mut seen: HashMap<(AttributeType, &str), u32> = HashMap::new();
    tuples
        .iter()
        .map(|(attr, value, adj)| {
            let n = seen.entry((*attr, value.as_str())).or_insert(0);
            *n += 1;
            MrTuple {
                attr: *attr,
                value: value.clone(),
                adj: Some(adj.clone()),
                mention: Some(*n),
            }
        })
        .collect()
}

pub fn style_features(s: &ParsedSentence) -> StyleFeatures {
    let lower: Vec<String> = s.tokens.iter().map(|t| t.surface.to_lowercase()).collect();
    StyleFeatures {
        sentiment: Sentiment::from_stars(s.stars),
        len_bin: LenBin::from_words(s.word_count()),
        first_person: lower.iter().any(|w| FIRST_PERSON.contains(&w.as_str())),
        exclamation: lower.iter().any(|w| w == "!"),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractError {
    #[error("sentence has no lexicon values")]
    NoValues,
}

/// An MR together with the sentence it was extracted from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuiltMr {
    pub mr: MeaningRepresentation,
    pub reference: String,
    /// Multi-token values found, for lexicon expansion.
    pub compounds: Vec<(Vec<String>, AttributeType)>,
}

/// Full +STYLE tuples and style features for a sentence.
pub fn extract_full(
    s: &ParsedSentence,
    lex: &AttributeLexicon,
) -> Result<(Vec<MrTuple>, StyleFeatures, Vec<ValueSpan>), ExtractError> {
    let values = extract_values(s, lex);
    if values.is_empty() {
        return Err(ExtractError::NoValues);
    }
    let adjectives = extract_adjectives(s, &values);
    let triples: Vec<_> = values
        .iter()
        .zip(adjectives)
        .map(|(v, a)| (v.attr, v.value.clone(), a))
        .collect();
    Ok((assign_mentions(&triples), style_features(s), values))
}

pub fn build_mr(s: &ParsedSentence, lex: &AttributeLexicon, variant: Variant) -> Result<BuiltMr, ExtractError> {
    let (tuples, style, values) = extract_full(s, lex)?;
    Ok(BuiltMr {
        mr: MeaningRepresentation::project(&tuples, style, variant),
        reference: s.surface(),
        compounds: values
            .into_iter()
            .filter(|v| v.tokens.len() > 1)
            .map(|v| (v.tokens, v.attr))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sentence::Token;

    /// Builds a sentence from (surface, upos, head, deprel) rows.
    fn parse(rows: &[(&str, &str, usize, &str)], stars: u8) -> ParsedSentence {
        ParsedSentence {
            sent_id: None,
            text: None,
            tokens: rows
                .iter()
                .enumerate()
                .map(|(i, (w, upos, head, rel))| Token {
                    index: i + 1,
                    surface: w.to_string(),
                    lemma: w.to_lowercase(),
                    upos: upos.to_string(),
                    head: *head,
                    deprel: rel.to_string(),
                    space_after: true,
                })
                .collect(),
            review_id: "r".into(),
            business_id: "b".into(),
            stars,
            is_fragment: None,
        }
    }

    fn lexicon() -> AttributeLexicon {
        let mut l = AttributeLexicon::new();
        for f in [
            "chicken", "beef", "sauce", "rice", "tomatoes", "onions", "wrap", "kebabs",
        ] {
            l.insert(f, AttributeType::Food).unwrap();
        }
        l.insert("service", AttributeType::Service).unwrap();
        l
    }

    fn chimichanga() -> ParsedSentence {
        parse(
            &[
                ("The", "DET", 3, "det"),
                ("chicken", "NOUN", 3, "compound"),
                ("chimichanga", "NOUN", 5, "nsubj"),
                ("was", "AUX", 5, "cop"),
                ("tasty", "ADJ", 0, "root"),
                ("but", "CCONJ", 11, "cc"),
                ("the", "DET", 8, "det"),
                ("beef", "NOUN", 11, "nsubj"),
                ("was", "AUX", 11, "cop"),
                ("even", "ADV", 11, "advmod"),
                ("better", "ADV", 5, "conj"),
                ("!", "PUNCT", 5, "punct"),
            ],
            5,
        )
    }

    #[test]
    fn chimichanga_values_and_adjectives() {
        let s = chimichanga();
        let values = extract_values(&s, &lexicon());
        let got: Vec<_> = values
            .iter()
            .map(|v| (v.attr, v.value.as_str(), v.span.clone()))
            .collect();
        assert_eq!(
            got,
            vec![
                (AttributeType::Food, "chicken_chimichanga", 2..=3),
                (AttributeType::Food, "beef", 8..=8),
            ]
        );
        let adjs = extract_adjectives(&s, &values);
        assert_eq!(adjs, vec![Adjective::Word("tasty".into()), Adjective::None]);
    }

    #[test]
    fn coordinated_compound_modifiers_join_the_value() {
        // The beef and chicken kebabs were succulent
        let s = parse(
            &[
                ("The", "DET", 5, "det"),
                ("beef", "NOUN", 5, "compound"),
                ("and", "CCONJ", 4, "cc"),
                ("chicken", "NOUN", 2, "conj"),
                ("kebabs", "NOUN", 7, "nsubj"),
                ("were", "AUX", 7, "cop"),
                ("succulent", "ADJ", 0, "root"),
            ],
            4,
        );
        let values = extract_values(&s, &lexicon());
        assert_eq!(values.len(), 1);
        assert_eq!(values[0].value, "beef_chicken_kebabs");
        assert_eq!(values[0].span, 2..=5);
        assert_eq!(
            extract_adjectives(&s, &values),
            vec![Adjective::Word("succulent".into())]
        );
    }

    #[test]
    fn copular_adjective_attaches_to_subject() {
        // service was crazy slow
        let s = parse(
            &[
                ("service", "NOUN", 4, "nsubj"),
                ("was", "AUX", 4, "cop"),
                ("crazy", "ADV", 4, "advmod"),
                ("slow", "ADJ", 0, "root"),
            ],
            3,
        );
        let values = extract_values(&s, &lexicon());
        assert_eq!(values[0].attr, AttributeType::Service);
        assert_eq!(extract_adjectives(&s, &values), vec![Adjective::Word("slow".into())]);
    }

    #[test]
    fn nearest_adjective_wins() {
        // a spicy delicious sauce
        let s = parse(
            &[
                ("a", "DET", 4, "det"),
                ("spicy", "ADJ", 4, "amod"),
                ("delicious", "ADJ", 4, "amod"),
                ("sauce", "NOUN", 0, "root"),
            ],
            4,
        );
        let values = extract_values(&s, &lexicon());
        assert_eq!(
            extract_adjectives(&s, &values),
            vec![Adjective::Word("delicious".into())]
        );
    }

    #[test]
    fn equidistant_adjectives_pick_leftmost() {
        // hot rice warm  (amod on both sides at distance 1)
        let s = parse(
            &[
                ("hot", "ADJ", 2, "amod"),
                ("rice", "NOUN", 0, "root"),
                ("warm", "ADJ", 2, "amod"),
            ],
            4,
        );
        let values = extract_values(&s, &lexicon());
        assert_eq!(extract_adjectives(&s, &values), vec![Adjective::Word("hot".into())]);
    }

    #[test]
    fn no_lexicon_nouns_means_no_values() {
        let s = parse(&[("pizza", "NOUN", 2, "nsubj"), ("rocks", "VERB", 0, "root")], 5);
        assert!(extract_values(&s, &lexicon()).is_empty());
        assert_eq!(
            build_mr(&s, &lexicon(), Variant::Base).unwrap_err(),
            ExtractError::NoValues
        );
    }

    #[test]
    fn mentions_count_per_value() {
        use AttributeType::Food;
        let adj = |w: &str| Adjective::Word(w.into());
        let tuples = assign_mentions(&[
            (Food, "chicken".into(), adj("bland")),
            (Food, "chicken".into(), adj("spicy")),
            (Food, "rice".into(), adj("spicy")),
            (Food, "chicken".into(), adj("seasoned")),
            (Food, "rice".into(), adj("spicy")),
        ]);
        let mentions: Vec<_> = tuples.iter().map(|t| t.mention.unwrap()).collect();
        assert_eq!(mentions, vec![1, 2, 1, 3, 2]);
        let distinct = assign_mentions(&[(Food, "a".into(), Adjective::None), (Food, "b".into(), Adjective::None)]);
        assert!(distinct.iter().all(|t| t.mention == Some(1)));
    }

    #[test]
    fn style_feature_bins() {
        let s = chimichanga();
        assert_eq!(
            style_features(&s),
            StyleFeatures {
                sentiment: Sentiment::Positive,
                len_bin: LenBin::Medium,
                first_person: false,
                exclamation: true,
            }
        );
        let words = "I think the beef here is quite good".split(' ');
        let rows: Vec<(&str, &str, usize, &str)> = words
            .enumerate()
            .map(|(i, w)| (w, "X", if i == 1 { 0 } else { 2 }, if i == 1 { "root" } else { "dep" }))
            .collect();
        let s = parse(&rows, 3);
        assert_eq!(
            style_features(&s),
            StyleFeatures {
                sentiment: Sentiment::Neutral,
                len_bin: LenBin::Short,
                first_person: true,
                exclamation: false,
            }
        );
    }

    #[test]
    fn build_projects_per_variant() {
        let s = chimichanga();
        let lex = lexicon();
        let base = build_mr(&s, &lex, Variant::Base).unwrap();
        assert_eq!(
            base.mr.to_text(),
            "(attr=food, val=chicken_chimichanga), (attr=food, val=beef)"
        );
        let adj = build_mr(&s, &lex, Variant::Adj).unwrap();
        assert_eq!(
            adj.mr.to_text(),
            "(attr=food, val=chicken_chimichanga, adj=tasty), (attr=food, val=beef, adj=no_adj)"
        );
        assert!(adj.mr.sentiment.is_none());
        let style = build_mr(&s, &lex, Variant::Style).unwrap();
        assert_eq!(
            style.reference,
            "The chicken chimichanga was tasty but the beef was even better !"
        );
        assert_eq!(
            style.compounds,
            vec![(
                vec!["chicken".to_string(), "chimichanga".to_string()],
                AttributeType::Food
            )]
        );
        assert_eq!(style.mr.restrict(Variant::Base).unwrap(), base.mr);
    }
}
